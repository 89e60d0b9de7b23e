//! Sensor and actuation degradation: odometry drift, a noisy distance
//! channel, and an unreliable place recognizer with false negatives and
//! false positives.
//!
//! Every noise source draws from its own counter-mode RNG stream derived
//! from one episode seed, so enabling or disabling one source never
//! shifts the draws of another and runs stay reproducible bit for bit.

use crate::geometry::Vec2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::fmt;
use std::str::FromStr;

/// How false-positive recognitions are injected.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FpMode {
    /// Independent Bernoulli draw on every recognizer query.
    PerTick,
    /// A pre-drawn schedule of spurious events for the whole episode;
    /// each pending event fires at the first query when something is
    /// stored, so roughly `p_fp * time_limit` events per episode.
    PerEpisode,
}

impl fmt::Display for FpMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FpMode::PerTick => "per_tick",
            FpMode::PerEpisode => "per_episode",
        })
    }
}

impl FromStr for FpMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "per_tick" => Ok(FpMode::PerTick),
            "per_episode" => Ok(FpMode::PerEpisode),
            other => Err(format!(
                "unknown false-positive mode '{other}' (expected per_tick or per_episode)"
            )),
        }
    }
}

/// Noise intensities for one episode. All zeros reproduce the ideal
/// robot exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseConfig {
    /// Odometry drift: std dev of the per-component position error added
    /// per second of travel (m/s).
    pub odom_sigma: f64,
    /// Probability that a true revisit goes unrecognized.
    pub p_fn: f64,
    /// False-positive recognition rate (interpreted per `fp_mode`).
    pub p_fp: f64,
    pub fp_mode: FpMode,
    /// Std dev of the goal-distance channel error (m); zero uses the
    /// robot's own position estimate instead.
    pub dt_sigma: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            odom_sigma: 0.0,
            p_fn: 0.0,
            p_fp: 0.0,
            fp_mode: FpMode::PerEpisode,
            dt_sigma: 0.0,
        }
    }
}

/// Independent RNG streams split from one episode seed.
#[derive(Clone, Debug)]
pub struct NoiseStreams {
    pub odometry: ChaCha8Rng,
    pub recognizer: ChaCha8Rng,
    pub dt: ChaCha8Rng,
    pub ransac: ChaCha8Rng,
}

impl NoiseStreams {
    pub fn new(seed: u64) -> Self {
        let stream = |k: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            rng
        };
        NoiseStreams {
            odometry: stream(0),
            recognizer: stream(1),
            dt: stream(2),
            ransac: stream(3),
        }
    }
}

/// Corrupt one tick's applied displacement with odometry drift. A zero
/// sigma passes the displacement through untouched without consuming any
/// randomness.
pub fn noisy_displacement(
    applied: Vec2,
    sigma: f64,
    dt: f64,
    rng: &mut ChaCha8Rng,
) -> Vec2 {
    if sigma == 0.0 {
        return applied;
    }
    let normal = Normal::new(0.0, sigma * dt).expect("finite non-negative sigma");
    applied + Vec2::new(normal.sample(rng), normal.sample(rng))
}

/// Corrupt the goal-distance channel; negative draws clamp to zero.
/// A zero sigma passes the true value through without consuming draws.
pub fn noisy_distance(true_distance: f64, sigma: f64, rng: &mut ChaCha8Rng) -> f64 {
    if sigma == 0.0 {
        return true_distance;
    }
    let normal = Normal::new(true_distance, sigma).expect("finite non-negative sigma");
    normal.sample(rng).max(0.0)
}

/// Remembers visited points and reports revisits, unreliably.
///
/// A stored point only becomes matchable `cooldown` seconds after it was
/// stored (so the robot does not instantly recognize the spot it is
/// standing on), recognitions trigger on *entering* a matchable point's
/// neighborhood (false negatives can miss a whole visit, not just one
/// query), and after any recognition the whole recognizer stays quiet for
/// another `cooldown` to avoid retrigger storms right after a reaction.
/// A point that just caused a recognition additionally stays quiet for
/// `match_refractory`: the reaction to a revisit typically walks back
/// through the very same spot, and re-reporting it then would undo the
/// reaction instead of informing it.
#[derive(Clone, Debug)]
pub struct PointRecognizer {
    eps: f64,
    cooldown: f64,
    match_refractory: f64,
    p_fn: f64,
    p_fp: f64,
    fp_mode: FpMode,
    points: Vec<StoredPoint>,
    was_present: bool,
    last_fire: f64,
    fp_schedule: Vec<f64>,
    fp_next: usize,
}

#[derive(Clone, Copy, Debug)]
struct StoredPoint {
    pos: Vec2,
    stored: f64,
    matched: f64,
}

pub const RECOGNIZER_EPS: f64 = 0.25;
pub const RECOGNIZER_COOLDOWN: f64 = 10.0;
pub const RECOGNIZER_MATCH_REFRACTORY: f64 = 30.0;

impl PointRecognizer {
    /// Build for one episode. The per-episode false-positive schedule
    /// draws one Bernoulli trial per whole second of the time limit and
    /// places each success uniformly in time.
    pub fn new(cfg: &NoiseConfig, time_limit: f64, rng: &mut ChaCha8Rng) -> Self {
        let mut fp_schedule = Vec::new();
        if cfg.fp_mode == FpMode::PerEpisode && cfg.p_fp > 0.0 {
            let trials = time_limit.floor() as usize;
            for _ in 0..trials {
                if rng.gen_bool(cfg.p_fp) {
                    fp_schedule.push(rng.gen_range(0.0..time_limit));
                }
            }
            fp_schedule.sort_by(f64::total_cmp);
        }
        PointRecognizer {
            eps: RECOGNIZER_EPS,
            cooldown: RECOGNIZER_COOLDOWN,
            match_refractory: RECOGNIZER_MATCH_REFRACTORY,
            p_fn: cfg.p_fn,
            p_fp: cfg.p_fp,
            fp_mode: cfg.fp_mode,
            points: Vec::new(),
            was_present: false,
            last_fire: f64::NEG_INFINITY,
            fp_schedule,
            fp_next: 0,
        }
    }

    pub fn store(&mut self, p: Vec2, time: f64) {
        self.points.push(StoredPoint {
            pos: p,
            stored: time,
            matched: f64::NEG_INFINITY,
        });
    }

    pub fn stored(&self) -> usize {
        self.points.len()
    }

    /// Query at the current (estimated) position. Returns true when the
    /// recognizer claims this place was visited before.
    pub fn check(&mut self, p: Vec2, time: f64, rng: &mut ChaCha8Rng) -> bool {
        // Presence is geometric regardless of point age: a visit that
        // began before a point matured does not count as a revisit when
        // the point's store cooldown runs out underfoot.
        let present = self.points.iter().any(|q| p.dist(q.pos) <= self.eps);
        let matchable = self.points.iter().any(|q| {
            p.dist(q.pos) <= self.eps
                && time - q.stored >= self.cooldown
                && time - q.matched >= self.match_refractory
        });
        let entered = present && !self.was_present;
        self.was_present = present;

        if time - self.last_fire < self.cooldown {
            return false;
        }
        if entered && matchable {
            let fire = self.p_fn == 0.0 || !rng.gen_bool(self.p_fn);
            if fire {
                self.last_fire = time;
                for q in &mut self.points {
                    if p.dist(q.pos) <= self.eps {
                        q.matched = time;
                    }
                }
                return true;
            }
            return false;
        }
        match self.fp_mode {
            FpMode::PerTick => {
                if self.p_fp > 0.0 && !self.points.is_empty() && rng.gen_bool(self.p_fp) {
                    self.last_fire = time;
                    return true;
                }
            }
            FpMode::PerEpisode => {
                if self.fp_next < self.fp_schedule.len()
                    && self.fp_schedule[self.fp_next] <= time
                    && !self.points.is_empty()
                {
                    self.fp_next += 1;
                    self.last_fire = time;
                    return true;
                }
            }
        }
        false
    }
}
