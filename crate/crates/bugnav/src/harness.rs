//! Episode and batch execution.
//!
//! An episode wires one strategy to one environment under one noise
//! configuration and runs the sense-decide-act loop to the goal or the
//! time limit. A batch crosses environments x strategies x noise points,
//! runs episodes in a thread pool, and writes one CSV row per episode.
//!
//! Reproducibility rules: every episode's randomness comes from the
//! environment seed (so strategies on the same map share noise draws and
//! comparisons pair up), results depend only on (environment, strategy,
//! noise point), and the output CSV is sorted by run id and rewritten
//! atomically at the end, so files are byte-identical regardless of
//! worker count, interruptions, or resumes.

use crate::bugs::{Algorithm, BugController, BugInput};
use crate::envgen::{generate, Environment, GenError, GenParams};
use crate::geometry::Vec2;
use crate::noise::{
    noisy_displacement, noisy_distance, FpMode, NoiseConfig, NoiseStreams, PointRecognizer,
};
use crate::oracle::shortest_path_length;
use crate::robot;
use crate::wallfollow::WfParams;
use rayon::prelude::*;
use std::collections::HashSet;
use std::fmt::Write as FmtWrite;
use std::fs;
use std::io::Write as IoWrite;
use std::path::Path;
use std::sync::Mutex;
use thiserror::Error;

/// Fixed per-episode settings (noise comes from the batch grid).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpisodeParams {
    pub time_limit: f64,
    pub goal_radius: f64,
    pub dt: f64,
    pub wf: WfParams,
    pub noise: NoiseConfig,
}

impl Default for EpisodeParams {
    fn default() -> Self {
        EpisodeParams {
            time_limit: 300.0,
            goal_radius: 1.0,
            dt: robot::DT,
            wf: WfParams::default(),
            noise: NoiseConfig::default(),
        }
    }
}

/// One tick of an episode, recorded before the motion step is applied.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub time: f64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub est_x: f64,
    pub est_y: f64,
    pub mode: &'static str,
    pub v: f64,
    pub w: f64,
}

#[derive(Clone, Debug)]
pub struct EpisodeResult {
    pub success: bool,
    /// Simulated seconds until the goal or the time limit.
    pub time: f64,
    /// True ground covered (m).
    pub path_length: f64,
    pub hits: usize,
    pub leaves: usize,
    pub reversals: usize,
    pub final_position: Vec2,
    /// Odometry drift at the end: |estimate - truth| (m).
    pub est_error: f64,
    pub trace: Option<Vec<TraceRow>>,
}

/// Run one episode. The seed feeds all noise streams; a zeroed noise
/// configuration makes the run fully deterministic in the environment
/// alone (the seed then only affects the line-fit sampling).
pub fn run_episode(
    env: &Environment,
    alg: Algorithm,
    seed: u64,
    params: &EpisodeParams,
    record_trace: bool,
) -> EpisodeResult {
    let mut streams = NoiseStreams::new(seed);
    let recognizer = PointRecognizer::new(&params.noise, params.time_limit, &mut streams.recognizer);
    let mut pose = env.start_pose;
    let mut est = pose.position;
    let mut ctl = BugController::new(alg, est, env.target, recognizer, params.wf);
    let mut path_length = 0.0;
    let mut trace = record_trace.then(Vec::new);

    let ticks = (params.time_limit / params.dt).round() as usize;
    let mut elapsed = 0.0;
    let mut success = false;
    let mut bumped = false;
    for tick in 0..ticks {
        let clock = tick as f64 * params.dt;
        let readings = robot::sense(&pose, &env.walls);
        let d_target = if params.noise.dt_sigma > 0.0 {
            noisy_distance(
                pose.position.dist(env.target),
                params.noise.dt_sigma,
                &mut streams.dt,
            )
        } else {
            est.dist(env.target)
        };
        let input = BugInput {
            readings: &readings,
            est_position: est,
            heading: pose.heading,
            target: env.target,
            d_target,
            time: clock,
            bumped,
        };
        let step = ctl.step(&input, &mut streams.ransac, &mut streams.recognizer);
        if let Some(rows) = trace.as_mut() {
            rows.push(TraceRow {
                time: clock,
                x: pose.position.x,
                y: pose.position.y,
                heading: pose.heading,
                est_x: est.x,
                est_y: est.y,
                mode: step.mode.tag(),
                v: step.cmd.v,
                w: step.cmd.w,
            });
        }
        let (next, applied) = robot::step(&pose, step.cmd, params.dt, &env.walls);
        bumped = step.cmd.v > 0.0 && applied == Vec2::ZERO;
        let measured = noisy_displacement(
            applied,
            params.noise.odom_sigma,
            params.dt,
            &mut streams.odometry,
        );
        est = est + measured;
        path_length += applied.norm();
        pose = next;
        elapsed = (tick + 1) as f64 * params.dt;
        if pose.position.dist(env.target) < params.goal_radius {
            success = true;
            break;
        }
    }

    if let Some(rows) = trace.as_mut() {
        // Terminal state, so the true arc length can be recovered from
        // the trace alone.
        rows.push(TraceRow {
            time: elapsed,
            x: pose.position.x,
            y: pose.position.y,
            heading: pose.heading,
            est_x: est.x,
            est_y: est.y,
            mode: ctl.mode().tag(),
            v: 0.0,
            w: 0.0,
        });
    }

    EpisodeResult {
        success,
        time: elapsed,
        path_length,
        hits: ctl.hits(),
        leaves: ctl.leaves(),
        reversals: ctl.reversals(),
        final_position: pose.position,
        est_error: est.dist(pose.position),
        trace,
    }
}

/// One cell of the noise grid, with its position in the grid retained
/// for run ids.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoisePoint {
    pub index: usize,
    pub noise: NoiseConfig,
}

/// A full experiment: environments x algorithms x noise points.
#[derive(Clone, Debug)]
pub struct BatchSpec {
    pub base_seed: u64,
    pub envs: usize,
    pub algorithms: Vec<Algorithm>,
    pub noise_grid: Vec<NoisePoint>,
    pub episode: EpisodeParams,
    pub gen: GenParams,
    /// Thread count; 0 uses the pool default.
    pub workers: usize,
}

impl BatchSpec {
    pub fn new(base_seed: u64, envs: usize) -> Self {
        BatchSpec {
            base_seed,
            envs,
            algorithms: Algorithm::ALL.to_vec(),
            noise_grid: vec![NoisePoint {
                index: 0,
                noise: NoiseConfig::default(),
            }],
            episode: EpisodeParams::default(),
            gen: GenParams::default(),
            workers: 0,
        }
    }
}

/// One episode's summary row.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub run_id: String,
    pub env_seed: u64,
    pub algorithm: Algorithm,
    pub noise: NoiseConfig,
    pub success: bool,
    pub sim_time: f64,
    pub path_length: f64,
    /// Shortest-path length on the padded grid, for normalization.
    pub astar_length: f64,
    pub normalized_length: f64,
    pub leave_count: usize,
    pub reversal_count: usize,
}

#[derive(Debug, Error)]
pub enum BatchError {
    #[error("environment {index} (seed {seed}) failed to generate: {source}")]
    EnvGeneration {
        index: usize,
        seed: u64,
        source: GenError,
    },
    #[error("environment {index} stayed impassable after padding across reseeds")]
    EnvDegenerate { index: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{path}:{line}: bad record: {msg}")]
    BadRecord {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("thread pool: {0}")]
    Pool(String),
}

pub fn run_id(env_index: usize, alg: Algorithm, noise_index: usize) -> String {
    format!("e{env_index:04}-{}-n{noise_index:02}", alg.name())
}

/// Generate the batch's environment set. Each environment must admit a
/// padded shortest path (used for normalization); the rare map that does
/// not is reseeded far away from the sequential seed range.
fn build_envs(spec: &BatchSpec) -> Result<Vec<(u64, Environment, f64)>, BatchError> {
    let mut out = Vec::with_capacity(spec.envs);
    for i in 0..spec.envs {
        let mut found = None;
        for attempt in 0..40u64 {
            let seed = spec.base_seed + i as u64 + (attempt << 32);
            let params = GenParams {
                seed,
                ..spec.gen
            };
            let env = generate(&params).map_err(|source| BatchError::EnvGeneration {
                index: i,
                seed,
                source,
            })?;
            if let Some(len) = shortest_path_length(&env.grid) {
                found = Some((seed, env, len));
                break;
            }
        }
        out.push(found.ok_or(BatchError::EnvDegenerate { index: i })?);
    }
    Ok(out)
}

/// Run the batch, resuming from and streaming into `out_path` when
/// given. Returns all records sorted by run id; the file on disk ends up
/// byte-identical for any worker count or interruption pattern.
pub fn run_batch(spec: &BatchSpec, out_path: Option<&Path>) -> Result<Vec<RunRecord>, BatchError> {
    let envs = build_envs(spec)?;

    struct Task<'a> {
        run_id: String,
        env_seed: u64,
        env: &'a Environment,
        optimal: f64,
        alg: Algorithm,
        point: NoisePoint,
    }

    let mut universe = Vec::new();
    for (i, (seed, env, optimal)) in envs.iter().enumerate() {
        for &alg in &spec.algorithms {
            for &point in &spec.noise_grid {
                universe.push(Task {
                    run_id: run_id(i, alg, point.index),
                    env,
                    env_seed: *seed,
                    optimal: *optimal,
                    alg,
                    point,
                });
            }
        }
    }

    // Resume: keep rows whose ids belong to this spec, recompute the rest.
    let valid_ids: HashSet<&str> = universe.iter().map(|t| t.run_id.as_str()).collect();
    let mut kept = Vec::new();
    if let Some(path) = out_path {
        if path.exists() {
            for rec in read_records_lenient(path)? {
                if valid_ids.contains(rec.run_id.as_str()) {
                    kept.push(rec);
                }
            }
        }
    }
    let done: HashSet<&str> = kept.iter().map(|r| r.run_id.as_str()).collect();
    let todo: Vec<&Task> = universe
        .iter()
        .filter(|t| !done.contains(t.run_id.as_str()))
        .collect();

    let writer = match out_path {
        Some(path) => {
            if let Some(dir) = path.parent() {
                if !dir.as_os_str().is_empty() {
                    fs::create_dir_all(dir)?;
                }
            }
            let fresh = !path.exists();
            let mut file = fs::OpenOptions::new().create(true).append(true).open(path)?;
            if fresh {
                file.write_all(CSV_HEADER.as_bytes())?;
                file.write_all(b"\n")?;
                file.flush()?;
            }
            Some(Mutex::new(file))
        }
        None => None,
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| BatchError::Pool(e.to_string()))?;

    let mut fresh: Vec<RunRecord> = {
        let run_one = |task: &&Task| -> RunRecord {
            let episode = EpisodeParams {
                noise: task.point.noise,
                ..spec.episode
            };
            let result = run_episode(task.env, task.alg, task.env_seed, &episode, false);
            let record = RunRecord {
                run_id: task.run_id.clone(),
                env_seed: task.env_seed,
                algorithm: task.alg,
                noise: task.point.noise,
                success: result.success,
                sim_time: result.time,
                path_length: result.path_length,
                astar_length: task.optimal,
                normalized_length: result.path_length / task.optimal,
                leave_count: result.leaves,
                reversal_count: result.reversals,
            };
            if let Some(w) = &writer {
                // Stream each finished row so an interrupted batch resumes.
                let mut file = w.lock().expect("writer poisoned");
                let _ = file.write_all(record_to_line(&record).as_bytes());
                let _ = file.write_all(b"\n");
                let _ = file.flush();
            }
            record
        };
        pool.install(|| todo.par_iter().map(run_one).collect())
    };

    let mut records = kept;
    records.append(&mut fresh);
    records.sort_by(|a, b| a.run_id.cmp(&b.run_id));

    if let Some(path) = out_path {
        drop(writer);
        write_records_csv(path, &records)?;
    }
    Ok(records)
}

pub const CSV_HEADER: &str = "run_id,env_seed,algorithm,odom_sigma,p_fp,p_fn,dt_sigma,fp_mode,\
                              success,sim_time_s,path_length_m,astar_length_m,normalized_length,\
                              leave_count,reversal_count";

fn record_to_line(r: &RunRecord) -> String {
    let mut s = String::new();
    write!(
        s,
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        r.run_id,
        r.env_seed,
        r.algorithm,
        r.noise.odom_sigma,
        r.noise.p_fp,
        r.noise.p_fn,
        r.noise.dt_sigma,
        r.noise.fp_mode,
        r.success,
        r.sim_time,
        r.path_length,
        r.astar_length,
        r.normalized_length,
        r.leave_count,
        r.reversal_count
    )
    .expect("writing to a String cannot fail");
    s
}

fn record_from_line(line: &str) -> Result<RunRecord, String> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 15 {
        return Err(format!("expected 15 fields, got {}", fields.len()));
    }
    let parse_f64 = |s: &str, what: &str| {
        s.parse::<f64>()
            .map_err(|_| format!("bad {what} '{s}'"))
    };
    Ok(RunRecord {
        run_id: fields[0].to_string(),
        env_seed: fields[1]
            .parse()
            .map_err(|_| format!("bad env_seed '{}'", fields[1]))?,
        algorithm: fields[2].parse()?,
        noise: NoiseConfig {
            odom_sigma: parse_f64(fields[3], "odom_sigma")?,
            p_fp: parse_f64(fields[4], "p_fp")?,
            p_fn: parse_f64(fields[5], "p_fn")?,
            dt_sigma: parse_f64(fields[6], "dt_sigma")?,
            fp_mode: fields[7].parse::<FpMode>()?,
        },
        success: match fields[8] {
            "true" => true,
            "false" => false,
            other => return Err(format!("bad success '{other}'")),
        },
        sim_time: parse_f64(fields[9], "sim_time_s")?,
        path_length: parse_f64(fields[10], "path_length_m")?,
        astar_length: parse_f64(fields[11], "astar_length_m")?,
        normalized_length: parse_f64(fields[12], "normalized_length")?,
        leave_count: fields[13]
            .parse()
            .map_err(|_| format!("bad leave_count '{}'", fields[13]))?,
        reversal_count: fields[14]
            .parse()
            .map_err(|_| format!("bad reversal_count '{}'", fields[14]))?,
    })
}

/// Write records as CSV, atomically (write-then-rename).
pub fn write_records_csv(path: &Path, records: &[RunRecord]) -> std::io::Result<()> {
    let mut text = String::with_capacity(records.len() * 96 + 128);
    text.push_str(CSV_HEADER);
    text.push('\n');
    for r in records {
        text.push_str(&record_to_line(r));
        text.push('\n');
    }
    let tmp = path.with_extension("csv.tmp");
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)
}

/// Strict CSV reader for analysis: any malformed row is an error.
pub fn read_records_csv(path: &Path) -> Result<Vec<RunRecord>, BatchError> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line != CSV_HEADER {
                return Err(BatchError::BadRecord {
                    path: path.display().to_string(),
                    line: 1,
                    msg: "unrecognized header".into(),
                });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        out.push(
            record_from_line(line).map_err(|msg| BatchError::BadRecord {
                path: path.display().to_string(),
                line: i + 1,
                msg,
            })?,
        );
    }
    Ok(out)
}

/// Lenient reader used for resume: skips rows that do not parse (for
/// example a line cut short by a crash); they get recomputed.
fn read_records_lenient(path: &Path) -> Result<Vec<RunRecord>, BatchError> {
    let text = fs::read_to_string(path)?;
    Ok(text
        .lines()
        .skip(1)
        .filter_map(|line| record_from_line(line).ok())
        .collect())
}

/// Write an episode trace as CSV (true pose per tick plus a final row).
pub fn write_trace_csv(path: &Path, rows: &[TraceRow]) -> std::io::Result<()> {
    let mut text = String::with_capacity(rows.len() * 48 + 32);
    text.push_str("t_s,x_m,y_m,heading_rad,mode\n");
    for r in rows {
        let _ = writeln!(text, "{},{},{},{},{}", r.time, r.x, r.y, r.heading, r.mode);
    }
    fs::write(path, text)
}
