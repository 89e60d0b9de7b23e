//! Differential-drive platform: unicycle kinematics and the range-sensor
//! rig (a 60-degree forward wedge of 20 beams plus one beam to each side).
//!
//! Integration is explicit Euler with the heading updated before the
//! translation. A step whose destination would bring the body disc within
//! `BODY_RADIUS` of a wall keeps the old position (rotation still
//! applies), so the robot can turn in place out of a tight spot but can
//! never clip through geometry.

use crate::geometry::{ray_cast, segment_distance, Pose, Reading, Segment, Vec2};
use std::f64::consts::{FRAC_PI_2, PI};

pub const BODY_RADIUS: f64 = 0.17;
pub const DT: f64 = 0.05;
/// Commanded forward speed while following or advancing (m/s).
pub const CRUISE_SPEED: f64 = 0.5;
/// Commanded turn rate while rotating in place (rad/s).
pub const TURN_RATE: f64 = 1.0;
pub const MAX_RANGE: f64 = 2.0;

/// Beams 0..WEDGE_BEAMS span the forward wedge, evenly spaced over
/// [-WEDGE_HALF_ANGLE, +WEDGE_HALF_ANGLE] inclusive.
pub const WEDGE_BEAMS: usize = 20;
pub const BEAM_COUNT: usize = 22;
pub const RIGHT_BEAM: usize = 20;
pub const LEFT_BEAM: usize = 21;
pub const WEDGE_HALF_ANGLE: f64 = PI / 6.0;
/// Angle between a side beam and the nearest wedge-edge beam (60 deg);
/// the pair used to triangulate the perpendicular wall distance.
pub const SIDE_BEAM_SEPARATION: f64 = PI / 3.0;

/// Velocity command: forward speed (m/s) and turn rate (rad/s, positive
/// counter-clockwise).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Command {
    pub v: f64,
    pub w: f64,
}

impl Command {
    pub const STOP: Command = Command { v: 0.0, w: 0.0 };

    pub fn new(v: f64, w: f64) -> Self {
        Command { v, w }
    }
}

/// Advance one control period. Returns the new pose and the translation
/// that was actually applied (zero when the move was blocked by a wall).
pub fn step(pose: &Pose, cmd: Command, dt: f64, walls: &[Segment]) -> (Pose, Vec2) {
    let heading = pose.heading + cmd.w * dt;
    let disp = Vec2::from_angle(heading) * (cmd.v * dt);
    let candidate = pose.position + disp;
    if clearance(candidate, walls) < BODY_RADIUS {
        (Pose::new(pose.position, heading), Vec2::ZERO)
    } else {
        (Pose::new(candidate, heading), disp)
    }
}

/// Distance from a point to the nearest wall (infinite in empty space).
pub fn clearance(p: Vec2, walls: &[Segment]) -> f64 {
    walls
        .iter()
        .map(|wall| segment_distance(p, wall))
        .fold(f64::INFINITY, f64::min)
}

/// Beam direction relative to the robot heading, by beam index.
pub fn beam_angle(index: usize) -> f64 {
    debug_assert!(index < BEAM_COUNT);
    match index {
        RIGHT_BEAM => -FRAC_PI_2,
        LEFT_BEAM => FRAC_PI_2,
        i => {
            let span = 2.0 * WEDGE_HALF_ANGLE;
            -WEDGE_HALF_ANGLE + span * i as f64 / (WEDGE_BEAMS - 1) as f64
        }
    }
}

/// Cast all beams from the current pose. Readings are exact ranges; noise
/// and failures are layered on elsewhere.
pub fn sense(pose: &Pose, walls: &[Segment]) -> [Reading; BEAM_COUNT] {
    let mut out = [Reading::OutOfRange; BEAM_COUNT];
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = ray_cast(pose.position, pose.heading + beam_angle(i), walls, MAX_RANGE);
    }
    out
}

/// Smallest finite reading in the forward wedge with its beam index.
pub fn min_wedge_reading(readings: &[Reading; BEAM_COUNT]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, r) in readings.iter().enumerate().take(WEDGE_BEAMS) {
        if let Some(d) = r.hit() {
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_step_advances_along_heading() {
        let pose = Pose::new(Vec2::new(1.0, 2.0), 0.0);
        let (next, disp) = step(&pose, Command::new(CRUISE_SPEED, 0.0), DT, &[]);
        assert!((next.position.x - 1.025).abs() < 1e-15);
        assert!((next.position.y - 2.0).abs() < 1e-15);
        assert_eq!(next.heading, 0.0);
        assert!((disp.x - 0.025).abs() < 1e-15);
    }

    #[test]
    fn pure_rotation_keeps_position() {
        let pose = Pose::new(Vec2::new(1.0, 2.0), 0.3);
        let (next, disp) = step(&pose, Command::new(0.0, TURN_RATE), DT, &[]);
        assert_eq!(next.position, pose.position);
        assert!((next.heading - 0.35).abs() < 1e-15);
        assert_eq!(disp, Vec2::ZERO);
    }

    #[test]
    fn heading_updates_before_translation() {
        // One step that turns to face +y exactly, then translates.
        let pose = Pose::new(Vec2::ZERO, 0.0);
        let w = FRAC_PI_2 / DT;
        let (next, _) = step(&pose, Command::new(CRUISE_SPEED, w), DT, &[]);
        assert!(next.position.x.abs() < 1e-12);
        assert!((next.position.y - 0.025).abs() < 1e-12);
    }

    #[test]
    fn constant_command_traces_a_closed_polygon() {
        // With w*dt = 2*pi/126 the Euler trajectory is a regular 126-gon
        // and must land back on the start exactly (up to roundoff).
        let n = 126;
        let w = 2.0 * PI / (n as f64 * DT);
        let mut pose = Pose::new(Vec2::new(0.3, -0.7), 1.1);
        let start = pose.position;
        for _ in 0..n {
            pose = step(&pose, Command::new(CRUISE_SPEED, w), DT, &[]).0;
        }
        assert!(pose.position.dist(start) < 1e-9);
    }

    #[test]
    fn blocked_step_keeps_position_but_turns() {
        let wall = Segment::new(Vec2::new(1.0, -5.0), Vec2::new(1.0, 5.0));
        let pose = Pose::new(Vec2::new(1.0 - BODY_RADIUS - 0.01, 0.0), 0.0);
        let (next, disp) = step(&pose, Command::new(CRUISE_SPEED, TURN_RATE), DT, &[wall]);
        assert_eq!(next.position, pose.position);
        assert_eq!(disp, Vec2::ZERO);
        assert!((next.heading - TURN_RATE * DT).abs() < 1e-15);
    }

    #[test]
    fn step_up_to_the_clearance_limit_is_allowed() {
        let wall = Segment::new(Vec2::new(1.0, -5.0), Vec2::new(1.0, 5.0));
        let pose = Pose::new(Vec2::new(0.5, 0.0), 0.0);
        let (next, disp) = step(&pose, Command::new(CRUISE_SPEED, 0.0), DT, &[wall]);
        assert!(disp.norm() > 0.0);
        assert!((next.position.x - 0.525).abs() < 1e-15);
    }

    #[test]
    fn beam_angles_cover_wedge_and_sides() {
        assert!((beam_angle(0) + WEDGE_HALF_ANGLE).abs() < 1e-15);
        assert!((beam_angle(WEDGE_BEAMS - 1) - WEDGE_HALF_ANGLE).abs() < 1e-15);
        assert_eq!(beam_angle(RIGHT_BEAM), -FRAC_PI_2);
        assert_eq!(beam_angle(LEFT_BEAM), FRAC_PI_2);
        for i in 1..WEDGE_BEAMS {
            assert!(beam_angle(i) > beam_angle(i - 1));
        }
        // Side beam sits one SIDE_BEAM_SEPARATION beyond the wedge edge.
        assert!(
            (beam_angle(RIGHT_BEAM) - (beam_angle(0) - SIDE_BEAM_SEPARATION)).abs() < 1e-15
        );
    }

    #[test]
    fn wedge_beams_hit_a_frontal_wall_at_secant_ranges() {
        let wall = Segment::new(Vec2::new(1.0, -10.0), Vec2::new(1.0, 10.0));
        let pose = Pose::new(Vec2::ZERO, 0.0);
        let readings = sense(&pose, &[wall]);
        for i in 0..WEDGE_BEAMS {
            let expect = 1.0 / beam_angle(i).cos();
            assert!((readings[i].hit().unwrap() - expect).abs() < 1e-12, "beam {i}");
        }
        assert!(readings[RIGHT_BEAM].is_out_of_range());
        assert!(readings[LEFT_BEAM].is_out_of_range());
    }

    #[test]
    fn side_beam_reads_perpendicular_wall_distance() {
        let wall = Segment::new(Vec2::new(-10.0, -0.4), Vec2::new(10.0, -0.4));
        let pose = Pose::new(Vec2::ZERO, 0.0);
        let readings = sense(&pose, &[wall]);
        assert!((readings[RIGHT_BEAM].hit().unwrap() - 0.4).abs() < 1e-12);
        assert!(readings[LEFT_BEAM].is_out_of_range());
    }

    #[test]
    fn min_wedge_reading_picks_nearest_finite_beam() {
        let mut readings = [Reading::OutOfRange; BEAM_COUNT];
        assert_eq!(min_wedge_reading(&readings), None);
        readings[3] = Reading::Hit(1.2);
        readings[7] = Reading::Hit(0.8);
        readings[RIGHT_BEAM] = Reading::Hit(0.1); // side beams don't count
        let (i, d) = min_wedge_reading(&readings).unwrap();
        assert_eq!(i, 7);
        assert_eq!(d, 0.8);
    }
}
