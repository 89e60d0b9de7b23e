//! Deterministic 2D robot-navigation simulator and benchmark harness.
//!
//! A differential-drive robot with a 22-beam range-sensor rig navigates
//! procedurally generated indoor maps using a family of bug algorithms
//! built on a shared wall-following controller. The harness runs seeded
//! episode batches under configurable noise (odometry drift, recognizer
//! false positives/negatives, noisy distance-to-target), normalizes path
//! lengths against a grid shortest-path oracle, and ships the statistics
//! (bootstrap tests, OLS, logistic regression) used to compare them.
//!
//! Everything is reproducible: same seeds in, bit-identical results out,
//! independent of worker count.

pub mod bugs;
pub mod envgen;
pub mod geometry;
pub mod harness;
pub mod noise;
pub mod oracle;
pub mod report;
pub mod robot;
pub mod stats;
pub mod svg;
pub mod wallfollow;

pub use bugs::Algorithm;
pub use envgen::{Environment, GenParams, GridMap};
pub use geometry::{Pose, Reading, Segment, Vec2};
pub use harness::{run_batch, run_episode, BatchSpec, EpisodeParams, NoisePoint, RunRecord};
pub use noise::{FpMode, NoiseConfig};
