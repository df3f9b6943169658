//! Projected online gradient descent for time-varying losses, with a family
//! of local-regret meters and empirical verification of their bounds.
//!
//! The pieces fit together in a fixed order: [`geometry`] supplies convex
//! feasible sets with exact projections; [`losses`] supplies time-indexed
//! loss families with analytic gradients; [`optimizer`] runs the projected
//! descent loop and records everything; [`regret`] evaluates the meters over
//! a finished trajectory; [`bounds`] evaluates the closed-form envelopes and
//! the per-step inequality those meters are supposed to obey; [`analysis`]
//! quantifies growth rates and compares series against bounds.
//!
//! Completed trajectories and series are immutable, and every function here
//! is pure given its RNG, so verification suites are reproducible from a
//! single seed (see [`sampling`]).

pub mod analysis;
pub mod bounds;
pub mod error;
pub mod geometry;
pub mod losses;
pub mod optimizer;
pub mod regret;
pub mod sampling;

pub use analysis::{bound_report, growth_exponent, BoundReport, GrowthFit};
pub use bounds::{estimate_constants, BoundConstants, CheckRow, GSource, MSource};
pub use error::{Error, Result};
pub use geometry::{FeasibleSet, Point};
pub use losses::{GradientBound, LossSpec};
pub use optimizer::{run, LearningRateSchedule, StepRecord, Trajectory};
pub use regret::{
    calibration_gap, hazan_local_regret, proposed_regret_directional, proposed_regret_interior,
    standard_regret, windowed_gradient_average, Meter, RegretSeries, WindowSpec,
};
pub use sampling::{seeded_rng, SuiteRng};
