//! Projected online gradient descent with full trajectory recording.
//!
//! Each step stores the iterate, its gradient, the learning rate, the loss,
//! and the pre-projection point `y_{t+1} = x_t - eta_t g_t`, so downstream
//! inequality checks can replay every intermediate quantity without
//! re-deriving it.

use crate::error::{Error, Result};
use crate::geometry::{FeasibleSet, Point, MEMBERSHIP_TOL};
use crate::losses::LossSpec;

/// Per-step learning rate: `eta` or `eta / sqrt(t)`, with `t` starting at 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LearningRateSchedule {
    Constant { eta: f64 },
    InverseSqrt { eta: f64 },
}

impl LearningRateSchedule {
    pub fn constant(eta: f64) -> Result<Self> {
        check_eta(eta)?;
        Ok(Self::Constant { eta })
    }

    pub fn inverse_sqrt(eta: f64) -> Result<Self> {
        check_eta(eta)?;
        Ok(Self::InverseSqrt { eta })
    }

    pub fn rate(&self, t: usize) -> f64 {
        assert!(t >= 1, "time index must be at least 1");
        match self {
            Self::Constant { eta } => *eta,
            Self::InverseSqrt { eta } => eta / (t as f64).sqrt(),
        }
    }

    /// The base rate `eta`.
    pub fn eta(&self) -> f64 {
        match self {
            Self::Constant { eta } | Self::InverseSqrt { eta } => *eta,
        }
    }

    pub fn is_inverse_sqrt(&self) -> bool {
        matches!(self, Self::InverseSqrt { .. })
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "eta",
            reason: format!("must be positive and finite, got {eta}"),
        });
    }
    Ok(())
}

/// One recorded round: the iterate `x_t`, its gradient, the rate, the loss,
/// and the pre-projection point `y_{t+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    pub x: Point,
    pub g: Point,
    pub eta: f64,
    pub loss: f64,
    pub pre_projection: Point,
}

/// Immutable record of a completed online run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    steps: Vec<StepRecord>,
    set: FeasibleSet,
    schedule: LearningRateSchedule,
    loss: LossSpec,
}

impl Trajectory {
    pub fn steps(&self) -> &[StepRecord] {
        &self.steps
    }

    /// Number of recorded rounds `T`.
    pub fn horizon(&self) -> usize {
        self.steps.len()
    }

    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    pub fn set(&self) -> &FeasibleSet {
        &self.set
    }

    pub fn schedule(&self) -> &LearningRateSchedule {
        &self.schedule
    }

    pub fn loss(&self) -> &LossSpec {
        &self.loss
    }

    /// Record for round `t` (1-based).
    pub fn step(&self, t: usize) -> &StepRecord {
        &self.steps[t - 1]
    }

    /// The iterate the run would play at `T + 1`: the projection of the last
    /// recorded pre-projection point.
    pub fn final_iterate(&self) -> Point {
        let last = self.steps.last().expect("trajectory has at least one step");
        self.set
            .project(&last.pre_projection)
            .expect("dimensions agree by construction")
    }
}

/// One update: `pre = x - eta * g`, `next = project(pre)`.
pub fn step(set: &FeasibleSet, x: &Point, g: &Point, eta: f64) -> Result<(Point, Point)> {
    check_eta(eta)?;
    if x.dim() != set.dim() || g.dim() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            actual: if x.dim() != set.dim() {
                x.dim()
            } else {
                g.dim()
            },
        });
    }
    let violation = set.violation(x);
    if violation > MEMBERSHIP_TOL {
        return Err(Error::OutsideSet { violation });
    }
    let pre = x.sub(&g.scale(eta));
    if !pre.is_finite() {
        return Err(Error::NonFinitePoint);
    }
    let next = set.project(&pre)?;
    Ok((next, pre))
}

/// Runs projected online gradient descent for `horizon` rounds from `x0`,
/// recording every round. Deterministic given its inputs.
pub fn run(
    spec: &LossSpec,
    set: &FeasibleSet,
    schedule: &LearningRateSchedule,
    x0: &Point,
    horizon: usize,
) -> Result<Trajectory> {
    if horizon < 1 {
        return Err(Error::InvalidParameter {
            name: "horizon",
            reason: "must be at least 1".into(),
        });
    }
    if spec.dim() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            actual: spec.dim(),
        });
    }
    if x0.dim() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            actual: x0.dim(),
        });
    }
    let violation = set.violation(x0);
    if violation > MEMBERSHIP_TOL {
        return Err(Error::OutsideSet { violation });
    }

    let mut steps = Vec::with_capacity(horizon);
    let mut x = x0.clone();
    for t in 1..=horizon {
        let numeric = |e: Error| match e {
            Error::NonFinitePoint => Error::Numeric { step: t },
            other => other,
        };
        let g = spec.loss_gradient(t, &x).map_err(numeric)?;
        let loss = spec.loss_value(t, &x)?;
        let eta = schedule.rate(t);
        let (next, pre) = step(set, &x, &g, eta).map_err(numeric)?;
        debug_assert!(set.violation(&next) <= MEMBERSHIP_TOL);
        steps.push(StepRecord {
            t,
            x,
            g,
            eta,
            loss,
            pre_projection: pre,
        });
        x = next;
    }

    Ok(Trajectory {
        steps,
        set: set.clone(),
        schedule: *schedule,
        loss: spec.clone(),
    })
}
