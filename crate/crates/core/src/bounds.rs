//! Closed-form bound evaluation and the randomized inequality scans.
//!
//! Everything here consumes a `(M, G, eta)` triple: `M` is the feasible-set
//! diameter when finite (otherwise the observed trajectory diameter, which is
//! all the all-space derivation actually uses), `G` bounds the gradient
//! norms, and `eta` is the schedule's base rate. The scans replay recorded
//! trajectories step by step, so they check exactly what the optimizer did.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{FeasibleSet, Point, MEMBERSHIP_TOL};
use crate::losses::{BoundMethod, LossSpec};
use crate::optimizer::{LearningRateSchedule, StepRecord, Trajectory};
use crate::regret::WindowSpec;
use crate::sampling::{standard_normal_point, uniform_in_set};

/// Normalized tolerance for every inequality check: a check passes when the
/// deficit is no worse than `-INEQUALITY_TOL` after dividing by the terms'
/// magnitude scale.
pub const INEQUALITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MSource {
    SetDiameter,
    TrajectoryDiameter,
}

impl MSource {
    pub fn name(&self) -> &'static str {
        match self {
            Self::SetDiameter => "set_diameter",
            Self::TrajectoryDiameter => "trajectory_diameter",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GSource {
    Analytic,
    Sampled,
}

impl GSource {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Analytic => "analytic",
            Self::Sampled => "sampled",
        }
    }
}

/// The `(M, G, eta)` triple feeding every bound formula, with the provenance
/// of each constant recorded for reports.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundConstants {
    pub m: f64,
    pub g: f64,
    pub eta: f64,
    pub m_source: MSource,
    pub g_source: GSource,
}

/// Largest pairwise distance among the recorded iterates.
fn trajectory_diameter(traj: &Trajectory) -> f64 {
    let steps = traj.steps();
    let mut best = 0.0_f64;
    for i in 0..steps.len() {
        for j in (i + 1)..steps.len() {
            best = best.max(steps[i].x.sub(&steps[j].x).norm_sq());
        }
    }
    best.sqrt()
}

/// Estimates `(M, G, eta)` for a completed run. `M` is the set diameter when
/// finite, else the trajectory diameter; `G` comes from the loss family's
/// gradient bound on bounded sets, else from the observed gradient norms
/// inflated by 10%.
pub fn estimate_constants(
    traj: &Trajectory,
    spec: &LossSpec,
    horizon: usize,
    rng: &mut impl Rng,
) -> Result<BoundConstants> {
    let set = traj.set();
    let (m, m_source) = if set.is_bounded() {
        (set.diameter(), MSource::SetDiameter)
    } else {
        (trajectory_diameter(traj), MSource::TrajectoryDiameter)
    };
    let (g, g_source) = if set.is_bounded() {
        let bound = spec.gradient_bound(set, horizon, rng)?;
        let source = match bound.method {
            BoundMethod::Analytic => GSource::Analytic,
            BoundMethod::Sampled => GSource::Sampled,
        };
        (bound.g, source)
    } else {
        let observed = traj.steps().iter().map(|s| s.g.norm()).fold(0.0, f64::max);
        (observed * 1.1, GSource::Sampled)
    };
    Ok(BoundConstants {
        m,
        g,
        eta: traj.schedule().eta(),
        m_source,
        g_source,
    })
}

/// Left side, right side, and slack of the per-step inequality
/// `eta_t <D_u(x_t), g_t> >= <u_t - u_{t+1}, u>
///   + (||u_{t+1} - x_{t+1}||^2 - ||u_t - x_t||^2)/2 - eta_t^2 G^2`
/// with `u_t = proj(x_t + u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lemma1Residual {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs - rhs`; nonnegative when the inequality holds.
    pub residual: f64,
    /// Set when `||g_t|| > G`, in which case the inequality is not claimed.
    pub g_bound_exceeded: bool,
}

impl Lemma1Residual {
    /// Residual divided by the magnitude scale of its terms.
    pub fn normalized(&self) -> f64 {
        self.residual / 1.0_f64.max(self.lhs.abs()).max(self.rhs.abs())
    }
}

/// Evaluates the per-step inequality on two consecutive records.
pub fn lemma1_residual(
    record: &StepRecord,
    next: &StepRecord,
    set: &FeasibleSet,
    u: &Point,
    g_bound: f64,
) -> Result<Lemma1Residual> {
    if next.t != record.t + 1 {
        return Err(Error::InvalidParameter {
            name: "next",
            reason: format!(
                "records must be consecutive, got t={} then t={}",
                record.t, next.t
            ),
        });
    }
    if !(g_bound >= 0.0 && g_bound.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "g_bound",
            reason: format!("must be nonnegative and finite, got {g_bound}"),
        });
    }
    let displaced = set.displacement(&record.x, u)?;
    let lhs = record.eta * displaced.dot(&record.g);

    let u_t = set.project(&record.x.add(u))?;
    let u_next = set.project(&next.x.add(u))?;
    let rhs = u_t.sub(&u_next).dot(u)
        + 0.5 * (u_next.sub(&next.x).norm_sq() - u_t.sub(&record.x).norm_sq())
        - record.eta * record.eta * g_bound * g_bound;

    Ok(Lemma1Residual {
        lhs,
        rhs,
        residual: lhs - rhs,
        g_bound_exceeded: record.g.norm() > g_bound * (1.0 + 1e-12),
    })
}

/// Lower bound on the windowed displacement sum under `eta_s = eta/sqrt(s)`:
/// `2 eta G^2 sqrt(t-w+1) - (3M^2/(2 eta) + 2 eta G^2) sqrt(t)`.
pub fn theorem1_lower_bound(
    c: &BoundConstants,
    schedule: &LearningRateSchedule,
    t: usize,
    w: usize,
) -> Result<f64> {
    if !schedule.is_inverse_sqrt() {
        return Err(Error::Requires {
            op: "theorem1_lower_bound",
            required: "the inverse-sqrt schedule eta_t = eta/sqrt(t)",
        });
    }
    if w < 1 || w > t {
        return Err(Error::InvalidParameter {
            name: "w",
            reason: format!("must satisfy 1 <= w <= t, got w={w}, t={t}"),
        });
    }
    let (m, g, eta) = (c.m, c.g, c.eta);
    Ok(2.0 * eta * g * g * ((t - w + 1) as f64).sqrt()
        - (3.0 * m * m / (2.0 * eta) + 2.0 * eta * g * g) * (t as f64).sqrt())
}

/// Constant rate, constant window, all-space: `M^2 T / (w^2 eta^2)` with `M`
/// the trajectory diameter.
pub fn scenario1_bound(
    c: &BoundConstants,
    schedule: &LearningRateSchedule,
    window: &WindowSpec,
    horizon: usize,
) -> Result<f64> {
    if schedule.is_inverse_sqrt() {
        return Err(Error::Requires {
            op: "scenario1_bound",
            required: "a constant learning rate eta_t = eta",
        });
    }
    let w = match window {
        WindowSpec::ConstantW { w } => *w,
        WindowSpec::Growing => {
            return Err(Error::Requires {
                op: "scenario1_bound",
                required: "a constant window",
            })
        }
    };
    if c.m_source != MSource::TrajectoryDiameter {
        return Err(Error::Requires {
            op: "scenario1_bound",
            required: "trajectory-diameter M (the scenario runs on all of R^d)",
        });
    }
    let (m, eta) = (c.m, c.eta);
    Ok(m * m * horizon as f64 / ((w * w) as f64 * eta * eta))
}

/// Inverse-sqrt rate, growing window, interior run:
/// `(3M^2/(2 eta) + 2 eta G^2)^2 (1 + ln T)`.
///
/// The harmonic sum the derivation rests on satisfies `H_T <= 1 + ln T`;
/// the bare logarithm alone fails at `T = 1`.
pub fn scenario2_bound(
    c: &BoundConstants,
    schedule: &LearningRateSchedule,
    window: &WindowSpec,
    horizon: usize,
) -> Result<f64> {
    if !schedule.is_inverse_sqrt() {
        return Err(Error::Requires {
            op: "scenario2_bound",
            required: "the inverse-sqrt schedule eta_t = eta/sqrt(t)",
        });
    }
    if !matches!(window, WindowSpec::Growing) {
        return Err(Error::Requires {
            op: "scenario2_bound",
            required: "the growing window w = t",
        });
    }
    if horizon == 0 {
        return Ok(0.0);
    }
    Ok(scenario_coefficient(c).powi(2) * (1.0 + (horizon as f64).ln()))
}

/// Inverse-sqrt rate, constant window:
/// `(3M^2/(2 eta) + 2 eta G^2)^2 T (T + 1) / (2 w^2)`.
pub fn scenario3_bound(
    c: &BoundConstants,
    schedule: &LearningRateSchedule,
    window: &WindowSpec,
    horizon: usize,
) -> Result<f64> {
    if !schedule.is_inverse_sqrt() {
        return Err(Error::Requires {
            op: "scenario3_bound",
            required: "the inverse-sqrt schedule eta_t = eta/sqrt(t)",
        });
    }
    let w = match window {
        WindowSpec::ConstantW { w } => *w,
        WindowSpec::Growing => {
            return Err(Error::Requires {
                op: "scenario3_bound",
                required: "a constant window",
            })
        }
    };
    let t = horizon as f64;
    Ok(scenario_coefficient(c).powi(2) * t * (t + 1.0) / (2.0 * (w * w) as f64))
}

fn scenario_coefficient(c: &BoundConstants) -> f64 {
    3.0 * c.m * c.m / (2.0 * c.eta) + 2.0 * c.eta * c.g * c.g
}

/// One row of a verification scan, in the report CSV schema.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub t: usize,
    pub w: usize,
    pub empirical: f64,
    pub bound: f64,
    /// Normalized margin `(empirical - bound) / scale` for lower-bound scans.
    pub ratio: f64,
    pub pass: bool,
}

/// Randomized scan of the per-step inequality over a recorded trajectory.
///
/// Each draw picks a consecutive step pair and a perturbation `u` with
/// `x_t + u` feasible (for bounded sets, `u` points at a uniform draw from
/// the set; on all-space `u` is standard normal). The scan refuses to run
/// with a `G` the trajectory itself violates.
pub fn lemma1_scan(
    traj: &Trajectory,
    constants: &BoundConstants,
    draws: usize,
    rng: &mut impl Rng,
) -> Result<Vec<CheckRow>> {
    if traj.horizon() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            have: traj.horizon(),
        });
    }
    let worst_gradient = traj.steps().iter().map(|s| s.g.norm()).fold(0.0, f64::max);
    if worst_gradient > constants.g * (1.0 + 1e-12) {
        return Err(Error::Requires {
            op: "lemma1_scan",
            required: "a gradient bound G that actually covers the trajectory",
        });
    }
    let set = traj.set();
    let mut rows = Vec::with_capacity(draws);
    for _ in 0..draws {
        let k = rng.random_range(0..traj.horizon() - 1);
        let record = &traj.steps()[k];
        let next = &traj.steps()[k + 1];
        let u = if set.is_bounded() {
            uniform_in_set(set, rng)?.sub(&record.x)
        } else {
            standard_normal_point(traj.dim(), rng)
        };
        let residual = lemma1_residual(record, next, set, &u, constants.g)?;
        let normalized = residual.normalized();
        rows.push(CheckRow {
            t: record.t,
            w: 0,
            empirical: normalized,
            bound: -INEQUALITY_TOL,
            ratio: normalized + INEQUALITY_TOL,
            pass: normalized >= -INEQUALITY_TOL,
        });
    }
    Ok(rows)
}

/// Scans the lower-bound theorem over every round `t` and a window lattice.
///
/// For each `(t, w)` the perturbation is minus the normalized window
/// gradient sum; the empirical side is the windowed displacement sum
/// `sum_s <D_u(x_s), g_s>` computed from the recorded steps. Errors if the
/// chosen `u` ever makes `x_s + u` infeasible, since the inequality is not
/// claimed there.
pub fn theorem1_scan(
    traj: &Trajectory,
    constants: &BoundConstants,
    window_lattice: &[usize],
) -> Result<Vec<CheckRow>> {
    let set = traj.set();
    let mut rows = Vec::new();
    for t in 1..=traj.horizon() {
        let mut widths: Vec<usize> = window_lattice
            .iter()
            .copied()
            .filter(|&w| w >= 1 && w <= t)
            .collect();
        widths.push(t);
        widths.sort_unstable();
        widths.dedup();
        for w in widths {
            let first = t - w + 1;
            let mut window_sum = Point::zeros(traj.dim());
            for s in first..=t {
                window_sum = window_sum.add(&traj.step(s).g);
            }
            let norm = window_sum.norm();
            let u = if norm > 0.0 {
                window_sum.scale(-1.0 / norm)
            } else {
                Point::zeros(traj.dim())
            };
            let mut empirical = 0.0;
            for s in first..=t {
                let record = traj.step(s);
                if set.violation(&record.x.add(&u)) > MEMBERSHIP_TOL {
                    return Err(Error::Requires {
                        op: "theorem1_scan",
                        required: "x_s + u feasible for the window's direction choice \
                                   (use a set large enough for a unit perturbation)",
                    });
                }
                empirical += set.displacement(&record.x, &u)?.dot(&record.g);
            }
            let bound = theorem1_lower_bound(constants, traj.schedule(), t, w)?;
            let scale = 1.0_f64.max(empirical.abs()).max(bound.abs());
            let margin = (empirical - bound) / scale;
            rows.push(CheckRow {
                t,
                w,
                empirical,
                bound,
                ratio: margin,
                pass: margin >= -INEQUALITY_TOL,
            });
        }
    }
    Ok(rows)
}
