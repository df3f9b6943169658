//! Regret meters over completed trajectories.
//!
//! Five meters are provided:
//!
//! - `proposed_regret_interior`: per-round squared norm of the windowed
//!   gradient average, each gradient evaluated at its own historical iterate.
//!   This is the closed form of the calibration-inspired regret on interior
//!   trajectories and the headline meter.
//! - `proposed_regret_directional`: the fixed-direction form, the squared
//!   windowed average of `<D_u(x_s), g_s>`.
//! - `hazan_local_regret`: squared norm of the average of the last `w`
//!   losses' gradients, all re-evaluated at the current iterate.
//! - `calibration_gap`: the best average first-order improvement any
//!   perturbation of norm at most `radius` could have achieved.
//! - `standard_regret`: cumulative loss minus the brute-force best fixed
//!   point in hindsight, feasible only at desk scale (`d <= 2`).
//!
//! Sums over `s <= 0` use the zero-padding convention: missing terms are
//! zero but the divisor stays `w`.

use std::collections::VecDeque;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{FeasibleSet, Point};
use crate::losses::LossSpec;
use crate::optimizer::Trajectory;
use crate::sampling::unit_vector;

/// Interiority margin used when validating the closed-form meter's
/// precondition. Iterates closer than this to the boundary are rejected:
/// the closed form is a limit statement and is not claimed at the boundary.
pub const INTERIOR_MARGIN: f64 = 1e-6;

/// Window sums are recomputed exactly from the buffer this often, capping
/// floating-point drift from incremental add/subtract updates.
pub const ACCUMULATOR_REBUILD_PERIOD: usize = 64;

/// Number of random directions probed by the sampled calibration-gap path.
pub const CALIBRATION_RANDOM_DIRECTIONS: usize = 256;

/// Sliding-window width: fixed `w`, or `w = t` at round `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowSpec {
    ConstantW { w: usize },
    Growing,
}

impl WindowSpec {
    pub fn constant(w: usize) -> Result<Self> {
        if w < 1 {
            return Err(Error::InvalidParameter {
                name: "w",
                reason: "window width must be at least 1".into(),
            });
        }
        Ok(Self::ConstantW { w })
    }

    pub fn growing() -> Self {
        Self::Growing
    }

    /// Effective width (and divisor) at round `t`.
    pub fn width_at(&self, t: usize) -> usize {
        match self {
            Self::ConstantW { w } => *w,
            Self::Growing => t,
        }
    }
}

/// Which regret meter produced a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Meter {
    ProposedInterior,
    ProposedDirectional,
    Hazan,
    Calibration,
    Standard,
}

impl Meter {
    /// Stable name used in CSV file naming.
    pub fn name(&self) -> &'static str {
        match self {
            Self::ProposedInterior => "proposed_interior",
            Self::ProposedDirectional => "proposed_directional",
            Self::Hazan => "hazan",
            Self::Calibration => "calibration",
            Self::Standard => "standard",
        }
    }
}

/// Meter-specific parameters carried alongside a series.
#[derive(Debug, Clone, PartialEq)]
pub enum MeterParams {
    None,
    Direction(Point),
    Radius(f64),
    Grid(usize),
}

/// Per-round instantaneous terms and their running sums.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretSeries {
    meter: Meter,
    window: WindowSpec,
    params: MeterParams,
    instantaneous: Vec<f64>,
    cumulative: Vec<f64>,
}

impl RegretSeries {
    fn from_terms(
        meter: Meter,
        window: WindowSpec,
        params: MeterParams,
        instantaneous: Vec<f64>,
    ) -> Self {
        let mut cumulative = Vec::with_capacity(instantaneous.len());
        let mut total = 0.0;
        for term in &instantaneous {
            total += term;
            cumulative.push(total);
        }
        Self {
            meter,
            window,
            params,
            instantaneous,
            cumulative,
        }
    }

    pub fn meter(&self) -> Meter {
        self.meter
    }

    pub fn window(&self) -> WindowSpec {
        self.window
    }

    pub fn params(&self) -> &MeterParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.instantaneous.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instantaneous.is_empty()
    }

    pub fn instantaneous(&self) -> &[f64] {
        &self.instantaneous
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// Cumulative value at the final round.
    pub fn total(&self) -> f64 {
        *self.cumulative.last().unwrap_or(&0.0)
    }
}

/// Incremental sliding-window sum of gradient vectors.
///
/// Push one vector per round; `average` divides by the window's effective
/// width (zero-padding keeps the divisor at `w` even before `w` vectors
/// arrive). The running sum is rebuilt exactly from the buffer every
/// [`ACCUMULATOR_REBUILD_PERIOD`] insertions.
#[derive(Debug, Clone)]
pub struct WindowAccumulator {
    window: WindowSpec,
    buffer: VecDeque<Point>,
    running_sum: Point,
    insertions: usize,
}

impl WindowAccumulator {
    pub fn new(window: WindowSpec, dim: usize) -> Self {
        Self {
            window,
            buffer: VecDeque::new(),
            running_sum: Point::zeros(dim),
            insertions: 0,
        }
    }

    /// Rounds seen so far.
    pub fn rounds(&self) -> usize {
        self.insertions
    }

    pub fn push(&mut self, g: &Point) {
        if let WindowSpec::ConstantW { w } = self.window {
            if self.buffer.len() == w {
                let evicted = self.buffer.pop_front().expect("buffer non-empty");
                self.running_sum = self.running_sum.sub(&evicted);
            }
        }
        self.buffer.push_back(g.clone());
        self.running_sum = self.running_sum.add(g);
        self.insertions += 1;
        if self.insertions.is_multiple_of(ACCUMULATOR_REBUILD_PERIOD) {
            self.rebuild();
        }
    }

    fn rebuild(&mut self) {
        let mut sum = Point::zeros(self.running_sum.dim());
        for g in &self.buffer {
            sum = sum.add(g);
        }
        self.running_sum = sum;
    }

    /// Window sum divided by the effective width at the current round.
    pub fn average(&self) -> Point {
        let w = self.window.width_at(self.insertions.max(1));
        self.running_sum.scale(1.0 / w as f64)
    }
}

/// Direct (non-incremental) windowed gradient average at round `t`:
/// `(1/w) * sum_{s=t-w+1}^t g_s` with `g_s = 0` for `s <= 0`.
pub fn windowed_gradient_average(
    traj: &Trajectory,
    t: usize,
    window: &WindowSpec,
) -> Result<Point> {
    let horizon = traj.horizon();
    if t < 1 || t > horizon {
        return Err(Error::TimeOutOfRange { t, max: horizon });
    }
    let w = window.width_at(t);
    let first = t.saturating_sub(w - 1).max(1);
    let mut sum = Point::zeros(traj.dim());
    for s in first..=t {
        sum = sum.add(&traj.step(s).g);
    }
    Ok(sum.scale(1.0 / w as f64))
}

fn check_interior(traj: &Trajectory) -> Result<()> {
    for record in traj.steps() {
        if !traj.set().is_interior(&record.x, INTERIOR_MARGIN) {
            return Err(Error::NonInterior { step: record.t });
        }
    }
    Ok(())
}

/// Closed-form proposed regret for interior trajectories:
/// `term_t = || (1/w) sum_{s=t-w+1}^t g_s ||^2`.
pub fn proposed_regret_interior(traj: &Trajectory, window: &WindowSpec) -> Result<RegretSeries> {
    check_interior(traj)?;
    let mut acc = WindowAccumulator::new(*window, traj.dim());
    let mut terms = Vec::with_capacity(traj.horizon());
    for record in traj.steps() {
        acc.push(&record.g);
        terms.push(acc.average().norm_sq());
    }
    Ok(RegretSeries::from_terms(
        Meter::ProposedInterior,
        *window,
        MeterParams::None,
        terms,
    ))
}

/// Fixed-direction proposed regret:
/// `term_t = | (1/w) sum_{s=t-w+1}^t <D_u(x_s), g_s> |^2`.
pub fn proposed_regret_directional(
    traj: &Trajectory,
    window: &WindowSpec,
    u: &Point,
) -> Result<RegretSeries> {
    if u.dim() != traj.dim() {
        return Err(Error::DimensionMismatch {
            expected: traj.dim(),
            actual: u.dim(),
        });
    }
    let set = traj.set();
    let mut acc = WindowAccumulator::new(*window, 1);
    let mut terms = Vec::with_capacity(traj.horizon());
    for record in traj.steps() {
        let displaced = set.displacement(&record.x, u)?;
        let inner = displaced.dot(&record.g);
        acc.push(&Point::scalar(inner)?);
        let avg = acc.average()[0];
        terms.push(avg * avg);
    }
    Ok(RegretSeries::from_terms(
        Meter::ProposedDirectional,
        *window,
        MeterParams::Direction(u.clone()),
        terms,
    ))
}

/// Hazan's local regret terms:
/// `term_t = || (1/w) sum_{i=0}^{w-1} grad f_{t-i}(x_t) ||^2`, every gradient
/// re-evaluated at the current iterate, with `grad f_s = 0` for `s <= 0`.
pub fn hazan_local_regret(traj: &Trajectory, spec: &LossSpec, w: usize) -> Result<RegretSeries> {
    if w < 1 {
        return Err(Error::InvalidParameter {
            name: "w",
            reason: "window width must be at least 1".into(),
        });
    }
    if spec.dim() != traj.dim() {
        return Err(Error::DimensionMismatch {
            expected: traj.dim(),
            actual: spec.dim(),
        });
    }
    let mut terms = Vec::with_capacity(traj.horizon());
    for record in traj.steps() {
        let t = record.t;
        let mut sum = Point::zeros(traj.dim());
        for i in 0..w.min(t) {
            sum = sum.add(&spec.loss_gradient(t - i, &record.x)?);
        }
        terms.push(sum.scale(1.0 / w as f64).norm_sq());
    }
    Ok(RegretSeries::from_terms(
        Meter::Hazan,
        WindowSpec::ConstantW { w },
        MeterParams::None,
        terms,
    ))
}

/// The calibration gap at perturbation scale `radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationGap {
    pub gap: f64,
    /// True when the gap was estimated by direction sampling (some iterate
    /// was within `radius` of the boundary) and is therefore only a lower
    /// estimate of the supremum.
    pub lower_estimate: bool,
    pub radius: f64,
}

fn calibration_directions(dim: usize, radius: f64, rng: &mut impl Rng) -> Vec<Point> {
    let mut dirs = Vec::with_capacity(2 * dim + CALIBRATION_RANDOM_DIRECTIONS);
    for i in 0..dim {
        let mut coords = vec![0.0; dim];
        coords[i] = radius;
        dirs.push(Point::new(coords.clone()).expect("axis direction is finite"));
        coords[i] = -radius;
        dirs.push(Point::new(coords).expect("axis direction is finite"));
    }
    for _ in 0..CALIBRATION_RANDOM_DIRECTIONS {
        dirs.push(unit_vector(dim, rng).scale(radius));
    }
    dirs
}

/// `sup over ||u|| <= radius of -(1/T) sum_t <D_u(x_t), g_t>`.
///
/// When every iterate is interior by at least `radius`, the supremum has the
/// closed form `radius * ||(1/T) sum_t g_t||` (attained at minus the
/// normalized gradient sum) and is exact. Otherwise it is estimated over the
/// axis directions and random unit directions scaled to `radius`, and
/// flagged as a lower estimate. The supremum is never below zero (`u = 0`).
pub fn calibration_gap(
    traj: &Trajectory,
    radius: f64,
    rng: &mut impl Rng,
) -> Result<CalibrationGap> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "radius",
            reason: format!("must be positive and finite, got {radius}"),
        });
    }
    let horizon = traj.horizon() as f64;
    let interior = traj
        .steps()
        .iter()
        .all(|r| traj.set().is_interior(&r.x, radius));
    if interior {
        let mut sum = Point::zeros(traj.dim());
        for record in traj.steps() {
            sum = sum.add(&record.g);
        }
        return Ok(CalibrationGap {
            gap: radius * sum.scale(1.0 / horizon).norm(),
            lower_estimate: false,
            radius,
        });
    }

    let mut best = 0.0_f64;
    for u in calibration_directions(traj.dim(), radius, rng) {
        let mut total = 0.0;
        for record in traj.steps() {
            total += traj.set().displacement(&record.x, &u)?.dot(&record.g);
        }
        best = best.max(-total / horizon);
    }
    Ok(CalibrationGap {
        gap: best,
        lower_estimate: true,
        radius,
    })
}

/// Running calibration gap over prefixes `1..=T`, as a series whose
/// `cumulative` column tracks the prefix gap (`instantaneous` holds its
/// per-round change).
pub fn calibration_gap_series(
    traj: &Trajectory,
    radius: f64,
    rng: &mut impl Rng,
) -> Result<RegretSeries> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "radius",
            reason: format!("must be positive and finite, got {radius}"),
        });
    }
    let interior = traj
        .steps()
        .iter()
        .all(|r| traj.set().is_interior(&r.x, radius));
    let gaps: Vec<f64> = if interior {
        let mut sum = Point::zeros(traj.dim());
        traj.steps()
            .iter()
            .map(|record| {
                sum = sum.add(&record.g);
                radius * sum.norm() / record.t as f64
            })
            .collect()
    } else {
        let dirs = calibration_directions(traj.dim(), radius, rng);
        let mut per_dir = vec![0.0; dirs.len()];
        let mut gaps = Vec::with_capacity(traj.horizon());
        for record in traj.steps() {
            let mut best = 0.0_f64;
            for (sum, u) in per_dir.iter_mut().zip(&dirs) {
                *sum += traj.set().displacement(&record.x, u)?.dot(&record.g);
                best = best.max(-*sum / record.t as f64);
            }
            gaps.push(best);
        }
        gaps
    };
    let mut prev = 0.0;
    let terms: Vec<f64> = gaps
        .iter()
        .map(|&gap| {
            let d = gap - prev;
            prev = gap;
            d
        })
        .collect();
    Ok(RegretSeries::from_terms(
        Meter::Calibration,
        WindowSpec::Growing,
        MeterParams::Radius(radius),
        terms,
    ))
}

/// Standard regret against the brute-force best fixed point in hindsight.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardRegret {
    pub regret: f64,
    pub cumulative_loss: f64,
    pub hindsight_minimum: f64,
    pub minimizer: Point,
    /// Lattice points per axis.
    pub grid: usize,
    /// Largest lattice spacing across axes.
    pub resolution: f64,
}

fn hindsight_lattice(set: &FeasibleSet, grid: usize) -> Result<Vec<Point>> {
    let dim = set.dim();
    let (lo, hi): (Vec<f64>, Vec<f64>) = match set {
        FeasibleSet::Ball { center, radius } => (
            center.coords().iter().map(|c| c - radius).collect(),
            center.coords().iter().map(|c| c + radius).collect(),
        ),
        FeasibleSet::Box { lower, upper } => (lower.coords().to_vec(), upper.coords().to_vec()),
        FeasibleSet::AllSpace { .. } => {
            return Err(Error::HindsightInfeasible {
                reason: "unbounded set".into(),
            })
        }
    };
    let axis = |i: usize, k: usize| lo[i] + (hi[i] - lo[i]) * k as f64 / (grid - 1) as f64;
    let mut points = Vec::new();
    match dim {
        1 => {
            for k in 0..grid {
                let p = Point::new(vec![axis(0, k)])?;
                if set.contains(&p) {
                    points.push(p);
                }
            }
        }
        2 => {
            for k0 in 0..grid {
                for k1 in 0..grid {
                    let p = Point::new(vec![axis(0, k0), axis(1, k1)])?;
                    if set.contains(&p) {
                        points.push(p);
                    }
                }
            }
        }
        d => {
            return Err(Error::HindsightInfeasible {
                reason: format!("dimension {d} > 2 (nonconvex hindsight search is brute force)"),
            })
        }
    }
    if points.is_empty() {
        return Err(Error::HindsightInfeasible {
            reason: "no lattice point lies in the set; refine the grid".into(),
        });
    }
    Ok(points)
}

fn lattice_resolution(set: &FeasibleSet, grid: usize) -> f64 {
    match set {
        FeasibleSet::Ball { radius, .. } => 2.0 * radius / (grid - 1) as f64,
        FeasibleSet::Box { lower, upper } => lower
            .coords()
            .iter()
            .zip(upper.coords())
            .map(|(&l, &u)| (u - l) / (grid - 1) as f64)
            .fold(0.0, f64::max),
        FeasibleSet::AllSpace { .. } => f64::INFINITY,
    }
}

/// `sum_t f_t(x_t) - min over the lattice of sum_t f_t(x)`, with `grid`
/// points per axis on the set's bounding box intersected with the set.
pub fn standard_regret(traj: &Trajectory, spec: &LossSpec, grid: usize) -> Result<StandardRegret> {
    if grid < 2 {
        return Err(Error::InvalidParameter {
            name: "grid",
            reason: "need at least 2 lattice points per axis".into(),
        });
    }
    if spec.dim() != traj.dim() {
        return Err(Error::DimensionMismatch {
            expected: traj.dim(),
            actual: spec.dim(),
        });
    }
    let points = hindsight_lattice(traj.set(), grid)?;
    let horizon = traj.horizon();

    let mut cumulative_loss = 0.0;
    for record in traj.steps() {
        cumulative_loss += record.loss;
    }

    let mut best = f64::INFINITY;
    let mut minimizer = points[0].clone();
    for p in &points {
        let mut total = 0.0;
        for t in 1..=horizon {
            total += spec.loss_value(t, p)?;
        }
        if total < best {
            best = total;
            minimizer = p.clone();
        }
    }

    Ok(StandardRegret {
        regret: cumulative_loss - best,
        cumulative_loss,
        hindsight_minimum: best,
        minimizer,
        grid,
        resolution: lattice_resolution(traj.set(), grid),
    })
}

/// Running standard regret over prefixes, as a series whose `cumulative`
/// column tracks the prefix regret.
pub fn standard_regret_series(
    traj: &Trajectory,
    spec: &LossSpec,
    grid: usize,
) -> Result<RegretSeries> {
    if grid < 2 {
        return Err(Error::InvalidParameter {
            name: "grid",
            reason: "need at least 2 lattice points per axis".into(),
        });
    }
    if spec.dim() != traj.dim() {
        return Err(Error::DimensionMismatch {
            expected: traj.dim(),
            actual: spec.dim(),
        });
    }
    let points = hindsight_lattice(traj.set(), grid)?;
    let mut totals = vec![0.0_f64; points.len()];
    let mut played = 0.0;
    let mut regrets = Vec::with_capacity(traj.horizon());
    for record in traj.steps() {
        played += record.loss;
        let mut best = f64::INFINITY;
        for (total, p) in totals.iter_mut().zip(&points) {
            *total += spec.loss_value(record.t, p)?;
            best = best.min(*total);
        }
        regrets.push(played - best);
    }
    let mut prev = 0.0;
    let terms: Vec<f64> = regrets
        .iter()
        .map(|&r| {
            let d = r - prev;
            prev = r;
            d
        })
        .collect();
    Ok(RegretSeries::from_terms(
        Meter::Standard,
        WindowSpec::Growing,
        MeterParams::Grid(grid),
        terms,
    ))
}

/// Per-round agreement between the incremental accumulator and direct
/// summation, for the `windows` verification suite.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowCheckRow {
    pub t: usize,
    pub w: usize,
    /// `||incremental - direct||` relative to `max(1, ||direct||)`.
    pub relative_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Incremental-vs-direct scan of windowed gradient averages.
pub fn window_consistency_scan(
    traj: &Trajectory,
    window: &WindowSpec,
    tolerance: f64,
) -> Result<Vec<WindowCheckRow>> {
    let mut acc = WindowAccumulator::new(*window, traj.dim());
    let mut rows = Vec::with_capacity(traj.horizon());
    for record in traj.steps() {
        acc.push(&record.g);
        let incremental = acc.average();
        let direct = windowed_gradient_average(traj, record.t, window)?;
        let relative_error = incremental.sub(&direct).norm() / direct.norm().max(1.0);
        rows.push(WindowCheckRow {
            t: record.t,
            w: window.width_at(record.t),
            relative_error,
            tolerance,
            pass: relative_error <= tolerance,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::{run, LearningRateSchedule};
    use crate::sampling::seeded_rng;

    fn pt(coords: &[f64]) -> Point {
        Point::from_slice(coords).unwrap()
    }

    /// All-space trajectory whose gradients are scripted per round,
    /// regardless of the iterate.
    fn scripted_gradient_run(grads: Vec<Vec<f64>>) -> Trajectory {
        let dim = grads[0].len();
        let horizon = grads.len();
        let spec = LossSpec::scripted(dim, move |t, _| {
            (0.0, Point::from_slice(&grads[t - 1]).unwrap())
        })
        .unwrap();
        let set = FeasibleSet::all_space(dim).unwrap();
        let schedule = LearningRateSchedule::constant(0.1).unwrap();
        run(&spec, &set, &schedule, &Point::zeros(dim), horizon).unwrap()
    }

    fn constant_gradient_run(g: &[f64], horizon: usize) -> Trajectory {
        scripted_gradient_run(vec![g.to_vec(); horizon])
    }

    #[test]
    fn windowed_average_zero_pads_early_rounds() {
        let traj = constant_gradient_run(&[1.0, 0.0], 3);
        let w2 = WindowSpec::constant(2).unwrap();
        assert_eq!(
            windowed_gradient_average(&traj, 1, &w2).unwrap(),
            pt(&[0.5, 0.0])
        );
        assert_eq!(
            windowed_gradient_average(&traj, 3, &w2).unwrap(),
            pt(&[1.0, 0.0])
        );
        let growing = WindowSpec::growing();
        for t in 1..=3 {
            assert_eq!(
                windowed_gradient_average(&traj, t, &growing).unwrap(),
                pt(&[1.0, 0.0])
            );
        }
        assert!(windowed_gradient_average(&traj, 0, &w2).is_err());
        assert!(windowed_gradient_average(&traj, 4, &w2).is_err());
    }

    #[test]
    fn zero_padding_divides_by_w_not_by_count() {
        // for t < w the average is exactly (sum of the first t gradients)/w
        let traj = scripted_gradient_run(vec![vec![1.0, 2.0], vec![-0.5, 0.25], vec![3.0, -1.0]]);
        let w = WindowSpec::constant(5).unwrap();
        let avg2 = windowed_gradient_average(&traj, 2, &w).unwrap();
        assert_eq!(avg2, pt(&[(1.0 - 0.5) / 5.0, (2.0 + 0.25) / 5.0]));
    }

    #[test]
    fn proposed_interior_matches_hand_computation() {
        let traj = constant_gradient_run(&[1.0, 0.0], 3);
        let series = proposed_regret_interior(&traj, &WindowSpec::constant(2).unwrap()).unwrap();
        // terms: ||(0+g)/2||^2 = 0.25, then ||g||^2 = 1 twice
        assert_eq!(series.instantaneous(), &[0.25, 1.0, 1.0]);
        assert_eq!(series.cumulative(), &[0.25, 1.25, 2.25]);
    }

    #[test]
    fn zero_gradients_give_zero_regret() {
        let traj = constant_gradient_run(&[0.0], 5);
        let series = proposed_regret_interior(&traj, &WindowSpec::constant(3).unwrap()).unwrap();
        assert!(series.cumulative().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn growing_window_cancels_alternating_gradients() {
        let traj = scripted_gradient_run(vec![vec![1.0], vec![-1.0]]);
        let series = proposed_regret_interior(&traj, &WindowSpec::growing()).unwrap();
        assert_eq!(series.instantaneous(), &[1.0, 0.0]);
        assert_eq!(series.cumulative(), &[1.0, 1.0]);
    }

    #[test]
    fn non_interior_iterates_are_rejected_with_the_step() {
        // constant pull toward (5, 0) pins the iterate to the ball boundary
        let set = FeasibleSet::ball(Point::zeros(2), 1.0).unwrap();
        let spec = LossSpec::switching_quadratic(vec![pt(&[5.0, 0.0])], 1).unwrap();
        let schedule = LearningRateSchedule::constant(1.0).unwrap();
        let traj = run(&spec, &set, &schedule, &Point::zeros(2), 5).unwrap();
        let err = proposed_regret_interior(&traj, &WindowSpec::constant(1).unwrap()).unwrap_err();
        match err {
            Error::NonInterior { step } => assert!(step >= 2),
            other => panic!("expected non-interior error, got {other:?}"),
        }
    }

    #[test]
    fn directional_zero_direction_vanishes() {
        let traj = constant_gradient_run(&[1.0, 0.0], 4);
        let series =
            proposed_regret_directional(&traj, &WindowSpec::constant(2).unwrap(), &Point::zeros(2))
                .unwrap();
        assert!(series.cumulative().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn directional_aligned_and_orthogonal_directions() {
        let traj = constant_gradient_run(&[1.0, 0.0], 4);
        let aligned =
            proposed_regret_directional(&traj, &WindowSpec::constant(1).unwrap(), &pt(&[1.0, 0.0]))
                .unwrap();
        assert!(aligned.instantaneous().iter().all(|&v| v == 1.0));
        let orthogonal =
            proposed_regret_directional(&traj, &WindowSpec::constant(3).unwrap(), &pt(&[0.0, 1.0]))
                .unwrap();
        assert!(orthogonal.cumulative().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn hazan_w1_matches_squared_gradient_norms() {
        let spec = LossSpec::switching_quadratic(vec![Point::zeros(1)], 1).unwrap();
        let set = FeasibleSet::all_space(1).unwrap();
        let schedule = LearningRateSchedule::constant(0.5).unwrap();
        let traj = run(&spec, &set, &schedule, &pt(&[1.0]), 3).unwrap();
        let series = hazan_local_regret(&traj, &spec, 1).unwrap();
        assert_eq!(series.instantaneous(), &[1.0, 0.25, 0.0625]);
        assert_eq!(series.cumulative(), &[1.0, 1.25, 1.3125]);
    }

    #[test]
    fn hazan_vanishes_at_a_common_stationary_point() {
        let spec = LossSpec::switching_quadratic(vec![pt(&[2.0])], 1).unwrap();
        let set = FeasibleSet::all_space(1).unwrap();
        let schedule = LearningRateSchedule::constant(0.5).unwrap();
        let traj = run(&spec, &set, &schedule, &pt(&[2.0]), 4).unwrap();
        let series = hazan_local_regret(&traj, &spec, 3).unwrap();
        assert!(series.cumulative().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn hazan_time_invariant_padding_law() {
        // time-invariant family: term_t = ||grad f(x_t)||^2 (min(w,t)/w)^2
        let spec = LossSpec::switching_quadratic(vec![Point::zeros(1)], 1).unwrap();
        let set = FeasibleSet::all_space(1).unwrap();
        let schedule = LearningRateSchedule::constant(0.25).unwrap();
        let traj = run(&spec, &set, &schedule, &pt(&[1.0]), 6).unwrap();
        let w = 2;
        let series = hazan_local_regret(&traj, &spec, w).unwrap();
        for record in traj.steps() {
            let g2 = record.g.norm_sq();
            let scale = (w.min(record.t) as f64 / w as f64).powi(2);
            let expected = g2 * scale;
            assert!((series.instantaneous()[record.t - 1] - expected).abs() <= 1e-15);
        }
        // for w=2 and t>=2 the term equals the squared gradient norm itself
        for record in traj.steps().iter().skip(1) {
            assert!((series.instantaneous()[record.t - 1] - record.g.norm_sq()).abs() <= 1e-15);
        }
    }

    #[test]
    fn calibration_gap_closed_form() {
        let mut rng = seeded_rng(5);
        // five rounds of g = (0.6, 0.8): sum = (3, 4), avg norm = 1
        let traj = constant_gradient_run(&[0.6, 0.8], 5);
        let gap = calibration_gap(&traj, 1.0, &mut rng).unwrap();
        assert!(!gap.lower_estimate);
        assert!((gap.gap - 1.0).abs() < 1e-12);
        // homogeneity in the radius
        let doubled = calibration_gap(&traj, 2.0, &mut rng).unwrap();
        assert!((doubled.gap - 2.0).abs() < 1e-12);
    }

    #[test]
    fn calibration_gap_zero_for_cancelling_gradients() {
        let mut rng = seeded_rng(5);
        let traj = scripted_gradient_run(vec![vec![1.0, 0.0], vec![-1.0, 0.0]]);
        let gap = calibration_gap(&traj, 0.5, &mut rng).unwrap();
        assert_eq!(gap.gap, 0.0);
        assert!(!gap.lower_estimate);
    }

    #[test]
    fn calibration_gap_sampled_path_is_flagged_and_dominated() {
        // boundary-pinned run: sampled path engages
        let set = FeasibleSet::ball(Point::zeros(2), 1.0).unwrap();
        let spec = LossSpec::switching_quadratic(vec![pt(&[5.0, 0.0])], 1).unwrap();
        let schedule = LearningRateSchedule::constant(1.0).unwrap();
        let traj = run(&spec, &set, &schedule, &Point::zeros(2), 10).unwrap();
        let mut rng = seeded_rng(9);
        let gap = calibration_gap(&traj, 0.5, &mut rng).unwrap();
        assert!(gap.lower_estimate);
        assert!(gap.gap >= 0.0);
        // the estimate is a lower bound on the unconstrained closed form
        let mut sum = Point::zeros(2);
        for r in traj.steps() {
            sum = sum.add(&r.g);
        }
        let unconstrained = 0.5 * sum.scale(1.0 / 10.0).norm();
        assert!(gap.gap <= unconstrained + 1e-12);
    }

    #[test]
    fn calibration_series_tracks_the_prefix_gap() {
        let mut rng = seeded_rng(5);
        let traj = constant_gradient_run(&[0.6, 0.8], 5);
        let series = calibration_gap_series(&traj, 1.0, &mut rng).unwrap();
        // constant unit-norm average: prefix gap is 1 at every round
        for &c in series.cumulative() {
            assert!((c - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn standard_regret_matches_hand_computation() {
        let spec = LossSpec::switching_quadratic(vec![Point::zeros(1)], 1).unwrap();
        let set = FeasibleSet::axis_box(pt(&[-2.0]), pt(&[2.0])).unwrap();
        let schedule = LearningRateSchedule::constant(0.5).unwrap();
        let traj = run(&spec, &set, &schedule, &pt(&[1.0]), 3).unwrap();
        let result = standard_regret(&traj, &spec, 4001).unwrap();
        // hindsight optimum 0 lies on the grid; sum of 0.5 x_t^2 = 0.65625
        assert!((result.regret - 0.65625).abs() < 1e-12);
        assert!((result.hindsight_minimum).abs() < 1e-12);
        assert_eq!(result.minimizer, pt(&[0.0]));
        assert!((result.resolution - 0.001).abs() < 1e-15);
    }

    #[test]
    fn standard_regret_zero_when_pinned_at_the_hindsight_optimum() {
        let spec = LossSpec::switching_quadratic(vec![Point::zeros(1)], 1).unwrap();
        let set = FeasibleSet::axis_box(pt(&[-1.0]), pt(&[1.0])).unwrap();
        let schedule = LearningRateSchedule::constant(0.5).unwrap();
        let traj = run(&spec, &set, &schedule, &pt(&[0.0]), 5).unwrap();
        let result = standard_regret(&traj, &spec, 101).unwrap();
        assert!(result.regret.abs() < 1e-12);
    }

    #[test]
    fn hindsight_minimum_is_monotone_under_nested_grids() {
        let spec = LossSpec::drifting_sine(0.8, 2.0, Point::zeros(1), pt(&[0.3])).unwrap();
        let set = FeasibleSet::axis_box(pt(&[-2.0]), pt(&[2.0])).unwrap();
        let schedule = LearningRateSchedule::constant(0.2).unwrap();
        let traj = run(&spec, &set, &schedule, &pt(&[1.0]), 10).unwrap();
        // grid of 2(n-1)+1 points contains the n-point grid
        let coarse = standard_regret(&traj, &spec, 11).unwrap();
        let fine = standard_regret(&traj, &spec, 21).unwrap();
        assert!(fine.hindsight_minimum <= coarse.hindsight_minimum + 1e-15);
    }

    #[test]
    fn standard_regret_rejects_high_dimensions_and_unbounded_sets() {
        let spec = LossSpec::switching_quadratic(vec![Point::zeros(3)], 1).unwrap();
        let set = FeasibleSet::ball(Point::zeros(3), 1.0).unwrap();
        let schedule = LearningRateSchedule::constant(0.5).unwrap();
        let traj = run(&spec, &set, &schedule, &Point::zeros(3), 2).unwrap();
        assert!(matches!(
            standard_regret(&traj, &spec, 11).unwrap_err(),
            Error::HindsightInfeasible { .. }
        ));

        let spec1 = LossSpec::switching_quadratic(vec![Point::zeros(1)], 1).unwrap();
        let all = FeasibleSet::all_space(1).unwrap();
        let traj = run(&spec1, &all, &schedule, &pt(&[1.0]), 2).unwrap();
        assert!(matches!(
            standard_regret(&traj, &spec1, 11).unwrap_err(),
            Error::HindsightInfeasible { .. }
        ));
    }

    #[test]
    fn standard_series_final_value_matches_the_scalar_op() {
        let spec = LossSpec::drifting_sine(0.8, 2.0, Point::zeros(1), pt(&[0.3])).unwrap();
        let set = FeasibleSet::axis_box(pt(&[-2.0]), pt(&[2.0])).unwrap();
        let schedule = LearningRateSchedule::constant(0.2).unwrap();
        let traj = run(&spec, &set, &schedule, &pt(&[1.0]), 30).unwrap();
        let scalar = standard_regret(&traj, &spec, 201).unwrap();
        let series = standard_regret_series(&traj, &spec, 201).unwrap();
        assert_eq!(series.len(), 30);
        assert!((series.total() - scalar.regret).abs() <= 1e-10);
    }

    #[test]
    fn calibration_series_final_value_matches_the_scalar_op() {
        let mut rng = seeded_rng(31);
        let traj = constant_gradient_run(&[0.3, -0.4], 200);
        let scalar = calibration_gap(&traj, 0.7, &mut rng).unwrap();
        let series = calibration_gap_series(&traj, 0.7, &mut rng).unwrap();
        assert!((series.total() - scalar.gap).abs() <= 1e-10);
    }

    #[test]
    fn accumulator_matches_direct_summation() {
        let mut grads = Vec::new();
        for t in 0..500usize {
            let a = (t as f64 * 0.7).sin() * 3.0;
            let b = (t as f64 * 1.3).cos() * 2.0;
            grads.push(vec![a, b]);
        }
        let traj = scripted_gradient_run(grads);
        for window in [WindowSpec::constant(7).unwrap(), WindowSpec::growing()] {
            let rows = window_consistency_scan(&traj, &window, 1e-10).unwrap();
            assert!(rows.iter().all(|r| r.pass));
        }
    }

    #[test]
    fn cumulative_is_the_exact_prefix_sum() {
        let traj = constant_gradient_run(&[0.3, -0.2], 50);
        let series = proposed_regret_interior(&traj, &WindowSpec::constant(4).unwrap()).unwrap();
        let mut total = 0.0;
        for (inst, cum) in series.instantaneous().iter().zip(series.cumulative()) {
            total += inst;
            assert_eq!(total, *cum);
        }
    }
}
