//! Time-varying loss families with analytic gradients.
//!
//! The built-in suite is chosen so that the constants every bound consumes
//! are known in closed form: `DriftingSine` has switchable nonconvexity
//! (the curvature of the sine ripples overcomes the quadratic bowl exactly
//! when `|a| b^2 > 1`) and a triangle-inequality gradient bound over balls;
//! `SwitchingQuadratic` is convex with an exact gradient bound over any
//! bounded set. `Scripted` lets tests pin values and gradients per `(t, x)`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{FeasibleSet, Point};
use crate::sampling::uniform_in_set;

/// Draw count for sampled gradient bounds.
pub const GRADIENT_BOUND_SAMPLES: usize = 10_000;
/// Sampled bounds inflate the observed supremum by this factor.
pub const SAMPLED_BOUND_INFLATION: f64 = 1.1;

type ScriptedFn = dyn Fn(usize, &Point) -> (f64, Point) + Send + Sync;

/// An indexed family of losses `f_1, f_2, ...` on `R^d`.
#[derive(Clone)]
pub enum LossSpec {
    /// `f_t(x) = 0.5 ||x - c_t||^2 + a * sum_i sin(b x_i)` with
    /// `c_t = c0 + t * drift`.
    DriftingSine {
        a: f64,
        b: f64,
        drift: Point,
        c0: Point,
        nonconvex: bool,
    },
    /// `f_t(x) = 0.5 ||x - centers[(t / period) mod len]||^2`.
    SwitchingQuadratic { centers: Vec<Point>, period: usize },
    /// Value and gradient supplied per `(t, x)`; for hand-built test cases.
    Scripted { dim: usize, oracle: Arc<ScriptedFn> },
}

impl fmt::Debug for LossSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DriftingSine {
                a,
                b,
                drift,
                c0,
                nonconvex,
            } => f
                .debug_struct("DriftingSine")
                .field("a", a)
                .field("b", b)
                .field("drift", drift)
                .field("c0", c0)
                .field("nonconvex", nonconvex)
                .finish(),
            Self::SwitchingQuadratic { centers, period } => f
                .debug_struct("SwitchingQuadratic")
                .field("centers", centers)
                .field("period", period)
                .finish(),
            Self::Scripted { dim, .. } => f.debug_struct("Scripted").field("dim", dim).finish(),
        }
    }
}

/// How a gradient bound `G` was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMethod {
    Analytic,
    Sampled,
}

/// A bound `G` with `||grad f_t(x)|| <= G` over the sampled or bounded range.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBound {
    pub g: f64,
    pub method: BoundMethod,
    pub sample_count: usize,
}

impl LossSpec {
    pub fn drifting_sine(a: f64, b: f64, drift: Point, c0: Point) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::InvalidParameter {
                name: "a",
                reason: format!("must be finite, got {a}"),
            });
        }
        if !b.is_finite() {
            return Err(Error::InvalidParameter {
                name: "b",
                reason: format!("must be finite, got {b}"),
            });
        }
        if drift.dim() != c0.dim() {
            return Err(Error::DimensionMismatch {
                expected: c0.dim(),
                actual: drift.dim(),
            });
        }
        // Hessian is I + diag(-a b^2 sin(b x_i)); positive semidefiniteness
        // fails somewhere iff |a| b^2 > 1.
        let nonconvex = a.abs() * b * b > 1.0;
        Ok(Self::DriftingSine {
            a,
            b,
            drift,
            c0,
            nonconvex,
        })
    }

    pub fn switching_quadratic(centers: Vec<Point>, period: usize) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::InvalidParameter {
                name: "centers",
                reason: "need at least one center".into(),
            });
        }
        let dim = centers[0].dim();
        if centers.iter().any(|c| c.dim() != dim) {
            return Err(Error::InvalidParameter {
                name: "centers",
                reason: "all centers must share one dimension".into(),
            });
        }
        if period == 0 {
            return Err(Error::InvalidParameter {
                name: "period",
                reason: "must be at least 1".into(),
            });
        }
        Ok(Self::SwitchingQuadratic { centers, period })
    }

    pub fn scripted<F>(dim: usize, oracle: F) -> Result<Self>
    where
        F: Fn(usize, &Point) -> (f64, Point) + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(Error::InvalidParameter {
                name: "dim",
                reason: "dimension must be at least 1".into(),
            });
        }
        Ok(Self::Scripted {
            dim,
            oracle: Arc::new(oracle),
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::DriftingSine { c0, .. } => c0.dim(),
            Self::SwitchingQuadratic { centers, .. } => centers[0].dim(),
            Self::Scripted { dim, .. } => *dim,
        }
    }

    /// True when the family is nonconvex (always false for the quadratic
    /// suite; recorded at construction for `DriftingSine`).
    pub fn is_nonconvex(&self) -> bool {
        match self {
            Self::DriftingSine { nonconvex, .. } => *nonconvex,
            _ => false,
        }
    }

    fn check_time_and_dim(&self, t: usize, x: &Point) -> Result<()> {
        if t < 1 {
            return Err(Error::InvalidParameter {
                name: "t",
                reason: "time index must be at least 1 (f_t = 0 for t <= 0 is the \
                         regret module's zero-padding convention, not a loss)"
                    .into(),
            });
        }
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.dim(),
            });
        }
        Ok(())
    }

    /// Quadratic center active at time `t`.
    fn center_at(&self, t: usize) -> Point {
        match self {
            Self::DriftingSine { drift, c0, .. } => c0.add(&drift.scale(t as f64)),
            Self::SwitchingQuadratic { centers, period } => {
                centers[(t / period) % centers.len()].clone()
            }
            Self::Scripted { .. } => unreachable!("scripted losses have no center"),
        }
    }

    pub fn loss_value(&self, t: usize, x: &Point) -> Result<f64> {
        self.check_time_and_dim(t, x)?;
        let value = match self {
            Self::DriftingSine { a, b, .. } => {
                let c = self.center_at(t);
                let quad = 0.5 * x.sub(&c).norm_sq();
                let ripple: f64 = x.coords().iter().map(|&xi| (b * xi).sin()).sum();
                quad + a * ripple
            }
            Self::SwitchingQuadratic { .. } => 0.5 * x.sub(&self.center_at(t)).norm_sq(),
            Self::Scripted { oracle, .. } => oracle(t, x).0,
        };
        if !value.is_finite() {
            return Err(Error::Numeric { step: t });
        }
        Ok(value)
    }

    pub fn loss_gradient(&self, t: usize, x: &Point) -> Result<Point> {
        self.check_time_and_dim(t, x)?;
        match self {
            Self::DriftingSine { a, b, .. } => {
                let c = self.center_at(t);
                let coords: Vec<f64> = x
                    .coords()
                    .iter()
                    .zip(c.coords())
                    .map(|(&xi, &ci)| (xi - ci) + a * b * (b * xi).cos())
                    .collect();
                Point::new(coords).map_err(|_| Error::Numeric { step: t })
            }
            Self::SwitchingQuadratic { .. } => Ok(x.sub(&self.center_at(t))),
            Self::Scripted { oracle, .. } => {
                let g = oracle(t, x).1;
                if g.dim() != self.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: self.dim(),
                        actual: g.dim(),
                    });
                }
                if !g.is_finite() {
                    return Err(Error::Numeric { step: t });
                }
                Ok(g)
            }
        }
    }

    /// Central-difference gradient, the verification oracle for
    /// [`LossSpec::loss_gradient`].
    pub fn finite_difference_gradient(&self, t: usize, x: &Point, h: f64) -> Result<Point> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "h",
                reason: format!("step must be positive and finite, got {h}"),
            });
        }
        self.check_time_and_dim(t, x)?;
        let mut coords = Vec::with_capacity(x.dim());
        let mut probe = x.coords().to_vec();
        for i in 0..x.dim() {
            probe[i] = x[i] + h;
            let plus = self.loss_value(t, &Point::new(probe.clone())?)?;
            probe[i] = x[i] - h;
            let minus = self.loss_value(t, &Point::new(probe.clone())?)?;
            probe[i] = x[i];
            coords.push((plus - minus) / (2.0 * h));
        }
        Point::new(coords)
    }

    /// A bound `G >= sup ||grad f_t(x)||` over `x` in `set`, `t <= horizon`.
    ///
    /// Closed forms are used where available (quadratics over any bounded
    /// set, `DriftingSine` over balls); otherwise the supremum is sampled
    /// over `(t, x)` draws and inflated by [`SAMPLED_BOUND_INFLATION`].
    pub fn gradient_bound(
        &self,
        set: &FeasibleSet,
        horizon: usize,
        rng: &mut impl Rng,
    ) -> Result<GradientBound> {
        if horizon < 1 {
            return Err(Error::InvalidParameter {
                name: "horizon",
                reason: "must be at least 1".into(),
            });
        }
        if set.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: set.dim(),
            });
        }
        if !set.is_bounded() {
            return Err(Error::UnboundedGradient {
                reason: "the loss families in this suite have no finite gradient \
                         supremum over all of R^d"
                    .into(),
            });
        }
        match self {
            Self::SwitchingQuadratic { centers, period } => {
                // grad = x - c: supremum is the farthest set point from any
                // center used within the horizon.
                let used: std::collections::BTreeSet<usize> = (1..=horizon)
                    .map(|t| (t / period) % centers.len())
                    .collect();
                let g = used
                    .iter()
                    .map(|&i| farthest_distance(set, &centers[i]))
                    .fold(0.0, f64::max);
                Ok(GradientBound {
                    g,
                    method: BoundMethod::Analytic,
                    sample_count: 0,
                })
            }
            Self::DriftingSine { a, b, .. } => match set {
                FeasibleSet::Ball { center, radius } => {
                    // ||grad|| <= ||x - c_t|| + |a||b| sqrt(d) by the triangle
                    // inequality; ||x - c_t|| <= ||center - c_t|| + radius, and
                    // t -> ||center - c_t|| is convex so ends dominate.
                    let d = self.dim() as f64;
                    let reach = center
                        .dist(&self.center_at(1))
                        .max(center.dist(&self.center_at(horizon)));
                    Ok(GradientBound {
                        g: reach + radius + a.abs() * b.abs() * d.sqrt(),
                        method: BoundMethod::Analytic,
                        sample_count: 0,
                    })
                }
                _ => self.sampled_bound(set, horizon, rng),
            },
            Self::Scripted { .. } => self.sampled_bound(set, horizon, rng),
        }
    }

    fn sampled_bound(
        &self,
        set: &FeasibleSet,
        horizon: usize,
        rng: &mut impl Rng,
    ) -> Result<GradientBound> {
        let mut sup: f64 = 0.0;
        for _ in 0..GRADIENT_BOUND_SAMPLES {
            let t = rng.random_range(1..=horizon);
            let x = uniform_in_set(set, rng)?;
            sup = sup.max(self.loss_gradient(t, &x)?.norm());
        }
        Ok(GradientBound {
            g: sup * SAMPLED_BOUND_INFLATION,
            method: BoundMethod::Sampled,
            sample_count: GRADIENT_BOUND_SAMPLES,
        })
    }
}

/// `sup ||x - c||` over a bounded set, in closed form.
fn farthest_distance(set: &FeasibleSet, c: &Point) -> f64 {
    match set {
        FeasibleSet::AllSpace { .. } => f64::INFINITY,
        FeasibleSet::Ball { center, radius } => center.dist(c) + radius,
        FeasibleSet::Box { lower, upper } => {
            // attained at the corner farthest from c in every coordinate
            lower
                .coords()
                .iter()
                .zip(upper.coords())
                .zip(c.coords())
                .map(|((&l, &u), &ci)| (ci - l).abs().max((u - ci).abs()).powi(2))
                .sum::<f64>()
                .sqrt()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::seeded_rng;
    use std::f64::consts::{PI, SQRT_2};

    fn pt(coords: &[f64]) -> Point {
        Point::from_slice(coords).unwrap()
    }

    fn origin_quadratic(dim: usize) -> LossSpec {
        LossSpec::switching_quadratic(vec![Point::zeros(dim)], 1).unwrap()
    }

    #[test]
    fn quadratic_value_and_gradient() {
        let spec = origin_quadratic(2);
        assert_eq!(spec.loss_value(1, &pt(&[3.0, 4.0])).unwrap(), 12.5);
        assert_eq!(
            spec.loss_gradient(1, &pt(&[3.0, 4.0])).unwrap(),
            pt(&[3.0, 4.0])
        );
    }

    #[test]
    fn drifting_sine_reduces_to_quadratic_when_a_is_zero() {
        let spec = LossSpec::drifting_sine(0.0, 1.0, Point::zeros(2), Point::zeros(2)).unwrap();
        assert_eq!(spec.loss_value(5, &pt(&[1.0, 1.0])).unwrap(), 1.0);
        let grad_at_center = LossSpec::drifting_sine(0.0, 1.0, Point::zeros(2), pt(&[1.0, 1.0]))
            .unwrap()
            .loss_gradient(2, &pt(&[1.0, 1.0]))
            .unwrap();
        assert_eq!(grad_at_center, pt(&[0.0, 0.0]));
    }

    #[test]
    fn drifting_sine_value_with_ripples() {
        let spec = LossSpec::drifting_sine(2.0, 3.0, Point::zeros(2), Point::zeros(2)).unwrap();
        let v = spec.loss_value(1, &pt(&[PI / 6.0, 0.0])).unwrap();
        let exact = 0.5 * (PI / 6.0) * (PI / 6.0) + 2.0;
        assert!((v - exact).abs() < 1e-12);
        assert!((v - 2.13708).abs() < 5e-6);
    }

    #[test]
    fn drifting_sine_gradient_with_ripples() {
        let spec = LossSpec::drifting_sine(2.0, 3.0, Point::zeros(2), Point::zeros(2)).unwrap();
        let g = spec.loss_gradient(1, &Point::zeros(2)).unwrap();
        assert_eq!(g, pt(&[6.0, 6.0]));
    }

    #[test]
    fn drifting_center_moves_with_time() {
        let spec = LossSpec::drifting_sine(0.0, 1.0, pt(&[0.5]), pt(&[1.0])).unwrap();
        // c_3 = 1 + 3*0.5 = 2.5; gradient at x=2.5 vanishes
        assert_eq!(spec.loss_gradient(3, &pt(&[2.5])).unwrap(), pt(&[0.0]));
    }

    #[test]
    fn switching_quadratic_cycles_centers() {
        let spec = LossSpec::switching_quadratic(vec![pt(&[0.0]), pt(&[10.0])], 2).unwrap();
        // index (t / 2) mod 2: t=1 -> 0, t=2 -> 1, t=3 -> 1, t=4 -> 0
        assert_eq!(spec.loss_gradient(1, &pt(&[1.0])).unwrap(), pt(&[1.0]));
        assert_eq!(spec.loss_gradient(2, &pt(&[1.0])).unwrap(), pt(&[-9.0]));
        assert_eq!(spec.loss_gradient(3, &pt(&[1.0])).unwrap(), pt(&[-9.0]));
        assert_eq!(spec.loss_gradient(4, &pt(&[1.0])).unwrap(), pt(&[1.0]));
    }

    #[test]
    fn finite_differences_match_analytic_gradients() {
        let quad = origin_quadratic(2);
        let fd = quad
            .finite_difference_gradient(1, &pt(&[3.0, 4.0]), 1e-5)
            .unwrap();
        assert!(fd.sub(&pt(&[3.0, 4.0])).inf_norm() < 1e-8);

        let sine0 = LossSpec::drifting_sine(0.0, 1.0, Point::zeros(2), pt(&[1.0, 1.0])).unwrap();
        let fd = sine0
            .finite_difference_gradient(2, &pt(&[1.0, 1.0]), 1e-5)
            .unwrap();
        assert!(fd.inf_norm() < 1e-9);

        let sine = LossSpec::drifting_sine(2.0, 3.0, Point::zeros(2), Point::zeros(2)).unwrap();
        let fd = sine
            .finite_difference_gradient(1, &Point::zeros(2), 1e-5)
            .unwrap();
        assert!(fd.sub(&pt(&[6.0, 6.0])).inf_norm() < 1e-6);
    }

    #[test]
    fn analytic_gradient_bounds() {
        let mut rng = seeded_rng(3);
        let ball2 = FeasibleSet::ball(Point::zeros(2), 2.0).unwrap();
        let b = origin_quadratic(2)
            .gradient_bound(&ball2, 10, &mut rng)
            .unwrap();
        assert_eq!(b.g, 2.0);
        assert_eq!(b.method, BoundMethod::Analytic);

        let ball1 = FeasibleSet::ball(Point::zeros(2), 1.0).unwrap();
        let b = LossSpec::drifting_sine(0.0, 1.0, Point::zeros(2), Point::zeros(2))
            .unwrap()
            .gradient_bound(&ball1, 5, &mut rng)
            .unwrap();
        assert_eq!(b.g, 1.0);
        assert_eq!(b.method, BoundMethod::Analytic);

        let b = LossSpec::drifting_sine(1.0, 2.0, Point::zeros(2), Point::zeros(2))
            .unwrap()
            .gradient_bound(&ball1, 5, &mut rng)
            .unwrap();
        assert!((b.g - (1.0 + 2.0 * SQRT_2)).abs() < 1e-12);
        assert_eq!(b.method, BoundMethod::Analytic);
    }

    #[test]
    fn sampled_bound_covers_fresh_draws() {
        let mut rng = seeded_rng(17);
        let cube = FeasibleSet::axis_box(pt(&[-1.0, -1.0]), pt(&[1.0, 1.0])).unwrap();
        let spec = LossSpec::drifting_sine(1.0, 2.0, Point::zeros(2), pt(&[0.2, -0.1])).unwrap();
        let bound = spec.gradient_bound(&cube, 20, &mut rng).unwrap();
        assert_eq!(bound.method, BoundMethod::Sampled);
        assert_eq!(bound.sample_count, GRADIENT_BOUND_SAMPLES);
        for _ in 0..10_000 {
            let t = rng.random_range(1..=20);
            let x = uniform_in_set(&cube, &mut rng).unwrap();
            let norm = spec.loss_gradient(t, &x).unwrap().norm();
            assert!(norm <= bound.g * (1.0 + 1e-12));
        }
    }

    #[test]
    fn unbounded_sets_are_rejected() {
        let mut rng = seeded_rng(0);
        let all = FeasibleSet::all_space(2).unwrap();
        let err = origin_quadratic(2)
            .gradient_bound(&all, 5, &mut rng)
            .unwrap_err();
        assert!(matches!(err, Error::UnboundedGradient { .. }));
    }

    #[test]
    fn nonconvexity_flag_follows_curvature_threshold() {
        let flat = LossSpec::drifting_sine(0.1, 1.0, Point::zeros(1), Point::zeros(1)).unwrap();
        assert!(!flat.is_nonconvex());
        let rippled = LossSpec::drifting_sine(1.0, 2.0, Point::zeros(1), Point::zeros(1)).unwrap();
        assert!(rippled.is_nonconvex());
        assert!(!origin_quadratic(1).is_nonconvex());
    }

    #[test]
    fn nonconvex_flag_is_witnessed_by_a_negative_hessian_eigenvalue() {
        let a = 2.0;
        let b = 3.0;
        let spec = LossSpec::drifting_sine(a, b, Point::zeros(2), Point::zeros(2)).unwrap();
        assert!(spec.is_nonconvex());
        // probe where sin(b x_i) = 1, so the exact diagonal entries are 1 - a b^2
        let probe = pt(&[PI / (2.0 * b), PI / (2.0 * b)]);
        let h = 1e-4;
        let hess = fd_hessian_2d(&spec, 1, &probe, h);
        let min_eig = sym2_min_eigenvalue(hess);
        assert!(
            min_eig < -1.0,
            "expected a clearly negative eigenvalue, got {min_eig}"
        );
        assert!((min_eig - (1.0 - a * b * b)).abs() < 1e-3);
    }

    #[test]
    fn time_index_zero_is_a_usage_error() {
        let spec = origin_quadratic(1);
        assert!(spec.loss_value(0, &pt(&[1.0])).is_err());
        assert!(spec.loss_gradient(0, &pt(&[1.0])).is_err());
    }

    #[test]
    fn constructor_validation() {
        assert!(LossSpec::switching_quadratic(vec![], 1).is_err());
        assert!(LossSpec::switching_quadratic(vec![pt(&[0.0])], 0).is_err());
        assert!(LossSpec::switching_quadratic(vec![pt(&[0.0]), pt(&[0.0, 1.0])], 1).is_err());
        assert!(LossSpec::drifting_sine(f64::NAN, 1.0, pt(&[0.0]), pt(&[0.0])).is_err());
        assert!(LossSpec::drifting_sine(1.0, 1.0, pt(&[0.0, 0.0]), pt(&[0.0])).is_err());
    }

    #[test]
    fn scripted_oracle_round_trips() {
        let spec = LossSpec::scripted(1, |t, x| {
            (t as f64 * x[0], Point::scalar(t as f64).unwrap())
        })
        .unwrap();
        assert_eq!(spec.loss_value(3, &pt(&[2.0])).unwrap(), 6.0);
        assert_eq!(spec.loss_gradient(3, &pt(&[2.0])).unwrap(), pt(&[3.0]));
    }

    /// Value-based central second differences, independent of the analytic
    /// gradient path.
    fn fd_hessian_2d(spec: &LossSpec, t: usize, x: &Point, h: f64) -> [[f64; 2]; 2] {
        let f = |dx: f64, dy: f64| spec.loss_value(t, &pt(&[x[0] + dx, x[1] + dy])).unwrap();
        let hxx = (f(h, 0.0) - 2.0 * f(0.0, 0.0) + f(-h, 0.0)) / (h * h);
        let hyy = (f(0.0, h) - 2.0 * f(0.0, 0.0) + f(0.0, -h)) / (h * h);
        let hxy = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);
        [[hxx, hxy], [hxy, hyy]]
    }

    fn sym2_min_eigenvalue(m: [[f64; 2]; 2]) -> f64 {
        let tr = m[0][0] + m[1][1];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
        0.5 * (tr - disc)
    }
}
