//! Seeded sampling helpers shared by the randomized verification suites.
//!
//! All randomness in this crate flows through caller-supplied RNGs so that
//! suites are reproducible from a single seed. `ChaCha8` is used as the
//! concrete generator because its stream is stable across platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::{FeasibleSet, Point};

/// The deterministic generator used by the CLI and the test suites.
pub type SuiteRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SuiteRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Point with i.i.d. standard normal coordinates.
pub fn standard_normal_point(dim: usize, rng: &mut impl Rng) -> Point {
    assert!(dim >= 1, "dimension must be at least 1");
    let coords: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
    Point::new(coords).expect("normal draws are finite")
}

/// Uniformly random direction on the unit sphere.
pub fn unit_vector(dim: usize, rng: &mut impl Rng) -> Point {
    loop {
        let p = standard_normal_point(dim, rng);
        let n = p.norm();
        if n > 1e-12 {
            return p.scale(1.0 / n);
        }
    }
}

/// Uniform round index in `1..=horizon`.
pub fn random_time(horizon: usize, rng: &mut impl Rng) -> usize {
    assert!(horizon >= 1, "horizon must be at least 1");
    rng.random_range(1..=horizon)
}

/// Uniform draw from a bounded feasible set. Errors on all-space.
pub fn uniform_in_set(set: &FeasibleSet, rng: &mut impl Rng) -> Result<Point> {
    match set {
        FeasibleSet::AllSpace { .. } => Err(Error::Requires {
            op: "uniform sampling",
            required: "a bounded feasible set",
        }),
        FeasibleSet::Ball { center, radius } => {
            let dim = center.dim();
            let dir = unit_vector(dim, rng);
            // uniform volume: radius scaled by U^(1/d)
            let r = radius * rng.random::<f64>().powf(1.0 / dim as f64);
            Ok(center.add(&dir.scale(r)))
        }
        FeasibleSet::Box { lower, upper } => {
            let coords: Vec<f64> = lower
                .coords()
                .iter()
                .zip(upper.coords())
                .map(|(&l, &u)| rng.random_range(l..u))
                .collect();
            Point::new(coords)
        }
    }
}
