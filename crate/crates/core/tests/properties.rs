//! Randomized invariants: projection geometry, gradient consistency,
//! window arithmetic, and the meter equivalences.

use proptest::prelude::*;

use localregret_core::geometry::{FeasibleSet, Point};
use localregret_core::losses::LossSpec;
use localregret_core::optimizer::{run, LearningRateSchedule, Trajectory};
use localregret_core::regret::{
    hazan_local_regret, proposed_regret_directional, proposed_regret_interior,
    window_consistency_scan, windowed_gradient_average, WindowSpec,
};
use localregret_core::sampling::{seeded_rng, standard_normal_point, unit_vector};

const GEOMETRY_TOL: f64 = 1e-10;

fn arb_set() -> impl Strategy<Value = FeasibleSet> {
    (1usize..=5).prop_flat_map(|dim| {
        prop_oneof![
            Just(FeasibleSet::all_space(dim).unwrap()),
            (prop::collection::vec(-5.0..5.0f64, dim), 0.1..4.0f64)
                .prop_map(|(c, r)| FeasibleSet::ball(Point::new(c).unwrap(), r).unwrap()),
            (
                prop::collection::vec(-5.0..5.0f64, dim),
                prop::collection::vec(0.1..3.0f64, dim)
            )
                .prop_map(|(lo, width)| {
                    let upper: Vec<f64> = lo.iter().zip(&width).map(|(l, w)| l + w).collect();
                    FeasibleSet::axis_box(Point::new(lo).unwrap(), Point::new(upper).unwrap())
                        .unwrap()
                }),
        ]
    })
}

fn set_with_points(n: usize) -> impl Strategy<Value = (FeasibleSet, Vec<Point>)> {
    arb_set().prop_flat_map(move |set| {
        let dim = set.dim();
        prop::collection::vec(prop::collection::vec(-10.0..10.0f64, dim), n).prop_map(move |raw| {
            let points = raw.into_iter().map(|c| Point::new(c).unwrap()).collect();
            (set.clone(), points)
        })
    })
}

proptest! {
    #[test]
    fn projection_is_non_expansive((set, pts) in set_with_points(2)) {
        let px = set.project(&pts[0]).unwrap();
        let py = set.project(&pts[1]).unwrap();
        prop_assert!(px.dist(&py) <= pts[0].dist(&pts[1]) + GEOMETRY_TOL);
    }

    #[test]
    fn projection_is_obtuse((set, pts) in set_with_points(2)) {
        // z in the set, arbitrary y: <z - proj(y), proj(y) - y> >= 0
        let z = set.project(&pts[0]).unwrap();
        let y = &pts[1];
        let p = set.project(y).unwrap();
        prop_assert!(z.sub(&p).dot(&p.sub(y)) >= -GEOMETRY_TOL);
    }

    #[test]
    fn projection_contracts_steps((set, pts) in set_with_points(2)) {
        // x in the set: ||x - proj(y)|| <= ||x - y||
        let x = set.project(&pts[0]).unwrap();
        let y = &pts[1];
        let p = set.project(y).unwrap();
        prop_assert!(x.dist(&p) <= x.dist(y) + GEOMETRY_TOL);
    }

    #[test]
    fn displacement_of_zero_is_zero((set, pts) in set_with_points(1)) {
        let x = set.project(&pts[0]).unwrap();
        let d = set.displacement(&x, &Point::zeros(set.dim())).unwrap();
        prop_assert!(d.norm() <= GEOMETRY_TOL);
    }

    #[test]
    fn displacement_never_exceeds_the_perturbation((set, pts) in set_with_points(2)) {
        let x = set.project(&pts[0]).unwrap();
        let u = &pts[1];
        let d = set.displacement(&x, u).unwrap();
        prop_assert!(d.norm() <= u.norm() + GEOMETRY_TOL);
    }

    #[test]
    fn projection_is_idempotent((set, pts) in set_with_points(1)) {
        let p = set.project(&pts[0]).unwrap();
        let pp = set.project(&p).unwrap();
        prop_assert!(p.dist(&pp) <= GEOMETRY_TOL);
    }
}

fn loss_suite(dim: usize) -> Vec<LossSpec> {
    vec![
        LossSpec::switching_quadratic(vec![Point::zeros(dim)], 1).unwrap(),
        LossSpec::switching_quadratic(
            vec![Point::zeros(dim), Point::new(vec![0.7; dim]).unwrap()],
            3,
        )
        .unwrap(),
        LossSpec::drifting_sine(0.0, 1.0, Point::zeros(dim), Point::zeros(dim)).unwrap(),
        LossSpec::drifting_sine(
            0.5,
            2.0,
            Point::new(vec![0.01; dim]).unwrap(),
            Point::new(vec![0.2; dim]).unwrap(),
        )
        .unwrap(),
        LossSpec::drifting_sine(2.0, 3.0, Point::zeros(dim), Point::zeros(dim)).unwrap(),
    ]
}

#[test]
fn analytic_gradients_match_finite_differences_at_random_points() {
    let mut rng = seeded_rng(101);
    for dim in [1usize, 2, 5] {
        for spec in loss_suite(dim) {
            for _ in 0..200 {
                let x = standard_normal_point(dim, &mut rng).scale(2.0);
                let t = 1 + (dim * 7) % 11;
                let grad = spec.loss_gradient(t, &x).unwrap();
                let fd = spec.finite_difference_gradient(t, &x, 1e-5).unwrap();
                let err = grad.sub(&fd).inf_norm();
                assert!(
                    err <= 1e-5 * (1.0 + grad.inf_norm()),
                    "dim={dim}, err={err}"
                );
            }
        }
    }
}

fn scripted_gradient_run(dim: usize, horizon: usize, seed: u64) -> Trajectory {
    let mut rng = seeded_rng(seed);
    let grads: Vec<Point> = (0..horizon)
        .map(|_| standard_normal_point(dim, &mut rng))
        .collect();
    let spec = LossSpec::scripted(dim, move |t, _| (0.0, grads[t - 1].clone())).unwrap();
    let set = FeasibleSet::all_space(dim).unwrap();
    let schedule = LearningRateSchedule::constant(0.05).unwrap();
    run(&spec, &set, &schedule, &Point::zeros(dim), horizon).unwrap()
}

#[test]
fn incremental_windows_match_direct_summation_on_random_trajectories() {
    for (dim, horizon, w, seed) in [
        (1usize, 500usize, 3usize, 1u64),
        (4, 1000, 64, 2),
        (8, 2000, 97, 3),
    ] {
        let traj = scripted_gradient_run(dim, horizon, seed);
        for window in [WindowSpec::constant(w).unwrap(), WindowSpec::growing()] {
            let rows = window_consistency_scan(&traj, &window, 1e-10).unwrap();
            assert!(
                rows.iter().all(|r| r.pass),
                "dim={dim}, horizon={horizon}, w={w}"
            );
        }
    }
}

#[test]
fn directional_supremum_is_attained_by_the_normalized_average() {
    let traj = scripted_gradient_run(2, 300, 7);
    let window = WindowSpec::constant(20).unwrap();
    let mut rng = seeded_rng(8);
    for t in 1..=traj.horizon() {
        let avg = windowed_gradient_average(&traj, t, &window).unwrap();
        let bound = avg.norm_sq();
        for _ in 0..512 {
            let u = unit_vector(2, &mut rng);
            let value = u.dot(&avg).powi(2);
            assert!(value <= bound * (1.0 + 1e-12) + 1e-300);
        }
        if bound > 0.0 {
            let maximizer = avg.scale(1.0 / avg.norm());
            let attained = maximizer.dot(&avg).powi(2);
            assert!((attained - bound).abs() <= 1e-12 * bound.max(1.0));
        }
    }
}

#[test]
fn directional_meter_is_dominated_by_the_interior_meter() {
    let traj = scripted_gradient_run(3, 400, 11);
    let window = WindowSpec::constant(15).unwrap();
    let interior = proposed_regret_interior(&traj, &window).unwrap();
    let mut rng = seeded_rng(12);
    for _ in 0..20 {
        let u = unit_vector(3, &mut rng);
        let directional = proposed_regret_directional(&traj, &window, &u).unwrap();
        for (d, i) in directional
            .instantaneous()
            .iter()
            .zip(interior.instantaneous())
        {
            assert!(d <= &(i * (1.0 + 1e-12) + 1e-300));
        }
    }
}

#[test]
fn hazan_and_interior_meters_coincide_at_window_one() {
    let set = FeasibleSet::ball(Point::zeros(2), 5.0).unwrap();
    let spec = LossSpec::drifting_sine(
        0.5,
        2.0,
        Point::zeros(2),
        Point::new(vec![0.3, -0.2]).unwrap(),
    )
    .unwrap();
    let schedule = LearningRateSchedule::inverse_sqrt(0.5).unwrap();
    let traj = run(
        &spec,
        &set,
        &schedule,
        &Point::new(vec![1.0, -0.5]).unwrap(),
        300,
    )
    .unwrap();
    let hazan = hazan_local_regret(&traj, &spec, 1).unwrap();
    let interior = proposed_regret_interior(&traj, &WindowSpec::constant(1).unwrap()).unwrap();
    for (h, p) in hazan.instantaneous().iter().zip(interior.instantaneous()) {
        assert!((h - p).abs() <= 1e-12);
    }
}

#[test]
fn constant_gradient_field_makes_hazan_and_proposed_agree_termwise() {
    // when grad f_t(x) is one fixed vector for every (t, x), re-evaluating
    // past gradients at the current iterate changes nothing, so the two
    // meters see identical windows (including the zero-padded rounds)
    let field = Point::new(vec![0.3, -0.7]).unwrap();
    let g = field.clone();
    let spec = LossSpec::scripted(2, move |_, _| (0.0, g.clone())).unwrap();
    let set = FeasibleSet::all_space(2).unwrap();
    let schedule = LearningRateSchedule::constant(0.1).unwrap();
    let traj = run(&spec, &set, &schedule, &Point::zeros(2), 40).unwrap();
    let w = 6;
    let hazan = hazan_local_regret(&traj, &spec, w).unwrap();
    let proposed = proposed_regret_interior(&traj, &WindowSpec::constant(w).unwrap()).unwrap();
    for (t, (h, p)) in hazan
        .instantaneous()
        .iter()
        .zip(proposed.instantaneous())
        .enumerate()
    {
        assert!((h - p).abs() <= 1e-15, "t={} hazan {h} proposed {p}", t + 1);
        let expected = field.norm_sq() * ((w.min(t + 1) as f64) / w as f64).powi(2);
        assert!((h - expected).abs() <= 1e-12);
    }
}

#[test]
fn squared_meters_are_nonnegative() {
    let traj = scripted_gradient_run(2, 200, 23);
    let window = WindowSpec::constant(9).unwrap();
    let interior = proposed_regret_interior(&traj, &window).unwrap();
    assert!(interior.instantaneous().iter().all(|&v| v >= 0.0));
    let mut rng = seeded_rng(24);
    let u = unit_vector(2, &mut rng);
    let directional = proposed_regret_directional(&traj, &window, &u).unwrap();
    assert!(directional.instantaneous().iter().all(|&v| v >= 0.0));
    let hazan = hazan_local_regret(&traj, traj.loss(), 4).unwrap();
    assert!(hazan.instantaneous().iter().all(|&v| v >= 0.0));
}
