//! The `run`, `verify`, and `compare` flows.

use std::path::PathBuf;

use localregret_core::analysis::{
    bound_report, growth_exponent, linear_fit_quality, log_fit_quality,
};
use localregret_core::bounds::{
    estimate_constants, lemma1_scan, scenario1_bound, scenario2_bound, scenario3_bound,
    theorem1_scan, BoundConstants, CheckRow,
};
use localregret_core::optimizer::{run, Trajectory};
use localregret_core::regret::{
    calibration_gap, calibration_gap_series, hazan_local_regret, proposed_regret_directional,
    proposed_regret_interior, standard_regret, standard_regret_series, Meter, RegretSeries,
    WindowSpec,
};
use localregret_core::sampling::{
    random_time, seeded_rng, standard_normal_point, uniform_in_set, SuiteRng,
};
use localregret_core::{Error as CoreError, FeasibleSet, Point};

use crate::config::{BuiltExperiment, ExperimentConfig, LossConfig, ScheduleKind, SetConfig};
use crate::csvio::{check_rows_csv, compare_csv, series_csv, trajectory_csv, write_text};
use crate::plot::cumulative_plot_svg;
use crate::{CliError, Suite};

/// Draws per randomized verification suite.
const LEMMA1_DRAWS: usize = 10_000;
const GRADIENT_PROBES: usize = 1_000;
const GRADIENT_TOL: f64 = 1e-5;
const WINDOW_TOL: f64 = 1e-10;
/// Window lattice scanned by the theorem suite (plus `w = t` at every round).
const THEOREM_WINDOW_LATTICE: [usize; 3] = [1, 10, 100];
/// The growing-window derivation perturbs by a unit vector, so its
/// interiority precondition is a margin of 1.
const SCENARIO2_MARGIN: f64 = 1.0;

pub struct OutputOptions {
    pub out_dir: PathBuf,
    pub plot: bool,
    pub force: bool,
}

fn core_err(e: CoreError) -> CliError {
    match e {
        CoreError::Numeric { step } => {
            CliError::Numeric(format!("non-finite value produced at step {step}"))
        }
        other => CliError::Config(other.to_string()),
    }
}

fn guard_outputs(paths: &[PathBuf], force: bool) -> Result<(), CliError> {
    if force {
        return Ok(());
    }
    for p in paths {
        if p.exists() {
            return Err(CliError::Config(format!(
                "output file {} already exists; pass --force to overwrite",
                p.display()
            )));
        }
    }
    Ok(())
}

fn run_trajectory(cfg: &ExperimentConfig, built: &BuiltExperiment) -> Result<Trajectory, CliError> {
    run(
        &built.loss,
        &built.set,
        &built.schedule,
        &built.x0,
        cfg.horizon,
    )
    .map_err(core_err)
}

fn meter_series(
    cfg: &ExperimentConfig,
    built: &BuiltExperiment,
    traj: &Trajectory,
    meter: Meter,
    rng: &mut SuiteRng,
) -> Result<RegretSeries, CliError> {
    match meter {
        Meter::ProposedInterior => proposed_regret_interior(traj, &built.window).map_err(core_err),
        Meter::ProposedDirectional => {
            let u = cfg.meter_u.as_ref().ok_or_else(|| {
                CliError::Config(
                    "the proposed_directional meter needs `meter.u` in the config".into(),
                )
            })?;
            let u = Point::from_slice(u).map_err(core_err)?;
            proposed_regret_directional(traj, &built.window, &u).map_err(core_err)
        }
        Meter::Hazan => {
            let w = match built.window {
                WindowSpec::ConstantW { w } => w,
                WindowSpec::Growing => {
                    return Err(CliError::Config(
                        "the hazan meter needs window.kind = constant (it re-evaluates a \
                         fixed number of past losses per round)"
                            .into(),
                    ))
                }
            };
            hazan_local_regret(traj, &built.loss, w).map_err(core_err)
        }
        Meter::Calibration => {
            let radius = cfg.meter_radius.unwrap_or(1.0);
            calibration_gap_series(traj, radius, rng).map_err(core_err)
        }
        Meter::Standard => {
            let grid = cfg.meter_grid.unwrap_or(1001);
            standard_regret_series(traj, &built.loss, grid).map_err(core_err)
        }
    }
}

fn loss_name(cfg: &ExperimentConfig) -> &'static str {
    match cfg.loss {
        LossConfig::DriftingSine { .. } => "drifting_sine",
        LossConfig::SwitchingQuadratic { .. } => "switching_quadratic",
    }
}

fn set_name(cfg: &ExperimentConfig) -> &'static str {
    match cfg.set {
        SetConfig::AllSpace { .. } => "all_space",
        SetConfig::Ball { .. } => "ball",
        SetConfig::Box { .. } => "box",
    }
}

fn window_name(window: &WindowSpec) -> String {
    match window {
        WindowSpec::ConstantW { w } => format!("constant({w})"),
        WindowSpec::Growing => "growing".into(),
    }
}

fn summary_text(
    cfg: &ExperimentConfig,
    built: &BuiltExperiment,
    traj: &Trajectory,
    constants: &BoundConstants,
    series: &[(Meter, RegretSeries)],
    rng: &mut SuiteRng,
) -> Result<String, CliError> {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(out, "run_id: {}", cfg.run_id);
    let _ = writeln!(out, "horizon: {}", cfg.horizon);
    let _ = writeln!(out, "dim: {}", cfg.dim());
    let _ = writeln!(out, "seed: {}", cfg.seed);
    let _ = writeln!(out, "loss: {}", loss_name(cfg));
    let _ = writeln!(out, "nonconvex: {}", built.loss.is_nonconvex());
    let _ = writeln!(out, "set: {}", set_name(cfg));
    let _ = writeln!(
        out,
        "schedule: {}",
        match cfg.schedule_kind {
            ScheduleKind::Constant => "constant",
            ScheduleKind::InverseSqrt => "inverse_sqrt",
        }
    );
    let _ = writeln!(out, "eta: {}", cfg.eta);
    let _ = writeln!(out, "window: {}", window_name(&built.window));
    if let Some(s) = cfg.scenario {
        let _ = writeln!(out, "scenario: {s}");
    }
    let _ = writeln!(out, "M: {}", constants.m);
    let _ = writeln!(out, "M_source: {}", constants.m_source.name());
    let _ = writeln!(out, "G: {}", constants.g);
    let _ = writeln!(out, "G_source: {}", constants.g_source.name());
    let names: Vec<&str> = series.iter().map(|(m, _)| m.name()).collect();
    let _ = writeln!(out, "meters: {}", names.join(", "));

    for (meter, s) in series {
        let _ = writeln!(out, "{}.total: {}", meter.name(), s.total());
    }

    // growth diagnostics for the headline gradient-based series
    if let Some((meter, s)) = series.iter().find(|(m, _)| {
        matches!(
            m,
            Meter::ProposedInterior | Meter::ProposedDirectional | Meter::Hazan
        )
    }) {
        let tail_start = (cfg.horizon / 5).max(1);
        match growth_exponent(s, tail_start) {
            Ok(fit) => {
                let _ = writeln!(out, "fit_meter: {}", meter.name());
                let _ = writeln!(out, "fit_tail_start: {tail_start}");
                let _ = writeln!(out, "growth_exponent: {}", fit.exponent);
                let _ = writeln!(out, "growth_r2: {}", fit.r_squared);
                if let (Ok(log_r2), Ok(lin_r2)) = (
                    log_fit_quality(s, tail_start),
                    linear_fit_quality(s, tail_start),
                ) {
                    let _ = writeln!(out, "log_fit_r2: {log_r2}");
                    let _ = writeln!(out, "linear_fit_r2: {lin_r2}");
                }
            }
            Err(e) => {
                let _ = writeln!(out, "fit_meter: {}", meter.name());
                let _ = writeln!(out, "growth_fit: unavailable ({e})");
            }
        }
    }

    if series.iter().any(|(m, _)| *m == Meter::Calibration) {
        let radius = cfg.meter_radius.unwrap_or(1.0);
        let gap = calibration_gap(traj, radius, rng).map_err(core_err)?;
        let _ = writeln!(out, "calibration.radius: {radius}");
        let _ = writeln!(out, "calibration.gap: {}", gap.gap);
        let _ = writeln!(out, "calibration.lower_estimate: {}", gap.lower_estimate);
    }
    if series.iter().any(|(m, _)| *m == Meter::Standard) {
        let grid = cfg.meter_grid.unwrap_or(1001);
        let sr = standard_regret(traj, &built.loss, grid).map_err(core_err)?;
        let _ = writeln!(out, "standard.regret: {}", sr.regret);
        let _ = writeln!(out, "standard.hindsight_minimum: {}", sr.hindsight_minimum);
        let _ = writeln!(out, "standard.grid: {}", sr.grid);
        let _ = writeln!(out, "standard.resolution: {}", sr.resolution);
    }
    Ok(out)
}

pub fn cmd_run(cfg: &ExperimentConfig, opts: &OutputOptions) -> Result<(), CliError> {
    let built = cfg.build().map_err(CliError::Config)?;
    let out = &opts.out_dir;

    let mut planned = vec![
        out.join(format!("{}.trajectory.csv", cfg.run_id)),
        out.join(format!("{}.summary", cfg.run_id)),
    ];
    for meter in &cfg.meters {
        planned.push(out.join(format!("{}.{}.csv", cfg.run_id, meter.name())));
    }
    if opts.plot {
        planned.push(out.join(format!("{}.plot.svg", cfg.run_id)));
    }
    guard_outputs(&planned, opts.force)?;

    let traj = run_trajectory(cfg, &built)?;
    let mut rng = seeded_rng(cfg.seed);
    let constants =
        estimate_constants(&traj, &built.loss, cfg.horizon, &mut rng).map_err(core_err)?;

    let mut series = Vec::new();
    for meter in &cfg.meters {
        series.push((*meter, meter_series(cfg, &built, &traj, *meter, &mut rng)?));
    }

    write_text(&planned[0], &trajectory_csv(&traj))?;
    for ((_, s), path) in series.iter().zip(planned.iter().skip(2)) {
        write_text(path, &series_csv(s))?;
    }
    let summary = summary_text(cfg, &built, &traj, &constants, &series, &mut rng)?;
    write_text(&planned[1], &summary)?;
    if opts.plot {
        let curves: Vec<(String, &[f64])> = series
            .iter()
            .map(|(m, s)| (m.name().to_string(), s.cumulative()))
            .collect();
        let svg = cumulative_plot_svg(&format!("{} cumulative regret", cfg.run_id), &curves);
        write_text(planned.last().unwrap(), &svg)?;
    }
    for p in &planned {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn scenario_rows(
    scenario: u8,
    cfg: &ExperimentConfig,
    built: &BuiltExperiment,
    traj: &Trajectory,
    constants: &BoundConstants,
) -> Result<Vec<CheckRow>, CliError> {
    if scenario == 2 {
        for record in traj.steps() {
            if !traj.set().is_interior(&record.x, SCENARIO2_MARGIN) {
                return Err(CliError::Config(format!(
                    "scenario 2 assumes every iterate is interior by the unit \
                     perturbation scale (margin {SCENARIO2_MARGIN}); step {} is not",
                    record.t
                )));
            }
        }
    }
    let series = proposed_regret_interior(traj, &built.window).map_err(core_err)?;
    let mut bounds = Vec::with_capacity(cfg.horizon);
    for t in 1..=cfg.horizon {
        let b = match scenario {
            1 => scenario1_bound(constants, traj.schedule(), &built.window, t),
            2 => scenario2_bound(constants, traj.schedule(), &built.window, t),
            3 => scenario3_bound(constants, traj.schedule(), &built.window, t),
            _ => unreachable!("scenario is 1..=3"),
        }
        .map_err(core_err)?;
        bounds.push(b);
    }
    let report = bound_report(&series, &bounds).map_err(core_err)?;
    let tail_start = (cfg.horizon / 5).max(1);
    if let Ok(fit) = growth_exponent(&series, tail_start) {
        println!(
            "growth: exponent={} r2={} tail_start={tail_start} pass={}",
            fit.exponent, fit.r_squared, report.pass
        );
    }
    Ok(report
        .rows
        .iter()
        .map(|r| CheckRow {
            t: r.t,
            w: built.window.width_at(r.t),
            empirical: r.cumulative,
            bound: r.bound,
            ratio: r.ratio,
            pass: r.ratio <= 1.0 + localregret_core::analysis::BOUND_REPORT_TOL,
        })
        .collect())
}

fn gradient_rows(
    cfg: &ExperimentConfig,
    built: &BuiltExperiment,
    rng: &mut SuiteRng,
) -> Result<Vec<CheckRow>, CliError> {
    let mut rows = Vec::with_capacity(GRADIENT_PROBES);
    for _ in 0..GRADIENT_PROBES {
        let t = random_time(cfg.horizon, rng);
        let x = sample_probe_point(&built.set, rng)?;
        let grad = built.loss.loss_gradient(t, &x).map_err(core_err)?;
        let fd = built
            .loss
            .finite_difference_gradient(t, &x, 1e-5)
            .map_err(core_err)?;
        let err = grad.sub(&fd).inf_norm() / (1.0 + grad.inf_norm());
        rows.push(CheckRow {
            t,
            w: 0,
            empirical: err,
            bound: GRADIENT_TOL,
            ratio: err / GRADIENT_TOL,
            pass: err <= GRADIENT_TOL,
        });
    }
    Ok(rows)
}

fn sample_probe_point(set: &FeasibleSet, rng: &mut SuiteRng) -> Result<Point, CliError> {
    match set {
        FeasibleSet::AllSpace { dim } => Ok(standard_normal_point(*dim, rng).scale(2.0)),
        _ => uniform_in_set(set, rng).map_err(core_err),
    }
}

pub fn cmd_verify(
    cfg: &ExperimentConfig,
    suite: Suite,
    opts: &OutputOptions,
) -> Result<(), CliError> {
    let built = cfg.build().map_err(CliError::Config)?;
    let path = opts
        .out_dir
        .join(format!("{}.verify.{}.csv", cfg.run_id, suite.name()));
    guard_outputs(std::slice::from_ref(&path), opts.force)?;

    let mut rng = seeded_rng(cfg.seed);
    let rows = match suite {
        Suite::Gradients => gradient_rows(cfg, &built, &mut rng)?,
        Suite::Lemma1
        | Suite::Theorem1
        | Suite::Scenario1
        | Suite::Scenario2
        | Suite::Scenario3
        | Suite::Windows => {
            let traj = run_trajectory(cfg, &built)?;
            let constants =
                estimate_constants(&traj, &built.loss, cfg.horizon, &mut rng).map_err(core_err)?;
            match suite {
                Suite::Lemma1 => {
                    lemma1_scan(&traj, &constants, LEMMA1_DRAWS, &mut rng).map_err(core_err)?
                }
                Suite::Theorem1 => {
                    theorem1_scan(&traj, &constants, &THEOREM_WINDOW_LATTICE).map_err(core_err)?
                }
                Suite::Scenario1 => scenario_rows(1, cfg, &built, &traj, &constants)?,
                Suite::Scenario2 => scenario_rows(2, cfg, &built, &traj, &constants)?,
                Suite::Scenario3 => scenario_rows(3, cfg, &built, &traj, &constants)?,
                Suite::Windows => {
                    let scan = localregret_core::regret::window_consistency_scan(
                        &traj,
                        &built.window,
                        WINDOW_TOL,
                    )
                    .map_err(core_err)?;
                    scan.iter()
                        .map(|r| CheckRow {
                            t: r.t,
                            w: r.w,
                            empirical: r.relative_error,
                            bound: r.tolerance,
                            ratio: r.relative_error / r.tolerance,
                            pass: r.pass,
                        })
                        .collect()
                }
                Suite::Gradients => unreachable!("handled above"),
            }
        }
    };

    write_text(&path, &check_rows_csv(&rows))?;
    println!("wrote {}", path.display());
    let failed = rows.iter().filter(|r| !r.pass).count();
    if failed == 0 {
        println!("verify {}: PASS ({} checks)", suite.name(), rows.len());
        Ok(())
    } else {
        let first = rows.iter().find(|r| !r.pass).expect("failed > 0");
        Err(CliError::ChecksFailed(format!(
            "verify {}: FAIL ({failed} of {} checks; first at t={}, w={})",
            suite.name(),
            rows.len(),
            first.t,
            first.w
        )))
    }
}

pub fn cmd_compare(
    cfg_a: &ExperimentConfig,
    cfg_b: &ExperimentConfig,
    opts: &OutputOptions,
) -> Result<(), CliError> {
    if !cfg_a.same_loss_family(cfg_b) {
        return Err(CliError::Config(
            "compare requires both configs to share the loss family (identical loss.* keys)".into(),
        ));
    }
    if cfg_a.horizon != cfg_b.horizon {
        return Err(CliError::Config(format!(
            "compare requires matching horizons, got {} and {}",
            cfg_a.horizon, cfg_b.horizon
        )));
    }
    let built_a = cfg_a.build().map_err(CliError::Config)?;
    let built_b = cfg_b.build().map_err(CliError::Config)?;
    let hazan_w = match built_b.window {
        WindowSpec::ConstantW { w } => w,
        WindowSpec::Growing => {
            return Err(CliError::Config(
                "compare evaluates the hazan meter with the second config's window; \
                 set window.kind = constant there"
                    .into(),
            ))
        }
    };

    let csv_path = opts.out_dir.join(format!("{}.compare.csv", cfg_a.run_id));
    let mut planned = vec![csv_path.clone()];
    if opts.plot {
        planned.push(opts.out_dir.join(format!("{}.compare.svg", cfg_a.run_id)));
    }
    guard_outputs(&planned, opts.force)?;

    // one trajectory, both meters
    let traj = run_trajectory(cfg_a, &built_a)?;
    let proposed = proposed_regret_interior(&traj, &built_a.window).map_err(core_err)?;
    let hazan = hazan_local_regret(&traj, &built_a.loss, hazan_w).map_err(core_err)?;

    write_text(&csv_path, &compare_csv(&hazan, &proposed))?;
    if opts.plot {
        let curves = vec![
            (format!("hazan (w={hazan_w})"), hazan.cumulative()),
            (
                format!("proposed ({})", window_name(&built_a.window)),
                proposed.cumulative(),
            ),
        ];
        let svg = cumulative_plot_svg(&format!("{} hazan vs proposed", cfg_a.run_id), &curves);
        write_text(&planned[1], &svg)?;
    }
    for p in &planned {
        println!("wrote {}", p.display());
    }
    println!(
        "totals: hazan={} proposed={}",
        hazan.total(),
        proposed.total()
    );
    Ok(())
}
