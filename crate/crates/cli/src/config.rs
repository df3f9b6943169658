//! Experiment configs: a flat `key = value` text format with dotted keys.
//!
//! Grammar: one `key = value` pair per line; `#` starts a comment; blank
//! lines are ignored. Vectors are comma-separated reals (`x0 = 1.0, -0.5`);
//! lists of vectors are semicolon-separated (`loss.centers = 0,0 ; 1,1`).
//! Parsing is strict: unknown or duplicate keys are errors, and every
//! diagnostic names the offending line or key.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use localregret_core::losses::LossSpec;
use localregret_core::optimizer::LearningRateSchedule;
use localregret_core::regret::{Meter, WindowSpec};
use localregret_core::{FeasibleSet, Point};

#[derive(Debug, Clone, PartialEq)]
pub enum LossConfig {
    DriftingSine {
        a: f64,
        b: f64,
        drift: Vec<f64>,
        c0: Vec<f64>,
    },
    SwitchingQuadratic {
        centers: Vec<Vec<f64>>,
        period: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum SetConfig {
    AllSpace { dim: usize },
    Ball { center: Vec<f64>, radius: f64 },
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleKind {
    Constant,
    InverseSqrt,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindowConfig {
    Constant { w: usize },
    Growing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub run_id: String,
    pub loss: LossConfig,
    pub set: SetConfig,
    pub schedule_kind: ScheduleKind,
    pub eta: f64,
    pub window: WindowConfig,
    pub horizon: usize,
    pub x0: Vec<f64>,
    pub seed: u64,
    pub meters: Vec<Meter>,
    pub scenario: Option<u8>,
    pub meter_u: Option<Vec<f64>>,
    pub meter_radius: Option<f64>,
    pub meter_grid: Option<usize>,
}

/// Core objects assembled from a validated config.
pub struct BuiltExperiment {
    pub loss: LossSpec,
    pub set: FeasibleSet,
    pub schedule: LearningRateSchedule,
    pub window: WindowSpec,
    pub x0: Point,
}

fn parse_f64(key: &str, line: usize, raw: &str) -> Result<f64, String> {
    raw.trim()
        .parse::<f64>()
        .map_err(|_| format!("line {line}: key `{key}`: expected a real number, got `{raw}`"))
}

fn parse_usize(key: &str, line: usize, raw: &str) -> Result<usize, String> {
    raw.trim().parse::<usize>().map_err(|_| {
        format!("line {line}: key `{key}`: expected a nonnegative integer, got `{raw}`")
    })
}

fn parse_u64(key: &str, line: usize, raw: &str) -> Result<u64, String> {
    raw.trim()
        .parse::<u64>()
        .map_err(|_| format!("line {line}: key `{key}`: expected an unsigned integer, got `{raw}`"))
}

fn parse_vector(key: &str, line: usize, raw: &str) -> Result<Vec<f64>, String> {
    let coords: Result<Vec<f64>, String> = raw
        .split(',')
        .map(|part| parse_f64(key, line, part))
        .collect();
    let coords = coords?;
    if coords.is_empty() {
        return Err(format!("line {line}: key `{key}`: empty vector"));
    }
    Ok(coords)
}

fn parse_vector_list(key: &str, line: usize, raw: &str) -> Result<Vec<Vec<f64>>, String> {
    raw.split(';')
        .map(|part| parse_vector(key, line, part))
        .collect()
}

fn parse_meter(raw: &str, line: usize) -> Result<Meter, String> {
    match raw.trim() {
        "proposed_interior" => Ok(Meter::ProposedInterior),
        "proposed_directional" => Ok(Meter::ProposedDirectional),
        "hazan" => Ok(Meter::Hazan),
        "calibration" => Ok(Meter::Calibration),
        "standard" => Ok(Meter::Standard),
        other => Err(format!(
            "line {line}: key `meters`: unknown meter `{other}` (expected \
             proposed_interior, proposed_directional, hazan, calibration, standard)"
        )),
    }
}

struct RawConfig {
    entries: BTreeMap<String, (usize, String)>,
}

impl RawConfig {
    fn parse(text: &str) -> Result<Self, String> {
        let mut entries = BTreeMap::new();
        for (idx, full_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match full_line.find('#') {
                Some(pos) => &full_line[..pos],
                None => full_line,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let Some(eq) = line.find('=') else {
                return Err(format!(
                    "line {line_no}: expected `key = value`, got `{full_line}`"
                ));
            };
            let key = line[..eq].trim().to_string();
            let value = line[eq + 1..].trim().to_string();
            if key.is_empty() {
                return Err(format!("line {line_no}: missing key before `=`"));
            }
            if value.is_empty() {
                return Err(format!("line {line_no}: key `{key}`: missing value"));
            }
            if entries.insert(key.clone(), (line_no, value)).is_some() {
                return Err(format!("line {line_no}: duplicate key `{key}`"));
            }
        }
        Ok(Self { entries })
    }

    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    fn require(&mut self, key: &str) -> Result<(usize, String), String> {
        self.take(key)
            .ok_or_else(|| format!("missing required key `{key}`"))
    }

    fn finish(self) -> Result<(), String> {
        if let Some((key, (line, _))) = self.entries.into_iter().next() {
            return Err(format!("line {line}: unknown key `{key}`"));
        }
        Ok(())
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut raw = RawConfig::parse(text)?;

        let (line, run_id) = raw.require("run_id")?;
        if run_id.is_empty()
            || !run_id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        {
            return Err(format!(
                "line {line}: key `run_id`: use only letters, digits, `-`, `_`, `.`"
            ));
        }

        let (line, horizon_raw) = raw.require("horizon")?;
        let horizon = parse_usize("horizon", line, &horizon_raw)?;
        if horizon < 1 {
            return Err(format!("line {line}: key `horizon`: must be at least 1"));
        }

        let (line, x0_raw) = raw.require("x0")?;
        let x0 = parse_vector("x0", line, &x0_raw)?;

        let seed = match raw.take("seed") {
            Some((line, v)) => parse_u64("seed", line, &v)?,
            None => 0,
        };

        let meters = match raw.take("meters") {
            Some((line, v)) => {
                let mut meters = Vec::new();
                for part in v.split(',') {
                    let part = part.trim();
                    if part.is_empty() {
                        continue;
                    }
                    let meter = parse_meter(part, line)?;
                    if meters.contains(&meter) {
                        return Err(format!(
                            "line {line}: key `meters`: duplicate meter `{part}`"
                        ));
                    }
                    meters.push(meter);
                }
                meters
            }
            None => Vec::new(),
        };

        let scenario = match raw.take("scenario") {
            Some((line, v)) => {
                let s = parse_usize("scenario", line, &v)?;
                if !(1..=3).contains(&s) {
                    return Err(format!("line {line}: key `scenario`: must be 1, 2, or 3"));
                }
                Some(s as u8)
            }
            None => None,
        };

        let loss = Self::parse_loss(&mut raw)?;
        let set = Self::parse_set(&mut raw, x0.len())?;

        let (line, eta_raw) = raw.require("schedule.eta")?;
        let eta = parse_f64("schedule.eta", line, &eta_raw)?;
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(format!(
                "line {line}: key `schedule.eta`: must be positive and finite"
            ));
        }

        let schedule_kind = match raw.take("schedule.kind") {
            Some((line, v)) => Some(match v.as_str() {
                "constant" => ScheduleKind::Constant,
                "inverse_sqrt" => ScheduleKind::InverseSqrt,
                other => {
                    return Err(format!(
                        "line {line}: key `schedule.kind`: expected constant or \
                         inverse_sqrt, got `{other}`"
                    ))
                }
            }),
            None => None,
        };

        let window_kind = match raw.take("window.kind") {
            Some((line, v)) => Some(match v.as_str() {
                "constant" => "constant",
                "growing" => "growing",
                other => {
                    return Err(format!(
                        "line {line}: key `window.kind`: expected constant or growing, \
                         got `{other}`"
                    ))
                }
            }),
            None => None,
        };
        let window_w = match raw.take("window.w") {
            Some((line, v)) => {
                let w = parse_usize("window.w", line, &v)?;
                if w < 1 {
                    return Err(format!("line {line}: key `window.w`: must be at least 1"));
                }
                Some(w)
            }
            None => None,
        };

        let meter_u = match raw.take("meter.u") {
            Some((line, v)) => Some(parse_vector("meter.u", line, &v)?),
            None => None,
        };
        let meter_radius = match raw.take("meter.radius") {
            Some((line, v)) => {
                let r = parse_f64("meter.radius", line, &v)?;
                if !(r > 0.0 && r.is_finite()) {
                    return Err(format!(
                        "line {line}: key `meter.radius`: must be positive and finite"
                    ));
                }
                Some(r)
            }
            None => None,
        };
        let meter_grid = match raw.take("meter.grid") {
            Some((line, v)) => {
                let g = parse_usize("meter.grid", line, &v)?;
                if g < 2 {
                    return Err(format!(
                        "line {line}: key `meter.grid`: need at least 2 points per axis"
                    ));
                }
                Some(g)
            }
            None => None,
        };

        raw.finish()?;

        // scenario forcing: a declared scenario fixes the (schedule, window,
        // set) combination and rejects contradictory fields
        let (schedule_kind, window) = match scenario {
            Some(1) => {
                let sk = Self::force_schedule(1, schedule_kind, ScheduleKind::Constant)?;
                let w = Self::force_constant_window(1, window_kind, window_w)?;
                if !matches!(set, SetConfig::AllSpace { .. }) {
                    return Err(
                        "scenario 1 requires set.kind = all_space (the constant-rate \
                         derivation runs unprojected)"
                            .into(),
                    );
                }
                (sk, w)
            }
            Some(2) => {
                let sk = Self::force_schedule(2, schedule_kind, ScheduleKind::InverseSqrt)?;
                match window_kind {
                    Some("constant") => {
                        return Err("scenario 2 requires window.kind = growing (w = t)".into())
                    }
                    _ => {
                        if window_w.is_some() {
                            return Err(
                                "scenario 2 uses the growing window; `window.w` contradicts it"
                                    .into(),
                            );
                        }
                    }
                }
                (sk, WindowConfig::Growing)
            }
            Some(3) => {
                let sk = Self::force_schedule(3, schedule_kind, ScheduleKind::InverseSqrt)?;
                let w = Self::force_constant_window(3, window_kind, window_w)?;
                (sk, w)
            }
            _ => {
                let sk = schedule_kind.ok_or("missing required key `schedule.kind`")?;
                let window = match window_kind {
                    Some("growing") => {
                        if window_w.is_some() {
                            return Err(
                                "`window.w` is only meaningful with window.kind = constant".into(),
                            );
                        }
                        WindowConfig::Growing
                    }
                    Some("constant") => WindowConfig::Constant {
                        w: window_w.ok_or("window.kind = constant needs `window.w`")?,
                    },
                    Some(_) => unreachable!("validated above"),
                    None => return Err("missing required key `window.kind`".into()),
                };
                (sk, window)
            }
        };

        let config = Self {
            run_id,
            loss,
            set,
            schedule_kind,
            eta,
            window,
            horizon,
            x0,
            seed,
            meters,
            scenario,
            meter_u,
            meter_radius,
            meter_grid,
        };
        config.check_dimensions()?;
        Ok(config)
    }

    fn force_schedule(
        scenario: u8,
        declared: Option<ScheduleKind>,
        required: ScheduleKind,
    ) -> Result<ScheduleKind, String> {
        match declared {
            Some(kind) if kind != required => Err(format!(
                "scenario {scenario} requires schedule.kind = {} ({}); the config says otherwise",
                match required {
                    ScheduleKind::Constant => "constant",
                    ScheduleKind::InverseSqrt => "inverse_sqrt",
                },
                match required {
                    ScheduleKind::Constant => "eta_t = eta",
                    ScheduleKind::InverseSqrt => "eta_t = eta/sqrt(t)",
                },
            )),
            _ => Ok(required),
        }
    }

    fn force_constant_window(
        scenario: u8,
        kind: Option<&str>,
        w: Option<usize>,
    ) -> Result<WindowConfig, String> {
        if kind == Some("growing") {
            return Err(format!(
                "scenario {scenario} requires window.kind = constant; the config says growing"
            ));
        }
        Ok(WindowConfig::Constant {
            w: w.ok_or(format!("scenario {scenario} needs `window.w`"))?,
        })
    }

    fn parse_loss(raw: &mut RawConfig) -> Result<LossConfig, String> {
        let (line, kind) = raw.require("loss.kind")?;
        match kind.as_str() {
            "drifting_sine" => {
                let (l, v) = raw.require("loss.a")?;
                let a = parse_f64("loss.a", l, &v)?;
                let (l, v) = raw.require("loss.b")?;
                let b = parse_f64("loss.b", l, &v)?;
                let (l, v) = raw.require("loss.c0")?;
                let c0 = parse_vector("loss.c0", l, &v)?;
                let drift = match raw.take("loss.drift") {
                    Some((l, v)) => parse_vector("loss.drift", l, &v)?,
                    None => vec![0.0; c0.len()],
                };
                Ok(LossConfig::DriftingSine { a, b, drift, c0 })
            }
            "switching_quadratic" => {
                let (l, v) = raw.require("loss.centers")?;
                let centers = parse_vector_list("loss.centers", l, &v)?;
                let period = match raw.take("loss.period") {
                    Some((l, v)) => parse_usize("loss.period", l, &v)?,
                    None => 1,
                };
                if period < 1 {
                    return Err("key `loss.period`: must be at least 1".into());
                }
                Ok(LossConfig::SwitchingQuadratic { centers, period })
            }
            other => Err(format!(
                "line {line}: key `loss.kind`: expected drifting_sine or \
                 switching_quadratic, got `{other}`"
            )),
        }
    }

    fn parse_set(raw: &mut RawConfig, default_dim: usize) -> Result<SetConfig, String> {
        let (line, kind) = raw.require("set.kind")?;
        match kind.as_str() {
            "all_space" => {
                let dim = match raw.take("set.dim") {
                    Some((l, v)) => parse_usize("set.dim", l, &v)?,
                    None => default_dim,
                };
                if dim < 1 {
                    return Err("key `set.dim`: must be at least 1".into());
                }
                Ok(SetConfig::AllSpace { dim })
            }
            "ball" => {
                let (l, v) = raw.require("set.center")?;
                let center = parse_vector("set.center", l, &v)?;
                let (l, v) = raw.require("set.radius")?;
                let radius = parse_f64("set.radius", l, &v)?;
                if !(radius > 0.0 && radius.is_finite()) {
                    return Err(format!(
                        "line {l}: key `set.radius`: must be positive and finite"
                    ));
                }
                Ok(SetConfig::Ball { center, radius })
            }
            "box" => {
                let (l, v) = raw.require("set.lower")?;
                let lower = parse_vector("set.lower", l, &v)?;
                let (l, v) = raw.require("set.upper")?;
                let upper = parse_vector("set.upper", l, &v)?;
                Ok(SetConfig::Box { lower, upper })
            }
            other => Err(format!(
                "line {line}: key `set.kind`: expected all_space, ball, or box, \
                 got `{other}`"
            )),
        }
    }

    pub fn dim(&self) -> usize {
        match &self.set {
            SetConfig::AllSpace { dim } => *dim,
            SetConfig::Ball { center, .. } => center.len(),
            SetConfig::Box { lower, .. } => lower.len(),
        }
    }

    fn check_dimensions(&self) -> Result<(), String> {
        let dim = self.dim();
        if self.x0.len() != dim {
            return Err(format!(
                "key `x0`: dimension {} does not match the set's dimension {dim}",
                self.x0.len()
            ));
        }
        let loss_dim = match &self.loss {
            LossConfig::DriftingSine { drift, c0, .. } => {
                if drift.len() != c0.len() {
                    return Err("key `loss.drift`: dimension differs from `loss.c0`".into());
                }
                c0.len()
            }
            LossConfig::SwitchingQuadratic { centers, .. } => {
                let d = centers.first().map(|c| c.len()).unwrap_or(0);
                if centers.iter().any(|c| c.len() != d) {
                    return Err("key `loss.centers`: centers differ in dimension".into());
                }
                d
            }
        };
        if loss_dim != dim {
            return Err(format!(
                "loss dimension {loss_dim} does not match the set's dimension {dim}"
            ));
        }
        if let Some(u) = &self.meter_u {
            if u.len() != dim {
                return Err(format!(
                    "key `meter.u`: dimension {} does not match the set's dimension {dim}",
                    u.len()
                ));
            }
        }
        Ok(())
    }

    /// Canonical text form; parsing it back yields an equal config.
    #[allow(dead_code)]
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "run_id = {}", self.run_id);
        let _ = writeln!(out, "horizon = {}", self.horizon);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "x0 = {}", join(&self.x0));
        if !self.meters.is_empty() {
            let names: Vec<&str> = self.meters.iter().map(|m| m.name()).collect();
            let _ = writeln!(out, "meters = {}", names.join(", "));
        }
        if let Some(s) = self.scenario {
            let _ = writeln!(out, "scenario = {s}");
        }
        match &self.loss {
            LossConfig::DriftingSine { a, b, drift, c0 } => {
                let _ = writeln!(out, "loss.kind = drifting_sine");
                let _ = writeln!(out, "loss.a = {a}");
                let _ = writeln!(out, "loss.b = {b}");
                let _ = writeln!(out, "loss.drift = {}", join(drift));
                let _ = writeln!(out, "loss.c0 = {}", join(c0));
            }
            LossConfig::SwitchingQuadratic { centers, period } => {
                let _ = writeln!(out, "loss.kind = switching_quadratic");
                let rendered: Vec<String> = centers.iter().map(|c| join(c)).collect();
                let _ = writeln!(out, "loss.centers = {}", rendered.join(" ; "));
                let _ = writeln!(out, "loss.period = {period}");
            }
        }
        match &self.set {
            SetConfig::AllSpace { dim } => {
                let _ = writeln!(out, "set.kind = all_space");
                let _ = writeln!(out, "set.dim = {dim}");
            }
            SetConfig::Ball { center, radius } => {
                let _ = writeln!(out, "set.kind = ball");
                let _ = writeln!(out, "set.center = {}", join(center));
                let _ = writeln!(out, "set.radius = {radius}");
            }
            SetConfig::Box { lower, upper } => {
                let _ = writeln!(out, "set.kind = box");
                let _ = writeln!(out, "set.lower = {}", join(lower));
                let _ = writeln!(out, "set.upper = {}", join(upper));
            }
        }
        let _ = writeln!(
            out,
            "schedule.kind = {}",
            match self.schedule_kind {
                ScheduleKind::Constant => "constant",
                ScheduleKind::InverseSqrt => "inverse_sqrt",
            }
        );
        let _ = writeln!(out, "schedule.eta = {}", self.eta);
        match self.window {
            WindowConfig::Constant { w } => {
                let _ = writeln!(out, "window.kind = constant");
                let _ = writeln!(out, "window.w = {w}");
            }
            WindowConfig::Growing => {
                let _ = writeln!(out, "window.kind = growing");
            }
        }
        if let Some(u) = &self.meter_u {
            let _ = writeln!(out, "meter.u = {}", join(u));
        }
        if let Some(r) = self.meter_radius {
            let _ = writeln!(out, "meter.radius = {r}");
        }
        if let Some(g) = self.meter_grid {
            let _ = writeln!(out, "meter.grid = {g}");
        }
        out
    }

    /// Assembles the core objects, surfacing any residual validation error
    /// as a config diagnostic.
    pub fn build(&self) -> Result<BuiltExperiment, String> {
        let into_msg = |e: localregret_core::Error| e.to_string();
        let point = |coords: &[f64]| Point::from_slice(coords).map_err(into_msg);
        let loss = match &self.loss {
            LossConfig::DriftingSine { a, b, drift, c0 } => {
                LossSpec::drifting_sine(*a, *b, point(drift)?, point(c0)?).map_err(into_msg)?
            }
            LossConfig::SwitchingQuadratic { centers, period } => {
                let centers: Result<Vec<Point>, String> =
                    centers.iter().map(|c| point(c)).collect();
                LossSpec::switching_quadratic(centers?, *period).map_err(into_msg)?
            }
        };
        let set = match &self.set {
            SetConfig::AllSpace { dim } => FeasibleSet::all_space(*dim).map_err(into_msg)?,
            SetConfig::Ball { center, radius } => {
                FeasibleSet::ball(point(center)?, *radius).map_err(into_msg)?
            }
            SetConfig::Box { lower, upper } => {
                FeasibleSet::axis_box(point(lower)?, point(upper)?).map_err(into_msg)?
            }
        };
        let schedule = match self.schedule_kind {
            ScheduleKind::Constant => LearningRateSchedule::constant(self.eta),
            ScheduleKind::InverseSqrt => LearningRateSchedule::inverse_sqrt(self.eta),
        }
        .map_err(into_msg)?;
        let window = match self.window {
            WindowConfig::Constant { w } => WindowSpec::constant(w).map_err(into_msg)?,
            WindowConfig::Growing => WindowSpec::growing(),
        };
        let x0 = point(&self.x0)?;
        Ok(BuiltExperiment {
            loss,
            set,
            schedule,
            window,
            x0,
        })
    }

    /// True when both configs run the same loss family with the same
    /// parameters (the `compare` precondition).
    pub fn same_loss_family(&self, other: &Self) -> bool {
        self.loss == other.loss
    }
}

#[allow(dead_code)]
fn join(coords: &[f64]) -> String {
    coords
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}
