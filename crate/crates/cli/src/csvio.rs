//! CSV writers. All files use `,` as delimiter, `.` as decimal separator,
//! a header row, and LF line endings; floats print in shortest round-trip
//! form so identical runs produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use localregret_core::bounds::CheckRow;
use localregret_core::regret::RegretSeries;
use localregret_core::Trajectory;

use crate::CliError;

pub fn write_text(path: &Path, content: &str) -> Result<(), CliError> {
    fs::write(path, content).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// `t,x_0..x_{d-1},g_0..g_{d-1},eta,loss`
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let d = traj.dim();
    let mut out = String::new();
    out.push('t');
    for i in 0..d {
        let _ = write!(out, ",x_{i}");
    }
    for i in 0..d {
        let _ = write!(out, ",g_{i}");
    }
    out.push_str(",eta,loss\n");
    for s in traj.steps() {
        let _ = write!(out, "{}", s.t);
        for &c in s.x.coords() {
            let _ = write!(out, ",{c}");
        }
        for &c in s.g.coords() {
            let _ = write!(out, ",{c}");
        }
        let _ = writeln!(out, ",{},{}", s.eta, s.loss);
    }
    out
}

/// `t,instantaneous,cumulative`
pub fn series_csv(series: &RegretSeries) -> String {
    let mut out = String::from("t,instantaneous,cumulative\n");
    for (idx, (inst, cum)) in series
        .instantaneous()
        .iter()
        .zip(series.cumulative())
        .enumerate()
    {
        let _ = writeln!(out, "{},{inst},{cum}", idx + 1);
    }
    out
}

/// `t,w,empirical,bound,ratio,pass`
pub fn check_rows_csv(rows: &[CheckRow]) -> String {
    let mut out = String::from("t,w,empirical,bound,ratio,pass\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.t, r.w, r.empirical, r.bound, r.ratio, r.pass
        );
    }
    out
}

/// Side-by-side meter columns for `compare`.
pub fn compare_csv(hazan: &RegretSeries, proposed: &RegretSeries) -> String {
    let mut out = String::from(
        "t,hazan_instantaneous,hazan_cumulative,proposed_instantaneous,proposed_cumulative\n",
    );
    for idx in 0..hazan.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            idx + 1,
            hazan.instantaneous()[idx],
            hazan.cumulative()[idx],
            proposed.instantaneous()[idx],
            proposed.cumulative()[idx],
        );
    }
    out
}
