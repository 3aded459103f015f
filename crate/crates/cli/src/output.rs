//! Trajectory CSV and JSON reports.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use wagner_core::ode::Trajectory;

use crate::error::CliError;

pub const CSV_HEADER: &str = "t,u1,u2,phi,Q1,Q2,Q3,K,C1,C2,C3sq";

fn num(out: &mut String, x: f64) {
    // 17 significant digits: exact round trip for doubles.
    write!(out, "{x:.16e}").unwrap();
}

fn opt(out: &mut String, x: Option<f64>) {
    if let Some(x) = x {
        num(out, x);
    }
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let lifted = traj.kind.has_fiber();
    let mut out = String::with_capacity(200 * (traj.samples.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for s in &traj.samples {
        let fiber = |x: f64| lifted.then_some(x);
        let cells = [
            Some(s.t),
            Some(s.y[0]),
            Some(s.y[1]),
            fiber(s.y[2]),
            Some(s.y[3]),
            Some(s.y[4]),
            fiber(s.y[5]),
            Some(s.k),
            s.c1,
            s.c2,
            Some(s.c3sq),
        ];
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            opt(&mut out, *c);
        }
        out.push('\n');
    }
    out
}

/// Rows of numbers under a header, same number format as trajectories.
pub fn table_csv(header: &str, rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    for row in rows {
        for (i, x) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            num(&mut out, *x);
        }
        out.push('\n');
    }
    out
}

/// Writes to `path`, or to stdout when there is none.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => {
            std::fs::write(p, text)
                .map_err(|e| CliError::config(format!("writing {}: {e}", p.display())))?;
            log::info!("wrote {}", p.display());
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

/// `traj.csv` → `traj_C1.csv` for one of several runs.
pub fn suffixed(path: &Path, tag: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{tag}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{tag}"),
    };
    path.with_file_name(name)
}
