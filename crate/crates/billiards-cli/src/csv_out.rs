//! CSV emission with full (17 significant digit) precision and
//! deterministic row order.

use billiards::lyapunov::{LyapunovSeries, SweepResult};
use std::fmt::Write as _;

use crate::CliError;

/// 17 significant digits round-trip any f64 exactly.
pub fn full(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(full).unwrap_or_default()
}

pub fn sweep_csv(sweep: &SweepResult) -> String {
    let mut out = String::from("alpha,lambda1,lower,upper,fd_deriv,F_m\n");
    for e in &sweep.entries {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            full(e.alpha),
            opt(e.lambda1),
            opt(e.lower),
            opt(e.upper),
            opt(e.fd_deriv),
            opt(e.f_m)
        );
    }
    out
}

pub fn lyapunov_csv(series: &LyapunovSeries) -> String {
    let mut out = String::from("bounce,obstacle,d_j,cos_phi_j,ell_j,log_factor,partial_lambda1\n");
    for r in &series.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.bounce,
            r.obstacle + 1,
            full(r.d),
            full(r.cos_phi),
            full(r.ell),
            full(r.log_factor),
            full(r.partial)
        );
    }
    out
}

pub fn write_file(path: &str, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::config(format!("cannot write {path}: {e}")))
}
