//! Convergence report files.

use std::fmt::Write as _;

use homlab_core::ConvergenceReport;
use serde_json::{json, Value};

use crate::format::float;

pub const CSV_HEADER: &str = "eps,error,eps_pow_theory";

/// One row per sample, sorted by decreasing `ε`.
pub fn report_csv(report: &ConvergenceReport) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for p in &report.samples {
        writeln!(s, "{},{},{}", float(p.eps), float(p.error), float(p.eps.powf(report.theory_order))).unwrap();
    }
    s
}

pub fn summary_json(report: &ConvergenceReport, kappa_p: f64, c_p: f64) -> Value {
    json!({
        "slope": report.slope,
        "theory_order": report.theory_order,
        "constant": report.constant,
        "r2": report.r2,
        "flags": report.flags.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
        "kappa_p": kappa_p,
        "c_p": c_p,
    })
}

pub fn describe(report: &ConvergenceReport) -> String {
    let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
    let flags: Vec<String> = report.flags.iter().map(|f| f.to_string()).collect();
    format!(
        "slope {} (theory {:.2}), C {}, r2 {}, flags [{}]",
        opt(report.slope),
        report.theory_order,
        opt(report.constant),
        opt(report.r2),
        flags.join(", ")
    )
}
