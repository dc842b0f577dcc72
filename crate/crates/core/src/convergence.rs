//! Least-squares order fits of `log error` against `log ε`.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Errors below this are treated as exact.
pub const DEGENERATE_THRESHOLD: f64 = 1e-12;
/// Slack on the theoretical order.
pub const ORDER_SLACK: f64 = 0.1;
/// Smallest acceptable `R²` of the fit.
pub const MIN_R2: f64 = 0.95;
/// Allowed relative growth of the error between consecutive `ε`.
pub const MONOTONE_SLACK: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceSample {
    pub eps: f64,
    pub error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReportFlag {
    /// `R² < 0.95`.
    PreAsymptotic,
    /// All errors below `1e-12`; no fit.
    Degenerate,
    /// Slope below `(M-1)/2 - 0.1`.
    OrderBelowTheory,
    /// Error grows by more than 5% as `ε` decreases.
    NonMonotone,
}

impl fmt::Display for ReportFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFlag::PreAsymptotic => "PRE-ASYMPTOTIC",
            ReportFlag::Degenerate => "DEGENERATE",
            ReportFlag::OrderBelowTheory => "ORDER-BELOW-THEORY",
            ReportFlag::NonMonotone => "NON-MONOTONE",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    /// Samples sorted by decreasing `ε`.
    pub samples: Vec<ConvergenceSample>,
    /// Least-squares slope; `None` when degenerate.
    pub slope: Option<f64>,
    /// `(M-1)/2`.
    pub theory_order: f64,
    /// `exp(intercept)`, i.e. `C` in `error ≈ C ε^slope`.
    pub constant: Option<f64>,
    pub r2: Option<f64>,
    pub flags: Vec<ReportFlag>,
}

impl ConvergenceReport {
    pub fn has(&self, flag: ReportFlag) -> bool {
        self.flags.contains(&flag)
    }

    /// Slope within the slack of the theoretical order, with a trustworthy fit.
    pub fn order_gate_passed(&self) -> bool {
        match (self.slope, self.r2) {
            (Some(s), Some(r2)) => s >= self.theory_order - ORDER_SLACK && r2 >= MIN_R2,
            _ => false,
        }
    }
}

/// Fits `ln error = ln C + slope · ln ε` over at least three samples.
pub fn fit_convergence_order(samples: &[ConvergenceSample], order: usize) -> Result<ConvergenceReport> {
    if samples.len() < 3 {
        return Err(Error::InvalidInput(format!("an order fit needs at least 3 samples, got {}", samples.len())));
    }
    if order < 1 {
        return Err(Error::InvalidInput("expansion order must be positive".into()));
    }
    let mut samples = samples.to_vec();
    samples.sort_by(|a, b| b.eps.total_cmp(&a.eps));
    for w in samples.windows(2) {
        if !(w[1].eps < w[0].eps) {
            return Err(Error::InvalidInput(format!("eps values must be distinct, {} repeats", w[0].eps)));
        }
    }
    if samples.iter().any(|s| !(s.eps > 0.0 && s.eps.is_finite())) {
        return Err(Error::InvalidInput("eps values must be positive".into()));
    }
    let theory_order = (order as f64 - 1.0) / 2.0;
    let mut flags = Vec::new();
    if samples.iter().all(|s| s.error.abs() < DEGENERATE_THRESHOLD) {
        flags.push(ReportFlag::Degenerate);
        return Ok(ConvergenceReport { samples, slope: None, theory_order, constant: None, r2: None, flags });
    }
    if let Some(s) = samples.iter().find(|s| !(s.error > 0.0 && s.error.is_finite())) {
        return Err(Error::InvalidInput(format!("errors must be positive, got {} at eps = {}", s.error, s.eps)));
    }

    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|s| s.eps.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.error.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };

    if r2 < MIN_R2 {
        flags.push(ReportFlag::PreAsymptotic);
    }
    if slope < theory_order - ORDER_SLACK {
        flags.push(ReportFlag::OrderBelowTheory);
    }
    if samples.windows(2).any(|w| w[1].error > (1.0 + MONOTONE_SLACK) * w[0].error) {
        flags.push(ReportFlag::NonMonotone);
    }
    Ok(ConvergenceReport {
        samples,
        slope: Some(slope),
        theory_order,
        constant: Some(intercept.exp()),
        r2: Some(r2),
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn s(eps: f64, error: f64) -> ConvergenceSample {
        ConvergenceSample { eps, error }
    }

    #[test]
    fn geometric_data_gives_first_order() {
        let r = fit_convergence_order(&[s(0.25, 0.5), s(0.125, 0.25), s(0.0625, 0.125)], 2).unwrap();
        assert!((r.slope.unwrap() - 1.0).abs() < 1e-12);
        assert!((r.constant.unwrap() - 2.0).abs() < 1e-12);
        assert!((r.r2.unwrap() - 1.0).abs() < 1e-12);
        assert!(r.flags.is_empty());
        assert!(r.order_gate_passed());
    }

    #[test]
    fn half_order_recovers_constant() {
        let c = 0.37;
        let data: Vec<_> = [0.25, 0.125, 0.0625].iter().map(|&e: &f64| s(e, c * e.sqrt())).collect();
        let r = fit_convergence_order(&data, 2).unwrap();
        assert!((r.slope.unwrap() - 0.5).abs() < 1e-12);
        assert!((r.constant.unwrap() - c).abs() < 1e-12);
        assert_eq!(r.theory_order, 0.5);
    }

    #[test]
    fn flags() {
        let r = fit_convergence_order(&[s(0.25, 0.0), s(0.125, 1e-13), s(0.0625, 0.0)], 2).unwrap();
        assert_eq!(r.flags, vec![ReportFlag::Degenerate]);
        assert!(!r.order_gate_passed());
        let r = fit_convergence_order(&[s(0.25, 0.1), s(0.125, 0.1), s(0.0625, 0.1)], 3).unwrap();
        assert!(r.has(ReportFlag::OrderBelowTheory));
        let r = fit_convergence_order(&[s(0.25, 0.1), s(0.125, 0.2), s(0.0625, 0.01), s(0.03125, 0.05)], 2).unwrap();
        assert!(r.has(ReportFlag::PreAsymptotic) && r.has(ReportFlag::NonMonotone));
        assert!(!r.order_gate_passed());
    }

    #[test]
    fn input_validation() {
        assert!(fit_convergence_order(&[s(0.25, 0.5), s(0.125, 0.25)], 2).is_err());
        assert!(fit_convergence_order(&[s(0.25, 0.5), s(0.125, -0.25), s(0.0625, 0.1)], 2).is_err());
        assert!(fit_convergence_order(&[s(0.25, 0.5), s(0.25, 0.25), s(0.0625, 0.1)], 2).is_err());
        // order is independent of the sample order
        let a = fit_convergence_order(&[s(0.0625, 0.125), s(0.25, 0.5), s(0.125, 0.25)], 2).unwrap();
        assert_eq!(a.samples[0].eps, 0.25);
    }
}
