//! Fixed-point (Picard) iteration with per-iteration diagnostics.

use alloc::boxed::Box;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PicardOptions {
    /// Stop once the increment norm drops to this value.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative tolerance of the inner linear solves.
    pub linear_tol: f64,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 200, linear_tol: 1e-13 }
    }
}

/// History of one Picard run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IterationTrace {
    pub level: usize,
    /// Number of iterates computed, `n_m`.
    pub iterations: usize,
    /// `δ_k = ‖u^(k) - u^(k-1)‖` for `k = 1..=iterations`.
    pub increments: Vec<f64>,
    /// Compatibility defect of the load at every iteration (zero for SPD problems).
    pub defects: Vec<f64>,
    /// Median of `δ_{k+1} / δ_k`.
    pub observed_ratio: Option<f64>,
    pub kappa_p: Option<f64>,
    pub c_p: Option<f64>,
    /// `‖u^(1)‖`.
    pub norm_u1: f64,
    /// `κ_p^n / (1 - κ_p^n) ‖u^(1)‖` for `n = 1..=iterations`.
    pub bounds: Vec<f64>,
    pub converged: bool,
}

impl IterationTrace {
    /// Increments that fail to shrink on average.
    pub fn stagnating(&self) -> bool {
        self.observed_ratio.is_some_and(|r| r >= 1.0)
    }

    /// Attaches `κ_p`, `C_p` and the predicted bound history.
    pub fn with_kappa(mut self, kappa_p: f64, c_p: f64) -> Self {
        self.kappa_p = Some(kappa_p);
        self.c_p = Some(c_p);
        self.bounds = (1..=self.iterations).map(|n| contraction_bound(kappa_p, n, self.norm_u1)).collect();
        self
    }
}

/// `κ^n / (1 - κ^n) · ‖u^(1)‖`; infinite when `κ ≥ 1`.
pub fn contraction_bound(kappa_p: f64, n: usize, norm_u1: f64) -> f64 {
    if !(0.0..1.0).contains(&kappa_p) {
        return f64::INFINITY;
    }
    let k = kappa_p.powi(n as i32);
    k / (1.0 - k) * norm_u1
}

pub(crate) fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// Runs `u^(k) = step(u^(k-1))` from `u^(0) = initial` until `norm(u^(k) - u^(k-1)) ≤ tol`.
///
/// `step` returns the new iterate together with the compatibility defect
/// of the load it solved with.
pub fn iterate(
    options: &PicardOptions,
    level: usize,
    initial: Vec<f64>,
    mut step: impl FnMut(&[f64]) -> Result<(Vec<f64>, f64)>,
    norm: impl Fn(&[f64]) -> f64,
) -> Result<(Vec<f64>, IterationTrace)> {
    let mut trace = IterationTrace { level, ..Default::default() };
    let mut u = initial;
    let mut diff = Vec::with_capacity(u.len());
    for k in 1..=options.max_iter {
        let (next, defect) = step(&u)?;
        diff.clear();
        diff.extend(next.iter().zip(&u).map(|(a, b)| a - b));
        let delta = norm(&diff);
        if k == 1 {
            trace.norm_u1 = norm(&next);
        }
        trace.increments.push(delta);
        trace.defects.push(defect);
        trace.iterations = k;
        u = next;
        if delta <= options.tol {
            trace.converged = true;
            break;
        }
    }
    trace.observed_ratio = median(
        trace
            .increments
            .windows(2)
            .filter(|w| w[0] > 0.0)
            .map(|w| w[1] / w[0])
            .collect(),
    );
    if !trace.converged {
        return Err(Error::NoConvPicard { trace: Box::new(trace) });
    }
    Ok((u, trace))
}
