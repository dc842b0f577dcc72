//! Y-periodic diffusion coefficients.
//!
//! Coefficients are sampled once per element at the element centroid mapped
//! into the unit cell, so layered and tabulated coefficients aligned with
//! the cell grid are represented exactly.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::QuadMesh;

#[derive(Clone)]
pub enum Coefficient {
    Constant(f64),
    /// `a` for `y₁ < 1/2`, `b` otherwise.
    Layered { a: f64, b: f64 },
    /// One value per element of an `n × n` cell grid, row-major with `y₁` fastest.
    /// Entries inside the hole are ignored.
    Tabulated { n: usize, values: Vec<f64> },
    Function(Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>),
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Constant(c) => write!(f, "Constant({c})"),
            Coefficient::Layered { a, b } => write!(f, "Layered {{ a: {a}, b: {b} }}"),
            Coefficient::Tabulated { n, .. } => write!(f, "Tabulated {{ n: {n} }}"),
            Coefficient::Function(_) => f.write_str("Function(..)"),
        }
    }
}

impl Coefficient {
    /// Value at a cell point `y ∈ [0,1)²`.
    pub fn eval(&self, y: [f64; 2]) -> f64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Layered { a, b } => {
                if y[0] < 0.5 {
                    *a
                } else {
                    *b
                }
            }
            Coefficient::Tabulated { n, values } => {
                let idx = |t: f64| ((t * *n as f64).floor() as usize).min(n - 1);
                values[idx(y[1]) * n + idx(y[0])]
            }
            Coefficient::Function(f) => f(y),
        }
    }
}

/// A coefficient together with its ellipticity bracket `α ≤ d ≤ β`.
#[derive(Clone, Debug)]
pub struct CoefficientSpec {
    pub coefficient: Coefficient,
    pub alpha: f64,
    pub beta: f64,
}

impl CoefficientSpec {
    pub fn new(coefficient: Coefficient, alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite() && beta.is_finite() && alpha <= beta) {
            return Err(Error::InvalidCoefficient(format!(
                "need 0 < alpha <= beta < inf, got alpha = {alpha}, beta = {beta}"
            )));
        }
        if let Coefficient::Tabulated { n, values } = &coefficient {
            if *n == 0 || values.len() != n * n {
                return Err(Error::InvalidCoefficient(format!(
                    "tabulated coefficient needs {} values, got {}",
                    n * n,
                    values.len()
                )));
            }
        }
        Ok(Self { coefficient, alpha, beta })
    }

    /// Takes `α` and `β` as the extreme element values on `mesh`.
    pub fn sampled(coefficient: Coefficient, mesh: &QuadMesh) -> Result<Self> {
        let (lo, hi) = (0..mesh.element_count())
            .map(|e| coefficient.eval(mesh.cell_coordinate(e, [0.0, 0.0])))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), d| (lo.min(d), hi.max(d)));
        Self::new(coefficient, lo, hi)
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(Coefficient::Constant(c), c, c)
    }

    /// Per-element values at the centroids, mapped into the cell.
    pub fn element_values(&self, mesh: &QuadMesh) -> Result<Vec<f64>> {
        (0..mesh.element_count())
            .map(|e| {
                let y = mesh.cell_coordinate(e, [0.0, 0.0]);
                let d = self.coefficient.eval(y);
                let slack = 1e-12 * self.beta;
                if d.is_finite() && d >= self.alpha - slack && d <= self.beta + slack {
                    Ok(d)
                } else {
                    Err(Error::InvalidCoefficient(format!(
                        "d = {d} at y = ({}, {}) leaves [{}, {}]",
                        y[0], y[1], self.alpha, self.beta
                    )))
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_cell_mesh, build_perforated_mesh, CellGeometry};

    #[test]
    fn layered_samples_at_centroids() {
        let cell = build_cell_mesh(CellGeometry::unperforated(8).unwrap());
        let spec = CoefficientSpec::sampled(Coefficient::Layered { a: 1.0, b: 4.0 }, &cell.mesh).unwrap();
        assert_eq!((spec.alpha, spec.beta), (1.0, 4.0));
        let d = spec.element_values(&cell.mesh).unwrap();
        for (e, &[i, _]) in cell.mesh.element_grid.iter().enumerate() {
            assert_eq!(d[e], if i < 4 { 1.0 } else { 4.0 });
        }
    }

    #[test]
    fn micro_sampling_is_periodic() {
        let geom = CellGeometry::new(0.25, 8).unwrap();
        let p = build_perforated_mesh(geom, 3).unwrap();
        let spec = CoefficientSpec::new(Coefficient::Layered { a: 2.0, b: 5.0 }, 2.0, 5.0).unwrap();
        let d = spec.element_values(&p.mesh).unwrap();
        for (e, &[i, _]) in p.mesh.element_grid.iter().enumerate() {
            assert_eq!(d[e], if i % 8 < 4 { 2.0 } else { 5.0 });
        }
    }

    #[test]
    fn bracket_violations_are_rejected() {
        let cell = build_cell_mesh(CellGeometry::unperforated(4).unwrap());
        let spec = CoefficientSpec::new(Coefficient::Layered { a: 0.5, b: 4.0 }, 1.0, 4.0).unwrap();
        assert!(matches!(spec.element_values(&cell.mesh), Err(Error::InvalidCoefficient(_))));
        assert!(CoefficientSpec::new(Coefficient::Constant(1.0), 0.0, 1.0).is_err());
        assert!(CoefficientSpec::new(Coefficient::Tabulated { n: 2, values: alloc::vec![1.0; 3] }, 1.0, 1.0).is_err());
    }

    #[test]
    fn tabulated_lookup() {
        let c = Coefficient::Tabulated { n: 2, values: alloc::vec![1.0, 2.0, 3.0, 4.0] };
        assert_eq!(c.eval([0.1, 0.1]), 1.0);
        assert_eq!(c.eval([0.9, 0.1]), 2.0);
        assert_eq!(c.eval([0.1, 0.9]), 3.0);
        assert_eq!(c.eval([0.99, 0.99]), 4.0);
    }
}
