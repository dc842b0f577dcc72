//! Jacobi-preconditioned conjugate gradients, gauged pure-Neumann solves and
//! the Poincaré constant of the periodic cell.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::assembly::{assemble_mass, lumped_mass, stiffness_from_values};
use super::constraints::{DofMap, ReducedSystem};
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use crate::geometry::{CellMesh, FaceTag, PeriodicRole, QuadMesh};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_COMPAT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    /// Final relative residual `‖b - Ax‖ / ‖b‖` of the recursively updated residual.
    pub residual: f64,
}

/// Iteration cap `⌈50 √n⌉`.
pub fn iteration_cap(n: usize) -> usize {
    (50.0 * (n as f64).sqrt()).ceil() as usize
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn remove_mean(v: &mut [f64]) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= m);
}

/// Solves `Ax = b` by Jacobi-preconditioned CG, starting from `x`.
///
/// With `singular` set, `A` is taken to be positive semidefinite with the
/// constant vector as its kernel; residuals are kept orthogonal to it.
pub fn pcg(a: &CsrMatrix, b: &[f64], x: &mut [f64], tol: f64, singular: bool) -> Result<CgStats> {
    let n = a.dim();
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgStats { iterations: 0, residual: 0.0 });
    }
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let mut r = vec![0.0; n];
    a.mul_vec_into(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    if singular {
        remove_mean(&mut r);
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    if singular {
        remove_mean(&mut z);
    }
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let cap = iteration_cap(n);
    let mut res = dot(&r, &r).sqrt() / bnorm;
    for it in 0..cap {
        if res <= tol {
            return Ok(CgStats { iterations: it, residual: res });
        }
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if singular {
            remove_mean(&mut r);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        if singular {
            remove_mean(&mut z);
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        res = dot(&r, &r).sqrt() / bnorm;
    }
    if res <= tol {
        return Ok(CgStats { iterations: cap, residual: res });
    }
    Err(Error::NoConv { iterations: cap, residual: res })
}

/// Solves a reduced SPD system and expands the solution to all mesh nodes.
pub fn solve_spd(system: &ReducedSystem, tol: f64) -> Result<Vec<f64>> {
    let mut x = vec![0.0; system.dofs.n_dofs()];
    pcg(&system.matrix, &system.rhs, &mut x, tol, false)?;
    Ok(system.dofs.expand(&x))
}

/// A pure Neumann/periodic system whose solutions are fixed by `∫ u = 0`.
#[derive(Clone, Debug)]
pub struct GaugedSystem {
    pub system: ReducedSystem,
    /// `∫ φ_i` on all mesh nodes.
    pub node_mass: Vec<f64>,
    dof_mass: Vec<f64>,
    area: f64,
    pub tol: f64,
    pub compat_tol: f64,
}

/// Outcome of a gauged solve.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugedSolution {
    /// Nodal values with `∫ u = 0`.
    pub values: Vec<f64>,
    /// `|Σ b_i| / Σ |b_i|` of the load before projection.
    pub defect: f64,
    pub stats: CgStats,
}

impl GaugedSystem {
    pub fn new(system: ReducedSystem, mesh: &QuadMesh, tol: f64, compat_tol: f64) -> Self {
        let node_mass = lumped_mass(mesh);
        let dof_mass = system.dofs.fold(&node_mass);
        let area = node_mass.iter().sum();
        Self { system, node_mass, dof_mass, area, tol, compat_tol }
    }

    /// Periodic cell system for a per-element coefficient.
    pub fn periodic(cell: &CellMesh, d: &[f64], role: PeriodicRole, tol: f64, compat_tol: f64) -> Self {
        let map = DofMap::periodic(cell, role);
        let (matrix, lifting) = map.reduce_matrix(&stiffness_from_values(&cell.mesh, d));
        let system = ReducedSystem { matrix, rhs: vec![0.0; map.n_dofs()], dofs: map, lifting };
        Self::new(system, &cell.mesh, tol, compat_tol)
    }

    pub fn mean(&self, u: &[f64]) -> f64 {
        dot(&self.node_mass, u) / self.area
    }

    /// Relative compatibility defect of a full-node load.
    pub fn defect(&self, load: &[f64]) -> f64 {
        let abs: f64 = load.iter().map(|v| v.abs()).sum();
        if abs == 0.0 {
            0.0
        } else {
            load.iter().sum::<f64>().abs() / abs
        }
    }

    /// Solves with the load projected onto zero mean, without the compatibility gate.
    pub fn solve_projected(&self, load: &[f64], warm: Option<&[f64]>) -> Result<GaugedSolution> {
        let defect = self.defect(load);
        let mut rhs = self.system.load(load);
        let total: f64 = rhs.iter().sum();
        for (r, m) in rhs.iter_mut().zip(&self.dof_mass) {
            *r -= total * m / self.area;
        }
        let mut x = match warm {
            Some(w) => self.system.dofs.restrict(w),
            None => vec![0.0; self.system.dofs.n_dofs()],
        };
        let stats = pcg(&self.system.matrix, &rhs, &mut x, self.tol, true)?;
        let mut values = self.system.dofs.expand(&x);
        let c = self.mean(&values);
        values.iter_mut().for_each(|v| *v -= c);
        Ok(GaugedSolution { values, defect, stats })
    }

    /// Solves after checking `|Σ b| ≤ compat_tol · Σ|b|`.
    pub fn solve(&self, load: &[f64], warm: Option<&[f64]>) -> Result<GaugedSolution> {
        let defect = self.defect(load);
        if defect > self.compat_tol {
            return Err(Error::Compat { defect, threshold: self.compat_tol });
        }
        self.solve_projected(load, warm)
    }
}

/// Gauged solve of a periodic/Neumann system: COMPAT check, projection of the
/// load to zero mean, CG, and a zero-mean gauge on the result.
pub fn solve_neumann_periodic_gauged(
    system: &ReducedSystem,
    mesh: &QuadMesh,
    load: &[f64],
    tol: f64,
    compat_tol: f64,
) -> Result<Vec<f64>> {
    GaugedSystem::new(system.clone(), mesh, tol, compat_tol)
        .solve(load, None)
        .map(|s| s.values)
}

/// Deterministic start vector with components in every eigenmode.
fn start_vector(n: usize) -> Vec<f64> {
    const PHI: f64 = 0.618_033_988_749_894_9;
    (0..n).map(|i| ((i as f64 + 1.0) * PHI).fract() - 0.5).collect()
}

/// Smallest eigenvalue of `Kx = λMx` on the reduced space, by inverse
/// iteration. With `singular`, iterates are kept `M`-orthogonal to constants.
fn smallest_eigenvalue(k: &CsrMatrix, m: &CsrMatrix, singular: bool, tol: f64) -> Result<f64> {
    let n = k.dim();
    let ones = vec![1.0; n];
    let m1 = m.mul_vec(&ones);
    let one_m_one = dot(&ones, &m1);
    let orth = |x: &mut Vec<f64>| {
        if singular {
            let c = dot(x, &m1) / one_m_one;
            x.iter_mut().for_each(|v| *v -= c);
        }
    };
    let mut x = start_vector(n);
    orth(&mut x);
    let mut lambda = f64::INFINITY;
    let max_iter = 500;
    for _ in 0..max_iter {
        let norm = m.bilinear(&x, &x).sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
        let rhs = m.mul_vec(&x);
        let mut y = x.clone();
        pcg(k, &rhs, &mut y, 1e-12, singular)?;
        orth(&mut y);
        let next = k.bilinear(&y, &y) / m.bilinear(&y, &y);
        x = y;
        if (lambda - next).abs() <= tol * next {
            return Ok(next);
        }
        lambda = next;
    }
    Err(Error::NoConv { iterations: max_iter, residual: f64::NAN })
}

/// `C_p = λ₁^{-1/2}` with `λ₁` the smallest nonzero eigenvalue of the
/// Laplacian on the periodic cell with Neumann conditions on the hole.
pub fn poincare_constant(cell: &CellMesh) -> Result<f64> {
    let map = DofMap::periodic(cell, PeriodicRole::LowerMaster);
    let ones = vec![1.0; cell.mesh.element_count()];
    let (k, _) = map.reduce_matrix(&stiffness_from_values(&cell.mesh, &ones));
    let (m, _) = map.reduce_matrix(&assemble_mass(&cell.mesh));
    Ok(1.0 / smallest_eigenvalue(&k, &m, true, 1e-8)?.sqrt())
}

/// Poincaré constant of functions vanishing on the `Outer` faces of `mesh`.
pub fn poincare_constant_dirichlet(mesh: &QuadMesh) -> Result<f64> {
    let map = DofMap::dirichlet(mesh, FaceTag::Outer, 0.0);
    let ones = vec![1.0; mesh.element_count()];
    let (k, _) = map.reduce_matrix(&stiffness_from_values(mesh, &ones));
    let (m, _) = map.reduce_matrix(&assemble_mass(mesh));
    Ok(1.0 / smallest_eigenvalue(&k, &m, false, 1e-8)?.sqrt())
}
