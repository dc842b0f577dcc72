//! Linear correctors: `χ_j`, the effective tensor, the second-order
//! correctors `θ_ij` and the homogenized macro problem.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fem::assembly::{assemble_reaction_load, element, stiffness_from_tensor};
use crate::fem::constraints::DofMap;
use crate::fem::element::{gauss2, shape};
use crate::fem::norms::h1_seminorm;
use crate::fem::solve::{pcg, GaugedSystem};
use crate::geometry::{FaceTag, QuadMesh};
use crate::picard::{iterate, IterationTrace, PicardOptions};
use crate::reaction::Reaction;

/// Load of the `χ_j` cell problem: `b_i = -∫ d ∂_jφ_i`.
pub fn chi_load(mesh: &QuadMesh, d: &[f64], j: usize) -> Vec<f64> {
    let h = mesh.spacing();
    // ∫ ∂_jφ_a over a square element is ±h/2
    const SIGNS: [[f64; 2]; 4] = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];
    let mut b = vec![0.0; mesh.node_count()];
    for (e, nodes) in mesh.elements.iter().enumerate() {
        for a in 0..4 {
            b[nodes[a]] -= d[e] * 0.5 * h * SIGNS[a][j];
        }
    }
    b
}

/// Zero-mean periodic solutions of `∫ d∇χ_j·∇φ = -∫ d ∂_jφ`.
pub fn solve_classical_correctors(system: &GaugedSystem, mesh: &QuadMesh, d: &[f64]) -> Result<[Vec<f64>; 2]> {
    let chi1 = system.solve(&chi_load(mesh, d, 0), None)?.values;
    let chi2 = system.solve(&chi_load(mesh, d, 1), None)?.values;
    Ok([chi1, chi2])
}

/// `d_hom,ij = ∫_{Y₁} d (δ_ij + ∂_iχ_j)` (the cell has unit area).
pub fn effective_tensor(mesh: &QuadMesh, d: &[f64], chi: &[Vec<f64>; 2]) -> [[f64; 2]; 2] {
    let rule = gauss2();
    let mut t = [[0.0; 2]; 2];
    for (e, nodes) in mesh.elements.iter().enumerate() {
        let el = element(mesh, e);
        for (xi, w) in rule.points.iter().zip(rule.weights) {
            let jw = w * el.det() * d[e];
            for j in 0..2 {
                let (_, g) = el.interpolate(&nodes.map(|v| chi[j][v]), *xi);
                for i in 0..2 {
                    t[i][j] += jw * (if i == j { 1.0 } else { 0.0 } + g[i]);
                }
            }
        }
    }
    t
}

/// Load of the `θ_ij` cell problem:
/// `∫ [d(δ_ij + ∂_iχ_j) - d_hom,ij / |Y₁|] φ - ∫ d χ_j ∂_iφ`.
pub fn theta_load(mesh: &QuadMesh, d: &[f64], chi_j: &[f64], d_hom_ij: f64, porosity: f64, i: usize, j: usize) -> Vec<f64> {
    let rule = gauss2();
    let mut b = vec![0.0; mesh.node_count()];
    let delta = if i == j { 1.0 } else { 0.0 };
    for (e, nodes) in mesh.elements.iter().enumerate() {
        let el = element(mesh, e);
        let vals = nodes.map(|v| chi_j[v]);
        for (xi, w) in rule.points.iter().zip(rule.weights) {
            let jw = w * el.det();
            let (c, g) = el.interpolate(&vals, *xi);
            let phi = shape(*xi);
            let grads = el.grad(*xi);
            let source = d[e] * (delta + g[i]) - d_hom_ij / porosity;
            for a in 0..4 {
                b[nodes[a]] += jw * (source * phi[a] - d[e] * c * grads[a][i]);
            }
        }
    }
    b
}

/// Zero-mean periodic `θ_ij`. An incorrect `d_hom` makes the loads
/// incompatible and surfaces as [`Error::Compat`].
pub fn solve_second_order_correctors(
    system: &GaugedSystem,
    mesh: &QuadMesh,
    d: &[f64],
    chi: &[Vec<f64>; 2],
    d_hom: [[f64; 2]; 2],
    porosity: f64,
) -> Result<[[Vec<f64>; 2]; 2]> {
    let solve = |i: usize, j: usize| -> Result<Vec<f64>> {
        let load = theta_load(mesh, d, &chi[j], d_hom[i][j], porosity, i, j);
        Ok(system.solve(&load, None)?.values)
    };
    Ok([[solve(0, 0)?, solve(0, 1)?], [solve(1, 0)?, solve(1, 1)?]])
}

/// Picard solve of `-∇·(d_hom ∇u₀) = porosity · R(u₀)` on the unit square
/// with `u₀ = 0` on the boundary. `R` must not depend on the cell variable.
pub fn solve_homogenized_macro(
    mesh: &QuadMesh,
    d_hom: [[f64; 2]; 2],
    reaction: &dyn Reaction,
    porosity: f64,
    options: &PicardOptions,
) -> Result<(Vec<f64>, IterationTrace)> {
    if reaction.depends_on_cell() {
        return Err(Error::InvalidInput(
            "the homogenized macro problem needs a reaction that does not depend on the cell variable".into(),
        ));
    }
    let map = DofMap::dirichlet(mesh, FaceTag::Outer, 0.0);
    let (matrix, _) = map.reduce_matrix(&stiffness_from_tensor(mesh, d_hom));
    let mut x = vec![0.0; map.n_dofs()];
    iterate(
        options,
        0,
        vec![0.0; mesh.node_count()],
        |u| {
            let mut load = assemble_reaction_load(mesh, u, reaction);
            load.iter_mut().for_each(|b| *b *= porosity);
            pcg(&matrix, &map.fold(&load), &mut x, options.linear_tol, false)?;
            Ok((map.expand(&x), 0.0))
        },
        |du| h1_seminorm(mesh, du),
    )
}
