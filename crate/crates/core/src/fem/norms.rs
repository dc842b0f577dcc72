//! Integrals and norms of nodal Q1 fields.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::assembly::{element, lumped_mass};
use super::element::{gauss2, gauss3, QuadRule};
use crate::geometry::QuadMesh;

fn local(mesh: &QuadMesh, e: usize, u: &[f64]) -> [f64; 4] {
    mesh.elements[e].map(|v| u[v])
}

fn quadrature<const N: usize>(
    mesh: &QuadMesh,
    u: &[f64],
    rule: &QuadRule<N>,
    mut f: impl FnMut(usize, [f64; 2], f64, [f64; 2]) -> f64,
) -> f64 {
    let mut total = 0.0;
    for e in 0..mesh.element_count() {
        let el = element(mesh, e);
        let vals = local(mesh, e, u);
        for (xi, w) in rule.points.iter().zip(rule.weights) {
            let (uq, gq) = el.interpolate(&vals, *xi);
            total += w * el.det() * f(e, el.point(*xi), uq, gq);
        }
    }
    total
}

/// `∫ u`.
pub fn integrate(mesh: &QuadMesh, u: &[f64]) -> f64 {
    lumped_mass(mesh).iter().zip(u).map(|(m, u)| m * u).sum()
}

/// `∫ u / |domain|`.
pub fn mean(mesh: &QuadMesh, u: &[f64]) -> f64 {
    integrate(mesh, u) / mesh.area()
}

pub fn l2_norm(mesh: &QuadMesh, u: &[f64]) -> f64 {
    quadrature(mesh, u, &gauss2(), |_, _, v, _| v * v).sqrt()
}

/// `(∫ |∇u|²)^{1/2}`.
pub fn h1_seminorm(mesh: &QuadMesh, u: &[f64]) -> f64 {
    quadrature(mesh, u, &gauss2(), |_, _, _, g| g[0] * g[0] + g[1] * g[1]).sqrt()
}

pub fn h1_norm(mesh: &QuadMesh, u: &[f64]) -> f64 {
    quadrature(mesh, u, &gauss2(), |_, _, v, g| v * v + g[0] * g[0] + g[1] * g[1]).sqrt()
}

/// Norm of `V^ε`: the gradient `L²` norm on the perforated domain.
pub fn v_eps_norm(mesh: &QuadMesh, u: &[f64]) -> f64 {
    h1_seminorm(mesh, u)
}

/// `∫ d |∇u|²` for a per-element coefficient.
pub fn energy(mesh: &QuadMesh, d: &[f64], u: &[f64]) -> f64 {
    quadrature(mesh, u, &gauss2(), |e, _, _, g| d[e] * (g[0] * g[0] + g[1] * g[1]))
}

/// `‖u_h - u*‖_{L²}` with 3×3 Gauss quadrature.
pub fn l2_error(mesh: &QuadMesh, u: &[f64], exact: impl Fn([f64; 2]) -> f64) -> f64 {
    quadrature(mesh, u, &gauss3(), |_, x, v, _| (v - exact(x)).powi(2)).sqrt()
}

/// `‖∇u_h - ∇u*‖_{L²}` with 3×3 Gauss quadrature.
pub fn h1_error(mesh: &QuadMesh, u: &[f64], exact_grad: impl Fn([f64; 2]) -> [f64; 2]) -> f64 {
    quadrature(mesh, u, &gauss3(), |_, x, _, g| {
        let ge = exact_grad(x);
        (g[0] - ge[0]).powi(2) + (g[1] - ge[1]).powi(2)
    })
    .sqrt()
}

/// Nodal gradient recovered by averaging the element gradients at each node.
///
/// On the interior of a uniform grid this is the central difference.
pub fn recover_gradient(mesh: &QuadMesh, u: &[f64]) -> [Vec<f64>; 2] {
    const CORNERS: [[f64; 2]; 4] = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];
    let n = mesh.node_count();
    let mut gx = vec![0.0; n];
    let mut gy = vec![0.0; n];
    let mut count = vec![0u32; n];
    for e in 0..mesh.element_count() {
        let el = element(mesh, e);
        let vals = local(mesh, e, u);
        for (a, &v) in mesh.elements[e].iter().enumerate() {
            let (_, g) = el.interpolate(&vals, CORNERS[a]);
            gx[v] += g[0];
            gy[v] += g[1];
            count[v] += 1;
        }
    }
    for v in 0..n {
        let c = count[v].max(1) as f64;
        gx[v] /= c;
        gy[v] /= c;
    }
    [gx, gy]
}
