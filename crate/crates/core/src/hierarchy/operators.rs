//! Weak-form loads of the cross operators `A₁` and `A₂`, with `∇_x` acting
//! as multiplication by a constant macro-gradient `g`.
//!
//! `⟨A₁u, φ⟩ = -∫ d (g·∇_y u) φ + ∫ d u g·∇_y φ`. The hole-boundary term
//! produced by integrating `∇_y·(-d g u)` by parts cancels against the
//! Neumann condition `-d(g u_{m-1} + ∇_y u_m)·n = 0` of the next level, so
//! it is not assembled.
//!
//! `⟨A₂u, φ⟩ = -∫ d |g|² u φ`.

use alloc::vec;
use alloc::vec::Vec;

use crate::fem::assembly::element;
use crate::fem::element::{gauss2, shape};
use crate::geometry::QuadMesh;

pub fn a1_load(mesh: &QuadMesh, d: &[f64], u: &[f64], g: [f64; 2]) -> Vec<f64> {
    let mut b = vec![0.0; mesh.node_count()];
    if g == [0.0, 0.0] {
        return b;
    }
    let rule = gauss2();
    for (e, nodes) in mesh.elements.iter().enumerate() {
        let el = element(mesh, e);
        let vals = nodes.map(|v| u[v]);
        for (xi, w) in rule.points.iter().zip(rule.weights) {
            let jw = w * el.det() * d[e];
            let phi = shape(*xi);
            let grads = el.grad(*xi);
            let (uq, gu) = el.interpolate(&vals, *xi);
            let g_dot_gu = g[0] * gu[0] + g[1] * gu[1];
            for a in 0..4 {
                let g_dot_gphi = g[0] * grads[a][0] + g[1] * grads[a][1];
                b[nodes[a]] += jw * (-g_dot_gu * phi[a] + uq * g_dot_gphi);
            }
        }
    }
    b
}

pub fn a2_load(mesh: &QuadMesh, d: &[f64], u: &[f64], g: [f64; 2]) -> Vec<f64> {
    let g2 = g[0] * g[0] + g[1] * g[1];
    let mut b = vec![0.0; mesh.node_count()];
    if g2 == 0.0 {
        return b;
    }
    let rule = gauss2();
    for (e, nodes) in mesh.elements.iter().enumerate() {
        let el = element(mesh, e);
        let vals = nodes.map(|v| u[v]);
        for (xi, w) in rule.points.iter().zip(rule.weights) {
            let phi = shape(*xi);
            let (uq, _) = el.interpolate(&vals, *xi);
            let c = -w * el.det() * d[e] * g2 * uq;
            for a in 0..4 {
                b[nodes[a]] += c * phi[a];
            }
        }
    }
    b
}
