//! The full microscale problem on the perforated domain:
//! `-∇·(d(x/ε)∇u) = R(x/ε, u)` in `Ω^ε`, `u = 0` on `Γ^ext`,
//! `d∇u·n = 0` on `Γ^ε`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::coefficient::CoefficientSpec;
use crate::error::Result;
use crate::fem::assembly::{assemble_reaction_load, element, stiffness_from_values};
use crate::fem::constraints::DofMap;
use crate::fem::element::gauss2_line;
use crate::fem::field::{Gauge, ScalarField};
use crate::fem::norms::{energy, v_eps_norm};
use crate::fem::solve::pcg;
use crate::geometry::{FaceTag, PerforatedMesh, QuadMesh};
use crate::picard::{iterate, IterationTrace, PicardOptions};
use crate::reaction::{Reaction, ReactionSpec};

#[derive(Clone, Debug)]
pub struct MicroProblem {
    pub mesh: PerforatedMesh,
    pub coefficient: CoefficientSpec,
    pub reaction: ReactionSpec,
}

#[derive(Clone, Debug)]
pub struct MicroSolution {
    pub u: ScalarField,
    pub trace: IterationTrace,
    /// Per-element coefficient.
    pub d: Vec<f64>,
    /// `∫ d |∇u|²`.
    pub energy: f64,
    /// `∫ R(u) u`.
    pub reaction_work: f64,
}

impl MicroSolution {
    /// `|∫ d|∇u|² - ∫ R(u) u| / max(1, ∫ d|∇u|²)`.
    pub fn energy_identity_residual(&self) -> f64 {
        (self.energy - self.reaction_work).abs() / self.energy.max(1.0)
    }
}

/// `∫ R(u) u`, with the quadrature of the reaction load.
pub fn reaction_work(mesh: &QuadMesh, u: &[f64], reaction: &dyn Reaction) -> f64 {
    assemble_reaction_load(mesh, u, reaction).iter().zip(u).map(|(b, u)| b * u).sum()
}

/// Picard iteration `K u^(k) = b(R(u^(k-1)))` from `u^(0) = 0`, with the
/// increments measured in the `V^ε` norm.
pub fn solve_microscale(problem: &MicroProblem, options: &PicardOptions) -> Result<MicroSolution> {
    let mesh = &problem.mesh.mesh;
    let d = problem.coefficient.element_values(mesh)?;
    let map = DofMap::dirichlet(mesh, FaceTag::Outer, 0.0);
    let (matrix, _) = map.reduce_matrix(&stiffness_from_values(mesh, &d));
    let mut x = vec![0.0; map.n_dofs()];
    let (u, trace) = iterate(
        options,
        0,
        vec![0.0; mesh.node_count()],
        |u| {
            let load = assemble_reaction_load(mesh, u, &problem.reaction);
            pcg(&matrix, &map.fold(&load), &mut x, options.linear_tol, false)?;
            Ok((map.expand(&x), 0.0))
        },
        |du| v_eps_norm(mesh, du),
    )?;
    Ok(MicroSolution {
        energy: energy(mesh, &d, &u),
        reaction_work: reaction_work(mesh, &u, &problem.reaction),
        u: ScalarField::new(mesh.id(), u, Gauge::Dirichlet),
        trace,
        d,
    })
}

/// Normal flux `d∇u·n` on the hole faces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FluxReport {
    pub faces: usize,
    /// `‖d∇u_h·n‖_{L²(Γ^ε)}` with 2-point Gauss on each face.
    pub l2: f64,
    /// Largest `|d∇u_h·n|` at a face Gauss point.
    pub max_abs: f64,
}

/// Measures how well the natural condition `d∇u·n = 0` holds on `Γ^ε`,
/// using the gradient of the adjacent element.
pub fn flux_check(mesh: &QuadMesh, d: &[f64], u: &[f64]) -> FluxReport {
    let (pts, wts) = gauss2_line();
    let h = mesh.spacing();
    let mut sum = 0.0;
    let mut max_abs = 0.0f64;
    let mut faces = 0;
    for f in mesh.faces_with(FaceTag::Hole) {
        faces += 1;
        let el = element(mesh, f.element);
        let vals = mesh.elements[f.element].map(|v| u[v]);
        for (t, w) in pts.iter().zip(wts) {
            // reference point on the face: local faces are bottom, right, top, left
            let xi = match f.local {
                0 => [*t, -1.0],
                1 => [1.0, *t],
                2 => [-*t, 1.0],
                _ => [-1.0, -*t],
            };
            let (_, g) = el.interpolate(&vals, xi);
            let q = d[f.element] * (g[0] * f.normal[0] + g[1] * f.normal[1]);
            sum += 0.5 * h * w * q * q;
            max_abs = max_abs.max(q.abs());
        }
    }
    FluxReport { faces, l2: sum.sqrt(), max_abs }
}

/// `(‖u‖_{V^ε}, C_p ‖R(u)‖_{L²} / α)`; the first should not exceed the second.
pub fn a_priori_bound(mesh: &QuadMesh, u: &[f64], reaction: &dyn Reaction, c_p: f64, alpha: f64) -> (f64, f64) {
    let rule = crate::fem::element::gauss2();
    let mut r2 = 0.0;
    for e in 0..mesh.element_count() {
        let el = element(mesh, e);
        let vals = mesh.elements[e].map(|v| u[v]);
        for (xi, w) in rule.points.iter().zip(rule.weights) {
            let (uq, _) = el.interpolate(&vals, *xi);
            let r = reaction.value(mesh.cell_coordinate(e, *xi), uq);
            r2 += w * el.det() * r * r;
        }
    }
    (v_eps_norm(mesh, u), c_p * r2.sqrt() / alpha)
}
