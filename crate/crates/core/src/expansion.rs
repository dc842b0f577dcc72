//! The two-scale expansion on `Ω^ε`, the corrector error and the residual
//! diagnostics.
//!
//! Expansion terms are composed nodally: cell fields are read at
//! `y = x/ε mod 1` through the exact node map, macro fields at the nested
//! macro node. The result is then interpolated bilinearly on the micro mesh.
//! Macro derivatives come from repeated recovered-gradient differencing.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fem::assembly::element;
use crate::fem::element::{gauss2, gauss2_line};
use crate::fem::norms::{l2_norm, recover_gradient, v_eps_norm};
use crate::geometry::{micro_to_cell_map, FaceTag, PerforatedMesh, QuadMesh};
use crate::hierarchy::{ClassicalCorrectors, CorrectorHierarchy, Correctors};
use crate::micro::MicroProblem;
use crate::reaction::Reaction;

/// `∂^k u₀` for `k ≤ 4`, as nodal fields on the macro mesh.
/// Index order: `hess[i][j] = ∂_i∂_j u₀`, `third[k][i][j] = ∂_k∂_i∂_j u₀`, ...
#[derive(Clone, Debug)]
pub struct MacroDerivatives {
    pub grad: [Vec<f64>; 2],
    pub hess: [[Vec<f64>; 2]; 2],
    pub third: [[[Vec<f64>; 2]; 2]; 2],
    pub fourth: [[[[Vec<f64>; 2]; 2]; 2]; 2],
}

impl MacroDerivatives {
    pub fn new(mesh: &QuadMesh, u0: &[f64]) -> Self {
        let d = |f: &[f64]| recover_gradient(mesh, f);
        let grad = d(u0);
        let [g0x, g0y] = d(&grad[0]);
        let [g1x, g1y] = d(&grad[1]);
        let hess = [[g0x, g1x], [g0y, g1y]];
        let dh = hess.each_ref().map(|row| row.each_ref().map(|f| d(f)));
        let third = [0, 1].map(|k| [0, 1].map(|i| [0, 1].map(|j| dh[i][j][k].clone())));
        let dt = third.each_ref().map(|a| a.each_ref().map(|b| b.each_ref().map(|f| d(f))));
        let fourth = [0, 1].map(|l| [0, 1].map(|k| [0, 1].map(|i| [0, 1].map(|j| dt[k][i][j][l].clone()))));
        Self { grad, hess, third, fourth }
    }
}

/// Node correspondences between a micro mesh, the cell mesh and the macro mesh.
struct Composer<'a> {
    pmesh: &'a PerforatedMesh,
    cell_node: Vec<usize>,
    macro_node: Vec<usize>,
}

impl<'a> Composer<'a> {
    fn new(h: &CorrectorHierarchy, pmesh: &'a PerforatedMesh) -> Result<Self> {
        let cell_node = micro_to_cell_map(pmesh, &h.cell)?;
        let macro_node = match &h.correctors {
            Correctors::Classical(c) => {
                let nm = c.macro_mesh.divisions();
                let nu = pmesh.mesh.divisions();
                if nm % nu != 0 {
                    return Err(Error::ResolutionMismatch(format!(
                        "macro mesh with {nm} divisions is not nested with the micro mesh with {nu}"
                    )));
                }
                let s = nm / nu;
                pmesh.mesh.node_grid.iter().map(|&[i, j]| c.macro_mesh.node_at(i * s, j * s).unwrap()).collect()
            }
            Correctors::Nonlinear(_) => Vec::new(),
        };
        Ok(Self { pmesh, cell_node, macro_node })
    }

    fn cell(&self, f: &[f64]) -> Vec<f64> {
        self.cell_node.iter().map(|&v| f[v]).collect()
    }

    fn macro_(&self, f: &[f64]) -> Vec<f64> {
        self.macro_node.iter().map(|&v| f[v]).collect()
    }

    fn eps(&self) -> f64 {
        self.pmesh.eps()
    }
}

/// Value and gradient of a nodal field at reference point `xi` of element `e`.
fn at(mesh: &QuadMesh, e: usize, f: &[f64], xi: [f64; 2]) -> (f64, [f64; 2]) {
    element(mesh, e).interpolate(&mesh.elements[e].map(|v| f[v]), xi)
}

#[derive(Clone, Debug)]
pub struct ExpansionEvaluation {
    pub eps: f64,
    pub order: usize,
    pub mesh_id: u64,
    /// `Σ ε^m u_m` at every node of `Ω^ε`.
    pub values: Vec<f64>,
    /// Chain-rule gradient `∇_x(·) + ε⁻¹∇_y(·)` at every element centroid.
    pub chain_gradient: Vec<[f64; 2]>,
}

impl ExpansionEvaluation {
    /// Largest difference between the chain-rule gradient and the gradient
    /// of the bilinear interpolant, at element centroids.
    pub fn interpolation_gap(&self, mesh: &QuadMesh) -> f64 {
        (0..mesh.element_count())
            .map(|e| {
                let (_, g) = at(mesh, e, &self.values, [0.0, 0.0]);
                let c = self.chain_gradient[e];
                ((g[0] - c[0]).powi(2) + (g[1] - c[1]).powi(2)).sqrt()
            })
            .fold(0.0, f64::max)
    }
}

fn classical_terms(c: &ClassicalCorrectors, comp: &Composer<'_>, derivs: &MacroDerivatives) -> (Vec<f64>, Vec<[f64; 2]>) {
    let mesh = &comp.pmesh.mesh;
    let eps = comp.eps();
    let u0 = comp.macro_(&c.u0.values);
    let chi = [0, 1].map(|j| comp.cell(&c.chi[j].values));
    let g = [0, 1].map(|j| comp.macro_(&derivs.grad[j]));
    let theta = [0, 1].map(|i| [0, 1].map(|j| comp.cell(&c.theta[i][j].values)));
    let hs = [0, 1].map(|i| [0, 1].map(|j| comp.macro_(&derivs.hess[i][j])));
    let mut values = u0.clone();
    for v in 0..values.len() {
        for j in 0..2 {
            values[v] += eps * chi[j][v] * g[j][v];
            for i in 0..2 {
                values[v] += eps * eps * theta[i][j][v] * hs[i][j][v];
            }
        }
    }
    let product = |e: usize, a: &[f64], b: &[f64]| {
        let (av, ag) = at(mesh, e, a, [0.0, 0.0]);
        let (bv, bg) = at(mesh, e, b, [0.0, 0.0]);
        [av * bg[0] + bv * ag[0], av * bg[1] + bv * ag[1]]
    };
    let grads = (0..mesh.element_count())
        .map(|e| {
            let mut gr = at(mesh, e, &u0, [0.0, 0.0]).1;
            for j in 0..2 {
                let p = product(e, &chi[j], &g[j]);
                gr[0] += eps * p[0];
                gr[1] += eps * p[1];
                for i in 0..2 {
                    let p = product(e, &theta[i][j], &hs[i][j]);
                    gr[0] += eps * eps * p[0];
                    gr[1] += eps * eps * p[1];
                }
            }
            gr
        })
        .collect();
    (values, grads)
}

/// Evaluates the truncated expansion on `Ω^ε`.
///
/// Classical mode: `u₀ + ε χ_j ∂_ju₀ + ε² θ_ij ∂_i∂_ju₀`. Nonlinear mode:
/// `Σ_{m ≤ M} ε^m u_m(x/ε)`.
pub fn evaluate_expansion(h: &CorrectorHierarchy, pmesh: &PerforatedMesh) -> Result<ExpansionEvaluation> {
    let comp = Composer::new(h, pmesh)?;
    let mesh = &pmesh.mesh;
    let eps = pmesh.eps();
    let (values, chain_gradient) = match &h.correctors {
        Correctors::Classical(c) => {
            let derivs = MacroDerivatives::new(&c.macro_mesh, &c.u0.values);
            classical_terms(c, &comp, &derivs)
        }
        Correctors::Nonlinear(n) => {
            if n.levels.len() < h.config.order + 1 {
                return Err(Error::InvalidInput(format!(
                    "expansion of order {} needs {} levels, hierarchy has {}",
                    h.config.order,
                    h.config.order + 1,
                    n.levels.len()
                )));
            }
            let levels: Vec<Vec<f64>> = n.levels[..=h.config.order].iter().map(|f| comp.cell(&f.values)).collect();
            let mut values = vec![0.0; mesh.node_count()];
            let mut grads = vec![[0.0; 2]; mesh.element_count()];
            let mut w = 1.0;
            for u in &levels {
                values.iter_mut().zip(u).for_each(|(s, v)| *s += w * v);
                for (e, g) in grads.iter_mut().enumerate() {
                    let (_, gu) = at(mesh, e, u, [0.0, 0.0]);
                    g[0] += w * gu[0];
                    g[1] += w * gu[1];
                }
                w *= eps;
            }
            (values, grads)
        }
    };
    Ok(ExpansionEvaluation { eps, order: h.config.order, mesh_id: mesh.id(), values, chain_gradient })
}

/// `‖u^ε - I_h(Σ ε^m u_m)‖_{V^ε}`.
pub fn corrector_error(mesh: &QuadMesh, u_eps: &[f64], expansion: &ExpansionEvaluation) -> Result<f64> {
    if expansion.mesh_id != mesh.id() || u_eps.len() != mesh.node_count() {
        return Err(Error::ResolutionMismatch("solution and expansion live on different meshes".into()));
    }
    let diff: Vec<f64> = u_eps.iter().zip(&expansion.values).map(|(a, b)| a - b).collect();
    Ok(v_eps_norm(mesh, &diff))
}

/// Magnitudes of the three right-hand-side contributions of the error equation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualDiagnostics {
    pub eps: f64,
    /// `‖R(u^ε) - Σ_{m ≤ M-2} ε^{m-r} R(u_m)‖_{L²(Ω^ε)}`.
    pub reaction: f64,
    /// `ε^{M-1}` times the separable size of `A₁u_M + A₂u_{M-1} + εA₂u_M`:
    /// every term `c(y) D(x)` contributes `‖c‖_{L²(Y₁)} ‖D‖_{L²(Ω)}`.
    pub volume: f64,
    /// `ε^M ‖d ∇_x u_M · n‖_{L²(Γ^ε)}`.
    pub surface: f64,
}

/// `‖f‖_{L²(Y₁)}` for `f(element, reference point, d)`.
fn cell_l2(h: &CorrectorHierarchy, f: impl Fn(usize, [f64; 2], f64) -> f64) -> f64 {
    let mesh = &h.cell.mesh;
    let rule = gauss2();
    let mut s = 0.0;
    for e in 0..mesh.element_count() {
        let el = element(mesh, e);
        for (xi, w) in rule.points.iter().zip(rule.weights) {
            let v = f(e, *xi, h.d[e]);
            s += w * el.det() * v * v;
        }
    }
    s.sqrt()
}

/// `‖d f‖_{L²(Y₁)}`.
fn d_times(h: &CorrectorHierarchy, f: &[f64]) -> f64 {
    let mesh = &h.cell.mesh;
    cell_l2(h, |e, xi, d| d * at(mesh, e, f, xi).0)
}

/// `‖d ∂_k f‖_{L²(Y₁)}`.
fn d_grad(h: &CorrectorHierarchy, f: &[f64], k: usize) -> f64 {
    let mesh = &h.cell.mesh;
    cell_l2(h, |e, xi, d| d * at(mesh, e, f, xi).1[k])
}

pub fn residual_diagnostics(problem: &MicroProblem, u_eps: &[f64], h: &CorrectorHierarchy) -> Result<ResidualDiagnostics> {
    let pmesh = &problem.mesh;
    let mesh = &pmesh.mesh;
    let comp = Composer::new(h, pmesh)?;
    let eps = pmesh.eps();
    let order = h.config.order;
    let r = h.config.r;
    let d_micro = problem.coefficient.element_values(mesh)?;
    let reaction: &dyn Reaction = &problem.reaction;

    // composed lower levels entering the reaction expansion
    let lower: Vec<(Vec<f64>, f64)> = match &h.correctors {
        Correctors::Classical(c) => vec![(comp.macro_(&c.u0.values), eps.powi(-r))],
        Correctors::Nonlinear(n) => (0..=order - 2)
            .map(|m| (comp.cell(&n.levels[m].values), eps.powi(m as i32 - r)))
            .collect(),
    };
    let rule = gauss2();
    let mut reaction_sq = 0.0;
    for e in 0..mesh.element_count() {
        let el = element(mesh, e);
        for (xi, w) in rule.points.iter().zip(rule.weights) {
            let y = mesh.cell_coordinate(e, *xi);
            let mut diff = reaction.value(y, at(mesh, e, u_eps, *xi).0);
            for (u, s) in &lower {
                diff -= s * reaction.value(y, at(mesh, e, u, *xi).0);
            }
            reaction_sq += w * el.det() * diff * diff;
        }
    }

    let (volume, surface) = match &h.correctors {
        Correctors::Classical(c) => {
            let derivs = MacroDerivatives::new(&c.macro_mesh, &c.u0.values);
            let mm = &c.macro_mesh;
            let mut v1 = 0.0;
            let mut v2 = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    let th = &c.theta[i][j].values;
                    let dth = d_times(h, th);
                    for k in 0..2 {
                        let dh = l2_norm(mm, &derivs.third[k][i][j]);
                        v1 += (d_grad(h, th, k) + dth) * dh;
                        v2 += dth * l2_norm(mm, &derivs.fourth[k][k][i][j]);
                    }
                }
            }
            for j in 0..2 {
                let dchi = d_times(h, &c.chi[j].values);
                for k in 0..2 {
                    v1 += dchi * l2_norm(mm, &derivs.third[k][k][j]);
                }
            }
            let volume = eps * v1 + eps * eps * v2;
            let theta = [0, 1].map(|i| [0, 1].map(|j| comp.cell(&c.theta[i][j].values)));
            let dh = [0, 1].map(|k| [0, 1].map(|i| [0, 1].map(|j| comp.macro_(&derivs.third[k][i][j]))));
            let flux = surface_norm(mesh, &d_micro, |e, xi, n| {
                let mut q = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        let t = at(mesh, e, &theta[i][j], xi).0;
                        q += t * (at(mesh, e, &dh[0][i][j], xi).0 * n[0] + at(mesh, e, &dh[1][i][j], xi).0 * n[1]);
                    }
                }
                q
            });
            (volume, eps * eps * flux)
        }
        Correctors::Nonlinear(n) => {
            let g = h.config.macro_gradient;
            let g2 = g[0] * g[0] + g[1] * g[1];
            let um = &n.levels[order].values;
            let um1 = &n.levels[order - 1].values;
            let mesh_c = &h.cell.mesh;
            let a1 = cell_l2(h, |e, xi, d| {
                let gr = at(mesh_c, e, um, xi).1;
                d * (g[0] * gr[0] + g[1] * gr[1])
            }) + g2.sqrt() * d_times(h, um);
            let size = a1 + g2 * d_times(h, um1) + eps * g2 * d_times(h, um);
            let composed = comp.cell(um);
            let flux = surface_norm(mesh, &d_micro, |e, xi, n| at(mesh, e, &composed, xi).0 * (g[0] * n[0] + g[1] * n[1]));
            (eps.powi(order as i32 - 1) * size, eps.powi(order as i32) * flux)
        }
    };
    Ok(ResidualDiagnostics { eps, reaction: reaction_sq.sqrt(), volume, surface })
}

/// `‖d q‖_{L²(Γ^ε)}` for `q(element, reference point, normal)`, 2-point Gauss per face.
fn surface_norm(mesh: &QuadMesh, d: &[f64], q: impl Fn(usize, [f64; 2], [f64; 2]) -> f64) -> f64 {
    let (pts, wts) = gauss2_line();
    let h = mesh.spacing();
    let mut s = 0.0;
    for f in mesh.faces_with(FaceTag::Hole) {
        for (t, w) in pts.iter().zip(wts) {
            let xi = match f.local {
                0 => [*t, -1.0],
                1 => [1.0, *t],
                2 => [-*t, 1.0],
                _ => [-1.0, -*t],
            };
            let v = d[f.element] * q(f.element, xi, f.normal);
            s += 0.5 * h * w * v * v;
        }
    }
    s.sqrt()
}
