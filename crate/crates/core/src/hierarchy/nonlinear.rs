//! Picard-linearized auxiliary levels for `r ∈ {1, 2}`.
//!
//! Level `m` solves `∫ d∇u_m·∇φ = ∫ R(u_k) φ - ⟨A₁u_{m-1}, φ⟩ - ⟨A₂u_{m-2}, φ⟩`
//! with `k = m - 2 + r`: for `r = 2` the level references itself and is
//! iterated from `u^(0) = 0`; for `r = 1` it uses the previous level.

use alloc::vec;
use alloc::vec::Vec;

use super::operators::{a1_load, a2_load};
use crate::error::{Error, Result};
use crate::fem::assembly::assemble_reaction_load;
use crate::fem::norms::h1_norm;
use crate::fem::solve::GaugedSystem;
use crate::geometry::QuadMesh;
use crate::picard::{iterate, IterationTrace, PicardOptions};
use crate::reaction::Reaction;

/// Inputs shared by every level.
pub struct LevelContext<'a> {
    pub mesh: &'a QuadMesh,
    pub d: &'a [f64],
    pub system: &'a GaugedSystem,
    pub reaction: &'a dyn Reaction,
    pub macro_gradient: [f64; 2],
    pub options: PicardOptions,
    /// Hard limit on the relative mean of the iterate-independent load.
    pub load_compat_tol: f64,
    pub kappa_p: f64,
    pub c_p: f64,
}

/// `κ_p = C_p L / α`, rejected unless below one.
pub fn check_kappa(c_p: f64, lipschitz: f64, alpha: f64) -> Result<f64> {
    let kappa_p = c_p * lipschitz / alpha;
    if kappa_p >= 1.0 || !kappa_p.is_finite() {
        return Err(Error::Kappa { kappa_p, c_p });
    }
    Ok(kappa_p)
}

fn add(a: &mut [f64], b: &[f64], s: f64) {
    a.iter_mut().zip(b).for_each(|(x, y)| *x += s * y);
}

/// Solves one level given the lower levels `priors[..m]`.
pub fn picard_solve_auxiliary_level(ctx: &LevelContext<'_>, m: usize, r: i32, priors: &[Vec<f64>]) -> Result<(Vec<f64>, IterationTrace)> {
    let mesh = ctx.mesh;
    let n = mesh.node_count();
    let mut fixed = vec![0.0; n];
    if m >= 1 {
        add(&mut fixed, &a1_load(mesh, ctx.d, &priors[m - 1], ctx.macro_gradient), -1.0);
    }
    if m >= 2 {
        add(&mut fixed, &a2_load(mesh, ctx.d, &priors[m - 2], ctx.macro_gradient), -1.0);
    }
    let k = m as i64 - 2 + r as i64;
    let zero = vec![0.0; n];
    let self_referencing = k == m as i64;
    let known = if k >= 0 && !self_referencing { Some(&priors[k as usize]) } else { None };

    let load_at = |u: &[f64]| {
        let mut load = fixed.clone();
        if self_referencing {
            add(&mut load, &assemble_reaction_load(mesh, u, ctx.reaction), 1.0);
        } else if let Some(uk) = known {
            add(&mut load, &assemble_reaction_load(mesh, uk, ctx.reaction), 1.0);
        }
        load
    };

    // the iterate-independent part (everything at u^(0) = 0) must be compatible
    let first = load_at(&zero);
    let defect = ctx.system.defect(&first);
    if defect > ctx.load_compat_tol {
        return Err(Error::Compat { defect, threshold: ctx.load_compat_tol });
    }

    let norm = |v: &[f64]| h1_norm(mesh, v);
    let (u, trace) = if self_referencing {
        iterate(&ctx.options, m, zero, |u| {
            let sol = ctx.system.solve_projected(&load_at(u), Some(u))?;
            Ok((sol.values, sol.defect))
        }, norm)?
    } else {
        let opts = PicardOptions { max_iter: 1, tol: f64::INFINITY, ..ctx.options };
        iterate(&opts, m, zero, |_| {
            let sol = ctx.system.solve_projected(&first, None)?;
            Ok((sol.values, sol.defect))
        }, norm)?
    };
    Ok((u, trace.with_kappa(ctx.kappa_p, ctx.c_p)))
}

/// Levels `u_0 .. u_M` in order.
pub fn solve_levels(ctx: &LevelContext<'_>, order: usize, r: i32) -> Result<(Vec<Vec<f64>>, Vec<IterationTrace>)> {
    let mut levels = Vec::with_capacity(order + 1);
    let mut traces = Vec::with_capacity(order + 1);
    for m in 0..=order {
        let (u, t) = picard_solve_auxiliary_level(ctx, m, r, &levels)?;
        levels.push(u);
        traces.push(t);
    }
    Ok((levels, traces))
}
