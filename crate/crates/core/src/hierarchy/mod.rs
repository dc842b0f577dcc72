//! The corrector hierarchy in its two modes.
//!
//! * Classical (`r ≤ 0`): linear correctors `χ_j`, `θ_ij`, the effective
//!   tensor and the homogenized macro solution `u₀(x)`; the expansion is
//!   `u₀ + ε χ_j ∂_ju₀ + ε² θ_ij ∂_iju₀`, so only `M = 2` is supported.
//! * Nonlinear (`r ∈ {1, 2}`): cell fields `u_0 .. u_M` from the
//!   Picard-linearized auxiliary problems.

pub mod classical;
pub mod nonlinear;
pub mod operators;

use alloc::format;
use alloc::vec::Vec;

use crate::coefficient::CoefficientSpec;
use crate::error::{Error, Result};
use crate::fem::field::{Gauge, ScalarField};
use crate::fem::solve::{poincare_constant, GaugedSystem, DEFAULT_COMPAT_TOL};
use crate::geometry::{CellMesh, PeriodicRole, QuadMesh};
use crate::picard::{IterationTrace, PicardOptions};
use crate::reaction::ReactionSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Classical,
    Nonlinear,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpansionConfig {
    /// Expansion order `M ≥ 2`.
    pub order: usize,
    /// Structural exponent of the reaction, `r ≤ 2`.
    pub r: i32,
    /// Constant standing in for `∇_x` inside `A₁` and `A₂` (nonlinear mode).
    pub macro_gradient: [f64; 2],
}

impl Default for ExpansionConfig {
    fn default() -> Self {
        Self { order: 2, r: 0, macro_gradient: [0.0, 0.0] }
    }
}

impl ExpansionConfig {
    pub fn new(order: usize, r: i32) -> Result<Self> {
        let c = Self { order, r, ..Default::default() };
        c.validate()?;
        Ok(c)
    }

    pub fn mode(&self) -> Mode {
        if self.r <= 0 {
            Mode::Classical
        } else {
            Mode::Nonlinear
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 2 {
            return Err(Error::InvalidInput(format!("expansion order must be at least 2, got {}", self.order)));
        }
        if self.r > 2 {
            return Err(Error::InvalidInput(format!("structural exponent r must be at most 2, got {}", self.r)));
        }
        if self.mode() == Mode::Classical && self.order != 2 {
            return Err(Error::InvalidInput(format!(
                "the classical pathway builds the expansion up to order 2 only, got M = {}",
                self.order
            )));
        }
        if !self.macro_gradient.iter().all(|g| g.is_finite()) {
            return Err(Error::InvalidInput("macro gradient must be finite".into()));
        }
        Ok(())
    }
}

/// Solver settings for building a hierarchy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HierarchyOptions {
    pub picard: PicardOptions,
    /// Relative tolerance of the linear cell solves.
    pub linear_tol: f64,
    /// Compatibility threshold of the linear gauged solves.
    pub compat_tol: f64,
    /// Compatibility threshold of the iterate-independent nonlinear loads.
    pub load_compat_tol: f64,
    /// Elements per side of the macro mesh (classical mode).
    pub macro_resolution: usize,
    pub role: PeriodicRole,
}

impl Default for HierarchyOptions {
    fn default() -> Self {
        Self {
            picard: PicardOptions::default(),
            linear_tol: 1e-12,
            compat_tol: DEFAULT_COMPAT_TOL,
            load_compat_tol: 1e-6,
            macro_resolution: 64,
            role: PeriodicRole::LowerMaster,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ClassicalCorrectors {
    pub chi: [ScalarField; 2],
    pub theta: [[ScalarField; 2]; 2],
    pub d_hom: [[f64; 2]; 2],
    pub macro_mesh: QuadMesh,
    pub u0: ScalarField,
    pub macro_trace: IterationTrace,
}

#[derive(Clone, Debug)]
pub struct NonlinearLevels {
    pub levels: Vec<ScalarField>,
    pub traces: Vec<IterationTrace>,
}

#[derive(Clone, Debug)]
pub enum Correctors {
    Classical(ClassicalCorrectors),
    Nonlinear(NonlinearLevels),
}

#[derive(Clone, Debug)]
pub struct CorrectorHierarchy {
    pub config: ExpansionConfig,
    pub cell: CellMesh,
    /// Per-element coefficient on the cell mesh.
    pub d: Vec<f64>,
    pub alpha: f64,
    pub porosity: f64,
    pub c_p: f64,
    /// `C_p L / α`.
    pub kappa_p: f64,
    pub correctors: Correctors,
}

impl CorrectorHierarchy {
    pub fn build(
        cell: &CellMesh,
        coeff: &CoefficientSpec,
        reaction: &ReactionSpec,
        config: ExpansionConfig,
        options: &HierarchyOptions,
    ) -> Result<Self> {
        config.validate()?;
        let mesh = &cell.mesh;
        let d = coeff.element_values(mesh)?;
        let porosity = cell.geometry.porosity();
        let c_p = poincare_constant(cell)?;
        let kappa_p = c_p * reaction.lipschitz / coeff.alpha;
        let system = GaugedSystem::periodic(cell, &d, options.role, options.linear_tol, options.compat_tol);
        let field = |values: Vec<f64>| ScalarField::new(mesh.id(), values, Gauge::ZeroMean);

        let correctors = match config.mode() {
            Mode::Classical => {
                let chi = classical::solve_classical_correctors(&system, mesh, &d)?;
                let d_hom = classical::effective_tensor(mesh, &d, &chi);
                let theta = classical::solve_second_order_correctors(&system, mesh, &d, &chi, d_hom, porosity)?;
                let macro_mesh = QuadMesh::unit_square(options.macro_resolution)?;
                let picard = PicardOptions { linear_tol: options.linear_tol.max(1e-12), ..options.picard };
                let (u0, macro_trace) = classical::solve_homogenized_macro(&macro_mesh, d_hom, reaction, porosity, &picard)?;
                let [[t00, t01], [t10, t11]] = theta;
                let [c0, c1] = chi;
                Correctors::Classical(ClassicalCorrectors {
                    chi: [field(c0), field(c1)],
                    theta: [[field(t00), field(t01)], [field(t10), field(t11)]],
                    d_hom,
                    u0: ScalarField::new(macro_mesh.id(), u0, Gauge::Dirichlet),
                    macro_mesh,
                    macro_trace,
                })
            }
            Mode::Nonlinear => {
                let kappa_p = nonlinear::check_kappa(c_p, reaction.lipschitz, coeff.alpha)?;
                let ctx = nonlinear::LevelContext {
                    mesh,
                    d: &d,
                    system: &system,
                    reaction,
                    macro_gradient: config.macro_gradient,
                    options: PicardOptions { linear_tol: options.linear_tol, ..options.picard },
                    load_compat_tol: options.load_compat_tol,
                    kappa_p,
                    c_p,
                };
                let (levels, traces) = nonlinear::solve_levels(&ctx, config.order, config.r)?;
                Correctors::Nonlinear(NonlinearLevels { levels: levels.into_iter().map(field).collect(), traces })
            }
        };
        Ok(Self { config, cell: cell.clone(), d, alpha: coeff.alpha, porosity, c_p, kappa_p, correctors })
    }

    pub fn mode(&self) -> Mode {
        self.config.mode()
    }

    pub fn d_hom(&self) -> Option<[[f64; 2]; 2]> {
        match &self.correctors {
            Correctors::Classical(c) => Some(c.d_hom),
            Correctors::Nonlinear(_) => None,
        }
    }

    /// Picard traces: the macro solve in classical mode, one per level otherwise.
    pub fn traces(&self) -> Vec<&IterationTrace> {
        match &self.correctors {
            Correctors::Classical(c) => alloc::vec![&c.macro_trace],
            Correctors::Nonlinear(n) => n.traces.iter().collect(),
        }
    }
}
