//! Two-scale homogenization correctors for semi-linear elliptic problems
//! posed in periodically perforated 2D domains.
//!
//! The crate is `no_std` (it needs `alloc`) and purely computational:
//! structured Q1 meshes of the unit cell and of the perforated domain,
//! finite element assembly with periodic and Dirichlet constraints,
//! gauged solves for pure Neumann/periodic cell problems, the corrector
//! hierarchy (classical linear correctors and the Picard-linearized
//! nonlinear levels), the microscale reference solve, and the
//! expansion/error/order-fitting machinery.
//!
//! File formats, configuration and the command line live in the `homlab`
//! companion crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod coefficient;
pub mod convergence;
mod error;
pub mod expansion;
pub mod fem;
pub mod geometry;
pub mod hierarchy;
pub mod micro;
pub mod picard;
pub mod reaction;

pub use coefficient::{Coefficient, CoefficientSpec};
pub use convergence::{fit_convergence_order, ConvergenceReport, ConvergenceSample, ReportFlag};
pub use error::{Error, Result};
pub use expansion::{corrector_error, evaluate_expansion, residual_diagnostics, ExpansionEvaluation, ResidualDiagnostics};
pub use fem::field::{Gauge, ScalarField};
pub use geometry::{build_cell_mesh, build_perforated_mesh, micro_to_cell_map, CellGeometry, CellMesh, PerforatedMesh, QuadMesh};
pub use hierarchy::{CorrectorHierarchy, Correctors, ExpansionConfig, HierarchyOptions, Mode};
pub use micro::{flux_check, solve_microscale, FluxReport, MicroProblem, MicroSolution};
pub use picard::{contraction_bound, IterationTrace, PicardOptions};
pub use reaction::{Reaction, ReactionKind, ReactionSpec};
