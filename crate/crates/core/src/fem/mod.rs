//! Q1 finite elements on structured meshes.

pub mod assembly;
pub mod constraints;
pub mod element;
pub mod field;
pub mod norms;
pub mod solve;
pub mod sparse;

pub use assembly::{assemble_load, assemble_mass, assemble_stiffness, SparseSystem};
pub use constraints::{apply_dirichlet, apply_periodic, DofMap, ReducedSystem};
pub use norms::{h1_norm, h1_seminorm, l2_norm, mean, v_eps_norm};
pub use solve::{poincare_constant, solve_neumann_periodic_gauged, solve_spd, GaugedSystem};
