//! Periodic master/slave folding and Dirichlet elimination.

use alloc::vec;
use alloc::vec::Vec;

use super::assembly::SparseSystem;
use super::sparse::CsrMatrix;
use crate::geometry::{CellMesh, FaceTag, PeriodicRole, QuadMesh};

const FIXED: usize = usize::MAX;

/// Map from mesh nodes to reduced unknowns.
#[derive(Clone, Debug, PartialEq)]
pub struct DofMap {
    node_dof: Vec<usize>,
    fixed: Vec<f64>,
    n_dofs: usize,
}

impl DofMap {
    /// Every node is its own unknown.
    pub fn free(nodes: usize) -> Self {
        Self { node_dof: (0..nodes).collect(), fixed: vec![0.0; nodes], n_dofs: nodes }
    }

    /// Slave nodes share the unknown of their periodic master.
    pub fn periodic(cell: &CellMesh, role: PeriodicRole) -> Self {
        let nodes = cell.mesh.node_count();
        let mut node_dof = vec![FIXED; nodes];
        let mut n_dofs = 0;
        for v in 0..nodes {
            if cell.periodic_master(v, role) == v {
                node_dof[v] = n_dofs;
                n_dofs += 1;
            }
        }
        for v in 0..nodes {
            node_dof[v] = node_dof[cell.periodic_master(v, role)];
        }
        Self { node_dof, fixed: vec![0.0; nodes], n_dofs }
    }

    /// Nodes on faces tagged `tag` are eliminated with the prescribed `value`.
    pub fn dirichlet(mesh: &QuadMesh, tag: FaceTag, value: f64) -> Self {
        let nodes = mesh.node_count();
        let mut fixed = vec![0.0; nodes];
        let mut node_dof = vec![0; nodes];
        for v in mesh.tagged_nodes(tag) {
            node_dof[v] = FIXED;
            fixed[v] = value;
        }
        let mut n_dofs = 0;
        for d in node_dof.iter_mut() {
            if *d != FIXED {
                *d = n_dofs;
                n_dofs += 1;
            }
        }
        Self { node_dof, fixed, n_dofs }
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn n_nodes(&self) -> usize {
        self.node_dof.len()
    }

    pub fn dof(&self, node: usize) -> Option<usize> {
        match self.node_dof[node] {
            FIXED => None,
            d => Some(d),
        }
    }

    /// Sums nodal contributions onto their unknowns; constrained nodes are dropped.
    pub fn fold(&self, full: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; self.n_dofs];
        for (v, &d) in self.node_dof.iter().enumerate() {
            if d != FIXED {
                r[d] += full[v];
            }
        }
        r
    }

    /// Nodal values from reduced unknowns (prescribed values on fixed nodes).
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        self.node_dof
            .iter()
            .zip(&self.fixed)
            .map(|(&d, &g)| if d == FIXED { g } else { x[d] })
            .collect()
    }

    /// Reduced unknowns of a nodal field; for periodic maps the master value wins.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n_dofs];
        let mut seen = vec![false; self.n_dofs];
        for (v, &d) in self.node_dof.iter().enumerate() {
            if d != FIXED && !seen[d] {
                x[d] = full[v];
                seen[d] = true;
            }
        }
        x
    }

    /// `PᵀAP` on the free unknowns, and the load `-PᵀA g` contributed by
    /// prescribed values.
    pub fn reduce_matrix(&self, a: &CsrMatrix) -> (CsrMatrix, Vec<f64>) {
        let mut triplets = Vec::with_capacity(a.nnz());
        let mut lifting = vec![0.0; self.n_dofs];
        for (i, j, v) in a.triplets() {
            let (di, dj) = (self.node_dof[i], self.node_dof[j]);
            match (di, dj) {
                (FIXED, _) => {}
                (_, FIXED) => lifting[di] -= v * self.fixed[j],
                _ => triplets.push((di, dj, v)),
            }
        }
        (CsrMatrix::from_triplets(self.n_dofs, &triplets), lifting)
    }
}

/// Linear system on the reduced unknowns of a [`DofMap`].
#[derive(Clone, Debug)]
pub struct ReducedSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub dofs: DofMap,
    pub(crate) lifting: Vec<f64>,
}

impl ReducedSystem {
    pub fn new(system: &SparseSystem, dofs: DofMap) -> Self {
        let (matrix, lifting) = dofs.reduce_matrix(&system.matrix);
        let mut rhs = dofs.fold(&system.rhs);
        rhs.iter_mut().zip(&lifting).for_each(|(r, l)| *r += l);
        Self { matrix, rhs, dofs, lifting }
    }

    /// Reduced right-hand side for a new full-node load.
    pub fn load(&self, full: &[f64]) -> Vec<f64> {
        let mut r = self.dofs.fold(full);
        r.iter_mut().zip(&self.lifting).for_each(|(r, l)| *r += l);
        r
    }

    pub fn with_rhs(mut self, full: &[f64]) -> Self {
        self.rhs = self.load(full);
        self
    }
}

pub fn apply_periodic(system: &SparseSystem, cell: &CellMesh, role: PeriodicRole) -> ReducedSystem {
    ReducedSystem::new(system, DofMap::periodic(cell, role))
}

pub fn apply_dirichlet(system: &SparseSystem, mesh: &QuadMesh, tag: FaceTag, value: f64) -> ReducedSystem {
    ReducedSystem::new(system, DofMap::dirichlet(mesh, tag, value))
}
