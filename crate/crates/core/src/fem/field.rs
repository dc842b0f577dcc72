use alloc::vec::Vec;
use core::fmt;

/// How the additive constant of a field is fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gauge {
    None,
    /// `∫ u = 0` over the meshed domain.
    ZeroMean,
    /// Prescribed values on a Dirichlet boundary.
    Dirichlet,
}

impl fmt::Display for Gauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gauge::None => "none",
            Gauge::ZeroMean => "zero-mean",
            Gauge::Dirichlet => "dirichlet",
        })
    }
}

impl core::str::FromStr for Gauge {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "none" => Ok(Gauge::None),
            "zero-mean" => Ok(Gauge::ZeroMean),
            "dirichlet" => Ok(Gauge::Dirichlet),
            _ => Err(()),
        }
    }
}

/// Nodal values of a Q1 field, tagged with the mesh they live on.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub mesh_id: u64,
    pub values: Vec<f64>,
    pub gauge: Gauge,
}

impl ScalarField {
    pub fn new(mesh_id: u64, values: Vec<f64>, gauge: Gauge) -> Self {
        Self { mesh_id, values, gauge }
    }

    pub fn zeros(mesh: &crate::geometry::QuadMesh, gauge: Gauge) -> Self {
        Self::new(mesh.id(), alloc::vec![0.0; mesh.node_count()], gauge)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn belongs_to(&self, mesh: &crate::geometry::QuadMesh) -> bool {
        self.mesh_id == mesh.id() && self.values.len() == mesh.node_count()
    }
}
