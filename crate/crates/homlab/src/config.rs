//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "name": "holes",
//!   "geometry": { "hole_half_width": 0.25, "n": 16 },
//!   "coefficient": { "kind": "constant", "value": 1.0 },
//!   "reaction": { "kind": "linear", "lambda": 0.1, "source": 1.0 },
//!   "expansion": { "order": 2, "r": 0 },
//!   "sweep": { "eps": [0.25, 0.125, 0.0625, 0.03125] }
//! }
//! ```
//!
//! Unknown keys are rejected at every level.

use std::path::{Path, PathBuf};

use homlab_core::geometry::cells_per_side_for;
use homlab_core::{
    CellGeometry, Coefficient, CoefficientSpec, ExpansionConfig, HierarchyOptions, PicardOptions, ReactionKind,
    ReactionSpec,
};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    /// Run directory name; defaults to the config file stem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub geometry: GeometryConfig,
    pub coefficient: CoefficientConfig,
    pub reaction: ReactionConfig,
    #[serde(default)]
    pub expansion: ExpansionSection,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub micro: Option<MicroConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Macro mesh divisions in classical mode; must be a multiple of every
    /// micro mesh it is composed with.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub macro_resolution: Option<usize>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Seed of the sampled Lipschitz check.
    #[serde(default)]
    pub seed: u64,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    /// Zero for an unperforated cell.
    pub hole_half_width: f64,
    /// Elements per side of the cell mesh.
    pub n: usize,
    /// Elements per ε-cell on `Ω^ε`; must equal `n` when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_per_cell: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientConfig {
    Constant { value: f64 },
    Layered { a: f64, b: f64 },
    /// Row-major, `y₁` fastest.
    Tabulated { n: usize, values: Vec<f64> },
}

/// Closed set of builtin reactions. `lipschitz` overrides the derived
/// constant and must not be smaller than it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReactionConfig {
    Zero {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lipschitz: Option<f64>,
    },
    Constant {
        lambda: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lipschitz: Option<f64>,
    },
    /// `λu + source`.
    Linear {
        lambda: f64,
        #[serde(default)]
        source: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lipschitz: Option<f64>,
    },
    /// `λ sin(2πy₁)(1 + tanh u)`.
    Tanh {
        lambda: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lipschitz: Option<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpansionSection {
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default)]
    pub r: i32,
    #[serde(default)]
    pub macro_gradient: [f64; 2],
}

fn default_order() -> usize {
    2
}

impl Default for ExpansionSection {
    fn default() -> Self {
        Self { order: 2, r: 0, macro_gradient: [0.0, 0.0] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub eps: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { eps: vec![0.25, 0.125, 0.0625, 0.03125] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MicroConfig {
    pub eps: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub linear_tol: f64,
    pub picard_tol: f64,
    pub picard_max: usize,
    pub compat_tol: f64,
    /// Threshold on the iterate-independent part of nonlinear cell loads.
    pub load_compat_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { linear_tol: 1e-12, picard_tol: 1e-10, picard_max: 200, compat_tol: 1e-8, load_compat_tol: 1e-6 }
    }
}

fn config_err(e: homlab_core::Error) -> AppError {
    AppError::Config(e.to_string())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| AppError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(AppError::io(path))?;
        let mut config = Self::from_json(&text)?;
        if config.name.is_none() {
            config.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        }
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(AppError::Config(format!(
                "unsupported schema_version {}, expected {SCHEMA_VERSION}",
                self.schema_version
            )));
        }
        if let Some(name) = &self.name {
            if name.is_empty() || name.contains(['/', '\\']) || name.starts_with('.') {
                return Err(AppError::Config(format!("run name {name:?} is not a plain directory name")));
            }
        }
        self.cell_geometry()?;
        if let Some(k) = self.geometry.n_per_cell {
            if k != self.geometry.n {
                return Err(AppError::Config(format!(
                    "geometry.n_per_cell = {k} must equal the cell resolution n = {}",
                    self.geometry.n
                )));
            }
        }
        self.expansion_config()?;
        self.reaction_spec()?;
        self.hierarchy_options()?;
        for &eps in &self.sweep.eps {
            cells_per_side_for(eps).map_err(config_err)?;
        }
        if let Some(m) = &self.micro {
            cells_per_side_for(m.eps).map_err(config_err)?;
        }
        let s = &self.solver;
        for (name, v) in [
            ("linear_tol", s.linear_tol),
            ("picard_tol", s.picard_tol),
            ("compat_tol", s.compat_tol),
            ("load_compat_tol", s.load_compat_tol),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(AppError::Config(format!("solver.{name} must lie in (0, 1), got {v}")));
            }
        }
        if s.picard_max == 0 {
            return Err(AppError::Config("solver.picard_max must be positive".into()));
        }
        if self.macro_resolution == Some(0) {
            return Err(AppError::Config("macro_resolution must be positive".into()));
        }
        Ok(())
    }

    pub fn cell_geometry(&self) -> Result<CellGeometry> {
        let g = &self.geometry;
        if g.hole_half_width == 0.0 {
            CellGeometry::unperforated(g.n)
        } else {
            CellGeometry::new(g.hole_half_width, g.n)
        }
        .map_err(config_err)
    }

    pub fn coefficient_spec(&self) -> Result<CoefficientSpec> {
        let spec = match &self.coefficient {
            CoefficientConfig::Constant { value } => CoefficientSpec::constant(*value),
            CoefficientConfig::Layered { a, b } => {
                CoefficientSpec::new(Coefficient::Layered { a: *a, b: *b }, a.min(*b), a.max(*b))
            }
            CoefficientConfig::Tabulated { n, values } => {
                let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                CoefficientSpec::new(Coefficient::Tabulated { n: *n, values: values.clone() }, lo, hi)
            }
        };
        spec.map_err(config_err)
    }

    /// The reaction with its declared constant, spot-checked on random pairs.
    pub fn reaction_spec(&self) -> Result<ReactionSpec> {
        let (kind, declared) = match &self.reaction {
            ReactionConfig::Zero { lipschitz } => (ReactionKind::Zero, *lipschitz),
            ReactionConfig::Constant { lambda, lipschitz } => (ReactionKind::Constant(*lambda), *lipschitz),
            ReactionConfig::Linear { lambda, source, lipschitz } => {
                (ReactionKind::Linear { lambda: *lambda, source: *source }, *lipschitz)
            }
            ReactionConfig::Tanh { lambda, lipschitz } => (ReactionKind::SinTanh { lambda: *lambda }, *lipschitz),
        };
        let spec = match declared {
            Some(l) => ReactionSpec::new(kind, l),
            None => ReactionSpec::builtin(kind),
        }
        .map_err(config_err)?;
        spec.check_lipschitz(self.seed, 1000, 10.0, 1e-12).map_err(config_err)?;
        Ok(spec)
    }

    pub fn expansion_config(&self) -> Result<ExpansionConfig> {
        let e = &self.expansion;
        let c = ExpansionConfig { order: e.order, r: e.r, macro_gradient: e.macro_gradient };
        c.validate().map_err(config_err)?;
        Ok(c)
    }

    pub fn picard_options(&self) -> PicardOptions {
        PicardOptions {
            tol: self.solver.picard_tol,
            max_iter: self.solver.picard_max,
            linear_tol: self.solver.linear_tol,
        }
    }

    /// Hierarchy options; the macro mesh matches the finest micro grid of
    /// the sweep unless given explicitly.
    pub fn hierarchy_options(&self) -> Result<HierarchyOptions> {
        let mut grids: Vec<usize> = Vec::new();
        for &eps in self.sweep.eps.iter().chain(self.micro.as_ref().map(|m| &m.eps)) {
            grids.push(cells_per_side_for(eps).map_err(config_err)? * self.geometry.n);
        }
        let lcm = grids.iter().fold(1usize, |a, &b| a / gcd(a, b) * b);
        let macro_resolution = match self.macro_resolution {
            Some(m) => {
                if let Some(g) = grids.iter().find(|&&g| m % g != 0) {
                    return Err(AppError::Config(format!(
                        "macro_resolution = {m} is not a multiple of the micro grid with {g} divisions"
                    )));
                }
                m
            }
            None if grids.is_empty() => 64,
            None if lcm > 4096 => {
                return Err(AppError::Config(format!(
                    "the micro grids need a common macro mesh with {lcm} divisions; set macro_resolution or choose nested eps values"
                )))
            }
            None => lcm,
        };
        Ok(HierarchyOptions {
            picard: self.picard_options(),
            linear_tol: self.solver.linear_tol,
            compat_tol: self.solver.compat_tol,
            load_compat_tol: self.solver.load_compat_tol,
            macro_resolution,
            ..Default::default()
        })
    }

    pub fn run_name(&self) -> &str {
        self.name.as_deref().unwrap_or("default")
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schema_version": 1,
        "geometry": { "hole_half_width": 0.25, "n": 8 },
        "coefficient": { "kind": "layered", "a": 1.0, "b": 4.0 },
        "reaction": { "kind": "linear", "lambda": 0.1, "source": 1.0 }
    }"#;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.sweep.eps.len(), 4);
        assert_eq!(c.expansion.order, 2);
        assert_eq!(c.hierarchy_options().unwrap().macro_resolution, 256);
        assert_eq!(c.coefficient_spec().unwrap().alpha, 1.0);
        assert_eq!(c.reaction_spec().unwrap().lipschitz, 0.1);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = MINIMAL.replace("\"n\": 8", "\"n\": 8, \"holes\": 2");
        assert!(matches!(ExperimentConfig::from_json(&bad), Err(AppError::Config(_))));
        let bad = MINIMAL.replace("\"source\": 1.0", "\"source\": 1.0, \"exponent\": 2");
        assert!(ExperimentConfig::from_json(&bad).is_err());
    }

    #[test]
    fn understated_lipschitz_is_rejected() {
        let bad = MINIMAL.replace("\"source\": 1.0", "\"source\": 1.0, \"lipschitz\": 0.05");
        let e = ExperimentConfig::from_json(&bad).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn eps_must_be_reciprocal_integers() {
        let bad = MINIMAL.replace("\"schema_version\": 1,", "\"schema_version\": 1, \"sweep\": { \"eps\": [0.3, 0.1, 0.05] },");
        assert!(ExperimentConfig::from_json(&bad).is_err());
    }

    #[test]
    fn misaligned_hole_reports_valid_resolution() {
        let bad = MINIMAL.replace("\"n\": 8", "\"n\": 6");
        let msg = ExperimentConfig::from_json(&bad).unwrap_err().to_string();
        assert!(msg.contains("n = 4"), "{msg}");
    }
}
