//! Globally Lipschitz volume reactions `R(y, u)`.

use alloc::format;
use alloc::sync::Arc;
use core::f64::consts::PI;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Reaction term evaluated at cell coordinate `y` and state `u`.
pub trait Reaction: Send + Sync {
    fn value(&self, y: [f64; 2], u: f64) -> f64;

    /// Declared global Lipschitz constant in `u`.
    fn lipschitz(&self) -> f64;

    /// Whether the reaction varies with the cell coordinate.
    fn depends_on_cell(&self) -> bool;
}

#[derive(Clone)]
pub enum ReactionKind {
    /// `R = 0`; `L = 0`.
    Zero,
    /// `R = c`; `L = 0`.
    Constant(f64),
    /// `R = λu + s`; `|∂R/∂u| = |λ|`.
    Linear { lambda: f64, source: f64 },
    /// `R = λ sin(2πy₁)(1 + tanh u)`; `|∂R/∂u| = |λ sin(2πy₁)| sech²u ≤ |λ|`.
    SinTanh { lambda: f64 },
    Custom {
        f: Arc<dyn Fn([f64; 2], f64) -> f64 + Send + Sync>,
        cell_dependent: bool,
    },
}

impl fmt::Debug for ReactionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReactionKind::Zero => f.write_str("Zero"),
            ReactionKind::Constant(c) => write!(f, "Constant({c})"),
            ReactionKind::Linear { lambda, source } => write!(f, "Linear {{ lambda: {lambda}, source: {source} }}"),
            ReactionKind::SinTanh { lambda } => write!(f, "SinTanh {{ lambda: {lambda} }}"),
            ReactionKind::Custom { cell_dependent, .. } => write!(f, "Custom {{ cell_dependent: {cell_dependent} }}"),
        }
    }
}

impl ReactionKind {
    /// Lipschitz constant derived for the builtin forms.
    pub fn natural_lipschitz(&self) -> Option<f64> {
        match self {
            ReactionKind::Zero | ReactionKind::Constant(_) => Some(0.0),
            ReactionKind::Linear { lambda, .. } | ReactionKind::SinTanh { lambda } => Some(lambda.abs()),
            ReactionKind::Custom { .. } => None,
        }
    }
}

/// A reaction with its user-declared Lipschitz constant `L`.
#[derive(Clone, Debug)]
pub struct ReactionSpec {
    pub kind: ReactionKind,
    pub lipschitz: f64,
}

impl ReactionSpec {
    pub fn new(kind: ReactionKind, lipschitz: f64) -> Result<Self> {
        if !(lipschitz >= 0.0 && lipschitz.is_finite()) {
            return Err(Error::InvalidReaction(format!("Lipschitz constant must be finite and >= 0, got {lipschitz}")));
        }
        Ok(Self { kind, lipschitz })
    }

    /// Builtin reaction declared with its derived Lipschitz constant.
    pub fn builtin(kind: ReactionKind) -> Result<Self> {
        let l = kind
            .natural_lipschitz()
            .ok_or_else(|| Error::InvalidReaction("custom reactions need an explicit Lipschitz constant".into()))?;
        Self::new(kind, l)
    }

    pub fn zero() -> Self {
        Self { kind: ReactionKind::Zero, lipschitz: 0.0 }
    }

    /// Spot-checks `|R(y,u) - R(y,v)| ≤ L|u - v| + tol` on random pairs
    /// `u, v ∈ [-range, range]`, `y ∈ [0,1)²`. Returns the largest observed
    /// difference quotient.
    pub fn check_lipschitz(&self, seed: u64, samples: usize, range: f64, tol: f64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..samples {
            let y = [rng.gen::<f64>(), rng.gen::<f64>()];
            let u = rng.gen_range(-range..=range);
            let v = rng.gen_range(-range..=range);
            let diff = (self.value(y, u) - self.value(y, v)).abs();
            if (u - v).abs() > 0.0 {
                worst = worst.max(diff / (u - v).abs());
            }
            if diff > self.lipschitz * (u - v).abs() + tol {
                return Err(Error::InvalidReaction(format!(
                    "declared L = {} violated at y = ({:.4}, {:.4}), u = {u:.6}, v = {v:.6}: |R(u) - R(v)| = {diff:.6e}",
                    self.lipschitz, y[0], y[1]
                )));
            }
        }
        Ok(worst)
    }
}

impl Reaction for ReactionSpec {
    fn value(&self, y: [f64; 2], u: f64) -> f64 {
        match &self.kind {
            ReactionKind::Zero => 0.0,
            ReactionKind::Constant(c) => *c,
            ReactionKind::Linear { lambda, source } => lambda * u + source,
            ReactionKind::SinTanh { lambda } => lambda * (2.0 * PI * y[0]).sin() * (1.0 + u.tanh()),
            ReactionKind::Custom { f, .. } => f(y, u),
        }
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn depends_on_cell(&self) -> bool {
        match &self.kind {
            ReactionKind::SinTanh { .. } => true,
            ReactionKind::Custom { cell_dependent, .. } => *cell_dependent,
            _ => false,
        }
    }
}
