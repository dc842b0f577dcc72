use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

use crate::picard::IterationTrace;

pub type Result<T> = core::result::Result<T, Error>;

/// Failure modes of the numerical pipeline.
///
/// The variants map one-to-one onto the error classes surfaced by the
/// command line (`Kappa`, `Compat`, `NoConv`/`NoConvPicard`); everything
/// else is an input error.
#[derive(Debug, Clone)]
pub enum Error {
    /// Cell geometry violates a structural rule.
    InvalidGeometry(String),
    /// The hole boundary does not fall on grid lines.
    Misaligned {
        hole_half_width: f64,
        n: usize,
        smallest_valid_n: Option<usize>,
    },
    /// Two meshes or fields that must share a resolution do not.
    ResolutionMismatch(String),
    /// Coefficient outside of its declared ellipticity bracket.
    InvalidCoefficient(String),
    /// Reaction does not satisfy its declared Lipschitz constant.
    InvalidReaction(String),
    /// Inconsistent or unsupported parameters.
    InvalidInput(String),
    /// Contraction factor `C_p L / alpha` is not below one.
    Kappa { kappa_p: f64, c_p: f64 },
    /// Source of a pure Neumann/periodic problem does not have zero mean.
    Compat { defect: f64, threshold: f64 },
    /// Linear solver hit its iteration cap.
    NoConv { iterations: usize, residual: f64 },
    /// Fixed-point iteration hit its iteration cap.
    NoConvPicard { trace: Box<IterationTrace> },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidGeometry(msg) => write!(f, "invalid geometry: {msg}"),
            Error::Misaligned { hole_half_width, n, smallest_valid_n } => {
                write!(f, "hole half width {hole_half_width} times resolution {n} is not an integer")?;
                match smallest_valid_n {
                    Some(m) => write!(f, "; smallest valid resolution is n = {m}"),
                    None => write!(f, "; no even resolution up to 65536 aligns with this hole"),
                }
            }
            Error::ResolutionMismatch(msg) => write!(f, "resolution mismatch: {msg}"),
            Error::InvalidCoefficient(msg) => write!(f, "invalid coefficient: {msg}"),
            Error::InvalidReaction(msg) => write!(f, "invalid reaction: {msg}"),
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::Kappa { kappa_p, c_p } => write!(
                f,
                "contraction condition violated: kappa_p = {kappa_p:.6} >= 1 (C_p = {c_p:.6})"
            ),
            Error::Compat { defect, threshold } => write!(
                f,
                "incompatible source for a pure Neumann/periodic problem: mean defect {defect:.3e} exceeds {threshold:.3e}"
            ),
            Error::NoConv { iterations, residual } => write!(
                f,
                "linear solver did not converge after {iterations} iterations (relative residual {residual:.3e})"
            ),
            Error::NoConvPicard { trace } => write!(
                f,
                "fixed-point iteration did not converge after {} iterations (last increment {:.3e})",
                trace.iterations,
                trace.increments.last().copied().unwrap_or(f64::NAN)
            ),
        }
    }
}

impl core::error::Error for Error {}
