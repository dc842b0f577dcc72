use std::io;
use std::path::PathBuf;

use homlab_core::Error as CoreError;

pub type Result<T, E = AppError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("gate failed: {0}")]
    Gate(String),
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> Self {
        let path = path.into();
        move |source| AppError::Io { path, source }
    }

    /// 0 ok, 1 i/o, 2 config, 3 KAPPA, 4 COMPAT, 5 NOCONV, 6 gate.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Io { .. } => 1,
            AppError::Config(_) => 2,
            AppError::Core(e) => match e {
                CoreError::Kappa { .. } => 3,
                CoreError::Compat { .. } => 4,
                CoreError::NoConv { .. } | CoreError::NoConvPicard { .. } => 5,
                _ => 2,
            },
            AppError::Gate(_) => 6,
        }
    }

    /// Short class name printed in front of the message.
    pub fn class(&self) -> &'static str {
        match self.exit_code() {
            1 => "IO",
            2 => "CONFIG",
            3 => "KAPPA",
            4 => "COMPAT",
            5 => "NOCONV",
            _ => "GATE",
        }
    }
}
