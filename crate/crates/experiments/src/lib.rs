//! Experiment drivers for the Gabor-frame multipulse sampler: the frame
//! comparison table, the noise sweep, the quantization sweep and a single
//! demonstration run.

pub mod config;
pub mod pipeline;
pub mod runs;
pub mod svg;

use std::path::Path;

use thiserror::Error;

pub use config::{Config, ConfigError, FrameChoice};
pub use runs::{run, write_outputs, Experiment, Report};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Numerical {
        context: String,
        source: xsampler_core::Error,
    },
    #[error("cannot write {path}: {source}")]
    Output { path: String, source: xsampler_core::Error },
}

impl RunError {
    pub fn numerical(context: impl Into<String>, source: xsampler_core::Error) -> Self {
        RunError::Numerical {
            context: context.into(),
            source,
        }
    }

    pub fn output(path: &Path, source: xsampler_core::Error) -> Self {
        RunError::Output {
            path: path.display().to_string(),
            source,
        }
    }

    /// Process exit status: 2 for configuration problems, 3 for numerical
    /// failures, 1 when the results cannot be written.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical { .. } => 3,
            RunError::Output { .. } => 1,
        }
    }
}
