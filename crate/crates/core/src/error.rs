use std::path::PathBuf;

/// Errors produced by the registration and fusion pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument or configuration value violates its documented constraint.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// The file was readable but its contents are not a supported image or transform.
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    /// Least-squares fit on a configuration that does not determine the model.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// The transform has no inverse.
    #[error("transform is singular (det = {det:e})")]
    SingularTransform { det: f64 },

    /// Registration could not produce a transform; `stage` names the step that failed.
    #[error("registration failed at {stage}: {message}")]
    Registration { stage: String, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn registration(stage: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Registration {
            stage: stage.into(),
            message: message.into(),
        }
    }

    /// True for failures of the algorithm itself, as opposed to bad input or I/O.
    pub fn is_algorithmic(&self) -> bool {
        matches!(
            self,
            Error::DegenerateFit(_) | Error::SingularTransform { .. } | Error::Registration { .. }
        )
    }
}
