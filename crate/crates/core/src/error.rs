use thiserror::Error;

/// Errors raised by mesh generation, operator setup, time stepping and analysis.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("geometry error in element {element}: {msg}")]
    Geometry { element: usize, msg: String },

    #[error("operator error in element {element}: {msg}")]
    Operator { element: usize, msg: String },

    #[error("non-finite value in element {element} at time {time}")]
    NonFinite { element: usize, time: f64 },

    #[error("instability detected at time {time}: energy {energy:.6e} exceeds {limit:.6e}")]
    Instability { time: f64, energy: f64, limit: f64 },

    #[error("analysis error: {0}")]
    Analysis(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors that stem from an unstable or blown-up simulation.
    pub fn is_numerical_instability(&self) -> bool {
        matches!(self, Error::NonFinite { .. } | Error::Instability { .. })
    }

    pub fn is_mesh_error(&self) -> bool {
        matches!(
            self,
            Error::Mesh(_) | Error::Parse { .. } | Error::Geometry { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
