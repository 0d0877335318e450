use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("cannot parse config: {0}")]
    Parse(String),

    #[error("{path}: {message}")]
    Config { path: String, message: String },

    /// A numerical precondition failed; `path` names the config field that fed it.
    #[error("{path}: {cause}")]
    Core { path: String, cause: semitrace_core::Error },

    #[error("{}: {cause}", path.display())]
    Io { path: PathBuf, cause: std::io::Error },
}

impl HarnessError {
    pub fn config(path: &str, message: String) -> Self {
        HarnessError::Config { path: path.into(), message }
    }
}

/// Attaches a config path to core errors: `.map_err(at("window"))`.
pub(crate) fn at(path: &str) -> impl Fn(semitrace_core::Error) -> HarnessError + '_ {
    move |cause| HarnessError::Core { path: path.into(), cause }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
