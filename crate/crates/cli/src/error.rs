use std::path::PathBuf;
use std::process::ExitCode;

use rise_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{stage}: {source}")]
    Core {
        stage: &'static str,
        #[source]
        source: CoreError,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("roundtrip error {error:e} exceeds bound {bound:e}")]
    Bound { error: f64, bound: f64 },
}

impl CliError {
    /// 1 bound exceeded, 2 usage (clap), 3 parameters, 4 malformed file,
    /// 5 frame, 6 I/O, 7 config, 8 any other library error.
    pub fn exit_code(&self) -> ExitCode {
        let code = match self {
            CliError::Bound { .. } => 1,
            CliError::Core { source, .. } => match source {
                CoreError::InvalidParams(_)
                | CoreError::ParamsMismatch(_)
                | CoreError::NoPrimeFound { .. }
                | CoreError::InvalidModulus { .. }
                | CoreError::InvalidDegree(_)
                | CoreError::InvalidPlan(_)
                | CoreError::ConfigMismatch(_) => 3,
                CoreError::Format(_) => 4,
                CoreError::InvalidFrame(_) => 5,
                _ => 8,
            },
            CliError::Io { .. } => 6,
            CliError::Config(_) => 7,
        };
        ExitCode::from(code)
    }
}

/// Tags library errors with the pipeline stage they came from.
pub trait Stage<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError>;
}

impl<T> Stage<T> for Result<T, CoreError> {
    fn stage(self, stage: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Core { stage, source })
    }
}

pub fn read(path: &PathBuf) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|source| CliError::Io { path: path.clone(), source })
}

pub fn write(path: &PathBuf, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    }
    std::fs::write(path, bytes).map_err(|source| CliError::Io { path: path.clone(), source })
}
