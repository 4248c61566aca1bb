use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        source: netinfer_core::Error,
    },
}

impl Error {
    /// Process exit code: 1 configuration, 2 I/O or input format, 3 stage failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Io { .. } | Error::Parse { .. } => 2,
            Error::Stage { .. } => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Maps a core error raised while running `stage`. Configuration
    /// problems keep their own exit code.
    pub fn stage(stage: &'static str, source: netinfer_core::Error) -> Self {
        match source {
            netinfer_core::Error::InvalidConfig(m) | netinfer_core::Error::Infeasible(m) => {
                Error::Config(m)
            }
            source => Error::Stage { stage, source },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
