use std::path::PathBuf;

use synthreg_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("numeric degeneracy: {0}")]
    Numeric(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<HarnessError>,
    },
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

impl HarnessError {
    /// Process exit code: 2 configuration, 3 data, 4 numeric degeneracy,
    /// 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Data(_) => 3,
            HarnessError::Numeric(_) => 4,
            HarnessError::Io { .. } => 1,
            HarnessError::Context { source, .. } => source.exit_code(),
        }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        HarnessError::Context { context: context.into(), source: Box::new(self) }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }
}

impl From<CoreError> for HarnessError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        match e {
            CoreError::Config(_) | CoreError::Domain(_) | CoreError::Dimension(_) => HarnessError::Config(msg),
            CoreError::Data(_) | CoreError::RankDeficient(_) => HarnessError::Data(msg),
            CoreError::NotPositiveDefinite { .. } | CoreError::NotSymmetric { .. } | CoreError::Degenerate(_) => {
                HarnessError::Numeric(msg)
            }
        }
    }
}

pub(crate) trait ResultExt<T> {
    fn context(self, context: impl FnOnce() -> String) -> Result<T>;
}

impl<T, E: Into<HarnessError>> ResultExt<T> for std::result::Result<T, E> {
    fn context(self, context: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|e| e.into().context(context()))
    }
}
