//! Error type shared by the IO layer, the driver, and the CLI.

use std::path::PathBuf;

#[derive(thiserror::Error, Debug)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Format { path: PathBuf, line: usize, message: String },
    #[error("{}: empty file", path.display())]
    EmptyFile { path: PathBuf },
    #[error("{}: expected header `{expected}`, got `{got}`", path.display())]
    Header { path: PathBuf, expected: String, got: String },
    #[error("config: {0}")]
    Config(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Price(#[from] earnvol_core::price::PriceError),
    #[error(transparent)]
    Vol(#[from] earnvol_core::vol::VolError),
    #[error(transparent)]
    Table(#[from] earnvol_core::table::TableError),
    #[error(transparent)]
    Baseline(#[from] earnvol_core::baseline::BaselineError),
    #[error(transparent)]
    Embed(#[from] earnvol_core::embed::EmbedError),
    #[error(transparent)]
    Drift(#[from] earnvol_core::drift::DriftError),
    #[error(transparent)]
    Eval(#[from] earnvol_core::report::EvalError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
        let path = path.into();
        move |source| Error::Io { path, source }
    }

    /// Process exit status: 1 for usage problems, 2 for data problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
