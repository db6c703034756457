//! Front-end failure type, kept deliberately flat: everything in here is a
//! usage or configuration problem and maps to exit code 2. A failed
//! `verify` check is not an error — it is a normal outcome reported through
//! exit code 1 — so it does not appear in this enum.

use std::path::PathBuf;

use thiserror::Error;

/// Any condition that prevents a command from running to completion.
#[derive(Debug, Error)]
pub enum CliError {
    /// The configuration document is structurally or semantically invalid.
    #[error("config: {0}")]
    Config(String),

    /// The library rejected the configured inputs (bad geometry, an
    /// unresolvable basis request, a non-physical profile, …).
    #[error(transparent)]
    Module(#[from] prolate_squeeze::Error),

    /// A filesystem operation failed, tagged with the path involved.
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    /// Shorthand for wrapping an I/O failure together with its path.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
