use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Manifest problem; `pointer` is a JSON pointer into the manifest (empty for the root).
    #[error("configuration error at {pointer:?}: {msg}")]
    Config { pointer: String, msg: String },
    #[error("i/o error on {path}: {msg}")]
    Io { path: String, msg: String },
}

impl CliError {
    pub fn config(pointer: impl Into<String>, msg: impl Into<String>) -> Self {
        CliError::Config { pointer: pointer.into(), msg: msg.into() }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), msg: e.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        2
    }
}
