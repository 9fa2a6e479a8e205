//! Output directory resolution and file-writing helpers.

use std::path::{Path, PathBuf};

use crate::error::CliError;

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "HAWKBIAS_OUT";

/// Resolves the output directory: an explicit `--out` wins, then
/// `$HAWKBIAS_OUT/<default_name>`, then `./<default_name>`.
pub fn resolve_dir(explicit: Option<PathBuf>, default_name: &str) -> PathBuf {
    match explicit {
        Some(path) => path,
        None => match std::env::var_os(OUT_ENV) {
            Some(root) => PathBuf::from(root).join(default_name),
            None => PathBuf::from(default_name),
        },
    }
}

/// Creates the directory (and parents) if needed.
pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::io(dir, source))
}

/// Writes text content to `dir/name`.
pub fn write_text(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|source| CliError::io(path, source))
}

/// Writes a value as pretty-printed JSON with a trailing newline.
///
/// serde_json renders non-finite floats as `null`, so outputs never contain
/// NaN or infinity tokens.
pub fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|err| CliError::numerical(format!("serializing {name}: {err}")))?;
    text.push('\n');
    write_text(dir, name, &text)
}

/// Reads a file into a string.
pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::io(path, source))
}
