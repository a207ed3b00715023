use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

/// Writes `contents` to `path` through a temporary file in the same
/// directory followed by a rename.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
    let mut tmp = tempfile::Builder::new()
        .prefix(".emi-")
        .suffix(".tmp")
        .tempfile_in(dir)
        .map_err(|e| CliError::io(format!("creating temporary file in {}", dir.display()), e))?;
    tmp.write_all(contents.as_bytes())
        .and_then(|_| tmp.as_file().sync_all())
        .map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
    tmp.persist(path)
        .map_err(|e| CliError::io(format!("renaming into {}", path.display()), e.error))?;
    Ok(())
}

/// `YYYYmmddTHHMMSSZ` in UTC.
pub fn timestamp_now() -> String {
    chrono::Utc::now().format("%Y%m%dT%H%M%SZ").to_string()
}

/// Validates a user-supplied stamp so it is safe inside a file name.
pub fn check_stamp(stamp: &str) -> CliResult<()> {
    if !stamp.is_empty() && stamp.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
        Ok(())
    } else {
        Err(CliError::Config(format!(
            "timestamp '{stamp}' may only contain letters, digits, '-' and '_'"
        )))
    }
}

/// `<dir>/<preset>_<stamp>.csv` and `.md`.
pub fn report_paths(dir: &Path, preset: &str, stamp: &str) -> (PathBuf, PathBuf) {
    let base = format!("{preset}_{stamp}");
    (dir.join(format!("{base}.csv")), dir.join(format!("{base}.md")))
}
