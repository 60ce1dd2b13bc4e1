//! Output files are written to a temporary sibling and renamed into place.

use std::io::Write;
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use crate::error::{Error, Result};

fn staged(path: &Path, contents: &[u8]) -> Result<NamedTempFile> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(tmp.path(), e))?;
    Ok(tmp)
}

pub fn write_atomic(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    staged(path, contents.as_ref())?
        .persist(path)
        .map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Stages every file before renaming any, so a failure while writing
/// leaves none of them behind.
pub fn write_all_atomic(files: &[(PathBuf, String)]) -> Result<()> {
    let staged = files
        .iter()
        .map(|(p, c)| staged(p, c.as_bytes()))
        .collect::<Result<Vec<_>>>()?;
    for ((path, _), tmp) in files.iter().zip(staged) {
        tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    }
    Ok(())
}
