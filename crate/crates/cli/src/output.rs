use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use tempfile::NamedTempFile;

use crate::failure::Failure;

/// Writes `path` through a temporary file in the same directory, so a
/// failed command never leaves a truncated output behind.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<(), Failure>
where
    F: FnOnce(&mut dyn Write) -> Result<(), Failure>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let shown = path.display();
    let tmp = NamedTempFile::new_in(dir).map_err(|e| Failure::io(&shown, e))?;
    let mut w = BufWriter::new(tmp);
    fill(&mut w)?;
    let tmp = w.into_inner().map_err(|e| Failure::io(&shown, e.error()))?;
    tmp.as_file()
        .sync_all()
        .map_err(|e| Failure::io(&shown, e))?;
    // Temporary files are created owner-only.
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        fs::set_permissions(tmp.path(), fs::Permissions::from_mode(0o644))
            .map_err(|e| Failure::io(&shown, e))?;
    }
    tmp.persist(path)
        .map_err(|e| Failure::io(&shown, e.error))?;
    Ok(())
}

pub fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::io(dir.display(), e))
}
