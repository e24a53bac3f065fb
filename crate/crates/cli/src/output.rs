//! Atomic file output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ap_staggered::grid::write_plane_csv;
use ap_staggered::{GridGeometry, PlaneKind, RField};

use crate::error::CliError;

/// Writes `bytes` to a temporary sibling and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let name = path
        .file_name()
        .ok_or_else(|| CliError::Config(format!("{} is not a file path", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = fs::File::create(&tmp)
        .and_then(|mut f| {
            f.write_all(bytes)?;
            f.sync_all()
        })
        .and_then(|_| fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(CliError::io(path, e));
    }
    Ok(())
}

/// Writes the vertex and center planes of `rho` as `<stem>_vertex.csv` and
/// `<stem>_center.csv`.
pub fn write_density(dir: &Path, stem: &str, rho: &RField, g: &GridGeometry) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    for (kind, values) in [(PlaneKind::Vertex, &rho.vertex), (PlaneKind::Center, &rho.center)] {
        let path = dir.join(format!("{stem}_{kind}.csv"));
        let mut buf = Vec::new();
        write_plane_csv(&mut buf, g, kind, values).map_err(|e| CliError::io(&path, e))?;
        write_atomic(&path, &buf)?;
        written.push(path);
    }
    Ok(written)
}
