//! Run directories: manifest first, then data; everything created is
//! removed again if the command fails.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{io_err, user, CliError};

pub const MANIFEST: &str = "manifest.txt";

/// Writes via a temporary sibling and a rename, so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let tmp = path.with_file_name(format!(
        ".{}.tmp",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("out")
    ));
    fs::write(&tmp, contents).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

/// Tracks what a command created under an output directory.
pub struct OutputDir {
    root: PathBuf,
    created_root: bool,
    created: Vec<PathBuf>,
    committed: bool,
}

impl OutputDir {
    /// The directory may be new, empty, or a previous run of this tool (it
    /// holds a manifest); anything else is refused rather than mixed into.
    pub fn prepare(root: &Path) -> Result<Self, CliError> {
        let created_root = !root.exists();
        if created_root {
            fs::create_dir_all(root).map_err(io_err(root))?;
        } else {
            if !root.is_dir() {
                return Err(user(format!("{} exists and is not a directory", root.display())));
            }
            let empty = fs::read_dir(root).map_err(io_err(root))?.next().is_none();
            if !empty && !root.join(MANIFEST).exists() {
                return Err(user(format!(
                    "{} is not empty and holds no {MANIFEST}; refusing to write into it",
                    root.display()
                )));
            }
        }
        Ok(Self {
            root: root.to_path_buf(),
            created_root,
            created: Vec::new(),
            committed: false,
        })
    }

    /// Removes a previous run's copy of `rel` and registers it for cleanup.
    pub fn claim(&mut self, rel: &str) -> Result<PathBuf, CliError> {
        let path = self.root.join(rel);
        if path.is_dir() {
            fs::remove_dir_all(&path).map_err(io_err(&path))?;
        } else if path.exists() {
            fs::remove_file(&path).map_err(io_err(&path))?;
        }
        self.created.push(path.clone());
        Ok(path)
    }

    pub fn claim_dir(&mut self, rel: &str) -> Result<PathBuf, CliError> {
        let path = self.claim(rel)?;
        fs::create_dir_all(&path).map_err(io_err(&path))?;
        Ok(path)
    }

    pub fn write(&mut self, rel: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.claim(rel)?;
        write_atomic(&path, contents)?;
        Ok(path)
    }

    pub fn commit(mut self) {
        self.committed = true;
    }
}

impl Drop for OutputDir {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        if self.created_root {
            let _ = fs::remove_dir_all(&self.root);
            return;
        }
        for p in self.created.iter().rev() {
            let _ = if p.is_dir() { fs::remove_dir_all(p) } else { fs::remove_file(p) };
        }
    }
}

/// `key = value` lines, the same syntax as parameter files.
pub fn manifest_text(fields: &[(&str, String)]) -> String {
    let mut out = String::from("# vwm run manifest\n");
    for (k, v) in fields {
        out.push_str(&format!("{k} = {v}\n"));
    }
    out
}
