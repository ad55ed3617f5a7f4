//! Removes whatever a failed command created.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

#[derive(Default)]
pub struct Cleanup {
    files: Vec<PathBuf>,
    dirs: Vec<(PathBuf, bool, BTreeSet<PathBuf>)>,
    committed: bool,
}

fn entries(dir: &Path) -> BTreeSet<PathBuf> {
    std::fs::read_dir(dir).map(|rd| rd.filter_map(|e| e.ok().map(|e| e.path())).collect()).unwrap_or_default()
}

impl Cleanup {
    /// Track `path` if it does not exist yet.
    pub fn file(&mut self, path: &Path) {
        if !path.exists() {
            self.files.push(path.to_path_buf());
        }
    }

    /// Track entries that appear in `dir` from now on.
    pub fn dir(&mut self, dir: &Path) {
        self.dirs.push((dir.to_path_buf(), dir.exists(), entries(dir)));
    }

    pub fn commit(mut self) {
        self.committed = true;
    }
}

impl Drop for Cleanup {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for f in &self.files {
            let _ = std::fs::remove_file(f);
        }
        for (dir, existed, before) in &self.dirs {
            for e in entries(dir).difference(before) {
                log::info!("removing partial output {}", e.display());
                let _ = if e.is_dir() { std::fs::remove_dir_all(e) } else { std::fs::remove_file(e) };
            }
            if !existed {
                let _ = std::fs::remove_dir(dir);
            }
        }
    }
}
