//! All-or-nothing output: files are staged next to their destination and
//! renamed into place only on [`Staging::commit`]. Dropping an uncommitted
//! staging area deletes whatever it wrote.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

#[derive(Debug, Default)]
pub struct Staging {
    pending: Vec<(PathBuf, PathBuf)>,
    committed: bool,
}

fn tmp_path(dest: &Path) -> PathBuf {
    let name = dest.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    dest.with_file_name(format!(".{name}.tmp-{}", std::process::id()))
}

impl Staging {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn write(&mut self, dest: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
        let dest = dest.as_ref().to_path_buf();
        if let Some(dir) = dest.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)
                .with_context(|| format!("cannot create directory {}", dir.display()))?;
        }
        if self.pending.iter().any(|(d, _)| *d == dest) {
            anyhow::bail!("{} staged twice", dest.display());
        }
        let tmp = tmp_path(&dest);
        // Register first so a failed write is still cleaned up.
        self.pending.push((dest, tmp.clone()));
        let mut f = fs::File::create(&tmp).with_context(|| format!("cannot write {}", tmp.display()))?;
        f.write_all(bytes).with_context(|| format!("cannot write {}", tmp.display()))?;
        f.sync_all().ok();
        Ok(())
    }

    pub fn write_str(&mut self, dest: impl AsRef<Path>, text: &str) -> Result<()> {
        self.write(dest, text.as_bytes())
    }

    pub fn len(&self) -> usize {
        self.pending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }

    /// Renames every staged file into place, returning the final paths.
    pub fn commit(mut self) -> Result<Vec<PathBuf>> {
        let mut done = Vec::with_capacity(self.pending.len());
        for (dest, tmp) in &self.pending {
            fs::rename(tmp, dest)
                .with_context(|| format!("cannot move {} into place", dest.display()))?;
            done.push(dest.clone());
        }
        self.committed = true;
        Ok(done)
    }
}

impl Drop for Staging {
    fn drop(&mut self) {
        if !self.committed {
            for (_, tmp) in &self.pending {
                let _ = fs::remove_file(tmp);
            }
        }
    }
}
