//! Artifact directory with a content-hash MANIFEST.
//!
//! The MANIFEST is written as `status = INCOMPLETE` before anything else, so
//! a run that dies part-way leaves that marker behind. [`OutputDir::finish`]
//! rewrites it with the final status and one `sha256  path` line per file.

use anyhow::{Context, Result};
use rwl_core::io::{write_csv, write_scalar_field, write_vector_field};
use rwl_core::{ScalarField, VectorField};
use sha2::{Digest, Sha256};
use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

pub const MANIFEST: &str = "MANIFEST";

pub struct OutputDir {
    root: PathBuf,
    files: BTreeSet<PathBuf>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        let out = OutputDir {
            root: root.to_path_buf(),
            files: BTreeSet::new(),
        };
        fs::write(root.join(MANIFEST), "status = INCOMPLETE\n")?;
        Ok(out)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Absolute path for `rel`, creating parent directories.
    fn prepare(&self, rel: &Path) -> Result<PathBuf> {
        let p = self.root.join(rel);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent)?;
        }
        Ok(p)
    }

    fn record(&mut self, rel: &Path) {
        self.files.insert(rel.to_path_buf());
    }

    pub fn text(&mut self, rel: impl AsRef<Path>, text: &str) -> Result<()> {
        let rel = rel.as_ref();
        fs::write(self.prepare(rel)?, text).with_context(|| format!("writing {}", rel.display()))?;
        self.record(rel);
        Ok(())
    }

    pub fn csv(&mut self, rel: impl AsRef<Path>, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
        let rel = rel.as_ref();
        write_csv(&self.prepare(rel)?, header, rows).with_context(|| format!("writing {}", rel.display()))?;
        self.record(rel);
        Ok(())
    }

    pub fn field(&mut self, rel: impl AsRef<Path>, f: &ScalarField) -> Result<()> {
        let rel = rel.as_ref();
        write_scalar_field(&self.prepare(rel)?, f).with_context(|| format!("writing {}", rel.display()))?;
        self.record(rel);
        Ok(())
    }

    /// Writes `dir/prefix_1.rwl`, `dir/prefix_2.rwl`, ...
    pub fn vector(&mut self, dir: impl AsRef<Path>, prefix: &str, v: &VectorField) -> Result<()> {
        let dir = dir.as_ref();
        let abs = self.prepare(&dir.join("x"))?;
        let written = write_vector_field(abs.parent().expect("has parent"), prefix, v)
            .with_context(|| format!("writing {}/{prefix}_*", dir.display()))?;
        for p in written {
            let name = p.file_name().expect("file name").to_owned();
            self.record(&dir.join(name));
        }
        Ok(())
    }

    /// Rewrites the MANIFEST with `status` and the hash of every recorded
    /// file, sorted by path.
    pub fn finish(&self, complete: bool) -> Result<()> {
        let mut text = format!("status = {}\n", if complete { "COMPLETE" } else { "INCOMPLETE" });
        for rel in &self.files {
            let bytes = fs::read(self.root.join(rel)).with_context(|| format!("hashing {}", rel.display()))?;
            let digest = Sha256::digest(&bytes);
            let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
            text.push_str(&format!("{hex}  {}\n", rel.to_string_lossy().replace('\\', "/")));
        }
        fs::write(self.root.join(MANIFEST), text)?;
        Ok(())
    }
}

/// Directory-name form of a parameter value, e.g. `eps_0.05`.
pub fn tag(name: &str, value: f64) -> String {
    format!("{name}_{value}")
}
