//! All-or-nothing file output.
//!
//! Files are staged in memory and written at the end. Each one goes to a
//! temporary file next to its destination and is renamed into place; if
//! any write fails, files already renamed in this batch are removed.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

#[derive(Debug)]
pub struct WriteError {
    pub path: PathBuf,
    pub source: std::io::Error,
}

#[derive(Default)]
pub struct OutputBatch {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl OutputBatch {
    pub fn add(&mut self, path: impl Into<PathBuf>, contents: impl Into<Vec<u8>>) {
        self.files.push((path.into(), contents.into()));
    }

    pub fn paths(&self) -> impl Iterator<Item = &Path> {
        self.files.iter().map(|(p, _)| p.as_path())
    }

    pub fn commit(self) -> Result<(), WriteError> {
        let mut written: Vec<PathBuf> = Vec::new();
        for (path, contents) in &self.files {
            if let Err(source) = write_atomic(path, contents) {
                for done in &written {
                    let _ = std::fs::remove_file(done);
                }
                return Err(WriteError {
                    path: path.clone(),
                    source,
                });
            }
            written.push(path.clone());
        }
        Ok(())
    }
}

fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Inserts `.tag` before the extension: `out.pgm` -> `out.old.pgm`.
pub fn tagged(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default();
    let mut name = OsString::from(stem);
    name.push(".");
    name.push(tag);
    if let Some(ext) = path.extension() {
        name.push(".");
        name.push(ext);
    }
    path.with_file_name(name)
}

/// Profile CSV path derived from an image path: `out.pgm` + `row:3` ->
/// `out.profile-row-3.csv`.
pub fn profile_path(image: &Path, spec: &str) -> PathBuf {
    let stem = image.file_stem().unwrap_or_default();
    let mut name = OsString::from(stem);
    name.push(format!(".profile-{}.csv", spec.replace(':', "-")));
    image.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tagging() {
        assert_eq!(
            tagged(Path::new("dir/out.pgm"), "old"),
            PathBuf::from("dir/out.old.pgm")
        );
        assert_eq!(
            tagged(Path::new("t.csv"), "new"),
            PathBuf::from("t.new.csv")
        );
        assert_eq!(
            tagged(Path::new("trace"), "new"),
            PathBuf::from("trace.new")
        );
        assert_eq!(
            profile_path(Path::new("a/out.old.pgm"), "row:3"),
            PathBuf::from("a/out.old.profile-row-3.csv")
        );
    }

    #[test]
    fn failed_batch_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("a.txt");
        let mut batch = OutputBatch::default();
        batch.add(&good, b"x".to_vec());
        batch.add(dir.path().join("missing/b.txt"), b"y".to_vec());
        let err = batch.commit().unwrap_err();
        assert!(err.path.ends_with("missing/b.txt"));
        assert!(!good.exists());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }
}
