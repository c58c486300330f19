use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const MANIFEST_NAME: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommandEntry {
    pub config_sha256: String,
    pub files: Vec<FileEntry>,
}

/// Produced files per command; later runs of a command replace its entry.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub commands: BTreeMap<String, CommandEntry>,
}

/// Collects the files written by one command.
#[derive(Debug)]
pub struct Outputs {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Writes `bytes` to `name` under the output directory.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
        self.record(name, bytes);
        Ok(path)
    }

    /// Registers a file written elsewhere under the output directory.
    pub fn record(&mut self, name: &str, bytes: &[u8]) {
        self.files.retain(|f| f.path != name);
        self.files.push(FileEntry {
            path: name.to_owned(),
            sha256: sha256_hex(bytes),
        });
    }

    pub fn files(&self) -> &[FileEntry] {
        &self.files
    }

    /// Merges this command's files into the directory manifest.
    pub fn finish(self, command: &str, config_bytes: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(MANIFEST_NAME);
        let mut manifest: Manifest = match std::fs::read(&path) {
            Ok(b) => serde_json::from_slice(&b).unwrap_or_default(),
            Err(_) => Manifest::default(),
        };
        manifest.commands.insert(
            command.to_owned(),
            CommandEntry {
                config_sha256: sha256_hex(config_bytes),
                files: self.files,
            },
        );
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        std::fs::write(&path, bytes).map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn commands_merge() {
        let dir = tempfile::tempdir().unwrap();
        let mut a = Outputs::new(dir.path()).unwrap();
        a.write("a.txt", b"1").unwrap();
        a.finish("one", b"cfg").unwrap();
        let mut b = Outputs::new(dir.path()).unwrap();
        b.write("b.txt", b"2").unwrap();
        b.finish("two", b"cfg").unwrap();
        let m: Manifest = serde_json::from_slice(&std::fs::read(dir.path().join(MANIFEST_NAME)).unwrap()).unwrap();
        assert_eq!(m.commands.len(), 2);
        assert_eq!(m.commands["one"].files[0].path, "a.txt");
    }
}
