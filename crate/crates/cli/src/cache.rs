//! On-disk cache of rendered command output, keyed by a SHA-256 of the run parameters.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub passed: bool,
    pub output: String,
}

pub struct Cache {
    dir: PathBuf,
}

/// Hex SHA-256 of the canonical JSON of the key fields.
pub fn key(fields: &Value) -> String {
    let bytes = serde_json::to_vec(fields).expect("json values serialize");
    hex::encode(Sha256::digest(&bytes))
}

impl Cache {
    pub fn open(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
        })
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// A missing or unreadable entry is a miss.
    pub fn get(&self, key: &str) -> Option<Entry> {
        let bytes = fs::read(self.path(key)).ok()?;
        serde_json::from_slice(&bytes).ok()
    }

    pub fn put(&self, key: &str, entry: &Entry) -> io::Result<()> {
        let tmp = self.dir.join(format!("{key}.tmp"));
        fs::write(&tmp, serde_json::to_vec(entry)?)?;
        fs::rename(tmp, self.path(key))
    }
}
