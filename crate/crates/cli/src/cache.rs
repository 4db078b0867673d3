//! Content-addressed store of rendered reports.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::report::VERSION;

pub struct Cache {
    dir: PathBuf,
}

pub struct Entry {
    pub output: String,
    pub exit: i32,
}

pub fn key(subcommand: &str, config: &Value) -> String {
    let mut h = Sha256::new();
    h.update(subcommand.as_bytes());
    h.update([0]);
    h.update(config.to_string().as_bytes());
    h.update([0]);
    h.update(VERSION.as_bytes());
    hex::encode(h.finalize())
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Cache { dir: dir.into() }
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// A missing or unreadable entry is a miss.
    pub fn get(&self, key: &str) -> Option<Entry> {
        let text = fs::read_to_string(self.path(key)).ok()?;
        let v: Value = serde_json::from_str(&text).ok()?;
        Some(Entry {
            output: v.get("output")?.as_str()?.to_string(),
            exit: v.get("exit")?.as_i64()? as i32,
        })
    }

    pub fn put(&self, key: &str, entry: &Entry) -> io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        let tmp = self.dir.join(format!(".{key}.tmp"));
        fs::write(&tmp, json!({"exit": entry.exit, "output": entry.output}).to_string())?;
        fs::rename(tmp, self.path(key))
    }
}
