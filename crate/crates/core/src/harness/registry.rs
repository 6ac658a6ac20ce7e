use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use crate::error::Result;

use super::record::RunRecord;

/// Environment variable naming the registry root.
pub const REGISTRY_ENV: &str = "TOWERLAB_REGISTRY";
const DEFAULT_ROOT: &str = "towerlab-registry";

/// Append-only directory of run records, one JSON file each.
///
/// Files are created with `create_new`, so an existing record is never
/// replaced; a name clash gets a numeric suffix instead. Appends from one
/// process go through a single lock.
#[derive(Debug)]
pub struct Registry {
    root: PathBuf,
    writer: Mutex<()>,
}

impl Registry {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(Self {
            root,
            writer: Mutex::new(()),
        })
    }

    /// `$TOWERLAB_REGISTRY`, or `./towerlab-registry` when unset.
    pub fn from_env() -> Result<Self> {
        let root = std::env::var_os(REGISTRY_ENV)
            .map_or_else(|| PathBuf::from(DEFAULT_ROOT), PathBuf::from);
        Self::open(root)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn append(&self, record: &RunRecord) -> Result<PathBuf> {
        let body = serde_json::to_vec_pretty(record)?;
        let stamp: String = record
            .started_at
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect();
        let stem = format!("{stamp}-{}-{}", record.kind(), record.short_id());
        let _guard = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        for n in 0.. {
            let name = if n == 0 {
                format!("{stem}.json")
            } else {
                format!("{stem}-{n}.json")
            };
            let path = self.root.join(name);
            match OpenOptions::new().write(true).create_new(true).open(&path) {
                Ok(mut f) => {
                    f.write_all(&body)?;
                    f.write_all(b"\n")?;
                    f.sync_all()?;
                    return Ok(path);
                }
                Err(e) if e.kind() == io::ErrorKind::AlreadyExists => continue,
                Err(e) => return Err(e.into()),
            }
        }
        unreachable!("unbounded suffix search")
    }

    /// All records, ordered by file name (start time first).
    pub fn records(&self) -> Result<Vec<(PathBuf, RunRecord)>> {
        let mut paths: Vec<PathBuf> = fs::read_dir(&self.root)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        paths
            .into_iter()
            .map(|p| {
                let text = fs::read_to_string(&p)?;
                let rec: RunRecord = serde_json::from_str(&text)?;
                Ok((p, rec))
            })
            .collect()
    }
}
