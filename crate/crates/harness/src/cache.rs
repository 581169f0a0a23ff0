//! Content-addressed store of check results.
//!
//! A key hashes the check id, the set's content hash, the parameters and the
//! schema version. Entries are written to a temporary file and renamed into
//! place, so readers never see a partial entry.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::SCHEMA_VERSION;

pub const CACHE_ENV: &str = "SUMPRODLAB_CACHE_DIR";
pub const DEFAULT_DIR: &str = ".sumprodlab-cache";

#[derive(Debug)]
pub struct Cache {
    dir: PathBuf,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Cache { dir: dir.into(), hits: AtomicU64::new(0), misses: AtomicU64::new(0) }
    }

    pub fn from_env() -> Self {
        Cache::new(std::env::var_os(CACHE_ENV).map(PathBuf::from).unwrap_or_else(|| DEFAULT_DIR.into()))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(check: &str, set_hash: &str, params: &impl Serialize) -> String {
        let mut h = Sha256::new();
        for part in [check, set_hash, &serde_json::to_string(params).expect("params serialise")] {
            h.update(part.as_bytes());
            h.update([0]);
        }
        h.update(SCHEMA_VERSION.to_le_bytes());
        hex::encode(h.finalize())
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(&key[..2]).join(format!("{key}.json"))
    }

    /// A stored entry, or `None` on a miss. Unreadable entries count as misses.
    pub fn get<T: DeserializeOwned>(&self, key: &str) -> Option<T> {
        let found = fs::read(self.path(key)).ok().and_then(|b| serde_json::from_slice(&b).ok());
        let counter = if found.is_some() { &self.hits } else { &self.misses };
        counter.fetch_add(1, Ordering::Relaxed);
        found
    }

    pub fn put<T: Serialize + ?Sized>(&self, key: &str, value: &T) -> Result<()> {
        let path = self.path(key);
        let parent = path.parent().expect("entries live in a shard directory");
        fs::create_dir_all(parent)?;
        let tmp = parent.join(format!(".{key}.{}.{:?}.tmp", std::process::id(), std::thread::current().id()));
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&serde_json::to_vec(value)?)?;
        f.sync_all()?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    /// Deletes every entry; returns how many were removed.
    pub fn purge(&self) -> Result<usize> {
        if !self.dir.exists() {
            return Ok(0);
        }
        let mut n = 0;
        for shard in fs::read_dir(&self.dir)? {
            let shard = shard?.path();
            if !shard.is_dir() {
                continue;
            }
            for entry in fs::read_dir(&shard)? {
                let p = entry?.path();
                if p.extension().is_some_and(|e| e == "json") {
                    n += 1;
                }
                fs::remove_file(p)?;
            }
            fs::remove_dir(shard)?;
        }
        Ok(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::Params;
    use sumprodlab_core::report::Relation;
    use sumprodlab_core::{InequalityReport, Rational};

    fn report() -> InequalityReport {
        InequalityReport::exact("x", &Rational::ONE, Relation::Le, &Rational::from(2i64), "2")
    }

    #[test]
    fn round_trip_and_purge() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        let k = Cache::key("solymosi", "abc", &Params::default());
        assert_eq!(k.len(), 64);
        assert!(cache.get::<Vec<InequalityReport>>(&k).is_none());
        cache.put(&k, &[report()]).unwrap();
        assert_eq!(cache.get::<Vec<InequalityReport>>(&k).unwrap(), vec![report()]);
        assert_eq!((cache.hits(), cache.misses()), (1, 1));
        assert_eq!(cache.purge().unwrap(), 1);
        assert!(cache.get::<Vec<InequalityReport>>(&k).is_none());
    }

    #[test]
    fn keys_separate_inputs() {
        let p = Params::default();
        let k = Cache::key("a", "h", &p);
        assert_ne!(k, Cache::key("b", "h", &p));
        assert_ne!(k, Cache::key("a", "g", &p));
        assert_ne!(k, Cache::key("a", "h", &Params { c: Rational::from(2i64), eps: None }));
        assert_eq!(k, Cache::key("a", "h", &p));
    }
}
