//! Content-addressed record store: one JSON file per cache key, written via
//! a temporary file and an atomic rename.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use log::warn;

use super::record::{cache_key, ExperimentRecord, Params, ARTIFACT_VERSION};

pub const CACHE_DIR_ENV: &str = "PARALAB_CACHE_DIR";

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

#[derive(Clone, Debug)]
pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    pub fn disabled() -> Self {
        Self { dir: None }
    }

    /// Opens `dir`, disabling the cache with a warning if it is not writable.
    pub fn open(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref().to_path_buf();
        let probe = dir.join(format!(".probe-{}", std::process::id()));
        let ok = std::fs::create_dir_all(&dir).and_then(|_| std::fs::write(&probe, b"")).is_ok();
        let _ = std::fs::remove_file(&probe);
        if !ok {
            warn!("cache directory {} is not writable; caching disabled", dir.display());
            return Self::disabled();
        }
        Self { dir: Some(dir) }
    }

    /// `$PARALAB_CACHE_DIR` if set, otherwise `default`.
    pub fn from_env(default: impl AsRef<Path>) -> Self {
        match std::env::var_os(CACHE_DIR_ENV) {
            Some(d) if !d.is_empty() => Self::open(d),
            _ => Self::open(default),
        }
    }

    pub fn is_enabled(&self) -> bool {
        self.dir.is_some()
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn path_for(&self, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{key}.json")))
    }

    pub fn get(&self, experiment: &str, params: &Params) -> Option<ExperimentRecord> {
        let key = cache_key(experiment, params);
        let path = self.path_for(&key)?;
        let text = std::fs::read_to_string(&path).ok()?;
        let record: ExperimentRecord = match serde_json::from_str(&text) {
            Ok(r) => r,
            Err(e) => {
                warn!("ignoring corrupt cache entry {}: {e}", path.display());
                return None;
            }
        };
        if record.version != ARTIFACT_VERSION {
            return None;
        }
        if record.cache_key != key || record.experiment != experiment || &record.params != params {
            warn!("ignoring mismatched cache entry {}", path.display());
            return None;
        }
        Some(record)
    }

    /// Stores `record`; returns whether it was written.
    pub fn put(&self, record: &ExperimentRecord) -> bool {
        let Some(path) = self.path_for(&record.cache_key) else {
            return false;
        };
        let dir = path.parent().expect("cache file has a parent");
        let tmp = dir.join(format!(
            ".{}.{}.{}.tmp",
            record.cache_key,
            std::process::id(),
            TMP_COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        let text = match serde_json::to_string_pretty(record) {
            Ok(t) => t,
            Err(e) => {
                warn!("record not cacheable: {e}");
                return false;
            }
        };
        let res = std::fs::write(&tmp, text).and_then(|_| std::fs::rename(&tmp, &path));
        if let Err(e) = res {
            let _ = std::fs::remove_file(&tmp);
            warn!("cache write to {} failed: {e}", path.display());
            return false;
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::table::Table;
    use serde_json::json;

    fn record() -> ExperimentRecord {
        let mut params = Params::new();
        params.insert("seed".into(), json!(3));
        let mut t = Table::new(&["n", "value"]);
        t.push(vec![2usize.into(), 0.5f64.into()]);
        ExperimentRecord::new("demo", params, t, vec![], 0.25)
    }

    #[test]
    fn put_get_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::open(dir.path());
        let r = record();
        assert!(cache.get(&r.experiment, &r.params).is_none());
        assert!(cache.put(&r));
        assert_eq!(cache.get(&r.experiment, &r.params), Some(r));
    }

    #[test]
    fn stale_and_corrupt_entries_miss() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::open(dir.path());
        let mut r = record();
        r.version = "paralab-0.0.0".into();
        assert!(cache.put(&r));
        assert!(cache.get(&r.experiment, &r.params).is_none());
        std::fs::write(dir.path().join(format!("{}.json", r.cache_key)), "{not json").unwrap();
        assert!(cache.get(&r.experiment, &r.params).is_none());
    }

    #[test]
    fn concurrent_identical_puts() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::open(dir.path());
        let r = record();
        std::thread::scope(|s| {
            for _ in 0..8 {
                s.spawn(|| assert!(cache.put(&r)));
            }
        });
        assert_eq!(cache.get(&r.experiment, &r.params), Some(r));
        let files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(files.len(), 1);
    }

    #[test]
    fn unwritable_directory_disables() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("plain-file");
        std::fs::write(&file, "x").unwrap();
        let cache = Cache::open(file.join("sub"));
        assert!(!cache.is_enabled());
        assert!(!cache.put(&record()));
    }
}
