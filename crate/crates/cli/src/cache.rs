//! Content-addressed disk cache for the expensive per-channel stage.
//!
//! Keys are SHA-256 hashes of the canonical JSON encoding of every physical
//! parameter entering the channel (plus the tolerances and a code version
//! tag); payloads are JSON files written atomically (temp file + rename).
//! Storage failures degrade to cache-off with a warning — they can cost
//! time, never correctness. Unreadable or mismatched entries count as
//! misses and are recomputed.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ScenarioConfig;
use crate::pipeline::{CachedChannel, GridPoint};

/// Bump when the cached payload or the pipeline numerics change shape.
const CODE_VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "+cache-schema-1");

/// Environment variable overriding the default cache directory.
pub const CACHE_DIR_ENV: &str = "RINDLER_CACHE_DIR";

/// Every input that determines a channel, in canonical serialized form.
/// The input state (r, n, displacement) is deliberately absent: the channel
/// does not depend on it, so a state sweep reuses one cached channel.
#[derive(Serialize)]
struct ChannelKey<'a> {
    code_version: &'a str,
    orientation: &'a str,
    mode_kind: &'a str,
    separation: f64,
    accel_i: f64,
    accel_ii: f64,
    mass: f64,
    a_conv: f64,
    /// `(length, omega0)` of the four packet slots, inputs first.
    modes: [[f64; 2]; 4],
    tolerances: [f64; 2],
}

/// SHA-256 content hash identifying one channel computation.
pub fn channel_key(cfg: &ScenarioConfig, p: &GridPoint) -> String {
    let key = ChannelKey {
        code_version: CODE_VERSION,
        orientation: match cfg.geometry.orientation {
            crate::config::OrientationChoice::Counter => "counter",
            crate::config::OrientationChoice::Parallel => "parallel",
        },
        mode_kind: match cfg.mode_kind {
            crate::config::OutputModeKind::Passive => "passive",
            crate::config::OutputModeKind::Active => "active",
        },
        separation: p.separation,
        accel_i: p.accel_i,
        accel_ii: p.accel_ii,
        mass: cfg.mass,
        a_conv: cfg.a_conv,
        modes: [
            [p.in_i.0, p.in_i.1],
            [p.in_ii.0, p.in_ii.1],
            [p.out_i.0, p.out_i.1],
            [p.out_ii.0, p.out_ii.1],
        ],
        tolerances: [cfg.tolerances.cross_rel, cfg.tolerances.cross_abs],
    };
    let json = serde_json::to_vec(&key).expect("cache key serialization cannot fail");
    hex::encode(Sha256::digest(&json))
}

/// Hit/miss/store counters for the run summary.
#[derive(Debug, Default)]
pub struct CacheStats {
    pub hits: AtomicU64,
    pub misses: AtomicU64,
    pub stores: AtomicU64,
}

/// A cache handle shared across workers. `None` directory means disabled.
#[derive(Debug)]
pub struct Cache {
    dir: Option<PathBuf>,
    enabled: AtomicBool,
    pub stats: CacheStats,
}

/// Resolution order for the cache directory: explicit config value, then
/// the `RINDLER_CACHE_DIR` environment variable, then a per-user directory
/// under the system temp dir.
pub fn resolve_dir(config_dir: Option<&Path>) -> PathBuf {
    if let Some(dir) = config_dir {
        return dir.to_path_buf();
    }
    if let Ok(dir) = std::env::var(CACHE_DIR_ENV) {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    std::env::temp_dir().join("rindler-cache")
}

impl Cache {
    pub fn disabled() -> Self {
        Cache {
            dir: None,
            enabled: AtomicBool::new(false),
            stats: CacheStats::default(),
        }
    }

    pub fn at(dir: PathBuf) -> Self {
        Cache {
            dir: Some(dir),
            enabled: AtomicBool::new(true),
            stats: CacheStats::default(),
        }
    }

    pub fn is_enabled(&self) -> bool {
        self.enabled.load(Ordering::Relaxed)
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn entry_path(&self, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{key}.json")))
    }

    /// Returns the payload stored under `key`, or `None` on any miss,
    /// corruption, or key mismatch.
    pub fn get(&self, key: &str) -> Option<CachedChannel> {
        if !self.is_enabled() {
            return None;
        }
        let path = self.entry_path(key)?;
        let hit = std::fs::read_to_string(&path)
            .ok()
            .and_then(|text| serde_json::from_str::<CachedChannel>(&text).ok())
            .filter(|payload| payload.key == key);
        match &hit {
            Some(_) => self.stats.hits.fetch_add(1, Ordering::Relaxed),
            None => self.stats.misses.fetch_add(1, Ordering::Relaxed),
        };
        hit
    }

    /// Stores a payload atomically; on storage failure the cache disables
    /// itself for the rest of the run.
    pub fn put(&self, key: &str, payload: &CachedChannel) {
        if !self.is_enabled() {
            return;
        }
        let Some(path) = self.entry_path(key) else {
            return;
        };
        if let Err(e) = self.write_atomic(&path, payload) {
            if self.enabled.swap(false, Ordering::Relaxed) {
                eprintln!(
                    "warning: cache disabled for this run ({}: {e})",
                    path.display()
                );
            }
            return;
        }
        self.stats.stores.fetch_add(1, Ordering::Relaxed);
    }

    fn write_atomic(&self, path: &Path, payload: &CachedChannel) -> std::io::Result<()> {
        let dir = path.parent().expect("cache entries live inside a directory");
        std::fs::create_dir_all(dir)?;
        let tmp = dir.join(format!(
            ".tmp-{}-{}",
            std::process::id(),
            path.file_name().and_then(|n| n.to_str()).unwrap_or("entry")
        ));
        let bytes = serde_json::to_vec(payload)?;
        std::fs::write(&tmp, bytes)?;
        match std::fs::rename(&tmp, path) {
            Ok(()) => Ok(()),
            Err(e) => {
                let _ = std::fs::remove_file(&tmp);
                Err(e)
            }
        }
    }
}

/// Removes all cache entries in `dir`, returning how many were deleted.
/// Only this tool's entry files are touched.
pub fn clear_dir(dir: &Path) -> std::io::Result<usize> {
    let mut removed = 0;
    let entries = match std::fs::read_dir(dir) {
        Ok(entries) => entries,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(0),
        Err(e) => return Err(e),
    };
    for entry in entries {
        let entry = entry?;
        let name = entry.file_name();
        let name = name.to_string_lossy();
        let is_entry = name.ends_with(".json") && name.len() == 64 + ".json".len();
        let is_temp = name.starts_with(".tmp-");
        if is_entry || is_temp {
            std::fs::remove_file(entry.path())?;
            removed += 1;
        }
    }
    Ok(removed)
}
