//! On-disk cache of spectrum records, keyed by the inputs that determine
//! them.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use twl_core::spectral::{entry_residuals, SpectrumRecord, RESIDUAL_FACTOR};
use twl_core::toeplitz::SymbolFunction;
use twl_core::SpectrumRecord64;

pub const CACHE_VERSION: &str = "1";
pub const CACHE_DIR_ENV: &str = "TWL_CACHE_DIR";
/// Fraction of entries whose residual is recomputed on load.
pub const VERIFY_FRACTION: f64 = 0.01;

#[derive(Serialize, Deserialize)]
struct CacheFile {
    version: String,
    key: String,
    record: SpectrumRecord<f64>,
}

/// Why a lookup did not return a record.
#[derive(Debug, Clone, PartialEq)]
pub enum Miss {
    Absent,
    Version(String),
    Corrupt(String),
    Verification { worst: f64 },
}

pub struct SpectrumCache {
    dir: PathBuf,
}

/// Hex SHA-256 over the symbol text, weights, `d` and `k_max`.
pub fn cache_key(symbol: &str, weights: Option<&[i64]>, d: usize, k_max: usize) -> String {
    let mut h = Sha256::new();
    h.update(b"symbol\0");
    h.update(symbol.trim().as_bytes());
    h.update(b"\0weights\0");
    match weights {
        None => h.update(b"none"),
        Some(w) => {
            for x in w {
                h.update(x.to_le_bytes());
            }
        }
    }
    h.update(b"\0d\0");
    h.update((d as u64).to_le_bytes());
    h.update(b"\0k_max\0");
    h.update((k_max as u64).to_le_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

impl SpectrumCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// `$TWL_CACHE_DIR` if set, else `fallback`.
    pub fn from_env(fallback: &Path) -> Self {
        match std::env::var_os(CACHE_DIR_ENV) {
            Some(d) if !d.is_empty() => Self::new(d),
            _ => Self::new(fallback),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("spectrum-{key}.json"))
    }

    pub fn store(&self, key: &str, record: &SpectrumRecord64) -> std::io::Result<PathBuf> {
        std::fs::create_dir_all(&self.dir)?;
        let path = self.path_for(key);
        let tmp = path.with_extension("json.tmp");
        let file = CacheFile {
            version: CACHE_VERSION.to_string(),
            key: key.to_string(),
            record: record.clone(),
        };
        let data = serde_json::to_vec(&file).map_err(std::io::Error::other)?;
        std::fs::write(&tmp, data)?;
        std::fs::rename(&tmp, &path)?;
        Ok(path)
    }

    /// Loads and re-verifies a record; any problem is a miss.
    pub fn load(&self, key: &str, f: &SymbolFunction) -> Result<SpectrumRecord64, Miss> {
        let path = self.path_for(key);
        let data = match std::fs::read(&path) {
            Ok(d) => d,
            Err(_) => return Err(Miss::Absent),
        };
        let file: CacheFile =
            serde_json::from_slice(&data).map_err(|e| Miss::Corrupt(e.to_string()))?;
        if file.version != CACHE_VERSION {
            return Err(Miss::Version(file.version));
        }
        if file.key != key || file.record.metadata.symbol != f.text() || file.record.metadata.d != f.dim() {
            return Err(Miss::Corrupt("key does not match contents".into()));
        }
        let record = file.record;
        let n = record.entries.len();
        if n > 0 {
            let m = ((n as f64 * VERIFY_FRACTION).ceil() as usize).clamp(1, n);
            let seed = u64::from_str_radix(&key[..16], 16).unwrap_or(0);
            let mut rng = twl_core::sampling::seeded_rng(seed);
            let mut idx = sample(&mut rng, n, m).into_vec();
            idx.sort_unstable();
            let picked: Vec<_> = idx.iter().map(|&i| &record.entries[i]).collect();
            let res = entry_residuals(f, &picked).map_err(|e| Miss::Corrupt(e.to_string()))?;
            let worst = res.iter().cloned().fold(0.0, f64::max);
            if !(worst <= RESIDUAL_FACTOR) {
                return Err(Miss::Verification { worst });
            }
        }
        Ok(record)
    }
}
