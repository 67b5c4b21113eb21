use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use log::{debug, warn};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::CachePolicy;
use crate::error::{Error, Result};
use crate::manifold::{GridSignature, ManifoldModel, Potential};
use crate::quantization::{hilb, GramMatrix, MetricLevelK};

/// Environment variable overriding the cache root.
pub const CACHE_DIR_ENV: &str = "KQUANT_CACHE_DIR";

pub const CACHE_FORMAT_VERSION: u32 = 1;

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

#[derive(Serialize)]
struct Descriptor<'a> {
    version: u32,
    kind: &'static str,
    potential: &'a Potential,
    k: usize,
    grid: GridSignature,
}

#[derive(Debug, Serialize, Deserialize)]
struct Entry {
    version: u32,
    key: String,
    k: usize,
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
    checksum: String,
}

fn checksum(re: &[f64], im: &[f64]) -> String {
    let mut h = Sha256::new();
    for v in re.iter().chain(im) {
        h.update(v.to_le_bytes());
    }
    hex::encode(h.finalize())
}

/// On-disk store of Hilb Gram matrices keyed by potential, level and grid.
#[derive(Clone, Debug)]
pub struct GramCache {
    root: PathBuf,
    policy: CachePolicy,
}

impl GramCache {
    pub fn new(root: impl Into<PathBuf>, policy: CachePolicy) -> Self {
        GramCache {
            root: root.into(),
            policy,
        }
    }

    /// Root from `KQUANT_CACHE_DIR`, else `fallback`.
    pub fn from_env(fallback: Option<&Path>, policy: CachePolicy) -> Self {
        let root = std::env::var_os(CACHE_DIR_ENV)
            .map(PathBuf::from)
            .or_else(|| fallback.map(Path::to_path_buf))
            .unwrap_or_else(|| PathBuf::from(".kquant-cache"));
        GramCache::new(root, policy)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn policy(&self) -> CachePolicy {
        self.policy
    }

    pub fn key(model: &ManifoldModel, phi: &Potential, k: usize) -> String {
        let d = Descriptor {
            version: CACHE_FORMAT_VERSION,
            kind: "hilb",
            potential: phi,
            k,
            grid: model.signature(),
        };
        hex::encode(Sha256::digest(serde_json::to_vec(&d).expect("descriptor serializes")))
    }

    pub fn path_for(&self, key: &str) -> PathBuf {
        self.root.join(format!("{key}.json"))
    }

    fn load(&self, key: &str, path: &Path) -> Option<GramMatrix> {
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(_) => return None,
        };
        let entry: Entry = match serde_json::from_str(&text) {
            Ok(e) => e,
            Err(e) => {
                warn!("cache entry {} is unreadable ({e}); recomputing", path.display());
                return None;
            }
        };
        let valid = entry.version == CACHE_FORMAT_VERSION
            && entry.key == key
            && entry.re.len() == entry.n * entry.n
            && entry.im.len() == entry.n * entry.n
            && checksum(&entry.re, &entry.im) == entry.checksum;
        if !valid {
            warn!("cache entry {} failed its checksum; recomputing", path.display());
            return None;
        }
        let m = DMatrix::from_fn(entry.n, entry.n, |i, j| {
            Complex64::new(entry.re[i * entry.n + j], entry.im[i * entry.n + j])
        });
        match GramMatrix::new(entry.k, m) {
            Ok(g) => Some(g),
            Err(e) => {
                warn!("cache entry {} is not a valid Gram matrix ({e}); recomputing", path.display());
                None
            }
        }
    }

    fn store(&self, key: &str, path: &Path, g: &GramMatrix) -> Result<()> {
        fs::create_dir_all(&self.root).map_err(|e| Error::Cache(format!("{}: {e}", self.root.display())))?;
        let n = g.dim();
        let m = g.matrix();
        let mut re = Vec::with_capacity(n * n);
        let mut im = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                re.push(m[(i, j)].re);
                im.push(m[(i, j)].im);
            }
        }
        let entry = Entry {
            version: CACHE_FORMAT_VERSION,
            key: key.to_string(),
            k: g.k(),
            n,
            checksum: checksum(&re, &im),
            re,
            im,
        };
        let tmp = self.root.join(format!(
            ".{key}.{}.{}.tmp",
            std::process::id(),
            TMP_COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&serde_json::to_vec(&entry)?)?;
        f.sync_all()?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    /// Hilb(h_ref^k e^{-kφ}), served from the store when a valid entry exists.
    pub fn cache_gram(&self, model: &ManifoldModel, phi: &Potential, k: usize) -> Result<GramMatrix> {
        let compute = || hilb(model, &MetricLevelK::from_potential(model, phi, k)?);
        if self.policy == CachePolicy::Off {
            return compute();
        }
        let key = Self::key(model, phi, k);
        let path = self.path_for(&key);
        if self.policy == CachePolicy::ReadWrite {
            if let Some(g) = self.load(&key, &path) {
                debug!("cache hit {}", path.display());
                return Ok(g);
            }
        }
        let g = compute()?;
        self.store(&key, &path, &g)?;
        Ok(g)
    }
}
