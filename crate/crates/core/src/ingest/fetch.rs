//! Routing-API client for distance blocks, with an on-disk response cache.
//!
//! The API answers at most 50 locations per request. A network of `n`
//! stations is split into groups of `batch/2`; each request covers one pair
//! of groups, so the returned square block also holds every cross-group
//! distance. For 150 stations and batch 50 that is 6 groups and 15 requests.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::stitch::{MatrixBlock, MAX_BLOCK_DIM};
use crate::model::{Station, StationId};

pub const MAX_BATCH: usize = MAX_BLOCK_DIM;
pub const API_KEY_ENV: &str = "ROUTING_API_KEY";
pub const DEFAULT_ENDPOINT: &str = "https://api.openrouteservice.org";
pub const DEFAULT_ROUTING_PROFILE: &str = "driving-car";

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("batch of {0} points exceeds the {MAX_BATCH}-point API limit")]
    BatchTooLarge(usize),
    #[error("network error: {0}")]
    Network(String),
    #[error("routing API quota exceeded")]
    QuotaExceeded,
    #[error("offline (no {API_KEY_ENV}) and batch is not cached")]
    UncachedOffline,
    #[error("unexpected API response: {0}")]
    BadResponse(String),
    #[error("cache error at {path}: {message}")]
    Cache { path: String, message: String },
}

#[derive(Debug, Clone)]
pub struct ApiConfig {
    pub endpoint: String,
    /// `None` means offline: only cached batches can be served.
    pub api_key: Option<String>,
    pub profile: String,
    pub cache_dir: PathBuf,
}

impl ApiConfig {
    /// Reads the key from `ROUTING_API_KEY`; an empty or missing key means offline.
    pub fn from_env(endpoint: &str, profile: &str, cache_dir: impl Into<PathBuf>) -> Self {
        let api_key = std::env::var(API_KEY_ENV)
            .ok()
            .filter(|k| !k.trim().is_empty());
        Self {
            endpoint: endpoint.to_string(),
            api_key,
            profile: profile.to_string(),
            cache_dir: cache_dir.into(),
        }
    }

    pub fn offline(cache_dir: impl Into<PathBuf>) -> Self {
        Self {
            endpoint: DEFAULT_ENDPOINT.to_string(),
            api_key: None,
            profile: DEFAULT_ROUTING_PROFILE.to_string(),
            cache_dir: cache_dir.into(),
        }
    }
}

/// Something that can answer a square distance request for `[lon, lat]` points.
pub trait MatrixTransport {
    fn distances(
        &self,
        locations: &[[f64; 2]],
        config: &ApiConfig,
        api_key: &str,
    ) -> Result<Vec<Vec<f64>>, FetchError>;
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CacheEntry {
    profile: String,
    /// Sorted `[lon, lat]` points; rows and columns of `distances` follow this order.
    locations: Vec<[f64; 2]>,
    distances: Vec<Vec<f64>>,
}

/// Positions of the batch in canonical order: by longitude, latitude, then
/// original index.
fn canonical_order(points: &[[f64; 2]]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a][0]
            .total_cmp(&points[b][0])
            .then(points[a][1].total_cmp(&points[b][1]))
            .then(a.cmp(&b))
    });
    order
}

/// Cache key: SHA-256 over the routing profile and the sorted coordinates.
pub fn cache_key(points: &[[f64; 2]], profile: &str) -> String {
    let mut h = Sha256::new();
    h.update(profile.as_bytes());
    for &k in &canonical_order(points) {
        h.update(points[k][0].to_bits().to_le_bytes());
        h.update(points[k][1].to_bits().to_le_bytes());
    }
    hex::encode(h.finalize())
}

const LOCK_STRIPES: usize = 16;
static WRITE_LOCKS: [Mutex<()>; LOCK_STRIPES] = [const { Mutex::new(()) }; LOCK_STRIPES];
static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Directory of cached responses, one JSON file per key.
#[derive(Debug, Clone)]
pub struct BlockCache {
    dir: PathBuf,
}

impl BlockCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    fn cache_err(path: &Path, message: impl ToString) -> FetchError {
        FetchError::Cache {
            path: path.display().to_string(),
            message: message.to_string(),
        }
    }

    fn get(&self, key: &str) -> Result<Option<CacheEntry>, FetchError> {
        let path = self.path_for(key);
        match std::fs::read_to_string(&path) {
            Ok(text) => serde_json::from_str(&text)
                .map(Some)
                .map_err(|e| Self::cache_err(&path, e)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(Self::cache_err(&path, e)),
        }
    }

    /// Writes go through a temp file and a rename under a per-key lock stripe,
    /// so readers never see a partial entry.
    fn put(&self, key: &str, entry: &CacheEntry) -> Result<(), FetchError> {
        let path = self.path_for(key);
        std::fs::create_dir_all(&self.dir).map_err(|e| Self::cache_err(&self.dir, e))?;
        let text = serde_json::to_string(entry).map_err(|e| Self::cache_err(&path, e))?;
        let mut hasher = DefaultHasher::new();
        key.hash(&mut hasher);
        let _guard = WRITE_LOCKS[hasher.finish() as usize % LOCK_STRIPES]
            .lock()
            .unwrap_or_else(|p| p.into_inner());
        let tmp = self.dir.join(format!(
            ".{key}.{}.{}.tmp",
            std::process::id(),
            TMP_COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        std::fs::write(&tmp, text).map_err(|e| Self::cache_err(&tmp, e))?;
        std::fs::rename(&tmp, &path).map_err(|e| Self::cache_err(&path, e))
    }
}

fn quantize_tenth(v: f64) -> f64 {
    (v * 10.0).round() / 10.0
}

/// Fetches the square distance block for `batch`, serving from the cache when
/// possible. Distances are quantized to 0.1 m.
pub fn fetch_block(
    batch: &[Station],
    config: &ApiConfig,
    transport: &dyn MatrixTransport,
) -> Result<MatrixBlock, FetchError> {
    if batch.len() > MAX_BATCH {
        return Err(FetchError::BatchTooLarge(batch.len()));
    }
    let points: Vec<[f64; 2]> = batch.iter().map(|s| [s.longitude, s.latitude]).collect();
    let order = canonical_order(&points);
    let key = cache_key(&points, &config.profile);
    let cache = BlockCache::new(&config.cache_dir);

    let entry = match cache.get(&key)? {
        Some(entry) => entry,
        None => {
            let api_key = config
                .api_key
                .as_deref()
                .ok_or(FetchError::UncachedOffline)?;
            let sorted: Vec<[f64; 2]> = order.iter().map(|&k| points[k]).collect();
            let raw = transport.distances(&sorted, config, api_key)?;
            if raw.len() != sorted.len() || raw.iter().any(|r| r.len() != sorted.len()) {
                return Err(FetchError::BadResponse(format!(
                    "expected {0}x{0} distances",
                    sorted.len()
                )));
            }
            let distances: Vec<Vec<f64>> = raw
                .into_iter()
                .map(|row| row.into_iter().map(quantize_tenth).collect())
                .collect();
            if distances
                .iter()
                .flatten()
                .any(|v| !v.is_finite() || *v < 0.0)
            {
                return Err(FetchError::BadResponse(
                    "negative or missing distance".into(),
                ));
            }
            let entry = CacheEntry {
                profile: config.profile.clone(),
                locations: sorted,
                distances,
            };
            cache.put(&key, &entry)?;
            entry
        }
    };

    // rank[k]: row of batch point k inside the canonical entry
    let mut rank = vec![0usize; order.len()];
    for (pos, &k) in order.iter().enumerate() {
        rank[k] = pos;
    }
    let values = (0..batch.len())
        .map(|a| {
            (0..batch.len())
                .map(|b| entry.distances[rank[a]][rank[b]])
                .collect()
        })
        .collect();
    let ids: Vec<StationId> = batch.iter().map(|s| s.id).collect();
    Ok(MatrixBlock {
        row_ids: ids.clone(),
        col_ids: ids,
        values,
        source: Some(entry.profile),
    })
}

/// Splits `0..n` into request batches of at most `batch_size` stations whose
/// square blocks jointly cover every ordered pair.
pub fn plan_batches(n: usize, batch_size: usize) -> Result<Vec<Vec<usize>>, FetchError> {
    if batch_size > MAX_BATCH {
        return Err(FetchError::BatchTooLarge(batch_size));
    }
    if n <= batch_size {
        return Ok(vec![(0..n).collect()]);
    }
    let group = (batch_size / 2).max(1);
    let groups: Vec<Vec<usize>> = (0..n)
        .collect::<Vec<_>>()
        .chunks(group)
        .map(|c| c.to_vec())
        .collect();
    let mut batches = Vec::new();
    for a in 0..groups.len() {
        for b in a + 1..groups.len() {
            let mut batch = groups[a].clone();
            batch.extend(&groups[b]);
            batches.push(batch);
        }
    }
    Ok(batches)
}

/// Openrouteservice-style `POST {endpoint}/v2/matrix/{profile}` client.
#[cfg(feature = "http")]
#[derive(Debug, Default)]
pub struct HttpTransport {
    client: reqwest::blocking::Client,
}

#[cfg(feature = "http")]
impl HttpTransport {
    pub fn new() -> Self {
        Self::default()
    }
}

#[cfg(feature = "http")]
impl MatrixTransport for HttpTransport {
    fn distances(
        &self,
        locations: &[[f64; 2]],
        config: &ApiConfig,
        api_key: &str,
    ) -> Result<Vec<Vec<f64>>, FetchError> {
        #[derive(Deserialize)]
        struct Response {
            distances: Vec<Vec<Option<f64>>>,
        }
        let url = format!(
            "{}/v2/matrix/{}",
            config.endpoint.trim_end_matches('/'),
            config.profile
        );
        let body = serde_json::json!({
            "locations": locations,
            "metrics": ["distance"],
            "units": "m",
        });
        let resp = self
            .client
            .post(url)
            .header("Authorization", api_key)
            .json(&body)
            .send()
            .map_err(|e| FetchError::Network(e.to_string()))?;
        let status = resp.status();
        if status.as_u16() == 429 {
            return Err(FetchError::QuotaExceeded);
        }
        if !status.is_success() {
            let text = resp.text().unwrap_or_default();
            return Err(FetchError::Network(format!("HTTP {status}: {text}")));
        }
        let parsed: Response = resp
            .json()
            .map_err(|e| FetchError::BadResponse(e.to_string()))?;
        parsed
            .distances
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|v| v.ok_or_else(|| FetchError::BadResponse("unroutable pair".into())))
                    .collect()
            })
            .collect()
    }
}
