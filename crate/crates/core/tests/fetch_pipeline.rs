use std::sync::atomic::{AtomicUsize, Ordering};

use rebalance::ingest::{
    fetch_block, plan_batches, stitch, ApiConfig, FetchError, MatrixTransport,
};
use rebalance::model::{Station, StationId, StationTag};

/// Answers with a deterministic asymmetric function of the coordinates.
struct Synthetic {
    calls: AtomicUsize,
}

impl Synthetic {
    fn new() -> Self {
        Self {
            calls: AtomicUsize::new(0),
        }
    }
}

impl MatrixTransport for Synthetic {
    fn distances(
        &self,
        locations: &[[f64; 2]],
        _: &ApiConfig,
        _: &str,
    ) -> Result<Vec<Vec<f64>>, FetchError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        Ok(locations
            .iter()
            .map(|a| {
                locations
                    .iter()
                    .map(|b| {
                        let dx = (a[0] - b[0]) * 90_000.0;
                        let dy = (a[1] - b[1]) * 111_000.0;
                        (dx * dx + dy * dy).sqrt() * 1.3 + (b[1] - a[1]).max(0.0) * 5_000.0 + 0.04
                    })
                    .collect()
            })
            .collect())
    }
}

fn stations(n: usize) -> Vec<Station> {
    (0..n)
        .map(|i| Station {
            id: StationId(i),
            name: format!("p{i}"),
            longitude: 139.72 + (i % 13) as f64 * 0.0041,
            latitude: 35.62 + (i / 13) as f64 * 0.0047,
            capacity: 20,
            tag: StationTag::Regular,
        })
        .collect()
}

fn config(dir: &std::path::Path) -> ApiConfig {
    ApiConfig {
        api_key: Some("test-key".into()),
        ..ApiConfig::offline(dir)
    }
}

#[test]
fn fetched_blocks_stitch_to_full_matrix_and_replay_offline() {
    let tmp = tempfile::tempdir().unwrap();
    let all = stations(120);
    let transport = Synthetic::new();
    let batches = plan_batches(all.len(), 50).unwrap();
    let fetch_all = |cfg: &ApiConfig| {
        batches
            .iter()
            .map(|b| {
                let members: Vec<Station> = b.iter().map(|&i| all[i].clone()).collect();
                fetch_block(&members, cfg, &transport).unwrap()
            })
            .collect::<Vec<_>>()
    };
    let online = fetch_all(&config(tmp.path()));
    assert_eq!(transport.calls.load(Ordering::SeqCst), batches.len());
    let m = stitch(&online, all.len()).unwrap();
    for i in 0..all.len() {
        for j in 0..all.len() {
            let v = m.get(StationId(i), StationId(j));
            assert_eq!(v, (v * 10.0).round() / 10.0, "cell ({i}, {j}) not at 0.1 m");
            if i != j {
                assert!(v > 0.0);
            }
        }
    }

    // without a key every batch must come from the cache, unchanged
    let offline = fetch_all(&ApiConfig::offline(tmp.path()));
    assert_eq!(transport.calls.load(Ordering::SeqCst), batches.len());
    assert_eq!(stitch(&offline, all.len()).unwrap(), m);
}

#[test]
fn concurrent_fetches_of_one_batch_agree() {
    let tmp = tempfile::tempdir().unwrap();
    let batch = stations(40);
    let transport = Synthetic::new();
    let cfg = config(tmp.path());
    let blocks: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..8)
            .map(|_| s.spawn(|| fetch_block(&batch, &cfg, &transport).unwrap()))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    assert!(blocks.windows(2).all(|w| w[0] == w[1]));
    let leftovers: Vec<_> = std::fs::read_dir(tmp.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().ends_with(".tmp"))
        .collect();
    assert!(leftovers.is_empty());
}

#[test]
fn reversed_batch_is_served_from_the_same_entry() {
    let tmp = tempfile::tempdir().unwrap();
    let batch = stations(30);
    let transport = Synthetic::new();
    let cfg = config(tmp.path());
    let forward = fetch_block(&batch, &cfg, &transport).unwrap();
    let mut reversed = batch.clone();
    reversed.reverse();
    let backward = fetch_block(&reversed, &ApiConfig::offline(tmp.path()), &transport).unwrap();
    assert_eq!(transport.calls.load(Ordering::SeqCst), 1);
    let n = batch.len();
    for a in 0..n {
        for b in 0..n {
            assert_eq!(forward.values[a][b], backward.values[n - 1 - a][n - 1 - b]);
        }
    }
}
