//! Regenerates the bundled sample network under `data/minato/`.
//!
//! Station positions are scattered around neighbourhood centres inside the
//! ward; road distances are great-circle distances stretched by a random,
//! direction-dependent detour factor and rounded to 0.1 m, which is what the
//! fetch path stores.
//!
//! ```text
//! cargo run -p rebalance --example make_sample_data -- data/minato
//! ```

use std::path::PathBuf;

use rebalance::ingest::{plan_batches, save_block, save_matrix, write_stations, MatrixBlock};
use rebalance::model::{DistanceMatrix, Station, StationId, StationTag};
use rebalance::sim::{SimRng, UtilizationProfile};

const N: usize = 150;
const METRO: usize = 11;
const SCHOOL: usize = 23;
const SEED: u64 = 2024;
const SOURCE: &str = "synthetic: haversine x detour 1.25-1.50, 0.1 m";

const DEPOT: (&str, f64, f64) = ("Roppongi First Building", 139.741476, 35.66241);

// (area, lon, lat, spread in degrees)
const AREAS: [(&str, f64, f64, f64); 12] = [
    ("Roppongi", 139.7320, 35.6628, 0.0040),
    ("Akasaka", 139.7365, 35.6730, 0.0040),
    ("Aoyama", 139.7230, 35.6680, 0.0035),
    ("Azabu", 139.7340, 35.6550, 0.0040),
    ("Toranomon", 139.7490, 35.6680, 0.0030),
    ("Shimbashi", 139.7570, 35.6650, 0.0030),
    ("Hamamatsucho", 139.7570, 35.6550, 0.0030),
    ("Shibaura", 139.7500, 35.6420, 0.0045),
    ("Mita", 139.7410, 35.6480, 0.0035),
    ("Takanawa", 139.7350, 35.6350, 0.0040),
    ("Konan", 139.7420, 35.6290, 0.0040),
    ("Daiba", 139.7770, 35.6280, 0.0035),
];

fn haversine_m(a: (f64, f64), b: (f64, f64)) -> f64 {
    const R: f64 = 6_371_008.8;
    let (lon1, lat1) = (a.0.to_radians(), a.1.to_radians());
    let (lon2, lat2) = (b.0.to_radians(), b.1.to_radians());
    let h = ((lat2 - lat1) / 2.0).sin().powi(2)
        + lat1.cos() * lat2.cos() * ((lon2 - lon1) / 2.0).sin().powi(2);
    2.0 * R * h.sqrt().asin()
}

fn stations(rng: &mut SimRng) -> Vec<Station> {
    let mut out = vec![Station {
        id: StationId(0),
        name: DEPOT.0.to_string(),
        longitude: DEPOT.1,
        latitude: DEPOT.2,
        capacity: 30,
        tag: StationTag::Regular,
    }];
    let mut per_area = [0usize; AREAS.len()];
    for id in 1..N {
        let a = (id - 1) % AREAS.len();
        per_area[a] += 1;
        let (area, lon, lat, spread) = AREAS[a];
        let dx = (rng.uniform() * 2.0 - 1.0) * spread;
        let dy = (rng.uniform() * 2.0 - 1.0) * spread;
        out.push(Station {
            id: StationId(id),
            name: format!("{area} {}", per_area[a]),
            longitude: ((lon + dx) * 1e6).round() / 1e6,
            latitude: ((lat + dy) * 1e6).round() / 1e6,
            capacity: 10 + rng.below(21) as u32,
            tag: StationTag::Regular,
        });
    }
    // partial Fisher-Yates over 1..N picks the special stations
    let mut ids: Vec<usize> = (1..N).collect();
    for k in 0..METRO + SCHOOL {
        let j = k + rng.below((ids.len() - k) as u64) as usize;
        ids.swap(k, j);
    }
    for &id in &ids[..METRO] {
        out[id].tag = StationTag::Metro;
    }
    for &id in &ids[METRO..METRO + SCHOOL] {
        out[id].tag = StationTag::SchoolCompany;
    }
    out
}

fn matrix(stations: &[Station], rng: &mut SimRng) -> DistanceMatrix {
    let n = stations.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let a = (stations[i].longitude, stations[i].latitude);
            let b = (stations[j].longitude, stations[j].latitude);
            let detour = 1.25 + 0.25 * rng.uniform();
            let m = (haversine_m(a, b) * detour).max(40.0);
            d[i * n + j] = (m * 10.0).round() / 10.0;
        }
    }
    DistanceMatrix::from_flat(n, d).expect("valid synthetic matrix")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "data/minato".into()),
    );
    let blocks_dir = dir.join("blocks");
    std::fs::create_dir_all(&blocks_dir)?;

    let mut rng = SimRng::seed_from_u64(SEED);
    let stations = stations(&mut rng);
    let matrix = matrix(&stations, &mut rng);

    write_stations(&stations, std::fs::File::create(dir.join("stations.csv"))?)?;
    save_matrix(&matrix, dir.join("matrix.txt"))?;
    std::fs::write(
        dir.join("profile.csv"),
        UtilizationProfile::default().to_csv(),
    )?;

    for (k, batch) in plan_batches(N, 50)?.iter().enumerate() {
        let ids: Vec<StationId> = batch.iter().map(|&i| StationId(i)).collect();
        let values = ids
            .iter()
            .map(|&r| ids.iter().map(|&c| matrix.get(r, c)).collect())
            .collect();
        let mut block = MatrixBlock::new(ids.clone(), ids, values)?;
        block.source = Some(SOURCE.to_string());
        save_block(&block, blocks_dir.join(format!("block_{k:02}.json")))?;
    }
    println!("wrote {} stations to {}", stations.len(), dir.display());
    Ok(())
}
