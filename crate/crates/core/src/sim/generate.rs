use serde::{Deserialize, Serialize};

use super::profile::{UtilizationProfile, DAY_SLOT};
use super::rng::SimRng;
use super::sampling::{multinomial_sample, poisson_sample};
use super::SimError;
use crate::model::{stock_cap, NetworkState, Station, DEFAULT_CAP_FACTOR};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    pub slot: String,
    pub cap_factor: f64,
    pub profile: UtilizationProfile,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            slot: DAY_SLOT.to_string(),
            cap_factor: DEFAULT_CAP_FACTOR,
            profile: UtilizationProfile::default(),
        }
    }
}

impl SimConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn rng(&self) -> SimRng {
        SimRng::seed_from_u64(self.seed)
    }
}

/// Bookkeeping from one generation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GenerationTrace {
    /// Sum of the raw Poisson draws, before any redistribution.
    pub raw_total: u64,
    /// Bikes stripped from stations above capacity.
    pub surplus_pooled: u64,
    pub redistribution_passes: u32,
    /// Bikes placed by the ascending-id fallback after sampling stalled.
    pub residue_placed: u64,
    pub final_total: u64,
}

fn round_half_up(x: f64) -> u32 {
    (x + 0.5 + 1e-9).floor().max(0.0) as u32
}

/// Generates a network state; see [`generate_state_traced`].
pub fn generate_state(
    stations: &[Station],
    config: &SimConfig,
    rng: &mut SimRng,
) -> Result<NetworkState, SimError> {
    generate_state_traced(stations, config, rng).map(|(s, _)| s)
}

/// Generates a network state for `config.slot`:
///
/// 1. baseline `B_i = round(c_i * base(tag_i))`, half-up;
/// 2. raw stock `b_i ~ Poisson(c_i * util(tag_i))`;
/// 3. bikes above `c_i` are pooled and redistributed multinomially with
///    weights `c_i / Σc`;
/// 4. stations are clamped to `ceil(cap_factor * c_i)`, clamped bikes
///    re-enter the pool, and step 3 repeats while the pool shrinks; what is
///    left fills free headroom in ascending id order.
///
/// The total bike count after step 4 equals the raw Poisson total.
pub fn generate_state_traced(
    stations: &[Station],
    config: &SimConfig,
    rng: &mut SimRng,
) -> Result<(NetworkState, GenerationTrace), SimError> {
    if stations.is_empty() {
        return Err(SimError::NoStations);
    }
    if !config.cap_factor.is_finite() || config.cap_factor < 1.0 {
        return Err(SimError::BadCapFactor(config.cap_factor));
    }
    let rates = config.profile.slot(&config.slot)?;

    let baseline: Vec<u32> = stations
        .iter()
        .map(|s| round_half_up(s.capacity as f64 * rates.baseline(s.tag)).min(s.capacity))
        .collect();

    let mut raw = Vec::with_capacity(stations.len());
    for s in stations {
        raw.push(poisson_sample(
            s.capacity as f64 * rates.utilization(s.tag),
            rng,
        )?);
    }
    let raw_total: u64 = raw.iter().sum();

    let mut trace = GenerationTrace {
        raw_total,
        ..GenerationTrace::default()
    };

    let mut current: Vec<u64> = Vec::with_capacity(stations.len());
    let mut pool = 0u64;
    for (s, &b) in stations.iter().zip(&raw) {
        let c = s.capacity as u64;
        pool += b.saturating_sub(c);
        current.push(b.min(c));
    }
    trace.surplus_pooled = pool;

    let caps: Vec<u64> = stations
        .iter()
        .map(|s| stock_cap(s.capacity, config.cap_factor) as u64)
        .collect();
    let total_capacity: f64 = stations.iter().map(|s| s.capacity as f64).sum();
    let weights: Vec<f64> = stations
        .iter()
        .map(|s| s.capacity as f64 / total_capacity)
        .collect();
    let weight_sum: f64 = weights.iter().sum();
    let weights: Vec<f64> = weights.iter().map(|w| w / weight_sum).collect();

    while pool > 0 {
        trace.redistribution_passes += 1;
        let alloc = multinomial_sample(pool, &weights, rng)?;
        let mut displaced = 0u64;
        for i in 0..current.len() {
            current[i] += alloc[i];
            if current[i] > caps[i] {
                displaced += current[i] - caps[i];
                current[i] = caps[i];
            }
        }
        let stalled = displaced >= pool;
        pool = displaced;
        if stalled {
            break;
        }
    }

    for i in 0..current.len() {
        if pool == 0 {
            break;
        }
        let room = caps[i] - current[i];
        let take = room.min(pool);
        current[i] += take;
        pool -= take;
        trace.residue_placed += take;
    }
    if pool > 0 {
        return Err(SimError::OverCapacity {
            bikes: raw_total,
            room: caps.iter().sum(),
        });
    }

    trace.final_total = current.iter().sum();
    debug_assert_eq!(trace.final_total, raw_total);
    let current = current.into_iter().map(|b| b as u32).collect();
    Ok((NetworkState { current, baseline }, trace))
}
