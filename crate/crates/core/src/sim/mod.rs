//! Stochastic network-state generation.

mod generate;
mod profile;
mod rng;
mod sampling;
mod state_io;

pub use generate::{generate_state, generate_state_traced, GenerationTrace, SimConfig};
pub use profile::{SlotRates, UtilizationProfile, DAY_SLOT};
pub use rng::SimRng;
pub use sampling::{multinomial_sample, poisson_pmf, poisson_sample, SamplingError};
pub use state_io::{load_state, read_state, save_state, write_state};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("no stations to simulate")]
    NoStations,
    #[error("cap factor {0} must be at least 1")]
    BadCapFactor(f64),
    #[error("unknown time slot {0:?}")]
    UnknownSlot(String),
    #[error("invalid utilization profile: {0}")]
    BadProfile(String),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error("{bikes} bikes do not fit in {room} capped docks")]
    OverCapacity { bikes: u64, room: u64 },
    #[error("malformed state file: {0}")]
    BadStateFile(String),
    #[error("i/o error: {0}")]
    Io(String),
}
