//! Greedy rebalancing, plan validation and a brute-force oracle for tiny
//! instances.

mod greedy;
mod oracle;
mod queues;
mod validate;

pub use greedy::{solve, Strategy};
pub use oracle::{brute_force_oracle, Objective, OracleError, ORACLE_MAX_STATIONS};
pub use queues::{classify, WorkQueues};
pub use validate::{validate, Check, ValidationReport};

use thiserror::Error;

use crate::model::ModelError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("distance matrix is {matrix}x{matrix} but there are {stations} stations")]
    DimensionMismatch { matrix: usize, stations: usize },
    #[error("network has no depot (no stations)")]
    NoDepot,
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub(crate) fn check_inputs(
    stations: &[crate::model::Station],
    state: &crate::model::NetworkState,
    matrix: &crate::model::DistanceMatrix,
    spec: &crate::model::TruckSpec,
) -> Result<(), SolveError> {
    if stations.is_empty() {
        return Err(SolveError::NoDepot);
    }
    if matrix.n() != stations.len() {
        return Err(SolveError::DimensionMismatch {
            matrix: matrix.n(),
            stations: stations.len(),
        });
    }
    state.validate(stations)?;
    spec.validate()?;
    Ok(())
}
