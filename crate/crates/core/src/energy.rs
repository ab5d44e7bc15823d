//! Load-linear energy model and the plan cost function.
//!
//! Driving `d` meters with `q` bikes aboard draws `(e + e'q) d` watt-hours.
//! A plan costs `F` per dispatched truck, `P` per watt-hour and `f` per
//! bike loaded or unloaded.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{CostParams, DistanceMatrix, Plan, StationId, TruckRoute, TruckSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnergyError {
    #[error("load of {load} bikes exceeds truck capacity {capacity}")]
    OverCapacity { load: u32, capacity: u32 },
    #[error("distance {0} is negative or not finite")]
    BadDistance(f64),
    #[error("route has {visits} visits but {loads} load entries")]
    TrajectoryMismatch { visits: usize, loads: usize },
    #[error("visit {0} is outside the distance matrix")]
    UnknownStation(StationId),
}

/// Energy in Wh to drive `distance_m` meters carrying `load` bikes.
pub fn edge_energy(distance_m: f64, load: u32, spec: &TruckSpec) -> Result<f64, EnergyError> {
    if !distance_m.is_finite() || distance_m < 0.0 {
        return Err(EnergyError::BadDistance(distance_m));
    }
    if load > spec.capacity_bikes {
        return Err(EnergyError::OverCapacity {
            load,
            capacity: spec.capacity_bikes,
        });
    }
    Ok(edge_energy_unchecked(distance_m, load, spec))
}

#[inline]
pub(crate) fn edge_energy_unchecked(distance_m: f64, load: u32, spec: &TruckSpec) -> f64 {
    (spec.base_wh_per_m + spec.per_bike_wh_per_m * load as f64) * distance_m
}

/// Distance and energy of a visit sequence, where `loads[k]` is the load
/// carried on the leg leaving visit `k`.
pub fn route_metrics(
    visits: &[StationId],
    loads: &[u32],
    matrix: &DistanceMatrix,
    spec: &TruckSpec,
) -> Result<(f64, f64), EnergyError> {
    if visits.len() != loads.len() {
        return Err(EnergyError::TrajectoryMismatch {
            visits: visits.len(),
            loads: loads.len(),
        });
    }
    if let Some(&bad) = visits.iter().find(|v| v.0 >= matrix.n()) {
        return Err(EnergyError::UnknownStation(bad));
    }
    let mut distance = 0.0;
    let mut energy = 0.0;
    for (k, leg) in visits.windows(2).enumerate() {
        let d = matrix.get(leg[0], leg[1]);
        distance += d;
        energy += edge_energy(d, loads[k], spec)?;
    }
    Ok((distance, energy))
}

/// Distance and energy actually driven by a route (trailing depot return excluded).
pub fn truck_route_metrics(
    route: &TruckRoute,
    matrix: &DistanceMatrix,
    spec: &TruckSpec,
) -> Result<(f64, f64), EnergyError> {
    let k = route.travelled_len().min(route.load_after.len());
    if route.visits.len() != route.load_after.len() {
        return Err(EnergyError::TrajectoryMismatch {
            visits: route.visits.len(),
            loads: route.load_after.len(),
        });
    }
    route_metrics(&route.visits[..k], &route.load_after[..k], matrix, spec)
}

/// Cost components in yen.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub fixed_yen: f64,
    pub electricity_yen: f64,
    pub handling_yen: f64,
}

impl CostBreakdown {
    pub fn total(&self) -> f64 {
        self.fixed_yen + self.electricity_yen + self.handling_yen
    }

    /// Total rounded half-up to 0.1 yen, as printed in reports.
    pub fn rounded_total(&self) -> f64 {
        round_half_up_tenths(self.total())
    }
}

/// Rounds half-up at 0.1 resolution; a relative nudge absorbs binary
/// representation error such as `0.05` being stored slightly below.
pub fn round_half_up_tenths(x: f64) -> f64 {
    let scaled = x * 10.0;
    let nudged = scaled + scaled.abs() * 1e-12 + 1e-9;
    (nudged + 0.5).floor() / 10.0
}

pub fn route_cost(route: &TruckRoute, params: &CostParams) -> CostBreakdown {
    CostBreakdown {
        fixed_yen: params.fixed_cost_yen,
        electricity_yen: params.yen_per_wh * route.energy_wh,
        handling_yen: params.handling_fee_yen * route.handling_events() as f64,
    }
}

/// `F * trucks + P * energy + f * handling events`, summed over the plan's routes.
pub fn plan_cost(plan: &Plan, params: &CostParams) -> CostBreakdown {
    plan.routes
        .iter()
        .map(|r| route_cost(r, params))
        .fold(CostBreakdown::default(), |acc, c| CostBreakdown {
            fixed_yen: acc.fixed_yen + c.fixed_yen,
            electricity_yen: acc.electricity_yen + c.electricity_yen,
            handling_yen: acc.handling_yen + c.handling_yen,
        })
}
