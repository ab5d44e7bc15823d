//! Domain types shared by every other module: stations, network state,
//! the distance matrix, fleet physics and economics, and plans.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a station; row/column into a [`DistanceMatrix`]. Index 0 is the depot.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct StationId(pub usize);

impl StationId {
    pub const DEPOT: StationId = StationId(0);

    #[inline]
    pub fn index(self) -> usize {
        self.0
    }

    #[inline]
    pub fn is_depot(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for StationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for StationId {
    fn from(i: usize) -> Self {
        StationId(i)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StationTag {
    Regular,
    Metro,
    #[serde(rename = "school")]
    SchoolCompany,
}

impl StationTag {
    /// Metro- and school/company-adjacent stations share the "special" utilization rates.
    pub fn is_special(self) -> bool {
        !matches!(self, StationTag::Regular)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StationTag::Regular => "regular",
            StationTag::Metro => "metro",
            StationTag::SchoolCompany => "school",
        }
    }
}

impl std::str::FromStr for StationTag {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "regular" => Ok(StationTag::Regular),
            "metro" => Ok(StationTag::Metro),
            "school" => Ok(StationTag::SchoolCompany),
            other => Err(ModelError::UnknownTag(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Station {
    pub id: StationId,
    pub name: String,
    pub longitude: f64,
    pub latitude: f64,
    /// Rack capacity in bikes.
    pub capacity: u32,
    pub tag: StationTag,
}

impl Station {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.capacity < 1 {
            return Err(ModelError::ZeroCapacity(self.id));
        }
        if !(-180.0..=180.0).contains(&self.longitude) || !(-90.0..=90.0).contains(&self.latitude) {
            return Err(ModelError::BadCoordinates(self.id));
        }
        Ok(())
    }
}

/// Upper bound on a station's stock after simulation: `ceil(cap_factor * capacity)`.
///
/// The epsilon keeps `1.2 * 10` (which is `12.000000000000002` in binary)
/// from rounding up to 13.
pub fn stock_cap(capacity: u32, cap_factor: f64) -> u32 {
    (cap_factor * capacity as f64 - 1e-9).ceil().max(0.0) as u32
}

pub const DEFAULT_CAP_FACTOR: f64 = 1.2;

/// Current and baseline bike counts for one time slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkState {
    pub current: Vec<u32>,
    pub baseline: Vec<u32>,
}

impl NetworkState {
    pub fn new(current: Vec<u32>, baseline: Vec<u32>) -> Result<Self, ModelError> {
        if current.len() != baseline.len() {
            return Err(ModelError::LengthMismatch {
                expected: current.len(),
                found: baseline.len(),
            });
        }
        Ok(Self { current, baseline })
    }

    pub fn len(&self) -> usize {
        self.current.len()
    }

    pub fn is_empty(&self) -> bool {
        self.current.is_empty()
    }

    pub fn total_bikes(&self) -> u64 {
        self.current.iter().map(|&b| b as u64).sum()
    }

    /// Checks the state against station capacities.
    pub fn validate(&self, stations: &[Station]) -> Result<(), ModelError> {
        if self.current.len() != self.baseline.len() {
            return Err(ModelError::LengthMismatch {
                expected: self.current.len(),
                found: self.baseline.len(),
            });
        }
        if self.current.len() != stations.len() {
            return Err(ModelError::LengthMismatch {
                expected: stations.len(),
                found: self.current.len(),
            });
        }
        for (i, s) in stations.iter().enumerate() {
            if self.current[i] > stock_cap(s.capacity, DEFAULT_CAP_FACTOR) {
                return Err(ModelError::OverCap(StationId(i)));
            }
            if self.baseline[i] > s.capacity {
                return Err(ModelError::BaselineOverCapacity(StationId(i)));
            }
        }
        Ok(())
    }
}

/// Signed rebalancing demand `current - baseline`: positive means surplus to
/// pick up, negative means a deficit to fill.
pub fn station_demand(state: &NetworkState, i: StationId) -> Result<i64, ModelError> {
    let n = state.len();
    match (state.current.get(i.0), state.baseline.get(i.0)) {
        (Some(&c), Some(&b)) => Ok(c as i64 - b as i64),
        _ => Err(ModelError::IndexOutOfRange { index: i.0, n }),
    }
}

/// Dense, generally asymmetric matrix of road distances in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds a matrix from row-major data, checking the diagonal and entries.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        let n = rows.len();
        let mut d = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(ModelError::LengthMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            d.extend(row);
        }
        Self::from_flat(n, d)
    }

    pub fn from_flat(n: usize, d: Vec<f64>) -> Result<Self, ModelError> {
        if d.len() != n * n {
            return Err(ModelError::LengthMismatch {
                expected: n * n,
                found: d.len(),
            });
        }
        for i in 0..n {
            for j in 0..n {
                let v = d[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(ModelError::BadDistance { i, j, value: v });
                }
                if i == j && v != 0.0 {
                    return Err(ModelError::NonZeroDiagonal(i));
                }
            }
        }
        Ok(Self { n, d })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, from: StationId, to: StationId) -> f64 {
        self.d[from.0 * self.n + to.0]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.d[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.d.chunks(self.n.max(1)).take(self.n)
    }
}

/// Fleet physics: capacity, range, battery and the load-linear consumption model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TruckSpec {
    pub capacity_bikes: u32,
    pub max_distance_m: f64,
    pub battery_wh: f64,
    pub base_wh_per_m: f64,
    pub per_bike_wh_per_m: f64,
    pub fleet_limit: u32,
}

/// Truck payload and bike weight from the vehicle data sheets, in kg.
pub const TRUCK_PAYLOAD_KG: f64 = 1150.0;
pub const BIKE_WEIGHT_KG: f64 = 30.2;

impl Default for TruckSpec {
    fn default() -> Self {
        default_truck_spec()
    }
}

/// Folofly F1 truck carrying Bikke 2e bikes: C = floor(1150 / 30.2) = 38,
/// D = 270 km, E = 38.7 kWh, e = 0.1433 Wh/m, e' = 0.00327 Wh/m per bike, V = 20.
pub fn default_truck_spec() -> TruckSpec {
    TruckSpec {
        capacity_bikes: (TRUCK_PAYLOAD_KG / BIKE_WEIGHT_KG).floor() as u32,
        max_distance_m: 270_000.0,
        battery_wh: 38_700.0,
        base_wh_per_m: 0.1433,
        per_bike_wh_per_m: 0.00327,
        fleet_limit: 20,
    }
}

impl TruckSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            self.max_distance_m,
            self.battery_wh,
            self.base_wh_per_m,
            self.per_bike_wh_per_m,
        ];
        if self.capacity_bikes < 1
            || self.fleet_limit < 1
            || positive.iter().any(|v| !v.is_finite() || *v <= 0.0)
        {
            return Err(ModelError::BadTruckSpec(
                "capacity, fleet and physical quantities must be positive",
            ));
        }
        if self.base_wh_per_m * self.max_distance_m > self.battery_wh + 1e-9 {
            return Err(ModelError::BadTruckSpec(
                "an empty truck must be able to drive its full range on one battery",
            ));
        }
        Ok(())
    }
}

/// Fleet economics in yen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostParams {
    /// Business electricity rate, 33.56 yen/kWh.
    pub yen_per_wh: f64,
    /// Per dispatched truck.
    pub fixed_cost_yen: f64,
    /// Per bike loaded or unloaded.
    pub handling_fee_yen: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        Self {
            yen_per_wh: 0.03356,
            fixed_cost_yen: 2740.0,
            handling_fee_yen: 100.0,
        }
    }
}

impl CostParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let all = [self.yen_per_wh, self.fixed_cost_yen, self.handling_fee_yen];
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(ModelError::BadCostParams);
        }
        Ok(())
    }
}

/// One truck's itinerary.
///
/// `visits[0]` is the depot. A depot id later in the list is either a return
/// (no change in load) or a service at the depot station (load changes).
/// `load_after[k]` is the load once visit `k` is done; the load carried on
/// the leg leaving visit `k` is therefore `load_after[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruckRoute {
    pub visits: Vec<StationId>,
    pub load_after: Vec<u32>,
    pub distance_m: f64,
    pub energy_wh: f64,
    pub cost_yen: f64,
}

impl TruckRoute {
    /// Visits whose legs are actually driven: a trailing depot return that is
    /// not followed by further service is recorded but never travelled.
    pub fn travelled_len(&self) -> usize {
        let len = self.visits.len();
        if len > 1
            && self.visits[len - 1].is_depot()
            && self.load_after[len - 1] == self.load_after[len - 2]
        {
            len - 1
        } else {
            len
        }
    }

    /// Signed load change at each visit (positive = pickup).
    pub fn load_changes(&self) -> impl Iterator<Item = (StationId, i64)> + '_ {
        self.visits.iter().enumerate().map(move |(k, &v)| {
            let before = if k == 0 { 0 } else { self.load_after[k - 1] };
            (v, self.load_after[k] as i64 - before as i64)
        })
    }

    pub fn bikes_picked(&self) -> u64 {
        self.load_changes()
            .filter(|(_, dq)| *dq > 0)
            .map(|(_, dq)| dq as u64)
            .sum()
    }

    pub fn bikes_dropped(&self) -> u64 {
        self.load_changes()
            .filter(|(_, dq)| *dq < 0)
            .map(|(_, dq)| (-dq) as u64)
            .sum()
    }

    /// Bikes loaded plus bikes unloaded; each one is billed the handling fee.
    pub fn handling_events(&self) -> u64 {
        self.bikes_picked() + self.bikes_dropped()
    }

    /// Bracketed id listing, e.g. `[0, 2, 3, 0, 5]`.
    pub fn listing(&self) -> String {
        let ids: Vec<String> = self.visits.iter().map(|v| v.0.to_string()).collect();
        format!("[{}]", ids.join(", "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub total_distance_m: f64,
    pub total_energy_wh: f64,
    pub total_cost_yen: f64,
    pub trucks_used: u32,
    pub bikes_moved: u64,
}

/// Demand left over after the fleet retired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Residual {
    pub station: StationId,
    /// Signed, `current - baseline` after service.
    pub demand: i64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Plan {
    pub routes: Vec<TruckRoute>,
    pub totals: Metrics,
    /// Non-empty when fleet, battery or range limits left demand unserved.
    #[serde(default)]
    pub unserved: Vec<Residual>,
}

impl Plan {
    pub fn is_complete(&self) -> bool {
        self.unserved.is_empty()
    }

    /// Stock level of every station after all routes are carried out.
    pub fn post_state(&self, state: &NetworkState) -> Vec<i64> {
        let mut stock: Vec<i64> = state.current.iter().map(|&c| c as i64).collect();
        for r in &self.routes {
            for (v, dq) in r.load_changes() {
                if let Some(s) = stock.get_mut(v.0) {
                    *s -= dq;
                }
            }
        }
        stock
    }

    pub fn bikes_on_trucks(&self) -> u64 {
        self.routes
            .iter()
            .map(|r| r.load_after.last().copied().unwrap_or(0) as u64)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("station index {index} out of range for network of {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("station {0} has zero capacity")]
    ZeroCapacity(StationId),
    #[error("station {0} has coordinates outside the valid range")]
    BadCoordinates(StationId),
    #[error("unknown station tag {0:?} (expected regular, metro or school)")]
    UnknownTag(String),
    #[error("station {0} holds more than 1.2x its capacity")]
    OverCap(StationId),
    #[error("station {0} has a baseline above its capacity")]
    BaselineOverCapacity(StationId),
    #[error("distance d[{i}][{j}] = {value} is negative or not finite")]
    BadDistance { i: usize, j: usize, value: f64 },
    #[error("diagonal entry d[{0}][{0}] is not zero")]
    NonZeroDiagonal(usize),
    #[error("invalid truck spec: {0}")]
    BadTruckSpec(&'static str),
    #[error("cost parameters must be finite and non-negative")]
    BadCostParams,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn state(current: Vec<u32>, baseline: Vec<u32>) -> NetworkState {
        NetworkState::new(current, baseline).unwrap()
    }

    #[test]
    fn demand_examples() {
        let s = state(vec![16, 20, 10], vec![16, 16, 16]);
        assert_eq!(station_demand(&s, StationId(0)).unwrap(), 0);
        assert_eq!(station_demand(&s, StationId(1)).unwrap(), 4);
        assert_eq!(station_demand(&s, StationId(2)).unwrap(), -6);
        assert!(matches!(
            station_demand(&s, StationId(3)),
            Err(ModelError::IndexOutOfRange { index: 3, n: 3 })
        ));
    }

    #[test]
    fn default_spec_constants() {
        let spec = default_truck_spec();
        assert_eq!(spec.capacity_bikes, 38);
        assert_eq!((1150.0f64 / 30.2).floor(), 38.0);
        assert_eq!(spec.battery_wh, 38_700.0);
        assert_eq!(spec.max_distance_m, 270_000.0);
        assert_eq!(spec.fleet_limit, 20);
        let full_range = spec.base_wh_per_m * spec.max_distance_m;
        assert!((full_range - 38_691.0).abs() < 1e-6);
        assert!(full_range <= spec.battery_wh);
        spec.validate().unwrap();
    }

    #[test]
    fn spec_rejects_range_beyond_battery() {
        let spec = TruckSpec {
            max_distance_m: 300_000.0,
            ..default_truck_spec()
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn stock_cap_is_exact_on_round_products() {
        assert_eq!(stock_cap(10, 1.2), 12);
        assert_eq!(stock_cap(5, 1.2), 6);
        assert_eq!(stock_cap(7, 1.2), 9);
        assert_eq!(stock_cap(1, 1.2), 2);
    }

    #[test]
    fn matrix_rejects_bad_entries() {
        assert!(matches!(
            DistanceMatrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 2.0]]),
            Err(ModelError::NonZeroDiagonal(1))
        ));
        assert!(DistanceMatrix::from_rows(vec![vec![0.0, -1.0], vec![1.0, 0.0]]).is_err());
        assert!(DistanceMatrix::from_rows(vec![vec![0.0, f64::NAN], vec![1.0, 0.0]]).is_err());
        let m = DistanceMatrix::from_rows(vec![vec![0.0, 100.0], vec![120.0, 0.0]]).unwrap();
        assert_eq!(m.get(StationId(0), StationId(1)), 100.0);
        assert_eq!(m.get(StationId(1), StationId(0)), 120.0);
    }

    #[test]
    fn state_validation_uses_rounded_cap() {
        let st = |cap| Station {
            id: StationId(0),
            name: "x".into(),
            longitude: 139.7,
            latitude: 35.6,
            capacity: cap,
            tag: StationTag::Regular,
        };
        assert!(state(vec![12], vec![8]).validate(&[st(10)]).is_ok());
        assert!(matches!(
            state(vec![13], vec![8]).validate(&[st(10)]),
            Err(ModelError::OverCap(_))
        ));
        assert!(state(vec![0], vec![11]).validate(&[st(10)]).is_err());
    }

    #[test]
    fn route_listing_and_trailing_return() {
        let r = TruckRoute {
            visits: vec![StationId(0), StationId(2), StationId(3), StationId(0)],
            load_after: vec![0, 5, 0, 0],
            distance_m: 0.0,
            energy_wh: 0.0,
            cost_yen: 0.0,
        };
        assert_eq!(r.listing(), "[0, 2, 3, 0]");
        assert_eq!(r.travelled_len(), 3);
        assert_eq!(r.handling_events(), 10);
    }

    proptest! {
        #[test]
        fn demand_antisymmetric(a in 0u32..100, b in 0u32..100) {
            let fwd = station_demand(&state(vec![a], vec![b]), StationId(0)).unwrap();
            let rev = station_demand(&state(vec![b], vec![a]), StationId(0)).unwrap();
            prop_assert_eq!(fwd, -rev);
        }
    }
}
