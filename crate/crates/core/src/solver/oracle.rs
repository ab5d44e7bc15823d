//! Exhaustive single-truck optimum for tiny networks, used to bound the
//! greedy strategies in tests.
//!
//! Every order of the stations with nonzero demand is tried; each station is
//! served completely in one visit and the load must stay within `[0, C]`.
//! The truck starts at the depot and never returns to it.

use thiserror::Error;

use super::{check_inputs, SolveError};
use crate::energy::{plan_cost, route_cost};
use crate::model::{
    CostParams, DistanceMatrix, Metrics, NetworkState, Plan, Station, StationId, TruckRoute,
    TruckSpec,
};

pub const ORACLE_MAX_STATIONS: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Distance,
    Energy,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("{0} stations exceed the brute-force limit of {ORACLE_MAX_STATIONS}")]
    TooLarge(usize),
    #[error("no single-truck order serves every station in full")]
    Infeasible,
    #[error(transparent)]
    Input(#[from] SolveError),
}

struct Search<'a> {
    matrix: &'a DistanceMatrix,
    spec: &'a TruckSpec,
    objective: Objective,
    demand: Vec<(usize, i64)>,
    used: Vec<bool>,
    order: Vec<usize>,
    best: Option<(f64, Vec<usize>)>,
}

impl Search<'_> {
    fn dfs(&mut self, pos: usize, load: i64, distance: f64, energy: f64) {
        let score = match self.objective {
            Objective::Distance => distance,
            Objective::Energy => energy,
        };
        if let Some((best, _)) = &self.best {
            if score >= *best {
                return;
            }
        }
        if self.order.len() == self.demand.len() {
            self.best = Some((score, self.order.clone()));
            return;
        }
        for k in 0..self.demand.len() {
            if self.used[k] {
                continue;
            }
            let (station, r) = self.demand[k];
            let next_load = load + r;
            if next_load < 0 || next_load > self.spec.capacity_bikes as i64 {
                continue;
            }
            let d = self.matrix.get(StationId(pos), StationId(station));
            let e = (self.spec.base_wh_per_m + self.spec.per_bike_wh_per_m * load as f64) * d;
            if distance + d > self.spec.max_distance_m || energy + e > self.spec.battery_wh {
                continue;
            }
            self.used[k] = true;
            self.order.push(station);
            self.dfs(station, next_load, distance + d, energy + e);
            self.order.pop();
            self.used[k] = false;
        }
    }
}

/// Objective-minimal single-truck plan serving every station in full.
pub fn brute_force_oracle(
    stations: &[Station],
    state: &NetworkState,
    matrix: &DistanceMatrix,
    spec: &TruckSpec,
    params: &CostParams,
    objective: Objective,
) -> Result<Plan, OracleError> {
    if stations.len() > ORACLE_MAX_STATIONS {
        return Err(OracleError::TooLarge(stations.len()));
    }
    check_inputs(stations, state, matrix, spec)?;
    let demand: Vec<(usize, i64)> = state
        .current
        .iter()
        .zip(&state.baseline)
        .enumerate()
        .map(|(i, (&c, &b))| (i, c as i64 - b as i64))
        .filter(|&(_, r)| r != 0)
        .collect();
    if demand.is_empty() {
        return Ok(Plan::default());
    }
    let mut search = Search {
        matrix,
        spec,
        objective,
        used: vec![false; demand.len()],
        order: Vec::with_capacity(demand.len()),
        demand,
        best: None,
    };
    search.dfs(0, 0, 0.0, 0.0);
    let (_, order) = search.best.ok_or(OracleError::Infeasible)?;

    let mut visits = vec![StationId::DEPOT];
    let mut loads = vec![0u32];
    let mut load = 0i64;
    for station in order {
        load += state.current[station] as i64 - state.baseline[station] as i64;
        if station == 0 && visits.len() == 1 {
            loads[0] = load as u32;
        } else {
            visits.push(StationId(station));
            loads.push(load as u32);
        }
    }
    let mut distance = 0.0;
    let mut energy = 0.0;
    for k in 1..visits.len() {
        let d = matrix.get(visits[k - 1], visits[k]);
        distance += d;
        energy += (spec.base_wh_per_m + spec.per_bike_wh_per_m * loads[k - 1] as f64) * d;
    }
    let mut route = TruckRoute {
        visits,
        load_after: loads,
        distance_m: distance,
        energy_wh: energy,
        cost_yen: 0.0,
    };
    route.cost_yen = route_cost(&route, params).total();
    let bikes_moved = route.bikes_picked();
    let mut plan = Plan {
        routes: vec![route],
        totals: Metrics::default(),
        unserved: Vec::new(),
    };
    plan.totals = Metrics {
        total_distance_m: distance,
        total_energy_wh: energy,
        total_cost_yen: plan_cost(&plan, params).total(),
        trucks_used: 1,
        bikes_moved,
    };
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{default_truck_spec, StationTag};
    use crate::solver::validate;

    fn stations(n: usize) -> Vec<Station> {
        (0..n)
            .map(|i| Station {
                id: StationId(i),
                name: format!("s{i}"),
                longitude: 139.7,
                latitude: 35.6,
                capacity: 40,
                tag: StationTag::Regular,
            })
            .collect()
    }

    #[test]
    fn two_stations_single_order() {
        let m = DistanceMatrix::from_rows(vec![vec![0.0, 250.0], vec![270.0, 0.0]]).unwrap();
        let state = NetworkState {
            current: vec![13, 7],
            baseline: vec![10, 10],
        };
        let plan = brute_force_oracle(
            &stations(2),
            &state,
            &m,
            &default_truck_spec(),
            &CostParams::default(),
            Objective::Distance,
        )
        .unwrap();
        assert_eq!(plan.routes[0].listing(), "[0, 1]");
        assert_eq!(plan.routes[0].load_after, vec![3, 0]);
        assert_eq!(plan.totals.total_distance_m, 250.0);
        let rep = validate(
            &plan,
            &stations(2),
            &state,
            &m,
            &default_truck_spec(),
            &CostParams::default(),
        );
        assert!(rep.is_valid(), "{}", rep.summary());
    }

    #[test]
    fn picks_shorter_of_two_orders() {
        // depot surplus 2, deficits at 1 and 2; 0→2→1 is shorter
        let m = DistanceMatrix::from_rows(vec![
            vec![0.0, 900.0, 100.0],
            vec![900.0, 0.0, 900.0],
            vec![100.0, 100.0, 0.0],
        ])
        .unwrap();
        let state = NetworkState {
            current: vec![12, 9, 9],
            baseline: vec![10, 10, 10],
        };
        let plan = brute_force_oracle(
            &stations(3),
            &state,
            &m,
            &default_truck_spec(),
            &CostParams::default(),
            Objective::Distance,
        )
        .unwrap();
        assert_eq!(plan.routes[0].listing(), "[0, 2, 1]");
        assert_eq!(plan.totals.total_distance_m, 200.0);
    }

    #[test]
    fn infeasible_and_too_large() {
        let m = DistanceMatrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let state = NetworkState {
            current: vec![10, 7],
            baseline: vec![10, 10],
        };
        assert_eq!(
            brute_force_oracle(
                &stations(2),
                &state,
                &m,
                &default_truck_spec(),
                &CostParams::default(),
                Objective::Energy
            ),
            Err(OracleError::Infeasible)
        );
        let big = DistanceMatrix::from_rows(vec![vec![0.0; 8]; 8]).unwrap();
        let state = NetworkState {
            current: vec![1; 8],
            baseline: vec![1; 8],
        };
        assert_eq!(
            brute_force_oracle(
                &stations(8),
                &state,
                &big,
                &default_truck_spec(),
                &CostParams::default(),
                Objective::Energy
            ),
            Err(OracleError::TooLarge(8))
        );
    }
}
