//! Sequential greedy dispatch.
//!
//! Trucks leave the depot one at a time. At each step the truck picks the
//! next station among those it can act on: a surplus station while it has
//! room, a deficit station while it carries bikes. The strategy ranks the
//! candidates. A visit moves as many bikes as the station needs and the
//! truck allows; any remainder waits for a later truck, since a truck never
//! serves the same station twice.
//!
//! The energy strategy prices a candidate as the leg to it plus, when the
//! visit would fill or empty the truck, the depot leg that visit forces.
//!
//! A truck heads back to the depot when it fills up on a pickup or empties
//! on a drop. That leg is only driven (and charged) if the truck then serves
//! another station; otherwise the trailing depot id is kept in the listing
//! as a marker. Nothing is recharged or unloaded at the depot. A candidate
//! whose leg would exceed the truck's remaining range or battery is skipped,
//! and a truck with no candidate left retires where it stands.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{check_inputs, SolveError};
use crate::energy::{edge_energy_unchecked, plan_cost, route_cost};
use crate::model::{
    CostParams, DistanceMatrix, Metrics, NetworkState, Plan, Residual, Station, StationId,
    TruckRoute, TruckSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Closest candidate first.
    NearestDistance,
    /// Largest outstanding demand first, then closest.
    MaxDemand,
    /// Cheapest leg in watt-hours at the current load, counting the depot
    /// return the visit would force.
    MinEnergy,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [
        Strategy::NearestDistance,
        Strategy::MaxDemand,
        Strategy::MinEnergy,
    ];

    /// Short name used on the command line and in file names.
    pub fn name(self) -> &'static str {
        match self {
            Strategy::NearestDistance => "nearest",
            Strategy::MaxDemand => "demand",
            Strategy::MinEnergy => "energy",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "nearest" | "distance" | "nearest-distance" => Ok(Strategy::NearestDistance),
            "demand" | "max-demand" => Ok(Strategy::MaxDemand),
            "energy" | "min-energy" => Ok(Strategy::MinEnergy),
            other => Err(format!(
                "unknown strategy {other:?} (expected nearest, demand or energy)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Leg {
    distance: f64,
    energy: f64,
}

struct Truck {
    pos: usize,
    load: u32,
    distance: f64,
    energy: f64,
    /// Depot return not yet driven.
    pending: Option<Leg>,
    visits: Vec<StationId>,
    loads: Vec<u32>,
    served: Vec<bool>,
    services: usize,
}

impl Truck {
    fn new(n: usize) -> Self {
        Truck {
            pos: 0,
            load: 0,
            distance: 0.0,
            energy: 0.0,
            pending: None,
            visits: vec![StationId::DEPOT],
            loads: vec![0],
            served: vec![false; n],
            services: 0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    station: usize,
    /// Signed load change: positive picks up.
    delta: i64,
    leg: Leg,
    demand: u64,
    /// Energy of the depot return this visit would trigger, or 0.
    forced_return_wh: f64,
}

/// Ranking key; lower is better, ties fall to ascending station id.
fn rank(strategy: Strategy, c: &Candidate) -> (f64, f64) {
    match strategy {
        Strategy::NearestDistance => (c.leg.distance, 0.0),
        Strategy::MaxDemand => (-(c.demand as f64), c.leg.distance),
        Strategy::MinEnergy => (c.leg.energy + c.forced_return_wh, 0.0),
    }
}

fn better(strategy: Strategy, a: &Candidate, b: &Candidate) -> bool {
    let (ka, kb) = (rank(strategy, a), rank(strategy, b));
    match ka.0.total_cmp(&kb.0).then(ka.1.total_cmp(&kb.1)) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => a.station < b.station,
    }
}

fn candidates<'a>(
    truck: &'a Truck,
    residual: &'a [i64],
    matrix: &'a DistanceMatrix,
    spec: &'a TruckSpec,
) -> impl Iterator<Item = Candidate> + 'a {
    let pending = truck.pending.unwrap_or(Leg {
        distance: 0.0,
        energy: 0.0,
    });
    residual.iter().enumerate().filter_map(move |(i, &r)| {
        if r == 0 || truck.served[i] {
            return None;
        }
        let delta = if r > 0 && truck.load < spec.capacity_bikes {
            (r as u64).min((spec.capacity_bikes - truck.load) as u64) as i64
        } else if r < 0 && truck.load > 0 {
            -(((-r) as u64).min(truck.load as u64) as i64)
        } else {
            return None;
        };
        let distance = matrix.get(StationId(truck.pos), StationId(i));
        let energy = edge_energy_unchecked(distance, truck.load, spec);
        let reachable = truck.distance + pending.distance + distance <= spec.max_distance_m
            && truck.energy + pending.energy + energy <= spec.battery_wh;
        if !reachable {
            return None;
        }
        let after = (truck.load as i64 + delta) as u32;
        let forces_return =
            i != 0 && ((delta > 0 && after == spec.capacity_bikes) || (delta < 0 && after == 0));
        let forced_return_wh = if forces_return {
            edge_energy_unchecked(matrix.get(StationId(i), StationId::DEPOT), after, spec)
        } else {
            0.0
        };
        Some(Candidate {
            station: i,
            delta,
            leg: Leg { distance, energy },
            demand: r.unsigned_abs(),
            forced_return_wh,
        })
    })
}

fn serve(
    truck: &mut Truck,
    c: &Candidate,
    residual: &mut [i64],
    matrix: &DistanceMatrix,
    spec: &TruckSpec,
) {
    if let Some(p) = truck.pending.take() {
        truck.distance += p.distance;
        truck.energy += p.energy;
    }
    truck.distance += c.leg.distance;
    truck.energy += c.leg.energy;
    truck.load = (truck.load as i64 + c.delta) as u32;
    residual[c.station] -= c.delta;
    truck.served[c.station] = true;
    truck.services += 1;

    if c.station == truck.pos && truck.visits.last() == Some(&StationId(c.station)) {
        // serving the depot while parked there
        *truck.loads.last_mut().expect("route starts at depot") = truck.load;
    } else {
        truck.visits.push(StationId(c.station));
        truck.loads.push(truck.load);
    }
    truck.pos = c.station;

    let full_after_pickup = c.delta > 0 && truck.load == spec.capacity_bikes;
    let empty_after_drop = c.delta < 0 && truck.load == 0;
    if (full_after_pickup || empty_after_drop) && truck.pos != 0 {
        let distance = matrix.get(StationId(truck.pos), StationId::DEPOT);
        truck.pending = Some(Leg {
            distance,
            energy: edge_energy_unchecked(distance, truck.load, spec),
        });
        truck.visits.push(StationId::DEPOT);
        truck.loads.push(truck.load);
        truck.pos = 0;
    }
}

/// Routes up to `spec.fleet_limit` trucks to bring every station to its
/// baseline. When limits leave demand unmet the plan lists it in `unserved`.
pub fn solve(
    strategy: Strategy,
    stations: &[Station],
    state: &NetworkState,
    matrix: &DistanceMatrix,
    spec: &TruckSpec,
    params: &CostParams,
) -> Result<Plan, SolveError> {
    check_inputs(stations, state, matrix, spec)?;
    let n = stations.len();
    let mut residual: Vec<i64> = state
        .current
        .iter()
        .zip(&state.baseline)
        .map(|(&c, &b)| c as i64 - b as i64)
        .collect();

    let mut routes = Vec::new();
    while routes.len() < spec.fleet_limit as usize && residual.iter().any(|&r| r > 0) {
        let mut truck = Truck::new(n);
        loop {
            let best = candidates(&truck, &residual, matrix, spec).reduce(|a, b| {
                if better(strategy, &b, &a) {
                    b
                } else {
                    a
                }
            });
            match best {
                Some(c) => serve(&mut truck, &c, &mut residual, matrix, spec),
                None => break,
            }
        }
        if truck.services == 0 {
            // nothing reachable from the depot; more trucks would fare the same
            break;
        }
        let mut route = TruckRoute {
            visits: truck.visits,
            load_after: truck.loads,
            distance_m: truck.distance,
            energy_wh: truck.energy,
            cost_yen: 0.0,
        };
        route.cost_yen = route_cost(&route, params).total();
        routes.push(route);
    }

    let unserved = residual
        .iter()
        .enumerate()
        .filter(|(_, &r)| r != 0)
        .map(|(i, &r)| Residual {
            station: StationId(i),
            demand: r,
        })
        .collect();
    let mut plan = Plan {
        routes,
        totals: Metrics::default(),
        unserved,
    };
    plan.totals = Metrics {
        total_distance_m: plan.routes.iter().map(|r| r.distance_m).sum(),
        total_energy_wh: plan.routes.iter().map(|r| r.energy_wh).sum(),
        total_cost_yen: plan_cost(&plan, params).total(),
        trucks_used: plan.routes.len() as u32,
        bikes_moved: plan.routes.iter().map(|r| r.bikes_picked()).sum(),
    };
    Ok(plan)
}
