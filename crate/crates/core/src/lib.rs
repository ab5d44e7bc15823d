//! Truck rebalancing for station-based bike sharing.
//!
//! A network of docking stations drifts away from its target stock over the
//! day. This crate simulates that drift, plans truck routes that restore the
//! targets with one of three greedy strategies, and scores the plans by
//! distance, battery energy and operating cost.
//!
//! ```
//! use rebalance::{solve, validate, CostParams, DistanceMatrix, NetworkState, Strategy};
//! use rebalance::model::{default_truck_spec, Station, StationId, StationTag};
//!
//! let stations: Vec<Station> = (0..3)
//!     .map(|i| Station {
//!         id: StationId(i),
//!         name: format!("s{i}"),
//!         longitude: 139.74,
//!         latitude: 35.66,
//!         capacity: 20,
//!         tag: StationTag::Regular,
//!     })
//!     .collect();
//! let state = NetworkState { current: vec![10, 14, 6], baseline: vec![10, 10, 10] };
//! let matrix = DistanceMatrix::from_rows(vec![
//!     vec![0.0, 300.0, 800.0],
//!     vec![320.0, 0.0, 450.0],
//!     vec![790.0, 470.0, 0.0],
//! ])?;
//! let spec = default_truck_spec();
//! let params = CostParams::default();
//!
//! let plan = solve(Strategy::NearestDistance, &stations, &state, &matrix, &spec, &params)?;
//! assert_eq!(plan.routes[0].listing(), "[0, 1, 2, 0]");
//! assert!(validate(&plan, &stations, &state, &matrix, &spec, &params).is_valid());
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod energy;
pub mod ingest;
pub mod model;
pub mod report;
pub mod sim;
pub mod solver;

pub use energy::{edge_energy, plan_cost, route_cost, route_metrics, CostBreakdown, EnergyError};
pub use ingest::{
    fetch_block, load_matrix, load_stations, plan_batches, save_matrix, stitch, IngestError,
    MatrixBlock,
};
pub use model::{
    default_truck_spec, station_demand, CostParams, DistanceMatrix, Metrics, ModelError,
    NetworkState, Plan, Residual, Station, StationId, StationTag, TruckRoute, TruckSpec,
};
pub use report::{run_compare, Comparison, ComparisonReport, PlanDocument};
pub use sim::{generate_state, SimConfig, SimError, UtilizationProfile};
pub use solver::{brute_force_oracle, solve, validate, SolveError, Strategy, ValidationReport};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/model.md")]
    struct Model;
    #[doc = include_str!("../../../book/src/simulation.md")]
    struct Simulation;
    #[doc = include_str!("../../../book/src/energy.md")]
    struct Energy;
    #[doc = include_str!("../../../book/src/strategies.md")]
    struct Strategies;
    #[doc = include_str!("../../../book/src/distance.md")]
    struct Distance;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}
