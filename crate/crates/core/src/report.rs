//! Strategy comparison and the plan / report output formats.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::energy::{plan_cost, round_half_up_tenths, CostBreakdown};
use crate::model::{CostParams, DistanceMatrix, Metrics, NetworkState, Plan, Station, TruckSpec};
use crate::sim::write_state;
use crate::solver::{solve, validate, SolveError, Strategy, ValidationReport};

pub fn sha256_hex(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p);
    }
    hex::encode(h.finalize())
}

/// Hash of the state exactly as it is written to `state.csv`.
pub fn state_hash(state: &NetworkState) -> String {
    let mut buf = Vec::new();
    write_state(state, &mut buf).expect("writing to memory");
    sha256_hex(&[&buf])
}

/// Machine-readable plan file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanDocument {
    pub strategy: Strategy,
    pub state_hash: String,
    pub cost: CostBreakdown,
    #[serde(flatten)]
    pub plan: Plan,
}

impl PlanDocument {
    pub fn new(strategy: Strategy, plan: Plan, state: &NetworkState, params: &CostParams) -> Self {
        Self {
            strategy,
            state_hash: state_hash(state),
            cost: plan_cost(&plan, params),
            plan,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// One bracketed route per line, then a metrics block.
pub fn route_listing(plan: &Plan, params: &CostParams) -> String {
    let mut out = String::new();
    for r in &plan.routes {
        out.push_str(&r.listing());
        out.push('\n');
    }
    let cost = plan_cost(plan, params);
    let t = &plan.totals;
    out.push('\n');
    let _ = writeln!(out, "total distance (m): {:.1}", t.total_distance_m);
    let _ = writeln!(out, "energy (Wh): {:.1}", t.total_energy_wh);
    let _ = writeln!(out, "cost (yen): {:.1}", cost.rounded_total());
    let _ = writeln!(out, "  fixed: {:.1}", cost.fixed_yen);
    let _ = writeln!(
        out,
        "  electricity: {:.1}",
        round_half_up_tenths(cost.electricity_yen)
    );
    let _ = writeln!(out, "  handling: {:.1}", cost.handling_yen);
    let _ = writeln!(out, "trucks used: {}", t.trucks_used);
    let _ = writeln!(out, "bikes moved: {}", t.bikes_moved);
    if plan.unserved.is_empty() {
        let _ = writeln!(out, "unserved: none");
    } else {
        let items: Vec<String> = plan
            .unserved
            .iter()
            .map(|u| format!("{}:{:+}", u.station, u.demand))
            .collect();
        let _ = writeln!(out, "unserved: {}", items.join(" "));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyRow {
    pub strategy: Strategy,
    pub metrics: Metrics,
    pub cost: CostBreakdown,
    pub complete: bool,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Winners {
    pub distance: Strategy,
    pub energy: Strategy,
    pub cost: Strategy,
    pub trucks: Strategy,
    pub bikes_moved: Strategy,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunMetadata {
    pub seed: Option<u64>,
    pub slot: Option<String>,
    pub dataset_hash: Option<String>,
    pub state_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub metadata: RunMetadata,
    pub rows: Vec<StrategyRow>,
    pub winners: Winners,
}

/// All three plans for one state, with their validation reports.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub report: ComparisonReport,
    pub plans: Vec<(Strategy, Plan, ValidationReport)>,
}

impl Comparison {
    pub fn all_valid(&self) -> bool {
        self.plans.iter().all(|(_, _, v)| v.is_valid())
    }

    pub fn plan(&self, strategy: Strategy) -> &Plan {
        &self
            .plans
            .iter()
            .find(|(s, _, _)| *s == strategy)
            .expect("every strategy is solved")
            .1
    }
}

fn pick(rows: &[StrategyRow], key: impl Fn(&StrategyRow) -> f64, maximize: bool) -> Strategy {
    // first strategy wins ties, in the fixed nearest / demand / energy order
    let mut best = &rows[0];
    for r in &rows[1..] {
        let better = if maximize {
            key(r) > key(best)
        } else {
            key(r) < key(best)
        };
        if better {
            best = r;
        }
    }
    best.strategy
}

/// Solves every strategy on the same state (concurrently) and validates each plan.
pub fn run_compare(
    stations: &[Station],
    state: &NetworkState,
    matrix: &DistanceMatrix,
    spec: &TruckSpec,
    params: &CostParams,
    mut metadata: RunMetadata,
) -> Result<Comparison, SolveError> {
    let solved: Vec<Result<Plan, SolveError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = Strategy::ALL
            .iter()
            .map(|&s| scope.spawn(move || solve(s, stations, state, matrix, spec, params)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("solver thread panicked"))
            .collect()
    });

    let mut plans = Vec::with_capacity(3);
    for (s, plan) in Strategy::ALL.iter().zip(solved) {
        let plan = plan?;
        let report = validate(&plan, stations, state, matrix, spec, params);
        plans.push((*s, plan, report));
    }
    let rows: Vec<StrategyRow> = plans
        .iter()
        .map(|(s, p, v)| StrategyRow {
            strategy: *s,
            metrics: p.totals,
            cost: plan_cost(p, params),
            complete: p.is_complete(),
            valid: v.is_valid(),
        })
        .collect();
    let winners = Winners {
        distance: pick(&rows, |r| r.metrics.total_distance_m, false),
        energy: pick(&rows, |r| r.metrics.total_energy_wh, false),
        cost: pick(&rows, |r| r.metrics.total_cost_yen, false),
        trucks: pick(&rows, |r| r.metrics.trucks_used as f64, false),
        bikes_moved: pick(&rows, |r| r.metrics.bikes_moved as f64, true),
    };
    metadata.state_hash = state_hash(state);
    Ok(Comparison {
        report: ComparisonReport {
            metadata,
            rows,
            winners,
        },
        plans,
    })
}

impl ComparisonReport {
    /// Text table with one column per strategy.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let m = &self.metadata;
        if let Some(seed) = m.seed {
            let _ = writeln!(out, "seed: {seed}");
        }
        if let Some(slot) = &m.slot {
            let _ = writeln!(out, "slot: {slot}");
        }
        if let Some(h) = &m.dataset_hash {
            let _ = writeln!(out, "dataset sha256: {h}");
        }
        let _ = writeln!(out, "state sha256: {}", m.state_hash);
        out.push('\n');
        let _ = write!(out, "{:<22}", "");
        for r in &self.rows {
            let _ = write!(out, "{:>14}", r.strategy.name());
        }
        out.push('\n');
        let line = |out: &mut String, label: &str, f: &dyn Fn(&StrategyRow) -> String| {
            let _ = write!(out, "{label:<22}");
            for r in &self.rows {
                let _ = write!(out, "{:>14}", f(r));
            }
            out.push('\n');
        };
        line(&mut out, "total distance (m)", &|r| {
            format!("{:.1}", r.metrics.total_distance_m)
        });
        line(&mut out, "energy (Wh)", &|r| {
            format!("{:.1}", r.metrics.total_energy_wh)
        });
        line(&mut out, "cost (yen)", &|r| {
            format!("{:.1}", r.cost.rounded_total())
        });
        line(&mut out, "trucks used", &|r| {
            r.metrics.trucks_used.to_string()
        });
        line(&mut out, "bikes moved", &|r| {
            r.metrics.bikes_moved.to_string()
        });
        line(&mut out, "complete", &|r| {
            if r.complete {
                "yes".into()
            } else {
                "no".into()
            }
        });
        line(&mut out, "valid", &|r| {
            if r.valid {
                "yes".into()
            } else {
                "NO".into()
            }
        });
        out.push('\n');
        let w = &self.winners;
        let _ = writeln!(
            out,
            "best: distance={} energy={} cost={} trucks={} bikes_moved={}",
            w.distance, w.energy, w.cost, w.trucks, w.bikes_moved
        );
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{default_truck_spec, StationId, StationTag};

    fn fixture() -> (Vec<Station>, NetworkState, DistanceMatrix) {
        let stations = (0..4)
            .map(|i| Station {
                id: StationId(i),
                name: format!("s{i}"),
                longitude: 139.7,
                latitude: 35.6,
                capacity: 30,
                tag: StationTag::Regular,
            })
            .collect();
        let state = NetworkState {
            current: vec![20, 26, 14, 20],
            baseline: vec![20, 20, 20, 20],
        };
        let m = DistanceMatrix::from_rows(vec![
            vec![0.0, 400.0, 900.0, 300.0],
            vec![420.0, 0.0, 350.0, 500.0],
            vec![880.0, 360.0, 0.0, 700.0],
            vec![310.0, 520.0, 690.0, 0.0],
        ])
        .unwrap();
        (stations, state, m)
    }

    #[test]
    fn compare_runs_all_strategies_on_one_state() {
        let (st, state, m) = fixture();
        let c = run_compare(
            &st,
            &state,
            &m,
            &default_truck_spec(),
            &CostParams::default(),
            RunMetadata::default(),
        )
        .unwrap();
        assert_eq!(c.report.rows.len(), 3);
        assert!(c.all_valid());
        assert_eq!(c.report.metadata.state_hash, state_hash(&state));
        let table = c.report.to_table();
        assert!(table.contains("total distance (m)"));
        assert!(table.contains("nearest"));
    }

    #[test]
    fn zero_demand_gives_identical_zero_rows() {
        let (st, _, m) = fixture();
        let state = NetworkState {
            current: vec![20; 4],
            baseline: vec![20; 4],
        };
        let c = run_compare(
            &st,
            &state,
            &m,
            &default_truck_spec(),
            &CostParams::default(),
            RunMetadata::default(),
        )
        .unwrap();
        for r in &c.report.rows {
            assert_eq!(r.metrics, Metrics::default());
        }
    }

    #[test]
    fn plan_document_round_trip() {
        let (st, state, m) = fixture();
        let params = CostParams::default();
        let plan = solve(
            Strategy::MaxDemand,
            &st,
            &state,
            &m,
            &default_truck_spec(),
            &params,
        )
        .unwrap();
        let doc = PlanDocument::new(Strategy::MaxDemand, plan, &state, &params);
        let back = PlanDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(doc, back);
        let listing = route_listing(&doc.plan, &params);
        assert!(listing.starts_with("[0, 1, 2, 0]\n"), "{listing}");
        assert!(listing.contains("unserved: none"));
    }
}
