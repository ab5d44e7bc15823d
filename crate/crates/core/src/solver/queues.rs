use serde::{Deserialize, Serialize};

use crate::model::{NetworkState, StationId};

/// Stations above baseline (to pick up from) and below it (to deliver to).
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct WorkQueues {
    pub overflow: Vec<(StationId, u32)>,
    pub underflow: Vec<(StationId, u32)>,
}

impl WorkQueues {
    pub fn is_empty(&self) -> bool {
        self.overflow.is_empty() && self.underflow.is_empty()
    }

    pub fn total_surplus(&self) -> u64 {
        self.overflow.iter().map(|&(_, s)| s as u64).sum()
    }

    pub fn total_deficit(&self) -> u64 {
        self.underflow.iter().map(|&(_, d)| d as u64).sum()
    }
}

/// Splits stations by the sign of `current - baseline`, in ascending id order.
/// The depot is classified like any other station.
pub fn classify(state: &NetworkState) -> WorkQueues {
    let mut q = WorkQueues::default();
    for (i, (&c, &b)) in state.current.iter().zip(&state.baseline).enumerate() {
        if c > b {
            q.overflow.push((StationId(i), c - b));
        } else if c < b {
            q.underflow.push((StationId(i), b - c));
        }
    }
    q
}
