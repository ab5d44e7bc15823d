//! Time-slot utilization profiles.
//!
//! Each slot gives, for regular and special (metro / school-company)
//! stations, the expected fill ratio used as the Poisson rate factor and the
//! baseline ratio used as the rebalancing target. Only the `day` slot carries
//! measured ratios (79% / 80% regular, 68% / 90% special); `morning`,
//! `evening` and `night` are illustrative peak-shaped defaults.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::model::StationTag;

/// The slot whose ratios come from observed data.
pub const DAY_SLOT: &str = "day";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotRates {
    #[serde(rename = "slot")]
    pub label: String,
    pub regular_util: f64,
    pub special_util: f64,
    pub regular_base: f64,
    pub special_base: f64,
}

impl SlotRates {
    pub fn utilization(&self, tag: StationTag) -> f64 {
        if tag.is_special() {
            self.special_util
        } else {
            self.regular_util
        }
    }

    pub fn baseline(&self, tag: StationTag) -> f64 {
        if tag.is_special() {
            self.special_base
        } else {
            self.regular_base
        }
    }

    fn validate(&self) -> Result<(), SimError> {
        let util_ok = [self.regular_util, self.special_util]
            .iter()
            .all(|v| v.is_finite() && (0.0..=1.2).contains(v));
        let base_ok = [self.regular_base, self.special_base]
            .iter()
            .all(|v| v.is_finite() && (0.0..=1.0).contains(v));
        if util_ok && base_ok {
            Ok(())
        } else {
            Err(SimError::BadProfile(format!(
                "slot {:?}: utilization must lie in [0, 1.2] and baselines in [0, 1]",
                self.label
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilizationProfile {
    pub slots: Vec<SlotRates>,
}

impl Default for UtilizationProfile {
    fn default() -> Self {
        let slot = |label: &str, ru, su, rb, sb| SlotRates {
            label: label.to_string(),
            regular_util: ru,
            special_util: su,
            regular_base: rb,
            special_base: sb,
        };
        UtilizationProfile {
            slots: vec![
                slot("morning", 0.70, 0.55, 0.80, 0.90),
                slot(DAY_SLOT, 0.79, 0.68, 0.80, 0.90),
                slot("evening", 0.72, 0.60, 0.80, 0.85),
                slot("night", 0.90, 0.85, 0.80, 0.80),
            ],
        }
    }
}

impl UtilizationProfile {
    pub fn new(slots: Vec<SlotRates>) -> Result<Self, SimError> {
        for s in &slots {
            s.validate()?;
        }
        Ok(Self { slots })
    }

    pub fn slot(&self, label: &str) -> Result<&SlotRates, SimError> {
        self.slots
            .iter()
            .find(|s| s.label == label)
            .ok_or_else(|| SimError::UnknownSlot(label.to_string()))
    }

    /// Reads `slot,regular_util,special_util,regular_base,special_base` rows.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self, SimError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let slots = rdr
            .deserialize()
            .collect::<Result<Vec<SlotRates>, _>>()
            .map_err(|e| SimError::BadProfile(e.to_string()))?;
        if slots.is_empty() {
            return Err(SimError::BadProfile("profile has no slots".into()));
        }
        Self::new(slots)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SimError> {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| SimError::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_reader(file)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("slot,regular_util,special_util,regular_base,special_base\n");
        for s in &self.slots {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                s.label, s.regular_util, s.special_util, s.regular_base, s.special_base
            ));
        }
        out
    }
}
