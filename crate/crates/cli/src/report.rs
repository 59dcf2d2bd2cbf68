//! Cross-route comparison report, serialized as a JSON artifact.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub name: String,
    pub probes: Vec<ProbeReport>,
    /// Configured tolerances keyed by canonical pair name.
    pub tolerances: BTreeMap<String, f64>,
    /// Routes that must produce a value at every probe.
    pub mandatory: Vec<String>,
    pub all_mandatory_ok: bool,
    /// Wall-clock seconds per route, summed over probes. Not serialized:
    /// artifacts must be byte-identical across runs.
    #[serde(skip)]
    pub route_runtimes: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeReport {
    pub x: Vec<f64>,
    pub t: f64,
    /// Route name -> value; None marks a failed route.
    pub values: BTreeMap<String, Option<f64>>,
    /// Route name -> failure description (soft failures keep their value).
    pub failures: BTreeMap<String, String>,
    pub diffs: Vec<PairDiff>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairDiff {
    pub pair: String,
    pub abs_diff: f64,
    pub tolerance: Option<f64>,
    /// Set iff a tolerance is configured for this pair.
    pub pass: Option<bool>,
}

impl ComparisonReport {
    /// Recompute every pass flag from the stored values and tolerances;
    /// the emitted report must be self-consistent.
    pub fn is_self_consistent(&self) -> bool {
        for probe in &self.probes {
            for diff in &probe.diffs {
                let expected = diff.tolerance.map(|tol| diff.abs_diff <= tol);
                if diff.pass != expected {
                    return false;
                }
                if diff.tolerance != self.tolerances.get(&diff.pair).copied() {
                    return false;
                }
            }
        }
        true
    }
}
