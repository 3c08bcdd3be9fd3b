use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::bins::BinSets;
use super::core::{ObjectiveTerms, StartReport};
use crate::fmt17;

/// Final losses of all three stages.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FinalLosses {
    pub core: ObjectiveTerms,
    pub sidebranch_residual: f64,
    pub phase_residual_rms: BTreeMap<usize, f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FitReport {
    pub alpha_opt: Vec<f64>,
    pub gamma_opt: Vec<f64>,
    pub kappa_opt: Vec<f64>,
    pub theta_opt: BTreeMap<usize, Vec<f64>>,
    pub core_starts: Vec<StartReport>,
    pub side_starts: Vec<StartReport>,
    pub losses: FinalLosses,
    pub bins: BinSets,
    pub no_progress: bool,
    /// Not serialized, so reports of identical runs are identical.
    #[serde(skip)]
    pub wall_time: Duration,
}

impl FitReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    /// One row per iteration and start: `stage,start,iteration,best_objective`.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("stage,start,iteration,best_objective\n");
        for (stage, starts) in [
            ("core", &self.core_starts),
            ("sidebranch", &self.side_starts),
        ] {
            for s in starts {
                for (i, v) in s.trace.iter().enumerate() {
                    let _ = writeln!(out, "{stage},{},{i},{}", s.start, fmt17(*v));
                }
            }
        }
        out
    }
}
