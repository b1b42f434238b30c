use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RobotTrajectory {
    /// 1-based robot number.
    pub robot: usize,
    /// Cells from tick 0 to `loop_tick`.
    pub prefix: Vec<usize>,
    /// Cells from `loop_tick` to the end of one loop; first and last are equal.
    pub suffix: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TickRead {
    pub tick: usize,
    pub from: String,
    pub to: String,
    /// Index of the automaton edge, in file order.
    pub edge: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuchiRun {
    pub final_state: String,
    pub prefix_states: Vec<String>,
    pub suffix_states: Vec<String>,
    pub prefix_reads: Vec<TickRead>,
    pub suffix_reads: Vec<TickRead>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Objectives {
    pub prefix: i64,
    /// `None` when the final state's self-loop covers the last observation.
    pub suffix: Option<i64>,
    pub projection: i64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetCounts {
    pub places: usize,
    pub transitions: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub rmpn: NetCounts,
    pub quotient: NetCounts,
    pub buchi: NetCounts,
    pub composed: NetCounts,
    pub k: usize,
    pub prefix_variables: usize,
    pub suffix_variables: Option<usize>,
    /// Set when prefix and suffix were solved as one model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lasso_variables: Option<usize>,
    pub projection_variables: usize,
    pub marking_sequence: usize,
    pub solver_nodes: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub build_ms: f64,
    pub prefix_ms: f64,
    pub suffix_ms: f64,
    pub projection_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub robots: usize,
    pub cell_names: Vec<String>,
    pub trajectories: Vec<RobotTrajectory>,
    pub loop_tick: usize,
    /// Ticks reached by synchronous moves of the whole team.
    pub sync_points: Vec<usize>,
    pub buchi_run: BuchiRun,
    pub objectives: Objectives,
    pub counts: Counts,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

impl Plan {
    /// Positions at ticks `0..=loop_tick + period`, one tick per row.
    pub fn timeline(&self) -> Vec<Vec<usize>> {
        let Some(first) = self.trajectories.first() else {
            return vec![Vec::new()];
        };
        let len = first.prefix.len() + first.suffix.len().saturating_sub(1);
        (0..len)
            .map(|t| {
                self.trajectories
                    .iter()
                    .map(|tr| {
                        if t < tr.prefix.len() {
                            tr.prefix[t]
                        } else {
                            tr.suffix[t + 1 - tr.prefix.len()]
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// Ticks in one loop of the suffix.
    pub fn period(&self) -> usize {
        self.trajectories
            .first()
            .map_or(0, |t| t.suffix.len().saturating_sub(1))
    }

    /// Total robot moves in the prefix and one suffix loop.
    pub fn move_count(&self) -> usize {
        let tl = self.timeline();
        tl.windows(2)
            .map(|w| w[0].iter().zip(&w[1]).filter(|(a, b)| a != b).count())
            .sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    pub fn from_json(text: &str) -> Result<Plan> {
        serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.column(), e.to_string()))
    }

    /// Copy without wall-clock timings, for byte-stable output.
    pub fn normalized(&self) -> Plan {
        Plan {
            timings: None,
            ..self.clone()
        }
    }
}
