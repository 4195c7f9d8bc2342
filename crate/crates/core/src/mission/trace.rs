use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{FleetError, Result};
use crate::goals::EvalReport;
use crate::mission::agent::Transition;
use crate::models::{q_update, GateDecision, LearningParams, QTable};
use crate::scalar::Real;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MissionTrace<T> {
    pub transitions: Vec<Transition<T>>,
    pub report: EvalReport,
}

impl<T: Real> MissionTrace<T> {
    pub fn for_agent(&self, agent: usize) -> impl Iterator<Item = &Transition<T>> + '_ {
        self.transitions.iter().filter(move |t| t.agent == agent)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let m = self.transitions.first().map_or(0, |t| t.ssv.len());
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> =
            ["agent", "tick", "s_r", "s_c", "action", "next_r", "next_c"].iter().map(|s| s.to_string()).collect();
        header.extend((0..m).map(|i| format!("ssv_{i}")));
        header.extend(["reward", "group", "gate"].iter().map(|s| s.to_string()));
        let csv_err = |e: csv::Error| FleetError::Parse(e.to_string());
        w.write_record(&header).map_err(csv_err)?;
        for t in &self.transitions {
            let mut row = vec![
                t.agent.to_string(),
                t.tick.to_string(),
                t.from.row.to_string(),
                t.from.col.to_string(),
                t.action.name().to_string(),
                t.to.row.to_string(),
                t.to.col.to_string(),
            ];
            row.extend(t.ssv.iter().map(|f| f.to_string()));
            row.push(t.reward.to_string());
            row.push(t.group.0.to_string());
            row.push(match t.gate {
                GateDecision::Stay => "stay".into(),
                GateDecision::Leave => "leave".into(),
            });
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Re-applies the backups of `transitions` to `table` in order.
pub fn replay<'a, T: Real + 'a>(
    table: &mut QTable<T>,
    transitions: impl IntoIterator<Item = &'a Transition<T>>,
    params: &LearningParams<T>,
) {
    for t in transitions {
        q_update(table, t.from, t.action, t.to, t.reward, params, &t.valid_next);
    }
}
