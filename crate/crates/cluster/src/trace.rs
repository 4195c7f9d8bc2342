use std::io::Write;

use serde::Serialize;

use crate::task::Task;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchedulerRow {
    pub tick: u64,
    pub task_id: u64,
    pub subset: String,
    pub priority: u64,
    pub node: String,
    pub state: String,
    pub cpu_cap: f64,
    pub wait: u64,
    pub lifetime: u64,
}

impl SchedulerRow {
    pub fn from_task(tick: u64, t: &Task) -> Self {
        Self {
            tick,
            task_id: t.id.0,
            subset: t.label.clone(),
            priority: t.priority,
            node: t.node.map(|n| n.0.to_string()).unwrap_or_default(),
            state: t.state.label().to_string(),
            cpu_cap: t.cpu,
            wait: t.wait,
            lifetime: t.lifetime,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyRow {
    pub tick: u64,
    pub node_id: u32,
    pub power_state: String,
    pub running_tasks: usize,
    pub watt_ticks_cum: f64,
}

pub fn write_csv<W: Write, R: Serialize>(out: W, rows: &[R]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
