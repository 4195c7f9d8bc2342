//! The mission driver: partitions, the per-agent sense/learn/gate/move loop,
//! baselines and multi-mission campaigns.

mod agent;
mod baselines;
mod driver;
pub mod edge;
mod campaign;
mod partition;
mod trace;

pub use agent::{step_agent, AgentRuntime, StepEnv, Transition};
pub use campaign::{run_campaign, CampaignConfig, CampaignMission, CampaignResult};
pub use baselines::{baseline_automated, baseline_classic_rl, serpentine_bands, AutomatedStop};
pub use driver::{run_mission, EdgeHook, MissionMode, MissionOptions, MissionOutcome};
pub use edge::EdgeConfig;
pub use partition::partition_states;
pub use trace::{replay, MissionTrace};
