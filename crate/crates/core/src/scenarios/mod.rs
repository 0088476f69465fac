//! Scenario configuration and the built-in scenarios: overhead profiling,
//! a Walker constellation with duty cycling, and two-satellite federated
//! learning.

mod config;
pub mod constellation;
mod custom;
pub mod fedavg;
pub mod overhead;
mod scaling;
mod walker;

pub use config::{
    BatterySpec, GroundStationSpec, OrbitSpec, RadiationRates, ScenarioConfig, ScenarioKind, SpacecraftSpec,
    ThermalSpec, WalkerSpec,
};
pub use constellation::{run_constellation, ConstellationParams, ConstellationRun, ConstellationSummary};
pub use custom::run_custom;
pub use fedavg::{make_circles_dataset, run_fedavg, FedAvgParams, FedAvgRun, FedAvgSummary, TinyNet};
pub use overhead::{run_overhead_benchmark, OverheadParams, OverheadRow};
pub use scaling::{per_satellite_spread, run_scaling, ScalingRow, SCALING_DURATION_S};
pub use walker::generate_walker;
