//! Deterministic discrete-event simulation of a storing-mode DODAG.

mod config;
mod energy;
mod engine;
mod log;

pub use config::{
    ConfigError, Failure, LinkSpec, LossScope, NodeSpec, RadioConfig, ScenarioConfig, ScriptedDrop, TopologySpec,
};
pub use energy::{
    avg_power_mw, energy_mj, EnergyError, EnergyLedger, IdleModel, NodeEnergy, CPU_CURRENT_MA, ENERGY_SCALE,
    LPM_CURRENT_MA, RX_CURRENT_MA, SUPPLY_VOLTS, TX_CURRENT_MA,
};
pub use engine::{run, run_with_sink, Delivery, RunOutput, RunResult, SimError, VERSION};
pub use log::{Event, EventLog, EventSink, LogError, LogHasher, LogRecord, NullSink};
