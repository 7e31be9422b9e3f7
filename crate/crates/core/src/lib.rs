pub mod adversary;
pub mod codec;
pub mod dodag;
pub mod harness;
pub mod metrics;
pub mod sim;
pub mod topology;
pub mod types;
