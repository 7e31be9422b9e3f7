//! Tick-based radio/MCU state accounting and the energy/power formulas.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::types::{NodeId, TICKS_PER_SECOND};

pub const TX_CURRENT_MA: f64 = 19.5;
pub const RX_CURRENT_MA: f64 = 21.8;
pub const CPU_CURRENT_MA: f64 = 1.8;
pub const LPM_CURRENT_MA: f64 = 0.0545;
pub const SUPPLY_VOLTS: f64 = 3.0;
/// Trailing factor of the energy formula, kept as written.
pub const ENERGY_SCALE: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnergyError {
    #[error("duration must be positive, got {0} s")]
    ZeroDuration(f64),
    #[error("node count must be positive")]
    ZeroNodes,
    #[error("node {node}: active ticks {active} exceed elapsed {total}")]
    Overcommitted { node: NodeId, active: u64, total: u64 },
    #[error("node {node}: state ticks sum to {sum}, expected {total}")]
    Partition { node: NodeId, sum: u64, total: u64 },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeEnergy {
    pub tx_ticks: u64,
    pub rx_ticks: u64,
    pub cpu_ticks: u64,
    pub lpm_ticks: u64,
}

impl NodeEnergy {
    pub fn total(&self) -> u64 {
        self.tx_ticks + self.rx_ticks + self.cpu_ticks + self.lpm_ticks
    }

    pub fn active(&self) -> u64 {
        self.tx_ticks + self.rx_ticks + self.cpu_ticks
    }

    pub fn energy_mj(&self) -> f64 {
        let charge = self.tx_ticks as f64 * TX_CURRENT_MA
            + self.rx_ticks as f64 * RX_CURRENT_MA
            + self.cpu_ticks as f64 * CPU_CURRENT_MA
            + self.lpm_ticks as f64 * LPM_CURRENT_MA;
        charge * SUPPLY_VOLTS / TICKS_PER_SECOND as f64 * ENERGY_SCALE
    }
}

/// How idle time is split once the run ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IdleModel {
    /// Radio listens for `rx_fraction` of idle time, sleeps otherwise.
    DutyCycled { rx_fraction: f64 },
    /// Radio never sleeps.
    AlwaysOn,
}

/// Per-node tick counters. Active states accumulate during the run;
/// [`EnergyLedger::finalize`] distributes the remainder.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    nodes: BTreeMap<NodeId, NodeEnergy>,
    total_ticks: u64,
    finalized: bool,
}

impl EnergyLedger {
    pub fn new(nodes: impl IntoIterator<Item = NodeId>) -> Self {
        EnergyLedger {
            nodes: nodes.into_iter().map(|n| (n, NodeEnergy::default())).collect(),
            total_ticks: 0,
            finalized: false,
        }
    }

    pub fn add_tx(&mut self, node: NodeId, ticks: u64) {
        self.nodes.entry(node).or_default().tx_ticks += ticks;
    }

    pub fn add_rx(&mut self, node: NodeId, ticks: u64) {
        self.nodes.entry(node).or_default().rx_ticks += ticks;
    }

    pub fn add_cpu(&mut self, node: NodeId, ticks: u64) {
        self.nodes.entry(node).or_default().cpu_ticks += ticks;
    }

    /// Closes the books at `total_ticks` elapsed and checks the state
    /// partition on every node.
    pub fn finalize(&mut self, total_ticks: u64, idle: IdleModel) -> Result<(), EnergyError> {
        for (&node, e) in self.nodes.iter_mut() {
            let active = e.active();
            let idle_ticks = total_ticks.checked_sub(active).ok_or(EnergyError::Overcommitted {
                node,
                active,
                total: total_ticks,
            })?;
            match idle {
                IdleModel::DutyCycled { rx_fraction } => {
                    let listen = (idle_ticks as f64 * rx_fraction).round() as u64;
                    e.rx_ticks += listen;
                    e.lpm_ticks = idle_ticks - listen;
                }
                IdleModel::AlwaysOn => {
                    e.rx_ticks += idle_ticks;
                    e.lpm_ticks = 0;
                }
            }
            if e.total() != total_ticks {
                return Err(EnergyError::Partition { node, sum: e.total(), total: total_ticks });
            }
        }
        self.total_ticks = total_ticks;
        self.finalized = true;
        Ok(())
    }

    pub fn is_finalized(&self) -> bool {
        self.finalized
    }

    pub fn total_ticks(&self) -> u64 {
        self.total_ticks
    }

    pub fn node(&self, node: NodeId) -> Option<&NodeEnergy> {
        self.nodes.get(&node)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &NodeEnergy)> {
        self.nodes.iter().map(|(n, e)| (*n, e))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn total_energy_mj(&self) -> f64 {
        self.nodes.values().map(NodeEnergy::energy_mj).sum()
    }
}

/// Energy of one node from its ledger row.
pub fn energy_mj(ledger: &EnergyLedger, node: NodeId) -> Option<f64> {
    ledger.node(node).map(NodeEnergy::energy_mj)
}

/// Network energy over the run, averaged over time and nodes.
pub fn avg_power_mw(total_energy_mj: f64, duration_s: f64, node_count: usize) -> Result<f64, EnergyError> {
    if duration_s.is_nan() || duration_s <= 0.0 {
        return Err(EnergyError::ZeroDuration(duration_s));
    }
    if node_count == 0 {
        return Err(EnergyError::ZeroNodes);
    }
    Ok(total_energy_mj / duration_s / node_count as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_eq(a: f64, b: f64) -> bool {
        if b == 0.0 {
            a == 0.0
        } else {
            ((a - b) / b).abs() < 1e-9
        }
    }

    #[test]
    fn zero_ticks_zero_energy() {
        assert_eq!(NodeEnergy::default().energy_mj(), 0.0);
    }

    #[test]
    fn one_second_of_tx() {
        let e = NodeEnergy { tx_ticks: 32768, ..Default::default() };
        assert!(rel_eq(e.energy_mj(), 468.0));
    }

    #[test]
    fn one_second_of_lpm() {
        let e = NodeEnergy { lpm_ticks: 32768, ..Default::default() };
        assert!(rel_eq(e.energy_mj(), 1.308));
    }

    #[test]
    fn power_from_energy() {
        assert!(rel_eq(avg_power_mw(468.0, 600.0, 1).unwrap(), 0.78));
        assert_eq!(avg_power_mw(0.0, 600.0, 3).unwrap(), 0.0);
        let one = avg_power_mw(100.0, 10.0, 2).unwrap();
        let two = avg_power_mw(100.0, 10.0, 4).unwrap();
        assert!(rel_eq(two * 2.0, one));
        assert_eq!(avg_power_mw(1.0, 0.0, 1), Err(EnergyError::ZeroDuration(0.0)));
        assert_eq!(avg_power_mw(1.0, 1.0, 0), Err(EnergyError::ZeroNodes));
    }

    #[test]
    fn finalize_partitions_elapsed_time() {
        let a = NodeId::from_raw(1);
        let mut ledger = EnergyLedger::new([a]);
        ledger.add_tx(a, 100);
        ledger.add_rx(a, 50);
        ledger.add_cpu(a, 10);
        let mut on = ledger.clone();
        ledger.finalize(10_160, IdleModel::DutyCycled { rx_fraction: 0.01 }).unwrap();
        let e = ledger.node(a).unwrap();
        assert_eq!((e.tx_ticks, e.rx_ticks, e.cpu_ticks, e.lpm_ticks), (100, 150, 10, 9_900));
        on.finalize(10_160, IdleModel::AlwaysOn).unwrap();
        let e = on.node(a).unwrap();
        assert_eq!((e.rx_ticks, e.lpm_ticks), (10_050, 0));
    }

    #[test]
    fn overcommitted_node_is_an_error() {
        let a = NodeId::from_raw(1);
        let mut ledger = EnergyLedger::new([a]);
        ledger.add_tx(a, 100);
        assert!(matches!(ledger.finalize(50, IdleModel::AlwaysOn), Err(EnergyError::Overcommitted { .. })));
    }
}
