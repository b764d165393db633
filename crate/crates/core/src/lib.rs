//! Placement planning and analytic performance model for network function
//! chains split between a SmartNIC and the host CPU.
//!
//! When the SmartNIC is overloaded some vNFs must move to the CPU. Moving a
//! vNF from the middle of a SmartNIC segment makes packets cross PCIe two
//! more times; moving a vNF at the edge of a segment does not. [`planner`]
//! implements border migration alongside the bottleneck-first baseline,
//! [`resource`] and [`perf`] score a placement, and [`oracle`] checks plans
//! against exhaustive enumeration.
//!
//! The crate is `no_std` and needs only `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod chain;
pub mod oracle;
pub mod perf;
pub mod planner;
pub mod resource;

pub use chain::{
    validate, LoadState, Placement, Scenario, ServiceChain, SpecCatalog, ValidationReport,
    Violation, VnfInstance, VnfSpec,
};
pub use oracle::{enumerate_placements, verify_plan, PlacementRecord, VerificationReport};
pub use perf::{count_crossings, estimate_latency, estimate_perf, PerfEstimate};
pub use planner::{
    identify_borders, plan, plan_naive, plan_pam, BorderSets, MigrationPlan, MigrationStep,
    Outcome, Policy,
};
pub use resource::{
    device_utilization, is_overloaded, max_chain_throughput, utilization, UtilizationReport,
};
