//! Service chain data model: vNF specifications, placements, scenarios and
//! their validation.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// Device a vNF instance (or a chain anchor) runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Placement {
    #[cfg_attr(
        feature = "serde",
        serde(rename = "SmartNIC", alias = "smartnic", alias = "S")
    )]
    SmartNic,
    #[cfg_attr(feature = "serde", serde(rename = "CPU", alias = "cpu", alias = "C"))]
    Cpu,
}

impl Placement {
    pub const ALL: [Placement; 2] = [Placement::SmartNic, Placement::Cpu];

    pub fn other(self) -> Placement {
        match self {
            Placement::SmartNic => Placement::Cpu,
            Placement::Cpu => Placement::SmartNic,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Placement::SmartNic => "SmartNIC",
            Placement::Cpu => "CPU",
        }
    }
}

impl Default for Placement {
    /// Packets enter and leave the host through the NIC.
    fn default() -> Self {
        Placement::SmartNic
    }
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-device capacities (Gbps) and processing latencies (µs) of a vNF type.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VnfSpec {
    pub name: String,
    pub cap_smartnic: f64,
    pub cap_cpu: f64,
    pub proc_latency_smartnic: f64,
    pub proc_latency_cpu: f64,
}

impl VnfSpec {
    pub fn new(name: impl Into<String>, cap_smartnic: f64, cap_cpu: f64) -> Self {
        VnfSpec {
            name: name.into(),
            cap_smartnic,
            cap_cpu,
            proc_latency_smartnic: 0.0,
            proc_latency_cpu: 0.0,
        }
    }

    pub fn with_latencies(mut self, smartnic_us: f64, cpu_us: f64) -> Self {
        self.proc_latency_smartnic = smartnic_us;
        self.proc_latency_cpu = cpu_us;
        self
    }

    pub fn capacity(&self, device: Placement) -> f64 {
        match device {
            Placement::SmartNic => self.cap_smartnic,
            Placement::Cpu => self.cap_cpu,
        }
    }

    pub fn proc_latency(&self, device: Placement) -> f64 {
        match device {
            Placement::SmartNic => self.proc_latency_smartnic,
            Placement::Cpu => self.proc_latency_cpu,
        }
    }
}

/// Stand-in for the LoadBalancer SmartNIC capacity, which is only known to
/// exceed 10 Gbps.
pub const LOAD_BALANCER_SMARTNIC_CAP: f64 = 15.0;

/// Catalog of vNF specifications keyed by name.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct SpecCatalog(BTreeMap<String, VnfSpec>);

impl SpecCatalog {
    pub fn new() -> Self {
        SpecCatalog(BTreeMap::new())
    }

    /// Measured capacity profile of the four reference vNFs.
    pub fn builtin() -> Self {
        let mut catalog = SpecCatalog::new();
        catalog.insert(VnfSpec::new("Firewall", 10.0, 4.0));
        catalog.insert(VnfSpec::new("Logger", 2.0, 4.0));
        catalog.insert(VnfSpec::new("Monitor", 3.2, 10.0));
        catalog.insert(VnfSpec::new(
            "LoadBalancer",
            LOAD_BALANCER_SMARTNIC_CAP,
            4.0,
        ));
        catalog
    }

    /// Inserts (or replaces) a spec under its own name.
    pub fn insert(&mut self, spec: VnfSpec) -> Option<VnfSpec> {
        self.0.insert(spec.name.clone(), spec)
    }

    pub fn get(&self, name: &str) -> Option<&VnfSpec> {
        self.0.get(name)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut VnfSpec> {
        self.0.get_mut(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &VnfSpec> {
        self.0.values()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Spec backing `vnf`.
    ///
    /// Panics if the reference does not resolve; callers operate on
    /// validated scenarios where every reference resolves.
    pub fn spec_of(&self, vnf: &VnfInstance) -> &VnfSpec {
        match self.0.get(&vnf.spec) {
            Some(spec) => spec,
            None => panic!(
                "vNF `{}` references unknown spec `{}`; validate the scenario first",
                vnf.id, vnf.spec
            ),
        }
    }
}

/// One vNF in a chain.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VnfInstance {
    pub id: String,
    pub spec: String,
    pub placement: Placement,
}

impl VnfInstance {
    pub fn new(id: impl Into<String>, spec: impl Into<String>, placement: Placement) -> Self {
        VnfInstance {
            id: id.into(),
            spec: spec.into(),
            placement,
        }
    }
}

/// Ordered vNFs in traffic order, bracketed by the ingress and egress anchors.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ServiceChain {
    pub vnfs: Vec<VnfInstance>,
    pub ingress: Placement,
    pub egress: Placement,
}

impl ServiceChain {
    /// Chain with SmartNIC-side anchors.
    pub fn new(vnfs: Vec<VnfInstance>) -> Self {
        ServiceChain {
            vnfs,
            ingress: Placement::SmartNic,
            egress: Placement::SmartNic,
        }
    }

    pub fn with_anchors(mut self, ingress: Placement, egress: Placement) -> Self {
        self.ingress = ingress;
        self.egress = egress;
        self
    }

    pub fn len(&self) -> usize {
        self.vnfs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vnfs.is_empty()
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.vnfs.iter().position(|v| v.id == id)
    }

    pub fn placements(&self) -> Vec<Placement> {
        self.vnfs.iter().map(|v| v.placement).collect()
    }

    /// Placement of whatever sits upstream of position `index`, anchor included.
    pub fn upstream_of(&self, index: usize) -> Placement {
        if index == 0 {
            self.ingress
        } else {
            self.vnfs[index - 1].placement
        }
    }

    /// Placement of whatever sits downstream of position `index`, anchor included.
    pub fn downstream_of(&self, index: usize) -> Placement {
        if index + 1 >= self.vnfs.len() {
            self.egress
        } else {
            self.vnfs[index + 1].placement
        }
    }

    /// Copy of the chain with each vNF placed per `placements`.
    pub fn with_placements(&self, placements: &[Placement]) -> ServiceChain {
        assert_eq!(
            placements.len(),
            self.vnfs.len(),
            "placement vector length mismatch"
        );
        let mut chain = self.clone();
        for (vnf, &p) in chain.vnfs.iter_mut().zip(placements) {
            vnf.placement = p;
        }
        chain
    }
}

/// Offered chain throughput in Gbps. Uniform along the chain.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct LoadState {
    pub theta_cur: f64,
}

impl LoadState {
    pub fn new(theta_cur: f64) -> Self {
        LoadState { theta_cur }
    }
}

/// Default per-crossing PCIe latency in microseconds.
pub const DEFAULT_PCIE_LATENCY_US: f64 = 10.0;

/// Everything needed to plan and evaluate one chain.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Scenario {
    pub chain: ServiceChain,
    pub specs: SpecCatalog,
    pub load: LoadState,
    pub pcie_latency_us: f64,
}

impl Scenario {
    pub fn new(chain: ServiceChain, specs: SpecCatalog, load: LoadState) -> Self {
        Scenario {
            chain,
            specs,
            load,
            pcie_latency_us: DEFAULT_PCIE_LATENCY_US,
        }
    }

    pub fn validate(&self) -> Result<(), ValidationReport> {
        validate(self)
    }
}

/// Which capacity or latency field of a spec is at fault.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecField {
    CapSmartNic,
    CapCpu,
    ProcLatencySmartNic,
    ProcLatencyCpu,
}

impl SpecField {
    pub fn as_str(self) -> &'static str {
        match self {
            SpecField::CapSmartNic => "cap_smartnic",
            SpecField::CapCpu => "cap_cpu",
            SpecField::ProcLatencySmartNic => "proc_latency_smartnic",
            SpecField::ProcLatencyCpu => "proc_latency_cpu",
        }
    }
}

/// A single invariant violation found by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    EmptyChain,
    DuplicateId {
        id: String,
    },
    UnresolvedSpec {
        vnf_id: String,
        spec: String,
    },
    NonPositiveCapacity {
        spec: String,
        field: SpecField,
        value: f64,
    },
    NegativeLatency {
        spec: String,
        field: SpecField,
        value: f64,
    },
    NegativeThroughput {
        value: f64,
    },
    NegativePcieLatency {
        value: f64,
    },
}

impl Violation {
    /// Stable short tag naming the violated invariant.
    pub fn kind(&self) -> &'static str {
        match self {
            Violation::EmptyChain => "empty chain",
            Violation::DuplicateId { .. } => "duplicate id",
            Violation::UnresolvedSpec { .. } => "unresolved spec reference",
            Violation::NonPositiveCapacity { .. } => "non-positive capacity",
            Violation::NegativeLatency { .. } => "negative latency",
            Violation::NegativeThroughput { .. } => "negative throughput",
            Violation::NegativePcieLatency { .. } => "negative pcie latency",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyChain => write!(f, "empty chain: chain must hold at least one vNF"),
            Violation::DuplicateId { id } => {
                write!(f, "duplicate id: `{id}` appears more than once")
            }
            Violation::UnresolvedSpec { vnf_id, spec } => {
                write!(
                    f,
                    "unresolved spec reference: vNF `{vnf_id}` names unknown spec `{spec}`"
                )
            }
            Violation::NonPositiveCapacity { spec, field, value } => write!(
                f,
                "non-positive capacity: spec `{spec}` field `{}` = {value}",
                field.as_str()
            ),
            Violation::NegativeLatency { spec, field, value } => write!(
                f,
                "negative latency: spec `{spec}` field `{}` = {value}",
                field.as_str()
            ),
            Violation::NegativeThroughput { value } => {
                write!(f, "negative throughput: theta_cur = {value}")
            }
            Violation::NegativePcieLatency { value } => {
                write!(f, "negative pcie latency: pcie_latency_us = {value}")
            }
        }
    }
}

/// All violations found in a scenario; empty means the scenario passed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_pass(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: &str) -> bool {
        self.violations.iter().any(|v| v.kind() == kind)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("pass");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl core::error::Error for ValidationReport {}

// `!(x > 0.0)` and `!(x >= 0.0)` also reject NaN.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
fn check_spec(spec: &VnfSpec, out: &mut Vec<Violation>) {
    for (field, value) in [
        (SpecField::CapSmartNic, spec.cap_smartnic),
        (SpecField::CapCpu, spec.cap_cpu),
    ] {
        if !(value > 0.0) || value == f64::INFINITY {
            out.push(Violation::NonPositiveCapacity {
                spec: spec.name.clone(),
                field,
                value,
            });
        }
    }
    for (field, value) in [
        (SpecField::ProcLatencySmartNic, spec.proc_latency_smartnic),
        (SpecField::ProcLatencyCpu, spec.proc_latency_cpu),
    ] {
        if !(value >= 0.0) || value == f64::INFINITY {
            out.push(Violation::NegativeLatency {
                spec: spec.name.clone(),
                field,
                value,
            });
        }
    }
}

/// Checks every scenario invariant and reports each violation individually.
///
/// Only specs referenced by the chain are checked, so a catalog may carry
/// unused entries without affecting the result.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn validate(scenario: &Scenario) -> Result<(), ValidationReport> {
    let mut violations = Vec::new();
    let chain = &scenario.chain;

    if chain.vnfs.is_empty() {
        violations.push(Violation::EmptyChain);
    }

    let mut seen_ids = BTreeSet::new();
    let mut checked_specs = BTreeSet::new();
    for vnf in &chain.vnfs {
        if !seen_ids.insert(vnf.id.as_str()) {
            violations.push(Violation::DuplicateId {
                id: vnf.id.to_string(),
            });
        }
        match scenario.specs.get(&vnf.spec) {
            None => violations.push(Violation::UnresolvedSpec {
                vnf_id: vnf.id.clone(),
                spec: vnf.spec.clone(),
            }),
            Some(spec) => {
                if checked_specs.insert(vnf.spec.as_str()) {
                    check_spec(spec, &mut violations);
                }
            }
        }
    }

    let theta = scenario.load.theta_cur;
    if !(theta >= 0.0) || theta == f64::INFINITY {
        violations.push(Violation::NegativeThroughput { value: theta });
    }
    let pcie = scenario.pcie_latency_us;
    if !(pcie >= 0.0) || pcie == f64::INFINITY {
        violations.push(Violation::NegativePcieLatency { value: pcie });
    }

    if violations.is_empty() {
        Ok(())
    } else {
        Err(ValidationReport { violations })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use Placement::{Cpu, SmartNic};

    fn reference() -> Scenario {
        let mut specs = SpecCatalog::builtin();
        specs.insert(VnfSpec::new("C2", LOAD_BALANCER_SMARTNIC_CAP, 4.0));
        let chain = ServiceChain::new(vec![
            VnfInstance::new("LB", "LoadBalancer", Cpu),
            VnfInstance::new("Logger", "Logger", SmartNic),
            VnfInstance::new("Monitor", "Monitor", SmartNic),
            VnfInstance::new("Firewall", "Firewall", SmartNic),
            VnfInstance::new("C2", "C2", Cpu),
        ]);
        Scenario::new(chain, specs, LoadState::new(1.2))
    }

    #[test]
    fn builtin_profile_values() {
        let t = SpecCatalog::builtin();
        assert_eq!(t.len(), 4);
        assert_eq!(t.get("Logger").unwrap().cap_smartnic, 2.0);
        assert_eq!(t.get("Logger").unwrap().cap_cpu, 4.0);
        assert_eq!(t.get("Monitor").unwrap().cap_smartnic, 3.2);
        assert_eq!(t.get("Monitor").unwrap().cap_cpu, 10.0);
        assert_eq!(t.get("Firewall").unwrap().cap_smartnic, 10.0);
        assert_eq!(t.get("Firewall").unwrap().cap_cpu, 4.0);
        assert_eq!(t.get("LoadBalancer").unwrap().cap_smartnic, 15.0);
        assert_eq!(t.get("LoadBalancer").unwrap().cap_cpu, 4.0);
        assert!(t
            .iter()
            .all(|s| s.proc_latency_smartnic == 0.0 && s.proc_latency_cpu == 0.0));
    }

    #[test]
    fn reference_chain_validates() {
        assert_eq!(reference().validate(), Ok(()));
    }

    #[test]
    fn empty_chain_rejected() {
        let mut s = reference();
        s.chain.vnfs.clear();
        let report = s.validate().unwrap_err();
        assert_eq!(report.violations, vec![Violation::EmptyChain]);
        assert!(report.has("empty chain"));
    }

    #[test]
    fn zero_capacity_rejected() {
        let mut s = reference();
        s.specs.get_mut("Monitor").unwrap().cap_smartnic = 0.0;
        let report = s.validate().unwrap_err();
        assert_eq!(
            report.violations,
            vec![Violation::NonPositiveCapacity {
                spec: "Monitor".into(),
                field: SpecField::CapSmartNic,
                value: 0.0
            }]
        );
        assert!(report.to_string().starts_with("non-positive capacity"));
    }

    #[test]
    fn nan_capacity_rejected() {
        let mut s = reference();
        s.specs.get_mut("Firewall").unwrap().cap_cpu = f64::NAN;
        assert!(s.validate().unwrap_err().has("non-positive capacity"));
    }

    #[test]
    fn unresolved_spec_rejected() {
        let mut s = reference();
        s.chain.vnfs[2].spec = "Nat".into();
        let report = s.validate().unwrap_err();
        assert_eq!(
            report.violations,
            vec![Violation::UnresolvedSpec {
                vnf_id: "Monitor".into(),
                spec: "Nat".into()
            }]
        );
    }

    #[test]
    fn negative_latency_rejected() {
        let mut s = reference();
        s.specs.get_mut("Logger").unwrap().proc_latency_cpu = -1.0;
        assert!(s.validate().unwrap_err().has("negative latency"));
        let mut s = reference();
        s.pcie_latency_us = -0.5;
        assert!(s.validate().unwrap_err().has("negative pcie latency"));
    }

    #[test]
    fn duplicate_id_and_negative_load_rejected() {
        let mut s = reference();
        s.chain.vnfs[1].id = "LB".into();
        s.load.theta_cur = -1.0;
        let report = s.validate().unwrap_err();
        assert!(report.has("duplicate id"));
        assert!(report.has("negative throughput"));
        assert_eq!(report.violations.len(), 2);
    }

    #[test]
    fn unused_bad_spec_is_ignored() {
        let mut s = reference();
        s.specs.insert(VnfSpec::new("Unused", 0.0, -3.0));
        assert_eq!(s.validate(), Ok(()));
    }

    #[test]
    fn neighbours_include_anchors() {
        let s = reference();
        assert_eq!(s.chain.upstream_of(0), SmartNic);
        assert_eq!(s.chain.downstream_of(4), SmartNic);
        assert_eq!(s.chain.upstream_of(1), Cpu);
        assert_eq!(s.chain.downstream_of(3), Cpu);
    }
}
