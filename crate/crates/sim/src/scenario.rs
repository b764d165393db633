//! Scenario files.
//!
//! A scenario is a JSON document:
//!
//! ```json
//! {
//!   "chain": [{"id": "LB", "spec": "LoadBalancer", "placement": "CPU"}, ...],
//!   "anchors": {"ingress": "SmartNIC", "egress": "SmartNIC"},
//!   "spec_overrides": {"Monitor": {"cap_smartnic": 1.8}},
//!   "theta_cur": 1.0,
//!   "pcie_latency_us": 10.0
//! }
//! ```
//!
//! Specs resolve against the built-in profile; `spec_overrides` patches
//! individual fields of a built-in spec or defines a new one (which then
//! needs both capacities). Unknown keys are rejected everywhere.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use pam_core::chain::{
    LoadState, Placement, Scenario, ServiceChain, SpecCatalog, VnfInstance, VnfSpec,
    DEFAULT_PCIE_LATENCY_US,
};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub chain: Vec<ChainEntry>,
    #[serde(default)]
    pub anchors: Anchors,
    #[serde(default)]
    pub spec_overrides: BTreeMap<String, SpecOverride>,
    pub theta_cur: f64,
    #[serde(default = "default_pcie_latency")]
    pub pcie_latency_us: f64,
}

fn default_pcie_latency() -> f64 {
    DEFAULT_PCIE_LATENCY_US
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainEntry {
    pub id: String,
    pub spec: String,
    pub placement: Placement,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Anchors {
    #[serde(default)]
    pub ingress: Placement,
    #[serde(default)]
    pub egress: Placement,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap_smartnic: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap_cpu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proc_latency_smartnic: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proc_latency_cpu: Option<f64>,
}

impl SpecOverride {
    fn full(spec: &VnfSpec) -> Self {
        SpecOverride {
            cap_smartnic: Some(spec.cap_smartnic),
            cap_cpu: Some(spec.cap_cpu),
            proc_latency_smartnic: Some(spec.proc_latency_smartnic),
            proc_latency_cpu: Some(spec.proc_latency_cpu),
        }
    }

    fn apply(&self, spec: &mut VnfSpec) {
        if let Some(v) = self.cap_smartnic {
            spec.cap_smartnic = v;
        }
        if let Some(v) = self.cap_cpu {
            spec.cap_cpu = v;
        }
        if let Some(v) = self.proc_latency_smartnic {
            spec.proc_latency_smartnic = v;
        }
        if let Some(v) = self.proc_latency_cpu {
            spec.proc_latency_cpu = v;
        }
    }
}

impl ScenarioFile {
    /// Resolves specs against the built-in profile. Does not validate.
    pub fn resolve(&self) -> std::result::Result<Scenario, String> {
        let mut specs = SpecCatalog::builtin();
        for (name, o) in &self.spec_overrides {
            match specs.get_mut(name) {
                Some(spec) => o.apply(spec),
                None => {
                    let (Some(cap_smartnic), Some(cap_cpu)) = (o.cap_smartnic, o.cap_cpu) else {
                        return Err(format!(
                            "spec_overrides.{name}: `{name}` is not a built-in spec, so both \
                             `cap_smartnic` and `cap_cpu` are required"
                        ));
                    };
                    let mut spec = VnfSpec::new(name.clone(), cap_smartnic, cap_cpu);
                    o.apply(&mut spec);
                    specs.insert(spec);
                }
            }
        }
        let chain = ServiceChain::new(
            self.chain
                .iter()
                .map(|e| VnfInstance::new(e.id.clone(), e.spec.clone(), e.placement))
                .collect(),
        )
        .with_anchors(self.anchors.ingress, self.anchors.egress);
        Ok(Scenario {
            chain,
            specs,
            load: LoadState::new(self.theta_cur),
            pcie_latency_us: self.pcie_latency_us,
        })
    }

    /// File model of `scenario`. Specs equal to the built-in profile are
    /// left out; everything else is written in full.
    pub fn from_scenario(scenario: &Scenario) -> Self {
        let builtin = SpecCatalog::builtin();
        let spec_overrides = scenario
            .specs
            .iter()
            .filter(|s| builtin.get(&s.name) != Some(*s))
            .map(|s| (s.name.clone(), SpecOverride::full(s)))
            .collect();
        ScenarioFile {
            chain: scenario
                .chain
                .vnfs
                .iter()
                .map(|v| ChainEntry {
                    id: v.id.clone(),
                    spec: v.spec.clone(),
                    placement: v.placement,
                })
                .collect(),
            anchors: Anchors {
                ingress: scenario.chain.ingress,
                egress: scenario.chain.egress,
            },
            spec_overrides,
            theta_cur: scenario.load.theta_cur,
            pcie_latency_us: scenario.pcie_latency_us,
        }
    }
}

/// Parses and validates scenario text. `origin` names the source in errors.
pub fn parse_scenario(text: &str, origin: &Path) -> Result<Scenario> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: origin.to_path_buf(),
        message: e.to_string(),
    })?;
    let scenario = file.resolve().map_err(|message| Error::Parse {
        path: origin.to_path_buf(),
        message,
    })?;
    scenario.validate().map_err(Error::Validation)?;
    Ok(scenario)
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenario(&text, path)
}

pub fn scenario_to_string(scenario: &Scenario) -> String {
    let mut text = serde_json::to_string_pretty(&ScenarioFile::from_scenario(scenario))
        .expect("scenario serializes");
    text.push('\n');
    text
}

pub fn save_scenario(scenario: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, scenario_to_string(scenario)).map_err(|e| Error::io(path, e))
}
