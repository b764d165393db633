//! Side-by-side evaluation of border migration and bottleneck migration
//! from the same starting chain.

use pam_core::chain::{Placement, Scenario, ServiceChain};
use pam_core::oracle::{verify_plan, VerificationReport, MAX_ENUMERATION_LEN};
use pam_core::perf::{estimate_perf, PerfEstimate};
use pam_core::planner::{plan, MigrationPlan, Policy};
use pam_core::resource::device_utilization;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviceLoad {
    pub smartnic_util: f64,
    pub cpu_util: f64,
}

impl DeviceLoad {
    fn of(chain: &ServiceChain, scenario: &Scenario) -> Self {
        DeviceLoad {
            smartnic_util: device_utilization(
                chain,
                &scenario.specs,
                Placement::SmartNic,
                scenario.load,
            ),
            cpu_util: device_utilization(chain, &scenario.specs, Placement::Cpu, scenario.load),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationSummary {
    pub passed: bool,
    pub failures: Vec<String>,
    pub notes: Vec<String>,
}

impl From<&VerificationReport> for VerificationSummary {
    fn from(r: &VerificationReport) -> Self {
        VerificationSummary {
            passed: r.passed(),
            failures: r
                .failures()
                .map(|f| {
                    format!(
                        "{}: {}",
                        f.assertion.as_str(),
                        f.witness.as_deref().unwrap_or("")
                    )
                })
                .collect(),
            notes: r.notes.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyResult {
    pub policy: Policy,
    pub plan: MigrationPlan,
    pub after: PerfEstimate,
    pub load_after: DeviceLoad,
    /// Absent when the chain is too long to enumerate.
    pub verification: Option<VerificationSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub theta_cur: f64,
    pub pcie_latency_us: f64,
    pub before: PerfEstimate,
    pub load_before: DeviceLoad,
    pub pam: PolicyResult,
    pub naive: PolicyResult,
    /// `(naive - pam) / naive` of the post-migration latencies; positive when
    /// border migration is faster. Zero when the naive latency is zero.
    pub latency_reduction: f64,
}

impl ComparisonReport {
    pub fn result(&self, policy: Policy) -> &PolicyResult {
        match policy {
            Policy::Pam => &self.pam,
            Policy::Naive => &self.naive,
        }
    }
}

fn run(policy: Policy, scenario: &Scenario) -> PolicyResult {
    let plan = plan(policy, &scenario.chain, &scenario.specs, scenario.load);
    let verification = (scenario.chain.len() <= MAX_ENUMERATION_LEN).then(|| {
        let report = verify_plan(&scenario.chain, &scenario.specs, scenario.load, &plan)
            .expect("chain length checked above");
        VerificationSummary::from(&report)
    });
    PolicyResult {
        policy,
        after: estimate_perf(&plan.post_chain, &scenario.specs, scenario.pcie_latency_us),
        load_after: DeviceLoad::of(&plan.post_chain, scenario),
        plan,
        verification,
    }
}

/// Plans both policies at the scenario's load and scores the results.
pub fn compare(scenario: &Scenario) -> ComparisonReport {
    let pam = run(Policy::Pam, scenario);
    let naive = run(Policy::Naive, scenario);
    let latency_reduction = if naive.after.latency_us > 0.0 {
        (naive.after.latency_us - pam.after.latency_us) / naive.after.latency_us
    } else {
        0.0
    };
    ComparisonReport {
        theta_cur: scenario.load.theta_cur,
        pcie_latency_us: scenario.pcie_latency_us,
        before: estimate_perf(&scenario.chain, &scenario.specs, scenario.pcie_latency_us),
        load_before: DeviceLoad::of(&scenario.chain, scenario),
        pam,
        naive,
        latency_reduction,
    }
}
