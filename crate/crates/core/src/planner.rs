//! Migration planning for an overloaded SmartNIC.
//!
//! Both planners run the same greedy round: pick the SmartNIC vNF with the
//! smallest SmartNIC capacity from a candidate pool, reject it if moving it
//! would overload the CPU, otherwise move it to the CPU and stop as soon as
//! the remaining SmartNIC load is strictly below capacity. They differ only in
//! the pool:
//!
//! * [`Policy::Pam`] draws from the border vNFs, i.e. SmartNIC vNFs whose
//!   upstream (left border) or downstream (right border) neighbour is on the
//!   CPU. Moving such a vNF never adds a PCIe crossing. When a left border
//!   moves, its SmartNIC downstream neighbour becomes a left border; right
//!   borders promote their upstream neighbour the same way.
//! * [`Policy::Naive`] draws from every SmartNIC vNF, so it targets the
//!   bottleneck regardless of where it sits in the chain.
//!
//! A candidate rejected for lack of CPU headroom stays out of the pool for the
//! rest of the round. If the pool empties while the SmartNIC is still
//! overloaded the plan ends in [`Outcome::ScaleOutRequired`].

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::chain::{LoadState, Placement, ServiceChain, SpecCatalog};
use crate::resource::is_overloaded;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Policy {
    Pam,
    Naive,
}

impl Policy {
    pub fn as_str(self) -> &'static str {
        match self {
            Policy::Pam => "pam",
            Policy::Naive => "naive",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Left and right border positions of the SmartNIC segments.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BorderSets {
    pub left: BTreeSet<usize>,
    pub right: BTreeSet<usize>,
}

impl BorderSets {
    pub fn union(&self) -> BTreeSet<usize> {
        self.left.union(&self.right).copied().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty() && self.right.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.left.contains(&index) || self.right.contains(&index)
    }

    pub fn remove(&mut self, index: usize) {
        self.left.remove(&index);
        self.right.remove(&index);
    }
}

/// Which pool the migrated vNF was selected from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SelectionRule {
    /// Minimum SmartNIC capacity among border vNFs.
    BorderMinCapacity,
    /// Minimum SmartNIC capacity among all SmartNIC vNFs.
    GlobalMinCapacity,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MigrationStep {
    pub vnf_id: String,
    pub index: usize,
    pub from: Placement,
    pub to: Placement,
    pub rule: SelectionRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RejectReason {
    CpuHeadroom,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::CpuHeadroom => "cpu_headroom",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Rejection {
    pub vnf_id: String,
    pub index: usize,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Outcome {
    NotOverloaded,
    Resolved,
    /// Neither device can absorb the load; another instance has to be started.
    ScaleOutRequired,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::NotOverloaded => "not_overloaded",
            Outcome::Resolved => "resolved",
            Outcome::ScaleOutRequired => "scale_out_required",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MigrationPlan {
    pub policy: Policy,
    pub steps: Vec<MigrationStep>,
    pub outcome: Outcome,
    pub rejected_candidates: Vec<Rejection>,
    pub post_chain: ServiceChain,
}

/// One selection inside a planning round, reported to the observer passed
/// to [`plan_observed`].
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Pool the candidate was drawn from, ascending chain order.
    pub pool: Vec<usize>,
    pub candidate: usize,
    /// `false` when the CPU headroom check rejected the candidate.
    pub migrated: bool,
}

/// Positions of SmartNIC vNFs whose upstream (left) or downstream (right)
/// neighbour is on the CPU. Anchors count as neighbours.
pub fn identify_borders(chain: &ServiceChain) -> BorderSets {
    let mut borders = BorderSets::default();
    for (i, vnf) in chain.vnfs.iter().enumerate() {
        if vnf.placement != Placement::SmartNic {
            continue;
        }
        if chain.upstream_of(i) == Placement::Cpu {
            borders.left.insert(i);
        }
        if chain.downstream_of(i) == Placement::Cpu {
            borders.right.insert(i);
        }
    }
    borders
}

/// Position in `pool` with the smallest SmartNIC capacity; ties go to the
/// lowest position.
fn argmin_smartnic_capacity(
    pool: impl IntoIterator<Item = usize>,
    chain: &ServiceChain,
    specs: &SpecCatalog,
) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for i in pool {
        let cap = specs.spec_of(&chain.vnfs[i]).cap_smartnic;
        match best {
            Some((_, best_cap)) if cap >= best_cap => {}
            _ => best = Some((i, cap)),
        }
    }
    best.map(|(i, _)| i)
}

/// Border vNF with the minimum SmartNIC capacity.
pub fn select_candidate(
    borders: &BorderSets,
    chain: &ServiceChain,
    specs: &SpecCatalog,
) -> Option<usize> {
    argmin_smartnic_capacity(borders.union(), chain, specs)
}

/// Utilization of `device` if the vNF at `moved` (and everything already
/// placed there) sat on `device` (`include = true`) or was removed from it
/// (`include = false`). Summed in chain order so the result matches
/// [`crate::resource::device_utilization`] on the resulting chain bit for bit.
fn utilization_with(
    chain: &ServiceChain,
    specs: &SpecCatalog,
    device: Placement,
    load: LoadState,
    moved: usize,
    include: bool,
) -> f64 {
    chain
        .vnfs
        .iter()
        .enumerate()
        .filter(|&(i, v)| {
            if i == moved {
                include
            } else {
                v.placement == device
            }
        })
        .map(|(_, v)| load.theta_cur / specs.spec_of(v).capacity(device))
        .sum()
}

/// `true` iff moving `candidate` to the CPU keeps CPU utilization strictly
/// below 1, counting everything already on the CPU.
pub fn check_cpu_headroom(
    chain: &ServiceChain,
    specs: &SpecCatalog,
    candidate: usize,
    load: LoadState,
) -> bool {
    utilization_with(chain, specs, Placement::Cpu, load, candidate, true) < 1.0
}

/// `true` iff the SmartNIC load without `candidate` is strictly below 1.
pub fn check_alleviated(
    chain: &ServiceChain,
    specs: &SpecCatalog,
    candidate: usize,
    load: LoadState,
) -> bool {
    utilization_with(chain, specs, Placement::SmartNic, load, candidate, false) < 1.0
}

enum Pool {
    Borders(BorderSets),
    SmartNic(BTreeSet<usize>),
}

impl Pool {
    fn new(policy: Policy, chain: &ServiceChain) -> Pool {
        match policy {
            Policy::Pam => Pool::Borders(identify_borders(chain)),
            Policy::Naive => Pool::SmartNic(
                chain
                    .vnfs
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| v.placement == Placement::SmartNic)
                    .map(|(i, _)| i)
                    .collect(),
            ),
        }
    }

    fn members(&self) -> Vec<usize> {
        match self {
            Pool::Borders(b) => b.union().into_iter().collect(),
            Pool::SmartNic(s) => s.iter().copied().collect(),
        }
    }

    fn rule(&self) -> SelectionRule {
        match self {
            Pool::Borders(_) => SelectionRule::BorderMinCapacity,
            Pool::SmartNic(_) => SelectionRule::GlobalMinCapacity,
        }
    }

    fn reject(&mut self, index: usize) {
        match self {
            Pool::Borders(b) => b.remove(index),
            Pool::SmartNic(s) => {
                s.remove(&index);
            }
        }
    }

    /// Updates the pool after `index` moved to the CPU in `chain`.
    fn migrated(&mut self, index: usize, chain: &ServiceChain, rejected: &BTreeSet<usize>) {
        match self {
            Pool::SmartNic(s) => {
                s.remove(&index);
            }
            Pool::Borders(b) => {
                let was_left = b.left.remove(&index);
                let was_right = b.right.remove(&index);
                let on_nic = |i: usize| {
                    chain.vnfs[i].placement == Placement::SmartNic && !rejected.contains(&i)
                };
                if was_left && index + 1 < chain.len() && on_nic(index + 1) {
                    b.left.insert(index + 1);
                }
                if was_right && index > 0 && on_nic(index - 1) {
                    b.right.insert(index - 1);
                }
            }
        }
    }
}

/// Runs one planning round, reporting each selection to `observer`.
pub fn plan_observed(
    policy: Policy,
    chain: &ServiceChain,
    specs: &SpecCatalog,
    load: LoadState,
    mut observer: impl FnMut(&Selection),
) -> MigrationPlan {
    let mut work = chain.clone();
    let mut steps = Vec::new();
    let mut rejected_candidates = Vec::new();

    if !is_overloaded(&work, specs, Placement::SmartNic, load) {
        return MigrationPlan {
            policy,
            steps,
            outcome: Outcome::NotOverloaded,
            rejected_candidates,
            post_chain: work,
        };
    }

    let mut pool = Pool::new(policy, &work);
    let mut rejected = BTreeSet::new();
    let outcome = loop {
        let members = pool.members();
        let Some(b0) = argmin_smartnic_capacity(members.iter().copied(), &work, specs) else {
            break Outcome::ScaleOutRequired;
        };

        if !check_cpu_headroom(&work, specs, b0, load) {
            observer(&Selection {
                pool: members,
                candidate: b0,
                migrated: false,
            });
            rejected_candidates.push(Rejection {
                vnf_id: work.vnfs[b0].id.clone(),
                index: b0,
                reason: RejectReason::CpuHeadroom,
            });
            rejected.insert(b0);
            pool.reject(b0);
            continue;
        }

        let alleviated = check_alleviated(&work, specs, b0, load);
        work.vnfs[b0].placement = Placement::Cpu;
        steps.push(MigrationStep {
            vnf_id: work.vnfs[b0].id.clone(),
            index: b0,
            from: Placement::SmartNic,
            to: Placement::Cpu,
            rule: pool.rule(),
        });
        observer(&Selection {
            pool: members,
            candidate: b0,
            migrated: true,
        });
        pool.migrated(b0, &work, &rejected);

        if alleviated {
            break Outcome::Resolved;
        }
    };

    MigrationPlan {
        policy,
        steps,
        outcome,
        rejected_candidates,
        post_chain: work,
    }
}

pub fn plan(
    policy: Policy,
    chain: &ServiceChain,
    specs: &SpecCatalog,
    load: LoadState,
) -> MigrationPlan {
    plan_observed(policy, chain, specs, load, |_| {})
}

/// Border migration: only vNFs adjacent to the CPU are moved.
pub fn plan_pam(chain: &ServiceChain, specs: &SpecCatalog, load: LoadState) -> MigrationPlan {
    plan(Policy::Pam, chain, specs, load)
}

/// Bottleneck migration: the minimum-capacity SmartNIC vNF is moved wherever it is.
pub fn plan_naive(chain: &ServiceChain, specs: &SpecCatalog, load: LoadState) -> MigrationPlan {
    plan(Policy::Naive, chain, specs, load)
}

/// Why a list of steps cannot be applied to a chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepError {
    UnknownVnf {
        step: usize,
        vnf_id: String,
    },
    PlacementMismatch {
        step: usize,
        vnf_id: String,
        expected: Placement,
        actual: Placement,
    },
}

impl fmt::Display for StepError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepError::UnknownVnf { step, vnf_id } => {
                write!(f, "step {step}: no vNF `{vnf_id}` in chain")
            }
            StepError::PlacementMismatch {
                step,
                vnf_id,
                expected,
                actual,
            } => write!(
                f,
                "step {step}: `{vnf_id}` expected on {expected}, found on {actual}"
            ),
        }
    }
}

impl core::error::Error for StepError {}

/// Replays `steps` on a copy of `chain`, checking each step's source placement.
pub fn apply_steps(
    chain: &ServiceChain,
    steps: &[MigrationStep],
) -> Result<ServiceChain, StepError> {
    let mut out = chain.clone();
    for (n, step) in steps.iter().enumerate() {
        let i = out
            .position(&step.vnf_id)
            .ok_or_else(|| StepError::UnknownVnf {
                step: n,
                vnf_id: step.vnf_id.clone(),
            })?;
        let actual = out.vnfs[i].placement;
        if actual != step.from {
            return Err(StepError::PlacementMismatch {
                step: n,
                vnf_id: step.vnf_id.clone(),
                expected: step.from,
                actual,
            });
        }
        out.vnfs[i].placement = step.to;
    }
    Ok(out)
}
