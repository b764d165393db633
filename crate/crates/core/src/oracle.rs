//! Exhaustive ground truth for short chains.
//!
//! [`enumerate_placements`] scores every point of `{SmartNIC, CPU}^n`;
//! [`verify_plan`] checks a [`MigrationPlan`] against brute force.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::chain::{LoadState, Placement, ServiceChain, SpecCatalog};
use crate::perf::count_crossings;
use crate::planner::{apply_steps, MigrationPlan, Outcome, Policy};
use crate::resource::device_utilization;

/// Longest chain the oracle will enumerate (2^20 placements).
pub const MAX_ENUMERATION_LEN: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    ChainTooLong { len: usize, max: usize },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::ChainTooLong { len, max } => {
                write!(f, "chain too long for enumeration: {len} vNFs (max {max})")
            }
        }
    }
}

impl core::error::Error for OracleError {}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PlacementRecord {
    pub placements: Vec<Placement>,
    pub smartnic_util: f64,
    pub cpu_util: f64,
    pub feasible_smartnic: bool,
    pub feasible_cpu: bool,
    pub crossings: usize,
    /// vNFs on the CPU here but on the SmartNIC in the input.
    pub migrations_from_input: usize,
    /// vNFs on the SmartNIC here but on the CPU in the input; nonzero means
    /// the record is not reachable by SmartNIC-to-CPU moves.
    pub reverse_moves: usize,
}

impl PlacementRecord {
    pub fn is_feasible(&self) -> bool {
        self.feasible_smartnic && self.feasible_cpu
    }

    pub fn reachable_by_offload(&self) -> bool {
        self.reverse_moves == 0
    }
}

fn placements_from_mask(mask: u32, n: usize) -> Vec<Placement> {
    (0..n)
        .map(|i| {
            if mask >> i & 1 == 1 {
                Placement::Cpu
            } else {
                Placement::SmartNic
            }
        })
        .collect()
}

fn mask_of(placements: &[Placement]) -> u32 {
    placements
        .iter()
        .enumerate()
        .filter(|(_, p)| **p == Placement::Cpu)
        .fold(0, |m, (i, _)| m | 1 << i)
}

fn score(
    chain: &ServiceChain,
    input: &[Placement],
    specs: &SpecCatalog,
    load: LoadState,
) -> PlacementRecord {
    let smartnic_util = device_utilization(chain, specs, Placement::SmartNic, load);
    let cpu_util = device_utilization(chain, specs, Placement::Cpu, load);
    let mut migrations_from_input = 0;
    let mut reverse_moves = 0;
    for (v, &before) in chain.vnfs.iter().zip(input) {
        match (before, v.placement) {
            (Placement::SmartNic, Placement::Cpu) => migrations_from_input += 1,
            (Placement::Cpu, Placement::SmartNic) => reverse_moves += 1,
            _ => {}
        }
    }
    PlacementRecord {
        placements: chain.placements(),
        smartnic_util,
        cpu_util,
        feasible_smartnic: smartnic_util < 1.0,
        feasible_cpu: cpu_util < 1.0,
        crossings: count_crossings(chain),
        migrations_from_input,
        reverse_moves,
    }
}

/// Scores all `2^n` placements of `chain`. Record `k` places vNF `i` on the
/// CPU iff bit `i` of `k` is set, so record 0 is all-SmartNIC.
pub fn enumerate_placements(
    chain: &ServiceChain,
    specs: &SpecCatalog,
    load: LoadState,
) -> Result<Vec<PlacementRecord>, OracleError> {
    let n = chain.len();
    if n > MAX_ENUMERATION_LEN {
        return Err(OracleError::ChainTooLong {
            len: n,
            max: MAX_ENUMERATION_LEN,
        });
    }
    let input = chain.placements();
    let mut work = chain.clone();
    Ok((0..1u32 << n)
        .map(|mask| {
            for (i, v) in work.vnfs.iter_mut().enumerate() {
                v.placement = if mask >> i & 1 == 1 {
                    Placement::Cpu
                } else {
                    Placement::SmartNic
                };
            }
            score(&work, &input, specs, load)
        })
        .collect())
}

/// Fewest-migration fully feasible record reachable by SmartNIC-to-CPU moves
/// with at most `max_crossings` crossings. Ties go to the lower SmartNIC
/// utilization, then to enumeration order.
pub fn min_migration_feasible(
    records: &[PlacementRecord],
    max_crossings: usize,
) -> Option<&PlacementRecord> {
    let mut best: Option<&PlacementRecord> = None;
    for r in records
        .iter()
        .filter(|r| r.reachable_by_offload() && r.is_feasible() && r.crossings <= max_crossings)
    {
        let better = match best {
            None => true,
            Some(b) => {
                r.migrations_from_input < b.migrations_from_input
                    || (r.migrations_from_input == b.migrations_from_input
                        && r.smartnic_util < b.smartnic_util)
            }
        };
        if better {
            best = Some(r);
        }
    }
    best
}

/// Every placement reachable from `chain` by repeatedly moving a current
/// border vNF (a SmartNIC vNF with a CPU neighbour) to the CPU, including
/// `chain` itself. Sorted by placement mask.
pub fn border_peel_closure(chain: &ServiceChain) -> Result<Vec<Vec<Placement>>, OracleError> {
    let n = chain.len();
    if n > MAX_ENUMERATION_LEN {
        return Err(OracleError::ChainTooLong {
            len: n,
            max: MAX_ENUMERATION_LEN,
        });
    }
    let start = mask_of(&chain.placements());
    let on_cpu = |mask: u32, i: isize| -> bool {
        if i < 0 {
            chain.ingress == Placement::Cpu
        } else if i as usize >= n {
            chain.egress == Placement::Cpu
        } else {
            mask >> i & 1 == 1
        }
    };
    let mut seen = BTreeSet::from([start]);
    let mut frontier = Vec::from([start]);
    while let Some(mask) = frontier.pop() {
        for i in 0..n {
            if mask >> i & 1 == 1 {
                continue;
            }
            let ii = i as isize;
            if on_cpu(mask, ii - 1) || on_cpu(mask, ii + 1) {
                let next = mask | 1 << i;
                if seen.insert(next) {
                    frontier.push(next);
                }
            }
        }
    }
    Ok(seen
        .into_iter()
        .map(|m| placements_from_mask(m, n))
        .collect())
}

/// Every placement obtained from `chain` by moving any subset of its
/// SmartNIC vNFs to the CPU. Sorted by placement mask.
fn offload_closure(chain: &ServiceChain) -> Vec<Vec<Placement>> {
    let n = chain.len();
    let start = mask_of(&chain.placements());
    let free: Vec<usize> = (0..n).filter(|&i| start >> i & 1 == 0).collect();
    let mut masks: Vec<u32> = (0..1u32 << free.len())
        .map(|sub| {
            free.iter()
                .enumerate()
                .filter(|(k, _)| sub >> k & 1 == 1)
                .fold(start, |m, (_, &i)| m | 1 << i)
        })
        .collect();
    masks.sort_unstable();
    masks
        .into_iter()
        .map(|m| placements_from_mask(m, n))
        .collect()
}

fn render(placements: &[Placement]) -> String {
    placements
        .iter()
        .map(|p| match p {
            Placement::SmartNic => "S",
            Placement::Cpu => "C",
        })
        .collect::<Vec<_>>()
        .join("")
}

/// Properties a plan must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assertion {
    /// Replaying the steps on the input yields `post_chain`, every step is
    /// a SmartNIC-to-CPU move, and `NotOverloaded` plans are empty and
    /// really not overloaded.
    Reachable,
    /// A `Resolved` post-state is strictly below capacity on both devices.
    ResolvedFeasible,
    /// Border-migration plans never add PCIe crossings.
    CrossingsNonIncreasing,
    /// A `ScaleOutRequired` plan could not have been continued: no further
    /// migration from its post-state, drawn from the policy's own candidate
    /// space (border peeling for PAM, any SmartNIC subset for naive), is
    /// fully feasible without exceeding the input's crossings.
    ScaleOutCertified,
}

impl Assertion {
    pub fn as_str(self) -> &'static str {
        match self {
            Assertion::Reachable => "reachable",
            Assertion::ResolvedFeasible => "resolved_feasible",
            Assertion::CrossingsNonIncreasing => "crossings_non_increasing",
            Assertion::ScaleOutCertified => "scale_out_certified",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub assertion: Assertion,
    pub passed: bool,
    /// Counterexample or explanation when the assertion fails.
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VerificationReport {
    pub findings: Vec<Finding>,
    /// Observations that are reported but not asserted.
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.findings.iter().all(|f| f.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| !f.passed)
    }

    pub fn finding(&self, assertion: Assertion) -> Option<&Finding> {
        self.findings.iter().find(|f| f.assertion == assertion)
    }

    fn record(&mut self, assertion: Assertion, witness: Option<String>) {
        self.findings.push(Finding {
            assertion,
            passed: witness.is_none(),
            witness,
        });
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for finding in &self.findings {
            let status = if finding.passed { "ok  " } else { "FAIL" };
            write!(f, "{status} {}", finding.assertion.as_str())?;
            if let Some(w) = &finding.witness {
                write!(f, ": {w}")?;
            }
            writeln!(f)?;
        }
        for note in &self.notes {
            writeln!(f, "note {note}")?;
        }
        Ok(())
    }
}

/// Checks `plan` (produced for `chain` under `load`) against brute force.
pub fn verify_plan(
    chain: &ServiceChain,
    specs: &SpecCatalog,
    load: LoadState,
    plan: &MigrationPlan,
) -> Result<VerificationReport, OracleError> {
    if chain.len() > MAX_ENUMERATION_LEN {
        return Err(OracleError::ChainTooLong {
            len: chain.len(),
            max: MAX_ENUMERATION_LEN,
        });
    }
    let mut report = VerificationReport::default();
    let input_crossings = count_crossings(chain);
    let post = &plan.post_chain;

    // (a) reachability
    let reach = match apply_steps(chain, &plan.steps) {
        Err(e) => Some(format!("{e}")),
        Ok(replayed) if replayed != *post => Some(format!(
            "steps lead to {} but post_chain is {}",
            render(&replayed.placements()),
            render(&post.placements())
        )),
        Ok(_) => {
            if let Some(step) = plan
                .steps
                .iter()
                .find(|s| s.from != Placement::SmartNic || s.to != Placement::Cpu)
            {
                Some(format!(
                    "step `{}` moves {} -> {}",
                    step.vnf_id, step.from, step.to
                ))
            } else if plan.outcome == Outcome::NotOverloaded && !plan.steps.is_empty() {
                Some(format!(
                    "NotOverloaded plan carries {} steps",
                    plan.steps.len()
                ))
            } else if plan.outcome == Outcome::NotOverloaded
                && device_utilization(chain, specs, Placement::SmartNic, load) >= 1.0
            {
                Some(format!(
                    "NotOverloaded but input SmartNIC utilization is {}",
                    device_utilization(chain, specs, Placement::SmartNic, load)
                ))
            } else {
                None
            }
        }
    };
    report.record(Assertion::Reachable, reach);

    // (b) Resolved post-state feasibility
    if plan.outcome == Outcome::Resolved {
        let s = device_utilization(post, specs, Placement::SmartNic, load);
        let c = device_utilization(post, specs, Placement::Cpu, load);
        let witness = (s >= 1.0 || c >= 1.0).then(|| {
            format!(
                "post {} has SmartNIC utilization {s}, CPU utilization {c}",
                render(&post.placements())
            )
        });
        report.record(Assertion::ResolvedFeasible, witness);
    }

    // (c) crossing safety of border migration
    if plan.policy == Policy::Pam {
        let after = count_crossings(post);
        let witness = (after > input_crossings).then(|| {
            format!(
                "post {} has crossings {after} > {input_crossings}",
                render(&post.placements())
            )
        });
        report.record(Assertion::CrossingsNonIncreasing, witness);
    }

    // (d) ScaleOutRequired certification
    if plan.outcome == Outcome::ScaleOutRequired {
        let continuations = match plan.policy {
            Policy::Pam => border_peel_closure(post)?,
            Policy::Naive => offload_closure(post),
        };
        let input = chain.placements();
        let mut work = post.clone();
        let witness = continuations.iter().find_map(|placements| {
            for (v, &p) in work.vnfs.iter_mut().zip(placements) {
                v.placement = p;
            }
            let r = score(&work, &input, specs, load);
            (r.is_feasible() && r.crossings <= input_crossings).then(|| {
                format!(
                    "{} is feasible (SmartNIC {}, CPU {}, crossings {})",
                    render(placements),
                    r.smartnic_util,
                    r.cpu_util,
                    r.crossings
                )
            })
        });
        report.record(Assertion::ScaleOutCertified, witness);

        if plan.policy == Policy::Pam {
            if let Some(alt) = first_feasible(
                chain,
                &border_peel_closure(chain)?,
                specs,
                load,
                input_crossings,
            ) {
                report.notes.push(format!(
                    "a different border-peeling order from the input reaches feasible {alt}"
                ));
            }
        }
    }

    if let Some(best) =
        min_migration_feasible(&enumerate_placements(chain, specs, load)?, usize::MAX)
    {
        report.notes.push(format!(
            "fewest-migration feasible offload: {} ({} moves, crossings {})",
            render(&best.placements),
            best.migrations_from_input,
            best.crossings
        ));
    }

    Ok(report)
}

fn first_feasible(
    chain: &ServiceChain,
    candidates: &[Vec<Placement>],
    specs: &SpecCatalog,
    load: LoadState,
    max_crossings: usize,
) -> Option<String> {
    let input = chain.placements();
    candidates.iter().find_map(|placements| {
        let c = chain.with_placements(placements);
        let r = score(&c, &input, specs, load);
        (r.is_feasible() && r.crossings <= max_crossings).then(|| render(placements))
    })
}
