//! PCIe crossing count and additive latency/throughput estimates.

use crate::chain::{ServiceChain, SpecCatalog};
use crate::resource::max_chain_throughput;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PerfEstimate {
    pub crossings: usize,
    pub latency_us: f64,
    pub max_throughput_gbps: f64,
}

/// Placement changes along `ingress, v_1 .. v_n, egress`.
pub fn count_crossings(chain: &ServiceChain) -> usize {
    let mut prev = chain.ingress;
    let mut crossings = 0;
    for p in chain
        .vnfs
        .iter()
        .map(|v| v.placement)
        .chain(core::iter::once(chain.egress))
    {
        if p != prev {
            crossings += 1;
        }
        prev = p;
    }
    crossings
}

/// Sum of per-vNF processing latency on the hosting device plus one
/// `pcie_latency_us` per crossing. No queueing.
pub fn estimate_latency(chain: &ServiceChain, specs: &SpecCatalog, pcie_latency_us: f64) -> f64 {
    let processing: f64 = chain
        .vnfs
        .iter()
        .map(|v| specs.spec_of(v).proc_latency(v.placement))
        .sum();
    processing + count_crossings(chain) as f64 * pcie_latency_us
}

pub fn estimate_perf(
    chain: &ServiceChain,
    specs: &SpecCatalog,
    pcie_latency_us: f64,
) -> PerfEstimate {
    PerfEstimate {
        crossings: count_crossings(chain),
        latency_us: estimate_latency(chain, specs, pcie_latency_us),
        max_throughput_gbps: max_chain_throughput(chain, specs),
    }
}
