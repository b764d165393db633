//! Linear utilization model.
//!
//! A vNF carrying `theta_cur` Gbps on a device where its capacity is `cap`
//! consumes `theta_cur / cap` of that device. Device utilization is the sum
//! over the vNFs it hosts; a device is overloaded once that sum reaches 1.

use alloc::string::String;
use alloc::vec::Vec;

use crate::chain::{LoadState, Placement, ServiceChain, SpecCatalog};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UtilizationReport {
    pub device: Placement,
    /// Demand ratio; not clamped, so values above 1 show how hot the device is.
    pub utilization: f64,
    pub per_vnf: Vec<(String, f64)>,
}

/// Utilization of `device` under `load`. Anchors host nothing.
pub fn utilization(
    chain: &ServiceChain,
    specs: &SpecCatalog,
    device: Placement,
    load: LoadState,
) -> UtilizationReport {
    let per_vnf: Vec<(String, f64)> = chain
        .vnfs
        .iter()
        .filter(|v| v.placement == device)
        .map(|v| {
            (
                v.id.clone(),
                load.theta_cur / specs.spec_of(v).capacity(device),
            )
        })
        .collect();
    let utilization = per_vnf.iter().map(|(_, r)| r).sum();
    UtilizationReport {
        device,
        utilization,
        per_vnf,
    }
}

/// Utilization of `device` without the per-vNF breakdown.
pub fn device_utilization(
    chain: &ServiceChain,
    specs: &SpecCatalog,
    device: Placement,
    load: LoadState,
) -> f64 {
    chain
        .vnfs
        .iter()
        .filter(|v| v.placement == device)
        .map(|v| load.theta_cur / specs.spec_of(v).capacity(device))
        .sum()
}

/// `true` once demand reaches capacity; feasibility is the strict `< 1`.
pub fn is_overloaded(
    chain: &ServiceChain,
    specs: &SpecCatalog,
    device: Placement,
    load: LoadState,
) -> bool {
    device_utilization(chain, specs, device, load) >= 1.0
}

/// Largest chain throughput that keeps both devices at or below full
/// utilization: `min` over devices of `1 / Σ 1/cap`. A device hosting
/// nothing imposes no bound; with no bound at all the result is infinite.
pub fn max_chain_throughput(chain: &ServiceChain, specs: &SpecCatalog) -> f64 {
    Placement::ALL
        .iter()
        .filter_map(|&device| {
            let mut inverse_sum = 0.0;
            let mut hosted = false;
            for v in chain.vnfs.iter().filter(|v| v.placement == device) {
                inverse_sum += 1.0 / specs.spec_of(v).capacity(device);
                hosted = true;
            }
            hosted.then(|| 1.0 / inverse_sum)
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{VnfInstance, VnfSpec};
    use alloc::vec;
    use Placement::{Cpu, SmartNic};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        let d = a - b;
        d <= tol && -d <= tol
    }

    fn reference_chain() -> ServiceChain {
        ServiceChain::new(vec![
            VnfInstance::new("LB", "LoadBalancer", Cpu),
            VnfInstance::new("Logger", "Logger", SmartNic),
            VnfInstance::new("Monitor", "Monitor", SmartNic),
            VnfInstance::new("Firewall", "Firewall", SmartNic),
            VnfInstance::new("C2", "LoadBalancer", Cpu),
        ])
    }

    #[test]
    fn reference_smartnic_utilization() {
        let specs = SpecCatalog::builtin();
        let r = utilization(&reference_chain(), &specs, SmartNic, LoadState::new(1.2));
        // 1.2/2 + 1.2/3.2 + 1.2/10
        assert!(close(r.utilization, 1.095, 1e-12));
        assert_eq!(r.per_vnf.len(), 3);
        let sum: f64 = r.per_vnf.iter().map(|(_, x)| x).sum();
        assert!(close(sum, r.utilization, 1e-12));
        assert!(is_overloaded(
            &reference_chain(),
            &specs,
            SmartNic,
            LoadState::new(1.2)
        ));
    }

    #[test]
    fn empty_device_is_zero() {
        let specs = SpecCatalog::builtin();
        let chain = ServiceChain::new(vec![VnfInstance::new("fw", "Firewall", Cpu)]);
        let r = utilization(&chain, &specs, SmartNic, LoadState::new(3.0));
        assert_eq!(r.utilization, 0.0);
        assert!(r.per_vnf.is_empty());
    }

    #[test]
    fn firewall_at_capacity_is_exactly_one_and_overloaded() {
        let specs = SpecCatalog::builtin();
        let chain = ServiceChain::new(vec![VnfInstance::new("fw", "Firewall", SmartNic)]);
        let load = LoadState::new(10.0);
        assert_eq!(device_utilization(&chain, &specs, SmartNic, load), 1.0);
        assert!(is_overloaded(&chain, &specs, SmartNic, load));
    }

    #[test]
    fn zero_load_never_overloads() {
        let specs = SpecCatalog::builtin();
        for d in Placement::ALL {
            assert!(!is_overloaded(
                &reference_chain(),
                &specs,
                d,
                LoadState::new(0.0)
            ));
        }
    }

    #[test]
    fn throughput_closed_form_examples() {
        let mut specs = SpecCatalog::builtin();
        specs.get_mut("Monitor").unwrap().cap_smartnic = 1.8;
        let chain = reference_chain().with_placements(&[Cpu, Cpu, SmartNic, SmartNic, Cpu]);
        assert!(close(
            max_chain_throughput(&chain, &specs),
            4.0 / 3.0,
            1e-12
        ));

        let single = ServiceChain::new(vec![VnfInstance::new("m", "Monitor", Cpu)]);
        assert_eq!(max_chain_throughput(&single, &specs), 10.0);

        let mut specs = SpecCatalog::new();
        specs.insert(VnfSpec::new("X", 7.0, 4.0));
        let pair = ServiceChain::new(vec![
            VnfInstance::new("a", "X", Cpu),
            VnfInstance::new("b", "X", Cpu),
        ]);
        assert!(close(max_chain_throughput(&pair, &specs), 2.0, 1e-12));
    }
}
