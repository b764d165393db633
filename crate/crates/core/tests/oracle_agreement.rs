//! Cross-checks the enumeration oracle and border identification against
//! straightforward recomputation written out here.

use pam_core::chain::{LoadState, Placement, ServiceChain, SpecCatalog, VnfInstance, VnfSpec};
use pam_core::oracle::enumerate_placements;
use pam_core::planner::identify_borders;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use Placement::{Cpu, SmartNic};

fn random_case(rng: &mut ChaCha8Rng, n: usize) -> (ServiceChain, SpecCatalog, LoadState) {
    let mut specs = SpecCatalog::new();
    let mut vnfs = Vec::new();
    for i in 0..n {
        let cs = rng.gen_range(0.5f64.ln()..16f64.ln()).exp();
        let cc = rng.gen_range(0.5f64.ln()..16f64.ln()).exp();
        specs.insert(VnfSpec::new(format!("t{i}"), cs, cc));
        let p = if rng.gen_bool(0.5) { SmartNic } else { Cpu };
        vnfs.push(VnfInstance::new(format!("v{i}"), format!("t{i}"), p));
    }
    let ingress = if rng.gen_bool(0.8) { SmartNic } else { Cpu };
    let egress = if rng.gen_bool(0.8) { SmartNic } else { Cpu };
    let chain = ServiceChain::new(vnfs).with_anchors(ingress, egress);
    (chain, specs, LoadState::new(rng.gen_range(0.1..4.0)))
}

#[test]
fn records_match_recomputation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let n = rng.gen_range(1..=8);
        let (chain, specs, load) = random_case(&mut rng, n);
        let records = enumerate_placements(&chain, &specs, load).unwrap();
        assert_eq!(records.len(), 1 << n);
        for (k, r) in records.iter().enumerate() {
            let mut seq = vec![chain.ingress];
            let (mut nic, mut cpu, mut moved, mut back) = (0.0, 0.0, 0, 0);
            for i in 0..n {
                let on_cpu = (k >> i) & 1 == 1;
                let spec = specs.get(&chain.vnfs[i].spec).unwrap();
                if on_cpu {
                    cpu += load.theta_cur / spec.cap_cpu;
                    seq.push(Cpu);
                } else {
                    nic += load.theta_cur / spec.cap_smartnic;
                    seq.push(SmartNic);
                }
                match (chain.vnfs[i].placement, on_cpu) {
                    (SmartNic, true) => moved += 1,
                    (Cpu, false) => back += 1,
                    _ => {}
                }
            }
            seq.push(chain.egress);
            let crossings = seq.windows(2).filter(|w| w[0] != w[1]).count();
            assert_eq!(r.placements, seq[1..=n].to_vec());
            assert_eq!(r.crossings, crossings);
            assert_eq!(
                r.feasible_smartnic,
                nic < 1.0,
                "record {k}: {} vs {nic}",
                r.smartnic_util
            );
            assert_eq!(
                r.feasible_cpu,
                cpu < 1.0,
                "record {k}: {} vs {cpu}",
                r.cpu_util
            );
            assert_eq!((r.migrations_from_input, r.reverse_moves), (moved, back));
        }
    }
}

#[test]
fn borders_match_direct_scan_for_every_short_chain() {
    let mut specs = SpecCatalog::new();
    specs.insert(VnfSpec::new("x", 1.0, 1.0));
    let mut checked = 0;
    for n in 1..=10usize {
        for mask in 0u32..(1 << n) {
            for (ingress, egress) in [
                (SmartNic, SmartNic),
                (SmartNic, Cpu),
                (Cpu, SmartNic),
                (Cpu, Cpu),
            ] {
                let place: Vec<Placement> = (0..n)
                    .map(|i| if (mask >> i) & 1 == 1 { Cpu } else { SmartNic })
                    .collect();
                let chain = ServiceChain::new(
                    place
                        .iter()
                        .enumerate()
                        .map(|(i, p)| VnfInstance::new(format!("v{i}"), "x", *p))
                        .collect(),
                )
                .with_anchors(ingress, egress);
                let b = identify_borders(&chain);
                for i in 0..n {
                    let up = if i == 0 { ingress } else { place[i - 1] };
                    let down = if i + 1 == n { egress } else { place[i + 1] };
                    let nic = place[i] == SmartNic;
                    assert_eq!(b.left.contains(&i), nic && up == Cpu, "{place:?} {i}");
                    assert_eq!(b.right.contains(&i), nic && down == Cpu, "{place:?} {i}");
                }
                assert!(b.left.iter().chain(&b.right).all(|&i| i < n));
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 4 * ((1 << 11) - 2));
}
