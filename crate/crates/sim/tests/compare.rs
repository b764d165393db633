use std::path::Path;

use pam_core::planner::Outcome;
use pam_sim::compare;
use pam_sim::report::comparison_svg;

fn scenario(name: &str) -> pam_core::Scenario {
    pam_sim::load_scenario(
        Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("scenarios")
            .join(name),
    )
    .unwrap()
}

#[test]
fn calibrated_profile_gives_eighteen_percent() {
    let r = compare(&scenario("calibrated_latency.scenario.json"));
    assert_eq!(r.before.crossings, 4);
    assert_eq!(r.naive.after.crossings, 6);
    assert_eq!(r.pam.after.crossings, 4);
    assert_eq!(r.naive.after.latency_us, 111.0);
    assert_eq!(r.pam.after.latency_us, 91.0);
    assert!((r.latency_reduction - 20.0 / 111.0).abs() < 1e-12);
    assert!(r.pam.verification.as_ref().unwrap().passed);
    assert!(r.naive.verification.as_ref().unwrap().passed);
}

#[test]
fn seventy_one_microsecond_profile_gives_fifteen_percent() {
    let mut s = scenario("calibrated_latency.scenario.json");
    let lb = s.specs.get_mut("LoadBalancer").unwrap();
    lb.proc_latency_cpu += 20.0;
    lb.proc_latency_smartnic += 20.0;
    let r = compare(&s);
    assert_eq!(
        (r.naive.after.latency_us, r.pam.after.latency_us),
        (131.0, 111.0)
    );
    assert!((r.latency_reduction - 0.1527).abs() < 1e-4);
}

#[test]
fn underloaded_scenario_has_no_delta() {
    let mut s = scenario("reference_chain.scenario.json");
    s.load.theta_cur = 0.5;
    let r = compare(&s);
    assert_eq!(r.pam.plan.outcome, Outcome::NotOverloaded);
    assert_eq!(r.naive.plan.outcome, Outcome::NotOverloaded);
    assert_eq!(r.latency_reduction, 0.0);
}

#[test]
fn table_profile_gives_identical_plans() {
    let r = compare(&scenario("reference_chain.scenario.json"));
    assert_eq!(r.pam.plan.post_chain, r.naive.plan.post_chain);
    assert_eq!(r.latency_reduction, 0.0);
    assert_eq!(r.pam.plan.steps[0].vnf_id, "Logger");
}

#[test]
fn throughput_after_each_policy() {
    let r = compare(&scenario("monitor_override.scenario.json"));
    assert!((r.pam.after.max_throughput_gbps - 4.0 / 3.0).abs() < 1e-9);
    assert!((r.naive.after.max_throughput_gbps - 5.0 / 3.0).abs() < 1e-9);
}

#[test]
fn comparison_chart_has_both_panels() {
    let svg = comparison_svg(&compare(&scenario("calibrated_latency.scenario.json")));
    assert!(svg.contains("(a) Latency") && svg.contains("(b) Throughput"));
    assert_eq!(svg.matches("<rect x=").count(), 6);
    assert!(svg.contains(">111<") && svg.contains(">91<"));
}
