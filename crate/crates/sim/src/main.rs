use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pam_core::chain::{Placement, Scenario, ServiceChain};
use pam_core::oracle::verify_plan;
use pam_core::perf::estimate_perf;
use pam_core::planner::{plan, MigrationPlan, Policy};
use pam_sim::compare::{compare, ComparisonReport};
use pam_sim::report::{comparison_svg, emit_svg, emit_timeline_csv, timeline_svg};
use pam_sim::{load_scenario, load_trace, run_trace, Error, TracePolicy};
use serde::Serialize;

const EXIT_VERIFY_FAILED: u8 = 2;

/// Plan vNF migrations off an overloaded SmartNIC and estimate their cost.
#[derive(Parser)]
#[command(name = "pam", version)]
struct Cli {
    /// Override the scenario's per-crossing PCIe latency (microseconds).
    #[arg(long, global = true, value_name = "X")]
    pcie_latency_us: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlanPolicy {
    Pam,
    Naive,
}

impl From<PlanPolicy> for Policy {
    fn from(p: PlanPolicy) -> Policy {
        match p {
            PlanPolicy::Pam => Policy::Pam,
            PlanPolicy::Naive => Policy::Naive,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Plan one migration round at the scenario's load.
    Plan {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum)]
        policy: PlanPolicy,
        #[arg(long)]
        json: bool,
    },
    /// Replay a load trace, planning once per trace point.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, value_enum)]
        policy: TracePolicy,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Compare border migration against bottleneck migration.
    Compare {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Check both planners' output against exhaustive enumeration.
    Verify {
        #[arg(long)]
        scenario: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn scenario_with_overrides(path: &PathBuf, pcie: Option<f64>) -> Result<Scenario, Error> {
    let mut scenario = load_scenario(path)?;
    if let Some(x) = pcie {
        scenario.pcie_latency_us = x;
        scenario.validate().map_err(Error::Validation)?;
    }
    Ok(scenario)
}

fn run(cli: Cli) -> Result<u8, Error> {
    let pcie = cli.pcie_latency_us;
    match cli.command {
        Command::Plan {
            scenario,
            policy,
            json,
        } => {
            let scenario = scenario_with_overrides(&scenario, pcie)?;
            let plan = plan(
                policy.into(),
                &scenario.chain,
                &scenario.specs,
                scenario.load,
            );
            print_plan(&scenario, &plan, json);
            Ok(0)
        }
        Command::Simulate {
            scenario,
            trace,
            policy,
            out,
            svg,
        } => {
            let scenario = scenario_with_overrides(&scenario, pcie)?;
            let trace = load_trace(&trace)?;
            let records = run_trace(&scenario, &trace, policy);
            emit_timeline_csv(&records, &out)?;
            if let Some(svg) = svg {
                emit_svg(&timeline_svg(&records), svg)?;
            }
            let last = records.last().expect("trace is non-empty");
            println!(
                "{} points, policy {}, {} migrations, final crossings {}, final latency {} us",
                records.len(),
                policy,
                last.cumulative_migrations,
                last.crossings,
                last.latency_us
            );
            Ok(0)
        }
        Command::Compare {
            scenario,
            json,
            svg,
        } => {
            let scenario = scenario_with_overrides(&scenario, pcie)?;
            let report = compare(&scenario);
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report).expect("report serializes")
                );
            } else {
                print_comparison(&report);
            }
            if let Some(svg) = svg {
                emit_svg(&comparison_svg(&report), svg)?;
            }
            Ok(0)
        }
        Command::Verify { scenario } => {
            let scenario = scenario_with_overrides(&scenario, pcie)?;
            let mut all_passed = true;
            for policy in [Policy::Pam, Policy::Naive] {
                let plan = plan(policy, &scenario.chain, &scenario.specs, scenario.load);
                let report = verify_plan(&scenario.chain, &scenario.specs, scenario.load, &plan)?;
                println!("[{policy}] outcome {}", plan.outcome);
                print!("{report}");
                all_passed &= report.passed();
            }
            println!(
                "{}",
                if all_passed {
                    "verified"
                } else {
                    "verification FAILED"
                }
            );
            Ok(if all_passed { 0 } else { EXIT_VERIFY_FAILED })
        }
    }
}

fn placement_string(chain: &ServiceChain) -> String {
    chain
        .vnfs
        .iter()
        .map(|v| {
            format!(
                "{}@{}",
                v.id,
                match v.placement {
                    Placement::SmartNic => "S",
                    Placement::Cpu => "C",
                }
            )
        })
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Serialize)]
struct PlanOutput<'a> {
    theta_cur: f64,
    pcie_latency_us: f64,
    plan: &'a MigrationPlan,
    before: pam_core::PerfEstimate,
    after: pam_core::PerfEstimate,
}

fn print_plan(scenario: &Scenario, plan: &MigrationPlan, json: bool) {
    let before = estimate_perf(&scenario.chain, &scenario.specs, scenario.pcie_latency_us);
    let after = estimate_perf(&plan.post_chain, &scenario.specs, scenario.pcie_latency_us);
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if json {
        let doc = PlanOutput {
            theta_cur: scenario.load.theta_cur,
            pcie_latency_us: scenario.pcie_latency_us,
            plan,
            before,
            after,
        };
        let _ = writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&doc).expect("plan serializes")
        );
        return;
    }
    let _ = writeln!(out, "policy: {}", plan.policy);
    let _ = writeln!(out, "theta_cur: {} Gbps", scenario.load.theta_cur);
    let _ = writeln!(out, "outcome: {}", plan.outcome);
    for (i, s) in plan.steps.iter().enumerate() {
        let _ = writeln!(out, "step {}: {} {} -> {}", i + 1, s.vnf_id, s.from, s.to);
    }
    for r in &plan.rejected_candidates {
        let _ = writeln!(out, "rejected: {} ({})", r.vnf_id, r.reason.as_str());
    }
    let _ = writeln!(out, "before: {}", placement_string(&scenario.chain));
    let _ = writeln!(out, "after:  {}", placement_string(&plan.post_chain));
    let _ = writeln!(
        out,
        "crossings: {} -> {}; latency: {} -> {} us; max throughput: {} -> {} Gbps",
        before.crossings,
        after.crossings,
        before.latency_us,
        after.latency_us,
        before.max_throughput_gbps,
        after.max_throughput_gbps
    );
}

fn print_comparison(report: &ComparisonReport) {
    println!(
        "theta_cur {} Gbps, pcie {} us/crossing; before: crossings {}, latency {} us, max throughput {} Gbps, SmartNIC util {:.4}, CPU util {:.4}",
        report.theta_cur,
        report.pcie_latency_us,
        report.before.crossings,
        report.before.latency_us,
        report.before.max_throughput_gbps,
        report.load_before.smartnic_util,
        report.load_before.cpu_util
    );
    for r in [&report.naive, &report.pam] {
        let moved: Vec<&str> = r.plan.steps.iter().map(|s| s.vnf_id.as_str()).collect();
        let verdict = match &r.verification {
            Some(v) if v.passed => "verified",
            Some(_) => "VERIFICATION FAILED",
            None => "not verified (chain too long)",
        };
        println!(
            "{:<5} {:<18} moved [{}]; crossings {} -> {} ({:+}); latency {} -> {} us; max throughput {} -> {} Gbps; {}",
            r.policy.as_str(),
            r.plan.outcome.as_str(),
            moved.join(", "),
            report.before.crossings,
            r.after.crossings,
            r.after.crossings as i64 - report.before.crossings as i64,
            report.before.latency_us,
            r.after.latency_us,
            report.before.max_throughput_gbps,
            r.after.max_throughput_gbps,
            verdict
        );
    }
    println!(
        "PAM latency vs naive: {:.1}% lower",
        report.latency_reduction * 100.0
    );
}
