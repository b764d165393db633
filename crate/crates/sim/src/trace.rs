//! Load traces and timeline replay.

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use pam_core::chain::{LoadState, Placement, Scenario};
use pam_core::perf::{count_crossings, estimate_latency};
use pam_core::planner::{plan, Outcome, Policy};
use pam_core::resource::{device_utilization, is_overloaded, max_chain_throughput};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub t: f64,
    #[serde(rename = "theta_cur_gbps")]
    pub theta_cur: f64,
}

/// Migration policy applied at each trace point; `None` never migrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum TracePolicy {
    Pam,
    Naive,
    None,
}

impl TracePolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            TracePolicy::Pam => "pam",
            TracePolicy::Naive => "naive",
            TracePolicy::None => "none",
        }
    }

    pub fn planner(self) -> Option<Policy> {
        match self {
            TracePolicy::Pam => Some(Policy::Pam),
            TracePolicy::Naive => Some(Policy::Naive),
            TracePolicy::None => None,
        }
    }
}

impl fmt::Display for TracePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TracePolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pam" => Ok(TracePolicy::Pam),
            "naive" => Ok(TracePolicy::Naive),
            "none" => Ok(TracePolicy::None),
            other => Err(format!("unknown policy `{other}`")),
        }
    }
}

/// Result of one planning round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundOutcome {
    NotOverloaded,
    Resolved,
    ScaleOutRequired,
    /// Unmanaged run with the SmartNIC at or above capacity.
    Overloaded,
}

impl RoundOutcome {
    pub fn as_str(self) -> &'static str {
        match self {
            RoundOutcome::NotOverloaded => "not_overloaded",
            RoundOutcome::Resolved => "resolved",
            RoundOutcome::ScaleOutRequired => "scale_out_required",
            RoundOutcome::Overloaded => "overloaded",
        }
    }
}

impl From<Outcome> for RoundOutcome {
    fn from(o: Outcome) -> Self {
        match o {
            Outcome::NotOverloaded => RoundOutcome::NotOverloaded,
            Outcome::Resolved => RoundOutcome::Resolved,
            Outcome::ScaleOutRequired => RoundOutcome::ScaleOutRequired,
        }
    }
}

impl FromStr for RoundOutcome {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        [
            RoundOutcome::NotOverloaded,
            RoundOutcome::Resolved,
            RoundOutcome::ScaleOutRequired,
            RoundOutcome::Overloaded,
        ]
        .into_iter()
        .find(|o| o.as_str() == s)
        .ok_or_else(|| format!("unknown outcome `{s}`"))
    }
}

/// State of the chain after the planning round at one trace point.
#[derive(Debug, Clone, PartialEq)]
pub struct TimelineRecord {
    pub t: f64,
    pub theta_cur: f64,
    pub policy: TracePolicy,
    pub smartnic_util: f64,
    pub cpu_util: f64,
    pub crossings: usize,
    pub latency_us: f64,
    pub max_throughput_gbps: f64,
    pub migrations_this_step: Vec<String>,
    pub cumulative_migrations: usize,
    pub outcome: RoundOutcome,
}

/// Reads a `t,theta_cur_gbps` CSV. `t` must increase strictly and loads
/// must be finite and non-negative.
pub fn parse_trace(reader: impl Read, origin: &Path) -> Result<Vec<TracePoint>> {
    let err = |message: String| Error::Trace {
        path: origin.to_path_buf(),
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| err(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["t", "theta_cur_gbps"] {
        return Err(err(format!(
            "expected header `t,theta_cur_gbps`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut points: Vec<TracePoint> = Vec::new();
    for (row, rec) in rdr.deserialize::<TracePoint>().enumerate() {
        let line = row + 2;
        let p = rec.map_err(|e| err(format!("line {line}: {e}")))?;
        if !p.t.is_finite() {
            return Err(err(format!("line {line}: t = {} is not finite", p.t)));
        }
        if !(p.theta_cur >= 0.0 && p.theta_cur.is_finite()) {
            return Err(err(format!(
                "line {line}: theta_cur_gbps = {} must be finite and >= 0",
                p.theta_cur
            )));
        }
        if let Some(prev) = points.last() {
            if p.t <= prev.t {
                return Err(err(format!(
                    "line {line}: t = {} does not increase (previous {})",
                    p.t, prev.t
                )));
            }
        }
        points.push(p);
    }
    if points.is_empty() {
        return Err(err("trace has no points".into()));
    }
    Ok(points)
}

pub fn load_trace(path: impl AsRef<Path>) -> Result<Vec<TracePoint>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_trace(file, path)
}

/// Replays `trace` on `scenario`, planning once per point against the chain
/// left by the previous point.
pub fn run_trace(
    scenario: &Scenario,
    trace: &[TracePoint],
    policy: TracePolicy,
) -> Vec<TimelineRecord> {
    let specs = &scenario.specs;
    let mut chain = scenario.chain.clone();
    let mut cumulative = 0;
    trace
        .iter()
        .map(|point| {
            let load = LoadState::new(point.theta_cur);
            let (moved, outcome) = match policy.planner() {
                Some(p) => {
                    let round = plan(p, &chain, specs, load);
                    chain = round.post_chain;
                    (
                        round.steps.into_iter().map(|s| s.vnf_id).collect(),
                        round.outcome.into(),
                    )
                }
                None => {
                    let outcome = if is_overloaded(&chain, specs, Placement::SmartNic, load) {
                        RoundOutcome::Overloaded
                    } else {
                        RoundOutcome::NotOverloaded
                    };
                    (Vec::new(), outcome)
                }
            };
            cumulative += moved.len();
            TimelineRecord {
                t: point.t,
                theta_cur: point.theta_cur,
                policy,
                smartnic_util: device_utilization(&chain, specs, Placement::SmartNic, load),
                cpu_util: device_utilization(&chain, specs, Placement::Cpu, load),
                crossings: count_crossings(&chain),
                latency_us: estimate_latency(&chain, specs, scenario.pcie_latency_us),
                max_throughput_gbps: max_chain_throughput(&chain, specs),
                migrations_this_step: moved,
                cumulative_migrations: cumulative,
                outcome,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Vec<TracePoint>> {
        parse_trace(text.as_bytes(), Path::new("trace.csv"))
    }

    #[test]
    fn parses_points() {
        let pts = parse("t,theta_cur_gbps\n0,0.5\n1.5,1.2\n").unwrap();
        assert_eq!(
            pts,
            [
                TracePoint {
                    t: 0.0,
                    theta_cur: 0.5
                },
                TracePoint {
                    t: 1.5,
                    theta_cur: 1.2
                }
            ]
        );
    }

    #[test]
    fn rejects_bad_traces() {
        for (text, needle) in [
            ("time,load\n0,1\n", "expected header"),
            ("t,theta_cur_gbps\n", "no points"),
            (
                "t,theta_cur_gbps\n0,1\n0,2\n",
                "line 3: t = 0 does not increase",
            ),
            ("t,theta_cur_gbps\n0,-1\n", "must be finite and >= 0"),
            ("t,theta_cur_gbps\n0,abc\n", "line 2"),
        ] {
            let err = parse(text).unwrap_err();
            assert!(err.to_string().contains(needle), "{text:?}: {err}");
            assert_eq!(err.exit_code(), 1);
        }
    }

    #[test]
    fn policy_and_outcome_names_round_trip() {
        for p in [TracePolicy::Pam, TracePolicy::Naive, TracePolicy::None] {
            assert_eq!(p.as_str().parse::<TracePolicy>().unwrap(), p);
        }
        for o in [
            "not_overloaded",
            "resolved",
            "scale_out_required",
            "overloaded",
        ] {
            assert_eq!(o.parse::<RoundOutcome>().unwrap().as_str(), o);
        }
    }
}
