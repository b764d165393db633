//! Scenario files, trace replay, policy comparison and report output for
//! `pam-core`. The `pam` binary is a thin command-line front end over this
//! library.

pub mod compare;
pub mod error;
pub mod report;
pub mod scenario;
pub mod trace;

pub use compare::{compare, ComparisonReport, PolicyResult};
pub use error::{Error, Result};
pub use scenario::{
    load_scenario, parse_scenario, save_scenario, scenario_to_string, ScenarioFile,
};
pub use trace::{load_trace, run_trace, RoundOutcome, TimelineRecord, TracePoint, TracePolicy};
