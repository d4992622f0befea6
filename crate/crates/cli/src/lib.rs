//! Scenario files and report rendering for the `lefschetz` binary.

pub mod run;
pub mod scenario_file;
