//! Scenario files, end-to-end runs and the built-in self-test.

mod config;
mod run;
mod selftest;

pub use config::{
    parse_config, parse_config_with, render_config, ConfigError, ConfigIssue, InitialState,
    IssueKind, ModelConfig, ModelKind, OutputPaths, ScenarioConfig, DEFAULT_SAMPLE_COUNT,
};
pub use run::{
    initial_density, run_scenario, simulate, FinalObservables, RunError, RunOutput, RunSummary,
};
pub use selftest::{self_test, CheckResult};
