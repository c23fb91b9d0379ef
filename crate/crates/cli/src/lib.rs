//! Scenario files, presets, artifact writing and the experiment drivers
//! behind the `dbf` command.

pub mod config;
pub mod experiment;
pub mod presets;
pub mod run;
pub mod svg;

pub use config::ScenarioConfig;
pub use run::{run_scenario, RunOptions, RunResult};
