//! Seeded, replicated experiments: configuration, runs, aggregation, CSV output and the CLI.

pub mod aggregate;
pub mod cli;
pub mod config;
pub mod csv;
pub mod run;
pub mod scenario;

pub use aggregate::{aggregate, log_fit, log_fit_points, replicate, replicate_with_threads, version_string, AggregateTrace, LogFit};
pub use config::{read_config, write_config, ContextRecipe, EnvironmentConfig, PolicyConfig, RunConfig, RunSettings, ThetaRecipe};
pub use csv::{read_csv, write_csv, CsvTable};
pub use run::{run_one, run_with, RegretTrace};
pub use scenario::Scenario;
