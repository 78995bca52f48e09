//! Batch front end: configuration files, presets, CSV tables and run manifests.

pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod run;
pub mod table;

pub use config::{Experiment, RunConfig};
pub use error::{CliError, CliResult};
pub use presets::{list_presets, run_preset, PresetOptions};
pub use run::{run_experiment, with_workers, Comparison, RunManifest};
pub use table::{Cell, Table};
