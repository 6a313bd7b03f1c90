//! Declarative study runner: configuration, synthetic data, execution,
//! tables and plots.

pub mod config;
pub mod plot;
pub mod report;
pub mod run;
pub mod simulate;

pub use config::StudyConfig;
pub use run::{run_study, run_study_inputs, StudyReport};
pub use simulate::{simulate_study_data, write_study_data, SimConfig};
