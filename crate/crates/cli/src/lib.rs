//! Witness pipeline around `hw-core`: curve files, the `a_p` cache,
//! configuration, the per-curve run and its canonical JSON report.

pub mod cache;
pub mod config;
pub mod curves;
pub mod pipeline;
pub mod report;

pub use cache::ApCache;
pub use config::Config;
pub use curves::{parse_curves, read_curve_file};
pub use pipeline::{run_witness, WitnessReport};
pub use report::emit_report;
