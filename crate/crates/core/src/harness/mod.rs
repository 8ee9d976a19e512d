//! Configuration loading, parameter sweeps, output files and the
//! self-test used by the `mmwpt` binary.

pub mod config;
pub mod output;
pub mod selftest;
pub mod sweep;

pub use config::{load_config, parse_config};
pub use output::{parse_csv, parse_json, write_csv, write_json};
pub use selftest::{selftest, SelftestReport};
pub use sweep::{run_fig1, run_fig2, SweepOptions, SweepResult, SweepRow};
