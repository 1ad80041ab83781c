//! Configuration, figure presets, sweeps and serialization.

pub mod compare;
pub mod config;
pub mod emit;
pub mod presets;
pub mod sweep;

pub use compare::{compare, CompareReport};
pub use config::{load_config, load_document, preset_spec, spec_from_document};
pub use emit::{emit, load_table, Format, Table};
pub use sweep::{run_sweep, Engine, SweepResult, SweepSpec};
