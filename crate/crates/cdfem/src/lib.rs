//! Experiment driver for the `cdfem-core` solvers: convergence tables,
//! figure data, inf-sup probes and their file formats.

pub mod config;
pub mod error;
pub mod experiments;
pub mod svg;
pub mod table;

pub use cdfem_core as core;
pub use config::ExperimentConfig;
pub use error::{Error, Result};
pub use experiments::{
    emit_figure_data, run_convergence, run_infsup_probe, run_shifted_spls, write_tables, FigureConfig,
    FigureData, InfSupRow,
};
pub use table::TableArtifact;
