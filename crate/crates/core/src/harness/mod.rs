//! Configuration, dispatch, the on-disk run registry and report collation.
//!
//! A [`RunConfig`] names one experiment kind and its inputs. [`run`]
//! executes it, judges the payload against the threshold table in
//! `data/thresholds.json` (overridable per run) and appends a [`RunRecord`]
//! to a [`Registry`]. [`report`] reads the registry back into CSV tables and
//! a JSON summary.

mod config;
mod payload;
mod record;
mod registry;
mod report;
mod run;
mod thresholds;

pub use config::{apply_override, ConfigError, ExperimentKind, RunConfig, Sweep, Tolerances};
pub use payload::{
    verdicts, AnsatzPayload, AnsatzRow, Comparison, ContractionRow, KernelRow, LimitPayload,
    MassRow, ParamsPayload, ParamsRow, Payload, ResidualPayload, ResidualScan, SectorSweep,
    SolvePayload, SolveRow, SpectrumPayload, StereoRow, Verdict,
};
pub use record::{input_hash, RunRecord, SCHEMA_VERSION};
pub use registry::{Registry, REGISTRY_ENV};
pub use report::{collate, record_csv, report, Bundle, Filter, VerdictFilter};
pub use run::{execute, run};
pub use thresholds::Thresholds;
