//! Experiment orchestration behind the command-line tool: configuration,
//! sweeps and reproducible CSV / JSON reports.

mod config;
mod experiments;
mod fixtures;
mod report;

pub use config::{AnchorRule, ExperimentConfig, GreenSection, MeshSection, ProblemSection, RunSection};
pub use experiments::{
    discretize, k_values, ring_summary, run_decay, run_green, run_green_suite, run_solve, AnchorConstantTrend,
    DecayReport, DecayRowReport, DecaySummary, GreenRow, GreenRun, GreenRunSummary, GreenSuiteReport, GreenSummary,
    KStar, RegionGroup, RingSummary, ScalingFit, SolveReportTable, SolveRow, SolveSummary, COERCIVITY_TARGET,
    FORM_ERROR_TARGET,
};
pub use fixtures::{Calibration, CALIBRATION_TOML};
pub use report::{ExperimentReport, LemmaRecord};
