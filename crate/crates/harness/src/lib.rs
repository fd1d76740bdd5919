//! Experiment runner for the support-size testers: seeded campaigns over
//! instance families, CSV results, aggregate tables and ground-truth
//! diagnostics.

pub mod campaign;
pub mod config;
pub mod diagnose;
pub mod summary;

pub use campaign::{
    campaign_csv, generate_instance, read_rows, run_campaign, write_rows, HarnessError, ResultRow, WitnessValidity, HEADER,
    SCHEMA_VERSION,
};
pub use config::{ExperimentConfig, GridPoint, SeedRange, TesterKind};
pub use diagnose::{
    diagnose_compositions, is_valid_composition, replay_nonadaptive, CompositionDiagnostic, DiagElement, DiagnoseError,
};
pub use summary::{scaling_table, wilson_interval, write_summary, GroupKey, SummaryRow};
