//! Verification harness: energy tables, partitions, splitting, decay and
//! structure diagnostics, local estimates and the auxiliary estimates.
//!
//! Existence and non-existence are statements about infima over the whole
//! line. The experiments here report numerical signatures of them on a
//! truncated grid, not proofs.

pub mod appendix;
pub mod decay;
pub mod ladder;
pub mod layout;
pub mod local;
pub mod partitions;
pub mod report;
pub mod selftest;
pub mod splitting;
pub mod structure;
pub mod table;
pub mod tolerances;

pub use appendix::{appendix_suite, aux_inf, aux_scan, decay_to_l1_check, extension_bound_check, AppendixConfig, TailSamples};
pub use partitions::{enumerate_partitions, Partition};
pub use report::{Cell, ExperimentReport, Status, Verdict};
pub use layout::{escape_layout, lower_bound, solve_degree, SolveSpec};
pub use table::{energy_table, EnergyTable, TableConfig};
pub use splitting::{splitting_diagnostic, Signature, SplitConfig, SplitOutcome};
pub use structure::{structure_check, structure_experiment, StructureConfig};
pub use decay::{decay_experiment, decay_fit, DecayConfig};
pub use ladder::{l1_parts_scan, width_diagnostic, L1ScanConfig, WidthConfig};
pub use local::{local_estimate_check, local_experiment, LocalConfig};
pub use selftest::{selftest, SelftestOptions};
