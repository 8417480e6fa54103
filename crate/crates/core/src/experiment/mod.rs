//! The scaling protocol: fitting criteria, restarts, minimal-size search,
//! problem-size sweeps and the results store.

pub mod criterion;
pub mod fit;
pub mod profile;
pub mod record;
pub mod search;
pub mod sweep;

pub use criterion::{CriterionCheck, CriterionKind, FitCriterion};
pub use fit::{fits, test_error, test_metric_for, FitContext, FitOutcome, RestartOutcome};
pub use profile::{Profile, ThresholdSet};
pub use record::{read_results, read_results_file, RecordKey, RecordStatus, ResultRecord, ResultsStore, RESULTS_COLUMNS, RESULTS_SCHEMA};
pub use search::{binary_search_min_size, find_min_size, SearchOutcome};
pub use sweep::{load_or_generate, run_scaling_sweep, run_threshold_sweep, Progress, ProgressFn, SweepConfig, Trial};
