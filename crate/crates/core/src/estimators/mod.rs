//! Monte-Carlo estimators of the limit ratios, with confidence intervals and
//! theoretical targets, plus the exact lattice oracle.

pub mod curve;
pub mod downcross;
pub mod ladder;
pub mod lattice_oracle;
pub mod mc;
pub mod positive_drift;
pub mod tail_ratio;
pub mod two_sum;
pub mod windows;

pub use curve::RatioCurve;
pub use downcross::{cycle_downcrossing_check, estimate_downcrossings, CycleDowncrossingReport, DowncrossingReport};
pub use ladder::{estimate_ladder_decomposition, ks_two_sample, LadderConfig, LadderStats};
pub use lattice_oracle::{exact_lattice_oracle, LatticeOracleResult};
pub use mc::{McOptions, Merge, Neumaier};
pub use positive_drift::{check_pcond, positive_drift_ratio, PositiveDriftReport};
pub use tail_ratio::{estimate_split_ratios, estimate_tail_ratio, SplitReport, Statistic, TailRatioReport};
pub use two_sum::{subexp_two_sum_ratio, TwoSumReport};
pub use windows::{estimate_supremum_windows, WindowsReport};
