//! Scans over `h`, scaling-law fits, limit diagnostics and named scenarios.

mod fit;
mod limits;
mod scaling;
mod scan;
mod scenarios;
mod solve;
mod two_wells;

pub use fit::{fit_scaling, fixed_fit, CandidateFit, FitResult, MIN_ROWS};
pub use limits::{dirac_target, liouville_target, ratio_limit, ratio_limit_points, RatioPoint, RatioReport, Target, TargetKind};
pub use scaling::{candidate_laws, dominant_law, predict_scaling, LawBranch, LawOrigin, ScalingLaw};
pub use scan::{geometric_h, measure_row, run_scan, scan_row, ObservableStats, ScanConfig, ScanResult, ScanRow, ScanTable};
pub use solve::{solve_window, SolvedWindow, SolverOptions};
pub use two_wells::{two_wells_experiment, PairSplit, TwoWellsReport, TwoWellsRow};
pub use scenarios::{run_scenario, Check, ScenarioReport, SCENARIOS};
