//! Optimality/feasibility measures, EOC, performance profiles and rate checks.

mod eoc;
mod measures;
mod profile;
mod rate;

pub use eoc::{eoc, eoc_from_steps, eoc_windows, eoc_windows_from_steps, EocWindow};
pub use measures::{feas_measure, natural_residual, opt_measure};
pub(crate) use measures::opt_or_residual;
pub use profile::{
    log_grid, performance_ratios, profile_curve, Metric, ProfileCurve, RatioTable, RunRecord,
    TIME_FLOOR_MS,
};
pub use rate::{energy_sequence, rate_report, RateReport, BOUND_SLACK, MIN_RECORDS};
