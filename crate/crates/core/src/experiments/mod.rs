//! Inequality experiments: each turns a theorem's conclusion into measured
//! ratios, fitted scaling exponents and stability verdicts over a structured
//! family of test functions.

pub mod lp_approx;
pub mod pointwise;
pub mod poincare;
pub mod report;
pub mod slope;
pub mod sobolev;
pub mod threshold;

pub use lp_approx::{lp_approximation_check, LpApproxReport};
pub use pointwise::{pointwise_interpolation_check, PointwiseReport};
pub use poincare::{poincare_curve, poincare_experiment, PoincareCurve};
pub use report::{fmt_f64, ExperimentReport, MemberRow};
pub use slope::{fit_scaling_slope, scaling_fit, ScalingFit};
pub use sobolev::{
    besov_level_time, glr_experiment, strong_sobolev_experiment, weak_sobolev_experiment,
};
pub use threshold::{
    taboo_check, threshold, threshold_diagnostics, TabooVerdict, ThresholdDiagnostics,
};
