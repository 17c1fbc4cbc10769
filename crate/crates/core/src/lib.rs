//! stratlab: a numerical workbench for harmonic analysis on stratified Lie
//! groups.
//!
//! The crate discretises a stratified group (Heisenberg `H¹` or `R^n`) on an
//! anisotropic box grid, assembles the sub-Laplacian from its degree-1
//! invariant fields, and exposes the full spectral calculus on top of it:
//! heat semigroup, fractional powers, smooth cutoff multipliers and
//! Littlewood–Paley blocks. Muckenhoupt weights, maximal functions, weighted
//! Lebesgue/Sobolev norms and thermic Besov norms complete the toolbox, and
//! the `experiments` module turns it on itself: scaling experiments for the
//! semigroup-difference estimate and empirical-constant experiments for the
//! improved Sobolev inequalities.
//!
//! Start with the runnable examples (`cargo run --release --example ...`) or
//! the thin CLI (`stratlab run <config>`); the library surface mirrors them.

pub mod calculus;
pub mod cutoffs;
pub mod error;
pub mod experiments;
pub mod family;
pub mod grid;
pub mod group;
pub mod linalg;
pub mod norms;
pub mod sparse;
pub mod spectral;
pub mod weights;

pub use calculus::{
    apply_vector_field, boundary_mass, gradient_length, group_convolve, integrate,
    right_vector_field, sublaplacian, LinearOperator,
};
pub use error::{Error, Result};
pub use family::{generate_family, FamilyKind, FamilyParams, TestFunctionFamily};
pub use grid::{Grid, GridFunction};
pub use group::{Ball, GroupSpec, LawTerm};
pub use norms::{
    besov_general_norm, besov_negative_norm, lebesgue_norm, lebesgue_norm_distributional,
    log_spaced, sobolev_norm, weak_norm, BesovNorm, HeatSupTrace,
};
pub use spectral::{heat_stepping, SpectralDecomposition, DENSE_EIG_CAP};
pub use weights::{
    ap_expression_by_scale, ap_stability, hl_maximal, muckenhoupt_constant, phi_maximal,
    power_weight, BallFamily, StabilityReport, Weight,
};
