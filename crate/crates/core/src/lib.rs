//! Reconstruction of regularized nonclassicality quasiprobability (NQP) matrices
//! from two-mode balanced-homodyne data.
//!
//! Quadratures follow the convention in which the vacuum distribution is
//! `p(x) = exp(-x^2) / sqrt(pi)`, so `x_phi = (a e^{-i phi} + a^dag e^{i phi}) / sqrt(2)`.
//!
//! The crate is `no_std` with `alloc`. The `parallel` feature enables rayon
//! parallelism over grid rows (and pulls in `std`).

#![no_std]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod analysis;
pub mod ensemble;
pub mod error;
pub mod estimator;
pub mod filter;
pub mod grid;
pub mod matrix;
pub mod numeric;
pub mod oracle;
pub mod pattern_cv;
pub mod pattern_dv;
pub mod simulator;
pub mod state;

mod field;
mod par;

pub use num_complex::Complex64;

/// Phase-space coordinate α, β or γ.
pub type ComplexAmplitude = Complex64;

pub use oracle::{fig_s3_comparison, fig_s3_panel, nqp_field, nqp_matrix_analytic, wigner, FigS3Row};
pub use analysis::{
    analyze_point, assemble_cv_field, assemble_field, conditional_distribution, eigenvalue_error,
    integrate_element, min_eigenpair, significance_report, Maximum,
    PointAnalysis, significance, SignificanceReport, DETECTION_THRESHOLD,
};
pub use ensemble::{build_ensemble, Binning, PhaseGroup, PhaseGroupedEnsemble, QuadratureSample};
pub use error::{NqpError, Result};
pub use estimator::{
    compute_weights, sample_cv_quasiprobability, sample_dv_density, sample_nqp_element, Estimate, PhaseCorrection,
    WeightAssignment, WeightScheme,
};
pub use filter::FilterKernel;
pub use grid::PhaseSpaceGrid;
pub use matrix::{CMatrix, NqpMatrixField, ProjectionVector, RMatrix};
pub use pattern_cv::CvPatternEvaluator;
pub use pattern_dv::DvPatternEvaluator;
pub use state::StateModel;
