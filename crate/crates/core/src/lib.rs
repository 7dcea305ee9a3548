//! Synthetic multivariate-regression releases under plug-in, posterior
//! predictive (PPS) and fixed-posterior predictive sampling (FPPS), together
//! with exact pivotal inference on the released datasets.
//!
//! Observations are columns throughout: the regressor matrix `x` is `p × n`,
//! responses `y` and every synthetic dataset `w_j` are `m × n`, and
//! coefficient matrices are `p × m` so that `E[y] = bᵀx`.
//!
//! The crate is `no_std` (with `alloc`). The `std` feature is on by default;
//! `parallel` spreads Monte Carlo loops over a rayon pool without changing
//! any result.
#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
mod math;

pub mod combine;
pub mod inference;
pub mod matdist;
pub mod metrics;
pub mod model;
pub mod par;
pub mod pivotal;
pub mod rng;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use nalgebra::DMatrix;

pub use combine::{combine, combine_proc1, combine_proc2, unbiased_sigma, CombinedEstimates, Procedure};
pub use inference::{
    cutoff, power, power_with_cutoff, test, CutoffTable, Decision, PowerEstimate, PowerStudy, TestReport,
};
pub use matdist::{
    falling_factorial_ratio, sample_inverse_wishart, sample_matrix_normal, sample_wishart, spd_sqrt, MatrixNormal,
    SpdMatrix,
};
pub use metrics::{expected_radius, privacy, privacy_sweep, radius, FiveNumberSummary, PrivacyReport, RadiusReport};
pub use model::{fit, fit_with_gram, simulate_original, FitResult, Gram, ModelData};
pub use pivotal::{
    classical_criteria, pivot_value, sample_pivot_null, ClassicalCriteria, EmpiricalDistribution, NullParams, PivotSpec,
};
pub use rng::{RngStream, StreamRng};
pub use synth::{
    draw_posterior, generate, sample_dataset, simulate_release, Method, PlugInVariance, PosteriorDraw, SynthesisConfig,
    SyntheticRelease,
};
