//! Spectral machinery for the twisted transition operators.
//!
//! For a finite-state model the twisted operator
//! `Q(t)_{xy} = P_{xy} phi_{xy}(t)` is an `N x N` complex matrix. Near
//! `t = 0` its dominant eigenvalue `lambda(t)` is a perturbation of the
//! Perron root 1, isolated from the rest of the spectrum by the gap of `P`;
//! everything downstream (the renewal asymptote, the covariance, the
//! Fourier split) is built from the decomposition
//!
//! ```text
//!     Q(t)^n = lambda(t)^n Pi(t) + N(t)^n,
//! ```
//!
//! with the rank-one eigenprojection `Pi(t)` and remainder powers `N(t)^n`
//! obtained as contour integrals of the resolvent `(z - Q(t))^{-1}` over
//! two circles: one around 1 and one around 0.

pub mod contour;
pub mod derivatives;
pub mod operator;

pub use contour::{
    choose_kappa, eigenprojection, expansion_identity_check, lambda_quotient, perturbation_radius,
    remainder_powers, ContourSpec, ExpansionTerms, SpectralDecomposition,
};
pub use derivatives::{
    asymptotic_covariance, autocovariance_series, gradient_lambda, walk_second_moment,
    CovarianceResult,
};
pub use operator::{fourier_operator, verify_semigroup, FourierOperatorMatrix, SemigroupCheck};

use crate::linalg::LinalgError;
use crate::markov::MarkovError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Markov(#[from] MarkovError),
    #[error("spectral gap too small: 1 - rho_2 = {gap:.3e}")]
    GapTooSmall { gap: f64 },
    #[error("eigenprojection rejected at t (residual {residual:.3e}, trace defect {trace_defect:.3e}): outside the perturbation neighborhood")]
    ProjectionFailed { residual: f64, trace_defect: f64 },
    #[error("model is not centered: stationary drift has norm {drift:.3e}")]
    NotCentered { drift: f64 },
}
