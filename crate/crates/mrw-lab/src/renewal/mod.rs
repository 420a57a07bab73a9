//! Renewal sums `sum_{n>=1} E_mu[f(X_n) g(S_n - a)]` by two independent
//! routes, plus the closed-form asymptote they are compared against.
//!
//! * [`renewal_sum_mc`] — trajectory Monte Carlo with a Gaussian-tail
//!   closure of the truncated series.
//! * [`fourier_split`] — Fourier-side quadrature in the `I + J + K`
//!   arrangement (with the `I = I1 + I2 + I3` refinement around the
//!   quadratic singularity at `t = 0`), built on the spectral
//!   decomposition of `Q(t)`.
//!
//! Monte Carlo takes ball indicators or the smooth test functions of
//! [`TestFunctionH`]; the Fourier route requires the smooth family (its
//! compactly supported transform bounds the integration domain).

mod constants;
mod fourier;
mod mc;
mod testfn;

pub use constants::{asymptote, constant_cd, constant_cd_prime, riesz_constant, SigmaFactor};
pub use fourier::{
    decay_check_j_k, fourier_split, i2_asymptotic_check, resolvent_characteristic_sum, DecayRow,
    FourierSplit, I2Row, SplitGeometry,
};
pub use mc::{
    gaussian_renewal_oracle_ball, renewal_sum_mc, renewal_sum_mc_smooth, RenewalEstimate,
};
pub use testfn::{CutoffFunction, TestFunctionH};

use crate::markov::MarkovError;
use crate::spectral::SpectralError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RenewalError {
    #[error("renewal constants require dimension >= 3, got {0}")]
    DimensionTooSmall(usize),
    #[error("Sigma is not symmetric positive definite")]
    SigmaNotPd,
    #[error("the shift vector a must be nonzero")]
    ZeroShift,
    #[error("model is not centered")]
    NotCentered,
    #[error("the Fourier route is implemented for dimension 3, got {0}")]
    UnsupportedDimension(usize),
    #[error("tail bound {tail_bound:.3e} exceeds {fraction} of the standard error {stderr:.3e}: increase n_max")]
    TailNotNegligible { tail_bound: f64, stderr: f64, fraction: f64 },
    #[error("test-function profile queried beyond its decay-tail cutoff (r = {r})")]
    OutOfTableRange { r: f64 },
    #[error("model is lattice-suspect on the integration shell: radius {radius} at t = {worst_t:?}")]
    LatticeSuspect { radius: f64, worst_t: Vec<f64> },
    #[error("quadrature budget exceeded: {detail}")]
    QuadratureBudgetExceeded { detail: String },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Markov(#[from] MarkovError),
}
