//! Numerical laboratory for renewal sums of centered Markov additive
//! processes (Markov random walks) in dimension `d >= 3`.
//!
//! The crate computes the renewal sum
//!
//! ```text
//!   U(a) = sum_{n >= 1} E_mu[ f(X_n) g(S_n - a) ]
//! ```
//!
//! for a finite-state Markov chain `X_n` with an additive `R^d`-valued
//! component `S_n`, by two independent routes:
//!
//! * trajectory Monte Carlo ([`renewal::renewal_sum_mc`]), and
//! * Fourier-side quadrature built on the spectral decomposition of the
//!   twisted transition operator `Q(t)` ([`renewal::fourier_split`]),
//!
//! and checks both against the closed-form large-`a` asymptote
//! `C_d L(0) Leb(g) / <Sigma^{-1} a, a>^{(d-2)/2}`.
//!
//! Module map:
//!
//! * [`markov`] — model objects (transition matrix, increment laws),
//!   stationary distributions, trajectory simulation, lattice diagnostics,
//!   a model gallery, and an autoregressive continuous-state example.
//! * [`spectral`] — Fourier operator matrices `Q(t)`, the perturbed
//!   eigenvalue `lambda(t)` and rank-one eigenprojection `Pi(t)` via contour
//!   resolvent integrals, remainder powers `N(t)^n`, and the derived drift
//!   and asymptotic covariance.
//! * [`renewal`] — the renewal-sum estimators, the `I/J/K` and `I1/I2/I3`
//!   Fourier split, the asymptote constants, and the smooth test functions.
//! * [`appendix`] — standalone checks of the Riesz-kernel Fourier identity
//!   and the approximate-identity limit used by the Fourier route.
//! * [`cli`] — the experiment runner behind the `mrw-lab` binary.

pub mod appendix;
pub mod cli;
pub mod config;
pub mod linalg;
pub mod markov;
pub mod quad;
pub mod renewal;
pub mod rng;
pub mod spectral;

pub use config::{QuadBudget, ToleranceProfile};
pub use linalg::{CMat, CVec, RMat, RVec, C64};
