//! Closed-form constants of the renewal asymptote.
//!
//! The large-`a` renewal sum behaves like
//! `C_d L(0) Leb(g) / <Sigma^{-1} a, a>^{(d-2)/2}` with
//! `C_d = (1/2) pi^{-d/2} (det Sigma)^{-1/2} Gamma((d-2)/2)`.

use super::RenewalError;
use crate::linalg::{RMat, RVec};
use statrs::function::gamma::ln_gamma;

/// Cholesky wrapper fixing the `SigmaNotPd` error contract.
pub struct SigmaFactor {
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    det: f64,
}

impl SigmaFactor {
    pub fn new(sigma: &RMat) -> Result<Self, RenewalError> {
        let sym = (sigma.clone() + sigma.transpose()) * 0.5;
        let chol = sym.cholesky().ok_or(RenewalError::SigmaNotPd)?;
        let det = chol.l().diagonal().iter().map(|d| d * d).product();
        Ok(SigmaFactor { chol, det })
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    /// `<Sigma^{-1} a, a>`.
    pub fn quadratic_inv(&self, a: &RVec) -> f64 {
        self.chol.solve(a).dot(a)
    }
}

/// `C_d = 2^{-1} pi^{-d/2} (det Sigma)^{-1/2} Gamma((d-2)/2)`.
pub fn constant_cd(d: usize, sigma: &RMat) -> Result<f64, RenewalError> {
    if d < 3 {
        return Err(RenewalError::DimensionTooSmall(d));
    }
    let factor = SigmaFactor::new(sigma)?;
    let df = d as f64;
    let log = -std::f64::consts::LN_2 - 0.5 * df * std::f64::consts::PI.ln()
        + ln_gamma((df - 2.0) / 2.0)
        - 0.5 * factor.det().ln();
    Ok(log.exp())
}

/// `C'_d = (2 pi)^{d/2} 2^{d/2 - 1} Gamma((d-2)/2) (det Sigma)^{-1/2}`,
/// the constant of the quadratic-singularity integral `I_2`. Satisfies
/// `C'_d = (2 pi)^d C_d`.
pub fn constant_cd_prime(d: usize, sigma: &RMat) -> Result<f64, RenewalError> {
    if d < 3 {
        return Err(RenewalError::DimensionTooSmall(d));
    }
    let factor = SigmaFactor::new(sigma)?;
    let df = d as f64;
    let log = 0.5 * df * (2.0 * std::f64::consts::PI).ln()
        + (0.5 * df - 1.0) * std::f64::consts::LN_2
        + ln_gamma((df - 2.0) / 2.0)
        - 0.5 * factor.det().ln();
    Ok(log.exp())
}

/// Fourier constant of the Riesz kernel pair
/// `||u||^{-2}  <->  c ||v||^{2-d}`:
/// `c = (2 pi)^{d/2} 2^{d/2 - 2} Gamma((d-2)/2)`.
pub fn riesz_constant(d: usize) -> Result<f64, RenewalError> {
    if d < 3 {
        return Err(RenewalError::DimensionTooSmall(d));
    }
    let df = d as f64;
    let log = 0.5 * df * (2.0 * std::f64::consts::PI).ln()
        + (0.5 * df - 2.0) * std::f64::consts::LN_2
        + ln_gamma((df - 2.0) / 2.0);
    Ok(log.exp())
}

/// The closed-form asymptote `C_d L0 Leb(g) / <Sigma^{-1} a, a>^{(d-2)/2}`.
pub fn asymptote(
    d: usize,
    sigma: &RMat,
    l0: f64,
    leb_g: f64,
    a: &RVec,
) -> Result<f64, RenewalError> {
    let cd = constant_cd(d, sigma)?;
    let factor = SigmaFactor::new(sigma)?;
    let q = factor.quadratic_inv(a);
    if q <= 0.0 {
        return Err(RenewalError::ZeroShift);
    }
    Ok(cd * l0 * leb_g / q.powf((d as f64 - 2.0) / 2.0))
}
