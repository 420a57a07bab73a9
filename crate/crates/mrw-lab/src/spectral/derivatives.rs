//! Drift and asymptotic covariance from derivatives of `lambda` at 0,
//! cross-checked against exact moment recursions of the walk.
//!
//! `grad lambda(0)/i` is the stationary drift; `-Hess lambda(0)` is the
//! asymptotic covariance `Sigma = lim (1/n) E_pi[S_n S_n^T]` of a centered
//! walk. Derivatives are taken by Richardson-extrapolated central
//! differences of the contour eigenvalue; the moment side is exact linear
//! algebra.

use super::contour::{eigenprojection, ContourSpec};
use super::SpectralError;
use crate::config::ToleranceProfile;
use crate::linalg::{C64, RMat, RVec};
use crate::markov::MarkovAdditiveProcess;

fn lambda_at(
    map: &MarkovAdditiveProcess,
    t: &[f64],
    kappa: f64,
    nodes: usize,
    tol: &ToleranceProfile,
) -> Result<C64, SpectralError> {
    Ok(eigenprojection(map, t, kappa, &ContourSpec::gamma1(kappa, nodes), tol)?.lambda)
}

/// Central-difference gradient at step `h`, one component.
fn grad_component(
    map: &MarkovAdditiveProcess,
    k: usize,
    h: f64,
    kappa: f64,
    nodes: usize,
    tol: &ToleranceProfile,
) -> Result<C64, SpectralError> {
    let d = map.dim();
    let mut tp = vec![0.0; d];
    let mut tm = vec![0.0; d];
    tp[k] = h;
    tm[k] = -h;
    let lp = lambda_at(map, &tp, kappa, nodes, tol)?;
    let lm = lambda_at(map, &tm, kappa, nodes, tol)?;
    Ok((lp - lm) / C64::new(2.0 * h, 0.0))
}

/// `grad lambda(0)/i` by Richardson-extrapolated central differences.
///
/// Equals the stationary drift: cross-check against
/// [`MarkovAdditiveProcess::mean_increment`].
pub fn gradient_lambda(
    map: &MarkovAdditiveProcess,
    fd_step: f64,
    kappa: f64,
    nodes: usize,
    tol: &ToleranceProfile,
) -> Result<RVec, SpectralError> {
    let d = map.dim();
    let mut grad = RVec::zeros(d);
    let i_unit = C64::new(0.0, 1.0);
    for k in 0..d {
        let g_h = grad_component(map, k, fd_step, kappa, nodes, tol)?;
        let g_h2 = grad_component(map, k, fd_step / 2.0, kappa, nodes, tol)?;
        let g = (g_h2 * 4.0 - g_h) / 3.0;
        grad[k] = (g / i_unit).re;
    }
    Ok(grad)
}

/// `Sigma = -Hess lambda(0)` plus the gradient, by `d(d+1)/2` central
/// stencils with Richardson extrapolation.
#[derive(Debug, Clone)]
pub struct CovarianceResult {
    pub sigma: RMat,
    pub grad: RVec,
    pub fd_step: f64,
    /// Largest imaginary residual seen in the Hessian stencils; small for a
    /// centered model.
    pub imag_residual: f64,
}

pub fn asymptotic_covariance(
    map: &MarkovAdditiveProcess,
    fd_step: f64,
    kappa: f64,
    nodes: usize,
    tol: &ToleranceProfile,
) -> Result<CovarianceResult, SpectralError> {
    let drift = map.mean_increment()?;
    if drift.amax() > 1e-10 {
        return Err(SpectralError::NotCentered { drift: drift.norm() });
    }
    let d = map.dim();
    let lambda0 = lambda_at(map, &vec![0.0; d], kappa, nodes, tol)?;
    let mut imag_residual: f64 = 0.0;

    let hess_at = |h: f64, imag: &mut f64| -> Result<RMat, SpectralError> {
        let mut hess = RMat::zeros(d, d);
        for i in 0..d {
            let mut tp = vec![0.0; d];
            let mut tm = vec![0.0; d];
            tp[i] = h;
            tm[i] = -h;
            let lp = lambda_at(map, &tp, kappa, nodes, tol)?;
            let lm = lambda_at(map, &tm, kappa, nodes, tol)?;
            let second = (lp - lambda0 * 2.0 + lm) / C64::new(h * h, 0.0);
            hess[(i, i)] = second.re;
            *imag = imag.max(second.im.abs());
        }
        for i in 0..d {
            for j in (i + 1)..d {
                let mut tpp = vec![0.0; d];
                let mut tpm = vec![0.0; d];
                let mut tmp = vec![0.0; d];
                let mut tmm = vec![0.0; d];
                tpp[i] = h;
                tpp[j] = h;
                tpm[i] = h;
                tpm[j] = -h;
                tmp[i] = -h;
                tmp[j] = h;
                tmm[i] = -h;
                tmm[j] = -h;
                let lpp = lambda_at(map, &tpp, kappa, nodes, tol)?;
                let lpm = lambda_at(map, &tpm, kappa, nodes, tol)?;
                let lmp = lambda_at(map, &tmp, kappa, nodes, tol)?;
                let lmm = lambda_at(map, &tmm, kappa, nodes, tol)?;
                let second = (lpp - lpm - lmp + lmm) / C64::new(4.0 * h * h, 0.0);
                hess[(i, j)] = second.re;
                hess[(j, i)] = second.re;
                *imag = imag.max(second.im.abs());
            }
        }
        Ok(hess)
    };

    let h1 = hess_at(fd_step, &mut imag_residual)?;
    let h2 = hess_at(fd_step / 2.0, &mut imag_residual)?;
    let hess = (h2 * 4.0 - h1) / 3.0;
    let sigma = -(hess.clone() + hess.transpose()) * 0.5;
    let grad = gradient_lambda(map, fd_step, kappa, nodes, tol)?;
    Ok(CovarianceResult { sigma, grad, fd_step, imag_residual })
}

/// Exact `E_pi[S_n S_n^T]` by the stationary autocovariance recursion:
/// `n V + sum_{j=1}^{n-1} (n - j)(Gamma_j + Gamma_j^T)` with
/// `V = E_pi[xi xi^T]` and `Gamma_j = E_pi[xi_1 xi_{1+j}^T]`.
pub fn walk_second_moment(map: &MarkovAdditiveProcess, n: usize) -> Result<RMat, SpectralError> {
    let d = map.dim();
    let v = map.stationary_step_second_moment()?;
    let (g, mut h) = lag_structures(map)?;
    let p = map.transition.matrix().clone();
    let mut acc = v * n as f64;
    for j in 1..n {
        // Gamma_j = g^T h_j with h_j = P^{j-1} u.
        let gamma = g.transpose() * &h;
        let w = (n - j) as f64;
        acc += (&gamma + gamma.transpose()) * w;
        if j + 1 < n {
            h = &p * h;
        }
        let _ = d;
    }
    Ok(acc)
}

/// The Markov CLT variance series `V + sum_{j>=1} (Gamma_j + Gamma_j^T)`
/// truncated at `k_max`.
pub fn autocovariance_series(
    map: &MarkovAdditiveProcess,
    k_max: usize,
) -> Result<RMat, SpectralError> {
    let v = map.stationary_step_second_moment()?;
    let (g, mut h) = lag_structures(map)?;
    let p = map.transition.matrix().clone();
    let mut acc = v;
    for _j in 1..=k_max {
        let gamma = g.transpose() * &h;
        acc += &gamma + gamma.transpose();
        h = &p * h;
    }
    Ok(acc)
}

/// Helper pair for lag covariances: `g[x1, :] = sum_x0 pi_x0 P_{x0 x1} m_{x0 x1}`
/// (flow-weighted incoming step mean) and `h = u` (per-state outgoing step
/// mean), both `N x d`. Then `Gamma_j = g^T P^{j-1} u`.
fn lag_structures(map: &MarkovAdditiveProcess) -> Result<(RMat, RMat), SpectralError> {
    let pi = map.stationary()?;
    let n = map.n_states();
    let d = map.dim();
    let mut g = RMat::zeros(n, d);
    for x0 in 0..n {
        for x1 in 0..n {
            let w = pi.as_vec()[x0] * map.transition.get(x0, x1);
            if w > 0.0 {
                let m = map.increment(x0, x1).mean();
                for k in 0..d {
                    g[(x1, k)] += w * m[k];
                }
            }
        }
    }
    let u = map.state_step_means();
    Ok((g, u))
}
