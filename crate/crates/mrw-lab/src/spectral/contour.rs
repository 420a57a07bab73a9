//! Contour-integral spectral decomposition.
//!
//! With `kappa = (1 + rho_2)/2` the two circles
//!
//! * `Gamma_1`: center 1, radius `(1 - kappa)/2`,
//! * `Gamma_0`: center 0, radius `kappa`,
//!
//! separate the perturbed dominant eigenvalue `lambda(t)` from the rest of
//! the spectrum for `t` in a neighborhood of 0. Trapezoidal quadrature on a
//! circle is spectrally accurate for the analytic resolvent, so 64-128
//! nodes reach near machine precision.

use super::{operator::fourier_operator, operator::mat_pow, SpectralError};
use crate::config::ToleranceProfile;
use crate::linalg::{
    max_abs, resolvent_solve, spectral_radius_robust, CMat, CVec, C64, RVec,
};
use crate::markov::MarkovAdditiveProcess;

/// A circle used as an integration contour.
#[derive(Debug, Clone)]
pub struct ContourSpec {
    pub center: C64,
    pub radius: f64,
    pub nodes: usize,
}

impl ContourSpec {
    pub fn new(center: C64, radius: f64, nodes: usize) -> Self {
        assert!(nodes >= 16, "contour needs at least 16 nodes");
        assert!(radius > 0.0);
        ContourSpec { center, radius, nodes }
    }

    /// Circle around `z = 1` with radius `(1-kappa)/2`.
    pub fn gamma1(kappa: f64, nodes: usize) -> Self {
        Self::new(C64::new(1.0, 0.0), (1.0 - kappa) / 2.0, nodes)
    }

    /// Circle around `z = 0` with radius `kappa`.
    pub fn gamma0(kappa: f64, nodes: usize) -> Self {
        Self::new(C64::new(0.0, 0.0), kappa, nodes)
    }

    /// Nodes `z_j` and weights `w_j` with `(1/2 pi i) \oint F dz ~ sum_j w_j F(z_j)`.
    pub fn points(&self) -> impl Iterator<Item = (C64, C64)> + '_ {
        let m = self.nodes;
        (0..m).map(move |j| {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
            let e = C64::from_polar(1.0, theta);
            (self.center + e * self.radius, e * (self.radius / m as f64))
        })
    }
}

/// Subdominant eigenvalue modulus of `P` by exact rank-one deflation of the
/// Perron pair (right vector `1`, left vector `pi`).
pub fn subdominant_modulus(map: &MarkovAdditiveProcess) -> Result<f64, SpectralError> {
    let pi = map.stationary()?;
    let n = map.n_states();
    let deflated = CMat::from_fn(n, n, |i, j| {
        C64::new(map.transition.get(i, j) - pi.as_vec()[j], 0.0)
    });
    Ok(spectral_radius_robust(&deflated, 1e-12, 100_000))
}

/// `kappa = (1 + rho_2)/2`: splits the gap between the subdominant modulus
/// and 1 symmetrically.
pub fn choose_kappa(map: &MarkovAdditiveProcess, tol: &ToleranceProfile) -> Result<f64, SpectralError> {
    let rho2 = subdominant_modulus(map)?;
    let gap = 1.0 - rho2;
    if gap < tol.gap_min {
        return Err(SpectralError::GapTooSmall { gap });
    }
    Ok((1.0 + rho2) / 2.0)
}

/// `lambda(t)`, the rank-one projector `Pi(t)`, and the residual
/// `||Pi^2 - Pi||`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub t: Vec<f64>,
    pub lambda: C64,
    pub pi: CMat,
    pub kappa: f64,
    pub residual: f64,
}

/// `Pi(t)` by trapezoidal quadrature of the resolvent over `Gamma_1`;
/// `lambda(t)` extracted as `tr(Q Pi)/tr(Pi)`.
///
/// Fails with `ProjectionFailed` when the projector residual or the
/// rank-one trace check rejects `t` (the point is outside the perturbation
/// neighborhood for this contour geometry).
pub fn eigenprojection(
    map: &MarkovAdditiveProcess,
    t: &[f64],
    kappa: f64,
    contour: &ContourSpec,
    tol: &ToleranceProfile,
) -> Result<SpectralDecomposition, SpectralError> {
    let q = fourier_operator(map, t).matrix;
    let n = q.nrows();
    let mut pi = CMat::zeros(n, n);
    for (z, w) in contour.points() {
        // One factorization per node, reused for the N right-hand sides.
        let lu = crate::linalg::ShiftedLu::new(&q, z);
        let cond = lu.cond_inf();
        if !cond.is_finite() || cond > tol.resolvent_cond_max {
            return Err(SpectralError::Linalg(
                crate::linalg::LinalgError::SingularResolvent { cond },
            ));
        }
        for col in 0..n {
            let mut e = CVec::zeros(n);
            e[col] = C64::new(1.0, 0.0);
            let x = lu.solve(&e).ok_or(SpectralError::Linalg(
                crate::linalg::LinalgError::SingularResolvent { cond },
            ))?;
            for row in 0..n {
                pi[(row, col)] += w * x[row];
            }
        }
    }
    let trace = pi.trace();
    let trace_defect = (trace - C64::new(1.0, 0.0)).norm();
    let residual = max_abs(&(&pi * &pi - &pi));
    if residual > tol.projection_failed || trace_defect > tol.projection_failed {
        return Err(SpectralError::ProjectionFailed { residual, trace_defect });
    }
    let lambda = (&q * &pi).trace() / trace;
    // The eigenvalue must lie strictly inside the contour.
    if (lambda - contour.center).norm() >= contour.radius {
        return Err(SpectralError::ProjectionFailed { residual, trace_defect });
    }
    Ok(SpectralDecomposition { t: t.to_vec(), lambda, pi, kappa, residual })
}

/// `L` and the remainder sequence `R_n = mu(N(t)^n f)`, with the resummed
/// series from the `z/(1-z)` kernel on `Gamma_0`.
#[derive(Debug, Clone)]
pub struct ExpansionTerms {
    pub l_val: C64,
    pub r_n: Vec<C64>,
    pub r_resummed: C64,
    /// Fitted geometric ratio of `|R_{n+1}/R_n|` over the tail of the
    /// sequence (0 when the sequence is numerically zero).
    pub fitted_ratio: f64,
}

/// Remainder powers `R_n = mu(N(t)^n f)` for `n = 1..=n_max` via the
/// `z^n` kernels on `Gamma_0`, plus `L = mu(Pi(t) f)` via `Gamma_1`.
pub fn remainder_powers(
    map: &MarkovAdditiveProcess,
    t: &[f64],
    n_max: usize,
    kappa: f64,
    nodes: usize,
    mu: &RVec,
    f: &RVec,
    tol: &ToleranceProfile,
) -> Result<ExpansionTerms, SpectralError> {
    let q = fourier_operator(map, t).matrix;
    let n = q.nrows();
    let fc = CVec::from_fn(n, |i, _| C64::new(f[i], 0.0));
    let g1 = ContourSpec::gamma1(kappa, nodes);
    let g0 = ContourSpec::gamma0(kappa, nodes);

    let mut l_val = C64::new(0.0, 0.0);
    for (z, w) in g1.points() {
        let x = resolvent_solve(&q, z, &fc, tol.resolvent_residual, tol.resolvent_cond_max)?;
        let mut dot = C64::new(0.0, 0.0);
        for i in 0..n {
            dot += C64::new(mu[i], 0.0) * x[i];
        }
        l_val += w * dot;
    }

    let mut r_n = vec![C64::new(0.0, 0.0); n_max];
    let mut r_resummed = C64::new(0.0, 0.0);
    for (z, w) in g0.points() {
        let x = resolvent_solve(&q, z, &fc, tol.resolvent_residual, tol.resolvent_cond_max)?;
        let mut dot = C64::new(0.0, 0.0);
        for i in 0..n {
            dot += C64::new(mu[i], 0.0) * x[i];
        }
        let mut zn = C64::new(1.0, 0.0);
        for rn in r_n.iter_mut() {
            zn *= z;
            *rn += w * zn * dot;
        }
        r_resummed += w * (z / (C64::new(1.0, 0.0) - z)) * dot;
    }

    // Geometric ratio fit on the decaying tail of |R_n|.
    let mags: Vec<f64> = r_n.iter().map(|z| z.norm()).collect();
    let floor = 1e-14 * mags.iter().cloned().fold(1e-300, f64::max).max(1e-300);
    let mut ratios = Vec::new();
    for k in 4..mags.len().saturating_sub(1) {
        if mags[k] > floor && mags[k + 1] > 0.0 {
            ratios.push(mags[k + 1] / mags[k]);
        }
    }
    let fitted_ratio = if ratios.is_empty() {
        0.0
    } else {
        ratios.iter().sum::<f64>() / ratios.len() as f64
    };

    Ok(ExpansionTerms { l_val, r_n, r_resummed, fitted_ratio })
}

/// The quotient identity for the perturbed eigenvalue:
/// `lambda(t) = (pi(Q(t) 1) - R_{1,pi,1}(t)) / L_{pi,1}(t)`.
///
/// An independent route to `lambda` used to cross-validate the contour
/// extraction.
pub fn lambda_quotient(
    map: &MarkovAdditiveProcess,
    t: &[f64],
    kappa: f64,
    nodes: usize,
    tol: &ToleranceProfile,
) -> Result<C64, SpectralError> {
    let pi = map.stationary()?;
    let n = map.n_states();
    let ones = RVec::from_element(n, 1.0);
    let terms = remainder_powers(map, t, 1, kappa, nodes, pi.as_vec(), &ones, tol)?;
    let q = fourier_operator(map, t).matrix;
    let mut pi_q_one = C64::new(0.0, 0.0);
    for x in 0..n {
        for y in 0..n {
            pi_q_one += C64::new(pi.as_vec()[x], 0.0) * q[(x, y)];
        }
    }
    Ok((pi_q_one - terms.r_n[0]) / terms.l_val)
}

/// Residual of the expansion identity
/// `mu(Q(t)^n f) = lambda(t)^n L(t) + R_n(t)`.
pub fn expansion_identity_check(
    map: &MarkovAdditiveProcess,
    t: &[f64],
    f: &RVec,
    mu: &RVec,
    n_steps: usize,
    kappa: f64,
    nodes: usize,
    tol: &ToleranceProfile,
) -> Result<f64, SpectralError> {
    let contour = ContourSpec::gamma1(kappa, nodes);
    let dec = eigenprojection(map, t, kappa, &contour, tol)?;
    let terms = remainder_powers(map, t, n_steps, kappa, nodes, mu, f, tol)?;
    let q = fourier_operator(map, t).matrix;
    let nn = q.nrows();
    let fc = CVec::from_fn(nn, |i, _| C64::new(f[i], 0.0));
    let qn_f = mat_pow(&q, n_steps) * fc;
    let mut lhs = C64::new(0.0, 0.0);
    for i in 0..nn {
        lhs += C64::new(mu[i], 0.0) * qn_f[i];
    }
    // L for this (mu, f) comes from the same Gamma_1 used for Pi.
    let mut l_val = C64::new(0.0, 0.0);
    for i in 0..nn {
        for j in 0..nn {
            l_val += C64::new(mu[i], 0.0) * dec.pi[(i, j)] * C64::new(f[j], 0.0);
        }
    }
    let rhs = dec.lambda.powu(n_steps as u32) * l_val + terms.r_n[n_steps - 1];
    Ok((lhs - rhs).norm())
}

/// Empirical perturbation-neighborhood radius: grows `||t||` along a fixed
/// direction set until the eigenprojection is rejected, and returns the
/// smallest last-accepted radius over directions (capped at `r_cap`).
pub fn perturbation_radius(
    map: &MarkovAdditiveProcess,
    kappa: f64,
    nodes: usize,
    r_cap: f64,
    tol: &ToleranceProfile,
) -> f64 {
    let d = map.dim();
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for k in 0..d {
        for s in [1.0, -1.0] {
            let mut v = vec![0.0; d];
            v[k] = s;
            dirs.push(v);
        }
    }
    let diag = 1.0 / (d as f64).sqrt();
    for signs in 0..(1usize << (d - 1)) {
        let mut v = vec![diag; d];
        for (k, item) in v.iter_mut().enumerate().take(d) {
            if k > 0 && (signs >> (k - 1)) & 1 == 1 {
                *item = -diag;
            }
        }
        dirs.push(v);
    }
    let contour = ContourSpec::gamma1(kappa, nodes);
    let mut radius = r_cap;
    for dir in &dirs {
        let mut r = 0.05;
        let mut last_good = 0.0;
        while r <= r_cap {
            let t: Vec<f64> = dir.iter().map(|x| x * r).collect();
            match eigenprojection(map, &t, kappa, &contour, tol) {
                Ok(_) => last_good = r,
                Err(_) => break,
            }
            r *= 1.2;
        }
        radius = radius.min(if last_good == 0.0 { 0.05 } else { last_good });
    }
    radius
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::{gallery::two_state_reference, IncrementLaw, MarkovAdditiveProcess, StateSpace, TransitionMatrix};
    use approx::assert_abs_diff_eq;

    fn tols() -> ToleranceProfile {
        ToleranceProfile::default()
    }

    #[test]
    fn kappa_two_state_hand_value() {
        // Eigenvalues {1, 0.7}: kappa = (1 + 0.7)/2 = 0.85.
        let p = TransitionMatrix::from_rows(&[&[0.9, 0.1], &[0.2, 0.8]]).unwrap();
        let laws = vec![IncrementLaw::point_mass(vec![0.0; 3]); 4];
        let map = MarkovAdditiveProcess::new(StateSpace::numbered(2), p, laws, 3).unwrap();
        assert_abs_diff_eq!(choose_kappa(&map, &tols()).unwrap(), 0.85, epsilon = 1e-9);
    }

    #[test]
    fn kappa_single_state_and_rank_one() {
        let map = MarkovAdditiveProcess::iid(
            IncrementLaw::isotropic_gaussian(vec![0.0; 3], 1.0).unwrap(),
        )
        .unwrap();
        assert_abs_diff_eq!(choose_kappa(&map, &tols()).unwrap(), 0.5, epsilon = 1e-10);

        let p = TransitionMatrix::from_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap();
        let laws = vec![IncrementLaw::point_mass(vec![0.0; 3]); 4];
        let map = MarkovAdditiveProcess::new(StateSpace::numbered(2), p, laws, 3).unwrap();
        assert_abs_diff_eq!(choose_kappa(&map, &tols()).unwrap(), 0.5, epsilon = 1e-10);
    }

    #[test]
    fn projector_at_zero_is_one_tensor_pi() {
        let map = two_state_reference();
        let kappa = choose_kappa(&map, &tols()).unwrap();
        let dec = eigenprojection(
            &map,
            &[0.0, 0.0, 0.0],
            kappa,
            &ContourSpec::gamma1(kappa, 128),
            &tols(),
        )
        .unwrap();
        assert_abs_diff_eq!(dec.lambda.re, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(dec.lambda.im, 0.0, epsilon = 1e-9);
        let pi = map.stationary().unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let expect = pi.as_vec()[j];
                assert_abs_diff_eq!(dec.pi[(i, j)].re, expect, epsilon = 1e-9);
                assert_abs_diff_eq!(dec.pi[(i, j)].im, 0.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn single_state_gaussian_lambda_is_cf() {
        let map = MarkovAdditiveProcess::iid(
            IncrementLaw::isotropic_gaussian(vec![0.0; 3], 1.0).unwrap(),
        )
        .unwrap();
        let t = [0.3, 0.0, -0.2];
        let dec = eigenprojection(&map, &t, 0.5, &ContourSpec::gamma1(0.5, 128), &tols()).unwrap();
        let n2: f64 = t.iter().map(|x| x * x).sum();
        assert_abs_diff_eq!(dec.lambda.re, (-0.5 * n2).exp(), epsilon = 1e-10);
        assert_abs_diff_eq!(dec.pi[(0, 0)].re, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn lambda_matches_two_by_two_closed_form() {
        // Dominant eigenvalue of a 2x2 complex matrix: (tr + sqrt(tr^2 - 4 det))/2.
        let map = two_state_reference();
        let kappa = choose_kappa(&map, &tols()).unwrap();
        let t = [0.1, 0.0, 0.0];
        let q = fourier_operator(&map, &t).matrix;
        let tr = q.trace();
        let det = q[(0, 0)] * q[(1, 1)] - q[(0, 1)] * q[(1, 0)];
        let disc = (tr * tr - det * 4.0).sqrt();
        let r1 = (tr + disc) * 0.5;
        let r2 = (tr - disc) * 0.5;
        let closed = if (r1 - C64::new(1.0, 0.0)).norm() < (r2 - C64::new(1.0, 0.0)).norm() {
            r1
        } else {
            r2
        };
        let dec =
            eigenprojection(&map, &t, kappa, &ContourSpec::gamma1(kappa, 128), &tols()).unwrap();
        assert!((dec.lambda - closed).norm() <= 1e-8);
    }

    #[test]
    fn quotient_formula_is_exact_at_zero_and_matches_contour_nearby() {
        let map = two_state_reference();
        let kappa = choose_kappa(&map, &tols()).unwrap();
        let at0 = lambda_quotient(&map, &[0.0; 3], kappa, 128, &tols()).unwrap();
        assert!((at0 - C64::new(1.0, 0.0)).norm() <= 1e-12);

        let t = [0.05, 0.05, 0.0];
        let via_quotient = lambda_quotient(&map, &t, kappa, 128, &tols()).unwrap();
        let via_contour = eigenprojection(&map, &t, kappa, &ContourSpec::gamma1(kappa, 128), &tols())
            .unwrap()
            .lambda;
        assert!((via_quotient - via_contour).norm() <= 1e-8);
    }

    #[test]
    fn single_state_remainders_vanish() {
        let map = MarkovAdditiveProcess::iid(
            IncrementLaw::isotropic_gaussian(vec![0.0; 3], 1.0).unwrap(),
        )
        .unwrap();
        let mu = RVec::from_element(1, 1.0);
        let f = RVec::from_element(1, 1.0);
        let terms = remainder_powers(&map, &[0.2, 0.1, 0.0], 10, 0.5, 128, &mu, &f, &tols()).unwrap();
        for r in &terms.r_n {
            assert!(r.norm() <= 1e-12);
        }
        assert!(terms.r_resummed.norm() <= 1e-12);
    }

    #[test]
    fn remainders_at_zero_equal_matrix_powers_for_centered_f() {
        // At t = 0 with pi(f) = 0: R_n = mu(Q^n f) exactly.
        let map = two_state_reference();
        let kappa = choose_kappa(&map, &tols()).unwrap();
        let pi = map.stationary().unwrap();
        // f orthogonal to pi
        let f = RVec::from_vec(vec![pi.as_vec()[1], -pi.as_vec()[0]]);
        let mu = RVec::from_vec(vec![1.0, 0.0]);
        let terms = remainder_powers(&map, &[0.0; 3], 12, kappa, 128, &mu, &f, &tols()).unwrap();
        let q = fourier_operator(&map, &[0.0; 3]).matrix;
        let fc = CVec::from_fn(2, |i, _| C64::new(f[i], 0.0));
        for n in 1..=12usize {
            let qn_f = mat_pow(&q, n) * fc.clone();
            let expect = qn_f[0];
            assert!(
                (terms.r_n[n - 1] - expect).norm() <= 1e-10,
                "n={n}: {} vs {}",
                terms.r_n[n - 1],
                expect
            );
        }
        // Geometric decay at rate <= rho_2 (+ slack).
        let rho2 = subdominant_modulus(&map).unwrap();
        assert!(terms.fitted_ratio <= rho2 + 0.05);
        // Partial sum + geometric tail equals the resummed series.
        let partial: C64 = terms.r_n.iter().sum();
        let tail_bound = terms.r_n.last().unwrap().norm() * terms.fitted_ratio
            / (1.0 - terms.fitted_ratio.min(0.99));
        assert!((partial - terms.r_resummed).norm() <= tail_bound + 1e-10);
    }

    #[test]
    fn expansion_identity_small_cases() {
        let map = two_state_reference();
        let kappa = choose_kappa(&map, &tols()).unwrap();
        let f = RVec::from_element(2, 1.0);
        let mu = map.stationary().unwrap().as_vec().clone();
        // t = 0, f = 1: 1 = 1 + 0 exactly up to quadrature.
        let r = expansion_identity_check(&map, &[0.0; 3], &f, &mu, 5, kappa, 128, &tols()).unwrap();
        assert!(r <= 1e-10);
        let r = expansion_identity_check(&map, &[0.1, -0.05, 0.02], &f, &mu, 20, kappa, 128, &tols())
            .unwrap();
        assert!(r <= 1e-8, "residual {r}");
    }

    #[test]
    fn doubling_contour_nodes_is_converged_past_64() {
        let map = two_state_reference();
        let kappa = choose_kappa(&map, &tols()).unwrap();
        let t = [0.1, 0.05, -0.08];
        let a = eigenprojection(&map, &t, kappa, &ContourSpec::gamma1(kappa, 64), &tols()).unwrap();
        let b = eigenprojection(&map, &t, kappa, &ContourSpec::gamma1(kappa, 128), &tols()).unwrap();
        assert!(max_abs(&(a.pi - b.pi)) <= 1e-10);
    }

    #[test]
    fn projection_fails_far_outside_neighborhood() {
        let map = MarkovAdditiveProcess::iid(
            IncrementLaw::isotropic_gaussian(vec![0.0; 3], 1.0).unwrap(),
        )
        .unwrap();
        // lambda(t) = exp(-||t||^2/2) far from 1: outside Gamma_1.
        let err = eigenprojection(&map, &[3.0, 0.0, 0.0], 0.5, &ContourSpec::gamma1(0.5, 128), &tols());
        assert!(matches!(err, Err(SpectralError::ProjectionFailed { .. })));
    }
}
