//! Fourier-side evaluation of the renewal sum.
//!
//! With `hhat` supported in `||t|| <= b` and a smooth radial cutoff `chi`
//! (plateau to `r_inner`, support to `alpha`),
//!
//! ```text
//!   (2 pi)^3 sum_n E_mu[f(X_n) h(S_n - a)] = I(a) + J(a) + K(a),
//!
//!   I = int chi hhat lambda L / (1 - lambda) e^{-i<t,a>} dt     (||t|| <= alpha)
//!   J = int chi hhat (sum_n R_n)   e^{-i<t,a>} dt               (||t|| <= alpha)
//!   K = int (1-chi) hhat (sum_n E_n) e^{-i<t,a>} dt             (r < ||t|| <= b)
//! ```
//!
//! and `I` splits further around the quadratic singularity at the origin:
//!
//! ```text
//!   I1 = int chi (hhat lambda L - hhat(0) L(0)) / (1 - lambda) e dt
//!   I2 = 2 hhat(0) L(0) int chi / <Sigma t, t>  e dt
//!   I3 = 2 hhat(0) L(0) int chi (lambda - 1 + <Sigma t,t>/2)
//!                            / ((1 - lambda) <Sigma t, t>) e dt
//! ```
//!
//! `I2` carries the entire leading asymptote; `I1`, `I3`, `J`, `K` decay
//! faster than `||a||^{-(d-2)}`. The identity `I = I1 + I2 + I3` holds for
//! any positive definite matrix in the `I2`/`I3` slots and is asserted as a
//! quadrature self-check.
//!
//! Spectral quantities per node are single-solve contour quadratures of
//! `mu((z - Q(t))^{-1} f)`: its only pole inside `Gamma_1` is `lambda(t)`
//! with residue `L(t) = mu(Pi(t) f)`, so
//! `lambda = oint z g dz / oint g dz` and `L = oint g dz` on `Gamma_1`,
//! while the `z/(1-z)` kernel on `Gamma_0` resums `sum_n R_n`.

use super::constants::{constant_cd_prime, SigmaFactor};
use super::testfn::{CutoffFunction, TestFunctionH};
use super::RenewalError;
use crate::config::{QuadBudget, ToleranceProfile};
use crate::linalg::{
    resolvent_solve, spectral_radius_robust, CVec, C64, LinalgError, RMat, RVec,
};
use crate::markov::{nonlattice_diagnostic, MarkovAdditiveProcess};
use crate::quad::integrate_shell_with_error;
use crate::rng::stream_rng;
use crate::spectral::contour::{choose_kappa, perturbation_radius, ContourSpec};
use crate::spectral::operator::fourier_operator;
use rand::Rng;
use std::sync::Mutex;

const TWO_PI_CUBED: f64 = (2.0 * std::f64::consts::PI)
    * (2.0 * std::f64::consts::PI)
    * (2.0 * std::f64::consts::PI);

/// Contour/cutoff geometry for one model, discovered once and reused.
#[derive(Debug, Clone)]
pub struct SplitGeometry {
    pub kappa: f64,
    /// Verified perturbation-neighborhood radius.
    pub r_perturbation: f64,
    /// Cutoff support radius (`chi = 0` outside).
    pub alpha: f64,
    /// Cutoff plateau radius (`chi = 1` inside).
    pub r_inner: f64,
}

impl SplitGeometry {
    /// `alpha = 0.8 * min(verified radius, 0.9 b)`, plateau at `alpha/2`.
    pub fn for_model(
        map: &MarkovAdditiveProcess,
        b: f64,
        budget: &QuadBudget,
        tol: &ToleranceProfile,
    ) -> Result<Self, RenewalError> {
        let kappa = choose_kappa(map, tol)?;
        let r_pert = perturbation_radius(map, kappa, budget.contour_nodes_g1, 0.9 * b, tol);
        let alpha = 0.8 * r_pert.min(0.9 * b);
        Ok(SplitGeometry { kappa, r_perturbation: r_pert, alpha, r_inner: alpha / 2.0 })
    }

    pub fn cutoff(&self) -> CutoffFunction {
        CutoffFunction::new(self.r_inner, self.alpha)
    }
}

/// Per-model data for the cubature hot path.
struct HotPath<'a> {
    map: &'a MarkovAdditiveProcess,
    mu: Vec<C64>,
    f: CVec,
    g1: Vec<(C64, C64)>,
    g0: Vec<(C64, C64)>,
    gamma1_center: C64,
    gamma1_radius: f64,
    res_tol: f64,
    cond_max: f64,
}

impl<'a> HotPath<'a> {
    fn new(
        map: &'a MarkovAdditiveProcess,
        mu: &RVec,
        f: &RVec,
        geom: &SplitGeometry,
        budget: &QuadBudget,
        tol: &ToleranceProfile,
    ) -> Self {
        let g1c = ContourSpec::gamma1(geom.kappa, budget.contour_nodes_g1);
        let g0c = ContourSpec::gamma0(geom.kappa, budget.contour_nodes_g0);
        HotPath {
            map,
            mu: mu.iter().map(|&x| C64::new(x, 0.0)).collect(),
            f: CVec::from_fn(f.len(), |i, _| C64::new(f[i], 0.0)),
            g1: g1c.points().collect(),
            g0: g0c.points().collect(),
            gamma1_center: g1c.center,
            gamma1_radius: g1c.radius,
            res_tol: tol.resolvent_residual,
            cond_max: tol.resolvent_cond_max,
        }
    }

    /// `(lambda, L, sum_n R_n)` at `t`.
    fn eval(&self, t: &[f64]) -> Result<(C64, C64, C64), RenewalError> {
        let q = fourier_operator(self.map, t).matrix;
        let n = q.nrows();
        let mut num = C64::new(0.0, 0.0);
        let mut den = C64::new(0.0, 0.0);
        for &(z, w) in &self.g1 {
            let x = resolvent_solve(&q, z, &self.f, self.res_tol, self.cond_max)
                .map_err(crate::spectral::SpectralError::from)?;
            let mut dot = C64::new(0.0, 0.0);
            for i in 0..n {
                dot += self.mu[i] * x[i];
            }
            num += w * z * dot;
            den += w * dot;
        }
        if den.norm() < 1e-12 {
            return Err(RenewalError::Spectral(
                crate::spectral::SpectralError::ProjectionFailed {
                    residual: f64::INFINITY,
                    trace_defect: den.norm(),
                },
            ));
        }
        let lambda = num / den;
        if (lambda - self.gamma1_center).norm() >= self.gamma1_radius {
            return Err(RenewalError::Spectral(
                crate::spectral::SpectralError::ProjectionFailed {
                    residual: (lambda - self.gamma1_center).norm(),
                    trace_defect: 0.0,
                },
            ));
        }
        let mut rsum = C64::new(0.0, 0.0);
        for &(z, w) in &self.g0 {
            let x = resolvent_solve(&q, z, &self.f, self.res_tol, self.cond_max)
                .map_err(crate::spectral::SpectralError::from)?;
            let mut dot = C64::new(0.0, 0.0);
            for i in 0..n {
                dot += self.mu[i] * x[i];
            }
            rsum += w * (z / (C64::new(1.0, 0.0) - z)) * dot;
        }
        Ok((lambda, den, rsum))
    }

    /// `sum_{n >= 1} mu(Q(t)^n f) = mu((I - Q)^{-1} Q f)`.
    fn esum(&self, t: &[f64]) -> Result<C64, RenewalError> {
        let q = fourier_operator(self.map, t).matrix;
        let qf = &q * &self.f;
        let w = resolvent_solve(&q, C64::new(1.0, 0.0), &qf, self.res_tol, self.cond_max)
            .map_err(crate::spectral::SpectralError::from)?;
        let mut dot = C64::new(0.0, 0.0);
        for i in 0..q.nrows() {
            dot += self.mu[i] * w[i];
        }
        Ok(dot)
    }
}

/// The five ball integrals, the shell integral, and the assembled value.
#[derive(Debug, Clone)]
pub struct FourierSplit {
    pub i: C64,
    pub i1: C64,
    pub i2: C64,
    pub i3: C64,
    pub j: C64,
    pub k: C64,
    /// Sum of per-component node-refinement error estimates (same scale as
    /// the raw integrals).
    pub quadrature_error: f64,
    /// `|I - (I1 + I2 + I3)|`.
    pub split_residual: f64,
    /// `(I + J + K).re / (2 pi)^3`: the renewal sum for the test function.
    pub value: f64,
    /// Scaled uncertainty of `value`.
    pub value_error: f64,
    /// `|Im(I + J + K)| / (2 pi)^3`; conjugate symmetry makes it vanish.
    pub reality_residual: f64,
}

/// Verifies the shell is free of lattice points before integrating there.
fn shell_lattice_guard(
    map: &MarkovAdditiveProcess,
    r_lo: f64,
    r_hi: f64,
    tol: &ToleranceProfile,
) -> Result<(), RenewalError> {
    let mut grid: Vec<Vec<f64>> = Vec::new();
    let mut radii = vec![r_lo * 1.02, 0.5 * (r_lo + r_hi), r_hi * 0.98];
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut m = two_pi;
    while m <= r_hi {
        if m > r_lo {
            radii.push(m);
        }
        m += two_pi;
    }
    for &r in &radii {
        for k in 0..3 {
            let mut t = vec![0.0; 3];
            t[k] = r;
            grid.push(t);
        }
    }
    let mut rng = stream_rng(0x5A7E, 1);
    for _ in 0..8 {
        let mut t: Vec<f64> = (0..3).map(|_| rng.gen::<f64>() - 0.5).collect();
        let norm: f64 = t.iter().map(|x| x * x).sum::<f64>().sqrt();
        let r = r_lo + (r_hi - r_lo) * rng.gen::<f64>();
        for x in t.iter_mut() {
            *x *= r / norm;
        }
        grid.push(t);
    }
    let report = nonlattice_diagnostic(map, &grid, tol.lattice_flag);
    if report.flagged {
        return Err(RenewalError::LatticeSuspect {
            radius: report.max_radius,
            worst_t: report.worst_t,
        });
    }
    Ok(())
}

/// Full `I/J/K` + `I1/I2/I3` evaluation at one shift vector `a`.
#[allow(clippy::too_many_arguments)]
pub fn fourier_split(
    map: &MarkovAdditiveProcess,
    f: &RVec,
    mu: &RVec,
    h: &TestFunctionH,
    a: &RVec,
    sigma: &RMat,
    geom: &SplitGeometry,
    budget: &QuadBudget,
    tol: &ToleranceProfile,
) -> Result<FourierSplit, RenewalError> {
    if map.dim() != 3 {
        return Err(RenewalError::UnsupportedDimension(map.dim()));
    }
    if map.mean_increment()?.amax() > 1e-10 {
        return Err(RenewalError::NotCentered);
    }
    let chi = geom.cutoff();
    assert!(chi.alpha < h.b, "cutoff support must sit inside the hhat support");
    shell_lattice_guard(map, chi.r_inner, h.b, tol)?;

    let pi = map.stationary()?;
    let l0: f64 = (0..map.n_states()).map(|x| pi.as_vec()[x] * f[x]).sum();
    let hot = HotPath::new(map, mu, f, geom, budget, tol);
    let axis = [a[0], a[1], a[2]];
    let a_norm = a.norm();
    let failure: Mutex<Option<RenewalError>> = Mutex::new(None);

    // Ball part: [I, I1, I2, I3, J].
    let (ball, ball_err) = integrate_shell_with_error(
        0.0,
        chi.alpha,
        &axis,
        a_norm,
        budget,
        |t: &[f64; 3]| {
            let zero = [C64::new(0.0, 0.0); 5];
            let chi_v = chi.eval(t);
            if chi_v == 0.0 {
                return zero;
            }
            let (lambda, l, rsum) = match hot.eval(t) {
                Ok(v) => v,
                Err(e) => {
                    failure.lock().unwrap().get_or_insert(e);
                    return zero;
                }
            };
            let mut s = 0.0;
            for i in 0..3 {
                for jj in 0..3 {
                    s += t[i] * sigma[(i, jj)] * t[jj];
                }
            }
            let hat_v = h.hat(t);
            let phase = -(t[0] * a[0] + t[1] * a[1] + t[2] * a[2]);
            let e = C64::from_polar(1.0, phase);
            let denom = C64::new(1.0, 0.0) - lambda;
            let hl = l * hat_v;
            let i_direct = e * chi_v * lambda * hl / denom;
            let i1 = e * chi_v * (lambda * hl - C64::new(l0, 0.0)) / denom;
            let i2 = e * (2.0 * l0 * chi_v / s);
            let i3 = e * (2.0 * l0 * chi_v)
                * (lambda - C64::new(1.0 - 0.5 * s, 0.0))
                / (denom * s);
            let j = e * chi_v * hat_v * rsum;
            [i_direct, i1, i2, i3, j]
        },
    );
    if let Some(e) = failure.lock().unwrap().take() {
        return Err(e);
    }

    // Shell part: K.
    let (shell, shell_err) = integrate_shell_with_error(
        chi.r_inner,
        h.b,
        &axis,
        a_norm,
        budget,
        |t: &[f64; 3]| {
            let zero = [C64::new(0.0, 0.0)];
            let om = 1.0 - chi.eval(t);
            if om == 0.0 {
                return zero;
            }
            let hat_v = h.hat(t);
            if hat_v == 0.0 {
                return zero;
            }
            let esum = match hot.esum(t) {
                Ok(v) => v,
                Err(e) => {
                    failure.lock().unwrap().get_or_insert(e);
                    return zero;
                }
            };
            let phase = -(t[0] * a[0] + t[1] * a[1] + t[2] * a[2]);
            [C64::from_polar(om * hat_v, phase) * esum]
        },
    );
    if let Some(e) = failure.lock().unwrap().take() {
        return Err(e);
    }

    let [i_direct, i1, i2, i3, j] = ball;
    let [k] = shell;
    let quadrature_error: f64 = ball_err.iter().sum::<f64>() + shell_err[0];
    let split_residual = (i_direct - (i1 + i2 + i3)).norm();
    let split_tol = 10.0 * (ball_err[0] + ball_err[1] + ball_err[2] + ball_err[3]) + 1e-9;
    if split_residual > split_tol {
        return Err(RenewalError::QuadratureBudgetExceeded {
            detail: format!(
                "I = I1+I2+I3 self-check failed: residual {split_residual:.3e} vs allowance {split_tol:.3e}"
            ),
        });
    }
    let total = i_direct + j + k;
    Ok(FourierSplit {
        i: i_direct,
        i1,
        i2,
        i3,
        j,
        k,
        quadrature_error,
        split_residual,
        value: total.re / TWO_PI_CUBED,
        value_error: (quadrature_error + split_residual) / TWO_PI_CUBED
            + total.im.abs() / TWO_PI_CUBED,
        reality_residual: total.im.abs() / TWO_PI_CUBED,
    })
}

/// `sum_{n >= 1} mu(Q(t)^n f)` closed by one resolvent solve at `z = 1`.
/// Requires spectral radius strictly below 1 at `t` (fails with
/// `SingularResolvent` at lattice dual points).
pub fn resolvent_characteristic_sum(
    map: &MarkovAdditiveProcess,
    f: &RVec,
    mu: &RVec,
    t: &[f64],
    tol: &ToleranceProfile,
) -> Result<C64, RenewalError> {
    let q = fourier_operator(map, t).matrix;
    let radius = spectral_radius_robust(&q, tol.power_iter_tol, tol.power_iter_cap);
    if radius >= 1.0 - tol.lattice_flag {
        return Err(RenewalError::Spectral(crate::spectral::SpectralError::Linalg(
            LinalgError::SingularResolvent { cond: f64::INFINITY },
        )));
    }
    let fc = CVec::from_fn(f.len(), |i, _| C64::new(f[i], 0.0));
    let qf = &q * &fc;
    let w = resolvent_solve(&q, C64::new(1.0, 0.0), &qf, tol.resolvent_residual, tol.resolvent_cond_max)
        .map_err(crate::spectral::SpectralError::from)?;
    let mut dot = C64::new(0.0, 0.0);
    for i in 0..q.nrows() {
        dot += C64::new(mu[i], 0.0) * w[i];
    }
    Ok(dot)
}

/// One row of the `I2` asymptotics table.
#[derive(Debug, Clone)]
pub struct I2Row {
    pub a_norm: f64,
    pub beta: f64,
    pub i2: f64,
    pub prediction: f64,
    pub ratio: f64,
    pub quadrature_error: f64,
}

/// `beta^{d-2} I2(a)` against `C'_d hhat(0) L(0)` (here with `L(0) = 1`):
/// the ratio tends to 1 as `||a||` grows.
pub fn i2_asymptotic_check(
    sigma: &RMat,
    h: &TestFunctionH,
    chi: &CutoffFunction,
    a_list: &[RVec],
    budget: &QuadBudget,
) -> Result<Vec<I2Row>, RenewalError> {
    let factor = SigmaFactor::new(sigma)?;
    let hat0 = h.hat(&[0.0, 0.0, 0.0]);
    let cd_prime = constant_cd_prime(3, sigma)? * hat0;
    let mut rows = Vec::with_capacity(a_list.len());
    for a in a_list {
        let beta = factor.quadratic_inv(a).sqrt();
        if beta <= 0.0 {
            return Err(RenewalError::ZeroShift);
        }
        let axis = [a[0], a[1], a[2]];
        let ([i2], [err]) = integrate_shell_with_error(
            0.0,
            chi.alpha,
            &axis,
            a.norm(),
            budget,
            |t: &[f64; 3]| {
                let chi_v = chi.eval(t);
                if chi_v == 0.0 {
                    return [C64::new(0.0, 0.0)];
                }
                let mut s = 0.0;
                for i in 0..3 {
                    for jj in 0..3 {
                        s += t[i] * sigma[(i, jj)] * t[jj];
                    }
                }
                let phase = -(t[0] * a[0] + t[1] * a[1] + t[2] * a[2]);
                [C64::from_polar(2.0 * chi_v / s, phase)]
            },
        );
        let prediction = cd_prime / beta;
        rows.push(I2Row {
            a_norm: a.norm(),
            beta,
            i2: i2.re,
            prediction,
            ratio: i2.re * beta / cd_prime,
            quadrature_error: err,
        });
    }
    Ok(rows)
}

/// One row of the decay table for the negligible split terms.
#[derive(Debug, Clone)]
pub struct DecayRow {
    pub a_norm: f64,
    /// `||a||^{d-2} |I1 + I3|`.
    pub scaled_i1_i3: f64,
    /// `||a||^{d-2} |J + K|`.
    pub scaled_j_k: f64,
    pub split: FourierSplit,
}

/// Tabulates the `||a||^{d-2}`-scaled magnitudes of `I1 + I3` and `J + K`
/// along an increasing sequence of shifts; both decay to 0 faster than the
/// leading term.
#[allow(clippy::too_many_arguments)]
pub fn decay_check_j_k(
    map: &MarkovAdditiveProcess,
    f: &RVec,
    mu: &RVec,
    h: &TestFunctionH,
    a_list: &[RVec],
    sigma: &RMat,
    geom: &SplitGeometry,
    budget: &QuadBudget,
    tol: &ToleranceProfile,
) -> Result<Vec<DecayRow>, RenewalError> {
    let mut rows = Vec::with_capacity(a_list.len());
    for a in a_list {
        let split = fourier_split(map, f, mu, h, a, sigma, geom, budget, tol)?;
        let scale = a.norm();
        rows.push(DecayRow {
            a_norm: a.norm(),
            scaled_i1_i3: scale * (split.i1 + split.i3).norm(),
            scaled_j_k: scale * (split.j + split.k).norm(),
            split,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::{gallery::lattice_negative_control, gallery::two_state_reference, IncrementLaw, MarkovAdditiveProcess};
    use crate::spectral::derivatives::autocovariance_series;

    fn tols() -> ToleranceProfile {
        ToleranceProfile::default()
    }

    #[test]
    fn characteristic_sum_single_state_gaussian_geometric_series() {
        let map = MarkovAdditiveProcess::iid(
            IncrementLaw::isotropic_gaussian(vec![0.0; 3], 1.0).unwrap(),
        )
        .unwrap();
        let f = RVec::from_element(1, 1.0);
        let mu = RVec::from_element(1, 1.0);
        let t = [0.7, -0.3, 0.2];
        let n2: f64 = t.iter().map(|x| x * x).sum();
        let phi = (-0.5 * n2).exp();
        let v = resolvent_characteristic_sum(&map, &f, &mu, &t, &tols()).unwrap();
        assert!((v - C64::new(phi / (1.0 - phi), 0.0)).norm() <= 1e-12);
    }

    #[test]
    fn characteristic_sum_matches_truncated_powers() {
        let map = two_state_reference();
        let f = RVec::from_vec(vec![1.0, 0.5]);
        let mu = RVec::from_vec(vec![0.3, 0.7]);
        let t = [0.9, 0.4, -0.6];
        let v = resolvent_characteristic_sum(&map, &f, &mu, &t, &tols()).unwrap();
        // Truncated power sum + geometric bound on the rest.
        let q = fourier_operator(&map, &t).matrix;
        let fc = CVec::from_fn(2, |i, _| C64::new(f[i], 0.0));
        let mut acc = C64::new(0.0, 0.0);
        let mut qn_f = fc;
        let mut rho_bound: f64 = 0.0;
        for _ in 0..300 {
            qn_f = &q * qn_f;
            acc += C64::new(mu[0], 0.0) * qn_f[0] + C64::new(mu[1], 0.0) * qn_f[1];
            rho_bound = qn_f.norm();
        }
        assert!((v - acc).norm() <= 1e-9 + rho_bound * 100.0);
    }

    #[test]
    fn characteristic_sum_singular_at_lattice_dual() {
        let map = lattice_negative_control();
        let f = RVec::from_element(1, 1.0);
        let mu = RVec::from_element(1, 1.0);
        let t = [2.0 * std::f64::consts::PI, 0.0, 0.0];
        assert!(matches!(
            resolvent_characteristic_sum(&map, &f, &mu, &t, &tols()),
            Err(RenewalError::Spectral(crate::spectral::SpectralError::Linalg(
                LinalgError::SingularResolvent { .. }
            )))
        ));
    }

    #[test]
    fn split_consistency_on_iid_gaussian() {
        let map = MarkovAdditiveProcess::iid(
            IncrementLaw::isotropic_gaussian(vec![0.0; 3], 1.0).unwrap(),
        )
        .unwrap();
        let f = RVec::from_element(1, 1.0);
        let mu = RVec::from_element(1, 1.0);
        let h = TestFunctionH::new(1.0, 4);
        let budget = QuadBudget::quick();
        let geom = SplitGeometry::for_model(&map, h.b, &budget, &tols()).unwrap();
        let sigma = autocovariance_series(&map, 50).unwrap();
        let a = RVec::from_vec(vec![6.0, 2.0, -1.0]);
        let split =
            fourier_split(&map, &f, &mu, &h, &a, &sigma, &geom, &budget, &tols()).unwrap();
        assert!(split.split_residual <= 10.0 * split.quadrature_error + 1e-9);
        // Single state: remainders vanish identically, so J = 0.
        assert!(split.j.norm() <= 1e-12, "J = {:?}", split.j);
        assert!(split.reality_residual <= 1e-9);
    }

    #[test]
    fn routes_agree_on_markov_model_quick() {
        let map = two_state_reference();
        let n = map.n_states();
        let f = RVec::from_element(n, 1.0);
        let mu = map.stationary().unwrap().as_vec().clone();
        let h = TestFunctionH::new(1.0, 4);
        let budget = QuadBudget::quick();
        let geom = SplitGeometry::for_model(&map, h.b, &budget, &tols()).unwrap();
        let sigma = autocovariance_series(&map, 200).unwrap();
        let a = RVec::from_vec(vec![8.0, 1.0, -2.0]);
        let start = std::time::Instant::now();
        let split =
            fourier_split(&map, &f, &mu, &h, &a, &sigma, &geom, &budget, &tols()).unwrap();
        let t_fourier = start.elapsed();
        let start = std::time::Instant::now();
        let mc = crate::renewal::renewal_sum_mc_smooth(
            &map,
            &f,
            &mu,
            &h,
            &a,
            60_000,
            Some(28_000),
            2468,
            &tols(),
            &budget,
        )
        .unwrap();
        let t_mc = start.elapsed();
        eprintln!(
            "fourier {:.6e} +- {:.1e} ({:?}); mc {:.6e} +- {:.1e} tail {:.2e} n_max {} ({:?}); geom alpha {:.3}",
            split.value,
            split.value_error,
            t_fourier,
            mc.value,
            mc.stderr,
            mc.tail_correction,
            mc.n_max,
            t_mc,
            geom.alpha
        );
        assert!(
            (split.value - mc.value).abs()
                <= 3.0 * (mc.stderr + split.value_error + mc.tail_bound),
            "fourier {} vs mc {} (allow {})",
            split.value,
            mc.value,
            3.0 * (mc.stderr + split.value_error + mc.tail_bound)
        );
    }

    #[test]
    fn i2_table_converges_to_constant() {
        let sigma = RMat::identity(3, 3);
        let h = TestFunctionH::new(1.0, 4);
        let chi = CutoffFunction::new(0.5, 1.0 * 0.8);
        let a_list: Vec<RVec> = [8.0, 16.0, 32.0]
            .iter()
            .map(|&r| RVec::from_vec(vec![r, 0.0, 0.0]))
            .collect();
        let rows = i2_asymptotic_check(&sigma, &h, &chi, &a_list, &QuadBudget::quick()).unwrap();
        // Quadratic convergence of the ratio toward 1.
        assert!((rows[2].ratio - 1.0).abs() < (rows[0].ratio - 1.0).abs());
        assert!((rows[2].ratio - 1.0).abs() <= 0.05, "ratio {}", rows[2].ratio);
    }
}
