//! Small dense complex linear algebra: LU solves with conditioning guards,
//! dominant-eigenvalue estimation, and a few norm helpers.
//!
//! Matrices here are the `N x N` twisted transition operators of desk-scale
//! models (`N <= 8` in practice), so direct methods are always appropriate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

#[derive(Debug, Error)]
pub enum LinalgError {
    /// `(zI - M)` is numerically singular: the shift sits on (or too close
    /// to) the spectrum for a reliable solve.
    #[error("resolvent solve is singular or ill-conditioned (cond ~ {cond:.3e})")]
    SingularResolvent { cond: f64 },
    /// Power iteration did not settle within the iteration cap.
    #[error("dominant eigenvalue iteration did not converge within {cap} iterations")]
    NoConvergence { cap: usize },
}

/// Max-abs entry norm.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Operator infinity norm (max absolute row sum).
pub fn inf_norm(m: &CMat) -> f64 {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// LU factorization of `zI - M` with partial pivoting, plus an exact
/// infinity-norm condition number (cheap at this scale: the inverse is
/// formed column by column).
pub struct ShiftedLu {
    lu: nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
    norm_a: f64,
    n: usize,
}

impl ShiftedLu {
    pub fn new(m: &CMat, z: C64) -> Self {
        let n = m.nrows();
        let mut a = -m.clone();
        for i in 0..n {
            a[(i, i)] += z;
        }
        let norm_a = inf_norm(&a);
        ShiftedLu { lu: a.lu(), norm_a, n }
    }

    /// Solves `(zI - M) w = rhs`. `None` when the factorization is singular.
    pub fn solve(&self, rhs: &CVec) -> Option<CVec> {
        self.lu.solve(rhs)
    }

    /// Infinity-norm condition estimate `||A||_inf * ||A^{-1}||_inf`.
    pub fn cond_inf(&self) -> f64 {
        let mut inv_norm: f64 = 0.0;
        let mut row_sums = vec![0.0f64; self.n];
        for j in 0..self.n {
            let mut e = CVec::zeros(self.n);
            e[j] = C64::new(1.0, 0.0);
            match self.lu.solve(&e) {
                Some(col) => {
                    for i in 0..self.n {
                        row_sums[i] += col[i].norm();
                    }
                }
                None => return f64::INFINITY,
            }
        }
        for s in row_sums {
            inv_norm = inv_norm.max(s);
        }
        self.norm_a * inv_norm
    }
}

/// Solves `(zI - M) w = rhs` by LU with partial pivoting, enforcing the
/// residual contract `||(zI - M)w - rhs|| <= tol_residual * ||rhs||` and a
/// conditioning cap.
pub fn resolvent_solve(
    m: &CMat,
    z: C64,
    rhs: &CVec,
    tol_residual: f64,
    cond_max: f64,
) -> Result<CVec, LinalgError> {
    let lu = ShiftedLu::new(m, z);
    let cond = lu.cond_inf();
    if !cond.is_finite() || cond > cond_max {
        return Err(LinalgError::SingularResolvent { cond });
    }
    let w = lu.solve(rhs).ok_or(LinalgError::SingularResolvent { cond })?;
    let mut residual = -m * &w;
    residual.axpy(z, &w, C64::new(1.0, 0.0));
    residual -= rhs;
    let rhs_norm = rhs.norm().max(f64::MIN_POSITIVE);
    if residual.norm() > tol_residual * rhs_norm * cond.max(1.0) {
        return Err(LinalgError::SingularResolvent { cond });
    }
    Ok(w)
}

fn random_unit_vector(n: usize, seed: u64) -> CVec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = CVec::from_fn(n, |_, _| {
        C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    let norm = v.norm();
    v /= C64::new(norm, 0.0);
    v
}

/// Dominant eigenvalue by power iteration with a fixed-seed random complex
/// start. Returns the Rayleigh quotient once the eigen-residual falls below
/// `tol * ||M||_inf`.
pub fn power_iteration(m: &CMat, tol: f64, cap: usize) -> Result<C64, LinalgError> {
    let n = m.nrows();
    let scale = inf_norm(m);
    if scale == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    // Seed folds in the dimension so different sizes do not share a start.
    let mut v = random_unit_vector(n, 0x5EED_0001 ^ (n as u64));
    let mut lambda;
    for _ in 0..cap {
        let w = m * &v;
        let wn = w.norm();
        if wn == 0.0 {
            return Ok(C64::new(0.0, 0.0));
        }
        lambda = v.dotc(&w);
        let mut res = w.clone();
        res.axpy(-lambda, &v, C64::new(1.0, 0.0));
        v = w / C64::new(wn, 0.0);
        if res.norm() <= tol * scale {
            return Ok(lambda);
        }
    }
    Err(LinalgError::NoConvergence { cap })
}

/// Spectral radius by normalized repeated squaring,
/// `rho = lim ||M^{2^k}||^{1/2^k}`.
///
/// Unlike power iteration it is insensitive to modulus ties (conjugate
/// pairs, unimodular spectra at lattice points); accuracy after `k`
/// squarings is O(log(cond) / 2^k).
pub fn squaring_radius(m: &CMat, squarings: usize) -> f64 {
    let norm0 = max_abs(m);
    if norm0 == 0.0 {
        return 0.0;
    }
    let mut a = m / C64::new(norm0, 0.0);
    let mut log_radius = norm0.ln();
    let mut weight = 1.0f64;
    for _ in 0..squarings {
        a = &a * &a;
        weight *= 0.5;
        let s = max_abs(&a);
        if s == 0.0 {
            return 0.0;
        }
        a /= C64::new(s, 0.0);
        log_radius += weight * s.ln();
    }
    log_radius.exp()
}

/// Spectral radius: power iteration first, deterministic squaring estimate
/// as the fallback for degenerate dominant pairs.
pub fn spectral_radius_robust(m: &CMat, tol: f64, cap: usize) -> f64 {
    match power_iteration(m, tol, cap) {
        Ok(lambda) => lambda.norm(),
        Err(_) => squaring_radius(m, 48),
    }
}
