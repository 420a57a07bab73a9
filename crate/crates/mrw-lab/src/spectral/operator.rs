//! The twisted (Fourier) operator matrix and the semigroup verification.

use crate::linalg::{CMat, CVec, C64, RVec};
use crate::markov::{parallel_mc, walk_trajectory, MarkovAdditiveProcess};
use crate::quad::Neumaier;

/// `M_{xy} = P_{xy} phi_{xy}(t)`: the matrix of
/// `(Q(t) f)(x) = E_x[exp(i<t, S_1>) f(X_1)]`.
#[derive(Debug, Clone)]
pub struct FourierOperatorMatrix {
    pub t: Vec<f64>,
    pub matrix: CMat,
}

/// Entrywise construction; at `t = 0` reproduces `P` exactly for point-mass
/// laws (`exp(i*0) = 1` in floating point).
pub fn fourier_operator(map: &MarkovAdditiveProcess, t: &[f64]) -> FourierOperatorMatrix {
    let n = map.n_states();
    let matrix = CMat::from_fn(n, n, |x, y| {
        let p = map.transition.get(x, y);
        if p == 0.0 {
            C64::new(0.0, 0.0)
        } else {
            map.increment(x, y).char_fn(t) * p
        }
    });
    FourierOperatorMatrix { t: t.to_vec(), matrix }
}

pub fn mat_pow(m: &CMat, n: usize) -> CMat {
    let mut acc = CMat::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    let mut k = n;
    while k > 0 {
        if k & 1 == 1 {
            acc = &acc * &base;
        }
        base = &base * &base;
        k >>= 1;
    }
    acc
}

#[derive(Debug, Clone)]
pub struct SemigroupCheck {
    /// Max over starting states of `|MC - (Q(t)^{m+n} f)(x)|`.
    pub residual: f64,
    /// Largest per-state Monte Carlo standard error (complex, combined
    /// components).
    pub max_stderr: f64,
}

/// Monte Carlo check of `E_x[exp(i<t, S_{m+n}>) f(X_{m+n})] = (Q(t)^{m+n} f)(x)`
/// for every starting state `x`.
pub fn verify_semigroup(
    map: &MarkovAdditiveProcess,
    t: &[f64],
    m: usize,
    n: usize,
    mc_samples: u64,
    f: &RVec,
    seed: u64,
) -> SemigroupCheck {
    assert!(m >= 1 && n >= 1);
    let steps = m + n;
    let q = fourier_operator(map, t);
    let exact = mat_pow(&q.matrix, steps) * CVec::from_fn(f.len(), |i, _| C64::new(f[i], 0.0));

    let n_states = map.n_states();
    let mut residual: f64 = 0.0;
    let mut max_stderr: f64 = 0.0;
    for x in 0..n_states {
        let mut mu = RVec::zeros(n_states);
        mu[x] = 1.0;
        // Per-state accumulators: sum, sum of squares (component-wise).
        let partials = parallel_mc(
            mc_samples,
            seed ^ (x as u64).wrapping_mul(0xA5A5_A5A5),
            || (Neumaier::default(), Neumaier::default(), Neumaier::default(), Neumaier::default()),
            |acc, _idx, mut rng| {
                let mut phase = 0.0;
                let mut last_state = 0usize;
                walk_trajectory(map, &mu, steps, &mut rng, |step, y, s| {
                    if step == steps {
                        phase = t.iter().zip(s).map(|(a, b)| a * b).sum();
                        last_state = y;
                    }
                });
                let z = C64::from_polar(f[last_state], phase);
                acc.0.add(z.re);
                acc.1.add(z.im);
                acc.2.add(z.re * z.re);
                acc.3.add(z.im * z.im);
            },
        );
        let mut s_re = 0.0;
        let mut s_im = 0.0;
        let mut s2_re = 0.0;
        let mut s2_im = 0.0;
        for p in partials {
            s_re += p.0.total();
            s_im += p.1.total();
            s2_re += p.2.total();
            s2_im += p.3.total();
        }
        let ns = mc_samples as f64;
        let mean = C64::new(s_re / ns, s_im / ns);
        let var_re = (s2_re / ns - (s_re / ns).powi(2)).max(0.0);
        let var_im = (s2_im / ns - (s_im / ns).powi(2)).max(0.0);
        let stderr = ((var_re + var_im) / ns).sqrt();
        residual = residual.max((mean - exact[x]).norm());
        max_stderr = max_stderr.max(stderr);
    }
    SemigroupCheck { residual, max_stderr }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use crate::markov::{gallery::two_state_reference, IncrementLaw, MarkovAdditiveProcess};
    use approx::assert_abs_diff_eq;

    #[test]
    fn at_zero_matches_transition_matrix_exactly_for_point_mass() {
        let map =
            MarkovAdditiveProcess::iid(IncrementLaw::point_mass(vec![1.0, 2.0, 3.0])).unwrap();
        let q = fourier_operator(&map, &[0.0, 0.0, 0.0]);
        assert_eq!(q.matrix[(0, 0)], C64::new(1.0, 0.0));
    }

    #[test]
    fn single_state_gaussian_is_cf() {
        let map = MarkovAdditiveProcess::iid(
            IncrementLaw::isotropic_gaussian(vec![0.0; 3], 1.0).unwrap(),
        )
        .unwrap();
        let t = [0.3, -0.4, 0.5];
        let q = fourier_operator(&map, &t);
        let n2: f64 = t.iter().map(|x| x * x).sum();
        assert_abs_diff_eq!(q.matrix[(0, 0)].re, (-0.5 * n2).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(q.matrix[(0, 0)].im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn entry_modulus_bounded_by_transition_probability() {
        let map = two_state_reference();
        let t = [0.9, 0.1, -0.7];
        let q = fourier_operator(&map, &t);
        for x in 0..2 {
            for y in 0..2 {
                assert!(q.matrix[(x, y)].norm() <= map.transition.get(x, y) + 1e-15);
            }
        }
    }

    #[test]
    fn two_state_point_mass_entries_direct_arithmetic() {
        // Entry-by-entry oracle: P_xy * exp(i <t, v_xy>).
        let p = crate::markov::TransitionMatrix::from_rows(&[&[0.7, 0.3], &[0.4, 0.6]]).unwrap();
        let vs = [
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.5, 0.5, 0.0],
        ];
        let laws: Vec<_> = vs.iter().map(|v| IncrementLaw::point_mass(v.clone())).collect();
        let map = MarkovAdditiveProcess::new(
            crate::markov::StateSpace::numbered(2),
            p,
            laws,
            3,
        )
        .unwrap();
        let t = [0.2, -0.3, 0.15];
        let q = fourier_operator(&map, &t);
        for x in 0..2 {
            for y in 0..2 {
                let v = &vs[x * 2 + y];
                let phase: f64 = t.iter().zip(v).map(|(a, b)| a * b).sum();
                let expect = C64::from_polar(map.transition.get(x, y), phase);
                assert_abs_diff_eq!((q.matrix[(x, y)] - expect).norm(), 0.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn matrix_semigroup_identity_is_machine_exact() {
        let map = two_state_reference();
        let q = fourier_operator(&map, &[0.3, 0.1, -0.2]).matrix;
        let lhs = mat_pow(&q, 5);
        let rhs = &mat_pow(&q, 2) * &mat_pow(&q, 3);
        assert!(max_abs(&(lhs - rhs)) <= 1e-14);
    }

    #[test]
    fn deterministic_walk_semigroup_residual_is_rounding() {
        let map =
            MarkovAdditiveProcess::iid(IncrementLaw::point_mass(vec![0.5, -1.0, 2.0])).unwrap();
        let f = RVec::from_element(1, 1.0);
        let check = verify_semigroup(&map, &[0.4, 0.2, -0.1], 2, 3, 128, &f, 7);
        assert!(check.residual <= 1e-12, "residual {}", check.residual);
    }

    #[test]
    fn gaussian_two_state_semigroup_within_error_bars() {
        let map = two_state_reference();
        let f = RVec::from_element(2, 1.0);
        let check = verify_semigroup(&map, &[0.3, 0.1, -0.2], 2, 2, 1_000_000, &f, 40);
        assert!(
            check.residual <= 4.0 * check.max_stderr,
            "residual {} vs 4 se {}",
            check.residual,
            4.0 * check.max_stderr
        );
    }
}
