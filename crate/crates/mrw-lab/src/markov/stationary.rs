//! Stationary distributions and the desk-scale ergodicity test.

use super::{MarkovError, TransitionMatrix};
use crate::linalg::{RMat, RVec};

/// Probability vector with `pi P = pi`.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    pi: RVec,
}

impl StationaryDistribution {
    pub fn as_vec(&self) -> &RVec {
        &self.pi
    }

    pub fn weight(&self, x: usize) -> f64 {
        self.pi[x]
    }
}

/// Ergodicity via strict positivity of some power `P^k`, `k <= N^2`,
/// checked on the boolean reachability pattern so float underflow cannot
/// produce false negatives.
pub fn is_ergodic(p: &TransitionMatrix) -> bool {
    let n = p.n();
    let pattern: Vec<bool> = (0..n * n).map(|i| p.matrix()[(i / n, i % n)] > 0.0).collect();
    let mut power = pattern.clone();
    for _ in 0..n * n {
        if power.iter().all(|&b| b) {
            return true;
        }
        let mut next = vec![false; n * n];
        for i in 0..n {
            for k in 0..n {
                if power[i * n + k] {
                    for j in 0..n {
                        if pattern[k * n + j] {
                            next[i * n + j] = true;
                        }
                    }
                }
            }
        }
        if next == power {
            // Reachability pattern has stabilized without filling up.
            return false;
        }
        power = next;
    }
    power.iter().all(|&b| b)
}

/// Solves `pi P = pi`, `sum pi = 1` by a direct linear solve of
/// `(P^T - I)` with the first equation replaced by the normalization row.
pub fn stationary_distribution(p: &TransitionMatrix) -> Result<StationaryDistribution, MarkovError> {
    if !is_ergodic(p) {
        return Err(MarkovError::NotErgodic);
    }
    let n = p.n();
    let mut a = p.matrix().transpose() - RMat::identity(n, n);
    for j in 0..n {
        a[(0, j)] = 1.0;
    }
    let mut b = RVec::zeros(n);
    b[0] = 1.0;
    let lu = a.lu();
    let mut pi = lu.solve(&b).ok_or(MarkovError::NotErgodic)?;

    // One refinement pass toward pi P = pi, then clamp and renormalize.
    for _ in 0..2 {
        let next = p.matrix().transpose() * &pi;
        pi = next;
        let s: f64 = pi.iter().sum();
        pi /= s;
    }
    for v in pi.iter_mut() {
        if *v < 0.0 && *v > -1e-14 {
            *v = 0.0;
        }
    }
    let s: f64 = pi.iter().sum();
    pi /= s;

    let residual = (p.matrix().transpose() * &pi - &pi).amax();
    if residual > 1e-10 || pi.iter().any(|&v| v < 0.0) {
        return Err(MarkovError::NotErgodic);
    }
    Ok(StationaryDistribution { pi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn symmetric_doubly_stochastic() {
        let p = TransitionMatrix::from_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap();
        let pi = stationary_distribution(&p).unwrap();
        assert_abs_diff_eq!(pi.weight(0), 0.5, epsilon = 1e-13);
        assert_abs_diff_eq!(pi.weight(1), 0.5, epsilon = 1e-13);
    }

    #[test]
    fn two_state_balance() {
        // Balance equation 0.1 pi_0 = 0.2 pi_1 gives pi = (2/3, 1/3).
        let p = TransitionMatrix::from_rows(&[&[0.9, 0.1], &[0.2, 0.8]]).unwrap();
        let pi = stationary_distribution(&p).unwrap();
        assert_abs_diff_eq!(pi.weight(0), 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pi.weight(1), 1.0 / 3.0, epsilon = 1e-12);
        let residual = (p.matrix().transpose() * pi.as_vec() - pi.as_vec()).amax();
        assert!(residual <= 1e-10);
    }

    #[test]
    fn identity_is_not_ergodic() {
        let p = TransitionMatrix::from_rows(&[&[1.0, 0.0], &[0.0, 1.0]]).unwrap();
        assert!(matches!(stationary_distribution(&p), Err(MarkovError::NotErgodic)));
    }

    #[test]
    fn periodic_chain_is_not_ergodic() {
        let p = TransitionMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        assert!(!is_ergodic(&p));
    }
}
