//! Trajectory simulation and the deterministic parallel Monte Carlo
//! harness.
//!
//! Per-trajectory generators are derived from `(seed, trajectory index)`
//! (see [`crate::rng`]), and batch partials are folded in index order, so
//! every estimate is a pure function of its inputs regardless of thread
//! count or scheduling.

use super::{MarkovAdditiveProcess, MarkovError, MAX_DIM};
use crate::linalg::RVec;
use crate::rng::stream_rng;
use rand::Rng;
use rayon::prelude::*;

/// A materialized trajectory: states `X_0..X_n` and walk `S_0..S_n`.
#[derive(Debug, Clone)]
pub struct TrajectorySample {
    pub seed: u64,
    pub states: Vec<usize>,
    pub walk: Vec<RVec>,
}

fn sample_initial(mu: &RVec, u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &w) in mu.iter().enumerate() {
        acc += w;
        if u <= acc {
            return i;
        }
    }
    mu.len() - 1
}

fn validate_mu(map: &MarkovAdditiveProcess, mu: &RVec) -> Result<(), MarkovError> {
    let n = map.n_states();
    let ok = mu.len() == n
        && mu.iter().all(|&w| (0.0..=1.0 + 1e-12).contains(&w))
        && (mu.iter().sum::<f64>() - 1.0).abs() <= 1e-10;
    if ok {
        Ok(())
    } else {
        Err(MarkovError::BadInitial { expected: n })
    }
}

/// Streams one trajectory through `visit(step, state, walk_prefix_sum)`;
/// `visit` is called for steps `1..=n_steps` (after each increment), not
/// for the initial point `S_0 = 0`.
pub fn walk_trajectory(
    map: &MarkovAdditiveProcess,
    mu: &RVec,
    n_steps: usize,
    rng: &mut impl Rng,
    mut visit: impl FnMut(usize, usize, &[f64]),
) -> usize {
    let d = map.dim();
    let mut s = [0.0f64; MAX_DIM];
    let mut step_buf = [0.0f64; MAX_DIM];
    let mut x = sample_initial(mu, rng.gen());
    let x0 = x;
    for step in 1..=n_steps {
        let y = map.transition.sample_row(x, rng.gen());
        map.increment(x, y).sample(rng, &mut step_buf[..d]);
        for k in 0..d {
            s[k] += step_buf[k];
        }
        x = y;
        visit(step, x, &s[..d]);
    }
    x0
}

/// Simulates `(X_0..X_n, S_0..S_n)`. Bit-identical output for identical
/// `(map, mu, n_steps, seed)`.
pub fn simulate(
    map: &MarkovAdditiveProcess,
    mu: &RVec,
    n_steps: usize,
    seed: u64,
) -> Result<TrajectorySample, MarkovError> {
    validate_mu(map, mu)?;
    let mut rng = stream_rng(seed, 0);
    let mut states = Vec::with_capacity(n_steps + 1);
    let mut walk = Vec::with_capacity(n_steps + 1);
    walk.push(RVec::zeros(map.dim()));
    states.push(0);
    let x0 = walk_trajectory(map, mu, n_steps, &mut rng, |_, x, s| {
        states.push(x);
        walk.push(RVec::from_column_slice(s));
    });
    states[0] = x0;
    Ok(TrajectorySample { seed, states, walk })
}

/// Runs `n_items` independent work items in index batches and folds the
/// per-batch partials in index order.
///
/// `item` receives `(index, rng)` and merges into the batch accumulator.
pub fn parallel_mc<T, F>(n_items: u64, seed: u64, init: impl Fn() -> T + Sync, item: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut T, u64, rand_chacha::ChaCha8Rng) + Sync,
{
    let batch_size: u64 = 1024;
    let n_batches = n_items.div_ceil(batch_size);
    (0..n_batches)
        .into_par_iter()
        .map(|b| {
            let mut acc = init();
            let lo = b * batch_size;
            let hi = ((b + 1) * batch_size).min(n_items);
            for idx in lo..hi {
                item(&mut acc, idx, stream_rng(seed, idx));
            }
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::{IncrementLaw, StateSpace, TransitionMatrix};
    use crate::linalg::RMat;
    use approx::assert_abs_diff_eq;

    fn iid_gaussian() -> MarkovAdditiveProcess {
        MarkovAdditiveProcess::iid(IncrementLaw::isotropic_gaussian(vec![0.0; 3], 1.0).unwrap())
            .unwrap()
    }

    #[test]
    fn zero_steps_walk_is_origin() {
        let map = iid_gaussian();
        let mu = RVec::from_element(1, 1.0);
        let t = simulate(&map, &mu, 0, 7).unwrap();
        assert_eq!(t.walk.len(), 1);
        assert_eq!(t.states.len(), 1);
        assert_eq!(t.walk[0].amax(), 0.0);
    }

    #[test]
    fn deterministic_point_mass_walk() {
        let map =
            MarkovAdditiveProcess::iid(IncrementLaw::point_mass(vec![1.0, 0.0, 0.0])).unwrap();
        let mu = RVec::from_element(1, 1.0);
        let t = simulate(&map, &mu, 5, 3).unwrap();
        assert_abs_diff_eq!(t.walk[5][0], 5.0, epsilon = 0.0);
        assert_abs_diff_eq!(t.walk[5][1], 0.0, epsilon = 0.0);
    }

    #[test]
    fn identical_seeds_identical_output() {
        let map = iid_gaussian();
        let mu = RVec::from_element(1, 1.0);
        let a = simulate(&map, &mu, 64, 99).unwrap();
        let b = simulate(&map, &mu, 64, 99).unwrap();
        for (x, y) in a.walk.iter().zip(b.walk.iter()) {
            assert_eq!(x, y);
        }
        assert_eq!(a.states, b.states);
    }

    /// i.i.d. CLT oracle: over many trajectories, the mean of S_n/n stays
    /// within 3 standard errors of 0 and the covariance of S_n/sqrt(n)
    /// within 5% of the identity.
    #[test]
    fn clt_moments_match() {
        let map = iid_gaussian();
        let mu = RVec::from_element(1, 1.0);
        let n_steps = 10_000usize;
        let n_traj = 10_000u64;
        let partials = parallel_mc(
            n_traj,
            2718,
            || (RVec::zeros(3), RMat::zeros(3, 3)),
            |acc, _idx, mut rng| {
                let mut last = [0.0f64; 3];
                walk_trajectory(&map, &mu, n_steps, &mut rng, |step, _x, s| {
                    if step == n_steps {
                        last.copy_from_slice(s);
                    }
                });
                let v = RVec::from_column_slice(&last);
                acc.0 += &v;
                acc.1 += &v * v.transpose();
            },
        );
        let mut sum = RVec::zeros(3);
        let mut sum2 = RMat::zeros(3, 3);
        for (a, b) in partials {
            sum += a;
            sum2 += b;
        }
        let nt = n_traj as f64;
        let mean_scaled = sum / (nt * n_steps as f64);
        // sd of each component of mean(S_n)/n is 1/sqrt(n * n_traj)
        let se = 1.0 / ((n_steps as f64) * nt).sqrt();
        for k in 0..3 {
            assert!(mean_scaled[k].abs() <= 3.0 * se, "component {k}: {}", mean_scaled[k]);
        }
        let cov_scaled = sum2 / (nt * n_steps as f64);
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (cov_scaled[(i, j)] - expected).abs() <= 0.05,
                    "cov[{i},{j}] = {}",
                    cov_scaled[(i, j)]
                );
            }
        }
    }

    /// Empirical transition frequencies converge to P: chi-square statistic
    /// within 4 sigma of its mean at n = 1e5.
    #[test]
    fn transition_frequencies_chi_square() {
        let p = TransitionMatrix::from_rows(&[&[0.6, 0.3, 0.1], &[0.2, 0.5, 0.3], &[0.3, 0.3, 0.4]])
            .unwrap();
        let n = 3;
        let laws = vec![IncrementLaw::point_mass(vec![0.0; 3]); n * n];
        let map = MarkovAdditiveProcess::new(StateSpace::numbered(n), p, laws, 3).unwrap();
        let mu = RVec::from_vec(vec![1.0 / 3.0; 3]);
        let steps = 100_000usize;
        let mut rng = stream_rng(11, 0);
        let mut counts = vec![0u64; n * n];
        let mut prev = sample_initial(&mu, rng.gen());
        walk_trajectory(&map, &mu, steps, &mut rng, |_, x, _| {
            counts[prev * n + x] += 1;
            prev = x;
        });
        let mut from_totals = vec![0u64; n];
        for x in 0..n {
            for y in 0..n {
                from_totals[x] += counts[x * n + y];
            }
        }
        let mut chi2 = 0.0;
        let mut df = 0usize;
        for x in 0..n {
            for y in 0..n {
                let e = from_totals[x] as f64 * map.transition.get(x, y);
                if e > 0.0 {
                    let o = counts[x * n + y] as f64;
                    chi2 += (o - e) * (o - e) / e;
                    df += 1;
                }
            }
        }
        let df = (df - n) as f64;
        assert!(
            (chi2 - df).abs() <= 4.0 * (2.0 * df).sqrt(),
            "chi2 = {chi2}, df = {df}"
        );
    }
}
