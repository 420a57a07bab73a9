//! Named reference models covering the application range at desk scale:
//! an i.i.d. walk (single state), a two-state chain with autocorrelated
//! increments, a strictly positive (Doeblin / uniformly ergodic) k-state
//! chain, the contractive Gaussian AR(1) example, and a lattice negative
//! control.

use super::ar::ContinuousARModel;
use super::{IncrementLaw, MarkovAdditiveProcess, MarkovError, StateSpace, TransitionMatrix};
use crate::linalg::RMat;
use crate::rng::stream_rng;
use rand::Rng;

/// Either a finite-state Markov additive process or the continuous AR
/// example.
#[derive(Debug, Clone)]
pub enum GalleryModel {
    FiniteState(MarkovAdditiveProcess),
    Ar(ContinuousARModel),
}

impl GalleryModel {
    pub fn as_finite(&self) -> Option<&MarkovAdditiveProcess> {
        match self {
            GalleryModel::FiniteState(m) => Some(m),
            GalleryModel::Ar(_) => None,
        }
    }
}

/// Constructor parameters for [`gallery`].
#[derive(Debug, Clone)]
pub enum GallerySpec {
    /// Single-state model with the given step law.
    Iid { law: IncrementLaw },
    /// Two-state chain `P = [[1-p, p], [q, 1-q]]` with explicit laws
    /// (row-major `[0->0, 0->1, 1->0, 1->1]`).
    TwoState { p: f64, q: f64, increments: Box<[IncrementLaw; 4]> },
    /// Strictly positive k-state transition matrix (uniform ergodicity via
    /// the Doeblin condition) with Gaussian increments whose means depend
    /// on the transition; `spread` scales the means, `seed` fixes the
    /// pseudo-random parameters.
    DoeblinKState { k: usize, dim: usize, spread: f64, seed: u64 },
    /// Contractive Gaussian AR(1).
    Ar1Gaussian { a: RMat, noise: IncrementLaw },
}

pub fn gallery(spec: &GallerySpec) -> Result<GalleryModel, MarkovError> {
    match spec {
        GallerySpec::Iid { law } => Ok(GalleryModel::FiniteState(MarkovAdditiveProcess::iid(
            law.clone(),
        )?)),
        GallerySpec::TwoState { p, q, increments } => {
            let rows = RMat::from_row_slice(2, 2, &[1.0 - p, *p, *q, 1.0 - q]);
            let t = TransitionMatrix::new(rows)?;
            let map = MarkovAdditiveProcess::new(
                StateSpace::numbered(2),
                t,
                increments.to_vec(),
                increments[0].dim(),
            )?;
            Ok(GalleryModel::FiniteState(map))
        }
        GallerySpec::DoeblinKState { k, dim, spread, seed } => {
            Ok(GalleryModel::FiniteState(doeblin_k_state(*k, *dim, *spread, *seed)?))
        }
        GallerySpec::Ar1Gaussian { a, noise } => Ok(GalleryModel::Ar(ContinuousARModel::new(
            a.clone(),
            noise.clone(),
        )?)),
    }
}

/// Strictly positive transition matrix mixed toward uniform, Gaussian
/// increment laws with transition-dependent means; centered before return.
fn doeblin_k_state(
    k: usize,
    dim: usize,
    spread: f64,
    seed: u64,
) -> Result<MarkovAdditiveProcess, MarkovError> {
    if k == 0 {
        return Err(MarkovError::EmptyStateSpace);
    }
    let mut rng = stream_rng(seed, 0xD0EB);
    let mut rows = RMat::zeros(k, k);
    for i in 0..k {
        let mut sum = 0.0;
        for j in 0..k {
            let v = 0.4 / k as f64 + rng.gen::<f64>();
            rows[(i, j)] = v;
            sum += v;
        }
        for j in 0..k {
            rows[(i, j)] /= sum;
        }
    }
    let t = TransitionMatrix::with_tolerance(rows, 1e-9)?;
    // Renormalize exactly to the 1e-12 contract.
    let mut exact = t.matrix().clone();
    for i in 0..k {
        let s: f64 = (0..k).map(|j| exact[(i, j)]).sum();
        for j in 0..k {
            exact[(i, j)] /= s;
        }
    }
    let t = TransitionMatrix::new(exact)?;
    let mut laws = Vec::with_capacity(k * k);
    for _x in 0..k {
        for _y in 0..k {
            let mean: Vec<f64> = (0..dim).map(|_| spread * (rng.gen::<f64>() - 0.5)).collect();
            let mut cov = RMat::zeros(dim, dim);
            for i in 0..dim {
                cov[(i, i)] = 0.8 + 0.4 * rng.gen::<f64>();
            }
            // Mild off-diagonal coupling, kept diagonally dominant.
            for i in 0..dim {
                for j in (i + 1)..dim {
                    let c = 0.15 * (rng.gen::<f64>() - 0.5);
                    cov[(i, j)] = c;
                    cov[(j, i)] = c;
                }
            }
            laws.push(IncrementLaw::gaussian(mean, cov)?);
        }
    }
    MarkovAdditiveProcess::new(StateSpace::numbered(k), t, laws, dim)?.center()
}

/// The two-state reference model with autocorrelated Gaussian increments,
/// used by the covariance cross-checks.
pub fn two_state_reference() -> MarkovAdditiveProcess {
    let p = 0.3;
    let q = 0.4;
    let mk = |m: [f64; 3], v: [f64; 3]| {
        let mut cov = RMat::zeros(3, 3);
        for i in 0..3 {
            cov[(i, i)] = v[i];
        }
        IncrementLaw::gaussian(m.to_vec(), cov).unwrap()
    };
    let spec = GallerySpec::TwoState {
        p,
        q,
        increments: Box::new([
            mk([0.6, 0.1, -0.2], [1.0, 0.8, 1.2]),
            mk([-0.4, 0.5, 0.3], [0.9, 1.1, 0.7]),
            mk([0.2, -0.6, 0.4], [1.2, 0.9, 1.0]),
            mk([-0.5, 0.2, -0.3], [0.8, 1.0, 1.1]),
        ]),
    };
    match gallery(&spec).unwrap() {
        GalleryModel::FiniteState(m) => m.center().unwrap(),
        GalleryModel::Ar(_) => unreachable!(),
    }
}

/// Simple symmetric walk on `Z^3`: centered, full-dimensional, lattice.
/// Negative control for the nonlattice diagnostics and the Fourier route.
pub fn lattice_negative_control() -> MarkovAdditiveProcess {
    let e = |k: usize, s: f64| {
        let mut v = vec![0.0; 3];
        v[k] = s;
        IncrementLaw::point_mass(v)
    };
    let comps = vec![
        e(0, 1.0),
        e(0, -1.0),
        e(1, 1.0),
        e(1, -1.0),
        e(2, 1.0),
        e(2, -1.0),
    ];
    let law = IncrementLaw::mixture(vec![1.0 / 6.0; 6], comps).unwrap();
    MarkovAdditiveProcess::iid(law).unwrap()
}

/// Named presets for the CLI.
pub fn gallery_by_name(name: &str, seed: u64) -> Result<GalleryModel, MarkovError> {
    match name {
        "iid-gaussian" => gallery(&GallerySpec::Iid {
            law: IncrementLaw::isotropic_gaussian(vec![0.0; 3], 1.0)?,
        }),
        "two-state" => Ok(GalleryModel::FiniteState(two_state_reference())),
        "doeblin-3" => gallery(&GallerySpec::DoeblinKState { k: 3, dim: 3, spread: 0.8, seed }),
        "lattice-negative-control" => Ok(GalleryModel::FiniteState(lattice_negative_control())),
        "ar1-gaussian" => gallery(&GallerySpec::Ar1Gaussian {
            a: RMat::identity(3, 3) * 0.5,
            noise: IncrementLaw::isotropic_gaussian(vec![0.0; 3], 1.0)?,
        }),
        other => Err(MarkovError::UnknownModel(other.to_string())),
    }
}
