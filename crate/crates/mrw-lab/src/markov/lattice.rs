//! Numerical lattice diagnostics.
//!
//! A lattice (or lattice-up-to-coboundary) walk keeps the spectral radius
//! of the twisted operator `Q(t)` at 1 on a dual lattice; a nonlattice walk
//! keeps it strictly below 1 away from `t = 0`. The condition quantifies
//! over all subgroups and coboundaries and is not finitely checkable, so it
//! is diagnosed on a grid: the report carries the grid and the margin so
//! callers can judge the resolution limit themselves.

use super::MarkovAdditiveProcess;
use crate::linalg::spectral_radius_robust;
use crate::rng::stream_rng;
use crate::spectral::operator::fourier_operator;
use rand::Rng;

#[derive(Debug, Clone)]
pub struct LatticeReport {
    /// Largest spectral radius seen on the grid.
    pub max_radius: f64,
    /// Grid point achieving it.
    pub worst_t: Vec<f64>,
    /// Radius at or above `1 - tol` somewhere: lattice suspect.
    pub flagged: bool,
    /// Number of grid points inspected.
    pub grid_len: usize,
}

/// Max over the grid of the spectral radius of `Q(t)`.
///
/// Grid points must stay away from a ball around the origin (the radius is
/// 1 at `t = 0` for every model).
pub fn nonlattice_diagnostic(
    map: &MarkovAdditiveProcess,
    grid: &[Vec<f64>],
    flag_tol: f64,
) -> LatticeReport {
    assert!(!grid.is_empty(), "diagnostic grid must be nonempty");
    let mut max_radius = f64::NEG_INFINITY;
    let mut worst_t = grid[0].clone();
    for t in grid {
        let norm: f64 = t.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(norm > 1e-9, "grid must exclude a ball around 0");
        let q = fourier_operator(map, t);
        let rho = spectral_radius_robust(&q.matrix, 1e-12, 100_000);
        if rho > max_radius {
            max_radius = rho;
            worst_t = t.clone();
        }
    }
    LatticeReport {
        max_radius,
        worst_t,
        flagged: max_radius >= 1.0 - flag_tol,
        grid_len: grid.len(),
    }
}

/// Default diagnostic grid: +/- axis points at several radii (including
/// `2 pi`, the dual point of integer lattices), plus seeded random
/// directions at mixed radii.
pub fn default_lattice_grid(dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let radii = [0.5, 1.0, 2.0, 4.0, 2.0 * std::f64::consts::PI, 8.0];
    let mut grid = Vec::new();
    for &r in &radii {
        for k in 0..dim {
            for s in [-1.0, 1.0] {
                let mut t = vec![0.0; dim];
                t[k] = s * r;
                grid.push(t);
            }
        }
    }
    let mut rng = stream_rng(seed, 0x9A1D);
    for _ in 0..24 {
        let mut t: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() - 0.5).collect();
        let norm: f64 = t.iter().map(|x| x * x).sum::<f64>().sqrt();
        let r = 0.3 + 7.0 * rng.gen::<f64>();
        for x in t.iter_mut() {
            *x *= r / norm;
        }
        grid.push(t);
    }
    grid
}
