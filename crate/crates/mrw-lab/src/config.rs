//! Tolerance and budget profiles shared by every module.
//!
//! All numeric thresholds used by invariant checks and error contracts live
//! in [`ToleranceProfile`]; all quadrature/Monte Carlo sizing knobs live in
//! [`QuadBudget`]. Both serialize, so a resolved experiment configuration can
//! be hashed and embedded in output records.

use serde::{Deserialize, Serialize};

/// Every tolerance used by the crate, with its default.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ToleranceProfile {
    /// Row sums of a transition matrix must be 1 within this.
    pub row_sum: f64,
    /// `pi P = pi` residual for a stationary distribution.
    pub stationary: f64,
    /// A model counts as centered when the stationary drift is below this.
    pub centering: f64,
    /// Spectral radius at or above `1 - lattice_flag` marks a grid point as
    /// lattice-suspect.
    pub lattice_flag: f64,
    /// `Pi^2 = Pi` / rank-one residual beyond which an eigenprojection is
    /// rejected.
    pub projection_failed: f64,
    /// Strict projector residual expected at accepted points (t = 0 checks).
    pub projection_strict: f64,
    /// Agreement between the contour eigenvalue and the quotient-formula
    /// eigenvalue.
    pub two_route_lambda: f64,
    /// Residual of `mu(Q(t)^n f) = lambda^n L + R_n`.
    pub expansion_identity: f64,
    /// Relative residual contract for resolvent solves.
    pub resolvent_residual: f64,
    /// Conditioning cap beyond which a resolvent solve reports
    /// `SingularResolvent`.
    pub resolvent_cond_max: f64,
    /// Power iteration: eigen-residual tolerance (relative to the matrix
    /// norm) and iteration cap.
    pub power_iter_tol: f64,
    pub power_iter_cap: usize,
    /// Minimal spectral gap `1 - rho_2` accepted when choosing the contour
    /// parameter kappa.
    pub gap_min: f64,
    /// Finite-difference step for derivatives of `lambda` at 0.
    pub fd_step: f64,
    /// Drift of a centered model (`grad lambda(0)/i`) must vanish within
    /// this.
    pub grad_centered: f64,
    /// Finite-difference drift must match the exact drift within this on
    /// uncentered models.
    pub grad_drift: f64,
    /// Relative agreement between the finite-difference covariance and the
    /// moment recursion at n = 500.
    pub cov_rel: f64,
    /// Absolute agreement with the autocovariance-series oracle.
    pub cov_series_abs: f64,
    /// Fraction of the Monte Carlo standard error the tail bound may occupy.
    pub tail_fraction: f64,
}

impl Default for ToleranceProfile {
    fn default() -> Self {
        ToleranceProfile {
            row_sum: 1e-12,
            stationary: 1e-10,
            centering: 1e-12,
            lattice_flag: 1e-9,
            projection_failed: 1e-6,
            projection_strict: 1e-9,
            two_route_lambda: 1e-8,
            expansion_identity: 1e-8,
            resolvent_residual: 1e-10,
            resolvent_cond_max: 1e14,
            power_iter_tol: 1e-12,
            power_iter_cap: 100_000,
            gap_min: 1e-6,
            fd_step: 1e-3,
            grad_centered: 1e-7,
            grad_drift: 1e-6,
            cov_rel: 0.02,
            cov_series_abs: 1e-4,
            tail_fraction: 0.1,
        }
    }
}

impl ToleranceProfile {
    /// The named profiles accepted by the CLI.
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "default" => Some(Self::default()),
            _ => None,
        }
    }
}

/// Node counts and sampling budgets.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct QuadBudget {
    /// Contour nodes for standalone eigenprojection / remainder operations.
    pub contour_nodes: usize,
    /// Contour nodes on Gamma_1 (around z = 1) in the cubature hot path.
    pub contour_nodes_g1: usize,
    /// Contour nodes on Gamma_0 (around z = 0) in the cubature hot path.
    pub contour_nodes_g0: usize,
    /// Gauss-Legendre points per radial panel.
    pub radial_points: usize,
    /// Base number of polar (cos theta) nodes; grows with the phase
    /// `r_max * |a|`.
    pub polar_base: usize,
    /// Azimuthal trapezoid nodes.
    pub azimuth_points: usize,
    /// Refinement factor between the two budget levels used for the
    /// quadrature error estimate.
    pub refine_num: usize,
    pub refine_den: usize,
    /// Monte Carlo: trajectories, unless a caller overrides.
    pub mc_trajectories: usize,
    /// Monte Carlo: `n_max = mc_nmax_multiple * <Sigma^{-1}a, a>` when the
    /// tail correction is CLT-based (an exactly Gaussian model uses
    /// `mc_nmax_multiple_exact`).
    pub mc_nmax_multiple: f64,
    pub mc_nmax_multiple_exact: f64,
    /// Batches for the batch-means standard error.
    pub mc_batches: usize,
}

impl Default for QuadBudget {
    fn default() -> Self {
        QuadBudget {
            contour_nodes: 128,
            contour_nodes_g1: 64,
            contour_nodes_g0: 128,
            radial_points: 12,
            polar_base: 24,
            azimuth_points: 24,
            refine_num: 3,
            refine_den: 2,
            mc_trajectories: 60_000,
            mc_nmax_multiple: 48.0,
            mc_nmax_multiple_exact: 8.0,
            mc_batches: 64,
        }
    }
}

impl QuadBudget {
    /// Reduced budget for smoke runs and CLI tests.
    pub fn quick() -> Self {
        QuadBudget {
            contour_nodes: 64,
            contour_nodes_g1: 48,
            contour_nodes_g0: 96,
            radial_points: 8,
            polar_base: 16,
            azimuth_points: 16,
            refine_num: 3,
            refine_den: 2,
            mc_trajectories: 4_000,
            mc_nmax_multiple: 10.0,
            mc_nmax_multiple_exact: 4.0,
            mc_batches: 32,
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "full" => Some(Self::default()),
            "quick" => Some(Self::quick()),
            _ => None,
        }
    }

    /// The second budget level used for error estimation.
    pub fn refined(&self) -> Self {
        let mut r = self.clone();
        let scale = |v: usize| (v * self.refine_num).div_ceil(self.refine_den);
        r.radial_points = scale(self.radial_points);
        r.polar_base = scale(self.polar_base);
        r.azimuth_points = scale(self.azimuth_points);
        r
    }
}
