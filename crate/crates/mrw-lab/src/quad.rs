//! Quadrature building blocks: Gauss-Legendre rules, composite panels, and
//! spherical-coordinate cubature over balls and shells in `R^3`.
//!
//! The spherical driver is the workhorse of the Fourier route. Writing the
//! volume element as `r^2 dr dsigma(omega)` removes the integrable
//! `1/<Sigma t,t>` singularity at the origin, and aligning the polar axis
//! with the shift vector `a` makes the oscillatory factor `exp(-i<t,a>)`
//! exactly `exp(-i r |a| u)` in the polar variable `u`, where a
//! Gauss-Legendre rule resolves it spectrally.

use crate::config::QuadBudget;
use crate::linalg::C64;
use rayon::prelude::*;

/// Compensated (Neumaier) accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    s: f64,
    c: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    pub fn total(&self) -> f64 {
        self.s + self.c
    }
}

/// Gauss-Legendre rule on `[-1, 1]`, nodes by Newton iteration on the
/// Legendre recurrence.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                // Legendre recurrence for P_n(x) and P_n'(x).
                let mut p0 = 1.0;
                let mut p1 = x;
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            weights[i] = w;
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// Nodes and weights mapped to `[lo, hi]`.
    pub fn mapped(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        self.nodes
            .iter()
            .zip(self.weights.iter())
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }
}

/// Composite Gauss-Legendre integral of a real function over `[lo, hi]`.
pub fn integrate_1d(lo: f64, hi: f64, panels: usize, points: usize, f: impl Fn(f64) -> f64) -> f64 {
    let gl = GaussLegendre::new(points);
    let mut acc = Neumaier::default();
    let step = (hi - lo) / panels as f64;
    for p in 0..panels {
        let a = lo + p as f64 * step;
        for (x, w) in gl.mapped(a, a + step) {
            acc.add(w * f(x));
        }
    }
    acc.total()
}

/// Householder reflection mapping `e3` to the unit vector along `axis`
/// (identity when `axis` is zero or already along `e3`).
fn frame_for_axis(axis: &[f64; 3]) -> [[f64; 3]; 3] {
    let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    if norm == 0.0 {
        return [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    }
    let u = [axis[0] / norm, axis[1] / norm, axis[2] / norm];
    let v = [u[0], u[1], u[2] - 1.0];
    let vv = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    if vv < 1e-30 {
        return [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    }
    let s = 2.0 / vv;
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] = if i == j { 1.0 } else { 0.0 };
            r[i][j] -= s * v[i] * v[j];
        }
    }
    r
}

fn apply_frame(r: &[[f64; 3]; 3], x: &[f64; 3]) -> [f64; 3] {
    [
        r[0][0] * x[0] + r[0][1] * x[1] + r[0][2] * x[2],
        r[1][0] * x[0] + r[1][1] * x[1] + r[1][2] * x[2],
        r[2][0] * x[0] + r[2][1] * x[1] + r[2][2] * x[2],
    ]
}

/// Node layout of a spherical cubature over `{ r_lo <= ||t|| <= r_hi }`.
#[derive(Debug, Clone)]
pub struct ShellRule {
    radial: Vec<(f64, f64)>,
    panels: usize,
    per_panel: usize,
    polar: GaussLegendre,
    n_phi: usize,
    frame: [[f64; 3]; 3],
}

impl ShellRule {
    /// `axis` is the direction of the shift vector `a` (the polar axis);
    /// `osc` its norm, which sets the radial panel density and the polar
    /// node count.
    pub fn new(r_lo: f64, r_hi: f64, axis: &[f64; 3], osc: f64, budget: &QuadBudget) -> Self {
        assert!(r_hi > r_lo && r_lo >= 0.0);
        let span = r_hi - r_lo;
        let panels = 2 + (span * (osc + 4.0) / (2.0 * std::f64::consts::PI)).ceil() as usize;
        let gl_r = GaussLegendre::new(budget.radial_points);
        let mut radial = Vec::with_capacity(panels * budget.radial_points);
        let step = span / panels as f64;
        for p in 0..panels {
            let a = r_lo + p as f64 * step;
            for (r, w) in gl_r.mapped(a, a + step) {
                radial.push((r, w));
            }
        }
        let k = r_hi * osc;
        let n_u = budget.polar_base + (0.62 * k).ceil() as usize;
        ShellRule {
            radial,
            panels,
            per_panel: budget.radial_points,
            polar: GaussLegendre::new(n_u),
            n_phi: budget.azimuth_points,
            frame: frame_for_axis(axis),
        }
    }

    pub fn node_count(&self) -> usize {
        self.radial.len() * self.polar.nodes.len() * self.n_phi
    }

    /// Integrates `K` complex-valued integrands simultaneously. The closure
    /// receives the Cartesian point `t`; the `r^2` Jacobian and all weights
    /// are applied here. Panel partials are reduced in a fixed order, so the
    /// result does not depend on the number of worker threads.
    pub fn integrate_multi<const K: usize>(
        &self,
        f: impl Fn(&[f64; 3]) -> [C64; K] + Sync,
    ) -> [C64; K] {
        let dphi = 2.0 * std::f64::consts::PI / self.n_phi as f64;
        let phis: Vec<(f64, f64)> = (0..self.n_phi)
            .map(|k| {
                let phi = dphi * k as f64;
                (phi.cos(), phi.sin())
            })
            .collect();
        let partials: Vec<[C64; K]> = (0..self.panels)
            .into_par_iter()
            .map(|p| {
                let mut acc_re = [Neumaier::default(); K];
                let mut acc_im = [Neumaier::default(); K];
                for idx in p * self.per_panel..(p + 1) * self.per_panel {
                    let (r, wr) = self.radial[idx];
                    let jac = wr * r * r;
                    for (u, wu) in self.polar.nodes.iter().zip(self.polar.weights.iter()) {
                        let su = (1.0 - u * u).max(0.0).sqrt();
                        let w_angular = jac * wu * dphi;
                        for &(cp, sp) in &phis {
                            let local = [r * su * cp, r * su * sp, r * u];
                            let t = apply_frame(&self.frame, &local);
                            let vals = f(&t);
                            for k in 0..K {
                                acc_re[k].add(w_angular * vals[k].re);
                                acc_im[k].add(w_angular * vals[k].im);
                            }
                        }
                    }
                }
                let mut out = [C64::new(0.0, 0.0); K];
                for k in 0..K {
                    out[k] = C64::new(acc_re[k].total(), acc_im[k].total());
                }
                out
            })
            .collect();
        let mut total = [C64::new(0.0, 0.0); K];
        for part in partials {
            for k in 0..K {
                total[k] += part[k];
            }
        }
        total
    }
}

/// Runs a shell integral at the base and refined budgets; returns the
/// refined values together with `|refined - base|` per component as the
/// quadrature error estimate.
pub fn integrate_shell_with_error<const K: usize>(
    r_lo: f64,
    r_hi: f64,
    axis: &[f64; 3],
    osc: f64,
    budget: &QuadBudget,
    f: impl Fn(&[f64; 3]) -> [C64; K] + Sync,
) -> ([C64; K], [f64; K]) {
    let base = ShellRule::new(r_lo, r_hi, axis, osc, budget).integrate_multi(&f);
    let fine = ShellRule::new(r_lo, r_hi, axis, osc, &budget.refined()).integrate_multi(&f);
    let mut err = [0.0; K];
    for k in 0..K {
        err[k] = (fine[k] - base[k]).norm();
    }
    (fine, err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let gl = GaussLegendre::new(8);
        // degree 15 is exact for an 8-point rule
        let val: f64 = gl
            .mapped(0.0, 1.0)
            .map(|(x, w)| w * (15.0 * x.powi(14)))
            .sum();
        assert_abs_diff_eq!(val, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn ball_volume() {
        let rule = ShellRule::new(0.0, 1.0, &[0.0, 0.0, 1.0], 0.0, &QuadBudget::default());
        let [v] = rule.integrate_multi(|_| [C64::new(1.0, 0.0)]);
        assert_abs_diff_eq!(v.re, 4.0 * std::f64::consts::PI / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn gaussian_fourier_transform_via_shell() {
        // int exp(-||t||^2/2) exp(-i<t,a>) dt = (2 pi)^{3/2} exp(-||a||^2/2)
        let a = [0.0, 3.0, 4.0];
        let na = 5.0;
        let rule = ShellRule::new(0.0, 14.0, &a, na, &QuadBudget::default());
        let [v] = rule.integrate_multi(|t| {
            let q = t[0] * t[0] + t[1] * t[1] + t[2] * t[2];
            let phase = -(t[0] * a[0] + t[1] * a[1] + t[2] * a[2]);
            [C64::from_polar((-0.5 * q).exp(), phase)]
        });
        let expected = (2.0 * std::f64::consts::PI).powf(1.5) * (-0.5 * na * na).exp();
        assert_abs_diff_eq!(v.re, expected, epsilon = 1e-10);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn singular_integrand_handled_by_jacobian() {
        // int_{||t||<=1} ||t||^{-2} dt = 4 pi
        let rule = ShellRule::new(0.0, 1.0, &[1.0, 0.0, 0.0], 0.0, &QuadBudget::default());
        let [v] = rule.integrate_multi(|t| {
            let q = t[0] * t[0] + t[1] * t[1] + t[2] * t[2];
            [C64::new(1.0 / q, 0.0)]
        });
        assert_abs_diff_eq!(v.re, 4.0 * std::f64::consts::PI, epsilon = 1e-10);
    }
}
