//! Partial derivatives of sampled fields on the sphere grid.
//!
//! Longitude derivatives are trigonometric (FFT). Colatitude derivatives come
//! in two flavours:
//!
//! * [`DiffScheme::Spectral`] — per longitude mode, the φ-profile is expanded
//!   either as a polynomial in x = cos φ or as sin φ times such a polynomial,
//!   whichever Legendre expansion has the smaller high-degree tail, and the
//!   derivative is synthesized from the expansion. Profiles of both pole
//!   parities (scalar components and frame components of smooth fields, and
//!   every trigonometric polynomial in φ) are differentiated to roundoff.
//! * [`DiffScheme::FdPhi`] / [`DiffScheme::Fd`] — local polynomial
//!   differentiation of a chosen order on the (non-uniform) φ nodes, with
//!   one-sided stencils near the poles. `FdPhi` keeps the spectral θ
//!   derivative; `Fd` applies centered periodic stencils in θ as well.
//!   These are the fallback for fields that are only piecewise smooth
//!   (conical solutions, glued 2D profiles), where a global expansion would
//!   pollute the residuals.

use crate::fourier::{fft_forward, fft_inverse};
use crate::grid::SphereGrid;
use rustfft::num_complex::Complex64;

/// How φ (and θ) derivatives are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffScheme {
    /// Adaptive Legendre expansion in φ, FFT in θ.
    Spectral,
    /// Finite differences of the given order in φ, FFT in θ.
    FdPhi(usize),
    /// Finite differences of the given order in both directions.
    Fd(usize),
}

impl Default for DiffScheme {
    fn default() -> Self {
        DiffScheme::Spectral
    }
}

/// ∂s/∂φ at the nodes.
pub fn d_phi(grid: &SphereGrid, values: &[f64], scheme: DiffScheme) -> Vec<f64> {
    match scheme {
        DiffScheme::Spectral => d_phi_spectral(grid, values),
        DiffScheme::FdPhi(p) | DiffScheme::Fd(p) => d_phi_fd(grid, values, p),
    }
}

/// ∂s/∂θ at the nodes.
pub fn d_theta(grid: &SphereGrid, values: &[f64], scheme: DiffScheme) -> Vec<f64> {
    match scheme {
        DiffScheme::Spectral | DiffScheme::FdPhi(_) => {
            crate::fourier::theta_derivative_rows(values, grid.nlat, grid.nlon)
        }
        DiffScheme::Fd(p) => d_theta_fd(grid, values, p),
    }
}

// ---------------------------------------------------------------------------
// Spectral φ derivative
// ---------------------------------------------------------------------------

/// Fraction of the Legendre spectrum treated as "tail" when choosing the
/// representation of a profile.
const TAIL_FRACTION: f64 = 0.75;

fn d_phi_spectral(grid: &SphereGrid, values: &[f64]) -> Vec<f64> {
    let (nlat, nlon) = (grid.nlat, grid.nlon);
    let table = grid.assoc_table(0);
    let nmodes = nlon;
    // Forward FFT of every latitude row.
    let mut spec = vec![Complex64::default(); nlat * nlon];
    let mut row = vec![Complex64::default(); nlon];
    for i in 0..nlat {
        for j in 0..nlon {
            row[j] = Complex64::new(values[i * nlon + j], 0.0);
        }
        fft_forward(&mut row);
        spec[i * nlon..(i + 1) * nlon].copy_from_slice(&row);
    }

    let l_tail = ((nlat as f64) * TAIL_FRACTION) as usize;
    let mut dspec = vec![Complex64::default(); nlat * nlon];
    let mut g = vec![Complex64::default(); nlat];
    let mut q = vec![Complex64::default(); nlat];
    let mut ca = vec![Complex64::default(); nlat];
    let mut cb = vec![Complex64::default(); nlat];

    for k in 0..nmodes {
        for i in 0..nlat {
            g[i] = spec[i * nlon + k];
            q[i] = g[i] / grid.sin_phi[i];
        }
        analyze(grid, &table.p, &g, &mut ca);
        analyze(grid, &table.p, &q, &mut cb);
        // Relative floor: quadrature roundoff in the analysis would otherwise
        // be amplified by |P̄_l'| ~ l² in the derivative synthesis (constants
        // must differentiate to exact zero).
        for c in [&mut ca, &mut cb] {
            let cmax = c.iter().fold(0.0f64, |m, v| m.max(v.norm()));
            let floor = 1e-14 * cmax;
            for v in c.iter_mut() {
                if v.norm() < floor {
                    *v = Complex64::default();
                }
            }
        }
        let (ta, tb) = (tail_energy(&ca, l_tail), tail_energy(&cb, l_tail));
        if ta <= tb {
            // g = Σ c_l P̄_l(x):  ∂φ g = -sinφ Σ c_l P̄_l'(x).
            for i in 0..nlat {
                let mut d = Complex64::default();
                for (l, c) in ca.iter().enumerate() {
                    d += *c * table.dp[l][i];
                }
                dspec[i * nlon + k] = -grid.sin_phi[i] * d;
            }
        } else {
            // g = sinφ Σ c_l P̄_l(x):  ∂φ g = cosφ·q - sin²φ Σ c_l P̄_l'(x).
            for i in 0..nlat {
                let mut d = Complex64::default();
                for (l, c) in cb.iter().enumerate() {
                    d += *c * table.dp[l][i];
                }
                let s = grid.sin_phi[i];
                dspec[i * nlon + k] = grid.x_nodes[i] * q[i] - s * s * d;
            }
        }
    }

    // Inverse FFT back to values.
    let mut out = vec![0.0; nlat * nlon];
    for i in 0..nlat {
        row.copy_from_slice(&dspec[i * nlon..(i + 1) * nlon]);
        fft_inverse(&mut row);
        for j in 0..nlon {
            out[i * nlon + j] = row[j].re;
        }
    }
    out
}

/// Legendre analysis of a complex profile by Gauss quadrature:
/// c_l = 2π Σ_i w_i g_i P̄_l(x_i).
fn analyze(grid: &SphereGrid, p: &[Vec<f64>], g: &[Complex64], out: &mut [Complex64]) {
    let two_pi = 2.0 * std::f64::consts::PI;
    for (l, cl) in out.iter_mut().enumerate() {
        let mut acc = Complex64::default();
        for i in 0..grid.nlat {
            acc += g[i] * (grid.lat_weights[i] * p[l][i]);
        }
        *cl = acc * two_pi;
    }
}

fn tail_energy(c: &[Complex64], l_tail: usize) -> f64 {
    let total: f64 = c.iter().map(|v| v.norm_sqr()).sum();
    let tail: f64 = c[l_tail..].iter().map(|v| v.norm_sqr()).sum();
    tail / (total + 1e-300)
}

// ---------------------------------------------------------------------------
// Finite differences
// ---------------------------------------------------------------------------

/// Fornberg weights for the first derivative at `xi` from the given nodes.
fn fornberg_weights(xi: f64, nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    // c[k][j]: weight of node j for derivative order k (k = 0, 1).
    let mut c = vec![[0.0f64; 2]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - xi;
    for i in 1..n {
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - xi;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                c[i][1] = c1 * (c[i - 1][0] - c5 * c[i - 1][1]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            c[j][1] = (c4 * c[j][1] - c[j][0]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|w| w[1]).collect()
}

fn d_phi_fd(grid: &SphereGrid, values: &[f64], order: usize) -> Vec<f64> {
    let (nlat, nlon) = (grid.nlat, grid.nlon);
    let width = order + 1;
    assert!(nlat >= width, "grid too coarse for FD order {order}");
    let mut out = vec![0.0; values.len()];
    for i in 0..nlat {
        let lo = i
            .saturating_sub(width / 2)
            .min(nlat - width);
        let nodes = &grid.phi_nodes[lo..lo + width];
        let w = fornberg_weights(grid.phi_nodes[i], nodes);
        for j in 0..nlon {
            let mut d = 0.0;
            for (k, wk) in w.iter().enumerate() {
                d += wk * values[(lo + k) * nlon + j];
            }
            out[i * nlon + j] = d;
        }
    }
    out
}

fn d_theta_fd(grid: &SphereGrid, values: &[f64], order: usize) -> Vec<f64> {
    let (nlat, nlon) = (grid.nlat, grid.nlon);
    let width = order + 1;
    let half = width / 2;
    let h = grid.dtheta();
    // Centered stencil on uniform periodic nodes.
    let nodes: Vec<f64> = (0..width).map(|k| (k as f64 - half as f64) * h).collect();
    let w = fornberg_weights(0.0, &nodes);
    let mut out = vec![0.0; values.len()];
    for i in 0..nlat {
        for j in 0..nlon {
            let mut d = 0.0;
            for (k, wk) in w.iter().enumerate() {
                let jj = (j + nlon + k - half) % nlon;
                d += wk * values[i * nlon + jj];
            }
            out[i * nlon + j] = d;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{ScalarField, SphereGrid};

    #[test]
    fn spectral_exact_on_even_parity_profile() {
        // cos φ · cos θ is poly-in-x times one Fourier mode.
        let g = SphereGrid::build(16, 16).unwrap();
        let s = ScalarField::from_fn(&g, |phi, th| phi.cos() * th.cos());
        let d = d_phi(&g, &s.values, DiffScheme::Spectral);
        for (k, (&phi, _)) in iter_nodes(&g).enumerate() {
            let exact = -phi.sin() * g.theta_nodes[k % g.nlon].cos();
            assert!((d[k] - exact).abs() < 1e-12, "{}", (d[k] - exact).abs());
        }
    }

    #[test]
    fn spectral_exact_on_odd_parity_profile() {
        // sin φ (m = 0) and sin²φ (also a polynomial) both differentiate exactly.
        let g = SphereGrid::build(16, 8).unwrap();
        for (f, df) in [
            (
                Box::new(|phi: f64| phi.sin()) as Box<dyn Fn(f64) -> f64>,
                Box::new(|phi: f64| phi.cos()) as Box<dyn Fn(f64) -> f64>,
            ),
            (
                Box::new(|phi: f64| phi.sin() * phi.sin()),
                Box::new(|phi: f64| 2.0 * phi.sin() * phi.cos()),
            ),
            (
                Box::new(|phi: f64| phi.sin() * phi.cos()),
                Box::new(|phi: f64| (2.0 * phi).cos()),
            ),
        ] {
            let s = ScalarField::from_fn(&g, |phi, _| f(phi));
            let d = d_phi(&g, &s.values, DiffScheme::Spectral);
            for (k, (&phi, _)) in iter_nodes(&g).enumerate() {
                assert!((d[k] - df(phi)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fd_converges_at_design_order() {
        let f = |phi: f64| (2.0 * phi).sin().exp();
        let df = |phi: f64| 2.0 * (2.0 * phi).cos() * (2.0 * phi).sin().exp();
        let mut errs = Vec::new();
        for nlat in [32usize, 64] {
            let g = SphereGrid::build(nlat, 4).unwrap();
            let s = ScalarField::from_fn(&g, |phi, _| f(phi));
            let d = d_phi(&g, &s.values, DiffScheme::FdPhi(4));
            // interior nodes only: edge stencils are one-sided and carry a
            // larger constant at the same order
            let e = (3 * g.nlon..g.len() - 3 * g.nlon)
                .map(|k| (d[k] - df(g.phi_nodes[k / g.nlon])).abs())
                .fold(0.0f64, f64::max);
            errs.push(e);
        }
        let rate = (errs[0] / errs[1]).log2();
        assert!(rate > 3.5, "observed order {rate}, errors {errs:?}");
    }

    #[test]
    fn fd_theta_matches_fft_on_trig() {
        let g = SphereGrid::build(8, 32).unwrap();
        let s = ScalarField::from_fn(&g, |_, th| (2.0 * th).sin());
        let d_fft = d_theta(&g, &s.values, DiffScheme::Spectral);
        let d_fd = d_theta(&g, &s.values, DiffScheme::Fd(6));
        // agreement within the FD6 error model at this coarse nlon
        for k in 0..g.len() {
            assert!((d_fft[k] - d_fd[k]).abs() < 1e-4);
        }
    }

    fn iter_nodes(g: &SphereGrid) -> impl Iterator<Item = (&f64, &f64)> + '_ {
        g.phi_nodes
            .iter()
            .flat_map(move |p| g.theta_nodes.iter().map(move |t| (p, t)))
    }
}
