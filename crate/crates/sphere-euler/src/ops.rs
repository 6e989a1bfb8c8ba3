//! First-order operators, Laplace–Beltrami, spherical harmonics and the
//! Poisson solver on the sphere grid.
//!
//! Conventions (fixed once and reused everywhere):
//!
//! * `grad s = (∂φ s, (sin φ)⁻¹ ∂θ s)` in the unit frame;
//! * `div (a, b) = a_φ + a cot φ + (sin φ)⁻¹ b_θ`;
//! * `curl (a, b) = b_φ + b cot φ − (sin φ)⁻¹ a_θ` (the scalar ⋆d of the
//!   dual 1-form);
//! * `perp (a, b) = (−b, a)`, the quarter turn counterclockwise relative to
//!   the outward normal, so that `e_φ ↦ e_θ`.
//!
//! These satisfy `curl ∘ grad = 0`, `div ∘ perp = −curl`,
//! `curl ∘ perp = div`, hence `curl(perp(grad s)) = Δs` and
//! `div(perp(grad s)) = 0`, and they make the pointwise identity
//! `v∇v − ½∇|v|² = ω v⊥` hold — which is what the momentum equation needs.
//! The Laplacian has spectrum Δ Y_l^m = −l(l+1) Y_l^m.

use crate::diff::{d_phi, d_theta, DiffScheme};
use crate::fourier::{fft_forward, fft_inverse, wavenumber};
use crate::grid::{quadrature, ScalarField, SphereGrid, TangentField};
use crate::{Error, Result};
use rustfft::num_complex::Complex64;
use std::sync::Arc;

/// Spherical gradient (spectral differentiation).
pub fn grad(s: &ScalarField) -> TangentField {
    grad_with(s, DiffScheme::Spectral)
}

pub fn grad_with(s: &ScalarField, scheme: DiffScheme) -> TangentField {
    let g = &s.grid;
    let dphi = d_phi(g, &s.values, scheme);
    let dth = d_theta(g, &s.values, scheme);
    let mut b = dth;
    for i in 0..g.nlat {
        let inv_s = 1.0 / g.sin_phi[i];
        for j in 0..g.nlon {
            b[i * g.nlon + j] *= inv_s;
        }
    }
    TangentField { grid: g.clone(), a: dphi, b }
}

/// Divergence a_φ + a cot φ + (sin φ)⁻¹ b_θ.
pub fn div(w: &TangentField) -> ScalarField {
    div_with(w, DiffScheme::Spectral)
}

pub fn div_with(w: &TangentField, scheme: DiffScheme) -> ScalarField {
    let g = &w.grid;
    let da = d_phi(g, &w.a, scheme);
    let db = d_theta(g, &w.b, scheme);
    let mut values = vec![0.0; g.len()];
    for i in 0..g.nlat {
        let cot = g.x_nodes[i] / g.sin_phi[i];
        let inv_s = 1.0 / g.sin_phi[i];
        for j in 0..g.nlon {
            let k = i * g.nlon + j;
            values[k] = da[k] + w.a[k] * cot + db[k] * inv_s;
        }
    }
    ScalarField { grid: g.clone(), values }
}

/// Scalar vorticity b_φ + b cot φ − (sin φ)⁻¹ a_θ.
pub fn curl(w: &TangentField) -> ScalarField {
    curl_with(w, DiffScheme::Spectral)
}

pub fn curl_with(w: &TangentField, scheme: DiffScheme) -> ScalarField {
    let g = &w.grid;
    let db = d_phi(g, &w.b, scheme);
    let da = d_theta(g, &w.a, scheme);
    let mut values = vec![0.0; g.len()];
    for i in 0..g.nlat {
        let cot = g.x_nodes[i] / g.sin_phi[i];
        let inv_s = 1.0 / g.sin_phi[i];
        for j in 0..g.nlon {
            let k = i * g.nlon + j;
            values[k] = db[k] + w.b[k] * cot - da[k] * inv_s;
        }
    }
    ScalarField { grid: g.clone(), values }
}

/// Quarter turn (a, b) ↦ (−b, a); perp∘perp = −id and |perp w| = |w|.
pub fn perp(w: &TangentField) -> TangentField {
    TangentField {
        grid: w.grid.clone(),
        a: w.b.iter().map(|v| -v).collect(),
        b: w.a.clone(),
    }
}

/// Directional derivative w·∇s = a ∂φ s + b (sin φ)⁻¹ ∂θ s.
pub fn advect(w: &TangentField, s: &ScalarField) -> ScalarField {
    advect_with(w, s, DiffScheme::Spectral)
}

pub fn advect_with(w: &TangentField, s: &ScalarField, scheme: DiffScheme) -> ScalarField {
    let gs = grad_with(s, scheme);
    ScalarField {
        grid: s.grid.clone(),
        values: (0..s.values.len())
            .map(|k| w.a[k] * gs.a[k] + w.b[k] * gs.b[k])
            .collect(),
    }
}

/// Covariant derivative v∇w of a tangent field along a tangent field,
/// in the unit frame (cot φ Christoffel corrections included).
pub fn covariant_derivative(v: &TangentField, w: &TangentField, scheme: DiffScheme) -> TangentField {
    let g = &v.grid;
    let wa = ScalarField { grid: g.clone(), values: w.a.clone() };
    let wb = ScalarField { grid: g.clone(), values: w.b.clone() };
    let da = advect_with(v, &wa, scheme);
    let db = advect_with(v, &wb, scheme);
    let mut a = da.values;
    let mut b = db.values;
    for i in 0..g.nlat {
        let cot = g.x_nodes[i] / g.sin_phi[i];
        for j in 0..g.nlon {
            let k = i * g.nlon + j;
            a[k] -= v.b[k] * w.b[k] * cot;
            b[k] += v.b[k] * w.a[k] * cot;
        }
    }
    TangentField { grid: g.clone(), a, b }
}

/// Laplace–Beltrami as div(grad s); spectrum −l(l+1) on Y_l^m.
pub fn laplace_beltrami(s: &ScalarField) -> ScalarField {
    laplace_beltrami_with(s, DiffScheme::Spectral)
}

pub fn laplace_beltrami_with(s: &ScalarField, scheme: DiffScheme) -> ScalarField {
    div_with(&grad_with(s, scheme), scheme)
}

/// Real, unit-L²-norm spherical harmonic sampled on the grid.
///
/// m = 0 gives P̄_l(cos φ); m > 0 gives √2 P̄_l^m(cos φ) cos(mθ);
/// m < 0 gives √2 P̄_l^{|m|}(cos φ) sin(|m|θ).
pub fn sph_harmonic(l: usize, m: i64, grid: &Arc<SphereGrid>) -> Result<ScalarField> {
    let mu = m.unsigned_abs() as usize;
    if mu > l {
        return Err(Error::InvalidArgument(format!("|m| = {mu} exceeds l = {l}")));
    }
    let table = if l <= grid.lmax() && mu <= grid.lmax() {
        grid.assoc_table(mu)
    } else {
        Arc::new(crate::legendre::AssocLegendreTable::new(mu, l, &grid.x_nodes))
    };
    let row = &table.p[l - mu];
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut values = Vec::with_capacity(grid.len());
    for i in 0..grid.nlat {
        for &theta in &grid.theta_nodes {
            let v = match m.cmp(&0) {
                std::cmp::Ordering::Equal => row[i],
                std::cmp::Ordering::Greater => sqrt2 * row[i] * (m as f64 * theta).cos(),
                std::cmp::Ordering::Less => sqrt2 * row[i] * (mu as f64 * theta).sin(),
            };
            values.push(v);
        }
    }
    Ok(ScalarField { grid: grid.clone(), values })
}

/// Apply a diagonal-in-(l) spectral multiplier to a scalar field.
///
/// `lambda(l)` returns the multiplier for degree l, or `None` to drop the
/// mode; the second return value is the L² norm of everything dropped
/// (including longitude modes beyond the resolvable degree).
pub fn spectral_filter(
    s: &ScalarField,
    lambda: impl Fn(usize) -> Option<f64>,
) -> (ScalarField, f64) {
    let g = &s.grid;
    let (nlat, nlon) = (g.nlat, g.nlon);
    let lmax = g.lmax();
    let two_pi = 2.0 * std::f64::consts::PI;

    let mut spec = vec![Complex64::default(); nlat * nlon];
    let mut row = vec![Complex64::default(); nlon];
    for i in 0..nlat {
        for j in 0..nlon {
            row[j] = Complex64::new(s.values[i * nlon + j], 0.0);
        }
        fft_forward(&mut row);
        spec[i * nlon..(i + 1) * nlon].copy_from_slice(&row);
    }

    let mut dropped_sq = 0.0;
    let mut out_spec = vec![Complex64::default(); nlat * nlon];
    for k in 0..nlon {
        let mu = wavenumber(k, nlon).unsigned_abs() as usize;
        if mu > lmax {
            for i in 0..nlat {
                dropped_sq += spec[i * nlon + k].norm_sqr() * g.lat_weights[i] * two_pi;
            }
            continue;
        }
        let table = g.assoc_table(mu);
        let nl = lmax - mu + 1;
        // Analysis.
        let mut c = vec![Complex64::default(); nl];
        for (li, cl) in c.iter_mut().enumerate() {
            let mut acc = Complex64::default();
            for i in 0..nlat {
                acc += spec[i * nlon + k] * (g.lat_weights[i] * table.p[li][i]);
            }
            *cl = acc * two_pi;
        }
        // Multiply and synthesize.
        for (li, cl) in c.iter_mut().enumerate() {
            let l = mu + li;
            match lambda(l) {
                Some(f) => *cl *= f,
                None => {
                    dropped_sq += cl.norm_sqr() / two_pi;
                    *cl = Complex64::default();
                }
            }
        }
        for i in 0..nlat {
            let mut acc = Complex64::default();
            for (li, cl) in c.iter().enumerate() {
                acc += *cl * table.p[li][i];
            }
            out_spec[i * nlon + k] = acc;
        }
    }

    let mut values = vec![0.0; nlat * nlon];
    for i in 0..nlat {
        row.copy_from_slice(&out_spec[i * nlon..(i + 1) * nlon]);
        fft_inverse(&mut row);
        for j in 0..nlon {
            values[i * nlon + j] = row[j].re;
        }
    }
    (
        ScalarField { grid: g.clone(), values },
        dropped_sq.max(0.0).sqrt() / nlon as f64,
    )
}

/// Relative tolerance of the Poisson compatibility check |∫rhs| ≲ ‖rhs‖∞.
const POISSON_MEAN_TOL: f64 = 1e-8;

/// Solve Δu = rhs on S² for the mean-zero u.
///
/// Spherical-harmonic transform, divide by −l(l+1), zero the l = 0 mode.
/// Fails if the right-hand side has a mean beyond tolerance (the problem is
/// only solvable for mean-zero data on a closed surface).
pub fn poisson_solve(rhs: &ScalarField) -> Result<ScalarField> {
    let mean = quadrature(rhs) / (4.0 * std::f64::consts::PI);
    let scale = rhs.linf();
    // The compatibility check is relative; fields at the roundoff floor pass
    // through (their l = 0 mode is zeroed by the filter anyway). The floor
    // covers the ~lmax²·ε differentiation noise of an exactly-zero curl.
    if scale > 1e-10 && mean.abs() > POISSON_MEAN_TOL * scale {
        return Err(Error::NotSolvable(format!(
            "rhs has mean {mean:.3e} (‖rhs‖∞ = {scale:.3e})"
        )));
    }
    let (u, _) = spectral_filter(rhs, |l| {
        if l == 0 {
            Some(0.0)
        } else {
            Some(-1.0 / (l as f64 * (l as f64 + 1.0)))
        }
    });
    Ok(u)
}

/// Synthesize Σ c_i Y_{l_i}^{m_i} on the grid (band-limited test fields).
pub fn synthesize_harmonics(
    grid: &Arc<SphereGrid>,
    terms: &[(usize, i64, f64)],
) -> Result<ScalarField> {
    let mut out = ScalarField::zeros(grid.clone());
    for &(l, m, c) in terms {
        let y = sph_harmonic(l, m, grid)?;
        for (o, v) in out.values.iter_mut().zip(&y.values) {
            *o += c * v;
        }
    }
    Ok(out)
}
