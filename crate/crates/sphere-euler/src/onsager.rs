//! Stream-field construction and the energy-flux functional.
//!
//! For α ≠ 2 every solution admits a stream-field Ψ = (ψ + h n̂)/|x|^{α-1}
//! with curl Ψ = V and div Ψ = 0, which on the sphere reads
//!
//! ```text
//! v = (2-α) ψ⊥ - ∇⊥h          (gauge a)
//! f = ⋆dψ = curl ψ            (gauge b)
//! (3-α) h + div ψ = 0         (gauge c)
//! ```
//!
//! The construction is one linear solve in harmonic space: decomposing
//! ψ = ∇q + ∇⊥χ, (gauge b) gives Δχ = f, and eliminating h = (2-α)q - γ
//! (γ = Δ⁻¹ curl v) from (gauge c) leaves the Helmholtz problem
//! [Δ + (2-α)(3-α)] q = (3-α) γ. At integer α the operator is resonant at
//! degree l = 2-α; for every constructed family the resonant coefficients of
//! γ vanish by symmetry, and any dropped resonant energy is reported.
//!
//! The Onsager flux functional of a solution is Π = -½ ∫ f H dσ; the moment
//! identities ∫ f Hⁿ dσ = 0 (n ≥ 1, and n = 0 for α ≠ 2) and
//! ∫ ω Hⁿ dσ = 0 (n ≥ 0) make it vanish on every solution family — the
//! absence of flux anomaly.

use crate::diff::DiffScheme;
use crate::families::HomogeneousSolution;
use crate::grid::{quadrature, ScalarField, TangentField};
use crate::ops::{curl_with, div_with, grad_with, perp, poisson_solve, spectral_filter};
use crate::residuals::{CheckOptions, ResidualReport};
use crate::{Error, Result};

/// Tangential and normal parts of a stream-field on the sphere.
#[derive(Debug, Clone)]
pub struct StreamField {
    pub psi: TangentField,
    pub h: ScalarField,
    pub alpha: f64,
    /// L² norm of resonant harmonic content dropped by the Helmholtz solve
    /// (zero for all families; nonzero would flag an obstruction).
    pub dropped_resonant: f64,
}

/// Relative threshold for treating a Helmholtz eigenvalue as resonant.
const RESONANCE_EPS: f64 = 1e-9;

/// Build the stream-field of a solution (α ≠ 2, mean-zero f).
pub fn build_stream_field(sol: &HomogeneousSolution) -> Result<StreamField> {
    let alpha = sol.alpha;
    if (alpha - 2.0).abs() < 1e-12 {
        return Err(Error::InvalidArgument(
            "stream-field requires α ≠ 2 (f has nonzero mean on the radial branch)".into(),
        ));
    }
    let mean_f = quadrature(&sol.f) / (4.0 * std::f64::consts::PI);
    if mean_f.abs() > 1e-8 * sol.f.linf().max(f64::MIN_POSITIVE) {
        return Err(Error::NotSolvable(format!(
            "f has mean {mean_f:.3e}; no exact 1-form potential exists"
        )));
    }
    let chi = poisson_solve(&sol.f)?;
    let omega = curl_with(&sol.v, DiffScheme::Spectral);
    let gamma = poisson_solve(&omega)?;
    let mu2 = (2.0 - alpha) * (3.0 - alpha);
    let (q, dropped) = spectral_filter(&gamma, |l| {
        let ev = mu2 - (l as f64) * (l as f64 + 1.0);
        if l == 0 || ev.abs() < RESONANCE_EPS * (1.0 + mu2.abs()) {
            None
        } else {
            Some((3.0 - alpha) / ev)
        }
    });
    let mut h = q.map(|v| (2.0 - alpha) * v);
    for (hv, g) in h.values.iter_mut().zip(&gamma.values) {
        *hv -= g;
    }
    let psi = grad_with(&q, DiffScheme::Spectral)
        .add(&perp(&grad_with(&chi, DiffScheme::Spectral)));
    Ok(StreamField { psi, h, alpha, dropped_resonant: dropped })
}

/// Residuals of the three gauge conditions for a stream-field.
pub fn check_stream_gauge(
    sol: &HomogeneousSolution,
    sf: &StreamField,
    tol: f64,
    opts: &CheckOptions,
) -> ResidualReport {
    let g = sol.grid();
    let alpha = sf.alpha;
    // (a) v - (2-α)ψ⊥ + ∇⊥h
    let recon = perp(&sf.psi)
        .scale(2.0 - alpha)
        .sub(&perp(&grad_with(&sf.h, opts.scheme)));
    let res_a = sol.v.sub(&recon);
    // (b) f - curl ψ
    let mut res_b = curl_with(&sf.psi, opts.scheme);
    for (r, f) in res_b.values.iter_mut().zip(&sol.f.values) {
        *r = f - *r;
    }
    // (c) (3-α)h + div ψ
    let mut res_c = div_with(&sf.psi, opts.scheme);
    for (r, h) in res_c.values.iter_mut().zip(&sf.h.values) {
        *r += (3.0 - alpha) * h;
    }
    let ra = ScalarField { grid: g.clone(), values: res_a.a.clone() };
    let rb = ScalarField { grid: g.clone(), values: res_a.b.clone() };
    let entries = vec![
        crate::residuals::masked_entry("gauge_a_phi", &ra, &opts.mask),
        crate::residuals::masked_entry("gauge_a_theta", &rb, &opts.mask),
        crate::residuals::masked_entry("gauge_b", &res_b, &opts.mask),
        crate::residuals::masked_entry("gauge_c", &res_c, &opts.mask),
    ];
    let pass = entries.iter().all(|e| e.linf <= tol);
    ResidualReport { equations: entries, grid: (g.nlat, g.nlon), tol, pass }
}

/// Energy-flux functional Π = -½ ∫ f H dσ.
pub fn flux(sol: &HomogeneousSolution) -> f64 {
    let h = sol.bernoulli();
    quadrature(&sol.f.zip_with(&h, |f, h| -0.5 * f * h))
}

/// One row of the vanishing-moment table.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct MomentRow {
    pub n: usize,
    pub f_moment: f64,
    pub omega_moment: f64,
}

/// |∫ f Hⁿ dσ| and |∫ ω Hⁿ dσ| for n = 0..=n_max.
pub fn moment_identities(
    sol: &HomogeneousSolution,
    n_max: usize,
    scheme: DiffScheme,
) -> Vec<MomentRow> {
    crate::residuals::moment_table(sol, n_max, scheme)
        .into_iter()
        .map(|(n, f_moment, omega_moment)| MomentRow { n, f_moment, omega_moment })
        .collect()
}
