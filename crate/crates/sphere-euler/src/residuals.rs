//! Residual verification of the reduced Euler system and its equivalent
//! formulations.
//!
//! The primary system on S² for spherical data (f, v, p) at homogeneity α:
//!
//! ```text
//! (2-α)f + div v = 0
//! v∇f = |v|² + αf² + 2αp
//! (1-α)f v + v∇v = -∇p
//! ```
//!
//! Derived formulations checked against it: the Bernoulli transport
//! v∇H = 2αfH with H = |v|² + f² + 2p; the vorticity-pair system
//! u×v = αH n̂, fu - ωv = -½∇⊥H with u = (1-α)v⊥ - ∇⊥f, ω = curl v; and the
//! stationary Lie-bracket (vorticity) equations. Each check reports L∞ and
//! weighted L² norms per equation, optionally restricted by a node mask so
//! that piecewise-smooth families can be verified away from their singular
//! circles.

use crate::diff::DiffScheme;
use crate::families::HomogeneousSolution;
use crate::grid::{quadrature, ScalarField, SphereGrid, TangentField};
use crate::ops::{advect_with, covariant_derivative, curl_with, div_with, grad_with, perp};
use serde::Serialize;

/// Node filter for residual norms: excluded colatitude/longitude bands.
#[derive(Debug, Clone, Default)]
pub struct Mask {
    /// (center, halfwidth) bands of φ to exclude.
    pub phi_bands: Vec<(f64, f64)>,
    /// (center, halfwidth) bands of θ to exclude (circular distance).
    pub theta_bands: Vec<(f64, f64)>,
    /// Exclude `pole_rings` node rows nearest each pole.
    pub pole_rings: usize,
}

impl Mask {
    pub fn none() -> Self {
        Self::default()
    }

    /// Exclude bands |φ - c| ≤ width around the given circles. The width is
    /// an absolute angle: near power-law circles (cone boundaries) the
    /// derivatives grow like dist^{-s}, so a resolution-independent margin is
    /// what makes finite-difference residuals both small and h^p-convergent.
    pub fn around_phi(circles: &[f64], width: f64) -> Self {
        Self {
            phi_bands: circles.iter().map(|&c| (c, width)).collect(),
            theta_bands: Vec::new(),
            pole_rings: 0,
        }
    }

    /// Exclude bands of circular distance ≤ width around longitudes.
    pub fn around_theta(circles: &[f64], width: f64) -> Self {
        Self {
            phi_bands: Vec::new(),
            theta_bands: circles.iter().map(|&c| (c, width)).collect(),
            pole_rings: 0,
        }
    }

    fn allows(&self, grid: &SphereGrid, i: usize, j: usize) -> bool {
        if i < self.pole_rings || i >= grid.nlat - self.pole_rings {
            return false;
        }
        let phi = grid.phi_nodes[i];
        for &(c, w) in &self.phi_bands {
            if (phi - c).abs() <= w {
                return false;
            }
        }
        let theta = grid.theta_nodes[j];
        let two_pi = 2.0 * std::f64::consts::PI;
        for &(c, w) in &self.theta_bands {
            let d = (theta - c).rem_euclid(two_pi);
            if d.min(two_pi - d) <= w {
                return false;
            }
        }
        true
    }
}

/// How a residual check differentiates and which nodes it scores.
#[derive(Debug, Clone, Default)]
pub struct CheckOptions {
    pub scheme: DiffScheme,
    pub mask: Mask,
}

impl CheckOptions {
    pub fn spectral() -> Self {
        Self::default()
    }

    pub fn fd(order: usize) -> Self {
        Self { scheme: DiffScheme::Fd(order), mask: Mask::none() }
    }

    pub fn fd_phi(order: usize) -> Self {
        Self { scheme: DiffScheme::FdPhi(order), mask: Mask::none() }
    }

    pub fn with_mask(mut self, mask: Mask) -> Self {
        self.mask = mask;
        self
    }
}

/// Masked norms of one residual equation.
#[derive(Debug, Clone, Serialize)]
pub struct EquationResidual {
    pub name: String,
    pub linf: f64,
    pub l2: f64,
}

/// Per-equation residual norms of a verified system.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub equations: Vec<EquationResidual>,
    pub grid: (usize, usize),
    pub tol: f64,
    pub pass: bool,
}

impl ResidualReport {
    fn from_entries(entries: Vec<EquationResidual>, grid: &SphereGrid, tol: f64) -> Self {
        let pass = entries.iter().all(|e| e.linf <= tol);
        Self { equations: entries, grid: (grid.nlat, grid.nlon), tol, pass }
    }

    pub fn max_linf(&self) -> f64 {
        self.equations.iter().fold(0.0, |m, e| m.max(e.linf))
    }

    pub fn entry(&self, name: &str) -> Option<&EquationResidual> {
        self.equations.iter().find(|e| e.name == name)
    }
}

fn masked_norms(s: &ScalarField, mask: &Mask) -> (f64, f64) {
    let g = &s.grid;
    let mut linf = 0.0f64;
    let mut l2 = 0.0f64;
    for i in 0..g.nlat {
        for j in 0..g.nlon {
            if mask.allows(g, i, j) {
                let v = s.values[g.idx(i, j)];
                linf = linf.max(v.abs());
                l2 += g.weight(i) * v * v;
            }
        }
    }
    (linf, l2.max(0.0).sqrt())
}

fn entry(name: &str, s: &ScalarField, mask: &Mask) -> EquationResidual {
    let (linf, l2) = masked_norms(s, mask);
    EquationResidual { name: name.into(), linf, l2 }
}

/// Masked norms of an arbitrary residual field (shared with other modules'
/// report builders).
pub fn masked_entry(name: &str, s: &ScalarField, mask: &Mask) -> EquationResidual {
    entry(name, s, mask)
}

/// Bernoulli function H = |v|² + f² + 2p.
pub fn compute_h(sol: &HomogeneousSolution) -> ScalarField {
    sol.bernoulli()
}

/// Vorticity decomposition: Ω = (u + ω n̂)/|x|^{α+1} with
/// u = (1-α)v⊥ - ∇⊥f and ω = curl v, plus the divergence compatibility
/// residual (1-α)ω + div u.
pub fn compute_vorticity_parts(
    sol: &HomogeneousSolution,
    scheme: DiffScheme,
) -> (TangentField, ScalarField, ScalarField) {
    let u = perp(&sol.v)
        .scale(1.0 - sol.alpha)
        .sub(&perp(&grad_with(&sol.f, scheme)));
    let omega = curl_with(&sol.v, scheme);
    let mut compat = div_with(&u, scheme);
    for (k, c) in compat.values.iter_mut().enumerate() {
        *c += (1.0 - sol.alpha) * omega.values[k];
    }
    (u, omega, compat)
}

/// Residuals of the reduced system, in both the intrinsic form and the
/// expanded coordinate form (which must agree to roundoff).
pub fn check_system(sol: &HomogeneousSolution, tol: f64, opts: &CheckOptions) -> ResidualReport {
    let g = sol.grid();
    let a = sol.alpha;
    let scheme = opts.scheme;

    // (2-α)f + div v
    let mut div_res = div_with(&sol.v, scheme);
    for (k, r) in div_res.values.iter_mut().enumerate() {
        *r += (2.0 - a) * sol.f.values[k];
    }

    // v∇f - |v|² - αf² - 2αp
    let mut normal_res = advect_with(&sol.v, &sol.f, scheme);
    for (k, r) in normal_res.values.iter_mut().enumerate() {
        let v2 = sol.v.a[k] * sol.v.a[k] + sol.v.b[k] * sol.v.b[k];
        *r -= v2 + a * sol.f.values[k] * sol.f.values[k] + 2.0 * a * sol.p.values[k];
    }

    // (1-α)f v + v∇v + ∇p, intrinsic form.
    let vdv = covariant_derivative(&sol.v, &sol.v, scheme);
    let gp = grad_with(&sol.p, scheme);
    let mom = vdv.add(&gp).add(&sol.v.mul_scalar(&sol.f).scale(1.0 - a));

    // Coordinate form of the momentum equations, divided by sin φ to share
    // units with the intrinsic form.
    let da = crate::diff::d_phi(g, &sol.v.a, scheme);
    let db = crate::diff::d_phi(g, &sol.v.b, scheme);
    let dat = crate::diff::d_theta(g, &sol.v.a, scheme);
    let dbt = crate::diff::d_theta(g, &sol.v.b, scheme);
    let dpp = crate::diff::d_phi(g, &sol.p.values, scheme);
    let dpt = crate::diff::d_theta(g, &sol.p.values, scheme);
    let mut coord_phi = vec![0.0; g.len()];
    let mut coord_th = vec![0.0; g.len()];
    for i in 0..g.nlat {
        let (s, c) = (g.sin_phi[i], g.x_nodes[i]);
        for j in 0..g.nlon {
            let k = g.idx(i, j);
            let (av, bv, fv) = (sol.v.a[k], sol.v.b[k], sol.f.values[k]);
            coord_phi[k] = ((1.0 - a) * fv * av * s + av * da[k] * s + bv * dat[k]
                - bv * bv * c
                + dpp[k] * s)
                / s;
            coord_th[k] = ((1.0 - a) * fv * bv * s + av * db[k] * s + bv * dbt[k] + av * bv * c
                + dpt[k])
                / s;
        }
    }
    let agree = ScalarField {
        grid: g.clone(),
        values: (0..g.len())
            .map(|k| {
                (coord_phi[k] - mom.a[k])
                    .abs()
                    .max((coord_th[k] - mom.b[k]).abs())
            })
            .collect(),
    };

    let mom_phi = ScalarField { grid: g.clone(), values: coord_phi };
    let mom_th = ScalarField { grid: g.clone(), values: coord_th };
    let entries = vec![
        entry("divergence", &div_res, &opts.mask),
        entry("normal", &normal_res, &opts.mask),
        entry("momentum_phi", &mom_phi, &opts.mask),
        entry("momentum_theta", &mom_th, &opts.mask),
        entry("formulation_agreement", &agree, &opts.mask),
    ];
    ResidualReport::from_entries(entries, g, tol)
}

/// Residual of the Bernoulli transport v∇H - 2αfH.
pub fn check_bernoulli_transport(
    sol: &HomogeneousSolution,
    tol: f64,
    opts: &CheckOptions,
) -> ResidualReport {
    let h = sol.bernoulli();
    let mut res = advect_with(&sol.v, &h, opts.scheme);
    for (k, r) in res.values.iter_mut().enumerate() {
        *r -= 2.0 * sol.alpha * sol.f.values[k] * h.values[k];
    }
    ResidualReport::from_entries(
        vec![entry("bernoulli_transport", &res, &opts.mask)],
        sol.grid(),
        tol,
    )
}

/// Residuals of the vorticity-pair system:
/// u×v - αH (normal) and fu - ωv + ½∇⊥H (tangential).
pub fn check_vorticity_system(
    sol: &HomogeneousSolution,
    tol: f64,
    opts: &CheckOptions,
) -> ResidualReport {
    let g = sol.grid();
    let (u, omega, compat) = compute_vorticity_parts(sol, opts.scheme);
    let h = sol.bernoulli();
    let cross = ScalarField {
        grid: g.clone(),
        values: (0..g.len())
            .map(|k| {
                u.a[k] * sol.v.b[k] - u.b[k] * sol.v.a[k] - sol.alpha * h.values[k]
            })
            .collect(),
    };
    let gph = perp(&grad_with(&h, opts.scheme)).scale(0.5);
    let tang = u
        .mul_scalar(&sol.f)
        .sub(&sol.v.mul_scalar(&omega))
        .add(&gph);
    let tang_a = ScalarField { grid: g.clone(), values: tang.a.clone() };
    let tang_b = ScalarField { grid: g.clone(), values: tang.b.clone() };
    let entries = vec![
        entry("normal_cross", &cross, &opts.mask),
        entry("tangential_phi", &tang_a, &opts.mask),
        entry("tangential_theta", &tang_b, &opts.mask),
        entry("div_compatibility", &compat, &opts.mask),
    ];
    ResidualReport::from_entries(entries, g, tol)
}

/// Residuals of the stationary vorticity (Lie-bracket) equations:
/// u∇v - v∇u - (1+α)ωv + (2+α)fu (tangential) and v∇ω - u∇f - fω (normal).
pub fn check_lie_bracket(
    sol: &HomogeneousSolution,
    tol: f64,
    opts: &CheckOptions,
) -> ResidualReport {
    let g = sol.grid();
    let a = sol.alpha;
    let (u, omega, _) = compute_vorticity_parts(sol, opts.scheme);
    let udv = covariant_derivative(&u, &sol.v, opts.scheme);
    let vdu = covariant_derivative(&sol.v, &u, opts.scheme);
    let tang = udv
        .sub(&vdu)
        .sub(&sol.v.mul_scalar(&omega).scale(1.0 + a))
        .add(&u.mul_scalar(&sol.f).scale(2.0 + a));
    let mut normal = advect_with(&sol.v, &omega, opts.scheme);
    let udf = advect_with(&u, &sol.f, opts.scheme);
    for (k, r) in normal.values.iter_mut().enumerate() {
        *r -= udf.values[k] + sol.f.values[k] * omega.values[k];
    }
    let tang_a = ScalarField { grid: g.clone(), values: tang.a.clone() };
    let tang_b = ScalarField { grid: g.clone(), values: tang.b.clone() };
    let entries = vec![
        entry("lie_tangential_phi", &tang_a, &opts.mask),
        entry("lie_tangential_theta", &tang_b, &opts.mask),
        entry("lie_normal", &normal, &opts.mask),
    ];
    ResidualReport::from_entries(entries, g, tol)
}

/// Pointwise norm of V·∇V × V reconstructed from spherical quantities.
///
/// With m = v∇v + (1-α)fv (tangential part of the material derivative,
/// scaled by r^{2α+1}) and μ = v∇f - |v|² - αf² (normal part),
/// |M × W|² = |μv - fm|² + (m×v · n̂)².
pub fn geodesic_defect(sol: &HomogeneousSolution, scheme: DiffScheme) -> ScalarField {
    let g = sol.grid();
    let a = sol.alpha;
    let m = covariant_derivative(&sol.v, &sol.v, scheme)
        .add(&sol.v.mul_scalar(&sol.f).scale(1.0 - a));
    let mut mu = advect_with(&sol.v, &sol.f, scheme);
    for (k, r) in mu.values.iter_mut().enumerate() {
        let v2 = sol.v.a[k] * sol.v.a[k] + sol.v.b[k] * sol.v.b[k];
        *r -= v2 + a * sol.f.values[k] * sol.f.values[k];
    }
    ScalarField {
        grid: g.clone(),
        values: (0..g.len())
            .map(|k| {
                let ta = mu.values[k] * sol.v.a[k] - sol.f.values[k] * m.a[k];
                let tb = mu.values[k] * sol.v.b[k] - sol.f.values[k] * m.b[k];
                let nrm = m.a[k] * sol.v.b[k] - m.b[k] * sol.v.a[k];
                (ta * ta + tb * tb + nrm * nrm).sqrt()
            })
            .collect(),
    }
}

/// Outcome of the 0 < α < 1 sign test for H.
#[derive(Debug, Clone, Serialize)]
pub enum HSignReport {
    /// max H over the grid; a valid solution must have max ≤ tolerance.
    Checked { max_h: f64, consistent: bool },
    NotApplicable { alpha: f64 },
}

/// For 0 < α < 1 every solution has H ≤ 0; report max H.
pub fn sign_check_h(sol: &HomogeneousSolution, tol: f64) -> HSignReport {
    if sol.alpha <= 0.0 || sol.alpha >= 1.0 {
        return HSignReport::NotApplicable { alpha: sol.alpha };
    }
    let max_h = sol
        .bernoulli()
        .values
        .iter()
        .fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    HSignReport::Checked { max_h, consistent: max_h <= tol }
}

/// Moment table |∫ f Hⁿ dσ| and |∫ ω Hⁿ dσ| for n = 0..=n_max.
pub fn moment_table(
    sol: &HomogeneousSolution,
    n_max: usize,
    scheme: DiffScheme,
) -> Vec<(usize, f64, f64)> {
    let h = sol.bernoulli();
    let omega = curl_with(&sol.v, scheme);
    let mut hn = ScalarField::from_fn(sol.grid(), |_, _| 1.0);
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n > 0 {
            hn = hn.zip_with(&h, |u, v| u * v);
        }
        let fm = quadrature(&sol.f.zip_with(&hn, |u, v| u * v));
        let om = quadrature(&omega.zip_with(&hn, |u, v| u * v));
        out.push((n, fm, om));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::*;
    use crate::homo2d;
    use crate::ops::{grad, synthesize_harmonics};
    use std::sync::Arc;

    fn grid() -> Arc<SphereGrid> {
        SphereGrid::build(48, 32).unwrap()
    }

    #[test]
    fn smooth_families_pass_system_check_spectrally() {
        let g = grid();
        let cases: Vec<(&str, HomogeneousSolution)> = vec![
            ("shear", parallel_shear(-1.0, |_| 1.0, &g)),
            ("shear_theta", parallel_shear(-2.0, |th| th.cos(), &g)),
            ("radial", radial(3.0, &g)),
            ("rotational", rotational(-1.0, 1.0, &g).unwrap()),
            ("rotational2", rotational(-2.0, 2.0, &g).unwrap()),
            ("irrotational", irrotational(2, 0, 1.0, &g).unwrap()),
            ("irrotational32", irrotational(3, 2, 1.5, &g).unwrap()),
            (
                "lifted2d",
                lift_2d(&homo2d::elliptic_exceptional(2.0, 1.0).unwrap(), &g),
            ),
        ];
        for (name, sol) in cases {
            let rep = check_system(&sol, 1e-8, &CheckOptions::spectral());
            assert!(rep.pass, "{name}: {:?}", rep);
        }
    }

    #[test]
    fn radial_is_exact() {
        let g = grid();
        let rep = check_system(&radial(1.0, &g), 1e-12, &CheckOptions::spectral());
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn injected_pressure_violation_is_detected() {
        let g = grid();
        let mut sol = parallel_shear(-1.0, |_| 1.0, &g);
        sol.p = ScalarField::from_fn(&g, |phi, _| 0.01 * phi.cos());
        let rep = check_system(&sol, 1e-6, &CheckOptions::spectral());
        assert!(!rep.pass);
        // |∇(0.01 cos φ)| peaks at 0.01.
        let mom = rep.entry("momentum_phi").unwrap();
        assert!(mom.linf > 1e-3, "{}", mom.linf);
    }

    #[test]
    fn conical_passes_with_fd_and_mask() {
        let g = SphereGrid::build(64, 8).unwrap();
        let sol = conical_axisym(-3.0, 0.6, 0.8, &g).unwrap();
        let mask = Mask::around_phi(&conical_boundaries(0.6, 0.8), 0.45);
        let opts = CheckOptions::fd_phi(6).with_mask(mask);
        let rep = check_system(&sol, 1e-7, &opts);
        assert!(rep.pass, "{rep:?}");
        let swirlless = conical_axisym(-2.0, 1.0, 0.0, &g).unwrap();
        let rep2 = check_system(&swirlless, 1e-9, &CheckOptions::spectral());
        assert!(rep2.pass, "{rep2:?}");
    }

    #[test]
    fn two_half_d_passes_with_fd() {
        let g = SphereGrid::build(96, 64).unwrap();
        let sol2d = homo2d::elliptic_exceptional(2.0, 1.0).unwrap();
        let comp = two_half_d(&sol2d, 1.0, SignProfile::Uniform, &g).unwrap();
        let rep = check_system(&comp, 1e-7, &CheckOptions::fd_phi(6));
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn lifted_glued_profile_passes_away_from_seams() {
        let g = SphereGrid::build(64, 128).unwrap();
        let sol2d = homo2d::glue_hyperbolic(-1.0, &[0.0, 0.0, 0.0, 0.0]).unwrap();
        let lifted = lift_2d(&sol2d, &g);
        let mask = Mask::around_theta(&sol2d.seams(), 4.0 * g.dtheta());
        let rep = check_system(&lifted, 1e-6, &CheckOptions::fd(6).with_mask(mask));
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn bernoulli_transport_on_families() {
        let g = grid();
        for sol in [
            parallel_shear(-1.0, |th| 1.0 + 0.3 * (2.0 * th).cos(), &g),
            rotational(-1.0, 1.0, &g).unwrap(),
            irrotational(2, 0, 1.0, &g).unwrap(),
        ] {
            let rep = check_bernoulli_transport(&sol, 1e-8, &CheckOptions::spectral());
            assert!(rep.pass, "{:?}: {rep:?}", sol.family);
        }
        // f ≡ 0 (rotational): both sides vanish separately.
        let rot = rotational(-1.0, 1.0, &g).unwrap();
        let h = rot.bernoulli();
        let adv = advect_with(&rot.v, &h, DiffScheme::Spectral);
        assert!(adv.linf() < 1e-10);
    }

    #[test]
    fn vorticity_parts_closed_forms() {
        let g = grid();
        // Irrotational: u ≈ 0, ω ≈ 0.
        let irr = irrotational(2, 1, 1.0, &g).unwrap();
        let (u, om, compat) = compute_vorticity_parts(&irr, DiffScheme::Spectral);
        assert!(u.linf() < 1e-10 && om.linf() < 1e-10 && compat.linf() < 1e-10);
        // Rotational(-1, 1): u = 2v⊥ = (-2 sin φ, 0), ω = 2cos φ.
        let rot = rotational(-1.0, 1.0, &g).unwrap();
        let (u, om, compat) = compute_vorticity_parts(&rot, DiffScheme::Spectral);
        for i in 0..g.nlat {
            let k = g.idx(i, 5);
            assert!((u.a[k] + 2.0 * g.sin_phi[i]).abs() < 1e-12);
            assert!(u.b[k].abs() < 1e-12);
            assert!((om.values[k] - 2.0 * g.x_nodes[i]).abs() < 1e-12);
        }
        assert!(compat.linf() < 1e-10);
    }

    #[test]
    fn vorticity_system_on_families() {
        let g = grid();
        for sol in [
            rotational(-1.0, 1.0, &g).unwrap(),
            irrotational(2, 0, 1.0, &g).unwrap(),
            parallel_shear(-1.0, |_| 1.0, &g),
        ] {
            let rep = check_vorticity_system(&sol, 1e-8, &CheckOptions::spectral());
            assert!(rep.pass, "{:?}: {rep:?}", sol.family);
        }
        // u×v = -H pointwise for rotational(-1, 1).
        let rot = rotational(-1.0, 1.0, &g).unwrap();
        let (u, _, _) = compute_vorticity_parts(&rot, DiffScheme::Spectral);
        let h = rot.bernoulli();
        for k in 0..g.len() {
            let cross = u.a[k] * rot.v.b[k] - u.b[k] * rot.v.a[k];
            assert!((cross + h.values[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn lie_bracket_on_families() {
        let g = grid();
        for sol in [
            rotational(-1.0, 1.0, &g).unwrap(),
            irrotational(2, 0, 1.0, &g).unwrap(),
            lift_2d(&homo2d::elliptic_exceptional(2.0, 1.0).unwrap(), &g),
        ] {
            let rep = check_lie_bracket(&sol, 1e-7, &CheckOptions::spectral());
            assert!(rep.pass, "{:?}: {rep:?}", sol.family);
        }
    }

    #[test]
    fn vorticity_tangential_equals_rotated_h_form_identically() {
        // fu - ωv + ½∇⊥H = perp( f((1-α)v - ∇f) + ωv⊥ + ½∇H ) for ANY fields.
        let g = grid();
        let s1 = synthesize_harmonics(&g, &[(2, 1, 0.8), (3, -1, 0.5)]).unwrap();
        let s2 = synthesize_harmonics(&g, &[(1, 0, 1.1), (4, 2, 0.3)]).unwrap();
        let f = synthesize_harmonics(&g, &[(2, 0, 0.9)]).unwrap();
        let p = synthesize_harmonics(&g, &[(1, 1, 0.4)]).unwrap();
        let v = grad(&s1).add(&perp(&grad(&s2)));
        let sol = HomogeneousSolution {
            alpha: -1.3,
            f,
            v,
            p,
            family: FamilyTag::Custom,
            smooth_range_note: String::new(),
        };
        let (u, omega, _) = compute_vorticity_parts(&sol, DiffScheme::Spectral);
        let h = sol.bernoulli();
        let lhs = u
            .mul_scalar(&sol.f)
            .sub(&sol.v.mul_scalar(&omega))
            .add(&perp(&grad(&h)).scale(0.5));
        // (e:H3) residual field: f((1-α)v - ∇f) + ωv⊥ + ½∇H.
        let h3 = sol
            .v
            .scale(1.0 - sol.alpha)
            .sub(&grad(&sol.f))
            .mul_scalar(&sol.f)
            .add(&perp(&sol.v).mul_scalar(&omega))
            .add(&grad(&h).scale(0.5));
        let diff = lhs.sub(&perp(&h3));
        assert!(diff.linf() < 1e-11, "{}", diff.linf());
    }

    #[test]
    fn integration_by_parts_identity_alpha_one() {
        // On random fields satisfying only (2.1a) at α = 1 (f = -div v):
        // ∫ f v∇H = ∫ f²H - ∫ H v∇f.
        let g = grid();
        let s1 = synthesize_harmonics(&g, &[(2, 1, 0.7), (4, -2, 0.4)]).unwrap();
        let s2 = synthesize_harmonics(&g, &[(3, 0, 0.6), (2, -1, 0.5)]).unwrap();
        let v = grad(&s1).add(&perp(&grad(&s2)));
        let f = crate::ops::div(&v).map(|x| -x);
        let p = synthesize_harmonics(&g, &[(2, 2, 0.3), (1, 0, 0.2)]).unwrap();
        let h = {
            let mut h = v.norm_sq();
            for (k, hv) in h.values.iter_mut().enumerate() {
                *hv += f.values[k] * f.values[k] + 2.0 * p.values[k];
            }
            h
        };
        let vdh = advect_with(&v, &h, DiffScheme::Spectral);
        let vdf = advect_with(&v, &f, DiffScheme::Spectral);
        let lhs = quadrature(&f.zip_with(&vdh, |a, b| a * b));
        let t1 = quadrature(&f.zip_with(&f.zip_with(&h, |a, b| a * b), |a, b| a * b));
        let t2 = quadrature(&h.zip_with(&vdf, |a, b| a * b));
        assert!(
            (lhs - (t1 - t2)).abs() < 1e-10,
            "{lhs} vs {t1} - {t2} = {}",
            t1 - t2
        );
    }

    #[test]
    fn geodesic_families() {
        let g = grid();
        let sh = parallel_shear(-1.0, |_| 1.0, &g);
        assert!(geodesic_defect(&sh, DiffScheme::Spectral).linf() < 1e-9);
        let rad = radial(1.0, &g);
        assert!(geodesic_defect(&rad, DiffScheme::Spectral).linf() < 1e-12);
        // Rotational orbits are circles: defect = sin²φ ≠ 0.
        let rot = rotational(-1.0, 1.0, &g).unwrap();
        let d = geodesic_defect(&rot, DiffScheme::Spectral);
        for i in 0..g.nlat {
            let k = g.idx(i, 0);
            assert!((d.values[k] - g.sin_phi[i].powi(2)).abs() < 1e-10);
        }
        // Conical solutions are geodesic away from the cone boundary.
        let gg = SphereGrid::build(64, 8).unwrap();
        let con = conical_axisym(-3.0, 0.6, 0.8, &gg).unwrap();
        let defect = geodesic_defect(&con, DiffScheme::FdPhi(6));
        let mask = Mask::around_phi(&conical_boundaries(0.6, 0.8), 0.45);
        let field = ScalarField { grid: gg.clone(), values: defect.values.clone() };
        let (linf, _) = super::masked_norms(&field, &mask);
        assert!(linf < 1e-7, "{linf}");
    }

    #[test]
    fn h_sign_check() {
        let g = grid();
        let irr = irrotational(2, 0, 1.0, &g).unwrap();
        assert!(matches!(
            sign_check_h(&irr, 1e-10),
            HSignReport::NotApplicable { .. }
        ));
        // Manufactured non-solution with α in (0,1) and H > 0.
        let sol = HomogeneousSolution {
            alpha: 0.5,
            f: ScalarField::from_fn(&g, |_, _| 1.0),
            v: TangentField::zeros(g.clone()),
            p: ScalarField::zeros(g.clone()),
            family: FamilyTag::Custom,
            smooth_range_note: String::new(),
        };
        match sign_check_h(&sol, 1e-10) {
            HSignReport::Checked { max_h, consistent } => {
                assert!((max_h - 1.0).abs() < 1e-14);
                assert!(!consistent);
            }
            _ => panic!("expected applicability"),
        }
    }

    #[test]
    fn rotational_characterization() {
        // For a verified solution with |v|² + 2αp ≡ 0 the flow must be
        // tangential (f ≡ 0) — exercised on the rotational family.
        let g = grid();
        let rot = rotational(-2.0, 1.3, &g).unwrap();
        let char_res: f64 = (0..g.len())
            .map(|k| {
                let v2 = rot.v.a[k] * rot.v.a[k] + rot.v.b[k] * rot.v.b[k];
                (v2 + 2.0 * rot.alpha * rot.p.values[k]).abs()
            })
            .fold(0.0, f64::max);
        assert!(char_res < 1e-12);
        assert!(rot.f.linf() == 0.0);
    }

    #[test]
    fn refinement_improves_fd_residuals() {
        let mut linfs = Vec::new();
        for nlat in [32usize, 64] {
            let g = SphereGrid::build(nlat, 2 * nlat).unwrap();
            let sol = parallel_shear(-1.0, |th| 1.0 + 0.3 * (2.0 * th).cos(), &g);
            let rep = check_system(&sol, 1.0, &CheckOptions::fd_phi(4));
            linfs.push(rep.max_linf());
        }
        assert!(
            linfs[0] > 4.0 * linfs[1],
            "FD refinement ratio {:.1}",
            linfs[0] / linfs[1]
        );
    }
}
