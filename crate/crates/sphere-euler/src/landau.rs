//! Landau profiles: the viscous axisymmetric ODE at homogeneity α = 1 and
//! its inviscid limit.
//!
//! In terms of the Stokes stream profile ψ(x), x = cos φ, the equation is
//!
//! ```text
//! ψ² - 2ν(1-x²)ψ' - 4νxψ = Ax² + Bx + C,
//! ```
//!
//! with viscosity ν ≥ 0. At ν = 0 it integrates to ψ = √(Ax² + Bx + C),
//! admissible when {B² ≤ 4AC, C ≥ 0} or {|B| ≤ A+C, |B| ≥ 2A}; smooth
//! profiles require A = B = C = 0. The smooth viscous branch is the
//! classical jet profile ψ = 2ν(1-x²)/(c-x), c > 1, which is linear in ν —
//! smooth Landau solutions converge to the trivial flow as ν → 0.

use crate::{Error, Result};
use std::sync::Arc;

type XFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A Stokes stream profile ψ(x) on [-1, 1] with its ODE data.
#[derive(Clone)]
pub struct LandauProfile {
    pub nu: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub psi: XFn,
    pub dpsi: XFn,
    /// True when the profile extends to a smooth velocity on the sphere.
    pub smooth: bool,
}

impl std::fmt::Debug for LandauProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "LandauProfile(nu={}, A={}, B={}, C={}, smooth={})",
            self.nu, self.a, self.b, self.c, self.smooth
        )
    }
}

/// Number of Chebyshev sample points for residual scans.
const CHEB_N: usize = 257;

fn cheb_nodes() -> impl Iterator<Item = f64> {
    (0..CHEB_N).map(|k| (std::f64::consts::PI * k as f64 / (CHEB_N - 1) as f64).cos())
}

/// Max residual of the Landau ODE over a Chebyshev grid.
pub fn landau_residual(p: &LandauProfile) -> f64 {
    cheb_nodes()
        .map(|x| {
            let psi = (p.psi)(x);
            let dpsi = (p.dpsi)(x);
            (psi * psi
                - 2.0 * p.nu * (1.0 - x * x) * dpsi
                - 4.0 * p.nu * x * psi
                - (p.a * x * x + p.b * x + p.c))
                .abs()
        })
        .fold(0.0, f64::max)
}

/// Inviscid branch ψ = √(Ax² + Bx + C) for admissible coefficients.
pub fn euler_axistokes(a: f64, b: f64, c: f64) -> Result<LandauProfile> {
    let set1 = b * b <= 4.0 * a * c && c >= 0.0;
    let set2 = b.abs() <= a + c && b.abs() >= 2.0 * a;
    if !(set1 || set2) {
        return Err(Error::Infeasible(format!(
            "(A,B,C) = ({a},{b},{c}) admits no nonnegative right-hand side"
        )));
    }
    // The constraint sets guarantee nonnegativity on [-1,1]; confirm before
    // taking square roots (degenerate corners like A<0, B=C=0 satisfy set 1
    // vacuously but are not admissible profiles).
    let min_q = cheb_nodes()
        .map(|x| a * x * x + b * x + c)
        .fold(f64::INFINITY, f64::min);
    if min_q < -1e-14 {
        return Err(Error::Infeasible(format!(
            "(A,B,C) = ({a},{b},{c}): right-hand side dips to {min_q:.3e} on [-1,1]"
        )));
    }
    let smooth = a == 0.0 && b == 0.0 && c == 0.0;
    Ok(LandauProfile {
        nu: 0.0,
        a,
        b,
        c,
        psi: Arc::new(move |x| (a * x * x + b * x + c).max(0.0).sqrt()),
        dpsi: Arc::new(move |x| {
            let q = (a * x * x + b * x + c).max(0.0);
            if q == 0.0 {
                0.0
            } else {
                (2.0 * a * x + b) / (2.0 * q.sqrt())
            }
        }),
        smooth,
    })
}

/// The smooth viscous branch ψ = 2ν(1-x²)/(c-x), c > 1 (A = B = C = 0).
pub fn landau_viscous(nu: f64, c: f64) -> Result<LandauProfile> {
    if nu < 0.0 {
        return Err(Error::InvalidArgument("viscosity must be nonnegative".into()));
    }
    if c <= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "the smooth branch needs c > 1, got {c}"
        )));
    }
    Ok(LandauProfile {
        nu,
        a: 0.0,
        b: 0.0,
        c: 0.0,
        psi: Arc::new(move |x| 2.0 * nu * (1.0 - x * x) / (c - x)),
        dpsi: Arc::new(move |x| {
            2.0 * nu * (-2.0 * x * (c - x) + (1.0 - x * x)) / ((c - x) * (c - x))
        }),
        smooth: true,
    })
}

/// One row of the vanishing-viscosity table.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ViscosityRow {
    pub nu: f64,
    pub sup_psi: f64,
    pub residual: f64,
}

/// sup|ψ_ν| and ODE residual over a viscosity ladder on the smooth branch.
pub fn vanishing_viscosity_study(nu_ladder: &[f64], c: f64) -> Result<Vec<ViscosityRow>> {
    nu_ladder
        .iter()
        .map(|&nu| {
            let p = landau_viscous(nu, c)?;
            let sup_psi = cheb_nodes().map(|x| (p.psi)(x).abs()).fold(0.0, f64::max);
            Ok(ViscosityRow { nu, sup_psi, residual: landau_residual(&p) })
        })
        .collect()
}
