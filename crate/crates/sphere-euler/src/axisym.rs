//! The axisymmetric reduction: ODE system, first integrals, the reduced
//! no-swirl Hamiltonian system, and the pole-to-pole shooting scan.
//!
//! Axisymmetric data (f, a, b, p)(φ) satisfies
//!
//! ```text
//! (2-α)f + a' + a cot φ = 0
//! a f' = a² + b² + αf² + 2αp
//! (1-α)fa + aa' - b² cot φ = -p'
//! (1-α)fb + ab' + ab cot φ = 0
//! ```
//!
//! with two first integrals along trajectories:
//!
//! ```text
//! I_A = |b|^{2-α} |a|^{α-1} sin φ            (ab ≠ 0)
//! I_B = |H|^{2-α} |a sin φ|^{2α}             (aH ≠ 0)
//! ```
//!
//! Without swirl the system reduces, in x = a sin φ and t = -cos φ, to
//!
//! ```text
//! x' = (α-2) f,    f' = αB|x|^{4/(α-2)} x + (1-α) x/(1-t²),
//! ```
//!
//! where B is the signed constant with H = B|x|^{2α/(α-2)}. Its Lyapunov
//! function (monotone on (-1,0] and on [0,1)) is
//!
//! ```text
//! ℋ = (α-2)f² + (α-1)x²/(1-t²) + (2-α)B|x|^{2α/(α-2)},
//! ```
//!
//! nondecreasing then nonincreasing for α < 1. Launching from the regular
//! series at t = -1+δ and recording x(1-δ) reproduces the observation that
//! the endpoint defect vanishes only at integer 1-α (the axial-harmonic
//! irrotational solutions); generically x ≠ 0 at the far pole, so a = x/sinφ
//! blows up and no smooth solution exists there.

use crate::homo2d::signed_pow;
use crate::ode::{integrate, OdeOptions, Termination, Trajectory};
use crate::{Error, Result};

/// State of the full axisymmetric system at colatitude φ.
#[derive(Debug, Clone, Copy)]
pub struct AxiState {
    pub phi: f64,
    pub f: f64,
    pub a: f64,
    pub b: f64,
    pub p: f64,
    pub alpha: f64,
}

impl AxiState {
    pub fn bernoulli(&self) -> f64 {
        self.a * self.a + self.b * self.b + self.f * self.f + 2.0 * self.p
    }

    /// First integral |b|^{2-α}|a|^{α-1} sin φ (meaningful when ab ≠ 0).
    pub fn invariant_a(&self) -> f64 {
        self.b.abs().powf(2.0 - self.alpha)
            * self.a.abs().powf(self.alpha - 1.0)
            * self.phi.sin()
    }

    /// First integral |H|^{2-α}|a sin φ|^{2α} (meaningful when aH ≠ 0).
    pub fn invariant_b(&self) -> f64 {
        self.bernoulli().abs().powf(2.0 - self.alpha)
            * (self.a * self.phi.sin()).abs().powf(2.0 * self.alpha)
    }
}

/// Floor on |a| below which the RHS is treated as singular.
const A_FLOOR: f64 = 1e-10;

/// Right-hand side (f', a', b', p') of the axisymmetric system.
pub fn axi_rhs(state: &AxiState) -> Result<[f64; 4]> {
    let AxiState { phi, f, a, b, p, alpha } = *state;
    if a.abs() < A_FLOOR {
        return Err(Error::SingularRhs(format!(
            "axisymmetric RHS needs a ≠ 0 (a = {a:.3e} at φ = {phi:.6})"
        )));
    }
    let cot = phi.cos() / phi.sin();
    let fp = (a * a + b * b + alpha * f * f + 2.0 * alpha * p) / a;
    let ap = -(2.0 - alpha) * f - a * cot;
    let bp = -(1.0 - alpha) * f * b / a - b * cot;
    let pp = -((1.0 - alpha) * f * a + a * ap - b * b * cot);
    Ok([fp, ap, bp, pp])
}

/// Integrated axisymmetric trajectory.
pub struct AxiTrajectory {
    pub alpha: f64,
    pub traj: Trajectory,
    pub phi0: f64,
}

impl AxiTrajectory {
    pub fn states(&self) -> impl Iterator<Item = AxiState> + '_ {
        let alpha = self.alpha;
        std::iter::once((self.traj.steps[0].t0, self.traj.steps[0].y0.clone()))
            .chain(self.traj.steps.iter().map(|s| (s.t1, s.y1.clone())))
            .map(move |(phi, y)| AxiState { phi, f: y[0], a: y[1], b: y[2], p: y[3], alpha })
    }
}

/// Integrate the axisymmetric system from `state` to colatitude `phi_end`.
pub fn integrate_axi(state: &AxiState, phi_end: f64, tol: f64) -> Result<AxiTrajectory> {
    let alpha = state.alpha;
    let mut singular = false;
    let traj = integrate(
        |phi, y, dy| {
            let s = AxiState { phi, f: y[0], a: y[1], b: y[2], p: y[3], alpha };
            match axi_rhs(&s) {
                Ok(d) => dy.copy_from_slice(&d),
                Err(_) => {
                    singular = true;
                    dy.fill(f64::NAN);
                }
            }
        },
        state.phi,
        &[state.f, state.a, state.b, state.p],
        phi_end,
        &OdeOptions { tol, h_max: 0.02, blowup: 1e10, ..Default::default() },
    )?;
    if singular {
        return Err(Error::SingularRhs("trajectory reached a = 0".into()));
    }
    if let Termination::Diverged { t } = traj.termination {
        return Err(Error::Divergence(format!("axisymmetric blow-up at φ = {t}")));
    }
    Ok(AxiTrajectory { alpha, traj, phi0: state.phi })
}

/// Maximum relative drift of the two first integrals along a trajectory.
pub struct InvariantDrift {
    pub drift_a: f64,
    pub drift_b: f64,
    /// I_A needs ab ≠ 0 throughout.
    pub a_applicable: bool,
    /// I_B needs aH ≠ 0 throughout.
    pub b_applicable: bool,
}

pub fn invariants_check(traj: &AxiTrajectory) -> InvariantDrift {
    let states: Vec<AxiState> = traj.states().collect();
    let first = &states[0];
    let a_applicable = states.iter().all(|s| s.a.abs() > 1e-8 && s.b.abs() > 1e-8);
    let b_applicable = states
        .iter()
        .all(|s| s.a.abs() > 1e-8 && s.bernoulli().abs() > 1e-8);
    let (ia0, ib0) = (first.invariant_a(), first.invariant_b());
    let mut drift_a = 0.0f64;
    let mut drift_b = 0.0f64;
    for s in &states {
        if a_applicable {
            drift_a = drift_a.max((s.invariant_a() - ia0).abs() / ia0.abs());
        }
        if b_applicable {
            drift_b = drift_b.max((s.invariant_b() - ib0).abs() / ib0.abs());
        }
    }
    InvariantDrift { drift_a, drift_b, a_applicable, b_applicable }
}

pub use crate::families::explicit_const_p;

/// RHS of the reduced no-swirl system in (x, f) at time t = -cos φ.
pub fn noswirl_rhs(alpha: f64, bern: f64, t: f64, x: f64, f: f64) -> Result<(f64, f64)> {
    if t.abs() >= 1.0 {
        return Err(Error::InvalidArgument(format!("|t| = {} must be < 1", t.abs())));
    }
    let xp = (alpha - 2.0) * f;
    let fp = alpha * bern * signed_pow(x, (alpha + 2.0) / (alpha - 2.0))
        + (1.0 - alpha) * x / (1.0 - t * t);
    Ok((xp, fp))
}

/// Lyapunov function of the no-swirl system.
pub fn noswirl_hamiltonian(alpha: f64, bern: f64, t: f64, x: f64, f: f64) -> f64 {
    (alpha - 2.0) * f * f
        + (alpha - 1.0) * x * x / (1.0 - t * t)
        + (2.0 - alpha) * bern * x.abs().powf(2.0 * alpha / (alpha - 2.0))
}

/// Result of one pole-to-pole shot.
#[derive(Debug, Clone, Copy)]
pub struct ShootResult {
    /// x at t = 1-δ; ≈ 0 signals a smooth candidate.
    pub defect: f64,
    /// Trajectory blew up en route (infinite-defect marker).
    pub blowup: bool,
}

/// Pole offset of the shooting launch.
pub const SHOOT_DELTA: f64 = 1e-6;

/// Regular launch series at t = -1 + s: f ~ 1, x ~ (α-2)s(1 + ...).
fn shoot_launch(alpha: f64, bern: f64, s: f64) -> Result<(f64, f64)> {
    let x1 = alpha - 2.0;
    let f1 = (1.0 - alpha) * x1 / 2.0;
    let x2 = x1 * f1 / 2.0;
    let f2 = (1.0 - alpha) * (x2 + x1 / 2.0) / 4.0;
    let mut x = x1 * s + x2 * s * s;
    let mut f = 1.0 + f1 * s + f2 * s * s;
    if bern != 0.0 {
        let kappa = (alpha + 2.0) / (alpha - 2.0);
        if kappa <= 0.0 {
            return Err(Error::SingularRhs(format!(
                "B ≠ 0 launch is singular at the pole for α = {alpha} (exponent {kappa:.3})"
            )));
        }
        let c = alpha * bern * signed_pow(x1, kappa);
        f += c * s.powf(kappa + 1.0) / (kappa + 1.0);
        x += (alpha - 2.0) * c * s.powf(kappa + 2.0) / ((kappa + 1.0) * (kappa + 2.0));
    }
    Ok((x, f))
}

/// Shoot the no-swirl system from t = -1+δ to t = 1-δ with the regular
/// launch normalization f(-1) = 1.
pub fn shoot_endpoint(alpha: f64, bern: f64, tol: f64) -> Result<ShootResult> {
    shoot_endpoint_delta(alpha, bern, tol, SHOOT_DELTA)
}

pub fn shoot_endpoint_delta(alpha: f64, bern: f64, tol: f64, delta: f64) -> Result<ShootResult> {
    if alpha >= 1.0 {
        return Err(Error::InvalidArgument(format!("shooting needs α < 1, got {alpha}")));
    }
    let (x0, f0) = shoot_launch(alpha, bern, delta)?;
    let traj = integrate(
        |t, y, dy| match noswirl_rhs(alpha, bern, t.clamp(-1.0 + 1e-15, 1.0 - 1e-15), y[0], y[1])
        {
            Ok((xp, fp)) => {
                dy[0] = xp;
                dy[1] = fp;
            }
            Err(_) => dy.fill(f64::NAN),
        },
        -1.0 + delta,
        &[x0, f0],
        1.0 - delta,
        &OdeOptions { tol, h_max: 0.01, blowup: 1e8, ..Default::default() },
    )?;
    match traj.termination {
        Termination::ReachedEnd => Ok(ShootResult { defect: traj.y_end()[0], blowup: false }),
        Termination::Diverged { .. } => Ok(ShootResult { defect: f64::INFINITY, blowup: true }),
        Termination::Event { .. } => unreachable!(),
    }
}

/// One row of a shooting scan.
#[derive(Debug, Clone, Copy)]
pub struct ScanRow {
    pub alpha: f64,
    pub bern: f64,
    pub defect: f64,
    pub blowup: bool,
}

/// Tabulate shoot_endpoint over a uniform α grid.
pub fn scan_alpha(
    alpha_lo: f64,
    alpha_hi: f64,
    bern: f64,
    n_samples: usize,
    tol: f64,
) -> Result<Vec<ScanRow>> {
    let mut rows = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let alpha = if n_samples <= 1 {
            alpha_lo
        } else {
            alpha_lo + (alpha_hi - alpha_lo) * i as f64 / (n_samples - 1) as f64
        };
        let r = shoot_endpoint(alpha, bern, tol)?;
        rows.push(ScanRow { alpha, bern, defect: r.defect, blowup: r.blowup });
    }
    Ok(rows)
}

/// Sign changes of the defect in a scan, located by linear interpolation.
pub fn near_zeros(rows: &[ScanRow]) -> Vec<f64> {
    let mut out = Vec::new();
    for w in rows.windows(2) {
        let (r0, r1) = (&w[0], &w[1]);
        if r0.blowup || r1.blowup {
            continue;
        }
        if r0.defect * r1.defect < 0.0 {
            let t = r0.defect / (r0.defect - r1.defect);
            out.push(r0.alpha + t * (r1.alpha - r0.alpha));
        }
    }
    out
}
