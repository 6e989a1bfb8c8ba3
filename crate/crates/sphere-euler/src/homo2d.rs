//! The two-dimensional reduction: Hamiltonian ODE, conserved quantity,
//! time-span function and hyperbolic gluing.
//!
//! A 2D homogeneous stream profile ψ(θ) with constant reduced pressure p
//! satisfies
//!
//! ```text
//! -2αp = α(ψ')² + (1-α)²ψ² + (1-α)ψ''ψ,     ψ(0) = ψ(2π),
//! ```
//!
//! which carries the conserved quantity
//!
//! ```text
//! B = (2p + (1-α)²ψ² + (ψ')²) ψ^{2α/(1-α)}
//! ```
//!
//! and, at fixed B, becomes the Hamiltonian system in (x, y) = (ψ, ψ')
//!
//! ```text
//! x' = y,   y' = -(1-α)²x + (α/(α-1)) B x^{(α+1)/(α-1)},
//! ```
//!
//! with Hamiltonian p = -y²/2 - (1-α)²x²/2 + (B/2) x^{2α/(α-1)}.
//!
//! Hyperbolic profiles (ψ vanishing somewhere, p < 0, normalized p = -1) hit
//! zero at slope ±√2; sign-definite arches of θ-length T(α, B) are flipped
//! and glued into C¹ 2π-periodic profiles whenever the spans sum to 2π.
//! Fractional powers are only ever evaluated on sign-definite arches; the
//! negative-ψ branches use the flip symmetry ψ → -ψ, i.e. signed powers.

use crate::ode::{integrate, EventSpec, OdeOptions, Termination, Trajectory};
use crate::{Error, Result};
use std::sync::Arc;

/// Phase point of the reduced Hamiltonian system (sys-B).
#[derive(Debug, Clone, Copy)]
pub struct Phase2D {
    /// ψ
    pub x: f64,
    /// ψ'
    pub y: f64,
    pub theta: f64,
    pub alpha: f64,
    /// Conserved quantity B.
    pub bern: f64,
    /// Hamiltonian value (the reduced pressure).
    pub p_const: f64,
}

impl Phase2D {
    pub fn new(x: f64, y: f64, theta: f64, alpha: f64, bern: f64) -> Self {
        let p_const = hamiltonian_p(x, y, alpha, bern);
        Self { x, y, theta, alpha, bern, p_const }
    }
}

/// sign(x)·|x|^q — the odd continuation used for every fractional power of ψ.
#[inline]
pub fn signed_pow(x: f64, q: f64) -> f64 {
    x.signum() * x.abs().powf(q)
}

/// Conserved quantity B = (2p + (1-α)²x² + y²)|x|^{2α/(1-α)}.
///
/// At x = 0 a negative exponent yields the IEEE infinity (the documented
/// "infinity signal").
pub fn bernoulli_2d(x: f64, y: f64, alpha: f64, p_const: f64) -> f64 {
    let q = 2.0 * alpha / (1.0 - alpha);
    (2.0 * p_const + (1.0 - alpha).powi(2) * x * x + y * y) * x.abs().powf(q)
}

/// The Hamiltonian (reduced pressure) p = -y²/2 - (1-α)²x²/2 + (B/2)|x|^{2α/(α-1)}.
pub fn hamiltonian_p(x: f64, y: f64, alpha: f64, bern: f64) -> f64 {
    let q = 2.0 * alpha / (alpha - 1.0);
    -0.5 * y * y - 0.5 * (1.0 - alpha).powi(2) * x * x + 0.5 * bern * x.abs().powf(q)
}

/// Right-hand side of (sys-B).
#[inline]
pub fn sys_b_rhs(alpha: f64, bern: f64, x: f64, y: f64) -> (f64, f64) {
    let q = (alpha + 1.0) / (alpha - 1.0);
    let forcing = alpha / (alpha - 1.0) * bern * signed_pow(x, q);
    (y, -(1.0 - alpha).powi(2) * x + forcing)
}

/// An integrated orbit of (sys-B) together with its Hamiltonian drift.
#[derive(Debug)]
pub struct Orbit {
    pub traj: Trajectory,
    /// max |p(θ) - p(θ₀)| over accepted steps.
    pub hamiltonian_drift: f64,
    /// Zero of x that terminated the orbit, if any.
    pub stopped_at_zero: Option<f64>,
}

/// Integrate (sys-B) from `start` over `theta_span`; stops when x reaches the
/// guard band around zero (the reported zero is refined through the local
/// series, to ~1e-12 in θ).
pub fn integrate_orbit(start: &Phase2D, theta_span: f64, tol: f64) -> Result<Orbit> {
    let (alpha, bern) = (start.alpha, start.bern);
    let sgn = if start.x >= 0.0 { 1.0 } else { -1.0 };
    let opts = OdeOptions {
        tol,
        event: Some(EventSpec {
            index: 0,
            value: sgn * ZERO_GUARD,
            direction: -sgn as i32,
        }),
        blowup: 1e8,
        ..Default::default()
    };
    let traj = integrate(
        move |_t, y, dy| {
            let (dx, dv) = sys_b_rhs(alpha, bern, y[0], y[1]);
            dy[0] = dx;
            dy[1] = dv;
        },
        start.theta,
        &[start.x, start.y],
        start.theta + theta_span,
        &opts,
    )?;
    if let Termination::Diverged { t } = traj.termination {
        return Err(Error::Divergence(format!("orbit blow-up at θ = {t}")));
    }
    let p0 = start.p_const;
    let drift = traj
        .steps
        .iter()
        .map(|s| (hamiltonian_p(s.y1[0], s.y1[1], alpha, bern) - p0).abs())
        .fold(0.0, f64::max);
    let stopped_at_zero = match &traj.termination {
        Termination::Event { t, y } => {
            // A genuine zero follows only on hyperbolic energy (p < 0).
            if p0 < -1e-12 {
                Some(t + time_to_zero(alpha, bern, sgn * y[0], sgn * y[1]))
            } else {
                Some(*t)
            }
        }
        _ => None,
    };
    Ok(Orbit { traj, hamiltonian_drift: drift, stopped_at_zero })
}

/// Launch offset for arch integrations: the power-law forcing is not
/// Lipschitz at x = 0, so arches start a hair inside the zero on a series.
const LAUNCH_EPS: f64 = 1e-7;

/// Guard band around x = 0: the integrator never crosses the zero (the
/// forcing has a derivative kink there); terminal zeros are reached through
/// the local series from |x| = ZERO_GUARD inward.
const ZERO_GUARD: f64 = 1e-3;

/// Series state of an arch x(θ) with x(0) = 0, x'(0) = slope, at small θ > 0.
fn arch_series(alpha: f64, bern: f64, slope: f64, theta: f64) -> (f64, f64) {
    let q = (alpha + 1.0) / (alpha - 1.0);
    let cb = alpha / (alpha - 1.0) * bern;
    let lin = (1.0 - alpha).powi(2);
    let x = slope * theta + cb * slope.powf(q) * theta.powf(q + 2.0) / ((q + 1.0) * (q + 2.0))
        - lin * slope * theta.powi(3) / 6.0;
    let y = slope + cb * slope.powf(q) * theta.powf(q + 1.0) / (q + 1.0)
        - lin * slope * theta.powi(2) / 2.0;
    (x, y)
}

fn launch_state(alpha: f64, bern: f64, theta: f64) -> (f64, f64) {
    arch_series(alpha, bern, std::f64::consts::SQRT_2, theta)
}

/// Remaining time to the zero from a state (x, y) with x = O(guard), y < 0,
/// by Newton on the mirrored series (slope from the energy at the state).
fn time_to_zero(alpha: f64, bern: f64, x: f64, y: f64) -> f64 {
    let p = hamiltonian_p(x, y, alpha, bern);
    let slope = (-2.0 * p).max(0.0).sqrt().max(1e-12);
    let mut tau = x / slope;
    for _ in 0..4 {
        let (xs, ys) = arch_series(alpha, bern, slope, tau);
        tau -= (xs - x) / ys;
    }
    tau
}

/// Time-span function T(α, B): the θ-length of one sign-definite arch at the
/// normalization p = -1 (launch slope √2).
pub fn time_span(alpha: f64, bern: f64) -> Result<f64> {
    Ok(span_trajectory(alpha, bern)?.0)
}

/// Arch data: total span T, the trajectory (covering [ε, t_guard]) and the
/// local time t_guard where the terminal series takes over.
fn span_trajectory(alpha: f64, bern: f64) -> Result<(f64, Trajectory, f64)> {
    if alpha > -1.0 + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "time_span defined for α ≤ -1, got {alpha}"
        )));
    }
    // Keep the guard below the arch height (small arches occur for B ≪ 0).
    let x_peak = arch_height(alpha, bern);
    let guard = ZERO_GUARD.min(x_peak / 8.0);
    if guard < 10.0 * LAUNCH_EPS {
        return Err(Error::Infeasible(format!(
            "arch height {x_peak:.3e} too small to resolve (α = {alpha}, B = {bern})"
        )));
    }
    let (x0, y0) = launch_state(alpha, bern, LAUNCH_EPS);
    let opts = OdeOptions {
        tol: 1e-11,
        event: Some(EventSpec { index: 0, value: guard, direction: -1 }),
        blowup: 1e8,
        ..Default::default()
    };
    let max_span = 8.0 * std::f64::consts::PI;
    let traj = integrate(
        move |_t, y, dy| {
            let (dx, dv) = sys_b_rhs(alpha, bern, y[0], y[1]);
            dy[0] = dx;
            dy[1] = dv;
        },
        LAUNCH_EPS,
        &[x0, y0],
        max_span,
        &opts,
    )?;
    match traj.termination.clone() {
        Termination::Event { t, y } => {
            let tau = time_to_zero(alpha, bern, y[0], y[1]);
            Ok((t + tau, traj, t))
        }
        Termination::Diverged { t } => Err(Error::Divergence(format!(
            "arch blow-up at θ = {t} (α = {alpha}, B = {bern})"
        ))),
        Termination::ReachedEnd => Err(Error::Divergence(format!(
            "arch did not return to zero within {max_span} (α = {alpha}, B = {bern})"
        ))),
    }
}

/// Peak of the p = -1 arch: the positive root of
/// (1-α)²x²/2 - (B/2)|x|^{2α/(α-1)} = 1.
fn arch_height(alpha: f64, bern: f64) -> f64 {
    let lin = (1.0 - alpha).powi(2);
    let q = 2.0 * alpha / (alpha - 1.0);
    let energy = |x: f64| 0.5 * lin * x * x - 0.5 * bern * x.powf(q) - 1.0;
    let mut hi = std::f64::consts::SQRT_2 / (1.0 - alpha);
    while energy(hi) < 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if energy(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Invert T(α, ·) for a target span by bracketing + bisection
/// (T is monotone in B; the bracket expansion tolerates flat stretches).
pub fn solve_b_for_span(alpha: f64, target: f64) -> Result<f64> {
    let t0 = std::f64::consts::PI / (1.0 - alpha);
    if !(0.0 < target && target < std::f64::consts::PI) {
        return Err(Error::Infeasible(format!("target span {target} outside (0, π)")));
    }
    let t_of = time_span;
    if (target - t0).abs() < 1e-12 {
        return Ok(0.0);
    }
    let (mut lo, mut hi);
    if target > t0 {
        // B > 0 branch, T increasing toward π.
        let mut b = 1.0;
        while t_of(alpha, b)? < target {
            b *= 4.0;
            if b > 1e15 {
                return Err(Error::Infeasible(format!(
                    "span {target} not reachable (T → π only as B → ∞)"
                )));
            }
        }
        lo = 0.0;
        hi = b;
    } else {
        // B < 0 branch, T decreasing toward 0.
        let mut b = -1.0;
        while t_of(alpha, b)? > target {
            b *= 4.0;
            if b < -1e15 {
                return Err(Error::Infeasible(format!("span {target} not reachable")));
            }
        }
        lo = b;
        hi = 0.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() < 1e-13 * (1.0 + mid.abs()) {
            return Ok(mid);
        }
        if t_of(alpha, mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One sign-definite arch of a glued profile.
pub struct Piece {
    /// Absolute start angle of the arch.
    pub start: f64,
    /// θ-length.
    pub span: f64,
    /// ψ = sign · x(θ - start).
    pub sign: f64,
    pub bern: f64,
    /// Local time where the trajectory data ends and the terminal series
    /// takes over.
    tail_start: f64,
    traj: Trajectory,
}

impl Piece {
    fn eval(&self, alpha: f64, tau: f64) -> (f64, f64) {
        let (x, y) = if tau < LAUNCH_EPS {
            launch_state(alpha, self.bern, tau.max(0.0))
        } else if tau > self.tail_start {
            // time-reversal symmetry: mirror of the launch series at the
            // terminal zero
            let (x, y) = launch_state(alpha, self.bern, (self.span - tau).max(0.0));
            (x, -y)
        } else {
            let bern = self.bern;
            let mut rhs = move |_t: f64, y: &[f64], dy: &mut [f64]| {
                let (dx, dv) = sys_b_rhs(alpha, bern, y[0], y[1]);
                dy[0] = dx;
                dy[1] = dv;
            };
            let v = self.traj.eval(tau, &mut rhs);
            (v[0], v[1])
        };
        (self.sign * x, self.sign * y)
    }
}

type ThetaFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A 2π-periodic stream profile with constant reduced pressure.
pub struct Solution2D {
    pub alpha: f64,
    pub p_const: f64,
    pub kind: ProfileKind,
}

pub enum ProfileKind {
    /// Closed form with analytic derivatives; `bern` is the conserved B.
    Analytic { psi: ThetaFn, dpsi: ThetaFn, d2psi: ThetaFn, bern: f64 },
    /// C¹ join of sign-alternating hyperbolic arches at p = -1.
    Glued { pieces: Vec<Piece> },
}

impl Solution2D {
    /// Constant profile ψ ≡ γ (pure rotation); p fixed by the profile ODE.
    pub fn constant(alpha: f64, gamma: f64) -> Self {
        let p = -(1.0 - alpha).powi(2) * gamma * gamma / (2.0 * alpha);
        let bern = bernoulli_2d(gamma, 0.0, alpha, p);
        Self {
            alpha,
            p_const: p,
            kind: ProfileKind::Analytic {
                psi: Arc::new(move |_| gamma),
                dpsi: Arc::new(|_| 0.0),
                d2psi: Arc::new(|_| 0.0),
                bern,
            },
        }
    }

    pub fn psi(&self, theta: f64) -> f64 {
        match &self.kind {
            ProfileKind::Analytic { psi, .. } => psi(theta),
            ProfileKind::Glued { .. } => self.eval_glued(theta).0,
        }
    }

    pub fn psi_prime(&self, theta: f64) -> f64 {
        match &self.kind {
            ProfileKind::Analytic { dpsi, .. } => dpsi(theta),
            ProfileKind::Glued { .. } => self.eval_glued(theta).1,
        }
    }

    pub fn psi_second(&self, theta: f64) -> f64 {
        match &self.kind {
            ProfileKind::Analytic { d2psi, .. } => d2psi(theta),
            // ψ'' from the phase equation at (ψ, ψ'); the flip symmetry keeps
            // (sys-B) valid for signed ψ.
            ProfileKind::Glued { .. } => {
                let (x, _) = self.eval_glued(theta);
                let b = self.piece_bern(theta);
                sys_b_rhs(self.alpha, b, x, 0.0).1
            }
        }
    }

    /// Conserved B of the piece containing θ (profile-wide for analytic).
    pub fn piece_bern(&self, theta: f64) -> f64 {
        match &self.kind {
            ProfileKind::Analytic { bern, .. } => *bern,
            ProfileKind::Glued { pieces } => {
                let tau = wrap_2pi(theta);
                pieces
                    .iter()
                    .rev()
                    .find(|p| tau >= p.start - 1e-14)
                    .unwrap_or(&pieces[0])
                    .bern
            }
        }
    }

    fn eval_glued(&self, theta: f64) -> (f64, f64) {
        let ProfileKind::Glued { pieces } = &self.kind else { unreachable!() };
        let tau = wrap_2pi(theta);
        let piece = pieces
            .iter()
            .rev()
            .find(|p| tau >= p.start - 1e-14)
            .unwrap_or(&pieces[0]);
        piece.eval(self.alpha, (tau - piece.start).clamp(0.0, piece.span))
    }

    /// Conserved quantity evaluated on the profile at θ.
    pub fn bernoulli(&self, theta: f64) -> f64 {
        bernoulli_2d(self.psi(theta), self.psi_prime(theta), self.alpha, self.p_const)
    }

    /// Piece boundaries including the 2π joint; empty for analytic profiles.
    pub fn seams(&self) -> Vec<f64> {
        match &self.kind {
            ProfileKind::Analytic { .. } => Vec::new(),
            ProfileKind::Glued { pieces } => {
                let mut s: Vec<f64> = pieces.iter().map(|p| p.start).collect();
                s.push(2.0 * std::f64::consts::PI);
                s
            }
        }
    }

    /// Residual of the profile ODE at θ:
    /// -2αp - [α(ψ')² + (1-α)²ψ² + (1-α)ψ''ψ].
    pub fn ode_residual(&self, theta: f64) -> f64 {
        let a = self.alpha;
        let (psi, dpsi, d2psi) =
            (self.psi(theta), self.psi_prime(theta), self.psi_second(theta));
        -2.0 * a * self.p_const
            - (a * dpsi * dpsi + (1.0 - a).powi(2) * psi * psi + (1.0 - a) * d2psi * psi)
    }
}

fn wrap_2pi(theta: f64) -> f64 {
    theta.rem_euclid(2.0 * std::f64::consts::PI)
}

/// Glue sign-alternating hyperbolic arches (p = -1) into a 2π-periodic C¹
/// profile. The last entry of `b_list` is re-solved so the spans close up.
pub fn glue_hyperbolic(alpha: f64, b_list: &[f64]) -> Result<Solution2D> {
    let two_pi = 2.0 * std::f64::consts::PI;
    if b_list.len() < 2 {
        return Err(Error::Infeasible("need at least two arches (each span < π)".into()));
    }
    let mut spans = Vec::with_capacity(b_list.len());
    let mut trajs = Vec::with_capacity(b_list.len());
    for &b in &b_list[..b_list.len() - 1] {
        let (t, traj, tail) = span_trajectory(alpha, b)?;
        spans.push(t);
        trajs.push((traj, tail));
    }
    let partial: f64 = spans.iter().sum();
    let target = two_pi - partial;
    if !(0.0 < target && target < std::f64::consts::PI) {
        return Err(Error::Infeasible(format!(
            "remaining span {target:.6} for the last arch is outside (0, π)"
        )));
    }
    let b_last = solve_b_for_span(alpha, target)?;
    let (t_last, traj_last, tail_last) = span_trajectory(alpha, b_last)?;
    if (partial + t_last - two_pi).abs() > 1e-9 {
        return Err(Error::Infeasible(format!(
            "span closure defect {:.3e}",
            partial + t_last - two_pi
        )));
    }
    spans.push(t_last);
    trajs.push((traj_last, tail_last));

    let mut pieces = Vec::with_capacity(b_list.len());
    let mut start = 0.0;
    let mut bs: Vec<f64> = b_list[..b_list.len() - 1].to_vec();
    bs.push(b_last);
    for (i, ((span, (traj, tail)), b)) in spans.into_iter().zip(trajs).zip(bs).enumerate() {
        pieces.push(Piece {
            start,
            span,
            sign: if i % 2 == 0 { 1.0 } else { -1.0 },
            bern: b,
            tail_start: tail,
            traj,
        });
        start += span;
    }
    Ok(Solution2D { alpha, p_const: -1.0, kind: ProfileKind::Glued { pieces } })
}

/// The exceptional α = -1 elliptic family ψ = γ₁ + γ₂ cos 2θ, p = 2(γ₁²-γ₂²).
pub fn elliptic_exceptional(gamma1: f64, gamma2: f64) -> Result<Solution2D> {
    if gamma1 <= gamma2.abs() {
        return Err(Error::InvalidArgument(format!(
            "γ₁ = {gamma1} must exceed |γ₂| = {} for an elliptic profile",
            gamma2.abs()
        )));
    }
    let p = 2.0 * (gamma1 * gamma1 - gamma2 * gamma2);
    Ok(Solution2D {
        alpha: -1.0,
        p_const: p,
        kind: ProfileKind::Analytic {
            psi: Arc::new(move |th| gamma1 + gamma2 * (2.0 * th).cos()),
            dpsi: Arc::new(move |th| -2.0 * gamma2 * (2.0 * th).sin()),
            d2psi: Arc::new(move |th| -4.0 * gamma2 * (2.0 * th).cos()),
            bern: 8.0 * gamma1,
        },
    })
}

/// Count of non-trivial elliptic solutions at B = 1, 0 < p < p_max.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EllipticCount {
    Count(usize),
    /// α = -1: all profiles with 0 < p < p_max are 2π-periodic ellipses.
    ExceptionalFamily,
}

pub fn count_elliptic(alpha: f64) -> Result<EllipticCount> {
    if alpha > -1.0 + 1e-12 {
        return Err(Error::InvalidArgument(format!("α = {alpha} is above -1")));
    }
    if (alpha + 1.0).abs() < 1e-12 {
        return Ok(EllipticCount::ExceptionalFamily);
    }
    if alpha >= -3.5 {
        return Ok(EllipticCount::Count(0));
    }
    // #{ n ∈ ℕ : 2 < n < √(2(1-α)) }
    let s = (2.0 * (1.0 - alpha)).sqrt();
    let n_max = if (s - s.round()).abs() < 1e-12 {
        s.round() as i64 - 1
    } else {
        s.floor() as i64
    };
    Ok(EllipticCount::Count((n_max.max(2) - 2) as usize))
}

/// p_max(α) = (1/(2(1-α))) (α/(α-1)³)^{-α}: the pure-rotation pressure at B = 1.
pub fn p_max(alpha: f64) -> f64 {
    (alpha / (alpha - 1.0).powi(3)).powf(-alpha) / (2.0 * (1.0 - alpha))
}

/// Equilibrium abscissa of (sys-B): (1-α)²x = (α/(α-1)) B x^{(α+1)/(α-1)}.
pub fn equilibrium_x(alpha: f64, bern: f64) -> f64 {
    (alpha * bern / (alpha - 1.0).powi(3)).powf((1.0 - alpha) / 2.0)
}
