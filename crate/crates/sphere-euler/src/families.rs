//! Constructors for the explicit homogeneous solution families.
//!
//! Every constructor samples the spherical data (f, v, p) of a stationary
//! solution V = (v + f n̂)/|x|^α on the grid. The families:
//!
//! * parallel shear — V = ⟨0, 0, z(θ)/r_cyl^α⟩;
//! * radial — α = 2, f constant, v = 0, p = -f²/2;
//! * conical axisymmetric — geodesic flow vanishing inside a cone, with or
//!   without swirl;
//! * rotational — tangential rigid-rotation profile b ∝ sin^{-α}φ;
//! * irrotational — f a spherical harmonic Y_l^m, v = ∇f/(1-α), α = 1-l;
//! * lifted 2D — a periodic stream profile ψ(θ) embedded in space;
//! * 2½D — a lifted 2D solution carrying a passively transported third
//!   component z(θ) with |ψ|^α|z|^{1-α} constant.
//!
//! Families outside their C¹ range are still constructible (the grid has no
//! pole nodes); `smooth_range_note` carries the classical range.

use crate::grid::{ScalarField, SphereGrid, TangentField};
use crate::homo2d::Solution2D;
use crate::ops::{grad, sph_harmonic};
use crate::{Error, Result};
use std::sync::Arc;

/// Which constructor produced a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyTag {
    Shear,
    Radial,
    Conical,
    Rotational,
    Irrotational,
    Lifted2d,
    TwoHalfD,
    Custom,
}

impl std::fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FamilyTag::Shear => "shear",
            FamilyTag::Radial => "radial",
            FamilyTag::Conical => "conical",
            FamilyTag::Rotational => "rotational",
            FamilyTag::Irrotational => "irrotational",
            FamilyTag::Lifted2d => "lifted2d",
            FamilyTag::TwoHalfD => "two_half_d",
            FamilyTag::Custom => "custom",
        };
        f.write_str(s)
    }
}

/// Spherical data (α, f, v, p) of a homogeneous velocity field.
#[derive(Debug, Clone)]
pub struct HomogeneousSolution {
    pub alpha: f64,
    /// Normal component.
    pub f: ScalarField,
    /// Tangential component.
    pub v: TangentField,
    /// Spherical pressure.
    pub p: ScalarField,
    pub family: FamilyTag,
    /// The classical C¹ validity range of this family (metadata only).
    pub smooth_range_note: String,
}

impl HomogeneousSolution {
    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.f.grid
    }

    /// Bernoulli function H = |v|² + f² + 2p, pointwise.
    pub fn bernoulli(&self) -> ScalarField {
        let mut h = self.v.norm_sq();
        for (k, hv) in h.values.iter_mut().enumerate() {
            *hv += self.f.values[k] * self.f.values[k] + 2.0 * self.p.values[k];
        }
        h
    }
}

/// Parallel shear flow V = ⟨0, 0, z(θ)/r_cyl^α⟩:
/// f = z cos φ sin^{-α}φ, a = -z sin^{1-α}φ, b = 0, p = 0.
pub fn parallel_shear(
    alpha: f64,
    z: impl Fn(f64) -> f64,
    grid: &Arc<SphereGrid>,
) -> HomogeneousSolution {
    let f = ScalarField::from_fn(grid, |phi, th| {
        z(th) * phi.cos() * phi.sin().powf(-alpha)
    });
    let v = TangentField::from_fn(grid, |phi, th| (-z(th) * phi.sin().powf(1.0 - alpha), 0.0));
    HomogeneousSolution {
        alpha,
        f,
        v,
        p: ScalarField::zeros(grid.clone()),
        family: FamilyTag::Shear,
        smooth_range_note: "C¹ for α ≤ -1".into(),
    }
}

/// The radial flow: α = 2, f ≡ c, v = 0, p = -c²/2.
pub fn radial(c: f64, grid: &Arc<SphereGrid>) -> HomogeneousSolution {
    HomogeneousSolution {
        alpha: 2.0,
        f: ScalarField::from_fn(grid, |_, _| c),
        v: TangentField::zeros(grid.clone()),
        p: ScalarField::from_fn(grid, |_, _| -0.5 * c * c),
        family: FamilyTag::Radial,
        smooth_range_note: "smooth for all c (α = 2)".into(),
    }
}

/// Conical axisymmetric solution with swirl parameter b0 (a0² + b0² = 1):
/// on the sphere, with K = max(a0² sin²φ - b0² cos²φ, 0),
///
/// ```text
/// f = cos φ · K^{-α/2},   a = -K^{(2-α)/2}/sin φ,   b = -b0 K^{(1-α)/2}/sin φ,
/// ```
///
/// p = 0 and the velocity vanishes identically inside the cone K = 0.
pub fn conical_axisym(
    alpha: f64,
    a0: f64,
    b0: f64,
    grid: &Arc<SphereGrid>,
) -> Result<HomogeneousSolution> {
    if (a0 * a0 + b0 * b0 - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "a0² + b0² = {} must equal 1",
            a0 * a0 + b0 * b0
        )));
    }
    let kfun = move |phi: f64| {
        let s = phi.sin();
        let c = phi.cos();
        (a0 * a0 * s * s - b0 * b0 * c * c).max(0.0)
    };
    let f = ScalarField::from_fn(grid, |phi, _| {
        let k = kfun(phi);
        if k == 0.0 {
            0.0
        } else {
            phi.cos() * k.powf(-alpha / 2.0)
        }
    });
    let v = TangentField::from_fn(grid, |phi, _| {
        let k = kfun(phi);
        if k == 0.0 {
            (0.0, 0.0)
        } else {
            (
                -k.powf((2.0 - alpha) / 2.0) / phi.sin(),
                -b0 * k.powf((1.0 - alpha) / 2.0) / phi.sin(),
            )
        }
    });
    let note = if b0 == 0.0 {
        "C¹ for α ≤ -1 (no swirl)".to_string()
    } else {
        "C¹ for α ≤ -2 (with swirl)".to_string()
    };
    Ok(HomogeneousSolution {
        alpha,
        f,
        v,
        p: ScalarField::zeros(grid.clone()),
        family: FamilyTag::Conical,
        smooth_range_note: note,
    })
}

/// Colatitudes of the cone boundary K = 0 (empty without swirl).
pub fn conical_boundaries(a0: f64, b0: f64) -> Vec<f64> {
    if b0 == 0.0 {
        Vec::new()
    } else {
        let phi_c = (b0.abs()).atan2(a0.abs());
        vec![phi_c, std::f64::consts::PI - phi_c]
    }
}

/// Tangential rotation: f = 0, b = A sin^{-α}φ, p = -A²/(2α) sin^{-2α}φ.
pub fn rotational(alpha: f64, amp: f64, grid: &Arc<SphereGrid>) -> Result<HomogeneousSolution> {
    if alpha == 0.0 {
        return Err(Error::InvalidArgument(
            "rotational family degenerates at α = 0 (only the trivial solution)".into(),
        ));
    }
    let v = TangentField::from_fn(grid, |phi, _| (0.0, amp * phi.sin().powf(-alpha)));
    let p = ScalarField::from_fn(grid, |phi, _| {
        -amp * amp / (2.0 * alpha) * phi.sin().powf(-2.0 * alpha)
    });
    Ok(HomogeneousSolution {
        alpha,
        f: ScalarField::zeros(grid.clone()),
        v,
        p,
        family: FamilyTag::Rotational,
        smooth_range_note: "C¹ for α ≤ -1".into(),
    })
}

/// Irrotational solution: f = amp·Y_l^m, v = ∇f/(1-α), α = 1-l,
/// p = -f²/2 - |∇f|²/(2(1-α)²); H ≡ 0.
pub fn irrotational(
    l: usize,
    m: i64,
    amp: f64,
    grid: &Arc<SphereGrid>,
) -> Result<HomogeneousSolution> {
    if l < 1 {
        return Err(Error::InvalidArgument("irrotational family needs l ≥ 1".into()));
    }
    let alpha = 1.0 - l as f64;
    let f = sph_harmonic(l, m, grid)?.map(|v| amp * v);
    let gf = grad(&f);
    let v = gf.scale(1.0 / (1.0 - alpha));
    let p = ScalarField {
        grid: grid.clone(),
        values: (0..grid.len())
            .map(|k| {
                let g2 = gf.a[k] * gf.a[k] + gf.b[k] * gf.b[k];
                -0.5 * f.values[k] * f.values[k] - g2 / (2.0 * (1.0 - alpha).powi(2))
            })
            .collect(),
    };
    Ok(HomogeneousSolution {
        alpha,
        f,
        v,
        p,
        family: FamilyTag::Irrotational,
        smooth_range_note: format!("smooth; α = 1 - l = {alpha}"),
    })
}

/// Lift a 2D stream profile into space:
/// f = -ψ'(θ) sin^{1-α}φ, a = -ψ'(θ) cos φ sin^{-α}φ, b = (1-α)ψ(θ) sin^{-α}φ,
/// p = p_const · sin^{-2α}φ (the 2D pressure is constant in the cylindrical
/// radius, which carries the sin^{-2α}φ factor on the sphere).
pub fn lift_2d(sol2d: &Solution2D, grid: &Arc<SphereGrid>) -> HomogeneousSolution {
    let alpha = sol2d.alpha;
    let p2 = sol2d.p_const;
    let f = ScalarField::from_fn(grid, |phi, th| {
        -sol2d.psi_prime(th) * phi.sin().powf(1.0 - alpha)
    });
    let v = TangentField::from_fn(grid, |phi, th| {
        let s = phi.sin().powf(-alpha);
        (
            -sol2d.psi_prime(th) * phi.cos() * s,
            (1.0 - alpha) * sol2d.psi(th) * s,
        )
    });
    let p = ScalarField::from_fn(grid, |phi, _| p2 * phi.sin().powf(-2.0 * alpha));
    HomogeneousSolution {
        alpha,
        f,
        v,
        p,
        family: FamilyTag::Lifted2d,
        smooth_range_note: "C¹ for α ≤ -1".into(),
    }
}

/// Sign choice for the third component of a 2½D composite, per arch of ψ.
#[derive(Debug, Clone)]
pub enum SignProfile {
    /// (-1)^i on the i-th arch, mirroring the hyperbolic gluing convention.
    Alternating,
    Uniform,
    Custom(Vec<f64>),
}

/// Attach a passively transported third component to a lifted 2D solution.
///
/// On each sign-definite arch of ψ, z = sign · (c / |ψ|^α)^{1/(1-α)}, which
/// enforces |ψ|^α |z|^{1-α} = c and the transport identity
/// αψ'z + (1-α)z'ψ = 0. The composite adds the shear fields of z to the lift.
pub fn two_half_d(
    sol2d: &Solution2D,
    const_c: f64,
    signs: SignProfile,
    grid: &Arc<SphereGrid>,
) -> Result<HomogeneousSolution> {
    let alpha = sol2d.alpha;
    if alpha == 0.0 || alpha == 1.0 {
        return Err(Error::InvalidArgument("2½D needs α ∉ {0, 1}".into()));
    }
    if const_c <= 0.0 {
        return Err(Error::InvalidArgument("const_c must be positive".into()));
    }
    // ψ must be sign-definite inside each arch; with α/(1-α) < 0 an interior
    // zero would make z unbounded.
    let seams = sol2d.seams();
    let piece_sign = |i: usize| -> f64 {
        match &signs {
            SignProfile::Alternating => {
                if i % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
            SignProfile::Uniform => 1.0,
            SignProfile::Custom(v) => v.get(i).copied().unwrap_or(1.0),
        }
    };
    if seams.is_empty() {
        // Single sign-definite profile: probe for interior zeros.
        for k in 0..256 {
            let th = 2.0 * std::f64::consts::PI * k as f64 / 256.0;
            if sol2d.psi(th).abs() < 1e-12 {
                return Err(Error::Infeasible(
                    "ψ vanishes inside a piece; z would be unbounded".into(),
                ));
            }
        }
    }
    // seams = [0, s_1, .., 2π] for glued profiles; θ ∈ [s_i, s_{i+1}) is piece i.
    let piece_index = |th: f64| -> usize {
        if seams.is_empty() {
            return 0;
        }
        let tau = th.rem_euclid(2.0 * std::f64::consts::PI);
        seams[..seams.len() - 1]
            .iter()
            .filter(|&&s| tau >= s)
            .count()
            .saturating_sub(1)
    };
    let z_of = |th: f64| -> f64 {
        let psi = sol2d.psi(th);
        let sign = piece_sign(piece_index(th));
        sign * (const_c / psi.abs().powf(alpha)).powf(1.0 / (1.0 - alpha))
    };
    let lift = lift_2d(sol2d, grid);
    let shear_part = parallel_shear(alpha, z_of, grid);
    let f = lift.f.zip_with(&shear_part.f, |u, v| u + v);
    let v = lift.v.add(&shear_part.v);
    Ok(HomogeneousSolution {
        alpha,
        f,
        v,
        p: lift.p,
        family: FamilyTag::TwoHalfD,
        smooth_range_note: "C¹ for α ≤ -1 (composite)".into(),
    })
}

/// Explicit constant-pressure axisymmetric solution through the base point
/// (φ0, a0, b0), valid on the band |v0|²R² - b0² > 0, R = sin φ/sin φ0;
/// zero inside the cone. Coincides with `conical_axisym` up to amplitude
/// normalization.
pub fn explicit_const_p(
    alpha: f64,
    phi0: f64,
    a0: f64,
    b0: f64,
    grid: &Arc<SphereGrid>,
) -> Result<HomogeneousSolution> {
    if a0 == 0.0 && b0 != 0.0 {
        return Err(Error::InvalidArgument(
            "a0 = 0 with swirl has no nontrivial solution (v must vanish)".into(),
        ));
    }
    let v0sq = a0 * a0 + b0 * b0;
    if v0sq == 0.0 {
        return Err(Error::InvalidArgument("degenerate base point v0 = 0".into()));
    }
    let sgn = a0.signum();
    let a0pow = a0.abs().powf(1.0 - alpha);
    let s0 = phi0.sin();
    let f = ScalarField::from_fn(grid, |phi, _| {
        let r = phi.sin() / s0;
        let d = v0sq * r * r - b0 * b0;
        if d <= 0.0 {
            0.0
        } else {
            -sgn * v0sq * r * phi.cos() / phi.sin() * d.powf(-alpha / 2.0) / a0pow
        }
    });
    let v = TangentField::from_fn(grid, |phi, _| {
        let r = phi.sin() / s0;
        let d = v0sq * r * r - b0 * b0;
        if d <= 0.0 {
            (0.0, 0.0)
        } else {
            (
                sgn * d.powf((2.0 - alpha) / 2.0) / (a0pow * r),
                b0 * d.powf((1.0 - alpha) / 2.0) / (a0pow * r),
            )
        }
    });
    Ok(HomogeneousSolution {
        alpha,
        f,
        v,
        p: ScalarField::zeros(grid.clone()),
        family: FamilyTag::Conical,
        smooth_range_note: "C¹ for α ≤ -2 with swirl, α ≤ -1 without".into(),
    })
}
