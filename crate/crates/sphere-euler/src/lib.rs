//! Numerical laboratory for stationary homogeneous solutions of the 3D Euler
//! equations.
//!
//! A velocity/pressure pair of the form
//!
//! ```text
//! V(x) = (v + f n̂) / |x|^α,      P(x) = p / |x|^{2α}
//! ```
//!
//! with `v` a tangent field on the unit sphere, `f` the normal component and
//! `p` the spherical pressure, solves the stationary Euler system iff
//! `(f, v, p)` solves a reduced system on S². This crate provides
//!
//! * discrete differential geometry on S² (Gauss–Legendre × uniform grid,
//!   spectral first-order operators, Laplace–Beltrami, Poisson solver,
//!   spherical harmonics) — [`grid`], [`ops`];
//! * constructors for every explicit solution family (parallel shear, radial,
//!   conical, rotational, irrotational harmonics, lifted 2D profiles and
//!   2½D composites) — [`families`];
//! * residual verification of all equivalent formulations of the reduced
//!   system, plus derived quantities such as the Bernoulli function H,
//!   vorticity parts and the geodesic defect — [`residuals`];
//! * the 2D Hamiltonian reduction with its conserved quantity, time-span
//!   function and hyperbolic gluing — [`homo2d`];
//! * the axisymmetric ODE system with its two first integrals and the
//!   pole-to-pole shooting scan — [`axisym`];
//! * stream-field construction, the energy-flux functional Π = −½∫ f H dσ
//!   with its vanishing-moment identities, and the Landau viscous profiles —
//!   [`onsager`], [`landau`].

pub mod axisym;
pub mod diff;
pub mod families;
pub mod grid;
pub mod homo2d;
pub mod io;
pub mod landau;
pub mod legendre;
pub mod ode;
pub mod onsager;
pub mod ops;
pub mod residuals;

mod fourier;

pub use diff::DiffScheme;
pub use families::{FamilyTag, HomogeneousSolution};
pub use grid::{ScalarField, SphereGrid, TangentField};
pub use residuals::ResidualReport;

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error("Poisson problem not solvable: {0}")]
    NotSolvable(String),
    #[error("singular right-hand side: {0}")]
    SingularRhs(String),
    #[error("trajectory diverged: {0}")]
    Divergence(String),
    #[error("infeasible construction: {0}")]
    Infeasible(String),
    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
