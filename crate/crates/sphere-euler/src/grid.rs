//! Grid and field types on the unit sphere.
//!
//! Nodes are the tensor product of Gauss–Legendre points in `x = cos φ`
//! (mapped to colatitudes `φ ∈ (0, π)`, strictly increasing) with a uniform
//! longitude grid `θ_j = 2πj/nlon`. No node sits on a pole, so fields that
//! are singular there can still be sampled, and the quadrature
//!
//! ```text
//! ∫_{S²} s dσ ≈ Σ_ij w_i^{GL} (2π/nlon) s(φ_i, θ_j)
//! ```
//!
//! is exact for integrands whose zonal mean is a polynomial in cos φ of
//! degree ≤ 2·nlat − 1.
//!
//! Tangent fields are stored in the orthonormal frame `(e_φ, e_θ)`:
//! `v = a e_φ + b e_θ`, with `a = v^φ` and `b = sin φ · v^θ` in coordinate
//! components.

use crate::legendre::{gauss_legendre, AssocLegendreTable};
use crate::{Error, Result};
use std::sync::{Arc, Mutex, OnceLock};

/// Quadrature nodes, weights and cached spectral tables on S².
pub struct SphereGrid {
    /// Number of colatitude nodes.
    pub nlat: usize,
    /// Number of longitude nodes (even).
    pub nlon: usize,
    /// Colatitudes, strictly increasing in (0, π).
    pub phi_nodes: Vec<f64>,
    /// Longitudes θ_j = 2πj/nlon in [0, 2π).
    pub theta_nodes: Vec<f64>,
    /// Per-node quadrature weights; one entry per latitude (constant in θ).
    /// The full-grid weight of node (i, j) is `lat_weights[i] * 2π/nlon`.
    pub lat_weights: Vec<f64>,
    /// Gauss nodes x_i = cos φ_i, decreasing (i.e. aligned with phi_nodes).
    pub x_nodes: Vec<f64>,
    /// sin φ_i.
    pub sin_phi: Vec<f64>,
    /// Associated Legendre tables per order m, built lazily.
    assoc: Mutex<Vec<Option<Arc<AssocLegendreTable>>>>,
    /// m = 0 table (used constantly by the differentiation engine).
    zonal: OnceLock<Arc<AssocLegendreTable>>,
}

impl std::fmt::Debug for SphereGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SphereGrid({}x{})", self.nlat, self.nlon)
    }
}

impl SphereGrid {
    /// Gauss–Legendre × uniform grid. Requires nlat ≥ 4, nlon ≥ 4, nlon even.
    pub fn build(nlat: usize, nlon: usize) -> Result<Arc<Self>> {
        if nlat < 4 {
            return Err(Error::InvalidGrid(format!("nlat = {nlat} < 4")));
        }
        if nlon < 4 || nlon % 2 != 0 {
            return Err(Error::InvalidGrid(format!("nlon = {nlon} must be even and ≥ 4")));
        }
        let (x_asc, w_asc) = gauss_legendre(nlat);
        // φ = acos(x) reverses order; store φ ascending.
        let mut x_nodes: Vec<f64> = x_asc.iter().rev().copied().collect();
        let lat_weights: Vec<f64> = w_asc.iter().rev().copied().collect();
        // Clamp symmetry exactly for odd nlat.
        if nlat % 2 == 1 {
            x_nodes[nlat / 2] = 0.0;
        }
        let phi_nodes: Vec<f64> = x_nodes.iter().map(|x| x.acos()).collect();
        let sin_phi: Vec<f64> = x_nodes.iter().map(|x| (1.0 - x * x).sqrt()).collect();
        let theta_nodes: Vec<f64> = (0..nlon)
            .map(|j| 2.0 * std::f64::consts::PI * j as f64 / nlon as f64)
            .collect();
        Ok(Arc::new(Self {
            nlat,
            nlon,
            phi_nodes,
            theta_nodes,
            lat_weights,
            x_nodes,
            sin_phi,
            assoc: Mutex::new(vec![None; nlon / 2 + 1]),
            zonal: OnceLock::new(),
        }))
    }

    /// Number of grid nodes.
    pub fn len(&self) -> usize {
        self.nlat * self.nlon
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Flat index of node (i, j).
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.nlon + j
    }

    /// Full quadrature weight of node (i, j).
    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.lat_weights[i] * 2.0 * std::f64::consts::PI / self.nlon as f64
    }

    /// Maximum resolvable spherical-harmonic degree.
    pub fn lmax(&self) -> usize {
        self.nlat - 1
    }

    /// Associated Legendre table for order m (cached).
    pub fn assoc_table(&self, m: usize) -> Arc<AssocLegendreTable> {
        if m == 0 {
            return self
                .zonal
                .get_or_init(|| Arc::new(AssocLegendreTable::new(0, self.lmax(), &self.x_nodes)))
                .clone();
        }
        let mut cache = self.assoc.lock().unwrap();
        if let Some(t) = &cache[m] {
            return t.clone();
        }
        let t = Arc::new(AssocLegendreTable::new(m, self.lmax(), &self.x_nodes));
        cache[m] = Some(t.clone());
        t
    }

    /// Longitude spacing 2π/nlon.
    pub fn dtheta(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.nlon as f64
    }
}

/// A sampled real scalar function on a [`SphereGrid`].
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub grid: Arc<SphereGrid>,
    /// Row-major samples: `values[i * nlon + j]` at (φ_i, θ_j).
    pub values: Vec<f64>,
}

/// A sampled tangent vector field, components in the unit frame (e_φ, e_θ).
#[derive(Debug, Clone)]
pub struct TangentField {
    pub grid: Arc<SphereGrid>,
    /// e_φ components.
    pub a: Vec<f64>,
    /// e_θ components.
    pub b: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Arc<SphereGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "value count {} does not match grid size {}",
                values.len(),
                grid.len()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("ScalarField::new"));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<SphereGrid>) -> Self {
        let n = grid.len();
        Self { grid, values: vec![0.0; n] }
    }

    /// Sample `f(φ, θ)` at the nodes.
    pub fn from_fn(grid: &Arc<SphereGrid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for &phi in &grid.phi_nodes {
            for &theta in &grid.theta_nodes {
                values.push(f(phi, theta));
            }
        }
        Self { grid: grid.clone(), values }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Self {
        assert!(Arc::ptr_eq(&self.grid, &other.grid) || self.grid.len() == other.grid.len());
        Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&u, &v)| f(u, v))
                .collect(),
        }
    }

    pub fn linf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Weighted L² norm: sqrt(∫ s² dσ).
    pub fn l2(&self) -> f64 {
        quadrature(&self.map(|v| v * v)).max(0.0).sqrt()
    }
}

impl TangentField {
    pub fn new(grid: Arc<SphereGrid>, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != grid.len() || b.len() != grid.len() {
            return Err(Error::InvalidArgument(
                "component count does not match grid size".into(),
            ));
        }
        if !a.iter().chain(b.iter()).all(|v| v.is_finite()) {
            return Err(Error::NonFinite("TangentField::new"));
        }
        Ok(Self { grid, a, b })
    }

    pub fn zeros(grid: Arc<SphereGrid>) -> Self {
        let n = grid.len();
        Self { grid, a: vec![0.0; n], b: vec![0.0; n] }
    }

    /// Sample components `(a, b) = f(φ, θ)` at the nodes.
    pub fn from_fn(grid: &Arc<SphereGrid>, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        let mut a = Vec::with_capacity(grid.len());
        let mut b = Vec::with_capacity(grid.len());
        for &phi in &grid.phi_nodes {
            for &theta in &grid.theta_nodes {
                let (ai, bi) = f(phi, theta);
                a.push(ai);
                b.push(bi);
            }
        }
        Self { grid: grid.clone(), a, b }
    }

    /// Pointwise squared magnitude a² + b² as a scalar field.
    pub fn norm_sq(&self) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            values: self
                .a
                .iter()
                .zip(&self.b)
                .map(|(&a, &b)| a * a + b * b)
                .collect(),
        }
    }

    pub fn linf(&self) -> f64 {
        self.a
            .iter()
            .zip(&self.b)
            .fold(0.0, |m, (a, b)| m.max((a * a + b * b).sqrt()))
    }

    /// Pointwise dot product with another tangent field.
    pub fn dot(&self, other: &TangentField) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            values: (0..self.a.len())
                .map(|k| self.a[k] * other.a[k] + self.b[k] * other.b[k])
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            a: self.a.iter().map(|v| c * v).collect(),
            b: self.b.iter().map(|v| c * v).collect(),
        }
    }

    pub fn add(&self, other: &TangentField) -> Self {
        Self {
            grid: self.grid.clone(),
            a: self.a.iter().zip(&other.a).map(|(x, y)| x + y).collect(),
            b: self.b.iter().zip(&other.b).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn sub(&self, other: &TangentField) -> Self {
        Self {
            grid: self.grid.clone(),
            a: self.a.iter().zip(&other.a).map(|(x, y)| x - y).collect(),
            b: self.b.iter().zip(&other.b).map(|(x, y)| x - y).collect(),
        }
    }

    /// Multiply componentwise by a scalar field.
    pub fn mul_scalar(&self, s: &ScalarField) -> Self {
        Self {
            grid: self.grid.clone(),
            a: self.a.iter().zip(&s.values).map(|(x, y)| x * y).collect(),
            b: self.b.iter().zip(&s.values).map(|(x, y)| x * y).collect(),
        }
    }
}

/// Surface integral ∫_{S²} s dσ by Gauss–Legendre × trapezoid quadrature.
pub fn quadrature(s: &ScalarField) -> f64 {
    let g = &s.grid;
    let dth = g.dtheta();
    let mut total = 0.0;
    for i in 0..g.nlat {
        let mut row = 0.0;
        for j in 0..g.nlon {
            row += s.values[g.idx(i, j)];
        }
        total += g.lat_weights[i] * row;
    }
    total * dth
}
