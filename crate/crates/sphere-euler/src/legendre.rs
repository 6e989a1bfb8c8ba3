//! Gauss–Legendre nodes/weights and normalized associated Legendre functions.
//!
//! Everything here works in the variable `x = cos φ`. The associated Legendre
//! functions are fully normalized so that the real spherical harmonics built
//! from them have unit L²(S²) norm:
//!
//! ```text
//! ∫_{S²} Y_l^m Y_{l'}^{m'} dσ = δ_{ll'} δ_{mm'},     Y_0^0 = 1/√(4π).
//! ```
//!
//! No Condon–Shortley phase is used.

/// Gauss–Legendre nodes (ascending in x) and weights on [-1, 1].
///
/// Newton iteration on the three-term recurrence; nodes are accurate to a few
/// ulp for the orders used here (n ≲ 1000).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess for the i-th root (descending order).
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_p_and_deriv(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                let (p2, d2) = legendre_p_and_deriv(n, x);
                dp = d2;
                x -= p2 / d2;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, d) = legendre_p_and_deriv(n, 0.0);
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

/// Legendre polynomial P_n(x) and its derivative via the recurrence.
fn legendre_p_and_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (p0 - x * p1) / (1.0 - x * x);
    (p1, d)
}

/// Tables of normalized associated Legendre functions P̄_l^m and their
/// x-derivatives at a fixed set of nodes, for one order m.
///
/// `p[k][j] = P̄_{m+k}^m(x_j)` and `dp[k][j] = d/dx P̄_{m+k}^m(x_j)`,
/// for l = m..=lmax.
pub struct AssocLegendreTable {
    pub m: usize,
    pub lmax: usize,
    pub p: Vec<Vec<f64>>,
    pub dp: Vec<Vec<f64>>,
}

impl AssocLegendreTable {
    /// Build the table for order `m`, degrees l = m..=lmax, at `nodes`.
    pub fn new(m: usize, lmax: usize, nodes: &[f64]) -> Self {
        assert!(lmax >= m);
        let nl = lmax - m + 1;
        let nx = nodes.len();
        let mut p = vec![vec![0.0; nx]; nl];
        let mut dp = vec![vec![0.0; nx]; nl];

        // Seed: P̄_m^m = sqrt((2m+1)!!/(2m)!!) / sqrt(4π) · (1-x²)^{m/2}.
        let mut seed_norm = 1.0 / (4.0 * std::f64::consts::PI).sqrt();
        for k in 1..=m {
            seed_norm *= ((2 * k + 1) as f64 / (2 * k) as f64).sqrt();
        }
        for (j, &x) in nodes.iter().enumerate() {
            let s2 = 1.0 - x * x;
            p[0][j] = seed_norm * s2.powf(m as f64 / 2.0);
        }
        if nl > 1 {
            // P̄_{m+1}^m = sqrt(2m+3) · x · P̄_m^m.
            let c = ((2 * m + 3) as f64).sqrt();
            for (j, &x) in nodes.iter().enumerate() {
                p[1][j] = c * x * p[0][j];
            }
        }
        for l in (m + 2)..=lmax {
            let lf = l as f64;
            let mf = m as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                .sqrt();
            let k = l - m;
            for (j, &x) in nodes.iter().enumerate() {
                p[k][j] = a * (x * p[k - 1][j] - b * p[k - 2][j]);
            }
        }

        // Derivative: (1-x²) d/dx P̄_l^m = e_lm·P̄_{l-1}^m − l·x·P̄_l^m,
        // with e_lm = sqrt((l²-m²)(2l+1)/(2l-1)); the l = m seed has e = 0.
        for l in m..=lmax {
            let lf = l as f64;
            let mf = m as f64;
            let k = l - m;
            let e = if l > m {
                ((lf * lf - mf * mf) * (2.0 * lf + 1.0) / (2.0 * lf - 1.0)).sqrt()
            } else {
                0.0
            };
            for (j, &x) in nodes.iter().enumerate() {
                let s2 = 1.0 - x * x;
                let lower = if l > m { p[k - 1][j] } else { 0.0 };
                dp[k][j] = (e * lower - lf * x * p[k][j]) / s2;
            }
        }

        Self { m, lmax, p, dp }
    }
}
