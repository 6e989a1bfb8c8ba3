//! Longitude-direction FFT helpers.
//!
//! Plans are cached per thread, so field operations stay safe to call
//! concurrently without locking around the FFT library.

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

thread_local! {
    static PLANS: RefCell<HashMap<(usize, bool), Arc<dyn Fft<f64>>>> =
        RefCell::new(HashMap::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cell| {
        let mut map = cell.borrow_mut();
        map.entry((n, inverse))
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                if inverse {
                    planner.plan_fft_inverse(n)
                } else {
                    planner.plan_fft_forward(n)
                }
            })
            .clone()
    })
}

/// Forward FFT of one longitude row (no normalization).
pub fn fft_forward(row: &mut [Complex64]) {
    plan(row.len(), false).process(row);
}

/// Inverse FFT of one longitude row, normalized by 1/n.
pub fn fft_inverse(row: &mut [Complex64]) {
    let n = row.len();
    plan(n, true).process(row);
    let s = 1.0 / n as f64;
    for v in row.iter_mut() {
        *v *= s;
    }
}

/// Signed wavenumber of FFT bin k for length n (Nyquist mapped to n/2).
#[inline]
pub fn wavenumber(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// ∂/∂θ of uniformly sampled periodic data, spectral accuracy.
/// The Nyquist mode is dropped (its derivative is not representable).
pub fn theta_derivative_rows(values: &[f64], nlat: usize, nlon: usize) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    let mut buf = vec![Complex64::default(); nlon];
    for i in 0..nlat {
        for j in 0..nlon {
            buf[j] = Complex64::new(values[i * nlon + j], 0.0);
        }
        fft_forward(&mut buf);
        for (k, v) in buf.iter_mut().enumerate() {
            let m = wavenumber(k, nlon);
            *v = if 2 * k == nlon {
                Complex64::default()
            } else {
                Complex64::new(0.0, m as f64) * *v
            };
        }
        fft_inverse(&mut buf);
        for j in 0..nlon {
            out[i * nlon + j] = buf[j].re;
        }
    }
    out
}
