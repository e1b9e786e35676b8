//! Exponentially scaled modified Bessel functions of the first kind,
//! `e^{-z} I_n(z)`, for integer order and non-negative argument.
//!
//! Moderate arguments use Miller's backward recurrence normalised by the
//! generating-function identity `e^{-z} (I_0 + 2 Σ_k I_k) = 1`, which needs no
//! exponential and yields every order up to `n` in one pass. Large arguments
//! use the Hankel asymptotic expansion when `n^2 / (2z)` is small enough that
//! its terms stay bounded.

use std::f64::consts::PI;

/// Above this argument the asymptotic expansion is used.
const ASYMPTOTIC_Z: f64 = 600.0;

const RESCALE_AT: f64 = 1e200;

/// Fill `out[k] = e^{-z} I_k(z)` for `k < out.len()` by backward recurrence.
fn miller(z: f64, out: &mut [f64]) {
    let n_max = out.len().saturating_sub(1);
    let start = n_max + 16 + (80.0 * z.max(1.0)).sqrt().ceil() as usize;
    let two_over_z = 2.0 / z;
    let mut above = 0.0f64; // f_{k+1}
    let mut cur = 1e-280f64; // f_k
    let mut norm = 0.0f64;
    out.iter_mut().for_each(|v| *v = 0.0);
    for k in (1..=start).rev() {
        if k <= n_max {
            out[k] = cur;
        }
        norm += 2.0 * cur;
        let below = above + (k as f64) * two_over_z * cur;
        above = cur;
        cur = below;
        if cur > RESCALE_AT {
            let s = 1.0 / RESCALE_AT;
            cur *= s;
            above *= s;
            norm *= s;
            for v in out[k.min(n_max + 1)..].iter_mut() {
                *v *= s;
            }
        }
    }
    out[0] = cur;
    norm += cur;
    for v in out.iter_mut() {
        *v /= norm;
    }
}

fn asymptotic(n: u32, z: f64) -> f64 {
    let mu = 4.0 * (n as f64) * (n as f64);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= -(mu - odd * odd) / (8.0 * k as f64 * z);
        let a = term.abs();
        if a > prev && a < 1e-10 {
            // the series has started to diverge; its smallest term is
            // already below double precision
            break;
        }
        sum += term;
        if a < 1e-17 * sum.abs() {
            break;
        }
        prev = a;
    }
    sum / (2.0 * PI * z).sqrt()
}

fn check_argument(z: f64) {
    assert!(z.is_finite() && z >= 0.0, "bessel_ie: invalid argument {z}");
}

/// `e^{-z} I_n(z)` for `z >= 0`.
///
/// Panics on negative or non-finite `z`.
pub fn bessel_ie(n: u32, z: f64) -> f64 {
    check_argument(z);
    if z == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let nf = n as f64;
    if z >= ASYMPTOTIC_Z && nf * nf <= 10.0 * z {
        return asymptotic(n, z);
    }
    let mut out = vec![0.0; n as usize + 1];
    miller(z, &mut out);
    out[n as usize]
}

/// `out[k] = e^{-z} I_k(z)` for every `k < out.len()`.
pub fn bessel_ie_orders(z: f64, out: &mut [f64]) {
    check_argument(z);
    if out.is_empty() {
        return;
    }
    if z == 0.0 {
        out.iter_mut().for_each(|v| *v = 0.0);
        out[0] = 1.0;
        return;
    }
    let top = (out.len() - 1) as f64;
    if z >= ASYMPTOTIC_Z && top * top <= 10.0 * z {
        for (k, v) in out.iter_mut().enumerate() {
            *v = asymptotic(k as u32, z);
        }
    } else {
        miller(z, out);
    }
}
