//! Lattice Green's functions `G^m = (-Δ + m²)^{-1}` on `Z^d`.
//!
//! Site values come from the one-dimensional representation
//! `G^m(0,x) = ∫_0^∞ e^{-(m²+2d)t} Π_k I_{x_k}(2t) dt`, evaluated with
//! exponentially scaled Bessel functions. The origin value can be cross-checked
//! against the momentum-space integral with [`watson_constant`].

mod io;
mod table;

use std::f64::consts::PI;

use thiserror::Error;

use crate::lattice::{Site, MAX_DIM};
use crate::numeric::{bessel_ie_orders, gauss_legendre, GaussKronrod, NeumaierSum, QuadError};

pub use io::{read_table, write_csv, write_table, LGF_MAGIC, LGF_VERSION};
pub use table::{build_table, build_table_with_cap, GreenTable, DEFAULT_ORBIT_CAP};

/// Default absolute precision target for table entries.
pub const DEFAULT_PRECISION: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum GreenError {
    #[error("the massless Green's function diverges in dimension {dim} (need d >= 3)")]
    Divergent { dim: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("site {site} lies outside the table box of radius {radius}")]
    OutOfTable { site: Site, radius: u32 },
    #[error("table would need {count} orbit representatives, above the cap of {cap}")]
    TooManyOrbits { count: u64, cap: u64 },
    #[error("quadrature failure: {0}")]
    Quadrature(#[from] QuadError),
    #[error("Fourier quadrature did not converge: last change {last_change:e} > tol {tol:e}")]
    NotConverged { last_change: f64, tol: f64 },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed table file: {0}")]
    Format(String),
}

pub fn check_inputs(dim: usize, mass: f64, tol: f64) -> Result<(), GreenError> {
    if dim == 0 || dim > MAX_DIM {
        return Err(GreenError::InvalidInput(format!(
            "dimension {dim} outside 1..={MAX_DIM}"
        )));
    }
    if !mass.is_finite() || mass < 0.0 {
        return Err(GreenError::InvalidInput(format!("mass must be finite and >= 0, got {mass}")));
    }
    if !tol.is_finite() || tol <= 0.0 {
        return Err(GreenError::InvalidInput(format!("tolerance must be finite and > 0, got {tol}")));
    }
    if mass == 0.0 && dim < 3 {
        return Err(GreenError::Divergent { dim });
    }
    Ok(())
}

/// Upper end of the numerically integrated range for the massless case.
const MASSLESS_T_MAX: f64 = 1e8;

/// Tail `∫_{t0}^∞ Π_k e^{-2t} I_{ν_k}(2t) dt` from the large-argument
/// expansion of each factor, kept to second order in `1/t`.
fn massless_tail(orders: &[u32], t0: f64) -> f64 {
    let d = orders.len() as f64;
    let mu1: Vec<f64> = orders
        .iter()
        .map(|&n| (4.0 * (n as f64).powi(2) - 1.0) / 8.0)
        .collect();
    let mu2: Vec<f64> = orders
        .iter()
        .map(|&n| {
            let m = 4.0 * (n as f64).powi(2);
            (m - 1.0) * (m - 9.0) / 128.0
        })
        .collect();
    let a: f64 = mu1.iter().sum::<f64>() / 2.0;
    let mut b: f64 = mu2.iter().sum::<f64>() / 4.0;
    for i in 0..mu1.len() {
        for j in i + 1..mu1.len() {
            b += mu1[i] * mu1[j] / 4.0;
        }
    }
    let h = d / 2.0;
    (4.0 * PI).powf(-h)
        * (t0.powf(1.0 - h) / (h - 1.0) - a * t0.powf(-h) / h + b * t0.powf(-h - 1.0) / (h + 1.0))
}

/// `G^m(0, x)` with absolute error at most `tol`.
pub fn green_at(dim: usize, mass: f64, x: &Site, tol: f64) -> Result<f64, GreenError> {
    check_inputs(dim, mass, tol)?;
    if x.dim() != dim {
        return Err(GreenError::InvalidInput(format!(
            "site {x} has dimension {}, expected {dim}",
            x.dim()
        )));
    }
    let rep = x.orbit_representative();
    let orders: Vec<u32> = rep.coords().iter().map(|&c| c as u32).collect();
    let top = *orders.iter().max().unwrap_or(&0) as usize;
    let m2 = mass * mass;
    let integrand = |t: f64| -> f64 {
        let mut ie = [0.0f64; 64];
        let mut buf;
        let ie: &mut [f64] = if top < 64 {
            &mut ie[..=top]
        } else {
            buf = vec![0.0; top + 1];
            &mut buf
        };
        bessel_ie_orders(2.0 * t, ie);
        let mut v = (-m2 * t).exp();
        for &n in &orders {
            v *= ie[n as usize];
        }
        v
    };

    // Below m^2 t = 80 the exponential damping has not yet killed the tail.
    let massive_cut = if m2 > 0.0 { 80.0 / m2 } else { f64::INFINITY };
    let (t_hi, add_tail) = if m2 == 0.0 || massive_cut > 1e30 {
        (MASSLESS_T_MAX, true)
    } else {
        (massive_cut.max(2.0), false)
    };

    let gk = GaussKronrod {
        abs_tol: tol / 4.0,
        rel_tol: 0.0,
        max_intervals: 4000,
    };
    let near = gk.integrate(integrand, 0.0, 1.0)?;
    let far = gk.integrate(
        |u: f64| {
            let t = u.exp();
            t * integrand(t)
        },
        0.0,
        t_hi.ln(),
    )?;
    let tail = if add_tail {
        (-m2 * t_hi).exp() * massless_tail(&orders, t_hi)
    } else {
        0.0
    };
    let mut acc = NeumaierSum::new();
    acc.add(near);
    acc.add(far);
    acc.add(tail);
    Ok(acc.value())
}

/// `G(0,0)` of the massless Laplacian from the momentum-space integral
/// `(2π)^{-d} ∫ dp / (2 Σ_k (1 - cos p_k))`.
///
/// One momentum is integrated in closed form; the remaining `d-1` are mapped
/// onto pyramids (Duffy transform), which removes the `1/|p|` singularity and
/// leaves an analytic integrand for a tensor Gauss–Legendre rule. The rule is
/// refined by doubling until successive results differ by less than `tol`.
pub fn watson_constant(dim: usize, tol: f64) -> Result<f64, GreenError> {
    check_inputs(dim, 0.0, tol)?;
    let reduced = dim - 1;
    let max_points: usize = 50_000_000;
    let mut n = 8usize;
    let mut prev: Option<f64> = None;
    let mut last_change = f64::INFINITY;
    while n.pow(reduced as u32) <= max_points {
        let value = duffy_rule(reduced, n);
        if let Some(p) = prev {
            last_change = (value - p).abs();
            if last_change < tol {
                return Ok(value);
            }
        }
        prev = Some(value);
        n *= 2;
    }
    Err(GreenError::NotConverged { last_change, tol })
}

/// `π^{-D} ∫_{[0,π]^D} dq (a (a+4))^{-1/2}` with `a = Σ 4 sin²(q_k/2)`,
/// where `D = d - 1`, on `n` points per axis.
fn duffy_rule(reduced: usize, n: usize) -> f64 {
    let (x, w) = gauss_legendre(n);
    // s in [0, π], w_i in [0, 1]
    let s_nodes: Vec<(f64, f64)> = x
        .iter()
        .zip(&w)
        .map(|(&x, &w)| (0.5 * PI * (x + 1.0), 0.5 * PI * w))
        .collect();
    let u_nodes: Vec<(f64, f64)> = x
        .iter()
        .zip(&w)
        .map(|(&x, &w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect();
    let inner = reduced - 1;
    let total_inner = n.pow(inner as u32);
    let mut acc = NeumaierSum::new();
    let mut idx = vec![0usize; inner];
    for &(s, ws) in &s_nodes {
        let half_s = 0.5 * s;
        let sinc_top = half_s.sin() / half_s;
        let mut level = NeumaierSum::new();
        idx.iter_mut().for_each(|i| *i = 0);
        for _ in 0..total_inner {
            // q = s * (w_1, ..., w_{D-1}, 1); a = s^2 * Q
            let mut q = sinc_top * sinc_top;
            let mut weight = 1.0;
            for &k in idx.iter() {
                let (u, wu) = u_nodes[k];
                let arg = half_s * u;
                let sn = if arg == 0.0 { u } else { arg.sin() / half_s };
                q += sn * sn;
                weight *= wu;
            }
            let a_over_s2 = q;
            let val = s.powi(reduced as i32 - 2) / (a_over_s2 * (s * s * a_over_s2 + 4.0)).sqrt();
            level.add(weight * val);
            for k in (0..inner).rev() {
                idx[k] += 1;
                if idx[k] < n {
                    break;
                }
                idx[k] = 0;
            }
        }
        acc.add(ws * level.value());
    }
    reduced as f64 * acc.value() / PI.powi(reduced as i32)
}
