//! Comparison of Monte Carlo runs with series coefficients and with the
//! infrared and moment bounds.

use serde::{Deserialize, Serialize};

use super::stats::{blocking, weighted_line_fit};
use super::{MCResult, McError};
use crate::engine::{Coefficient, SeriesResult};
use crate::numeric::NeumaierSum;

/// `G_L(0, x) = L^{-d} Σ_{p ≠ 0} cos(p·x) / λ_p` on the torus, indexed like
/// [`super::SpinConfig`] sites (`x = Σ_k x_k L^k`).
pub fn torus_green(dim: usize, l: usize) -> Vec<f64> {
    let volume = l.pow(dim as u32);
    let cos_table: Vec<f64> = (0..l)
        .map(|j| (std::f64::consts::TAU * j as f64 / l as f64).cos())
        .collect();
    let coords = |x: usize| -> Vec<usize> { (0..dim).map(|k| (x / l.pow(k as u32)) % l).collect() };
    let momenta: Vec<(Vec<usize>, f64)> = (1..volume)
        .map(|p| {
            let c = coords(p);
            let lambda: f64 = c.iter().map(|&j| 2.0 - 2.0 * cos_table[j]).sum();
            (c, 1.0 / lambda)
        })
        .collect();
    (0..volume)
        .map(|x| {
            let cx = coords(x);
            let mut acc = NeumaierSum::new();
            for (p, w) in &momenta {
                let phase: usize = p.iter().zip(&cx).map(|(a, b)| a * b).sum::<usize>() % l;
                acc.add(cos_table[phase] * w);
            }
            acc.value() / volume as f64
        })
        .collect()
}

/// Magnetization coefficients `a_0, a_1, a_2` with the infinite-lattice
/// Green function replaced by the torus one, which removes the leading
/// finite-size shift of the `⟨|M|⟩` estimator.
pub fn torus_series(dim: usize, l: usize, n_components: usize) -> SeriesResult {
    let g = torus_green(dim, l);
    let g0 = g[0];
    let n = n_components as f64;
    let volume = g.len();
    let step = |x: usize, axis: usize| -> usize {
        let stride = l.pow(axis as u32);
        let c = (x / stride) % l;
        x - c * stride + ((c + 1) % l) * stride
    };
    let mut acc = NeumaierSum::new();
    for x in 0..volume {
        for axis in 0..dim {
            let grad = g[step(x, axis)] - g[x];
            let gg = 2.0 * (g0 - g[step(0, axis)]);
            acc.add(grad * grad * (0.5 * gg + (n - 2.0) * g0));
        }
    }
    let pref = (n - 1.0) / 2.0;
    let exact = |value| Coefficient { value, uncertainty: 0.0 };
    SeriesResult {
        coefficients: vec![
            exact(1.0),
            exact(-pref * g0),
            exact(pref * ((3.0 * n - 5.0) / 4.0 * g0 * g0 - acc.value())),
        ],
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyStatus {
    Pass,
    Fail,
    /// Every residual is within two standard errors of zero.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub temperature: f64,
    pub measured: f64,
    pub measured_error: f64,
    pub predicted: f64,
    pub residual: f64,
    pub residual_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub order: usize,
    pub estimator: String,
    pub threshold: f64,
    pub rows: Vec<ResidualRow>,
    pub slope: f64,
    pub slope_error: f64,
    /// Whether every residual has the same sign.
    pub sign_consistent: bool,
    pub status: VerifyStatus,
}

/// Residuals `r_j = measured - Σ_{i ≤ n} a_i T_j^i` and the slope of
/// `log|r_j|` against `log T_j`; passes when the slope reaches `threshold`.
pub fn verify_series(
    series: &SeriesResult,
    runs: &[MCResult],
    order: usize,
    estimator: &str,
    threshold: f64,
) -> Result<VerifyReport, McError> {
    if runs.len() < 3 {
        return Err(McError::Mismatch(format!("need at least 3 temperatures, got {}", runs.len())));
    }
    if order >= series.coefficients.len() {
        return Err(McError::Mismatch(format!(
            "series has {} coefficients, order {order} requested",
            series.coefficients.len()
        )));
    }
    let p0 = &runs[0].params;
    for r in runs {
        let p = &r.params;
        if (p.dim, p.n_components, p.l) != (p0.dim, p0.n_components, p0.l) {
            return Err(McError::Mismatch("runs differ in (d, N, L)".into()));
        }
    }
    let mut rows = Vec::with_capacity(runs.len());
    for r in runs {
        let t = r.params.temperature;
        let est = r.estimate(estimator)?;
        let mut predicted = 0.0;
        let mut trunc = 0.0;
        for (i, c) in series.coefficients.iter().take(order + 1).enumerate() {
            predicted += c.value * t.powi(i as i32);
            trunc += c.uncertainty * t.powi(i as i32);
        }
        let residual = est.value - predicted;
        rows.push(ResidualRow {
            temperature: t,
            measured: est.value,
            measured_error: est.error,
            predicted,
            residual,
            residual_error: (est.error * est.error + trunc * trunc).sqrt(),
        });
    }
    rows.sort_by(|a, b| a.temperature.total_cmp(&b.temperature));
    let sign_consistent = rows.iter().all(|r| r.residual > 0.0) || rows.iter().all(|r| r.residual < 0.0);
    let significant = rows.iter().any(|r| r.residual.abs() > 2.0 * r.residual_error);
    let usable: Vec<&ResidualRow> = rows.iter().filter(|r| r.residual != 0.0).collect();
    let (slope, slope_error) = if usable.len() >= 2 {
        let x: Vec<f64> = usable.iter().map(|r| r.temperature.ln()).collect();
        let y: Vec<f64> = usable.iter().map(|r| r.residual.abs().ln()).collect();
        let s: Vec<f64> = usable
            .iter()
            .map(|r| (r.residual_error / r.residual.abs()).max(1e-300))
            .collect();
        let all_exact = usable.iter().all(|r| r.residual_error == 0.0);
        let s = if all_exact { vec![1.0; s.len()] } else { s };
        let fit = weighted_line_fit(&x, &y, &s);
        (fit.slope, if all_exact { 0.0 } else { fit.slope_error })
    } else {
        (f64::NAN, f64::NAN)
    };
    let status = if !significant && rows.iter().any(|r| r.residual_error > 0.0) {
        VerifyStatus::Inconclusive
    } else if slope >= threshold {
        VerifyStatus::Pass
    } else {
        VerifyStatus::Fail
    };
    Ok(VerifyReport {
        order,
        estimator: estimator.to_string(),
        threshold,
        rows,
        slope,
        slope_error,
        sign_consistent,
        status,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub measured: f64,
    pub error: f64,
    pub bound: f64,
    pub pass: bool,
}

/// `⟨|M|⟩² ≥ 1 - N T G(0,0) - 3σ`.
pub fn check_infrared(run: &MCResult, g00: f64) -> Result<BoundReport, McError> {
    let m = run.estimate("m_abs")?;
    let measured = m.value * m.value;
    let error = 2.0 * m.value.abs() * m.error;
    let bound = 1.0 - run.params.n_components as f64 * run.params.temperature * g00;
    Ok(BoundReport {
        name: "infrared".into(),
        measured,
        error,
        bound,
        pass: measured >= bound - 3.0 * error,
    })
}

fn moment_report(measured: f64, error: f64, a: f64, g00: f64) -> BoundReport {
    let bound = 2.0 * (a * a * g00 / 2.0).exp();
    let rel = if measured != 0.0 { error / measured.abs() } else { 0.0 };
    BoundReport {
        name: format!("moment_a{a}"),
        measured,
        error,
        bound,
        pass: measured <= bound * (1.0 + 3.0 * rel),
    }
}

/// `⟨e^{a|ũ_0|}⟩ ≤ 2 e^{a² G(0,0)/2}` from the run's measured generating
/// function.
pub fn check_moment_bound(run: &MCResult, a: f64, g00: f64) -> Result<BoundReport, McError> {
    if a == 0.0 {
        return Ok(moment_report(1.0, 0.0, a, g00));
    }
    let est = run.estimate(&MCResult::mgf_name(a))?;
    Ok(moment_report(est.value, est.error, a, g00))
}

/// The same bound from raw samples of `ũ_0`.
pub fn moment_bound_from_samples(samples: &[f64], a: f64, g00: f64) -> BoundReport {
    let values: Vec<f64> = samples.iter().map(|u| (a * u.abs()).exp()).collect();
    let (m, e, _) = blocking(&values);
    moment_report(m, e, a, g00)
}
