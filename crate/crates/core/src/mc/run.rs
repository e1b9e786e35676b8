//! Markov chain driver and measurements.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::spins::SpinConfig;
use super::stats::{blocking, drifts};
use super::{Algorithm, Estimate, MCParams, MCResult, McError, MC_SCHEMA_VERSION};

const RENORMALIZE_EVERY: usize = 64;

/// Raw per-measurement observable values.
#[derive(Clone, Debug, PartialEq)]
pub struct Recording {
    pub names: Vec<String>,
    /// `(sweep index, values)` in measurement order.
    pub rows: Vec<(usize, Vec<f64>)>,
}

impl Recording {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sweep_index");
        for n in &self.names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (sweep, values) in &self.rows {
            out.push_str(&sweep.to_string());
            for v in values {
                out.push(',');
                out.push_str(&format!("{v:e}"));
            }
            out.push('\n');
        }
        out
    }
}

fn metropolis_step(temperature: f64) -> f64 {
    (1.2 * temperature.sqrt()).min(1.0)
}

struct Chain {
    cfg: SpinConfig,
    rng: ChaCha8Rng,
    beta: f64,
    h: f64,
    algorithm: Algorithm,
    overrelax: usize,
    step: f64,
    field: Vec<f64>,
    proposal: Vec<f64>,
    proposed: u64,
    accepted: u64,
    sweeps_done: usize,
}

impl Chain {
    fn new(p: &MCParams) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        let cfg = if p.cold_start {
            SpinConfig::cold(p.dim, p.n_components, p.l)
        } else {
            SpinConfig::hot(p.dim, p.n_components, p.l, &mut rng)
        };
        Chain {
            cfg,
            rng,
            beta: p.beta(),
            h: p.h,
            algorithm: p.effective_algorithm(),
            overrelax: p.overrelax,
            step: metropolis_step(p.temperature),
            field: vec![0.0; p.n_components],
            proposal: vec![0.0; p.n_components],
            proposed: 0,
            accepted: 0,
            sweeps_done: 0,
        }
    }

    fn sweep(&mut self) {
        let volume = self.cfg.volume();
        match self.algorithm {
            Algorithm::Heatbath => {
                for x in 0..volume {
                    self.cfg.heatbath_site(x, self.beta, self.h, &mut self.field, &mut self.rng);
                }
            }
            Algorithm::Metropolis => {
                for x in 0..volume {
                    let ok = self.cfg.metropolis_site(
                        x,
                        self.beta,
                        self.h,
                        self.step,
                        &mut self.field,
                        &mut self.proposal,
                        &mut self.rng,
                    );
                    self.proposed += 1;
                    self.accepted += ok as u64;
                }
            }
        }
        for _ in 0..self.overrelax {
            for x in 0..volume {
                self.cfg.overrelax_site(x, self.beta, self.h, &mut self.field);
            }
        }
        self.sweeps_done += 1;
        if self.sweeps_done.is_multiple_of(RENORMALIZE_EVERY) {
            self.cfg.renormalize();
        }
    }
}

fn observable_names(p: &MCParams) -> Vec<String> {
    let mut names = vec!["s_n".to_string(), "m_abs".to_string(), "bond_energy".to_string()];
    for r in 0..=p.l / 2 {
        names.push(MCResult::two_point_name(r));
    }
    for &a in &p.mgf_a {
        names.push(MCResult::mgf_name(a));
    }
    names
}

/// Unit vector orthogonal to `axis`, built from the coordinate direction
/// least aligned with it.
fn transverse_direction(axis: &[f64]) -> Vec<f64> {
    let k = (0..axis.len())
        .min_by(|&i, &j| axis[i].abs().total_cmp(&axis[j].abs()))
        .unwrap_or(0);
    let mut e = vec![0.0; axis.len()];
    e[k] = 1.0;
    let p = axis[k];
    for (ei, ai) in e.iter_mut().zip(axis) {
        *ei -= p * ai;
    }
    let norm = e.iter().map(|v| v * v).sum::<f64>().sqrt();
    e.iter_mut().for_each(|v| *v /= norm);
    e
}

fn measure(cfg: &SpinConfig, p: &MCParams, out: &mut Vec<f64>) {
    out.clear();
    let n = p.n_components;
    let d = p.dim;
    let volume = cfg.volume();
    let m = cfg.magnetization();
    let m_abs = m.iter().map(|v| v * v).sum::<f64>().sqrt();
    out.push(m[n - 1]);
    out.push(m_abs);
    out.push(-cfg.bond_sum() / (d * volume) as f64);
    let l = p.l;
    let mut corr = vec![0.0; l / 2 + 1];
    let mut line = vec![0.0; l];
    for axis in 0..d {
        let stride = l.pow(axis as u32);
        // starting sites of the lines along `axis`: coordinate `axis` is zero
        for x0 in (0..volume).filter(|x| (x / stride).is_multiple_of(l)) {
            for (i, v) in line.iter_mut().enumerate() {
                *v = cfg.spin(x0 + i * stride)[0];
            }
            for (r, c) in corr.iter_mut().enumerate() {
                *c += (0..l).map(|i| line[i] * line[(i + r) % l]).sum::<f64>();
            }
        }
    }
    out.extend(corr.iter().map(|c| c / (d * volume) as f64));
    if !p.mgf_a.is_empty() {
        let mut axis = vec![0.0; n];
        if p.h > 0.0 || m_abs == 0.0 {
            axis[n - 1] = 1.0;
        } else {
            axis.iter_mut().zip(&m).for_each(|(a, v)| *a = v / m_abs);
        }
        let e = transverse_direction(&axis);
        let sqrt_beta = p.beta().sqrt();
        let u: Vec<f64> = (0..volume)
            .map(|x| sqrt_beta * cfg.spin(x).iter().zip(&e).map(|(s, e)| s * e).sum::<f64>())
            .collect();
        for &a in &p.mgf_a {
            let mean = u.iter().map(|v| (a * v.abs()).exp()).sum::<f64>() / volume as f64;
            out.push(mean);
        }
    }
}

/// Run one chain and return the estimates together with the raw series.
pub fn run_simulation_recorded(p: &MCParams) -> Result<(MCResult, Recording), McError> {
    p.validate()?;
    let start = Instant::now();
    let mut chain = Chain::new(p);
    for _ in 0..p.thermalization {
        chain.sweep();
    }
    let names = observable_names(p);
    let mut rows = Vec::new();
    let mut buf = Vec::with_capacity(names.len());
    if p.sweeps == 0 {
        measure(&chain.cfg, p, &mut buf);
        rows.push((chain.sweeps_done, buf.clone()));
    }
    for i in 0..p.sweeps {
        chain.sweep();
        if (i + 1) % p.measure_every == 0 {
            measure(&chain.cfg, p, &mut buf);
            rows.push((chain.sweeps_done, buf.clone()));
        }
    }
    let mut estimates = Vec::with_capacity(names.len());
    let mut drift = false;
    for (k, name) in names.iter().enumerate() {
        let series: Vec<f64> = rows.iter().map(|(_, v)| v[k]).collect();
        let (value, error, blocks) = blocking(&series);
        if name == "m_abs" || name == "bond_energy" {
            drift |= drifts(&series, 4.0);
        }
        estimates.push(Estimate {
            name: name.clone(),
            value,
            error,
            blocks,
        });
    }
    let mut acceptance_rates = BTreeMap::new();
    match chain.algorithm {
        Algorithm::Heatbath => {
            acceptance_rates.insert("heatbath".to_string(), 1.0);
        }
        Algorithm::Metropolis => {
            let rate = if chain.proposed > 0 {
                chain.accepted as f64 / chain.proposed as f64
            } else {
                0.0
            };
            acceptance_rates.insert("metropolis".to_string(), rate);
        }
    }
    if p.overrelax > 0 {
        acceptance_rates.insert("overrelaxation".to_string(), 1.0);
    }
    let result = MCResult {
        schema_version: MC_SCHEMA_VERSION,
        params: p.clone(),
        algorithm_used: chain.algorithm,
        samples: rows.len(),
        estimates,
        acceptance_rates,
        non_thermalized: drift,
        wall_time: start.elapsed().as_secs_f64(),
    };
    Ok((result, Recording { names, rows }))
}

pub fn run_simulation(p: &MCParams) -> Result<MCResult, McError> {
    run_simulation_recorded(p).map(|(r, _)| r)
}

/// Combine independent chains (same parameters up to the seed) by
/// inverse-variance weighting of every estimate.
pub fn merge_chains(runs: &[MCResult]) -> Result<MCResult, McError> {
    let first = runs.first().ok_or_else(|| McError::Mismatch("no runs to merge".into()))?;
    for r in runs {
        let mut a = r.params.clone();
        a.seed = first.params.seed;
        if a != first.params {
            return Err(McError::Mismatch("chains differ in more than the seed".into()));
        }
    }
    let mut merged = first.clone();
    for est in merged.estimates.iter_mut() {
        let parts: Vec<&Estimate> = runs
            .iter()
            .map(|r| r.estimate(&est.name))
            .collect::<Result<_, _>>()?;
        if parts.iter().all(|e| e.error > 0.0) {
            let w: Vec<f64> = parts.iter().map(|e| 1.0 / (e.error * e.error)).collect();
            let sw: f64 = w.iter().sum();
            est.value = parts.iter().zip(&w).map(|(e, w)| e.value * w).sum::<f64>() / sw;
            est.error = (1.0 / sw).sqrt();
        } else {
            est.value = parts.iter().map(|e| e.value).sum::<f64>() / parts.len() as f64;
            est.error = 0.0;
        }
        est.blocks = parts.iter().map(|e| e.blocks).sum();
    }
    for (k, v) in merged.acceptance_rates.iter_mut() {
        *v = runs.iter().map(|r| r.acceptance_rates.get(k).copied().unwrap_or(0.0)).sum::<f64>() / runs.len() as f64;
    }
    merged.samples = runs.iter().map(|r| r.samples).sum();
    merged.non_thermalized = runs.iter().any(|r| r.non_thermalized);
    merged.wall_time = runs.iter().map(|r| r.wall_time).sum();
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_two_point_matches_direct_sum() {
        let mut p = MCParams::new(3, 3, 6, 0.5, 0);
        p.mgf_a = vec![1.0];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg = SpinConfig::hot(3, 3, 6, &mut rng);
        let mut out = Vec::new();
        measure(&cfg, &p, &mut out);
        let volume = cfg.volume();
        for r in 0..=3 {
            let mut acc = 0.0;
            for x in 0..volume {
                for axis in 0..3 {
                    acc += cfg.spin(x)[0] * cfg.spin(cfg.shifted(x, axis, r))[0];
                }
            }
            let want = acc / (3 * volume) as f64;
            assert!((out[3 + r] - want).abs() < 1e-14, "r={r}");
        }
    }
}
