//! Monte Carlo simulation of the O(N) model on a periodic torus, and the
//! statistical checks that compare it with the low-temperature series.

mod run;
mod spins;
pub mod stats;
mod verify;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use run::{merge_chains, run_simulation, run_simulation_recorded, Recording};
pub use spins::{sample_cos_theta, SpinConfig};
pub use verify::{
    check_infrared, check_moment_bound, moment_bound_from_samples, torus_green, torus_series, verify_series,
    BoundReport, ResidualRow, VerifyReport, VerifyStatus,
};

pub const MC_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum McError {
    #[error("invalid simulation parameters: {0}")]
    InvalidParams(String),
    #[error("runs are incompatible: {0}")]
    Mismatch(String),
    #[error("estimate {0} is missing from the run")]
    MissingEstimate(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Exact single-site resampling (N = 3); other N fall back to Metropolis.
    Heatbath,
    Metropolis,
}

fn default_one() -> usize {
    1
}

fn default_true() -> bool {
    true
}

fn default_mgf() -> Vec<f64> {
    vec![0.5, 1.0, 1.5, 2.0]
}

/// Parameters of one Markov chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MCParams {
    pub dim: usize,
    pub n_components: usize,
    /// Torus side length.
    pub l: usize,
    pub temperature: f64,
    /// Field along component `N`, not multiplied by `β`.
    #[serde(default)]
    pub h: f64,
    /// Measured sweeps after thermalization.
    pub sweeps: usize,
    #[serde(default)]
    pub thermalization: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_one")]
    pub measure_every: usize,
    pub algorithm: Algorithm,
    /// Overrelaxation sweeps after each local-update sweep.
    #[serde(default = "default_one")]
    pub overrelax: usize,
    #[serde(default = "default_true")]
    pub cold_start: bool,
    /// Exponents `a` of the measured `⟨e^{a|ũ_0|}⟩`.
    #[serde(default = "default_mgf")]
    pub mgf_a: Vec<f64>,
}

impl MCParams {
    pub fn new(dim: usize, n_components: usize, l: usize, temperature: f64, sweeps: usize) -> Self {
        MCParams {
            dim,
            n_components,
            l,
            temperature,
            h: 0.0,
            sweeps,
            thermalization: sweeps / 10,
            seed: 0,
            measure_every: 1,
            algorithm: Algorithm::Heatbath,
            overrelax: 1,
            cold_start: true,
            mgf_a: default_mgf(),
        }
    }

    pub fn validate(&self) -> Result<(), McError> {
        let bad = |m: String| Err(McError::InvalidParams(m));
        if !(1..=crate::lattice::MAX_DIM).contains(&self.dim) {
            return bad(format!("dim must be in 1..={}, got {}", crate::lattice::MAX_DIM, self.dim));
        }
        if self.n_components < 2 {
            return bad(format!("N must be >= 2, got {}", self.n_components));
        }
        if self.l < 2 || self.l % 2 == 1 {
            return bad(format!("L must be even and >= 2, got {}", self.l));
        }
        let volume = (self.l as f64).powi(self.dim as i32);
        if volume > (1u64 << 26) as f64 {
            return bad(format!("volume {volume} is too large"));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return bad(format!("temperature must be positive, got {}", self.temperature));
        }
        if !(self.h >= 0.0 && self.h.is_finite()) {
            return bad(format!("h must be >= 0, got {}", self.h));
        }
        if self.measure_every == 0 {
            return bad("measure_every must be >= 1".into());
        }
        if self.mgf_a.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return bad("mgf_a entries must be finite and >= 0".into());
        }
        Ok(())
    }

    pub fn beta(&self) -> f64 {
        1.0 / self.temperature
    }

    /// The algorithm actually run: heat bath is only exact for `N = 3`.
    pub fn effective_algorithm(&self) -> Algorithm {
        if self.algorithm == Algorithm::Heatbath && self.n_components != 3 {
            Algorithm::Metropolis
        } else {
            self.algorithm
        }
    }
}

/// Mean of a time series with a blocking error bar.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub name: String,
    pub value: f64,
    pub error: f64,
    pub blocks: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MCResult {
    pub schema_version: u32,
    pub params: MCParams,
    pub algorithm_used: Algorithm,
    pub samples: usize,
    pub estimates: Vec<Estimate>,
    pub acceptance_rates: BTreeMap<String, f64>,
    /// Set when the two halves of the measured series disagree by more than
    /// four combined standard errors.
    pub non_thermalized: bool,
    pub wall_time: f64,
}

impl MCResult {
    pub fn estimate(&self, name: &str) -> Result<&Estimate, McError> {
        self.estimates
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| McError::MissingEstimate(name.to_string()))
    }

    /// Name of the estimate of `⟨e^{a|ũ_0|}⟩`.
    pub fn mgf_name(a: f64) -> String {
        format!("mgf_a{a}")
    }

    pub fn two_point_name(r: usize) -> String {
        format!("two_point_r{r}")
    }
}

#[cfg(test)]
mod tests;
