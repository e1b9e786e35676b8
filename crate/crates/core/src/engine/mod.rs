//! Numeric low-temperature series coefficients from the truncated
//! expectation operator `⟨·⟩^(n)`.

mod expand;
mod memo;
mod output;

use std::sync::Arc;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{FormalSeries, MonoKey, PhiIndex, UIndex};
use crate::green::{GreenError, GreenTable};
use crate::lattice::{Direction, Site};
use crate::numeric::NeumaierSum;
use crate::wick::{gaussian_moment, Leg, WickError};

pub use expand::Engine;
pub use memo::MemoCache;
pub use output::{indexed, CoefficientsFile, GreenTableMeta, IndexedCoefficient, COEFFS_SCHEMA_VERSION};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid expansion config: {0}")]
    InvalidConfig(String),
    #[error("site {site} lies outside the Green table of radius {radius}; enlarge the table or shrink the radius schedule")]
    TableTooSmall { site: Site, radius: u32 },
    #[error("recursion depth exceeded {0}")]
    Depth(usize),
    #[error(transparent)]
    Wick(WickError),
    #[error(transparent)]
    Green(#[from] GreenError),
}

/// Parameters of a series evaluation. The Green table is passed separately.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpansionConfig {
    pub n_components: usize,
    pub order: usize,
    /// Radius of the `l`-th nested vertex sum; the last entry repeats.
    pub radius_schedule: Vec<i32>,
    #[serde(default)]
    pub prune_tol: f64,
    /// Also evaluate with every radius halved and report the difference as
    /// the truncation uncertainty.
    #[serde(default = "default_true")]
    pub richardson: bool,
    #[serde(default)]
    pub parallel: bool,
}

fn default_true() -> bool {
    true
}

impl ExpansionConfig {
    pub fn new(n_components: usize, order: usize, radius: i32) -> Self {
        ExpansionConfig {
            n_components,
            order,
            radius_schedule: default_schedule(radius, order),
            prune_tol: 0.0,
            richardson: true,
            parallel: false,
        }
    }
}

/// `[R, R/3, R/6, …]` with one entry per vertex depth, never below 1.
pub fn default_schedule(radius: i32, order: usize) -> Vec<i32> {
    let mut out = vec![radius];
    for l in 1..order.max(1) {
        out.push((radius / (3 * l as i32)).max(1).min(radius));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub value: f64,
    pub uncertainty: f64,
}

/// Coefficients `a_0..a_n` with truncation uncertainties.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesResult {
    pub coefficients: Vec<Coefficient>,
}

impl SeriesResult {
    pub fn values(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.value).collect()
    }

    /// `Σ_{i ≤ n} a_i T^i`.
    pub fn evaluate(&self, t: f64, n: usize) -> f64 {
        self.coefficients
            .iter()
            .take(n + 1)
            .enumerate()
            .map(|(i, c)| c.value * t.powi(i as i32))
            .sum()
    }
}

/// Outcome of the order-0 Gaussian collapse check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GffReport {
    pub engine: f64,
    pub wick: f64,
    pub mixed_engine: f64,
    pub mixed_factorized: f64,
    pub pass: bool,
}

/// A Green table, an expansion config and the engines built from them.
pub struct Expansion {
    config: ExpansionConfig,
    main: Engine,
    half: Option<Engine>,
}

fn halve(schedule: &[i32]) -> Vec<i32> {
    schedule.iter().map(|r| r / 2).collect()
}

impl Expansion {
    pub fn new(table: Arc<GreenTable>, config: ExpansionConfig) -> Result<Self, EngineError> {
        if config.radius_schedule.first().is_none_or(|&r| r + 1 > table.radius() as i32) {
            return Err(EngineError::InvalidConfig(format!(
                "radius schedule {:?} needs a Green table of radius > {}, got {}",
                config.radius_schedule,
                config.radius_schedule.first().copied().unwrap_or(0),
                table.radius()
            )));
        }
        let main = Engine::new(
            table.clone(),
            config.n_components,
            config.radius_schedule.clone(),
            config.prune_tol,
            config.parallel,
        )?;
        let half = if config.richardson {
            Some(Engine::new(
                table,
                config.n_components,
                halve(&config.radius_schedule),
                config.prune_tol,
                config.parallel,
            )?)
        } else {
            None
        };
        Ok(Expansion { config, main, half })
    }

    pub fn config(&self) -> &ExpansionConfig {
        &self.config
    }

    pub fn engine(&self) -> &Engine {
        &self.main
    }

    pub fn table(&self) -> &GreenTable {
        self.main.table()
    }

    fn check_support(&self, key: &MonoKey) -> Result<(), EngineError> {
        let r = self.table().radius() as i32;
        let r1 = self.config.radius_schedule[0];
        let sites = key.support();
        if sites.is_empty() {
            return Ok(());
        }
        let extent = sites
            .iter()
            .flat_map(|a| sites.iter().map(move |b| a.sub(b).sup_norm()))
            .max()
            .unwrap_or(0);
        if r1 + extent + 1 > r {
            return Err(EngineError::InvalidConfig(format!(
                "observable support extent {extent} plus extraction radius {r1} exceeds the table radius {r}"
            )));
        }
        Ok(())
    }

    /// Coefficients of `⟨φ^p ũ^p̃⟩^(n)` with truncation uncertainties.
    pub fn expect_monomial(&self, p: &PhiIndex, u: &UIndex, n: usize) -> Result<SeriesResult, EngineError> {
        let key = MonoKey {
            p: p.clone(),
            u: u.clone(),
            q: Default::default(),
        };
        self.check_support(&key)?;
        let main = self.main.expect_monomial(&key, n)?;
        let half = match &self.half {
            Some(h) => Some(h.expect_monomial(&key, n)?),
            None => None,
        };
        Ok(SeriesResult {
            coefficients: main
                .iter()
                .enumerate()
                .map(|(i, &v)| Coefficient {
                    value: v,
                    uncertainty: half.as_ref().map_or(0.0, |h| (v - h[i]).abs()),
                })
                .collect(),
        })
    }

    /// `a_i = Σ_{s ≤ i} Σ_m λ_{s,m} ⟨m⟩^(i-s)` for the observable series.
    pub fn evaluate_series(&self, obs: &FormalSeries, n: usize) -> Result<SeriesResult, EngineError> {
        let mut values = vec![NeumaierSum::new(); n + 1];
        let mut errors = vec![NeumaierSum::new(); n + 1];
        for s in 0..=n.min(obs.max_order()) {
            for (key, coeff) in obs.order(s) {
                self.check_support(key)?;
                let c = coeff.to_f64().expect("finite rational");
                let main = self.main.expect_monomial(key, n - s)?;
                let half = match &self.half {
                    Some(h) => Some(h.expect_monomial(key, n - s)?),
                    None => None,
                };
                for (j, v) in main.iter().enumerate() {
                    values[s + j].add(c * v);
                    if let Some(h) = &half {
                        errors[s + j].add((c * (v - h[j])).abs());
                    }
                }
            }
        }
        Ok(SeriesResult {
            coefficients: values
                .iter()
                .zip(&errors)
                .map(|(v, e)| Coefficient {
                    value: v.value(),
                    uncertainty: e.value(),
                })
                .collect(),
        })
    }

    /// Order-0 collapse: `⟨φ^p⟩^(0)` against the Wick value, and
    /// `⟨ũ^{p̃}⟩^(0)` against the product over its components.
    pub fn gff_limit_check(&self, p: &PhiIndex, mixed: &UIndex) -> Result<GffReport, EngineError> {
        let legs: Vec<Leg> = p
            .iter()
            .flat_map(|(x, k)| std::iter::repeat_n(Leg::Site(*x), k as usize))
            .collect();
        let wick = gaussian_moment(self.table(), &legs).map_err(EngineError::Wick)?;
        let engine = self.main.expect_monomial(&MonoKey::phi(p.clone()), 0)?[0];
        let mixed_engine = self.main.expect_monomial(&MonoKey::tilde(mixed.clone()), 0)?[0];
        let mut mixed_factorized = 1.0;
        for c in 1..=mixed.max_component() {
            let part = mixed.component(c);
            if part.is_empty() {
                continue;
            }
            let single = UIndex::from_pairs(part.iter().map(|(x, k)| (crate::algebra::UKey { site: *x, comp: 1 }, k)));
            mixed_factorized *= self.main.expect_monomial(&MonoKey::tilde(single), 0)?[0];
        }
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-13 * a.abs().max(b.abs()) || a == b;
        Ok(GffReport {
            engine,
            wick,
            mixed_engine,
            mixed_factorized,
            pass: close(engine, wick) && close(mixed_engine, mixed_factorized),
        })
    }
}

/// Box sum `Σ_{|x|_∞ ≤ radius, e} (∇^e_x G(0,·))² (½∇∇G + (N-2) G(0,0))`.
fn second_order_sum(table: &GreenTable, n_components: usize, radius: i32) -> Result<f64, EngineError> {
    let dim = table.dim();
    let g0 = table.origin_value();
    let o = Site::origin(dim);
    let mut acc = NeumaierSum::new();
    for x in Site::box_sites(dim, radius) {
        for e in Direction::all(dim) {
            let grad = table.grad_green(&x, e)?;
            let gg = table.grad_grad_green(&o, &o, e, e)?;
            acc.add(grad * grad * (0.5 * gg + (n_components as f64 - 2.0) * g0));
        }
    }
    Ok(acc.value())
}

/// Closed-form `a_0, a_1, a_2` of the magnetization
/// `1 - T (N-1)/2 G(0,0) + T² (N-1)/2 [(3N-5)/4 G(0,0)² - Σ …]`,
/// with the box sum truncated at `radius` and its uncertainty taken from
/// the `radius/2` box.
pub fn closed_form_second_order(
    table: &GreenTable,
    n_components: usize,
    radius: i32,
) -> Result<SeriesResult, EngineError> {
    if table.dim() < 3 || n_components < 2 {
        return Err(EngineError::InvalidConfig("closed form needs d >= 3 and N >= 2".into()));
    }
    if radius + 1 > table.radius() as i32 {
        return Err(EngineError::TableTooSmall {
            site: Site::on_axis(table.dim(), 0, radius + 1),
            radius: table.radius(),
        });
    }
    let n = n_components as f64;
    let g0 = table.origin_value();
    let pref = (n - 1.0) / 2.0;
    let full = second_order_sum(table, n_components, radius)?;
    let half = second_order_sum(table, n_components, radius / 2)?;
    let a2 = pref * ((3.0 * n - 5.0) / 4.0 * g0 * g0 - full);
    Ok(SeriesResult {
        coefficients: vec![
            Coefficient { value: 1.0, uncertainty: 0.0 },
            Coefficient { value: -pref * g0, uncertainty: 0.0 },
            Coefficient {
                value: a2,
                uncertainty: pref * (full - half).abs(),
            },
        ],
    })
}

#[cfg(test)]
mod tests;
