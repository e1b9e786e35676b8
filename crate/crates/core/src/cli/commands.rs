use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{read_json, resolve_table, sha256_hex, write_output, CliError, CoeffsArgs, GreenArgs, SimulateArgs, VerifyArgs, TABLE_DIR_ENV};
use crate::algebra::{compile_spin_observable, AlgebraError, Observable};
use crate::engine::{
    closed_form_second_order, default_schedule, indexed, CoefficientsFile, EngineError, Expansion, ExpansionConfig,
    GreenTableMeta, IndexedCoefficient, COEFFS_SCHEMA_VERSION,
};
use crate::green::{build_table, read_table, write_csv, write_table, GreenError, GreenTable};
use crate::mc::{
    check_infrared, check_moment_bound, run_simulation_recorded, torus_series, verify_series, Algorithm, BoundReport,
    MCParams, MCResult, McError, VerifyReport, VerifyStatus,
};

const CLI_SCHEMA_VERSION: u32 = 1;

fn green_err(e: GreenError) -> CliError {
    match e {
        GreenError::Io(e) => CliError::Other(format!("i/o error: {e}")),
        GreenError::Quadrature(_) | GreenError::NotConverged { .. } => CliError::Other(e.to_string()),
        other => CliError::Validation(other.to_string()),
    }
}

fn engine_err(e: EngineError) -> CliError {
    match e {
        EngineError::InvalidConfig(_) | EngineError::TableTooSmall { .. } => CliError::Validation(e.to_string()),
        other => CliError::Other(other.to_string()),
    }
}

fn algebra_err(e: AlgebraError) -> CliError {
    CliError::Validation(e.to_string())
}

fn mc_err(e: McError) -> CliError {
    CliError::Validation(e.to_string())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreenConfig {
    pub dim: usize,
    pub mass: f64,
    pub radius: u32,
    pub tol: f64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub csv: Option<PathBuf>,
}

#[derive(Serialize)]
struct GreenSummary<'a> {
    schema_version: u32,
    config: &'a GreenConfig,
    g00: f64,
    resolvent_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    mass_sum_times_m2: Option<f64>,
    output: String,
    output_sha256: String,
}

pub fn green(a: GreenArgs) -> Result<(), CliError> {
    let mut cfg = match &a.config {
        Some(p) => read_json::<GreenConfig>(p)?,
        None => GreenConfig {
            dim: a.dim,
            mass: a.mass,
            radius: a.radius,
            tol: a.tol,
            out: a.out.clone(),
            csv: a.csv.clone(),
        },
    };
    crate::green::check_inputs(cfg.dim, cfg.mass, cfg.tol).map_err(green_err)?;
    let out = match &cfg.out {
        Some(p) => p.clone(),
        None => match std::env::var(TABLE_DIR_ENV) {
            Ok(dir) => Path::new(&dir).join(format!("g{}_m{}_r{}.lgf", cfg.dim, cfg.mass, cfg.radius)),
            Err(_) => return Err(CliError::Validation(format!("--out is required when {TABLE_DIR_ENV} is unset"))),
        },
    };
    cfg.out = Some(out.clone());
    let table = build_table(cfg.dim, cfg.mass, cfg.radius, cfg.tol).map_err(green_err)?;
    let mut bytes = Vec::new();
    write_table(&table, &mut bytes).map_err(green_err)?;
    std::fs::write(&out, &bytes).map_err(|e| CliError::Other(format!("cannot write {}: {e}", out.display())))?;
    if let Some(csv) = &cfg.csv {
        let f = std::fs::File::create(csv)?;
        write_csv(&table, std::io::BufWriter::new(f)).map_err(green_err)?;
    }
    let summary = GreenSummary {
        schema_version: CLI_SCHEMA_VERSION,
        config: &cfg,
        g00: table.origin_value(),
        resolvent_residual: table.resolvent_residual(),
        mass_sum_times_m2: (cfg.mass > 0.0).then(|| table.full_box_sum() * cfg.mass * cfg.mass),
        output: out.display().to_string(),
        output_sha256: sha256_hex(&bytes),
    };
    println!("{}", serde_json::to_string_pretty(&summary).expect("summary serialises"));
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffsConfig {
    pub table: PathBuf,
    #[serde(rename = "N")]
    pub n_components: usize,
    pub order: usize,
    #[serde(default)]
    pub observable: Option<Observable>,
    pub radius_schedule: Vec<i32>,
    #[serde(default)]
    pub prune_tol: f64,
    #[serde(default = "default_true")]
    pub richardson: bool,
}

fn default_true() -> bool {
    true
}

fn parse_observable(text: &str) -> Result<Observable, CliError> {
    let trimmed = text.trim_start();
    let json = if trimmed.starts_with('[') || trimmed.starts_with('{') {
        text.to_string()
    } else {
        std::fs::read_to_string(text).map_err(|e| CliError::Other(format!("cannot read observable {text}: {e}")))?
    };
    Observable::from_json(&json).map_err(algebra_err)
}

fn load_table(path: &Path) -> Result<(GreenTable, String), CliError> {
    let path = resolve_table(path);
    let bytes = std::fs::read(&path).map_err(|e| CliError::Other(format!("cannot read table {}: {e}", path.display())))?;
    let table = read_table(bytes.as_slice()).map_err(green_err)?;
    Ok((table, sha256_hex(&bytes)))
}

/// Evaluate the coefficient file for a resolved config.
pub fn compute_coefficients(cfg: &CoeffsConfig, parallel: bool) -> Result<CoefficientsFile, CliError> {
    let (table, sha) = load_table(&cfg.table)?;
    let dim = table.dim();
    if table.mass() != 0.0 {
        return Err(CliError::Validation("the expansion needs a massless Green table".into()));
    }
    let observable = cfg
        .observable
        .clone()
        .unwrap_or_else(|| Observable::magnetization(dim, cfg.n_components));
    let series = compile_spin_observable(&observable, cfg.order, cfg.n_components, dim).map_err(algebra_err)?;
    let config = ExpansionConfig {
        n_components: cfg.n_components,
        order: cfg.order,
        radius_schedule: cfg.radius_schedule.clone(),
        prune_tol: cfg.prune_tol,
        richardson: cfg.richardson,
        parallel,
    };
    let table = Arc::new(table);
    let expansion = Expansion::new(table.clone(), config.clone()).map_err(engine_err)?;
    let result = expansion.evaluate_series(&series, cfg.order).map_err(engine_err)?;
    let is_magnetization = observable == Observable::magnetization(dim, cfg.n_components);
    let closed_form = if is_magnetization && cfg.order >= 2 && dim >= 3 {
        Some(indexed(
            &closed_form_second_order(&table, cfg.n_components, cfg.radius_schedule[0]).map_err(engine_err)?,
        ))
    } else {
        None
    };
    let mut config = config;
    // the thread count does not change the coefficients beyond rounding
    config.parallel = false;
    Ok(CoefficientsFile {
        schema_version: COEFFS_SCHEMA_VERSION,
        d: dim,
        n_components: cfg.n_components,
        order: cfg.order,
        observable,
        coefficients: indexed(&result),
        radius_schedule: cfg.radius_schedule.clone(),
        green_table_meta: GreenTableMeta::new(&table, sha),
        config,
        closed_form,
    })
}

pub fn coeffs(a: CoeffsArgs, parallel: bool) -> Result<(), CliError> {
    let cfg = match &a.config {
        Some(p) => read_json::<CoeffsConfig>(p)?,
        None => {
            let table = a
                .table
                .clone()
                .ok_or_else(|| CliError::Validation("--table is required".into()))?;
            CoeffsConfig {
                table,
                n_components: a.n_components,
                order: a.order,
                observable: a.observable.as_deref().map(parse_observable).transpose()?,
                radius_schedule: a.schedule.clone().unwrap_or_else(|| default_schedule(a.radius, a.order)),
                prune_tol: a.prune_tol,
                richardson: !a.no_richardson,
            }
        }
    };
    let file = compute_coefficients(&cfg, parallel)?;
    if let Some(cf) = &file.closed_form {
        let report = comparison_lines(&file.coefficients, cf);
        if a.out.is_some() {
            println!("{report}");
        } else {
            eprintln!("{report}");
        }
    }
    let text = serde_json::to_string_pretty(&file).expect("coefficients serialise");
    write_output(a.out.as_deref(), &text)
}

fn comparison_lines(engine: &[IndexedCoefficient], closed: &[IndexedCoefficient]) -> String {
    let mut out = String::from("closed-form comparison (i, engine, closed form, |diff|, combined uncertainty):");
    for (e, c) in engine.iter().zip(closed) {
        out.push_str(&format!(
            "\n  a_{}  {:+.12e}  {:+.12e}  {:.3e}  {:.3e}",
            e.i,
            e.value,
            c.value,
            (e.value - c.value).abs(),
            e.uncertainty + c.uncertainty
        ));
    }
    out
}

pub fn simulate(a: SimulateArgs) -> Result<(), CliError> {
    let params = match &a.config {
        Some(p) => read_json::<MCParams>(p)?,
        None => {
            let temperature = a
                .temperature
                .ok_or_else(|| CliError::Validation("--T is required".into()))?;
            let algorithm = match a.algorithm.as_str() {
                "heatbath" => Algorithm::Heatbath,
                "metropolis" => Algorithm::Metropolis,
                other => return Err(CliError::Validation(format!("unknown algorithm {other}"))),
            };
            let mut p = MCParams::new(a.dim, a.n_components, a.l, temperature, a.sweeps);
            p.h = a.h;
            p.thermalization = a.thermalization.unwrap_or(a.sweeps / 10);
            p.seed = a.seed;
            p.measure_every = a.measure_every;
            p.algorithm = algorithm;
            p.overrelax = a.overrelax;
            p.cold_start = !a.hot_start;
            p
        }
    };
    let (result, recording) = run_simulation_recorded(&params).map_err(mc_err)?;
    if result.non_thermalized {
        eprintln!("warning: the measured series drifts; consider more thermalization sweeps");
    }
    if let Some(csv) = &a.samples_csv {
        std::fs::write(csv, recording.to_csv())?;
    }
    let text = serde_json::to_string_pretty(&result).expect("result serialises");
    write_output(a.out.as_deref(), &text)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub coeffs: PathBuf,
    pub runs: Vec<PathBuf>,
    #[serde(default)]
    pub order: Option<usize>,
    #[serde(default)]
    pub threshold: Option<f64>,
    #[serde(default = "default_estimator")]
    pub estimator: String,
    #[serde(default = "default_finite_size")]
    pub finite_size: String,
    #[serde(default = "default_moment_a")]
    pub moment_a: f64,
}

fn default_estimator() -> String {
    "m_abs".into()
}

fn default_finite_size() -> String {
    "torus".into()
}

fn default_moment_a() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutput {
    pub schema_version: u32,
    pub config: VerifyConfig,
    pub coeffs_sha256: String,
    pub runs_sha256: Vec<String>,
    pub g00: f64,
    /// Coefficients the residuals were taken against.
    pub series_used: Vec<IndexedCoefficient>,
    pub verify: VerifyReport,
    pub infrared: Vec<BoundReport>,
    pub moment: Vec<BoundReport>,
    pub pass: bool,
}

fn read_with_hash<T: serde::de::DeserializeOwned>(path: &Path) -> Result<(T, String), CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Other(format!("cannot read {}: {e}", path.display())))?;
    let value = serde_json::from_slice(&bytes).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    Ok((value, sha256_hex(&bytes)))
}

/// Run every check of `lowt verify` for a resolved config.
pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifyOutput, CliError> {
    let (coeffs, coeffs_sha): (CoefficientsFile, String) = read_with_hash(&cfg.coeffs)?;
    let mut runs = Vec::new();
    let mut runs_sha = Vec::new();
    for p in &cfg.runs {
        let (r, sha): (MCResult, String) = read_with_hash(p)?;
        if r.params.dim != coeffs.d || r.params.n_components != coeffs.n_components {
            return Err(CliError::Validation(format!(
                "{}: run has (d, N) = ({}, {}), coefficients have ({}, {})",
                p.display(),
                r.params.dim,
                r.params.n_components,
                coeffs.d,
                coeffs.n_components
            )));
        }
        if r.non_thermalized {
            eprintln!("warning: {} is flagged as not thermalized", p.display());
        }
        runs.push(r);
        runs_sha.push(sha);
    }
    let order = cfg.order.unwrap_or(coeffs.order);
    if order > coeffs.order {
        return Err(CliError::Validation(format!(
            "order {order} exceeds the coefficient file's order {}",
            coeffs.order
        )));
    }
    let mut series = coeffs.series();
    match cfg.finite_size.as_str() {
        "torus" => {
            let is_magnetization = coeffs.observable == Observable::magnetization(coeffs.d, coeffs.n_components);
            if let (true, Some(first)) = (is_magnetization, runs.first()) {
                let torus = torus_series(coeffs.d, first.params.l, coeffs.n_components);
                for (slot, c) in series.coefficients.iter_mut().zip(torus.coefficients) {
                    *slot = c;
                }
            }
        }
        "none" => {}
        other => return Err(CliError::Validation(format!("unknown finite-size mode {other}"))),
    }
    let threshold = cfg.threshold.unwrap_or(order as f64 + 0.5);
    let report = verify_series(&series, &runs, order, &cfg.estimator, threshold).map_err(mc_err)?;
    let g00 = coeffs.green_table_meta.g00;
    let infrared: Vec<BoundReport> = runs
        .iter()
        .map(|r| check_infrared(r, g00))
        .collect::<Result<_, _>>()
        .map_err(mc_err)?;
    let moment: Vec<BoundReport> = runs
        .iter()
        .map(|r| check_moment_bound(r, cfg.moment_a, g00))
        .collect::<Result<_, _>>()
        .map_err(mc_err)?;
    let pass = report.status != VerifyStatus::Fail
        && infrared.iter().all(|b| b.pass)
        && moment.iter().all(|b| b.pass);
    Ok(VerifyOutput {
        schema_version: CLI_SCHEMA_VERSION,
        config: cfg.clone(),
        coeffs_sha256: coeffs_sha,
        runs_sha256: runs_sha,
        g00,
        series_used: indexed(&series),
        verify: report,
        infrared,
        moment,
        pass,
    })
}

pub fn verify(a: VerifyArgs) -> Result<(), CliError> {
    let cfg = match &a.config {
        Some(p) => read_json::<VerifyConfig>(p)?,
        None => VerifyConfig {
            coeffs: a
                .coeffs
                .clone()
                .ok_or_else(|| CliError::Validation("--coeffs is required".into()))?,
            runs: a.runs.clone(),
            order: a.order,
            threshold: a.threshold,
            estimator: a.estimator.clone(),
            finite_size: a.finite_size.clone(),
            moment_a: a.moment_a,
        },
    };
    let output = run_verify(&cfg)?;
    let text = serde_json::to_string_pretty(&output).expect("report serialises");
    write_output(a.out.as_deref(), &text)?;
    if output.verify.status == VerifyStatus::Inconclusive {
        eprintln!("residuals are statistically indistinguishable from zero; slope test inconclusive");
    }
    if output.pass {
        Ok(())
    } else {
        Err(CliError::CheckFailed(format!(
            "verification failed: slope {:.3} (threshold {}), infrared {}, moment {}",
            output.verify.slope,
            output.verify.threshold,
            if output.infrared.iter().all(|b| b.pass) { "pass" } else { "fail" },
            if output.moment.iter().all(|b| b.pass) { "pass" } else { "fail" },
        )))
    }
}
