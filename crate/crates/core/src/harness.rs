//! Seeded Monte Carlo experiments over a grid of correlations, written as
//! self-describing CSV tables.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::deteq::limiting_density;
use crate::error::{Error, Result};
use crate::inference::{detect, estimate_strengths_with, grid_search, StrengthOptions, ThresholdRule};
use crate::models::{sample_instance, ModelParams};
use crate::outlier::find_outlier;
use crate::rng::derive_seed;
use crate::spectral::{empirical_overlap, full_spectrum, SpectralResult};
use crate::theory::LimitModel;
use crate::TwoViewInstance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    OverlapCurve,
    Spectrum,
    DetectionSweep,
    GridSearchSweep,
    StrengthSweep,
}

fn default_true() -> bool {
    true
}
fn default_eps() -> f64 {
    0.1
}
fn default_bins() -> usize {
    60
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Dimensions and strengths; `rho` is replaced by each grid value.
    pub model: ModelParams,
    pub rho_grid: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    pub experiment: ExperimentKind,
    pub output_path: String,
    /// Sample from the planted law. The null law ignores ρ.
    #[serde(default = "default_true")]
    pub planted: bool,
    #[serde(default)]
    pub threshold: ThresholdRule,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default)]
    pub mesh: Option<f64>,
    #[serde(default = "default_bins")]
    pub histogram_bins: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.rho_grid.is_empty() {
            return Err(Error::Config("rho_grid is empty".into()));
        }
        for &rho in &self.rho_grid {
            if !(0.0..=1.0).contains(&rho) {
                return Err(Error::Config(format!("rho_grid value {rho} outside [0, 1]")));
            }
            self.model.with_rho(rho).validate()?;
        }
        if self.histogram_bins == 0 {
            return Err(Error::Config("histogram_bins must be positive".into()));
        }
        if self.output_path.is_empty() {
            return Err(Error::Config("output_path is empty".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub rho: f64,
    pub mean_overlap: f64,
    pub std_overlap: f64,
    pub predicted_overlap: f64,
    pub lambda1_mean: f64,
    pub lambda_out_pred: f64,
    pub reject_rate: f64,
    pub trials: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HistogramBin {
    pub rho: f64,
    pub left: f64,
    pub right: f64,
    pub empirical: f64,
    pub predicted: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrengthRecord {
    pub rho: f64,
    pub trial: usize,
    pub alpha_hat: f64,
    pub beta_hat: f64,
    pub eta: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExperimentTable {
    pub rows: Vec<ExperimentRow>,
    pub histogram: Vec<HistogramBin>,
    pub strengths: Vec<StrengthRecord>,
}

#[derive(Clone, Debug, Default)]
struct Trial {
    lambda1: f64,
    overlap: Option<f64>,
    reject: bool,
    spectrum: Vec<f64>,
    strengths: Option<(f64, f64, f64)>,
}

fn summed_overlap(res: &SpectralResult, inst: &TwoViewInstance) -> Option<f64> {
    empirical_overlap(res, inst).ok().map(|(a, b)| a + b)
}

fn run_trial(config: &ExperimentConfig, rho: f64, seed: u64, aux_seed: u64) -> Result<Trial> {
    let params = config.model.with_rho(rho);
    let inst = sample_instance(&params, config.planted, seed)?;
    let mut trial = Trial::default();
    match config.experiment {
        ExperimentKind::OverlapCurve | ExperimentKind::DetectionSweep | ExperimentKind::Spectrum => {
            let (det, res) = detect(&inst, &config.threshold)?;
            trial.lambda1 = det.statistic;
            trial.reject = det.reject_null;
            trial.overlap = summed_overlap(&res, &inst);
            if config.experiment == ExperimentKind::Spectrum {
                trial.spectrum = full_spectrum(&inst, None)?;
            }
        }
        ExperimentKind::GridSearchSweep => {
            let out = grid_search(&inst, config.eps, config.mesh, &config.threshold)?;
            trial.lambda1 = out.detection.statistic;
            trial.reject = out.detection.reject_null;
            trial.overlap = summed_overlap(&out.spectral, &inst);
        }
        ExperimentKind::StrengthSweep => {
            let opts = StrengthOptions { eps: config.eps, mesh: config.mesh.or(StrengthOptions::default().mesh) };
            let report = estimate_strengths_with(&inst, aux_seed, &opts)?;
            trial.lambda1 = report.recovery.detection.statistic;
            trial.reject = report.recovery.detection.reject_null;
            trial.overlap = summed_overlap(&report.recovery.spectral, &inst);
            let e = report.estimate;
            trial.strengths = Some((e.alpha_hat, e.beta_hat, e.eta));
        }
    }
    Ok(trial)
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn histogram(config: &ExperimentConfig, rho: f64, trials: &[Trial]) -> Result<Vec<HistogramBin>> {
    let all: Vec<f64> = trials.iter().flat_map(|t| t.spectrum.iter().copied()).collect();
    let lo = all.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bins = config.histogram_bins;
    let width = ((hi - lo) / bins as f64).max(1e-12);
    let mut counts = vec![0usize; bins];
    for x in &all {
        let i = (((x - lo) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    let limit = LimitModel::from_params(&config.model.with_rho(rho));
    let eta = (width / 2.0).min(0.1);
    (0..bins)
        .map(|i| {
            let left = lo + i as f64 * width;
            let predicted = limiting_density(&limit, left + width / 2.0, eta)?;
            Ok(HistogramBin {
                rho,
                left,
                right: left + width,
                empirical: counts[i] as f64 / (all.len() as f64 * width),
                predicted,
            })
        })
        .collect()
}

/// Runs every (ρ, trial) pair in parallel and aggregates in grid order.
///
/// Trial seeds are `derive_seed(master_seed, [ρ index, trial index])`, so the
/// table does not depend on the thread count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentTable> {
    config.validate()?;
    let jobs: Vec<(usize, usize)> =
        (0..config.rho_grid.len()).flat_map(|r| (0..config.trials).map(move |t| (r, t))).collect();
    let outcomes: Vec<Result<Trial>> = jobs
        .par_iter()
        .map(|&(r, t)| {
            let seed = derive_seed(config.master_seed, &[r as u64, t as u64]);
            let aux = derive_seed(config.master_seed, &[r as u64, t as u64, 1]);
            run_trial(config, config.rho_grid[r], seed, aux)
        })
        .collect();
    let mut outcomes = outcomes.into_iter();
    let mut table = ExperimentTable::default();
    for &rho in &config.rho_grid {
        let trials: Vec<Trial> = outcomes.by_ref().take(config.trials).collect::<Result<_>>()?;
        let overlaps: Vec<f64> = trials.iter().filter_map(|t| t.overlap).collect();
        let (mean_overlap, std_overlap) = mean_std(&overlaps);
        let lambdas: Vec<f64> = trials.iter().map(|t| t.lambda1).collect();
        let prediction = find_outlier(&LimitModel::from_params(&config.model.with_rho(rho)), rho, None)?;
        let (predicted_overlap, lambda_out_pred) = match prediction.lambda_out {
            Some(l) if config.planted => (prediction.overlap_a + prediction.overlap_b, l),
            _ => (0.0, f64::NAN),
        };
        table.rows.push(ExperimentRow {
            rho,
            mean_overlap,
            std_overlap,
            predicted_overlap,
            lambda1_mean: mean_std(&lambdas).0,
            lambda_out_pred,
            reject_rate: trials.iter().filter(|t| t.reject).count() as f64 / trials.len() as f64,
            trials: trials.len(),
        });
        if config.experiment == ExperimentKind::Spectrum {
            table.histogram.extend(histogram(config, rho, &trials)?);
        }
        for (i, t) in trials.iter().enumerate() {
            if let Some((alpha_hat, beta_hat, eta)) = t.strengths {
                table.strengths.push(StrengthRecord { rho, trial: i, alpha_hat, beta_hat, eta });
            }
        }
    }
    Ok(table)
}

/// A real at 17 significant digits, positional when the exponent is modest.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-5..17).contains(&exp) {
        return sci;
    }
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => ("-", rest),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    if exp >= 0 {
        let (int, frac) = digits.split_at(exp as usize + 1);
        if frac.is_empty() {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{frac}")
        }
    } else {
        format!("{sign}0.{}{digits}", "0".repeat((-exp - 1) as usize))
    }
}

fn write_canonical(value: &Value, out: &mut String) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_i64(), n.as_u64(), n.as_f64()) {
            (Some(i), _, _) => write!(out, "{i}").unwrap(),
            (_, Some(u), _) => write!(out, "{u}").unwrap(),
            (_, _, Some(f)) => out.push_str(&format_number(f)),
            _ => out.push_str(&n.to_string()),
        },
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string")),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, key) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(key).expect("key"));
                out.push(':');
                write_canonical(&map[key], out);
            }
            out.push('}');
        }
    }
}

/// Single-line JSON with sorted keys and 17-digit reals; NaN becomes null.
pub fn canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let value = serde_json::to_value(value).map_err(|e| Error::Validation(e.to_string()))?;
    let mut out = String::new();
    write_canonical(&value, &mut out);
    Ok(out)
}

pub const CSV_HEADER: &str = "rho,mean_overlap,std_overlap,predicted_overlap,lambda1_mean,lambda_out_pred,reject_rate,trials";

fn side_path(output: &Path, suffix: &str) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

/// Writes the main table and, when present, `<output>.spectrum.csv` and
/// `<output>.strengths.csv`. Returns every path written.
pub fn write_experiment(config: &ExperimentConfig, table: &ExperimentTable) -> Result<Vec<PathBuf>> {
    let output = Path::new(&config.output_path);
    let f = format_number;
    let mut text = format!("# config={}\n{CSV_HEADER}\n", canonical_json(config)?);
    for r in &table.rows {
        let cols = [r.rho, r.mean_overlap, r.std_overlap, r.predicted_overlap, r.lambda1_mean, r.lambda_out_pred, r.reject_rate];
        let cols: Vec<String> = cols.iter().map(|x| f(*x)).collect();
        writeln!(text, "{},{}", cols.join(","), r.trials).unwrap();
    }
    fs::write(output, text)?;
    let mut written = vec![output.to_path_buf()];
    if !table.histogram.is_empty() {
        let mut text = String::from("rho,bin_left,bin_right,empirical_density,predicted_density\n");
        for b in &table.histogram {
            writeln!(text, "{},{},{},{},{}", f(b.rho), f(b.left), f(b.right), f(b.empirical), f(b.predicted)).unwrap();
        }
        let path = side_path(output, ".spectrum.csv");
        fs::write(&path, text)?;
        written.push(path);
    }
    if !table.strengths.is_empty() {
        let mut text = String::from("rho,trial,alpha_hat,beta_hat,eta\n");
        for s in &table.strengths {
            writeln!(text, "{},{},{},{},{}", f(s.rho), s.trial, f(s.alpha_hat), f(s.beta_hat), f(s.eta)).unwrap();
        }
        let path = side_path(output, ".strengths.csv");
        fs::write(&path, text)?;
        written.push(path);
    }
    Ok(written)
}

pub fn run_and_write(config: &ExperimentConfig) -> Result<(ExperimentTable, Vec<PathBuf>)> {
    let table = run_experiment(config)?;
    let paths = write_experiment(config, &table)?;
    Ok((table, paths))
}
