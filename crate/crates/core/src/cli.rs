//! Command-line front end. Every subcommand prints one line of canonical
//! JSON on success.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::harness::{canonical_json, run_and_write, ExperimentConfig, ExperimentKind};
use crate::inference::{detect, estimate_strengths_with, grid_search, statistic_edge, StrengthOptions, ThresholdRule};
use crate::models::{read_matrix_csv, sample_instance, write_matrix_csv, ModelKind, ModelParams, TwoViewInstance};
use crate::outlier::find_outlier;
use crate::rng::substream_seed;
use crate::spectral::{empirical_overlap, full_spectrum, spectral_analysis, SpectralResult};
use crate::theory::{threshold_report, LimitModel};

pub const SEED_ENV: &str = "TWOVIEW_SEED";

#[derive(Parser, Debug)]
#[command(name = "twoview", version, about = "Spectral detection and recovery in correlated two-view models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample an instance and write U, V (and the planted directions) as CSV.
    Generate(GenerateArgs),
    /// Thresholds, bulk edge, outlier location and predicted overlaps.
    Predict(PredictArgs),
    /// Top eigenvalues of W for a sampled or loaded instance.
    Spectrum(SpectrumArgs),
    /// Spectral test with known parameters.
    Detect(DetectArgs),
    /// Top eigenvector of W, optionally under a parameter guess.
    Recover(RecoverArgs),
    /// Parameter-free test and recovery by maximizing over a parameter grid.
    GridSearch(GridArgs),
    /// Split-noise estimates of the signal strengths.
    EstimateStrength(StrengthArgs),
    /// Monte Carlo sweep over a grid of correlations, written as CSV.
    Experiment(ExperimentArgs),
}

/// Model flags. Any of them may also come from `--config`; flags win.
#[derive(Args, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct ModelArgs {
    /// Model: cca, cswig or cswish
    #[arg(long)]
    model: Option<String>,
    /// Number of samples (CCA, cswish) or dimension (cswig)
    #[arg(long)]
    n: Option<usize>,
    /// First view dimension (CCA) or signal dimension (cswish)
    #[arg(long)]
    m: Option<usize>,
    /// Second view dimension (CCA)
    #[arg(long)]
    k: Option<usize>,
    /// Signal strength of the first view (spiked models)
    #[arg(long)]
    alpha: Option<f64>,
    /// Signal strength of the second view (spiked models)
    #[arg(long)]
    beta: Option<f64>,
    /// Aspect ratio n/m (cswish)
    #[arg(long)]
    tau: Option<f64>,
    /// Aspect ratio n/m (CCA)
    #[arg(long)]
    tau_m: Option<f64>,
    /// Aspect ratio n/k (CCA)
    #[arg(long)]
    tau_k: Option<f64>,
    /// Correlation between the planted directions
    #[arg(long)]
    rho: Option<f64>,
    /// RNG seed [default: 0]
    #[arg(long, env = SEED_ENV)]
    seed: Option<u64>,
    /// JSON file of flag values (keys are flag names)
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Worker threads [default: available cores]
    #[arg(long)]
    #[serde(skip)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Sample from the null law instead of the planted law
    #[arg(long)]
    null: bool,
    /// Load U from a CSV written by `generate` instead of sampling
    #[arg(long, requires = "v_file")]
    u_file: Option<PathBuf>,
    /// Load V from a CSV written by `generate`
    #[arg(long, requires = "u_file")]
    v_file: Option<PathBuf>,
    /// Include the estimated directions in the output
    #[arg(long)]
    vectors: bool,
}

#[derive(Args, Debug)]
struct RuleArgs {
    /// Threshold constant c in edge + c·n^(-exponent)
    #[arg(long, default_value_t = 4.0)]
    c: f64,
    /// Threshold exponent in edge + c·n^(-exponent)
    #[arg(long, default_value_t = 1.0 / 3.0)]
    exponent: f64,
}

impl RuleArgs {
    fn rule(&self) -> ThresholdRule {
        ThresholdRule { c: self.c, exponent: self.exponent }
    }
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Directory receiving u.csv, v.csv and truth.json
    #[arg(long)]
    out_dir: PathBuf,
    /// Sample from the null law
    #[arg(long)]
    null: bool,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    guess: GuessArgs,
}

#[derive(Args, Debug)]
struct GuessArgs {
    /// Guessed alpha used to build W (spiked models) [default: true alpha]
    #[arg(long, requires = "guess_beta")]
    guess_alpha: Option<f64>,
    /// Guessed beta used to build W (spiked models) [default: true beta]
    #[arg(long, requires = "guess_alpha")]
    guess_beta: Option<f64>,
}

impl GuessArgs {
    fn guess(&self) -> Option<(f64, f64)> {
        self.guess_alpha.zip(self.guess_beta)
    }
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    input: InputArgs,
    /// Number of leading eigenvalues
    #[arg(long, default_value_t = 10)]
    top: usize,
    /// Compute the whole spectrum densely
    #[arg(long)]
    full: bool,
}

#[derive(Args, Debug)]
struct DetectArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    rule: RuleArgs,
}

#[derive(Args, Debug)]
struct RecoverArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    guess: GuessArgs,
    /// Number of leading eigenvalues
    #[arg(long, default_value_t = 2)]
    top: usize,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    rule: RuleArgs,
    /// Grid resolution parameter, in (0, 1/4)
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Grid spacing [default: eps^2]
    #[arg(long, conflicts_with = "fine_mesh")]
    mesh: Option<f64>,
    /// Use the spacing eps^9
    #[arg(long)]
    fine_mesh: bool,
    /// Include λ_1 at every grid point in the output
    #[arg(long)]
    grid: bool,
}

#[derive(Args, Debug)]
struct StrengthArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    input: InputArgs,
    /// Seed of the auxiliary split noise [default: derived from --seed]
    #[arg(long)]
    aux_seed: Option<u64>,
    /// Grid resolution parameter for the recovery step
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Grid spacing for the recovery step
    #[arg(long, default_value_t = 0.05)]
    mesh: f64,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Experiment: overlap_curve, spectrum, detection_sweep, grid_search_sweep or strength_sweep
    #[arg(long)]
    experiment: Option<String>,
    /// Comma-separated correlations
    #[arg(long, value_delimiter = ',')]
    rho_grid: Option<Vec<f64>>,
    /// Trials per correlation
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed for per-trial seeds [default: --seed]
    #[arg(long)]
    master_seed: Option<u64>,
    /// Output CSV path
    #[arg(long)]
    output: Option<String>,
}

macro_rules! fill {
    ($dst:expr, $src:expr, $($f:ident),*) => {
        $( if $dst.$f.is_none() { $dst.$f = $src.$f.take(); } )*
    };
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}

impl ModelArgs {
    fn merge(&mut self, mut file: ModelArgs) {
        fill!(self, file, model, n, m, k, alpha, beta, tau, tau_m, tau_k, rho, seed);
    }

    /// Merges `--config` when given (for subcommands whose config is a flag map).
    fn resolve(mut self) -> Result<Self> {
        if let Some(path) = self.config.clone() {
            let value: Value = serde_json::from_str(&fs::read_to_string(&path)?)
                .map_err(|e| usage(format!("{}: {e}", path.display())))?;
            let Value::Object(map) = value else {
                return Err(usage(format!("{}: expected a JSON object", path.display())));
            };
            let map: serde_json::Map<String, Value> = map.into_iter().map(|(k, v)| (k.replace('_', "-"), v)).collect();
            let file: ModelArgs =
                serde_json::from_value(Value::Object(map)).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            self.merge(file);
        }
        Ok(self)
    }

    fn kind(&self) -> Result<ModelKind> {
        ModelKind::parse(self.model.as_deref().ok_or_else(|| usage("--model is required"))?)
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn need<T: Copy>(v: Option<T>, flag: &str, kind: ModelKind) -> Result<T> {
        v.ok_or_else(|| usage(format!("--{flag} is required for model {kind}")))
    }

    fn from_ratio(n: usize, dim: Option<usize>, ratio: Option<f64>, flag: &str, kind: ModelKind) -> Result<usize> {
        match (dim, ratio) {
            (Some(d), _) => Ok(d),
            (None, Some(t)) if t > 0.0 => Ok(((n as f64) / t).round() as usize),
            _ => Err(usage(format!("--{flag} (or its aspect ratio) is required for model {kind}"))),
        }
    }

    fn params(&self, rho_required: bool) -> Result<ModelParams> {
        let kind = self.kind()?;
        let n = Self::need(self.n, "n", kind)?;
        let rho = if rho_required { Self::need(self.rho, "rho", kind)? } else { self.rho.unwrap_or(0.0) };
        let params = match kind {
            ModelKind::Cca => ModelParams::Cca {
                n,
                m: Self::from_ratio(n, self.m, self.tau_m, "m", kind)?,
                k: Self::from_ratio(n, self.k, self.tau_k, "k", kind)?,
                rho,
            },
            ModelKind::Wigner => ModelParams::Wigner {
                n,
                alpha: Self::need(self.alpha, "alpha", kind)?,
                beta: Self::need(self.beta, "beta", kind)?,
                rho,
            },
            ModelKind::Wishart => ModelParams::Wishart {
                n,
                m: Self::from_ratio(n, self.m, self.tau, "m", kind)?,
                alpha: Self::need(self.alpha, "alpha", kind)?,
                beta: Self::need(self.beta, "beta", kind)?,
                rho,
            },
        };
        params.validate()?;
        Ok(params)
    }

    /// Limit model from aspect ratios, or from dimensions when those are given.
    fn limit(&self) -> Result<(LimitModel, f64)> {
        let kind = self.kind()?;
        let rho = Self::need(self.rho, "rho", kind)?;
        let ratio = |t: Option<f64>, d: Option<usize>, flag: &str| -> Result<f64> {
            t.or_else(|| Some(self.n? as f64 / d? as f64))
                .ok_or_else(|| usage(format!("--{flag} (or --n with the matching dimension) is required for model {kind}")))
        };
        let model = match kind {
            ModelKind::Cca => LimitModel::Cca { tau_m: ratio(self.tau_m, self.m, "tau-m")?, tau_k: ratio(self.tau_k, self.k, "tau-k")? },
            ModelKind::Wigner => LimitModel::Wigner {
                alpha: Self::need(self.alpha, "alpha", kind)?,
                beta: Self::need(self.beta, "beta", kind)?,
            },
            ModelKind::Wishart => LimitModel::Wishart {
                alpha: Self::need(self.alpha, "alpha", kind)?,
                beta: Self::need(self.beta, "beta", kind)?,
                tau: ratio(self.tau, self.m, "tau")?,
            },
        };
        if !(0.0..=1.0).contains(&rho) {
            return Err(usage(format!("rho = {rho} is outside [0, 1]")));
        }
        Ok((model, rho))
    }

    fn from_params(params: &ModelParams) -> Self {
        let mut out = ModelArgs { model: Some(params.kind().to_string()), n: Some(params.n()), rho: Some(params.rho()), ..Default::default() };
        match *params {
            ModelParams::Cca { m, k, .. } => {
                out.m = Some(m);
                out.k = Some(k);
            }
            ModelParams::Wigner { alpha, beta, .. } => {
                out.alpha = Some(alpha);
                out.beta = Some(beta);
            }
            ModelParams::Wishart { m, alpha, beta, .. } => {
                out.m = Some(m);
                out.alpha = Some(alpha);
                out.beta = Some(beta);
            }
        }
        out
    }
}

/// Samples an instance or loads one from `--u-file`/`--v-file`.
fn instance(model: &ModelArgs, input: &InputArgs) -> Result<TwoViewInstance> {
    let (Some(uf), Some(vf)) = (&input.u_file, &input.v_file) else {
        return sample_instance(&model.params(!input.null)?, !input.null, model.seed());
    };
    let (u, v) = (read_matrix_csv(uf)?, read_matrix_csv(vf)?);
    if u.rows() != v.rows() {
        return Err(usage("U and V must have the same number of rows"));
    }
    let kind = model.kind()?;
    let n = u.rows();
    let strength = |f: Option<f64>, flag: &str| ModelArgs::need(f, flag, kind);
    let params = match kind {
        ModelKind::Cca => ModelParams::Cca { n, m: u.cols(), k: v.cols(), rho: 0.0 },
        ModelKind::Wigner => {
            if u.cols() != n || v.cols() != n {
                return Err(usage("cswig matrices must be square"));
            }
            ModelParams::Wigner { n, alpha: strength(model.alpha, "alpha")?, beta: strength(model.beta, "beta")?, rho: 0.0 }
        }
        ModelKind::Wishart => {
            if u.cols() != v.cols() {
                return Err(usage("cswish matrices must have the same shape"));
            }
            ModelParams::Wishart { n, m: u.cols(), alpha: strength(model.alpha, "alpha")?, beta: strength(model.beta, "beta")?, rho: 0.0 }
        }
    };
    params.validate()?;
    Ok(TwoViewInstance { params, u, v, planted: None, seed: model.seed() })
}

fn spectral_json(res: &SpectralResult, inst: &TwoViewInstance, vectors: bool) -> Value {
    let mut v = json!({
        "eigenvalues": res.eigenvalues,
        "guess": res.guess,
        "kappa": res.kappa,
    });
    if let Ok((a, b)) = empirical_overlap(res, inst) {
        v["overlap_a"] = json!(a);
        v["overlap_b"] = json!(b);
    }
    if vectors {
        v["a_hat"] = json!(res.a_hat);
        v["b_hat"] = json!(res.b_hat);
    }
    v
}

fn cmd_generate(args: GenerateArgs) -> Result<Value> {
    let model = args.model.resolve()?;
    let params = model.params(!args.null)?;
    let inst = sample_instance(&params, !args.null, model.seed())?;
    fs::create_dir_all(&args.out_dir)?;
    let u = args.out_dir.join("u.csv");
    let v = args.out_dir.join("v.csv");
    write_matrix_csv(&u, &inst.u)?;
    write_matrix_csv(&v, &inst.v)?;
    let mut files = vec![u.display().to_string(), v.display().to_string()];
    if let Some(p) = &inst.planted {
        let truth = args.out_dir.join("truth.json");
        let mut value = json!({"a": p.a, "b": p.b, "params": params, "seed": inst.seed});
        if let (Some(lu), Some(lv)) = (&p.u, &p.v) {
            value["u"] = json!(lu);
            value["v"] = json!(lv);
        }
        fs::write(&truth, canonical_json(&value)? + "\n")?;
        files.push(truth.display().to_string());
    }
    Ok(json!({"files": files, "params": params, "planted": !args.null, "seed": inst.seed}))
}

fn cmd_predict(args: PredictArgs) -> Result<Value> {
    let model = args.model.resolve()?;
    let (limit, rho) = model.limit()?;
    let guess = args.guess.guess();
    let report = threshold_report(&limit, rho, guess)?;
    let pred = find_outlier(&limit, rho, guess)?;
    let mut out = serde_json::to_value(&pred).expect("serializable");
    out["kappa"] = json!(report.kappa);
    out["lambda_star"] = json!(report.lambda_star);
    out["regime"] = serde_json::to_value(report.regime).expect("serializable");
    out["rho_out"] = json!(report.rho_out_mismatched);
    out["model"] = serde_json::to_value(limit).expect("serializable");
    out["rho"] = json!(rho);
    Ok(out)
}

fn cmd_spectrum(args: SpectrumArgs) -> Result<Value> {
    let model = args.model.resolve()?;
    let inst = instance(&model, &args.input)?;
    let edge = statistic_edge(&inst)?;
    if args.full {
        let values = full_spectrum(&inst, None)?;
        return Ok(json!({"edge": edge, "eigenvalues": values, "n": inst.n()}));
    }
    let res = spectral_analysis(&inst, None, args.top.max(1))?;
    let mut out = spectral_json(&res, &inst, args.input.vectors);
    out["edge"] = json!(edge);
    out["n"] = json!(inst.n());
    Ok(out)
}

fn cmd_detect(args: DetectArgs) -> Result<Value> {
    let model = args.model.resolve()?;
    let inst = instance(&model, &args.input)?;
    let (det, res) = detect(&inst, &args.rule.rule())?;
    Ok(json!({"detection": det, "spectral": spectral_json(&res, &inst, args.input.vectors)}))
}

fn cmd_recover(args: RecoverArgs) -> Result<Value> {
    let model = args.model.resolve()?;
    let inst = instance(&model, &args.input)?;
    let res = spectral_analysis(&inst, args.guess.guess(), args.top.max(1))?;
    Ok(json!({"spectral": spectral_json(&res, &inst, args.input.vectors)}))
}

fn cmd_grid(args: GridArgs) -> Result<Value> {
    let model = args.model.resolve()?;
    let inst = instance(&model, &args.input)?;
    let mesh = if args.fine_mesh { Some(args.eps.powi(9)) } else { args.mesh };
    let out = grid_search(&inst, args.eps, mesh, &args.rule.rule())?;
    let mut v = json!({"detection": out.detection, "spectral": spectral_json(&out.spectral, &inst, args.input.vectors)});
    v["grid_points"] = json!(out.grid.len());
    if args.grid {
        v["grid"] = json!(out.grid);
    }
    Ok(v)
}

fn cmd_strength(args: StrengthArgs) -> Result<Value> {
    let model = args.model.resolve()?;
    let inst = instance(&model, &args.input)?;
    let aux = args.aux_seed.unwrap_or_else(|| substream_seed(model.seed(), "aux"));
    let report = estimate_strengths_with(&inst, aux, &StrengthOptions { eps: args.eps, mesh: Some(args.mesh) })?;
    Ok(json!({
        "diagnostic": report.diagnostic,
        "estimate": report.estimate,
        "recovery": {
            "detection": report.recovery.detection,
            "spectral": spectral_json(&report.recovery.spectral, &inst, args.input.vectors),
        },
    }))
}

fn cmd_experiment(args: ExperimentArgs) -> Result<Value> {
    let mut flags = args.model;
    let mut config: ExperimentConfig = match &flags.config {
        Some(path) => serde_json::from_str(&fs::read_to_string(path)?)
            .map_err(|e| usage(format!("{}: {e}", path.display())))?,
        None => {
            let experiment = args.experiment.clone().ok_or_else(|| usage("--experiment is required without --config"))?;
            ExperimentConfig {
                model: flags.params(false)?,
                rho_grid: args.rho_grid.clone().ok_or_else(|| usage("--rho-grid is required without --config"))?,
                trials: args.trials.ok_or_else(|| usage("--trials is required without --config"))?,
                master_seed: args.master_seed.unwrap_or(flags.seed()),
                experiment: parse_experiment(&experiment)?,
                output_path: args.output.clone().ok_or_else(|| usage("--output is required without --config"))?,
                planted: true,
                threshold: ThresholdRule::default(),
                eps: 0.1,
                mesh: None,
                histogram_bins: 60,
            }
        }
    };
    if flags.config.is_some() {
        let any_model_flag = flags.model.is_some()
            || flags.n.is_some()
            || flags.m.is_some()
            || flags.k.is_some()
            || flags.alpha.is_some()
            || flags.beta.is_some()
            || flags.tau.is_some()
            || flags.tau_m.is_some()
            || flags.tau_k.is_some();
        if any_model_flag {
            let base = ModelArgs::from_params(&config.model);
            if flags.model.is_some() && flags.model.as_deref().map(ModelKind::parse).transpose()? != Some(config.model.kind()) {
                flags.merge(ModelArgs { n: base.n, rho: base.rho, ..Default::default() });
            } else {
                flags.merge(base);
            }
            config.model = flags.params(false)?;
        }
        if let Some(e) = &args.experiment {
            config.experiment = parse_experiment(e)?;
        }
        if let Some(g) = args.rho_grid {
            config.rho_grid = g;
        }
        if let Some(t) = args.trials {
            config.trials = t;
        }
        if let Some(s) = args.master_seed {
            config.master_seed = s;
        }
        if let Some(o) = args.output {
            config.output_path = o;
        }
    }
    let (table, paths) = run_and_write(&config)?;
    Ok(json!({
        "files": paths.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        "rows": table.rows,
    }))
}

fn parse_experiment(name: &str) -> Result<ExperimentKind> {
    serde_json::from_value(Value::String(name.replace('-', "_")))
        .map_err(|_| usage(format!("unknown experiment '{name}'")))
}

fn threads(cmd: &Command) -> Option<usize> {
    match cmd {
        Command::Generate(a) => a.model.threads,
        Command::Predict(a) => a.model.threads,
        Command::Spectrum(a) => a.model.threads,
        Command::Detect(a) => a.model.threads,
        Command::Recover(a) => a.model.threads,
        Command::GridSearch(a) => a.model.threads,
        Command::EstimateStrength(a) => a.model.threads,
        Command::Experiment(a) => a.model.threads,
    }
}

fn dispatch(cmd: Command) -> Result<Value> {
    match cmd {
        Command::Generate(a) => cmd_generate(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Detect(a) => cmd_detect(a),
        Command::Recover(a) => cmd_recover(a),
        Command::GridSearch(a) => cmd_grid(a),
        Command::EstimateStrength(a) => cmd_strength(a),
        Command::Experiment(a) => cmd_experiment(a),
    }
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        2
    } else {
        1
    }
}

/// Runs the command line, writing JSON to `out` and diagnostics to `err`.
/// Returns the process exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads(&cli.command).unwrap_or(0)).build() {
        Ok(pool) => pool,
        Err(e) => {
            let _ = writeln!(err, "error: thread pool: {e}");
            return 1;
        }
    };
    match pool.install(|| dispatch(cli.command).and_then(|v| canonical_json(&v))) {
        Ok(line) => {
            let _ = writeln!(out, "{line}");
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
