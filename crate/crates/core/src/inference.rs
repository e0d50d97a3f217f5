//! Detection tests, the parameter-free grid search, and split-noise
//! estimation of the signal strengths.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::deteq::sqrt_pair;
use crate::error::{Error, Result};
use crate::linalg::{dot, gemm_raw, lanczos_top_values_batch, norm, DenseMatrix, LanczosOptions, MatRef};
use crate::models::{sample_gaussian_matrix, sample_goe, ModelKind, TwoViewInstance};
use crate::rng::GaussianStream;
use crate::spectral::{spectral_analysis, statistic_kappa, SpectralResult};
use crate::theory::{lambda_star, spiked_kappa};

/// Rejection threshold edge + c·n^{-exponent}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRule {
    pub c: f64,
    pub exponent: f64,
}

impl Default for ThresholdRule {
    fn default() -> Self {
        ThresholdRule { c: 4.0, exponent: 1.0 / 3.0 }
    }
}

impl ThresholdRule {
    pub fn threshold(&self, edge: f64, n: usize) -> f64 {
        edge + self.c * (n as f64).powf(-self.exponent)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DetectionResult {
    pub statistic: f64,
    pub threshold: f64,
    pub reject_null: bool,
    pub argmax_guess: Option<(f64, f64)>,
}

impl DetectionResult {
    fn new(statistic: f64, threshold: f64, argmax_guess: Option<(f64, f64)>) -> Self {
        DetectionResult { statistic, threshold, reject_null: statistic >= threshold, argmax_guess }
    }
}

/// Bulk edge of the finite-n statistic: λ*(κ_n) for CCA, 1 otherwise.
pub fn statistic_edge(inst: &TwoViewInstance) -> Result<f64> {
    match inst.kind() {
        ModelKind::Cca => Ok(lambda_star(statistic_kappa(&inst.params, None)?.0)),
        _ => Ok(1.0),
    }
}

/// λ_1 of the matched statistic against the threshold rule.
pub fn detect(inst: &TwoViewInstance, rule: &ThresholdRule) -> Result<(DetectionResult, SpectralResult)> {
    let spectral = spectral_analysis(inst, None, 2)?;
    let threshold = rule.threshold(statistic_edge(inst)?, inst.n());
    Ok((DetectionResult::new(spectral.lambda1(), threshold, spectral.guess), spectral))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GridPoint {
    pub alpha: f64,
    pub beta: f64,
    pub lambda1: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GridSearchResult {
    pub detection: DetectionResult,
    pub spectral: SpectralResult,
    pub grid: Vec<GridPoint>,
}

/// Refuse grids that would not fit in memory or time.
pub const MAX_GRID_POINTS: usize = 200_000;
const GRID_CHUNK: usize = 16;
/// Grid points within this of κ̃ = 0 or 1 are boundary points lost to rounding.
const KAPPA_MARGIN: f64 = 1e-9;

/// {(α̃, β̃) ∈ mesh·ℤ ∩ (0, τ^{-1/2})² : κ(α̃, β̃, τ) < 1}, lexicographic.
pub fn admissible_grid(tau: f64, mesh: f64) -> Result<Vec<(f64, f64)>> {
    if !(mesh > 0.0 && tau > 0.0) {
        return Err(Error::Config(format!("mesh = {mesh} and tau = {tau} must be positive")));
    }
    let top = tau.powf(-0.5);
    let count = (top / mesh).ceil();
    if count * count > 4.0 * MAX_GRID_POINTS as f64 {
        return Err(Error::Config(format!(
            "mesh {mesh:e} gives about {count:.3e}^2 grid points, beyond the limit of {MAX_GRID_POINTS}"
        )));
    }
    let count = count as usize;
    let values: Vec<f64> = (1..=count).map(|i| i as f64 * mesh).filter(|&x| x < top).collect();
    let mut grid = Vec::new();
    for &a in &values {
        for &b in &values {
            if let Ok(k) = spiked_kappa(a, b, tau) {
                if k > KAPPA_MARGIN && k < 1.0 - KAPPA_MARGIN {
                    grid.push((a, b));
                }
            }
        }
    }
    if grid.len() > MAX_GRID_POINTS {
        return Err(Error::Config(format!("{} grid points exceed the limit of {MAX_GRID_POINTS}", grid.len())));
    }
    Ok(grid)
}

/// λ_1(W(α̃, β̃)) at every grid point, sharing block products across points.
pub fn grid_top_eigenvalues(inst: &TwoViewInstance, grid: &[(f64, f64)]) -> Result<Vec<f64>> {
    let kind = inst.kind();
    if !kind.is_spiked() {
        return Err(Error::Validation("grid search applies to the spiked models".into()));
    }
    let tau = inst.params.tau();
    let d = match kind {
        ModelKind::Wigner => inst.n(),
        _ => inst.u.cols(),
    };
    let n = inst.n();
    let opts = LanczosOptions { max_dim: 2000, tol: 1e-10, check_every: 5, seed: 0x9e1d };
    let chunks: Vec<Result<Vec<f64>>> = grid
        .par_chunks(GRID_CHUNK)
        .map(|chunk| {
            let coef: Vec<(f64, f64, f64, f64)> = chunk
                .iter()
                .map(|&(a, b)| {
                    let k = spiked_kappa(a, b, tau).expect("admissible grid");
                    let (u, v) = sqrt_pair(k);
                    (a, b, u, v)
                })
                .collect();
            let mut za = Vec::new();
            let mut zb = Vec::new();
            let mut pa = Vec::new();
            let mut pb = Vec::new();
            let mut ta = Vec::new();
            lanczos_top_values_batch(
                2 * d,
                chunk.len(),
                |active, x, y| {
                    let bsz = active.len();
                    za.resize(d * bsz, 0.0);
                    zb.resize(d * bsz, 0.0);
                    pa.resize(d * bsz, 0.0);
                    pb.resize(d * bsz, 0.0);
                    for i in 0..d {
                        for (slot, &c) in active.iter().enumerate() {
                            let (_, _, u, v) = coef[c];
                            let (xa, xb) = (x[i * bsz + slot], x[(i + d) * bsz + slot]);
                            za[i * bsz + slot] = u * xa + v * xb;
                            zb[i * bsz + slot] = v * xa + u * xb;
                        }
                    }
                    match kind {
                        ModelKind::Wigner => {
                            gemm_raw(1.0, MatRef::normal(&inst.u), MatRef::from_slice(&za, d, bsz), 0.0, &mut pa, d, bsz);
                            gemm_raw(1.0, MatRef::normal(&inst.v), MatRef::from_slice(&zb, d, bsz), 0.0, &mut pb, d, bsz);
                        }
                        _ => {
                            ta.resize(n * bsz, 0.0);
                            gemm_raw(1.0, MatRef::normal(&inst.u), MatRef::from_slice(&za, d, bsz), 0.0, &mut ta, n, bsz);
                            gemm_raw(1.0, MatRef::transposed(&inst.u), MatRef::from_slice(&ta, n, bsz), 0.0, &mut pa, d, bsz);
                            gemm_raw(1.0, MatRef::normal(&inst.v), MatRef::from_slice(&zb, d, bsz), 0.0, &mut ta, n, bsz);
                            gemm_raw(1.0, MatRef::transposed(&inst.v), MatRef::from_slice(&ta, n, bsz), 0.0, &mut pb, d, bsz);
                        }
                    }
                    for i in 0..d {
                        for (slot, &c) in active.iter().enumerate() {
                            let (a, b, u, v) = coef[c];
                            let j = i * bsz + slot;
                            let (wa, wb) = match kind {
                                ModelKind::Wigner => (a * pa[j] - a * a * za[j], b * pb[j] - b * b * zb[j]),
                                _ => (
                                    a / (1.0 + a) * pa[j] - a * tau * za[j],
                                    b / (1.0 + b) * pb[j] - b * tau * zb[j],
                                ),
                            };
                            y[j] = u * wa + v * wb;
                            y[(i + d) * bsz + slot] = v * wa + u * wb;
                        }
                    }
                },
                &opts,
            )
        })
        .collect();
    let mut out = Vec::with_capacity(grid.len());
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

/// Λ_ε = max over the admissible grid of λ_1(W(α̃, β̃)).
///
/// `mesh` defaults to ε². Ties in the maximum go to the earliest grid point.
pub fn grid_search(inst: &TwoViewInstance, eps: f64, mesh: Option<f64>, rule: &ThresholdRule) -> Result<GridSearchResult> {
    if !(eps > 0.0 && eps < 0.25) {
        return Err(Error::Config(format!("eps = {eps} must lie in (0, 1/4)")));
    }
    let mesh = mesh.unwrap_or(eps * eps);
    let tau = inst.params.tau();
    let grid = admissible_grid(tau, mesh)?;
    if grid.is_empty() {
        return Err(Error::Config(format!("no admissible grid points for mesh {mesh}")));
    }
    let values = grid_top_eigenvalues(inst, &grid)?;
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    let spectral = spectral_analysis(inst, Some(grid[best]), 2)?;
    let threshold = rule.threshold(1.0, inst.n());
    let detection = DetectionResult::new(values[best], threshold, Some(grid[best]));
    let grid = grid
        .iter()
        .zip(&values)
        .map(|(&(alpha, beta), &lambda1)| GridPoint { alpha, beta, lambda1 })
        .collect();
    Ok(GridSearchResult { detection, spectral, grid })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct StrengthEstimate {
    pub alpha_hat: f64,
    pub beta_hat: f64,
    pub eta: f64,
    pub aux_seed: u64,
}

#[derive(Clone, Copy, Debug)]
pub struct StrengthOptions {
    pub eps: f64,
    pub mesh: Option<f64>,
}

impl Default for StrengthOptions {
    fn default() -> Self {
        StrengthOptions { eps: 0.1, mesh: Some(0.05) }
    }
}

#[derive(Clone, Debug)]
pub struct StrengthReport {
    pub estimate: StrengthEstimate,
    /// Grid search on the first half of the split.
    pub recovery: GridSearchResult,
    pub diagnostic: Option<String>,
}

/// The two halves of the split-noise construction.
pub struct SplitViews {
    /// Instance carrying (U⁽¹⁾, V⁽¹⁾) and the original truth.
    pub first: TwoViewInstance,
    pub u2: DenseMatrix,
    pub v2: DenseMatrix,
    pub eta: f64,
}

/// U⁽¹⁾ = (U + √η G)/√(1+η), U⁽²⁾ = (U − G/√η)/√(1+1/η) with η = n^{-1/5}
/// and fresh noise G of the model's noise law drawn from `aux_seed`.
pub fn split_views(inst: &TwoViewInstance, aux_seed: u64) -> Result<SplitViews> {
    let kind = inst.kind();
    if !kind.is_spiked() {
        return Err(Error::Validation("strength estimation applies to the spiked models".into()));
    }
    let n = inst.n();
    let eta = (n as f64).powf(-0.2);
    let draw = |tag: &str| -> DenseMatrix {
        let mut stream = GaussianStream::new(aux_seed, tag);
        match kind {
            ModelKind::Wigner => sample_goe(n, 1.0 / n as f64, &mut stream),
            _ => sample_gaussian_matrix(n, inst.u.cols(), 1.0 / inst.u.cols() as f64, &mut stream),
        }
    };
    let halves = |x: &DenseMatrix, g: &DenseMatrix| -> (DenseMatrix, DenseMatrix) {
        let mut first = x.clone();
        first.combine(1.0, eta.sqrt(), g);
        let first = first.scaled(1.0 / (1.0 + eta).sqrt());
        let mut second = x.clone();
        second.combine(1.0, -1.0 / eta.sqrt(), g);
        let second = second.scaled(1.0 / (1.0 + 1.0 / eta).sqrt());
        (first, second)
    };
    let (u1, u2) = halves(&inst.u, &draw("split/u"));
    let (v1, v2) = halves(&inst.v, &draw("split/v"));
    let first = TwoViewInstance { params: inst.params, u: u1, v: v1, planted: inst.planted.clone(), seed: inst.seed };
    Ok(SplitViews { first, u2, v2, eta })
}

/// √(1+1/η)·(‖U x‖² − 1)/(xᵀU x), or 0 when the denominator vanishes.
pub fn wigner_strength(u2: &DenseMatrix, x: &[f64], eta: f64) -> f64 {
    let ux = u2.mul_vec(x);
    let den = dot(x, &ux);
    let num = dot(&ux, &ux) - 1.0;
    if den.abs() <= 1e-14 * (1.0 + num.abs()) {
        return 0.0;
    }
    (1.0 + 1.0 / eta).sqrt() * num / den
}

/// ((1+1/η)/τ)·(B/A − 1) with A = xᵀ(S − τI)x, B = ‖(S − τI)x‖² − τ and
/// S = UᵀU; 0 when A vanishes.
pub fn wishart_strength(u2: &DenseMatrix, x: &[f64], eta: f64, tau: f64) -> f64 {
    let ux = u2.mul_vec(x);
    let mut w = vec![0.0; x.len()];
    u2.matvec_t(&ux, &mut w);
    for (wi, xi) in w.iter_mut().zip(x) {
        *wi -= tau * xi;
    }
    let a = dot(x, &w);
    let b = dot(&w, &w) - tau;
    if a.abs() <= 1e-14 * (1.0 + b.abs()) {
        return 0.0;
    }
    (1.0 + 1.0 / eta) / tau * (b / a - 1.0)
}

fn unit(v: &[f64]) -> Option<Vec<f64>> {
    let nrm = norm(v);
    (nrm > 0.0 && nrm.is_finite()).then(|| v.iter().map(|x| x / nrm).collect())
}

/// Split the noise, recover directions by grid search on the first half,
/// and evaluate the strength estimators on the second.
pub fn estimate_strengths_with(inst: &TwoViewInstance, aux_seed: u64, opts: &StrengthOptions) -> Result<StrengthReport> {
    let split = split_views(inst, aux_seed)?;
    let recovery = grid_search(&split.first, opts.eps, opts.mesh, &ThresholdRule::default())?;
    let eta = split.eta;
    let tau = inst.params.tau();
    let estimate_one = |u2: &DenseMatrix, dir: &[f64]| -> Option<f64> {
        let x = unit(dir)?;
        Some(match inst.kind() {
            ModelKind::Wigner => wigner_strength(u2, &x, eta),
            _ => wishart_strength(u2, &x, eta, tau),
        })
    };
    let a = estimate_one(&split.u2, &recovery.spectral.a_hat);
    let b = estimate_one(&split.v2, &recovery.spectral.b_hat);
    let diagnostic = match (a, b) {
        (Some(_), Some(_)) => None,
        _ => Some(Error::DegenerateRecovery("grid search returned a zero direction".into()).to_string()),
    };
    Ok(StrengthReport {
        estimate: StrengthEstimate { alpha_hat: a.unwrap_or(0.0), beta_hat: b.unwrap_or(0.0), eta, aux_seed },
        recovery,
        diagnostic,
    })
}

pub fn estimate_strengths(inst: &TwoViewInstance, aux_seed: u64) -> Result<StrengthEstimate> {
    Ok(estimate_strengths_with(inst, aux_seed, &StrengthOptions::default())?.estimate)
}
