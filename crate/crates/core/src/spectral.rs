//! The spectral statistics W (matched and mismatched), their symmetrized
//! forms, and eigenvector overlaps.

use serde::Serialize;

use crate::deteq::sqrt_pair;
use crate::error::{Error, Result};
use crate::linalg::{dot, fix_sign, lanczos_top, norm, normalize, sym_eig, sym_eigvals, DenseMatrix, LanczosOptions};
use crate::models::{ModelKind, ModelParams, TwoViewInstance};
use crate::theory::admissible_kappa;

/// Problems up to this dimension are solved densely.
pub const DENSE_LIMIT: usize = 400;

#[derive(Clone, Debug, Serialize)]
pub struct SpectralResult {
    pub eigenvalues: Vec<f64>,
    pub a_hat: Vec<f64>,
    pub b_hat: Vec<f64>,
    pub guess: Option<(f64, f64)>,
    pub kappa: f64,
}

impl SpectralResult {
    pub fn lambda1(&self) -> f64 {
        self.eigenvalues[0]
    }
}

/// κ used to build W, and the (α̃, β̃) actually used for spiked models.
pub fn statistic_kappa(params: &ModelParams, guess: Option<(f64, f64)>) -> Result<(f64, Option<(f64, f64)>)> {
    match *params {
        ModelParams::Cca { n, m, k, .. } => {
            let kap = (n as f64 / m as f64 * (n as f64 / k as f64)).powf(-0.25);
            if kap >= 1.0 {
                return Err(Error::UnsupportedRegime(format!(
                    "kappa = {kap} >= 1 (n^2 <= m k): no CCA spectral threshold"
                )));
            }
            Ok((kap, None))
        }
        _ => {
            let g = guess.or(params.strengths()).ok_or(Error::MissingTruth)?;
            Ok((admissible_kappa(g.0, g.1, params.tau())?, Some(g)))
        }
    }
}

/// Dense W for the instance.
pub fn build_w(inst: &TwoViewInstance, guess: Option<(f64, f64)>) -> Result<DenseMatrix> {
    let (kap, g) = statistic_kappa(&inst.params, guess)?;
    match inst.kind() {
        ModelKind::Cca => {
            let (m, k) = (inst.u.cols(), inst.v.cols());
            let mut w = DenseMatrix::zeros(m + k, m + k);
            w.set_block(0, 0, &inst.u.t_matmul(&inst.u)?.scaled(-kap));
            let cross = inst.u.t_matmul(&inst.v)?;
            w.set_block(0, m, &cross);
            w.set_block(m, 0, &cross.transpose());
            w.set_block(m, m, &inst.v.t_matmul(&inst.v)?.scaled(-kap));
            Ok(w)
        }
        kind => {
            let (ga, gb) = g.expect("spiked guess");
            let (ub, vb) = normalized_blocks(inst, kind, ga, gb)?;
            let d = ub.rows();
            let mut w = DenseMatrix::zeros(2 * d, 2 * d);
            w.set_block(0, 0, &ub);
            w.set_block(0, d, &vb.scaled(kap));
            w.set_block(d, 0, &ub.scaled(kap));
            w.set_block(d, d, &vb);
            Ok(w)
        }
    }
}

/// Ū and V̄ for a spiked instance.
fn normalized_blocks(inst: &TwoViewInstance, kind: ModelKind, ga: f64, gb: f64) -> Result<(DenseMatrix, DenseMatrix)> {
    match kind {
        ModelKind::Wigner => {
            let mut ub = inst.u.scaled(ga);
            ub.add_diagonal(-ga * ga);
            let mut vb = inst.v.scaled(gb);
            vb.add_diagonal(-gb * gb);
            Ok((ub, vb))
        }
        ModelKind::Wishart => {
            let tau = inst.params.tau();
            let mut ub = inst.u.t_matmul(&inst.u)?.scaled(ga / (1.0 + ga));
            ub.add_diagonal(-ga * tau);
            let mut vb = inst.v.t_matmul(&inst.v)?.scaled(gb / (1.0 + gb));
            vb.add_diagonal(-gb * tau);
            Ok((ub, vb))
        }
        ModelKind::Cca => Err(Error::Validation("CCA has no normalized blocks".into())),
    }
}

/// H = S·diag(Ū, V̄)·S with S = [[1, κ], [κ, 1]]^{1/2} ⊗ I, read off a spiked W.
pub fn symmetrize(w: &DenseMatrix, kappa: f64) -> Result<DenseMatrix> {
    let (rows, cols) = w.shape();
    if rows != cols || rows % 2 != 0 {
        return Err(Error::Validation(format!("W of shape {:?} is not a 2x2 block matrix", w.shape())));
    }
    let d = rows / 2;
    let ub = w.block(0, 0, d, d);
    let vb = w.block(d, d, d, d);
    let (u, v) = sqrt_pair(kappa);
    let mut h = DenseMatrix::zeros(rows, rows);
    let mut tl = ub.scaled(u * u);
    tl.combine(1.0, v * v, &vb);
    let mut br = ub.scaled(v * v);
    br.combine(1.0, u * u, &vb);
    let mut off = ub.scaled(u * v);
    off.combine(1.0, u * v, &vb);
    h.set_block(0, 0, &tl);
    h.set_block(0, d, &off);
    h.set_block(d, 0, &off);
    h.set_block(d, d, &br);
    Ok(h)
}

/// Right eigenvector S·h of W from an eigenvector h of H.
fn unsymmetrize(h: &[f64], kappa: f64) -> Vec<f64> {
    let d = h.len() / 2;
    let (u, v) = sqrt_pair(kappa);
    let mut w: Vec<f64> = (0..2 * d)
        .map(|i| if i < d { u * h[i] + v * h[i + d] } else { v * h[i - d] + u * h[i] })
        .collect();
    normalize(&mut w);
    w
}

fn split(w: Vec<f64>, first: usize, guess: Option<(f64, f64)>, eigenvalues: Vec<f64>, kappa: f64) -> SpectralResult {
    let mut w = w;
    fix_sign(&mut w);
    let b_hat = w.split_off(first);
    SpectralResult { eigenvalues, a_hat: w, b_hat, guess, kappa }
}

/// Eigenvalues and top right eigenvector of a dense W.
pub fn symmetrize_and_eig(w: &DenseMatrix, kind: ModelKind, kappa: f64, k: usize, first_block: usize) -> Result<SpectralResult> {
    match kind {
        ModelKind::Cca => {
            if !w.is_symmetric() {
                return Err(Error::Validation("CCA statistic must be symmetric".into()));
            }
            let pairs = sym_eig(w, k.max(1))?;
            let vec = pairs.vector(0);
            Ok(split(vec, first_block, None, pairs.values[..k.max(1)].to_vec(), kappa))
        }
        _ => {
            let h = symmetrize(w, kappa)?;
            let pairs = sym_eig(&h, k.max(1))?;
            let vec = unsymmetrize(&pairs.vector(0), kappa);
            Ok(split(vec, w.rows() / 2, None, pairs.values, kappa))
        }
    }
}

/// Matrix-free product with W (CCA) or H (spiked).
pub struct StatisticOperator<'a> {
    inst: &'a TwoViewInstance,
    kappa: f64,
    guess: (f64, f64),
    half: usize,
    first: usize,
    buf_a: Vec<f64>,
    buf_b: Vec<f64>,
    za: Vec<f64>,
    zb: Vec<f64>,
}

impl<'a> StatisticOperator<'a> {
    pub fn new(inst: &'a TwoViewInstance, guess: Option<(f64, f64)>) -> Result<Self> {
        let (kappa, g) = statistic_kappa(&inst.params, guess)?;
        let n = inst.n();
        let (first, half) = match inst.kind() {
            ModelKind::Cca => (inst.u.cols(), inst.v.cols()),
            ModelKind::Wigner => (n, n),
            ModelKind::Wishart => (inst.u.cols(), inst.u.cols()),
        };
        Ok(StatisticOperator {
            inst,
            kappa,
            guess: g.unwrap_or((0.0, 0.0)),
            half,
            first,
            buf_a: vec![0.0; n],
            buf_b: vec![0.0; n],
            za: vec![0.0; first.max(half)],
            zb: vec![0.0; first.max(half)],
        })
    }

    pub fn dim(&self) -> usize {
        self.first + self.half
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn apply(&mut self, x: &[f64], y: &mut [f64]) {
        let inst = self.inst;
        match inst.kind() {
            ModelKind::Cca => {
                let m = self.first;
                inst.u.matvec(&x[..m], &mut self.buf_a);
                inst.v.matvec(&x[m..], &mut self.buf_b);
                let k = self.kappa;
                let ta: Vec<f64> = self.buf_a.iter().zip(&self.buf_b).map(|(a, b)| -k * a + b).collect();
                let tb: Vec<f64> = self.buf_a.iter().zip(&self.buf_b).map(|(a, b)| a - k * b).collect();
                inst.u.matvec_t(&ta, &mut y[..m]);
                inst.v.matvec_t(&tb, &mut y[m..]);
            }
            kind => {
                let d = self.half;
                let (u, v) = sqrt_pair(self.kappa);
                let (ga, gb) = self.guess;
                let (xa, xb) = x.split_at(d);
                for i in 0..d {
                    self.za[i] = u * xa[i] + v * xb[i];
                    self.zb[i] = v * xa[i] + u * xb[i];
                }
                let (ya, yb) = y.split_at_mut(d);
                match kind {
                    ModelKind::Wigner => {
                        inst.u.matvec(&self.za[..d], ya);
                        inst.v.matvec(&self.zb[..d], yb);
                        for i in 0..d {
                            ya[i] = ga * ya[i] - ga * ga * self.za[i];
                            yb[i] = gb * yb[i] - gb * gb * self.zb[i];
                        }
                    }
                    _ => {
                        let tau = inst.params.tau();
                        inst.u.matvec(&self.za[..d], &mut self.buf_a);
                        inst.u.matvec_t(&self.buf_a, ya);
                        inst.v.matvec(&self.zb[..d], &mut self.buf_b);
                        inst.v.matvec_t(&self.buf_b, yb);
                        let (ta, tb) = (ga / (1.0 + ga), gb / (1.0 + gb));
                        for i in 0..d {
                            ya[i] = ta * ya[i] - ga * tau * self.za[i];
                            yb[i] = tb * yb[i] - gb * tau * self.zb[i];
                        }
                    }
                }
                for i in 0..d {
                    let (wa, wb) = (ya[i], yb[i]);
                    ya[i] = u * wa + v * wb;
                    yb[i] = v * wa + u * wb;
                }
            }
        }
    }
}

/// Top-k eigenvalues of W and its top right eigenvector, dense for small
/// problems and by Lanczos otherwise.
pub fn spectral_analysis(inst: &TwoViewInstance, guess: Option<(f64, f64)>, k: usize) -> Result<SpectralResult> {
    let mut op = StatisticOperator::new(inst, guess)?;
    let dim = op.dim();
    let kappa = op.kappa();
    let g = if inst.kind().is_spiked() { Some(op.guess) } else { None };
    if dim <= DENSE_LIMIT {
        let w = build_w(inst, guess)?;
        let mut res = symmetrize_and_eig(&w, inst.kind(), kappa, k, op.first)?;
        res.guess = g;
        return Ok(res);
    }
    let pairs = lanczos_top(dim, |x, y| op.apply(x, y), k.max(1), 1, &LanczosOptions::default())?;
    let top = pairs.vector(0);
    let vec = if inst.kind().is_spiked() { unsymmetrize(&top, kappa) } else { top };
    let first = if inst.kind().is_spiked() { dim / 2 } else { inst.u.cols() };
    Ok(split(vec, first, g, pairs.values, kappa))
}

/// Every eigenvalue of W, descending. W is similar to a symmetric matrix, so
/// the spectrum is real.
pub fn full_spectrum(inst: &TwoViewInstance, guess: Option<(f64, f64)>) -> Result<Vec<f64>> {
    let w = build_w(inst, guess)?;
    match inst.kind() {
        ModelKind::Cca => sym_eigvals(&w),
        _ => sym_eigvals(&symmetrize(&w, statistic_kappa(&inst.params, guess)?.0)?),
    }
}

/// (⟨â, a⟩², ⟨b̂, b⟩²) with the planted directions normalized.
pub fn empirical_overlap(result: &SpectralResult, inst: &TwoViewInstance) -> Result<(f64, f64)> {
    let planted = inst.planted.as_ref().ok_or(Error::MissingTruth)?;
    overlap_pair(&result.a_hat, &result.b_hat, &planted.a, &planted.b)
}

pub fn overlap_pair(a_hat: &[f64], b_hat: &[f64], a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a_hat.len() != a.len() || b_hat.len() != b.len() {
        return Err(Error::Validation("estimate and truth have different dimensions".into()));
    }
    let sq = |x: &[f64], t: &[f64]| {
        let nt = norm(t);
        if nt == 0.0 {
            0.0
        } else {
            (dot(x, t) / nt).powi(2)
        }
    };
    Ok((sq(a_hat, a), sq(b_hat, b)))
}
