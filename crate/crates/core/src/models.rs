//! The three correlated two-view models and seeded sampling of their planted
//! and null laws.

use std::fmt;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, DenseMatrix};
use crate::rng::GaussianStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Cca,
    #[serde(rename = "cswig")]
    Wigner,
    #[serde(rename = "cswish")]
    Wishart,
}

impl ModelKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "cca" => Ok(ModelKind::Cca),
            "cswig" | "wigner" => Ok(ModelKind::Wigner),
            "cswish" | "wishart" => Ok(ModelKind::Wishart),
            other => Err(Error::Validation(format!("unknown model '{other}' (expected cca, cswig or cswish)"))),
        }
    }

    pub fn is_spiked(self) -> bool {
        !matches!(self, ModelKind::Cca)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Cca => "cca",
            ModelKind::Wigner => "cswig",
            ModelKind::Wishart => "cswish",
        })
    }
}

/// Finite-dimensional parameters of one model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelParams {
    Cca { n: usize, m: usize, k: usize, rho: f64 },
    #[serde(rename = "cswig")]
    Wigner { n: usize, alpha: f64, beta: f64, rho: f64 },
    #[serde(rename = "cswish")]
    Wishart { n: usize, m: usize, alpha: f64, beta: f64, rho: f64 },
}

impl ModelParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Cca { .. } => ModelKind::Cca,
            ModelParams::Wigner { .. } => ModelKind::Wigner,
            ModelParams::Wishart { .. } => ModelKind::Wishart,
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            ModelParams::Cca { n, .. } | ModelParams::Wigner { n, .. } | ModelParams::Wishart { n, .. } => n,
        }
    }

    pub fn rho(&self) -> f64 {
        match *self {
            ModelParams::Cca { rho, .. } | ModelParams::Wigner { rho, .. } | ModelParams::Wishart { rho, .. } => rho,
        }
    }

    pub fn with_rho(mut self, value: f64) -> Self {
        match &mut self {
            ModelParams::Cca { rho, .. } | ModelParams::Wigner { rho, .. } | ModelParams::Wishart { rho, .. } => {
                *rho = value
            }
        }
        self
    }

    /// Signal strengths (α, β) of the spiked models.
    pub fn strengths(&self) -> Option<(f64, f64)> {
        match *self {
            ModelParams::Cca { .. } => None,
            ModelParams::Wigner { alpha, beta, .. } | ModelParams::Wishart { alpha, beta, .. } => Some((alpha, beta)),
        }
    }

    /// Aspect ratio n/m of the Wishart model, 1 for Wigner.
    pub fn tau(&self) -> f64 {
        match *self {
            ModelParams::Wishart { n, m, .. } => n as f64 / m as f64,
            _ => 1.0,
        }
    }

    /// Dimension of each planted direction (a lives in R^m for CCA and Wishart).
    pub fn signal_dims(&self) -> (usize, usize) {
        match *self {
            ModelParams::Cca { m, k, .. } => (m, k),
            ModelParams::Wigner { n, .. } => (n, n),
            ModelParams::Wishart { m, .. } => (m, m),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let rho = self.rho();
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::Validation(format!("rho = {rho} is outside [0, 1]")));
        }
        match *self {
            ModelParams::Cca { n, m, k, .. } => {
                if n < 2 || m < 2 || k < 2 {
                    return Err(Error::Validation(format!("dimensions n={n}, m={m}, k={k} must all be at least 2")));
                }
            }
            ModelParams::Wigner { n, alpha, beta, .. } => {
                if n < 2 {
                    return Err(Error::Validation(format!("dimension n={n} must be at least 2")));
                }
                for (name, x) in [("alpha", alpha), ("beta", beta)] {
                    if !(x > 0.0 && x <= 1.0) {
                        return Err(Error::Validation(format!("{name} = {x} must lie in (0, 1]")));
                    }
                }
            }
            ModelParams::Wishart { n, m, alpha, beta, .. } => {
                if n < 2 || m < 2 {
                    return Err(Error::Validation(format!("dimensions n={n}, m={m} must be at least 2")));
                }
                let tau = n as f64 / m as f64;
                for (name, x) in [("alpha", alpha), ("beta", beta)] {
                    if !(x > 0.0 && tau * x * x <= 1.0 + 1e-12) {
                        return Err(Error::Validation(format!(
                            "{name} = {x} must lie in (0, tau^(-1/2)] with tau = {tau}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Planted directions and, for the Wishart model, the latent factors.
#[derive(Clone, Debug, PartialEq)]
pub struct Planted {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub u: Option<Vec<f64>>,
    pub v: Option<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct TwoViewInstance {
    pub params: ModelParams,
    pub u: DenseMatrix,
    pub v: DenseMatrix,
    pub planted: Option<Planted>,
    pub seed: u64,
}

impl TwoViewInstance {
    pub fn kind(&self) -> ModelKind {
        self.params.kind()
    }

    pub fn n(&self) -> usize {
        self.params.n()
    }

    pub fn is_planted(&self) -> bool {
        self.planted.is_some()
    }
}

/// GOE(σ²) sample: off-diagonal variance σ², diagonal variance 2σ².
pub fn sample_goe(n: usize, variance: f64, stream: &mut GaussianStream) -> DenseMatrix {
    let sd = variance.sqrt();
    let mut z = DenseMatrix::zeros(n, n);
    for i in 0..n {
        z.set(i, i, std::f64::consts::SQRT_2 * sd * stream.gaussian());
        for j in 0..i {
            let x = sd * stream.gaussian();
            z.set(i, j, x);
            z.set(j, i, x);
        }
    }
    z
}

/// n × m matrix with i.i.d. N(0, variance) entries.
pub fn sample_gaussian_matrix(n: usize, m: usize, variance: f64, stream: &mut GaussianStream) -> DenseMatrix {
    let mut z = DenseMatrix::zeros(n, m);
    stream.fill(z.data_mut(), variance.sqrt());
    z
}

/// Draws one instance from the planted law (`planted = true`) or the null law.
pub fn sample_instance(params: &ModelParams, planted: bool, seed: u64) -> Result<TwoViewInstance> {
    params.validate()?;
    let (u, v, truth) = match *params {
        ModelParams::Cca { n, m, k, rho } => sample_cca(n, m, k, rho, planted, seed),
        ModelParams::Wigner { n, alpha, beta, rho } => sample_wigner(n, alpha, beta, rho, planted, seed),
        ModelParams::Wishart { n, m, alpha, beta, rho } => sample_wishart(n, m, alpha, beta, rho, planted, seed),
    };
    Ok(TwoViewInstance { params: *params, u, v, planted: truth, seed })
}

fn sample_cca(n: usize, m: usize, k: usize, rho: f64, planted: bool, seed: u64) -> (DenseMatrix, DenseMatrix, Option<Planted>) {
    let mut g_stream = GaussianStream::new(seed, "cca/g");
    let mut h_stream = GaussianStream::new(seed, "cca/h");
    let mut u = DenseMatrix::zeros(n, m);
    let mut v = DenseMatrix::zeros(n, k);
    let (sm, sk) = (1.0 / (m as f64).sqrt(), 1.0 / (k as f64).sqrt());
    if !planted {
        g_stream.fill(u.data_mut(), sm);
        h_stream.fill(v.data_mut(), sk);
        return (u, v, None);
    }
    let a = GaussianStream::new(seed, "cca/a").unit_sphere(m);
    let b = GaussianStream::new(seed, "cca/b").unit_sphere(k);
    let shrink = 1.0 - (1.0 - rho * rho).sqrt();
    let mut g = vec![0.0; m];
    let mut h = vec![0.0; k];
    for i in 0..n {
        g_stream.fill(&mut g, 1.0);
        h_stream.fill(&mut h, 1.0);
        let coef = rho * dot(&a, &g) - shrink * dot(&b, &h);
        for (dst, gi) in u.row_mut(i).iter_mut().zip(&g) {
            *dst = sm * gi;
        }
        for ((dst, hi), bi) in v.row_mut(i).iter_mut().zip(&h).zip(&b) {
            *dst = sk * (hi + coef * bi);
        }
    }
    (u, v, Some(Planted { a, b, u: None, v: None }))
}

/// Spikes with n·E[abᵀ] = ρI built from two independent Gaussian vectors.
fn correlated_spikes(dim: usize, rho: f64, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let scale = 1.0 / (dim as f64).sqrt();
    let g = GaussianStream::new(seed, "spike/g").vector(dim, scale);
    let h = GaussianStream::new(seed, "spike/h").vector(dim, scale);
    let c = (1.0 - rho * rho).sqrt();
    let b = g.iter().zip(&h).map(|(x, y)| rho * x + c * y).collect();
    (g, b)
}

fn sample_wigner(n: usize, alpha: f64, beta: f64, rho: f64, planted: bool, seed: u64) -> (DenseMatrix, DenseMatrix, Option<Planted>) {
    let var = 1.0 / n as f64;
    let mut u = sample_goe(n, var, &mut GaussianStream::new(seed, "goe/a"));
    let mut v = sample_goe(n, var, &mut GaussianStream::new(seed, "goe/b"));
    if !planted {
        return (u, v, None);
    }
    let (a, b) = correlated_spikes(n, rho, seed);
    for i in 0..n {
        for j in 0..n {
            let x = u.get(i, j) + alpha * (a[i] * a[j]);
            u.set(i, j, x);
            let y = v.get(i, j) + beta * (b[i] * b[j]);
            v.set(i, j, y);
        }
    }
    (u, v, Some(Planted { a, b, u: None, v: None }))
}

fn sample_wishart(
    n: usize,
    m: usize,
    alpha: f64,
    beta: f64,
    rho: f64,
    planted: bool,
    seed: u64,
) -> (DenseMatrix, DenseMatrix, Option<Planted>) {
    let var = 1.0 / m as f64;
    let mut u = sample_gaussian_matrix(n, m, var, &mut GaussianStream::new(seed, "wish/za"));
    let mut v = sample_gaussian_matrix(n, m, var, &mut GaussianStream::new(seed, "wish/zb"));
    if !planted {
        return (u, v, None);
    }
    let (a, b) = correlated_spikes(m, rho, seed);
    let lu = GaussianStream::new(seed, "wish/u").vector(n, 1.0);
    let lv = GaussianStream::new(seed, "wish/v").vector(n, 1.0);
    let (ca, cb) = ((alpha / m as f64).sqrt(), (beta / m as f64).sqrt());
    for i in 0..n {
        for (dst, aj) in u.row_mut(i).iter_mut().zip(&a) {
            *dst += ca * lu[i] * aj;
        }
        for (dst, bj) in v.row_mut(i).iter_mut().zip(&b) {
            *dst += cb * lv[i] * bj;
        }
    }
    (u, v, Some(Planted { a, b, u: Some(lu), v: Some(lv) }))
}

/// Writes a matrix as CSV: a `rows,cols` header line, then one line per row.
pub fn write_matrix_csv(path: &Path, m: &DenseMatrix) -> Result<()> {
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{},{}", m.rows(), m.cols())?;
    for i in 0..m.rows() {
        let line: Vec<String> = m.row(i).iter().map(|x| format!("{x:e}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_matrix_csv(path: &Path) -> Result<DenseMatrix> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Validation(format!("{} is empty", path.display())))??;
    let dims: Vec<usize> = header
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Validation(format!("bad header '{header}': {e}")))?;
    if dims.len() != 2 {
        return Err(Error::Validation(format!("bad header '{header}'")));
    }
    let mut data = Vec::with_capacity(dims[0] * dims[1]);
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        for t in line.split(',') {
            data.push(
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Validation(format!("bad entry '{t}': {e}")))?,
            );
        }
    }
    DenseMatrix::new(dims[0], dims[1], data)
}
