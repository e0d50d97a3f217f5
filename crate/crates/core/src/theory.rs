//! Closed-form thresholds and the second-moment numerics for the CCA lower bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ModelKind, ModelParams};

/// Proportional-limit parameters of a model: aspect ratios and strengths.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LimitModel {
    Cca { tau_m: f64, tau_k: f64 },
    #[serde(rename = "cswig")]
    Wigner { alpha: f64, beta: f64 },
    #[serde(rename = "cswish")]
    Wishart { alpha: f64, beta: f64, tau: f64 },
}

impl LimitModel {
    /// Limit parameters matching a finite instance (τ_m = n/m and so on).
    pub fn from_params(params: &ModelParams) -> Self {
        match *params {
            ModelParams::Cca { n, m, k, .. } => LimitModel::Cca { tau_m: n as f64 / m as f64, tau_k: n as f64 / k as f64 },
            ModelParams::Wigner { alpha, beta, .. } => LimitModel::Wigner { alpha, beta },
            ModelParams::Wishart { n, m, alpha, beta, .. } => LimitModel::Wishart { alpha, beta, tau: n as f64 / m as f64 },
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            LimitModel::Cca { .. } => ModelKind::Cca,
            LimitModel::Wigner { .. } => ModelKind::Wigner,
            LimitModel::Wishart { .. } => ModelKind::Wishart,
        }
    }

    pub fn strengths(&self) -> Option<(f64, f64)> {
        match *self {
            LimitModel::Cca { .. } => None,
            LimitModel::Wigner { alpha, beta } | LimitModel::Wishart { alpha, beta, .. } => Some((alpha, beta)),
        }
    }

    /// τ of the spiked models (1 for Wigner); unused for CCA.
    pub fn tau(&self) -> f64 {
        match *self {
            LimitModel::Wishart { tau, .. } => tau,
            _ => 1.0,
        }
    }

    /// Same model with the strengths replaced, e.g. by a guess.
    pub fn with_strengths(&self, alpha: f64, beta: f64) -> Self {
        match *self {
            LimitModel::Cca { .. } => *self,
            LimitModel::Wigner { .. } => LimitModel::Wigner { alpha, beta },
            LimitModel::Wishart { tau, .. } => LimitModel::Wishart { alpha, beta, tau },
        }
    }

    pub fn kappa(&self) -> Result<f64> {
        kappa(self)
    }

    /// Right edge of the null bulk: λ* for CCA, 1 for the spiked models.
    pub fn edge(&self) -> Result<f64> {
        match self {
            LimitModel::Cca { .. } => {
                let k = kappa(self)?;
                if k >= 1.0 {
                    return Err(Error::UnsupportedRegime(format!(
                        "kappa = {k} >= 1 (tau_m * tau_k <= 1) has no CCA bulk edge"
                    )));
                }
                Ok(lambda_star(k))
            }
            _ => Ok(1.0),
        }
    }
}

pub fn lambda_star(kappa: f64) -> f64 {
    (1.0 - kappa * kappa) / kappa
}

/// κ(α, β, τ) for the spiked models; τ = 1 gives the Wigner threshold.
pub fn spiked_kappa(alpha: f64, beta: f64, tau: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::Validation(format!("tau = {tau} must be positive")));
    }
    for (name, x) in [("alpha", alpha), ("beta", beta)] {
        if !(x > 0.0) || tau * x * x > 1.0 + 1e-12 {
            return Err(Error::UnsupportedRegime(format!(
                "{name} = {x} outside (0, tau^(-1/2)] with tau = {tau}"
            )));
        }
    }
    let num = (1.0 - tau * alpha * alpha).max(0.0) * (1.0 - tau * beta * beta).max(0.0);
    let den = tau * tau * alpha * alpha * beta * beta;
    Ok((num / den).powf(0.25))
}

pub fn kappa(model: &LimitModel) -> Result<f64> {
    match *model {
        LimitModel::Cca { tau_m, tau_k } => {
            if !(tau_m > 0.0 && tau_k > 0.0) {
                return Err(Error::Validation(format!("aspect ratios tau_m = {tau_m}, tau_k = {tau_k} must be positive")));
            }
            Ok((tau_m * tau_k).powf(-0.25))
        }
        LimitModel::Wigner { alpha, beta } => spiked_kappa(alpha, beta, 1.0),
        LimitModel::Wishart { alpha, beta, tau } => spiked_kappa(alpha, beta, tau),
    }
}

/// Checks that a guess (α̃, β̃) gives κ̃ ∈ (0, 1) and returns κ̃.
pub fn admissible_kappa(alpha: f64, beta: f64, tau: f64) -> Result<f64> {
    let k = spiked_kappa(alpha, beta, tau)
        .map_err(|e| Error::InadmissibleGuess(format!("({alpha}, {beta}): {e}")))?;
    if !(k > 0.0 && k < 1.0) {
        return Err(Error::InadmissibleGuess(format!(
            "({alpha}, {beta}) gives kappa = {k}, outside (0, 1)"
        )));
    }
    Ok(k)
}

/// Correlation above which the statistic built with the guess still has an outlier.
/// The formula only needs κ̃ > 0; building the statistic needs κ̃ < 1 as well.
pub fn rho_out(guess: (f64, f64), truth: (f64, f64), tau: f64, kind: ModelKind) -> Result<f64> {
    let tau = match kind {
        ModelKind::Cca => return Err(Error::Validation("rho_out is defined for the spiked models only".into())),
        ModelKind::Wigner => 1.0,
        ModelKind::Wishart => tau,
    };
    let (ga, gb) = guess;
    let (a, b) = truth;
    spiked_kappa(a, b, tau)?;
    let kt = spiked_kappa(ga, gb, tau).map_err(|e| Error::InadmissibleGuess(format!("({ga}, {gb}): {e}")))?;
    if !(kt > 0.0) {
        return Err(Error::InadmissibleGuess(format!("({ga}, {gb}) gives kappa = 0")));
    }
    let inv = 1.0 / tau;
    let num = ((inv - a * ga).max(0.0) * (inv - b * gb).max(0.0)).sqrt();
    Ok(num / (kt * (a * b * ga * gb).sqrt()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Below,
    At,
    Above,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub kappa: f64,
    pub lambda_star: f64,
    pub regime: Regime,
    pub rho_out_mismatched: Option<f64>,
}

pub fn threshold_report(model: &LimitModel, rho: f64, guess: Option<(f64, f64)>) -> Result<ThresholdReport> {
    let k = kappa(model)?;
    let lambda_star = match model {
        LimitModel::Cca { .. } => lambda_star(k),
        _ => 1.0,
    };
    let regime = if (rho - k).abs() <= 1e-12 {
        Regime::At
    } else if rho > k {
        Regime::Above
    } else {
        Regime::Below
    };
    let rho_out_mismatched = match (guess, model.strengths()) {
        (Some(g), Some(t)) => Some(rho_out(g, t, model.tau(), model.kind())?),
        _ => None,
    };
    Ok(ThresholdReport { kappa: k, lambda_star, regime, rho_out_mismatched })
}

/// Spiked-model quantity whose sign is that of κ⁴ − ρ⁴.
pub fn second_moment_condition(model: &LimitModel, rho: f64) -> Result<f64> {
    match *model {
        LimitModel::Cca { .. } => Err(Error::Validation("the second-moment condition is stated for the spiked models".into())),
        LimitModel::Wigner { alpha, beta } => {
            Ok((1.0 - alpha * alpha) * (1.0 - beta * beta) - alpha * alpha * beta * beta * rho.powi(4))
        }
        LimitModel::Wishart { alpha, beta, tau } => Ok((1.0 - tau * alpha * alpha) * (1.0 - tau * beta * beta)
            - tau * tau * alpha * alpha * beta * beta * rho.powi(4)),
    }
}

/// Exponent Ψ_n(s, t) of the second-moment integral.
pub fn saddle_exponent(s: f64, t: f64, rho: f64, n: usize, m: usize, k: usize) -> Result<f64> {
    if !(s.abs() < 1.0 && t.abs() < 1.0) {
        return Err(Error::OutOfDomain(format!("(s, t) = ({s}, {t}) must lie in (-1, 1)^2")));
    }
    let nf = n as f64;
    Ok(-(1.0 - rho * rho * s * t).ln()
        + (m as f64 - 3.0) / (2.0 * nf) * (1.0 - s * s).ln()
        + (k as f64 - 3.0) / (2.0 * nf) * (1.0 - t * t).ln())
}

/// ln c_m for the density c_m (1 − s²)^{(m−3)/2} of one coordinate of a
/// uniform point on the sphere in R^m.
pub fn ln_overlap_density_constant(m: usize) -> f64 {
    use statrs::function::gamma::ln_gamma;
    let m = m as f64;
    ln_gamma(m / 2.0) - 0.5 * std::f64::consts::PI.ln() - ln_gamma((m - 1.0) / 2.0)
}

const GL_NODES: usize = 20;

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton on P_n.
fn gauss_legendre(npts: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; npts];
    let mut w = vec![0.0; npts];
    let nf = npts as f64;
    for i in 0..(npts + 1) / 2 {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..npts {
                let p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j as f64 + 1.0) * z * p1 - j as f64 * p2) / (j as f64 + 1.0);
            }
            dp = nf * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[npts - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[npts - 1 - i] = w[i];
    }
    (x, w)
}

/// Panel breakpoints on [-1, 1], dense within a few widths of the origin
/// and geometrically graded toward ±1.
fn panel_breaks(width: f64) -> Vec<f64> {
    let mut pos = vec![0.0];
    for mult in [0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0, 16.0, 20.0, 24.0, 32.0, 48.0, 64.0] {
        let b = mult * width;
        if b < 0.5 {
            pos.push(b);
        }
    }
    let last = *pos.last().unwrap();
    let mut gap = 1.0 - last;
    for _ in 0..40 {
        gap *= 0.5;
        pos.push(1.0 - gap);
    }
    pos.push(1.0);
    pos.dedup();
    let mut all: Vec<f64> = pos.iter().rev().map(|x| -x).collect();
    all.pop();
    all.extend(pos);
    all
}

fn refine(breaks: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * breaks.len());
    for w in breaks.windows(2) {
        out.push(w[0]);
        out.push(0.5 * (w[0] + w[1]));
    }
    out.push(*breaks.last().unwrap());
    out
}

fn tensor_quadrature(breaks: &[f64], log_f: impl Fn(f64, f64) -> f64, log_shift: f64) -> f64 {
    let (gx, gw) = gauss_legendre(GL_NODES);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, wt) in gx.iter().zip(&gw) {
            nodes.push(mid + half * x);
            weights.push(half * wt);
        }
    }
    let mut total = 0.0;
    for (s, ws) in nodes.iter().zip(&weights) {
        let mut row = 0.0;
        for (t, wt) in nodes.iter().zip(&weights) {
            row += wt * (log_f(*s, *t) - log_shift).exp();
        }
        total += ws * row;
    }
    total
}

/// E[(1 − ρ²θφ)^{−n}] for independent first coordinates θ, φ of uniform
/// points on the spheres in R^m and R^k, by tensor Gauss–Legendre quadrature.
pub fn chi2_second_moment(rho: f64, n: usize, m: usize, k: usize) -> Result<f64> {
    if n < 1 || m < 2 || k < 2 {
        return Err(Error::Validation(format!("dimensions n={n}, m={m}, k={k} are too small")));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::Validation(format!("rho = {rho} is outside [0, 1]")));
    }
    let kap = kappa(&LimitModel::Cca { tau_m: n as f64 / m as f64, tau_k: n as f64 / k as f64 })?;
    if rho >= kap {
        return Err(Error::UnsupportedRegime(format!(
            "rho = {rho} >= kappa = {kap}: the second moment diverges"
        )));
    }
    if rho == 0.0 {
        return Ok(1.0);
    }
    let (nf, am, ak) = (n as f64, (m as f64 - 3.0) / 2.0, (k as f64 - 3.0) / 2.0);
    let ln_c = ln_overlap_density_constant(m) + ln_overlap_density_constant(k);
    let r2 = rho * rho;
    let log_f = move |s: f64, t: f64| {
        let (ls, lt) = ((1.0 - s * s).max(0.0).ln(), (1.0 - t * t).max(0.0).ln());
        ln_c - nf * (1.0 - r2 * s * t).ln() + am * ls + ak * lt
    };
    let width = 1.0 / (m.min(k) as f64).sqrt();
    let mut breaks = panel_breaks(width);
    let mut prev = tensor_quadrature(&breaks, log_f, 0.0);
    for _ in 0..4 {
        breaks = refine(&breaks);
        let next = tensor_quadrature(&breaks, log_f, 0.0);
        if (next - prev).abs() <= 1e-7 * next.abs() {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::NonConvergence(format!("quadrature did not settle to 1e-6 relative (last value {prev})")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn caption_thresholds() {
        let cca = kappa(&LimitModel::Cca { tau_m: 2.0, tau_k: 2.0 }).unwrap();
        assert!((cca - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        let wig = kappa(&LimitModel::Wigner { alpha: 0.8, beta: 0.8 }).unwrap();
        assert!((wig - 0.75).abs() < 1e-12);
        let wish = kappa(&LimitModel::Wishart { alpha: 0.6, beta: 0.6, tau: 2.0 }).unwrap();
        assert!((wish - 0.6236).abs() < 1e-4);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(GL_NODES);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
        let x38: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(38)).sum();
        assert!((x38 - 2.0 / 39.0).abs() < 1e-14);
    }

    #[test]
    fn density_constant_normalizes() {
        for m in [3usize, 10, 101, 1000] {
            let c = ln_overlap_density_constant(m).exp();
            let (x, w) = gauss_legendre(GL_NODES);
            let breaks = panel_breaks(1.0 / (m as f64).sqrt());
            let mut total = 0.0;
            for p in breaks.windows(2) {
                let (h, mid) = (0.5 * (p[1] - p[0]), 0.5 * (p[0] + p[1]));
                for (xi, wi) in x.iter().zip(&w) {
                    let s: f64 = mid + h * xi;
                    total += h * wi * c * (1.0 - s * s).powf((m as f64 - 3.0) / 2.0);
                }
            }
            assert!((total - 1.0).abs() < 1e-10, "m = {m}: {total}");
        }
    }

    #[test]
    fn chi2_trivial_and_refused_regimes() {
        assert_eq!(chi2_second_moment(0.0, 200, 100, 100).unwrap(), 1.0);
        assert!(matches!(chi2_second_moment(0.75, 200, 100, 100), Err(Error::UnsupportedRegime(_))));
    }

    #[test]
    fn saddle_domain() {
        assert_eq!(saddle_exponent(0.0, 0.0, 0.6, 1000, 500, 500).unwrap(), 0.0);
        assert!(saddle_exponent(1.0, 0.0, 0.6, 1000, 500, 500).is_err());
    }
}
