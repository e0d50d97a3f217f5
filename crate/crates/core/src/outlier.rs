//! The limiting 2×2 matrices S(z), the outlier location as the root of
//! det S, and overlap predictions from the kernel of S(λ_out).

use num_complex::Complex64 as C;
use serde::Serialize;

use crate::deteq::{solve_system, DetSolution};
use crate::error::{Error, Result};
use crate::theory::{admissible_kappa, rho_out, LimitModel};

pub type Real2 = [[f64; 2]; 2];

/// Distance past the edge scanned for a sign change of the crossing eigenvalue.
pub const Z_MAX: f64 = 50.0;

#[derive(Clone, Debug, Serialize)]
pub struct OutlierPrediction {
    pub exists: bool,
    pub lambda_out: Option<f64>,
    pub kernel_vector: [f64; 2],
    pub ds_dz: Real2,
    pub overlap_a: f64,
    pub overlap_b: f64,
    pub is_lower_bound: bool,
    /// κ when the statistic uses the true parameters, ρ_out otherwise.
    pub threshold: f64,
    pub edge: f64,
    pub edge_det: f64,
}

/// The statistic's construction parameters: the truth, or the guess when given.
fn construction(model: &LimitModel, guess: Option<(f64, f64)>) -> Result<(LimitModel, (f64, f64))> {
    let truth = model
        .strengths()
        .ok_or_else(|| Error::Validation("spiked model expected".into()))?;
    let g = guess.unwrap_or(truth);
    admissible_kappa(g.0, g.1, model.tau())?;
    Ok((model.with_strengths(g.0, g.1), g))
}

fn s_from_solution(model: &LimitModel, rho: f64, guess: (f64, f64), sol: &DetSolution) -> Real2 {
    match *model {
        LimitModel::Cca { .. } => {
            let k = sol.kappa;
            let off = -(rho / k) * 0.5 * (sol.t[0][1].re + sol.t[1][0].re);
            [[1.0 / sol.r.re, off], [off, 1.0 / sol.s.re]]
        }
        LimitModel::Wigner { alpha, beta } => {
            let (ptp, qtq, ptq) = sol.quadratic_forms();
            let (ta, tb) = (alpha * guess.0, beta * guess.1);
            let off = rho * (ta * tb).sqrt() * ptq.re;
            [[1.0 + ta * ptp.re, off], [off, 1.0 + tb * qtq.re]]
        }
        LimitModel::Wishart { alpha, beta, tau } => {
            let (ptp, qtq, ptq) = sol.quadratic_forms();
            let (th1, th2) = (guess.0 / (1.0 + guess.0), guess.1 / (1.0 + guess.1));
            let (ca, cb) = (alpha * th1, beta * th2);
            let off = rho * (ca * cb).sqrt() * ptq.re;
            [
                [ca * ptp.re - 1.0 / (tau * sol.r.re), off],
                [off, cb * qtq.re - 1.0 / (tau * sol.s.re)],
            ]
        }
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::Validation(format!("rho = {rho} is outside [0, 1]")));
    }
    Ok(())
}

fn solve_at(model: &LimitModel, z: f64, guess: Option<(f64, f64)>) -> Result<(DetSolution, (f64, f64))> {
    match model {
        LimitModel::Cca { .. } => Ok((solve_system(model, C::from(z))?, (0.0, 0.0))),
        _ => {
            let (built, g) = construction(model, guess)?;
            Ok((solve_system(&built, C::from(z))?, g))
        }
    }
}

/// S(z) for the statistic built with `guess` (the truth when absent) on the
/// model `model` at correlation `rho`.
pub fn build_s(model: &LimitModel, rho: f64, z: f64, guess: Option<(f64, f64)>) -> Result<Real2> {
    check_rho(rho)?;
    let (sol, g) = solve_at(model, z, guess)?;
    Ok(s_from_solution(model, rho, g, &sol))
}

/// Closed-form limit of S(z) as z decreases to the edge.
pub fn edge_s(model: &LimitModel, rho: f64, guess: Option<(f64, f64)>) -> Result<Real2> {
    check_rho(rho)?;
    match *model {
        LimitModel::Cca { .. } => {
            let k = model.kappa()?;
            let ls = model.edge()?;
            let off = rho * ls / k;
            Ok([[-ls, off], [off, -ls]])
        }
        LimitModel::Wigner { alpha, beta } => {
            let (_, (ga, gb)) = construction(model, guess)?;
            let kt = admissible_kappa(ga, gb, 1.0)?;
            let off = -rho * kt * (alpha * beta * ga * gb).sqrt();
            Ok([[1.0 - alpha * ga, off], [off, 1.0 - beta * gb]])
        }
        LimitModel::Wishart { alpha, beta, tau } => {
            let (_, (ga, gb)) = construction(model, guess)?;
            let kt = admissible_kappa(ga, gb, tau)?;
            let off = -rho * kt * (alpha * beta * ga * gb).sqrt() / ((1.0 + ga) * (1.0 + gb)).sqrt();
            Ok([
                [(1.0 / tau - alpha * ga) / (1.0 + ga), off],
                [off, (1.0 / tau - beta * gb) / (1.0 + gb)],
            ])
        }
    }
}

pub fn det2(m: &Real2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Eigenvalues (ascending) of a symmetric 2×2 matrix.
pub fn eig2(m: &Real2) -> [f64; 2] {
    let mean = 0.5 * (m[0][0] + m[1][1]);
    let half = 0.5 * (m[0][0] - m[1][1]);
    let rad = half.hypot(0.5 * (m[0][1] + m[1][0]));
    [mean - rad, mean + rad]
}

/// Unit eigenvector of a symmetric 2×2 matrix for eigenvalue `lambda`,
/// first coordinate made nonnegative.
pub fn eigvec2(m: &Real2, lambda: f64) -> [f64; 2] {
    let b = 0.5 * (m[0][1] + m[1][0]);
    let c1 = [b, lambda - m[0][0]];
    let c2 = [lambda - m[1][1], b];
    let n1 = c1[0].hypot(c1[1]);
    let n2 = c2[0].hypot(c2[1]);
    let mut x = if n1 >= n2 {
        [c1[0] / n1, c1[1] / n1]
    } else {
        [c2[0] / n2, c2[1] / n2]
    };
    if !(n1.max(n2) > 0.0) {
        x = [1.0, 0.0];
    }
    if x[0] < 0.0 || (x[0] == 0.0 && x[1] < 0.0) {
        x = [-x[0], -x[1]];
    }
    x
}

/// ∂S/∂z by central differences with h = 1e-6·max(1, |z|) and one
/// Richardson step.
pub fn ds_dz(model: &LimitModel, rho: f64, z: f64, guess: Option<(f64, f64)>) -> Result<Real2> {
    check_rho(rho)?;
    let edge = model.edge()?;
    if !(z > edge + 1e-6) {
        return Err(Error::OutOfDomain(format!("z = {z} must exceed the edge {edge} by 1e-6")));
    }
    let h = (1e-6 * z.abs().max(1.0)).min(0.25 * (z - edge));
    let central = |h: f64| -> Result<Real2> {
        let p = build_s(model, rho, z + h, guess)?;
        let m = build_s(model, rho, z - h, guess)?;
        let mut d = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                d[i][j] = (p[i][j] - m[i][j]) / (2.0 * h);
            }
        }
        Ok(d)
    };
    let coarse = central(h)?;
    let fine = central(0.5 * h)?;
    let mut d = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            d[i][j] = (4.0 * fine[i][j] - coarse[i][j]) / 3.0;
        }
    }
    let off = 0.5 * (d[0][1] + d[1][0]);
    d[0][1] = off;
    d[1][0] = off;
    Ok(d)
}

/// Brent's root finder on a bracket with f(a)·f(b) ≤ 0.
pub fn brent(mut f: impl FnMut(f64) -> Result<f64>, mut a: f64, mut b: f64, xtol: f64) -> Result<f64> {
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Search(format!("[{a}, {b}] does not bracket a root")));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let mid = 0.5 * (c - b);
        if mid.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * mid * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * mid * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * mid * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = mid;
                e = d;
            }
        } else {
            d = mid;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(mid) };
        fb = f(b)?;
    }
    Err(Error::Search("Brent iteration limit reached".into()))
}

/// Threshold on ρ above which an outlier exists (κ, or ρ_out under a guess).
pub fn outlier_threshold(model: &LimitModel, guess: Option<(f64, f64)>) -> Result<f64> {
    match model.strengths() {
        None => model.kappa(),
        Some(truth) => {
            let g = guess.unwrap_or(truth);
            admissible_kappa(g.0, g.1, model.tau())?;
            rho_out(g, truth, model.tau(), model.kind())
        }
    }
}

/// Locates λ_out > edge with det S(λ_out) = 0 and the overlap predictions.
pub fn find_outlier(model: &LimitModel, rho: f64, guess: Option<(f64, f64)>) -> Result<OutlierPrediction> {
    check_rho(rho)?;
    let edge = model.edge()?;
    let spiked = model.kind().is_spiked();
    let threshold = outlier_threshold(model, guess)?;
    let edge_det = det2(&edge_s(model, rho, guess)?);
    let absent = OutlierPrediction {
        exists: false,
        lambda_out: None,
        kernel_vector: [0.0, 0.0],
        ds_dz: [[0.0; 2]; 2],
        overlap_a: 0.0,
        overlap_b: 0.0,
        is_lower_bound: spiked,
        threshold,
        edge,
        edge_det,
    };
    if !(rho > threshold) {
        return Ok(absent);
    }

    // the crossing eigenvalue goes from negative to positive in `g`
    let g = |z: f64| -> Result<f64> {
        let s = build_s(model, rho, z, guess)?;
        let ev = eig2(&s);
        Ok(if spiked { ev[0] } else { -ev[1] })
    };
    let lo0 = edge + 1e-8 * edge.abs().max(1.0);
    let lambda_out = if g(lo0)? >= 0.0 {
        lo0
    } else {
        let mut lo = lo0;
        let mut step = 0.01;
        let hi = loop {
            let z = (edge + step).min(edge + Z_MAX);
            if g(z)? > 0.0 {
                break z;
            }
            if z >= edge + Z_MAX {
                return Err(Error::Search(format!(
                    "no sign change of the crossing eigenvalue on ({edge}, {}]",
                    edge + Z_MAX
                )));
            }
            lo = z;
            step *= 2.0;
        };
        brent(g, lo, hi, 1e-10)?
    };

    let s = build_s(model, rho, lambda_out, guess)?;
    let ev = eig2(&s);
    let kernel_vector = eigvec2(&s, if spiked { ev[0] } else { ev[1] });
    let x = kernel_vector;
    let d = ds_dz(model, rho, lambda_out.max(edge + 2e-6), guess)?;
    let quad = x[0] * x[0] * d[0][0] + 2.0 * x[0] * x[1] * d[0][1] + x[1] * x[1] * d[1][1];
    let (overlap_a, overlap_b) = match *model {
        LimitModel::Cca { .. } => (x[0] * x[0] / -quad, x[1] * x[1] / -quad),
        LimitModel::Wigner { alpha, beta } => {
            let (_, (ga, gb)) = construction(model, guess)?;
            let kt = admissible_kappa(ga, gb, 1.0)?;
            (
                x[0] * x[0] / (alpha * ga * (1.0 + kt) * quad),
                x[1] * x[1] / (beta * gb * (1.0 + kt) * quad),
            )
        }
        LimitModel::Wishart { alpha, beta, tau } => {
            let (sol, (ga, gb)) = solve_at(model, lambda_out, guess)?;
            let kt = admissible_kappa(ga, gb, tau)?;
            let (th1, th2) = (ga / (1.0 + ga), gb / (1.0 + gb));
            let (r, s) = (sol.r.re, sol.s.re);
            (
                x[0] * x[0] / (tau * tau * r * r * alpha * th1 * (1.0 + kt) * quad),
                x[1] * x[1] / (tau * tau * s * s * beta * th2 * (1.0 + kt) * quad),
            )
        }
    };
    Ok(OutlierPrediction {
        exists: true,
        lambda_out: Some(lambda_out),
        kernel_vector,
        ds_dz: d,
        overlap_a,
        overlap_b,
        is_lower_bound: spiked,
        threshold,
        edge,
        edge_det,
    })
}
