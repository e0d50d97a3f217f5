//! Deterministic equivalents: the coupled (r, s, T) systems describing the
//! limiting resolvent of the null statistic for each model.

use num_complex::Complex64 as C;

use crate::error::{Error, Result};
use crate::theory::LimitModel;

pub type Mat2 = [[C; 2]; 2];

#[derive(Clone, Copy, Debug)]
pub struct DetSolution {
    pub z: C,
    pub r: C,
    pub s: C,
    pub t: Mat2,
    pub model: LimitModel,
    pub kappa: f64,
    pub residual: f64,
}

impl DetSolution {
    /// pᵀTp, qᵀTq and pᵀTq for the spiked models (p = (u, v), q = (v, u)).
    pub fn quadratic_forms(&self) -> (C, C, C) {
        let (u, v) = sqrt_pair(self.kappa);
        quad_forms(&self.t, u, v)
    }
}

const RESIDUAL_TOL: f64 = 1e-12;
const ACCEPT_TOL: f64 = 1e-11;
const FP_MAX_ITER: usize = 10_000;
const NEWTON_MAX_ITER: usize = 60;
const STEP_RATIO: f64 = 0.6;

/// Entries (u, v) of [[1, κ], [κ, 1]]^{1/2}: u² + v² = 1, 2uv = κ.
pub fn sqrt_pair(kappa: f64) -> (f64, f64) {
    let (a, b) = ((1.0 + kappa).sqrt(), (1.0 - kappa).max(0.0).sqrt());
    (0.5 * (a + b), 0.5 * (a - b))
}

fn quad_forms(t: &Mat2, u: f64, v: f64) -> (C, C, C) {
    let ptp = t[0][0] * (u * u) + (t[0][1] + t[1][0]) * (u * v) + t[1][1] * (v * v);
    let qtq = t[0][0] * (v * v) + (t[0][1] + t[1][0]) * (u * v) + t[1][1] * (u * u);
    let ptq = t[0][0] * (u * v) + t[0][1] * (u * u) + t[1][0] * (v * v) + t[1][1] * (u * v);
    (ptp, qtq, ptq)
}

fn inverse2(m: Mat2) -> Option<Mat2> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = m.iter().flatten().fold(0.0f64, |a, x| a.max(x.norm()));
    if !(det.norm() > 1e-300 && det.norm() > 1e-15 * scale * scale) {
        return None;
    }
    Some([[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]])
}

#[derive(Clone, Copy)]
struct System {
    model: LimitModel,
    kappa: f64,
    edge: f64,
    u: f64,
    v: f64,
}

impl System {
    fn new(model: &LimitModel) -> Result<Self> {
        let kappa = model.kappa()?;
        if model.kind().is_spiked() && !(kappa > 0.0 && kappa < 1.0) {
            return Err(Error::UnsupportedRegime(format!("kappa = {kappa} is outside (0, 1)")));
        }
        let edge = model.edge()?;
        let (u, v) = sqrt_pair(kappa);
        Ok(System { model: *model, kappa, edge, u, v })
    }

    fn t_of(&self, z: C, r: C, s: C) -> Option<Mat2> {
        let k = self.kappa;
        match self.model {
            LimitModel::Cca { .. } => {
                let a0 = k / (k * k - 1.0);
                let b = [[C::from(a0 * k) - r * k, C::from(a0)], [C::from(a0), C::from(a0 * k) - s * k]];
                inverse2(b)
            }
            LimitModel::Wigner { alpha, beta } => {
                let ca = (r + 1.0) * (alpha * alpha);
                let cb = (s + 1.0) * (beta * beta);
                self.spiked_t(z, ca, cb)
            }
            LimitModel::Wishart { alpha, beta, tau } => {
                let (th1, th2) = (alpha / (1.0 + alpha), beta / (1.0 + beta));
                let ca = (r * th1 + alpha) * tau;
                let cb = (s * th2 + beta) * tau;
                self.spiked_t(z, ca, cb)
            }
        }
    }

    /// (−zI − ca·ppᵀ − cb·qqᵀ)^{-1}
    fn spiked_t(&self, z: C, ca: C, cb: C) -> Option<Mat2> {
        let (u, v) = (self.u, self.v);
        let m = [
            [-z - ca * (u * u) - cb * (v * v), -(ca + cb) * (u * v)],
            [-(ca + cb) * (u * v), -z - ca * (v * v) - cb * (u * u)],
        ];
        inverse2(m)
    }

    /// One application of the fixed-point map.
    fn map(&self, z: C, r: C, s: C) -> Option<(C, C, Mat2)> {
        let t = self.t_of(z, r, s)?;
        let (r1, s1) = match self.model {
            LimitModel::Cca { tau_m, tau_k } => {
                let k = self.kappa;
                (1.0 / (-z - t[0][0] * (k * tau_m)), 1.0 / (-z - t[1][1] * (k * tau_k)))
            }
            LimitModel::Wigner { .. } => {
                let (ptp, qtq, _) = quad_forms(&t, self.u, self.v);
                (ptp, qtq)
            }
            LimitModel::Wishart { alpha, beta, .. } => {
                let (th1, th2) = (alpha / (1.0 + alpha), beta / (1.0 + beta));
                let (ptp, qtq, _) = quad_forms(&t, self.u, self.v);
                (1.0 / (-1.0 - ptp * th1), 1.0 / (-1.0 - qtq * th2))
            }
        };
        if !(r1.is_finite() && s1.is_finite()) {
            return None;
        }
        Some((r1, s1, t))
    }

    fn defect(&self, z: C, x: (C, C)) -> Option<(C, C)> {
        let (r1, s1, _) = self.map(z, x.0, x.1)?;
        Some((x.0 - r1, x.1 - s1))
    }

    fn residual(&self, z: C, x: (C, C)) -> f64 {
        match self.defect(z, x) {
            Some((a, b)) => a.norm().max(b.norm()),
            None => f64::INFINITY,
        }
    }

    /// Stieltjes-branch checks: Im > 0 above the axis, negative on the real axis.
    fn admissible(&self, z: C, x: (C, C)) -> bool {
        if !(x.0.is_finite() && x.1.is_finite()) {
            return false;
        }
        if z.im > 0.0 {
            x.0.im > 0.0 && x.1.im > 0.0
        } else {
            x.0.re < 0.0 && x.1.re < 0.0
        }
    }

    fn asymptotic_start(&self, z: C) -> (C, C) {
        match self.model {
            LimitModel::Cca { .. } | LimitModel::Wigner { .. } => (-1.0 / z, -1.0 / z),
            LimitModel::Wishart { alpha, beta, .. } => {
                let (th1, th2) = (alpha / (1.0 + alpha), beta / (1.0 + beta));
                (1.0 / (-1.0 + th1 / z), 1.0 / (-1.0 + th2 / z))
            }
        }
    }

    /// Damped fixed-point iteration; the damping halves whenever a step
    /// would increase the residual.
    fn damped_fixed_point(&self, z: C, start: (C, C)) -> ((C, C), f64) {
        let mut x = start;
        let mut res = self.residual(z, x);
        let mut damping: f64 = 0.5;
        let mut streak = 0;
        for _ in 0..FP_MAX_ITER {
            if res <= RESIDUAL_TOL {
                break;
            }
            let Some((r1, s1, _)) = self.map(z, x.0, x.1) else { break };
            let cand = (x.0 + (r1 - x.0) * damping, x.1 + (s1 - x.1) * damping);
            let cres = self.residual(z, cand);
            if cres > res && damping > 1.0 / 4096.0 {
                damping *= 0.5;
                streak = 0;
                continue;
            }
            x = cand;
            res = cres;
            streak += 1;
            if streak >= 20 && damping < 0.5 {
                damping = (2.0 * damping).min(0.5);
                streak = 0;
            }
        }
        (x, res)
    }

    /// Newton on x − Φ(x) with a finite-difference Jacobian and backtracking.
    fn newton(&self, z: C, start: (C, C)) -> ((C, C), f64) {
        let mut x = start;
        let Some(mut f) = self.defect(z, x) else { return (x, f64::INFINITY) };
        let mut res = f.0.norm().max(f.1.norm());
        for _ in 0..NEWTON_MAX_ITER {
            if res <= 1e-15 * (1.0 + x.0.norm().max(x.1.norm())) {
                break;
            }
            let h0 = 1e-7 * x.0.norm().max(1.0);
            let h1 = 1e-7 * x.1.norm().max(1.0);
            let col = |dx: (C, C), h: f64| -> Option<(C, C)> {
                let p = self.defect(z, (x.0 + dx.0, x.1 + dx.1))?;
                let m = self.defect(z, (x.0 - dx.0, x.1 - dx.1))?;
                Some(((p.0 - m.0) / (2.0 * h), (p.1 - m.1) / (2.0 * h)))
            };
            let (Some(j0), Some(j1)) = (col((C::from(h0), C::from(0.0)), h0), col((C::from(0.0), C::from(h1)), h1)) else {
                break;
            };
            let det = j0.0 * j1.1 - j1.0 * j0.1;
            if det.norm() == 0.0 || !det.is_finite() {
                break;
            }
            let d0 = -(f.0 * j1.1 - j1.0 * f.1) / det;
            let d1 = -(j0.0 * f.1 - f.0 * j0.1) / det;
            let mut step = 1.0;
            let mut improved = false;
            while step > 1e-6 {
                let cand = (x.0 + d0 * step, x.1 + d1 * step);
                if let Some(fc) = self.defect(z, cand) {
                    let rc = fc.0.norm().max(fc.1.norm());
                    if rc < res {
                        x = cand;
                        f = fc;
                        res = rc;
                        improved = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        (x, res)
    }

    fn settle(&self, z: C, start: (C, C), fixed_point_first: bool) -> Option<(C, C)> {
        let first = if fixed_point_first { self.damped_fixed_point(z, start).0 } else { start };
        let (x, res) = self.newton(z, first);
        if res <= ACCEPT_TOL && self.admissible(z, x) {
            return Some(x);
        }
        if !fixed_point_first {
            return self.settle(z, start, true);
        }
        None
    }

    fn solution(&self, z: C, x: (C, C)) -> Result<DetSolution> {
        let (mut r, mut s) = x;
        if z.im == 0.0 {
            r = C::from(r.re);
            s = C::from(s.re);
        }
        let residual = self.residual(z, (r, s));
        let t = self.t_of(z, r, s).ok_or(Error::FixedPoint { z, residual, r, s })?;
        if !(residual <= ACCEPT_TOL) {
            return Err(Error::FixedPoint { z, residual, r, s });
        }
        Ok(DetSolution { z, r, s, t, model: self.model, kappa: self.kappa, residual })
    }
}

fn check_domain(edge: f64, z: C) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::OutOfDomain(format!("z = {z} is not finite")));
    }
    if z.im < 0.0 || (z.im == 0.0 && z.re <= edge + 1e-9) {
        return Err(Error::OutOfDomain(format!(
            "z = {z} must lie in the upper half-plane or on the real axis right of the edge {edge}"
        )));
    }
    Ok(())
}

/// Geometric path from far away to `z`: along the real axis toward the edge
/// for real z, downward toward the axis otherwise.
fn continuation_path(edge: f64, z: C) -> Vec<C> {
    let (far, near) = if z.im == 0.0 { (z.re - edge + 10.0, z.re - edge) } else { (z.im + 10.0, z.im) };
    let steps = ((far / near).ln() / (1.0 / STEP_RATIO).ln()).ceil().max(1.0) as usize;
    (0..=steps)
        .map(|j| {
            let d = far * (near / far).powf(j as f64 / steps as f64);
            if z.im == 0.0 {
                C::from(edge + d)
            } else {
                C::new(z.re, d)
            }
        })
        .chain(std::iter::once(z))
        .collect()
}

fn geometric_mid(edge: f64, a: C, b: C) -> C {
    if b.im == 0.0 {
        C::from(edge + ((a.re - edge) * (b.re - edge)).sqrt())
    } else {
        C::new(b.re, (a.im * b.im).sqrt())
    }
}

/// Solves the model's coupled system at `z` by path continuation.
pub fn solve_system(model: &LimitModel, z: C) -> Result<DetSolution> {
    let sys = System::new(model)?;
    check_domain(sys.edge, z)?;
    let path = continuation_path(sys.edge, z);
    let z0 = path[0];
    let mut x = sys
        .settle(z0, sys.asymptotic_start(z0), true)
        .ok_or_else(|| fixed_point_error(&sys, z0, sys.asymptotic_start(z0)))?;
    let mut here = z0;
    for &target in &path[1..] {
        x = advance(&sys, here, target, x, 0)?;
        here = target;
    }
    sys.solution(z, x)
}

fn advance(sys: &System, from: C, to: C, x: (C, C), depth: usize) -> Result<(C, C)> {
    if from == to {
        return Ok(x);
    }
    if let Some(next) = sys.settle(to, x, false) {
        return Ok(next);
    }
    if depth >= 24 {
        return Err(fixed_point_error(sys, to, x));
    }
    let mid = geometric_mid(sys.edge, from, to);
    let xm = advance(sys, from, mid, x, depth + 1)?;
    advance(sys, mid, to, xm, depth + 1)
}

fn fixed_point_error(sys: &System, z: C, x: (C, C)) -> Error {
    Error::FixedPoint { z, residual: sys.residual(z, x), r: x.0, s: x.1 }
}

/// Solves at `z` directly from the initial guess `(r0, s0)`, without continuation.
pub fn solve_from(model: &LimitModel, z: C, init: (C, C)) -> Result<DetSolution> {
    let sys = System::new(model)?;
    check_domain(sys.edge, z)?;
    let x = sys.settle(z, init, true).ok_or_else(|| fixed_point_error(&sys, z, init))?;
    sys.solution(z, x)
}

/// Limiting Stieltjes transform of the spectral law of the null statistic.
pub fn stieltjes_of_w(model: &LimitModel, z: C) -> Result<C> {
    let sol = solve_system(model, z)?;
    Ok(stieltjes_from(&sol))
}

pub fn stieltjes_from(sol: &DetSolution) -> C {
    match sol.model {
        LimitModel::Cca { tau_m, tau_k } => (sol.r * tau_k + sol.s * tau_m) / (tau_k + tau_m),
        _ => (sol.t[0][0] + sol.t[1][1]) * 0.5,
    }
}

/// Smoothed limiting density Im m(x + iη)/π.
pub fn limiting_density(model: &LimitModel, x: f64, eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta <= 0.1) {
        return Err(Error::Validation(format!("eta = {eta} must lie in (0, 0.1]")));
    }
    Ok(stieltjes_of_w(model, C::new(x, eta))?.im / std::f64::consts::PI)
}

/// The residual of the CCA polynomial identities
/// (1 + zr)·d + τ_m(κ + (1 − κ²)s)·r and its mirror, d = 1 − κ(r + s) − (1 − κ²)rs.
pub fn cca_polynomial_defect(sol: &DetSolution) -> Option<f64> {
    let LimitModel::Cca { tau_m, tau_k } = sol.model else { return None };
    let (z, r, s, k) = (sol.z, sol.r, sol.s, sol.kappa);
    let d = 1.0 - (r + s) * k - r * s * (1.0 - k * k);
    let e1 = (1.0 + z * r) * d + (s * (1.0 - k * k) + k) * r * tau_m;
    let e2 = (1.0 + z * s) * d + (r * (1.0 - k * k) + k) * s * tau_k;
    Some(e1.norm().max(e2.norm()))
}
