//! Brute-force oracles shared by the oracle tests and the acceptance run.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};

use twoview::linalg::DenseMatrix;
use twoview::outlier::{build_s, det2};
use twoview::theory::{kappa, LimitModel};

pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let x: f64 = rng.gen_range(-1.0..1.0);
            m.set(i, j, x);
            m.set(j, i, x);
        }
    }
    m
}

/// Coefficients c_0..c_n of det(λI − M) by Faddeev–LeVerrier, c_n = 1.
pub fn char_poly(m: &DenseMatrix) -> Vec<f64> {
    let n = m.rows();
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    let mut mk = DenseMatrix::zeros(n, n);
    for k in 1..=n {
        let mut prod = m.matmul(&mk).unwrap();
        prod.add_diagonal(coeffs[n - k + 1]);
        mk = prod;
        let am = m.matmul(&mk).unwrap();
        coeffs[n - k] = -am.trace() / k as f64;
    }
    coeffs
}

pub fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

pub fn bisect(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        let fm = f(mid);
        if (fm < 0.0) == (fa < 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Roots of the characteristic polynomial, descending, from a sign scan
/// inside the Gershgorin bound followed by bisection.
pub fn char_poly_roots(m: &DenseMatrix) -> Vec<f64> {
    let n = m.rows();
    let c = char_poly(m);
    let bound = (0..n).map(|i| m.row(i).iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max) + 1e-3;
    let steps = 400_000;
    let h = 2.0 * bound / steps as f64;
    let mut roots = Vec::new();
    let mut prev = horner(&c, -bound);
    for i in 1..=steps {
        let x = -bound + i as f64 * h;
        let cur = horner(&c, x);
        if (cur < 0.0) != (prev < 0.0) {
            roots.push(bisect(|t| horner(&c, t), x - h, x));
        }
        prev = cur;
    }
    roots.sort_by(|a, b| b.partial_cmp(a).unwrap());
    roots
}

/// First sign change of det S on a log-spaced grid right of the edge.
pub fn det_scan_root(model: &LimitModel, rho: f64, guess: Option<(f64, f64)>) -> Option<f64> {
    let edge = model.edge().unwrap();
    let det = |z: f64| det2(&build_s(model, rho, z, guess).unwrap());
    let grid: Vec<f64> = (0..=6000).map(|i| edge + 10f64.powf(-8.0 + 9.7 * i as f64 / 6000.0)).collect();
    let mut prev = det(grid[0]);
    for w in grid.windows(2) {
        let cur = det(w[1]);
        if (cur < 0.0) != (prev < 0.0) {
            return Some(bisect(det, w[0], w[1]));
        }
        prev = cur;
    }
    None
}

/// A model of kind `i % 3` (CCA, Wigner, Wishart) with κ in (0.05, 0.95) and
/// a correlation above κ.
pub fn random_admissible(rng: &mut ChaCha8Rng, i: usize) -> (LimitModel, f64) {
    loop {
        let model = match i % 3 {
            0 => LimitModel::Cca { tau_m: rng.gen_range(1.2..4.0), tau_k: rng.gen_range(1.2..4.0) },
            1 => LimitModel::Wigner { alpha: rng.gen_range(0.5..0.99), beta: rng.gen_range(0.5..0.99) },
            _ => {
                let tau: f64 = rng.gen_range(1.2..3.0);
                let top = tau.powf(-0.5);
                LimitModel::Wishart { alpha: rng.gen_range(0.4..0.99) * top, beta: rng.gen_range(0.4..0.99) * top, tau }
            }
        };
        let Ok(k) = kappa(&model) else { continue };
        if k <= 0.05 || k >= 0.95 {
            continue;
        }
        return (model, rng.gen_range(k + 0.02..1.0_f64.min(k + 0.3)));
    }
}

/// Monte Carlo mean and standard error of (1 − ρ²θφ)^{−n} with θ, φ the first
/// coordinates of independent uniform unit vectors in R^m and R^k.
pub fn chi2_monte_carlo(rho: f64, n: usize, m: usize, k: usize, draws: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bm = Beta::new(0.5, (m as f64 - 1.0) / 2.0).unwrap();
    let bk = Beta::new(0.5, (k as f64 - 1.0) / 2.0).unwrap();
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..draws {
        let theta = bm.sample(&mut rng).sqrt() * if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let phi = bk.sample(&mut rng).sqrt() * if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let x = (1.0 - rho * rho * theta * phi).powi(-(n as i32));
        sum += x;
        sum2 += x * x;
    }
    let mean = sum / draws as f64;
    (mean, ((sum2 / draws as f64 - mean * mean) / draws as f64).sqrt())
}

pub fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, steps: usize) -> f64 {
    let h = (b - a) / steps as f64;
    (0..=steps)
        .map(|i| {
            let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
            w * f(a + i as f64 * h)
        })
        .sum::<f64>()
        * h
}
