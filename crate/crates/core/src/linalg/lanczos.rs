use super::{axpy, dot, fix_sign, normalize, tridiagonal_eig, DenseMatrix, EigenPairs};
use crate::error::{Error, Result};
use crate::rng::GaussianStream;

#[derive(Clone, Debug)]
pub struct LanczosOptions {
    /// Largest Krylov dimension before giving up.
    pub max_dim: usize,
    /// Residual tolerance relative to the largest Ritz value in magnitude.
    pub tol: f64,
    /// Steps between convergence checks.
    pub check_every: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions { max_dim: 1500, tol: 1e-10, check_every: 8, seed: 0x5eed }
    }
}

/// Top `k` eigenvalues of a symmetric operator, with the first `n_vectors`
/// Ritz vectors, by Lanczos with full reorthogonalization.
pub fn lanczos_top<F>(dim: usize, mut apply: F, k: usize, n_vectors: usize, opts: &LanczosOptions) -> Result<EigenPairs>
where
    F: FnMut(&[f64], &mut [f64]),
{
    if k > dim || n_vectors > k {
        return Err(Error::Validation(format!(
            "asked for {k} values and {n_vectors} vectors of a {dim}-dimensional operator"
        )));
    }
    if k == 0 {
        return Ok(EigenPairs { values: vec![], vectors: DenseMatrix::zeros(dim, 0) });
    }
    let max_dim = opts.max_dim.min(dim).max(k);
    let mut rng = GaussianStream::new(opts.seed, "lanczos/start");
    let mut basis: Vec<f64> = Vec::with_capacity(dim * max_dim.min(256));
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();

    let mut q = rng.vector(dim, 1.0);
    normalize(&mut q);
    basis.extend_from_slice(&q);
    let mut w = vec![0.0; dim];
    let mut coeffs = vec![0.0; max_dim];
    let mut scale: f64 = 0.0;

    loop {
        let j = alphas.len();
        let qj = &basis[j * dim..(j + 1) * dim];
        apply(qj, &mut w);
        if j > 0 {
            axpy(-betas[j - 1], &basis[(j - 1) * dim..j * dim], &mut w);
        }
        let alpha = dot(qj, &w);
        axpy(-alpha, qj, &mut w);
        alphas.push(alpha);
        for _ in 0..2 {
            for (l, c) in coeffs.iter_mut().enumerate().take(j + 1) {
                *c = dot(&basis[l * dim..(l + 1) * dim], &w);
            }
            for l in 0..=j {
                axpy(-coeffs[l], &basis[l * dim..(l + 1) * dim], &mut w);
            }
        }
        let beta = super::norm(&w);
        scale = scale.max(alpha.abs()).max(beta);
        let steps = j + 1;

        let exhausted = steps == dim;
        let at_cap = steps == max_dim;
        if steps >= k && (steps % opts.check_every == 0 || exhausted || at_cap || beta <= 1e-13 * scale) {
            let (theta, last, _) = tridiagonal_eig(&alphas, &betas, false)?;
            let ritz_scale = theta.iter().fold(0.0f64, |m, t| m.max(t.abs())).max(f64::MIN_POSITIVE);
            let converged = (0..k).all(|i| beta * last[i].abs() <= opts.tol * ritz_scale);
            if converged || exhausted {
                return finish(dim, &basis, &alphas, &betas, k, n_vectors);
            }
            if at_cap {
                let worst = (0..k).map(|i| beta * last[i].abs() / ritz_scale).fold(0.0, f64::max);
                return Err(Error::NonConvergence(format!(
                    "Lanczos reached dimension {steps} with relative residual {worst:.3e}"
                )));
            }
        }

        if beta <= 1e-13 * scale {
            // invariant subspace: continue from a fresh direction
            let mut fresh = rng.vector(dim, 1.0);
            for _ in 0..2 {
                for l in 0..=j {
                    let c = dot(&basis[l * dim..(l + 1) * dim], &fresh);
                    axpy(-c, &basis[l * dim..(l + 1) * dim], &mut fresh);
                }
            }
            normalize(&mut fresh);
            betas.push(0.0);
            basis.extend_from_slice(&fresh);
        } else {
            betas.push(beta);
            w.iter_mut().for_each(|x| *x /= beta);
            basis.extend_from_slice(&w);
        }
    }
}

fn finish(dim: usize, basis: &[f64], alphas: &[f64], betas: &[f64], k: usize, n_vectors: usize) -> Result<EigenPairs> {
    let steps = alphas.len();
    let (theta, _, full) = tridiagonal_eig(alphas, &betas[..steps - 1], n_vectors > 0)?;
    let mut vectors = DenseMatrix::zeros(dim, n_vectors);
    if let Some(full) = full {
        for (col, y) in full.iter().take(n_vectors).enumerate() {
            let mut x = vec![0.0; dim];
            for (l, &c) in y.iter().enumerate() {
                axpy(c, &basis[l * dim..(l + 1) * dim], &mut x);
            }
            normalize(&mut x);
            fix_sign(&mut x);
            for (row, v) in x.into_iter().enumerate() {
                vectors.set(row, col, v);
            }
        }
    }
    Ok(EigenPairs { values: theta[..k].to_vec(), vectors })
}

/// Largest eigenvalue of each of `batch` symmetric operators sharing one
/// block product.
///
/// `apply(active, x, y)` must write `y = H_c x_c` for every listed operator
/// `c`, where `x` and `y` are `dim × active.len()` row-major blocks. No
/// reorthogonalization is done; the top Ritz value is accepted once its
/// error estimate `min(res, res²/gap)` falls below `tol` relative to the
/// Ritz scale.
pub fn lanczos_top_values_batch<F>(dim: usize, batch: usize, mut apply: F, opts: &LanczosOptions) -> Result<Vec<f64>>
where
    F: FnMut(&[usize], &[f64], &mut [f64]),
{
    let mut result = vec![f64::NAN; batch];
    if batch == 0 {
        return Ok(result);
    }
    let mut rng = GaussianStream::new(opts.seed, "lanczos/batch-start");
    let mut start = rng.vector(dim, 1.0);
    normalize(&mut start);

    let max_steps = opts.max_dim.min(dim);
    let mut q_prev = vec![vec![0.0; dim]; batch];
    let mut q_cur = vec![start; batch];
    let mut alphas = vec![Vec::<f64>::new(); batch];
    let mut betas = vec![Vec::<f64>::new(); batch];
    let mut active: Vec<usize> = (0..batch).collect();
    let mut x = Vec::new();
    let mut y = Vec::new();

    for step in 1..=max_steps {
        let b = active.len();
        x.resize(dim * b, 0.0);
        y.resize(dim * b, 0.0);
        for (slot, &c) in active.iter().enumerate() {
            for (i, v) in q_cur[c].iter().enumerate() {
                x[i * b + slot] = *v;
            }
        }
        apply(&active, &x, &mut y);

        let mut still = Vec::with_capacity(b);
        for (slot, &c) in active.iter().enumerate() {
            let mut w: Vec<f64> = (0..dim).map(|i| y[i * b + slot]).collect();
            if let Some(&beta_prev) = betas[c].last() {
                axpy(-beta_prev, &q_prev[c], &mut w);
            }
            let alpha = dot(&q_cur[c], &w);
            axpy(-alpha, &q_cur[c], &mut w);
            alphas[c].push(alpha);
            let beta = super::norm(&w);

            let check = step % opts.check_every == 0 || step == max_steps || step == dim;
            let mut done = false;
            if check {
                let (theta, last, _) = tridiagonal_eig(&alphas[c], &betas[c], false)?;
                let scale = theta.iter().fold(0.0f64, |m, t| m.max(t.abs())).max(f64::MIN_POSITIVE);
                let res = beta * last[0].abs();
                let gap = if theta.len() > 1 { theta[0] - theta[1] } else { f64::INFINITY };
                let err = res.min(res * res / gap.max(f64::MIN_POSITIVE));
                if err <= opts.tol * scale || step == dim || beta <= 1e-13 * scale {
                    result[c] = theta[0];
                    done = true;
                } else if step == max_steps {
                    return Err(Error::NonConvergence(format!(
                        "batched Lanczos: operator {c} not converged after {step} steps (estimate {:.3e})",
                        err / scale
                    )));
                }
            }
            if done {
                continue;
            }
            if beta == 0.0 {
                let (theta, _, _) = tridiagonal_eig(&alphas[c], &betas[c], false)?;
                result[c] = theta[0];
                continue;
            }
            w.iter_mut().for_each(|v| *v /= beta);
            betas[c].push(beta);
            q_prev[c] = std::mem::replace(&mut q_cur[c], w);
            still.push(c);
        }
        active = still;
        if active.is_empty() {
            break;
        }
    }
    Ok(result)
}
