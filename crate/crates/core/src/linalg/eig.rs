use super::{dot, fix_sign, DenseMatrix};
use crate::error::{Error, Result};

/// Leading eigenpairs of a symmetric matrix, values descending and
/// eigenvectors stored as the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

impl EigenPairs {
    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.vectors.column(i)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

const QL_MAX_SWEEPS: usize = 60;

fn check_symmetric(m: &DenseMatrix) -> Result<()> {
    if m.rows() != m.cols() {
        return Err(Error::Validation(format!("matrix {:?} is not square", m.shape())));
    }
    if m.data().iter().any(|x| !x.is_finite()) {
        return Err(Error::Validation("matrix has non-finite entries".into()));
    }
    let defect = m.symmetry_defect();
    if defect > 1e-12 * m.max_abs() {
        return Err(Error::Validation(format!("matrix is not symmetric (defect {defect:.3e})")));
    }
    Ok(())
}

/// Householder reduction to tridiagonal form working on the lower triangle.
///
/// Returns the diagonal, the subdiagonal (`e[i]` couples rows i-1 and i,
/// `e[0] = 0`) and the reflector scales. Reflector i is left in row i of `a`.
fn tridiagonalize(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut hs = vec![0.0; n];
    let mut p = vec![0.0; n];
    for i in (2..n).rev() {
        let (head, tail) = a.split_at_mut(i * n);
        let v = &mut tail[..i];
        let sigma = dot(&v[..i - 1], &v[..i - 1]);
        let xl = v[i - 1];
        if sigma == 0.0 {
            e[i] = xl;
            continue;
        }
        let nrm = (sigma + xl * xl).sqrt();
        let alpha = if xl > 0.0 { -nrm } else { nrm };
        v[i - 1] = xl - alpha;
        let h = nrm * nrm - xl * alpha;
        e[i] = alpha;
        hs[i] = h;

        let p = &mut p[..i];
        p.iter_mut().for_each(|x| *x = 0.0);
        for j in 0..i {
            let row = &head[j * n..j * n + j + 1];
            let vj = v[j];
            let mut acc = row[j] * vj;
            for k in 0..j {
                acc += row[k] * v[k];
                p[k] += row[k] * vj;
            }
            p[j] += acc;
        }
        p.iter_mut().for_each(|x| *x /= h);
        let kk = dot(v, p) / (2.0 * h);
        for (pk, vk) in p.iter_mut().zip(v.iter()) {
            *pk -= kk * vk;
        }
        for j in 0..i {
            let row = &mut head[j * n..j * n + j + 1];
            let (vj, qj) = (v[j], p[j]);
            for k in 0..=j {
                row[k] -= vj * p[k] + qj * v[k];
            }
        }
    }
    if n > 1 {
        e[1] = a[n];
    }
    for j in 0..n {
        d[j] = a[j * n + j];
    }
    (d, e, hs)
}

/// Applies the accumulated reflectors to an eigenvector of the tridiagonal form.
fn back_transform(a: &[f64], n: usize, hs: &[f64], y: &mut [f64]) {
    for i in 2..n {
        if hs[i] == 0.0 {
            continue;
        }
        let v = &a[i * n..i * n + i];
        let f = dot(v, &y[..i]) / hs[i];
        for (yk, vk) in y[..i].iter_mut().zip(v) {
            *yk -= f * vk;
        }
    }
}

/// Implicit QL on a symmetric tridiagonal matrix (EISPACK tql2 ordering).
///
/// `d` is the diagonal, `e[i]` the coupling of i-1 and i. On return `d`
/// holds the (unsorted) eigenvalues. When `z` is given it is an `n × w`
/// row-major block whose rows are rotated alongside, so starting from the
/// identity it ends up with eigenvector i in row i; starting from the last
/// unit vector (w = 1) it tracks only the last eigenvector components.
fn tql2(d: &mut [f64], e: &mut [f64], mut z: Option<(&mut [f64], usize)>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > QL_MAX_SWEEPS {
                    return Err(Error::NonConvergence(format!(
                        "QL iteration exceeded {QL_MAX_SWEEPS} sweeps at index {l} of {n}"
                    )));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some((zz, w)) = z.as_mut() {
                        let w = *w;
                        let (lo, hi) = zz.split_at_mut((i + 1) * w);
                        let zi = &mut lo[i * w..];
                        let zi1 = &mut hi[..w];
                        for k in 0..w {
                            let h = zi1[k];
                            zi1[k] = s * zi[k] + c * h;
                            zi[k] = c * zi[k] - s * h;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Indices ordering `values` descending, ties by original index.
fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    idx
}

/// Eigen-decomposition of the symmetric tridiagonal matrix with diagonal
/// `diag` and off-diagonal `off` (`off[i]` couples i and i+1).
///
/// Returns eigenvalues descending and, per eigenvalue, the last component of
/// its unit eigenvector. With `full` the complete eigenvectors are returned too.
pub fn tridiagonal_eig(diag: &[f64], off: &[f64], full: bool) -> Result<(Vec<f64>, Vec<f64>, Option<Vec<Vec<f64>>>)> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    for i in 1..n {
        e[i] = off[i - 1];
    }
    if full {
        let mut z = vec![0.0; n * n];
        for i in 0..n {
            z[i * n + i] = 1.0;
        }
        tql2(&mut d, &mut e, Some((&mut z, n)))?;
        let order = descending_order(&d);
        let values = order.iter().map(|&i| d[i]).collect();
        let last = order.iter().map(|&i| z[i * n + n - 1]).collect();
        let vecs = order.iter().map(|&i| z[i * n..(i + 1) * n].to_vec()).collect();
        Ok((values, last, Some(vecs)))
    } else {
        let mut z = vec![0.0; n];
        if n > 0 {
            z[n - 1] = 1.0;
        }
        tql2(&mut d, &mut e, Some((&mut z, 1)))?;
        let order = descending_order(&d);
        Ok((order.iter().map(|&i| d[i]).collect(), order.iter().map(|&i| z[i]).collect(), None))
    }
}

/// All eigenvalues of a symmetric matrix, descending.
pub fn sym_eigvals(matrix: &DenseMatrix) -> Result<Vec<f64>> {
    check_symmetric(matrix)?;
    let n = matrix.rows();
    let mut a = matrix.data().to_vec();
    let (mut d, mut e, _) = tridiagonalize(&mut a, n);
    tql2(&mut d, &mut e, None)?;
    d.sort_by(|x, y| y.total_cmp(x));
    Ok(d)
}

/// The `k` largest eigenpairs of a symmetric matrix.
///
/// Eigenvectors are normalized with their largest-magnitude coordinate positive.
pub fn sym_eig(matrix: &DenseMatrix, k: usize) -> Result<EigenPairs> {
    check_symmetric(matrix)?;
    let n = matrix.rows();
    if k > n {
        return Err(Error::Validation(format!("requested {k} eigenpairs of a {n}x{n} matrix")));
    }
    let mut a = matrix.data().to_vec();
    let (mut d, mut e, hs) = tridiagonalize(&mut a, n);
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    tql2(&mut d, &mut e, Some((&mut z, n)))?;
    let order = descending_order(&d);
    let mut vectors = DenseMatrix::zeros(n, k);
    let mut values = Vec::with_capacity(k);
    for (col, &i) in order.iter().take(k).enumerate() {
        values.push(d[i]);
        let y = &mut z[i * n..(i + 1) * n];
        back_transform(&a, n, &hs, y);
        fix_sign(y);
        for (row, &x) in y.iter().enumerate() {
            vectors.set(row, col, x);
        }
    }
    Ok(EigenPairs { values, vectors })
}
