//! Dense symmetric eigendecomposition and matrix-free Lanczos on the same
//! matrix.

use twoview::linalg::{lanczos_top, sym_eig, LanczosOptions};
use twoview::models::sample_goe;
use twoview::rng::GaussianStream;

fn main() -> twoview::Result<()> {
    let n = 300;
    let m = sample_goe(n, 1.0 / n as f64, &mut GaussianStream::new(9, "example"));
    let dense = sym_eig(&m, 3)?;
    let krylov = lanczos_top(n, |x, y| m.matvec(x, y), 3, 1, &LanczosOptions::default())?;
    for i in 0..3 {
        println!("lambda_{} dense {:.12} lanczos {:.12}", i + 1, dense.values[i], krylov.values[i]);
    }
    let v = dense.vector(0);
    let mv = m.mul_vec(&v);
    let resid: f64 = mv.iter().zip(&v).map(|(a, b)| (a - dense.values[0] * b).powi(2)).sum::<f64>().sqrt();
    println!("residual of the top pair: {resid:.2e}");
    Ok(())
}
