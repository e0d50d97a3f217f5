//! Sample each model under the planted and null laws and round-trip U
//! through CSV.

use twoview::linalg::dot;
use twoview::models::{read_matrix_csv, write_matrix_csv};
use twoview::{sample_instance, ModelParams};

fn main() -> twoview::Result<()> {
    let models = [
        ModelParams::Cca { n: 400, m: 200, k: 150, rho: 0.8 },
        ModelParams::Wigner { n: 300, alpha: 0.8, beta: 0.8, rho: 0.9 },
        ModelParams::Wishart { n: 400, m: 200, alpha: 0.6, beta: 0.6, rho: 0.9 },
    ];
    for params in models {
        let inst = sample_instance(&params, true, 7)?;
        let p = inst.planted.as_ref().expect("planted");
        println!(
            "{:>6}  U {:?}  V {:?}  |U|_F = {:.3}  |a| = {:.3}  |b| = {:.3}",
            params.kind(),
            inst.u.shape(),
            inst.v.shape(),
            inst.u.frobenius_norm(),
            dot(&p.a, &p.a).sqrt(),
            dot(&p.b, &p.b).sqrt()
        );
        let null = sample_instance(&params, false, 7)?;
        assert!(null.planted.is_none());
    }

    let inst = sample_instance(&models[0], true, 1)?;
    let dir = std::env::temp_dir().join("twoview-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("u.csv");
    write_matrix_csv(&path, &inst.u)?;
    assert_eq!(read_matrix_csv(&path)?, inst.u);
    println!("wrote and re-read {}", path.display());
    Ok(())
}
