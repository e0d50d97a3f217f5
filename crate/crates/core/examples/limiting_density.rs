//! Null spectral density of W from the deterministic equivalent, drawn as a
//! text histogram next to the empirical spectrum.

use twoview::deteq::{limiting_density, solve_system};
use twoview::spectral::full_spectrum;
use twoview::{sample_instance, LimitModel, ModelParams};
use num_complex::Complex64;

fn main() -> twoview::Result<()> {
    let limit = LimitModel::Cca { tau_m: 2.0, tau_k: 2.0 };
    let edge = limit.edge()?;
    let sol = solve_system(&limit, Complex64::new(edge + 1e-6, 0.0))?;
    println!("at the edge: r = {:.4}, s = {:.4} (expect -1/edge = {:.4})", sol.r.re, sol.s.re, -1.0 / edge);

    let inst = sample_instance(&ModelParams::Cca { n: 1200, m: 600, k: 600, rho: 0.0 }, false, 3)?;
    let eigs = full_spectrum(&inst, None)?;
    let (lo, hi, bins) = (-7.0, 1.0, 32);
    let width = (hi - lo) / bins as f64;
    let mut mass = 0.0;
    for i in 0..bins {
        let x = lo + (i as f64 + 0.5) * width;
        let count = eigs.iter().filter(|&&e| e >= x - width / 2.0 && e < x + width / 2.0).count();
        let empirical = count as f64 / (eigs.len() as f64 * width);
        let predicted = limiting_density(&limit, x, 1e-3)?;
        mass += predicted * width;
        let bar = "#".repeat((predicted * 40.0).round() as usize);
        println!("{x:6.2} {empirical:6.3} {predicted:6.3} {bar}");
    }
    println!("predicted mass on [{lo}, {hi}] = {mass:.3}");
    Ok(())
}
