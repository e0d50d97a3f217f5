//! Below the CCA threshold the χ² second moment stays bounded in n; the
//! saddle exponent is maximized at the origin.

use twoview::theory::{chi2_second_moment, saddle_exponent};

fn main() -> twoview::Result<()> {
    let rho = 0.6;
    for n in [200, 500, 1000] {
        let chi2 = chi2_second_moment(rho, n, n / 2, n / 2)?;
        println!("n = {n:5}: E[(1 - rho^2 theta phi)^-n] = {chi2:.6}");
    }
    let n = 1000;
    let mut worst: f64 = f64::NEG_INFINITY;
    for i in 0..=40 {
        for j in 0..=40 {
            let (s, t) = (-0.99 + 0.0495 * i as f64, -0.99 + 0.0495 * j as f64);
            if s == 0.0 && t == 0.0 {
                continue;
            }
            worst = worst.max(saddle_exponent(s, t, rho, n, n / 2, n / 2)? / (s * s + t * t));
        }
    }
    println!("max of Psi/(s^2+t^2) away from the origin: {worst:.4}");
    Ok(())
}
