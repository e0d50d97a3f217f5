//! Predicted outlier location and eigenvector overlaps across ρ for all three
//! models, plus a mismatched-parameter statistic.

use twoview::outlier::find_outlier;
use twoview::theory::threshold_report;
use twoview::LimitModel;

fn main() -> twoview::Result<()> {
    let models = [
        LimitModel::Cca { tau_m: 2.0, tau_k: 2.0 },
        LimitModel::Wigner { alpha: 0.8, beta: 0.8 },
        LimitModel::Wishart { alpha: 0.6, beta: 0.6, tau: 2.0 },
    ];
    for model in &models {
        println!("{} (kappa = {:.4})", model.kind(), model.kappa()?);
        for rho in [0.5, 0.8, 0.9, 0.99] {
            let p = find_outlier(model, rho, None)?;
            match p.lambda_out {
                Some(l) => println!("  rho {rho:4.2}: lambda_out {l:.5}  overlaps {:.4} + {:.4}", p.overlap_a, p.overlap_b),
                None => println!("  rho {rho:4.2}: no outlier"),
            }
        }
    }

    let truth = LimitModel::Wigner { alpha: 0.8, beta: 0.8 };
    let guess = (0.7, 0.75);
    let report = threshold_report(&truth, 0.9, Some(guess))?;
    let p = find_outlier(&truth, 0.9, Some(guess))?;
    println!(
        "guess {guess:?}: rho_out = {:.4}, lambda_out = {:?}",
        report.rho_out_mismatched.unwrap_or(f64::NAN),
        p.lambda_out
    );
    Ok(())
}
