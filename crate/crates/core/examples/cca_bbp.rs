//! BBP transition of the CCA statistic: the top eigenvalue leaves the bulk
//! edge once ρ exceeds κ, and its eigenvector correlates with (a, b).

use twoview::outlier::find_outlier;
use twoview::spectral::{empirical_overlap, spectral_analysis};
use twoview::{sample_instance, LimitModel, ModelParams};

fn main() -> twoview::Result<()> {
    let (n, m, k) = (2000, 1000, 1000);
    let limit = LimitModel::Cca { tau_m: 2.0, tau_k: 2.0 };
    println!("kappa = {:.4}, edge = {:.4}", limit.kappa()?, limit.edge()?);
    println!("{:>5} {:>9} {:>9} {:>9} {:>9}", "rho", "lambda1", "pred", "overlap", "pred");
    for rho in [0.5, 0.7, 0.8, 0.9] {
        let inst = sample_instance(&ModelParams::Cca { n, m, k, rho }, true, 11)?;
        let res = spectral_analysis(&inst, None, 2)?;
        let (oa, ob) = empirical_overlap(&res, &inst)?;
        let pred = find_outlier(&limit, rho, None)?;
        println!(
            "{rho:5.2} {:9.4} {:>9} {:9.4} {:9.4}",
            res.lambda1(),
            pred.lambda_out.map_or("-".to_string(), |l| format!("{l:.4}")),
            oa + ob,
            pred.overlap_a + pred.overlap_b
        );
    }
    Ok(())
}
