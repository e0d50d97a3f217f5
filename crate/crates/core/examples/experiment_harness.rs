//! A small overlap-vs-ρ sweep written as CSV.

use twoview::harness::{run_and_write, ExperimentConfig, ExperimentKind};
use twoview::inference::ThresholdRule;
use twoview::ModelParams;

fn main() -> twoview::Result<()> {
    let out = std::env::temp_dir().join("twoview-overlap.csv");
    let config = ExperimentConfig {
        model: ModelParams::Cca { n: 800, m: 400, k: 400, rho: 0.0 },
        rho_grid: vec![0.3, 0.6, 0.75, 0.9],
        trials: 4,
        master_seed: 2024,
        experiment: ExperimentKind::OverlapCurve,
        output_path: out.display().to_string(),
        planted: true,
        threshold: ThresholdRule::default(),
        eps: 0.1,
        mesh: None,
        histogram_bins: 40,
    };
    let (_, paths) = run_and_write(&config)?;
    print!("{}", std::fs::read_to_string(&paths[0])?);
    Ok(())
}
