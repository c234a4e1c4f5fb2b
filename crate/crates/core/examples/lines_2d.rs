//! Five noisy lines among uniform outliers, segmented without a threshold.
//!
//! cargo run --release --example lines_2d -- [seed]

use misre::data::{format_table, generate, scenario::five_lines};
use misre::{run, EstimationConfig, GeometricParams, ModelKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(7);
    let data = generate(&five_lines(seed))?;
    let result = run(&data.points, &EstimationConfig::new(ModelKind::Line2d).trials(1000).seed(seed))?;

    print!("{}", format_table(&result, None));
    println!();
    for s in &result.structures {
        if let Some(GeometricParams::Line { normal, offset }) = &s.geometry {
            println!(
                "#{:<2} {:.4}·x + {:.4}·y = {:.2}   σ̂ = {:.2}",
                s.rank, normal[0], normal[1], offset, s.sigma_hat
            );
        }
    }
    Ok(())
}
