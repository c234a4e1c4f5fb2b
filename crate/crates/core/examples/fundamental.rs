//! Two independently moving objects seen by two cameras: one fundamental
//! matrix per motion.
//!
//! cargo run --release --example fundamental

use misre::data::{format_table, generate, scenario::two_motions};
use misre::{run, EstimationConfig, GeometricParams, ModelKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = generate(&two_motions(4))?;
    let result = run(&data.points, &EstimationConfig::new(ModelKind::Fundamental).trials(5000).seed(4))?;

    print!("{}", format_table(&result, Some(4)));
    if let Some(GeometricParams::Fundamental { matrix }) = result.structures.first().and_then(|s| s.geometry.as_ref()) {
        println!("strongest F:");
        for row in matrix {
            println!("  [{:+.3e} {:+.3e} {:+.3e}]", row[0], row[1], row[2]);
        }
    }
    Ok(())
}
