//! Two cylinders with different axes, fitted as constrained quadrics.
//!
//! cargo run --release --example cylinders_3d

use misre::data::{format_table, generate, scenario::two_cylinders};
use misre::{run, EstimationConfig, GeometricParams, ModelKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = generate(&two_cylinders(2))?;
    let result = run(&data.points, &EstimationConfig::new(ModelKind::Cylinder3d).trials(5000).seed(2))?;

    print!("{}", format_table(&result, Some(4)));
    for s in result.structures.iter().take(2) {
        if let Some(GeometricParams::Cylinder { point, direction, radius }) = &s.geometry {
            println!(
                "#{} axis through ({:.1}, {:.1}, {:.1}) along ({:+.3}, {:+.3}, {:+.3}), radius {:.2}",
                s.rank, point[0], point[1], point[2], direction[0], direction[1], direction[2], radius
            );
        }
    }
    Ok(())
}
