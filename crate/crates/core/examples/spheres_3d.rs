//! Two noisy spheres in a cube of clutter.
//!
//! cargo run --release --example spheres_3d

use misre::data::{format_table, generate, scenario::two_spheres};
use misre::{run, EstimationConfig, GeometricParams, ModelKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = generate(&two_spheres(5))?;
    let result = run(&data.points, &EstimationConfig::new(ModelKind::Sphere3d).trials(5000).seed(5))?;

    print!("{}", format_table(&result, Some(4)));
    for s in result.structures.iter().take(2) {
        if let Some(GeometricParams::Sphere { center, radius }) = &s.geometry {
            println!("#{} center ({:.2}, {:.2}, {:.2}) radius {:.2}", s.rank, center[0], center[1], center[2], radius);
        }
    }
    Ok(())
}
