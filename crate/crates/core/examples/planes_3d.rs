//! Plane segmentation of the bundled office-corner point cloud (ascii PLY).
//!
//! cargo run --release --example planes_3d

use std::path::Path;

use misre::data::{format_table, read_points};
use misre::{run, EstimationConfig, GeometricParams, ModelKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/plane_scene.ply");
    let points = read_points(&path, 3)?;
    let result = run(&points, &EstimationConfig::new(ModelKind::Plane3d).trials(1000).seed(1))?;

    print!("{}", format_table(&result, None));
    println!();
    for s in &result.structures {
        if let Some(GeometricParams::Plane { normal, offset }) = &s.geometry {
            println!("#{:<2} n = ({:+.3}, {:+.3}, {:+.3})  d = {:.3}", s.rank, normal[0], normal[1], normal[2], offset);
        }
    }
    Ok(())
}
