//! Planar facades in the bundled correspondence set, one homography each.
//!
//! cargo run --release --example homography

use std::path::Path;

use misre::data::{format_table, read_correspondences};
use misre::{run, EstimationConfig, GeometricParams, ModelKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/correspondences.csv");
    let points = read_correspondences(&path)?;
    let result = run(&points, &EstimationConfig::new(ModelKind::Homography).trials(2000).seed(1))?;

    print!("{}", format_table(&result, None));
    for s in &result.structures {
        if let Some(GeometricParams::Homography { matrix: h }) = &s.geometry {
            let k = 1.0 / h[2][2];
            println!("#{} H/h33 = [{:.3} {:.3} {:.1}; {:.3} {:.3} {:.1}; {:.2e} {:.2e} 1]",
                s.rank, h[0][0] * k, h[0][1] * k, h[0][2] * k, h[1][0] * k, h[1][1] * k, h[1][2] * k, h[2][0] * k, h[2][1] * k);
        }
    }
    Ok(())
}
