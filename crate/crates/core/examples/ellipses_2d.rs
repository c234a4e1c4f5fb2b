//! Three ellipses with different noise levels and 350 outliers.
//!
//! cargo run --release --example ellipses_2d -- [seed]

use misre::data::{format_table, generate, scenario::three_ellipses};
use misre::{run, EstimationConfig, GeometricParams, ModelKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(3);
    let data = generate(&three_ellipses(seed))?;
    let result = run(&data.points, &EstimationConfig::new(ModelKind::Ellipse2d).trials(5000).seed(seed))?;

    print!("{}", format_table(&result, None));
    println!();
    for s in &result.structures {
        match &s.geometry {
            Some(GeometricParams::Ellipse { center, semi_major, semi_minor, angle }) => println!(
                "#{:<2} center ({:.1}, {:.1})  axes {:.1} × {:.1}  angle {:.1}°",
                s.rank,
                center[0],
                center[1],
                semi_major,
                semi_minor,
                angle.to_degrees()
            ),
            _ => println!("#{:<2} not a real ellipse", s.rank),
        }
    }
    Ok(())
}
