//! Writes the five-line segmentation as an SVG overlay and the result
//! document as JSON.
//!
//! cargo run --release --example svg_overlay -- [output directory]

use std::path::PathBuf;

use misre::data::{generate, scenario::five_lines, write_result, write_svg, SvgOptions};
use misre::{run, EstimationConfig, ModelKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let data = generate(&five_lines(11))?;
    let result = run(&data.points, &EstimationConfig::new(ModelKind::Line2d).trials(1000).seed(11))?;

    let svg = dir.join("five_lines.svg");
    let json = dir.join("five_lines.json");
    let opts = SvgOptions { view: Some([0.0, 0.0, 700.0, 700.0]), point_radius: Some(2.5) };
    write_svg(&svg, ModelKind::Line2d, &data.points, &result.structures, &opts)?;
    write_result(&result, &json)?;
    println!("{} structures; wrote {} and {}", result.structures.len(), svg.display(), json.display());
    Ok(())
}
