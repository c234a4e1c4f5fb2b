//! Synthetic scenarios, file formats and result output.

pub mod files;
pub mod report;
pub mod scenario;
pub mod svg;

pub use files::{read_correspondences, read_covariances, read_labels, read_points, write_labels, write_points};
pub use report::{format_table, read_result, to_json, write_result};
pub use scenario::{generate, LabeledDataset, NoiseModel, PlantedModel, Preset, Region, ScenarioSpec, Shape};
pub use svg::{render_svg, write_svg, SvgOptions};
