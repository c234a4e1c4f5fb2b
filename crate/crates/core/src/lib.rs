//! Robust estimation of multiple inlier structures with adaptive scales.
//!
//! Each structure is found by random elemental-subset search, its noise
//! scale is estimated from the sorted residuals without a user threshold,
//! its parameters are refined by mean shift over projections, and the
//! structures are reported in order of strength (inliers per unit scale).
//!
//! ```
//! use misre::{run, EstimationConfig, InputPoint, ModelKind};
//!
//! let points: Vec<InputPoint> = (0..40).map(|i| InputPoint::new(vec![i as f64, 0.5 * i as f64 + 3.0])).collect();
//! let result = run(&points, &EstimationConfig::new(ModelKind::Line2d).trials(50)).unwrap();
//! assert_eq!(result.structures[0].n_in, 40);
//! ```

pub mod bench;
pub mod cli;
pub mod data;
pub mod error;
pub mod hypothesis;
pub mod mode;
pub mod model;
pub mod pipeline;
pub mod scale;

pub use error::{MisreError, RejectReason, Result};
pub use mode::InlierRule;
pub use model::{CovarianceBasis, GeometricParams, InputPoint, ModelKind};
pub use pipeline::{run, EstimationConfig, EstimationResult, Structure};
