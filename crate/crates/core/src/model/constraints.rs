use crate::error::RejectReason;

use super::geometric::{cylinder_analysis, ellipse_analysis};
use super::ModelKind;

/// Largest accepted major/minor axis ratio for ellipses.
pub const MAX_ELLIPSE_AXIS_RATIO: f64 = 10.0;
/// Relative tolerance on the cylinder quadric's eigenstructure.
pub const CYLINDER_TOLERANCE: f64 = 0.05;

/// Checks that `(θ, α)` describes a valid instance of the model.
///
/// Ellipses need `4θ₃θ₅ − θ₄² > 0`, a real locus and an axis ratio of at
/// most 10. Cylinders need the quadric block `D` to have two equal
/// eigenvalues of the same sign and one zero, with `d` in the equal
/// eigenspace. The other models are unconstrained.
pub fn validate_constraints(kind: ModelKind, theta: &[f64], alpha: f64) -> Result<(), RejectReason> {
    match kind {
        ModelKind::Ellipse2d => {
            let disc = 4.0 * theta[2] * theta[4] - theta[3] * theta[3];
            if !(disc > 0.0) {
                return Err(RejectReason::Constraint);
            }
            match ellipse_analysis(theta, alpha) {
                Some(e) if e.semi_major / e.semi_minor <= MAX_ELLIPSE_AXIS_RATIO => Ok(()),
                _ => Err(RejectReason::Constraint),
            }
        }
        ModelKind::Cylinder3d => {
            let a = cylinder_analysis(theta, alpha);
            let tol = CYLINDER_TOLERANCE;
            let scale = a.lambda_major.abs();
            if !(scale > 0.0) || a.lambda_major.signum() != a.lambda_minor.signum() {
                return Err(RejectReason::Constraint);
            }
            if (a.lambda_major - a.lambda_minor).abs() / scale > tol || a.lambda_null.abs() / scale > tol {
                return Err(RejectReason::Constraint);
            }
            if a.d_norm > 1e-12 * scale && a.eigen_residual / (a.lambda.abs() * a.d_norm) > tol {
                return Err(RejectReason::Constraint);
            }
            if !(a.radius_sq > 0.0) {
                return Err(RejectReason::Constraint);
            }
            Ok(())
        }
        _ => Ok(()),
    }
}
