use nalgebra::{DMatrix, Matrix2, Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{MisreError, Result};

use super::ModelKind;

/// Human-readable parameters of a recovered structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GeometricParams {
    /// `normal · y = offset` with a unit normal.
    Line { normal: [f64; 2], offset: f64 },
    Plane { normal: [f64; 3], offset: f64 },
    /// `angle` is the direction of the major axis, in radians.
    Ellipse { center: [f64; 2], semi_major: f64, semi_minor: f64, angle: f64 },
    Sphere { center: [f64; 3], radius: f64 },
    /// `point` is the axis point in the cross-section through the
    /// reference point, the origin by default.
    Cylinder { point: [f64; 3], direction: [f64; 3], radius: f64 },
    /// Rank-2 fundamental matrix with unit Frobenius norm, `y'ᵀ F y = 0`.
    Fundamental { matrix: [[f64; 3]; 3] },
    /// `y' ≃ H y`, unit Frobenius norm.
    Homography { matrix: [[f64; 3]; 3] },
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct EllipseShape {
    pub center: [f64; 2],
    pub semi_major: f64,
    pub semi_minor: f64,
    pub angle: f64,
}

/// Center and axes of the conic `θ·[x y x² xy y²] = α`, or `None` when the
/// conic is not a real ellipse.
pub(crate) fn ellipse_analysis(theta: &[f64], alpha: f64) -> Option<EllipseShape> {
    let a = Matrix2::new(theta[2], theta[3] / 2.0, theta[3] / 2.0, theta[4]);
    let b = Vector2::new(theta[0], theta[1]);
    let inv = a.try_inverse()?;
    let c = -(inv * b) / 2.0;
    let g_c = (c.transpose() * a * c)[0] + b.dot(&c) - alpha;
    let k = -g_c;
    let eig = a.symmetric_eigen();
    let (l0, l1) = (eig.eigenvalues[0], eig.eigenvalues[1]);
    let (r0, r1) = (k / l0, k / l1);
    if !(r0 > 0.0 && r1 > 0.0) || !r0.is_finite() || !r1.is_finite() {
        return None;
    }
    let (ax0, ax1) = (r0.sqrt(), r1.sqrt());
    let (semi_major, semi_minor, major_idx) = if ax0 >= ax1 { (ax0, ax1, 0) } else { (ax1, ax0, 1) };
    let v = eig.eigenvectors.column(major_idx);
    let mut angle = v[1].atan2(v[0]);
    // axis direction is defined up to sign
    if angle <= -std::f64::consts::FRAC_PI_2 {
        angle += std::f64::consts::PI;
    } else if angle > std::f64::consts::FRAC_PI_2 {
        angle -= std::f64::consts::PI;
    }
    Some(EllipseShape { center: [c[0], c[1]], semi_major, semi_minor, angle })
}

/// Eigenstructure of the cylinder quadric `yᵀDy + 2dᵀy + c = 0` encoded by
/// `θ·[x² xy xz y² yz z² x y z] = α`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CylinderAnalysis {
    /// Eigenvalues of `D` ordered by decreasing magnitude.
    pub lambda_major: f64,
    pub lambda_minor: f64,
    pub lambda_null: f64,
    /// Mean of the two leading eigenvalues.
    pub lambda: f64,
    pub axis: [f64; 3],
    pub d_norm: f64,
    /// `‖Dd − λd‖`.
    pub eigen_residual: f64,
    pub point: [f64; 3],
    pub radius_sq: f64,
}

pub(crate) fn cylinder_analysis(theta: &[f64], alpha: f64) -> CylinderAnalysis {
    cylinder_analysis_at(theta, alpha, [0.0; 3])
}

/// As [`cylinder_analysis`], with the axis point and radius taken in the
/// cross-section through `reference`.
pub(crate) fn cylinder_analysis_at(theta: &[f64], alpha: f64, reference: [f64; 3]) -> CylinderAnalysis {
    let d_mat = Matrix3::new(
        theta[0],
        theta[1] / 2.0,
        theta[2] / 2.0,
        theta[1] / 2.0,
        theta[3],
        theta[4] / 2.0,
        theta[2] / 2.0,
        theta[4] / 2.0,
        theta[5],
    );
    let d = Vector3::new(theta[6] / 2.0, theta[7] / 2.0, theta[8] / 2.0);
    let c = -alpha;
    let eig = d_mat.symmetric_eigen();
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&i, &j| eig.eigenvalues[j].abs().total_cmp(&eig.eigenvalues[i].abs()));
    let lambda_major = eig.eigenvalues[idx[0]];
    let lambda_minor = eig.eigenvalues[idx[1]];
    let lambda_null = eig.eigenvalues[idx[2]];
    let lambda = 0.5 * (lambda_major + lambda_minor);
    let axis: Vector3<f64> = eig.eigenvectors.column(idx[2]).into_owned();
    let e_major: Vector3<f64> = eig.eigenvectors.column(idx[0]).into_owned();
    let e_minor: Vector3<f64> = eig.eigenvectors.column(idx[1]).into_owned();
    // center of the conic cut by the plane through q normal to the axis
    let q = Vector3::from(reference);
    let g = d_mat * q + d;
    let w = -e_major * (e_major.dot(&g) / lambda_major) - e_minor * (e_minor.dot(&g) / lambda_minor);
    let f_q = q.dot(&(d_mat * q)) + 2.0 * d.dot(&q) + c;
    let f_center = f_q + g.dot(&w);
    let p0 = q + w;
    let radius_sq = -f_center / (lambda_major * lambda_minor).abs().sqrt().copysign(lambda);
    CylinderAnalysis {
        lambda_major,
        lambda_minor,
        lambda_null,
        lambda,
        axis: [axis[0], axis[1], axis[2]],
        d_norm: d.norm(),
        eigen_residual: (d_mat * d - d * lambda).norm(),
        point: [p0[0], p0[1], p0[2]],
        radius_sq,
    }
}

/// Homogeneous `(l+1) × (l+1)` quadric matrix `Q` with `[y 1] Q [y 1]ᵀ = xᵀθ − α`,
/// for the conic and quadric models.
pub(crate) fn quadric_from_theta(kind: ModelKind, theta: &[f64], alpha: f64) -> DMatrix<f64> {
    match kind {
        ModelKind::Ellipse2d => DMatrix::from_row_slice(
            3,
            3,
            &[
                theta[2],
                theta[3] / 2.0,
                theta[0] / 2.0,
                theta[3] / 2.0,
                theta[4],
                theta[1] / 2.0,
                theta[0] / 2.0,
                theta[1] / 2.0,
                -alpha,
            ],
        ),
        ModelKind::Sphere3d => {
            let mut q = DMatrix::zeros(4, 4);
            for i in 0..3 {
                q[(i, i)] = theta[0];
                q[(i, 3)] = theta[i + 1] / 2.0;
                q[(3, i)] = theta[i + 1] / 2.0;
            }
            q[(3, 3)] = -alpha;
            q
        }
        ModelKind::Cylinder3d => {
            let t = theta;
            DMatrix::from_row_slice(
                4,
                4,
                &[
                    t[0],
                    t[1] / 2.0,
                    t[2] / 2.0,
                    t[6] / 2.0,
                    t[1] / 2.0,
                    t[3],
                    t[4] / 2.0,
                    t[7] / 2.0,
                    t[2] / 2.0,
                    t[4] / 2.0,
                    t[5],
                    t[8] / 2.0,
                    t[6] / 2.0,
                    t[7] / 2.0,
                    t[8] / 2.0,
                    -alpha,
                ],
            )
        }
        _ => unreachable!("{kind} is not a quadric model"),
    }
}

/// Inverse of [`quadric_from_theta`]; the result is not normalized.
pub(crate) fn theta_from_quadric(kind: ModelKind, q: &DMatrix<f64>) -> (Vec<f64>, f64) {
    match kind {
        ModelKind::Ellipse2d => (
            vec![2.0 * q[(0, 2)], 2.0 * q[(1, 2)], q[(0, 0)], 2.0 * q[(0, 1)], q[(1, 1)]],
            -q[(2, 2)],
        ),
        ModelKind::Sphere3d => {
            let s = (q[(0, 0)] + q[(1, 1)] + q[(2, 2)]) / 3.0;
            (vec![s, 2.0 * q[(0, 3)], 2.0 * q[(1, 3)], 2.0 * q[(2, 3)]], -q[(3, 3)])
        }
        ModelKind::Cylinder3d => (
            vec![
                q[(0, 0)],
                2.0 * q[(0, 1)],
                2.0 * q[(0, 2)],
                q[(1, 1)],
                2.0 * q[(1, 2)],
                q[(2, 2)],
                2.0 * q[(0, 3)],
                2.0 * q[(1, 3)],
                2.0 * q[(2, 3)],
            ],
            -q[(3, 3)],
        ),
        _ => unreachable!("{kind} is not a quadric model"),
    }
}

/// `F` such that `[x' y' 1] F [x y 1]ᵀ = xᵀθ − α`.
pub(crate) fn fundamental_from_theta(theta: &[f64], alpha: f64) -> Matrix3<f64> {
    Matrix3::new(
        theta[4], theta[6], theta[2], //
        theta[5], theta[7], theta[3], //
        theta[0], theta[1], -alpha,
    )
}

pub(crate) fn theta_from_fundamental(f: &Matrix3<f64>) -> (Vec<f64>, f64) {
    (
        vec![f[(2, 0)], f[(2, 1)], f[(0, 2)], f[(1, 2)], f[(0, 0)], f[(1, 0)], f[(0, 1)], f[(1, 1)]],
        -f[(2, 2)],
    )
}

/// `θ = vec(Hᵀ)`: the rows of `H` stacked.
pub(crate) fn homography_from_theta(theta: &[f64]) -> Matrix3<f64> {
    Matrix3::from_row_slice(&theta[..9])
}

pub(crate) fn theta_from_homography(h: &Matrix3<f64>) -> Vec<f64> {
    (0..3).flat_map(|r| (0..3).map(move |c| h[(r, c)])).collect()
}

fn rows3(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    [
        [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
        [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
        [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
    ]
}

/// Converts `(θ, α)` to geometric parameters of the model.
///
/// The fundamental matrix is projected to rank 2 here (smallest singular
/// value zeroed); estimation itself never enforces the rank.
pub fn to_geometric(kind: ModelKind, theta: &[f64], alpha: f64) -> Result<GeometricParams> {
    to_geometric_near(kind, theta, alpha, None)
}

/// As [`to_geometric`]; a cylinder's axis point and radius are measured in
/// the cross-section through `reference` (the origin when absent), since a
/// fitted quadric is only approximately cylindrical away from its data.
pub fn to_geometric_near(
    kind: ModelKind,
    theta: &[f64],
    alpha: f64,
    reference: Option<[f64; 3]>,
) -> Result<GeometricParams> {
    let m = kind.spec().carrier_dim;
    if theta.len() != m {
        return Err(MisreError::InvalidInput(format!(
            "{kind} expects {m} parameters, got {}",
            theta.len()
        )));
    }
    let norm = theta.iter().map(|v| v * v).sum::<f64>().sqrt();
    match kind {
        ModelKind::Line2d => {
            Ok(GeometricParams::Line { normal: [theta[0] / norm, theta[1] / norm], offset: alpha / norm })
        }
        ModelKind::Plane3d => Ok(GeometricParams::Plane {
            normal: [theta[0] / norm, theta[1] / norm, theta[2] / norm],
            offset: alpha / norm,
        }),
        ModelKind::Ellipse2d => {
            let disc = 4.0 * theta[2] * theta[4] - theta[3] * theta[3];
            if !(disc > 0.0) {
                return Err(MisreError::Constraint("conic is not an ellipse".into()));
            }
            let e = ellipse_analysis(theta, alpha)
                .ok_or_else(|| MisreError::Constraint("ellipse has no real points".into()))?;
            Ok(GeometricParams::Ellipse {
                center: e.center,
                semi_major: e.semi_major,
                semi_minor: e.semi_minor,
                angle: e.angle,
            })
        }
        ModelKind::Sphere3d => {
            if theta[0].abs() <= 1e-12 * norm {
                return Err(MisreError::Constraint("quadratic term vanishes; not a sphere".into()));
            }
            let center = [
                -theta[1] / (2.0 * theta[0]),
                -theta[2] / (2.0 * theta[0]),
                -theta[3] / (2.0 * theta[0]),
            ];
            let r2 = center.iter().map(|v| v * v).sum::<f64>() + alpha / theta[0];
            if !(r2 > 0.0) {
                return Err(MisreError::Constraint("sphere has no real points".into()));
            }
            Ok(GeometricParams::Sphere { center, radius: r2.sqrt() })
        }
        ModelKind::Cylinder3d => {
            let a = cylinder_analysis_at(theta, alpha, reference.unwrap_or([0.0; 3]));
            if !(a.radius_sq > 0.0) || a.lambda_major.signum() != a.lambda_minor.signum() {
                return Err(MisreError::Constraint("quadric is not a real cylinder".into()));
            }
            Ok(GeometricParams::Cylinder { point: a.point, direction: a.axis, radius: a.radius_sq.sqrt() })
        }
        ModelKind::Fundamental => {
            let f = fundamental_from_theta(theta, alpha);
            let svd = f.svd(true, true);
            let (u, v_t) = match (svd.u, svd.v_t) {
                (Some(u), Some(v_t)) => (u, v_t),
                _ => return Err(MisreError::Internal("SVD of F failed".into())),
            };
            let mut s = svd.singular_values;
            let min = (0..3).min_by(|&i, &j| s[i].total_cmp(&s[j])).unwrap_or(2);
            s[min] = 0.0;
            let f2 = u * Matrix3::from_diagonal(&s) * v_t;
            let f2 = f2 / f2.norm();
            Ok(GeometricParams::Fundamental { matrix: rows3(&f2) })
        }
        ModelKind::Homography => {
            let h = homography_from_theta(theta);
            Ok(GeometricParams::Homography { matrix: rows3(&(h / h.norm())) })
        }
    }
}
