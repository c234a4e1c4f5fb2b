use nalgebra::{DMatrix, Matrix3};
use serde::{Deserialize, Serialize};

use crate::error::{MisreError, Result};

use super::geometric::{
    fundamental_from_theta, homography_from_theta, quadric_from_theta, theta_from_fundamental,
    theta_from_homography, theta_from_quadric,
};
use super::{InputPoint, ModelKind, ModelSpec};

/// Similarity transform of one coordinate block: `y' = scale · (y − centroid)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockTransform {
    pub start: usize,
    pub centroid: Vec<f64>,
    pub scale: f64,
}

impl BlockTransform {
    pub fn len(&self) -> usize {
        self.centroid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centroid.is_empty()
    }

    /// Homogeneous `(k+1) × (k+1)` matrix of the transform.
    pub fn matrix(&self) -> DMatrix<f64> {
        let k = self.len();
        let mut t = DMatrix::identity(k + 1, k + 1);
        for i in 0..k {
            t[(i, i)] = self.scale;
            t[(i, k)] = -self.scale * self.centroid[i];
        }
        t
    }
}

/// Per-block similarity transforms applied before estimation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationTransform {
    pub blocks: Vec<BlockTransform>,
}

impl NormalizationTransform {
    pub fn identity(kind: ModelKind) -> Self {
        NormalizationTransform {
            blocks: kind
                .coordinate_blocks()
                .into_iter()
                .map(|(start, len)| BlockTransform { start, centroid: vec![0.0; len], scale: 1.0 })
                .collect(),
        }
    }

    pub fn apply(&self, y: &[f64]) -> Vec<f64> {
        let mut out = y.to_vec();
        for b in &self.blocks {
            for (k, c) in b.centroid.iter().enumerate() {
                out[b.start + k] = b.scale * (y[b.start + k] - c);
            }
        }
        out
    }

    pub fn invert(&self, y: &[f64]) -> Vec<f64> {
        let mut out = y.to_vec();
        for b in &self.blocks {
            for (k, c) in b.centroid.iter().enumerate() {
                out[b.start + k] = y[b.start + k] / b.scale + c;
            }
        }
        out
    }

    /// Geometric mean of the block scales; distances in normalized space are
    /// this factor times distances in source units.
    pub fn scale_factor(&self) -> f64 {
        let log_sum: f64 = self.blocks.iter().map(|b| b.scale.ln()).sum();
        (log_sum / self.blocks.len() as f64).exp()
    }
}

/// Centers every coordinate block and scales it isotropically to a mean
/// norm of `√(block dimension)`.
pub fn normalize_points(
    spec: &ModelSpec,
    points: &[InputPoint],
) -> Result<(Vec<InputPoint>, NormalizationTransform)> {
    if points.is_empty() {
        return Err(MisreError::InvalidInput("no points to normalize".into()));
    }
    if let Some(p) = points.iter().find(|p| p.y.len() != spec.input_dim) {
        return Err(MisreError::InvalidInput(format!(
            "{} expects {} coordinates per point, got {}",
            spec.kind,
            spec.input_dim,
            p.y.len()
        )));
    }
    let n = points.len() as f64;
    let mut blocks = Vec::new();
    for (start, len) in spec.kind.coordinate_blocks() {
        let mut centroid = vec![0.0; len];
        for p in points {
            for k in 0..len {
                centroid[k] += p.y[start + k];
            }
        }
        centroid.iter_mut().for_each(|c| *c /= n);
        let mean_norm = points
            .iter()
            .map(|p| (0..len).map(|k| (p.y[start + k] - centroid[k]).powi(2)).sum::<f64>().sqrt())
            .sum::<f64>()
            / n;
        let spread = centroid.iter().fold(1.0f64, |a, c| a.max(c.abs()));
        if !(mean_norm > 1e-12 * spread) || !mean_norm.is_finite() {
            return Err(MisreError::DegenerateInput("all points coincide".into()));
        }
        blocks.push(BlockTransform { start, centroid, scale: (len as f64).sqrt() / mean_norm });
    }
    let transform = NormalizationTransform { blocks };
    let normalized = points
        .iter()
        .map(|p| InputPoint { y: transform.apply(&p.y), cov: p.cov.clone() })
        .collect();
    Ok((normalized, transform))
}

fn unit(theta: Vec<f64>, alpha: f64) -> Result<(Vec<f64>, f64)> {
    let norm = theta.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(MisreError::Internal("structure vanished under denormalization".into()));
    }
    Ok((theta.iter().map(|v| v / norm).collect(), alpha / norm))
}

fn matrix3(m: &DMatrix<f64>) -> Matrix3<f64> {
    Matrix3::from_fn(|r, c| m[(r, c)])
}

/// Maps `(θ, α, σ)` estimated on normalized points back to source units.
pub fn denormalize_structure(
    spec: &ModelSpec,
    theta: &[f64],
    alpha: f64,
    sigma: f64,
    transform: &NormalizationTransform,
) -> Result<(Vec<f64>, f64, f64)> {
    if transform.blocks.iter().any(|b| !(b.scale > 0.0) || !b.scale.is_finite()) {
        return Err(MisreError::Internal("singular normalization transform".into()));
    }
    let sigma0 = sigma / transform.scale_factor();
    let (theta0, alpha0) = match spec.kind {
        ModelKind::Line2d | ModelKind::Plane3d => {
            let b = &transform.blocks[0];
            let shift: f64 = theta.iter().zip(&b.centroid).map(|(t, c)| t * c).sum();
            (theta.to_vec(), shift + alpha / b.scale)
        }
        ModelKind::Ellipse2d | ModelKind::Sphere3d | ModelKind::Cylinder3d => {
            let q = quadric_from_theta(spec.kind, theta, alpha);
            let t = transform.blocks[0].matrix();
            let q0 = t.transpose() * q * t;
            let (th, al) = theta_from_quadric(spec.kind, &q0);
            unit(th, al)?
        }
        ModelKind::Fundamental => {
            let t1 = matrix3(&transform.blocks[0].matrix());
            let t2 = matrix3(&transform.blocks[1].matrix());
            let f0 = t2.transpose() * fundamental_from_theta(theta, alpha) * t1;
            let (th, al) = theta_from_fundamental(&f0);
            unit(th, al)?
        }
        ModelKind::Homography => {
            let t1 = matrix3(&transform.blocks[0].matrix());
            let t2_inv = matrix3(&transform.blocks[1].matrix())
                .try_inverse()
                .ok_or_else(|| MisreError::Internal("singular normalization transform".into()))?;
            let h0 = t2_inv * homography_from_theta(theta) * t1;
            let (th, _) = unit(theta_from_homography(&h0), 0.0)?;
            (th, 0.0)
        }
    };
    Ok((theta0, alpha0, sigma0))
}
