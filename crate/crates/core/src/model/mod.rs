//! Estimation problems expressed as linear relations between carrier
//! vectors and a unit parameter vector.
//!
//! Every model lifts an input measurement `y` (length `l`) into `ζ` carrier
//! vectors of length `m` such that an inlier satisfies `xᵀθ − α ≈ 0` for each
//! channel. The first-order carrier covariance is `J C_y Jᵀ`, with `J` the
//! `m × l` Jacobian of the carrier map.

mod constraints;
mod geometric;
mod lifted;
mod normalize;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{MisreError, RejectReason, Result};

pub use constraints::validate_constraints;
pub use geometric::{to_geometric, to_geometric_near, GeometricParams};
pub use lifted::LiftedPoints;
pub use normalize::{denormalize_structure, normalize_points, BlockTransform, NormalizationTransform};

/// The supported objective functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Line2d,
    Plane3d,
    Ellipse2d,
    Sphere3d,
    Cylinder3d,
    Fundamental,
    Homography,
}

impl ModelKind {
    pub const ALL: [ModelKind; 7] = [
        ModelKind::Line2d,
        ModelKind::Plane3d,
        ModelKind::Ellipse2d,
        ModelKind::Sphere3d,
        ModelKind::Cylinder3d,
        ModelKind::Fundamental,
        ModelKind::Homography,
    ];

    pub fn spec(self) -> ModelSpec {
        let (l, m, zeta, m_e) = match self {
            ModelKind::Line2d => (2, 2, 1, 2),
            ModelKind::Plane3d => (3, 3, 1, 3),
            ModelKind::Ellipse2d => (2, 5, 1, 5),
            ModelKind::Sphere3d => (3, 4, 1, 4),
            ModelKind::Cylinder3d => (3, 9, 1, 9),
            ModelKind::Fundamental => (4, 8, 1, 8),
            ModelKind::Homography => (4, 9, 2, 4),
        };
        ModelSpec {
            kind: self,
            input_dim: l,
            carrier_dim: m,
            channels: zeta,
            elemental_size: m_e,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Line2d => "line2d",
            ModelKind::Plane3d => "plane3d",
            ModelKind::Ellipse2d => "ellipse2d",
            ModelKind::Sphere3d => "sphere3d",
            ModelKind::Cylinder3d => "cylinder3d",
            ModelKind::Fundamental => "fundamental",
            ModelKind::Homography => "homography",
        }
    }

    /// Whether `α` is a free parameter. The homography relation is
    /// homogeneous, so its intercept is identically zero.
    pub fn has_intercept(self) -> bool {
        self != ModelKind::Homography
    }

    /// Carrier map is linear in `y` (constant Jacobians).
    pub fn is_linear(self) -> bool {
        matches!(self, ModelKind::Line2d | ModelKind::Plane3d)
    }

    /// Input points are correspondences between two images.
    pub fn is_two_view(self) -> bool {
        matches!(self, ModelKind::Fundamental | ModelKind::Homography)
    }

    /// Coordinate blocks normalized independently, as `(start, len)`.
    pub fn coordinate_blocks(self) -> Vec<(usize, usize)> {
        if self.is_two_view() {
            vec![(0, 2), (2, 2)]
        } else {
            vec![(0, self.spec().input_dim)]
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = MisreError;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| MisreError::InvalidInput(format!("unknown model '{s}'")))
    }
}

/// Dimensions of an estimation problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    /// `l`: length of an input measurement.
    pub input_dim: usize,
    /// `m`: length of a carrier vector.
    pub carrier_dim: usize,
    /// `ζ`: carrier vectors per measurement.
    pub channels: usize,
    /// `m_e`: points in an elemental subset.
    pub elemental_size: usize,
}

/// Shape of the measurement covariance `C_y` (the unknown scale `σ²` is
/// factored out, so `det C_y = 1`).
#[derive(Debug, Clone, PartialEq, Default)]
pub enum CovarianceBasis {
    #[default]
    Identity,
    Full(DMatrix<f64>),
}

impl CovarianceBasis {
    /// Validates symmetry and unit determinant.
    pub fn full(c: DMatrix<f64>) -> Result<Self> {
        if !c.is_square() {
            return Err(MisreError::InvalidInput("covariance basis must be square".into()));
        }
        let scale = c.amax().max(f64::MIN_POSITIVE);
        if (&c - c.transpose()).amax() > 1e-12 * scale {
            return Err(MisreError::InvalidInput("covariance basis must be symmetric".into()));
        }
        let det = c.determinant();
        if !((det - 1.0).abs() <= 1e-9) {
            return Err(MisreError::InvalidInput(format!(
                "covariance basis must have unit determinant, got {det}"
            )));
        }
        if c.clone().cholesky().is_none() {
            return Err(MisreError::InvalidInput(
                "covariance basis must be positive definite".into(),
            ));
        }
        Ok(CovarianceBasis::Full(c))
    }

    pub fn matrix(&self, l: usize) -> DMatrix<f64> {
        match self {
            CovarianceBasis::Identity => DMatrix::identity(l, l),
            CovarianceBasis::Full(c) => c.clone(),
        }
    }

    /// Lower Cholesky factor `L` with `C_y = L Lᵀ`.
    pub(crate) fn cholesky_factor(&self, l: usize) -> Option<DMatrix<f64>> {
        match self {
            CovarianceBasis::Identity => None,
            CovarianceBasis::Full(c) => {
                debug_assert_eq!(c.nrows(), l);
                c.clone().cholesky().map(|ch| ch.l())
            }
        }
    }
}

/// One measurement with its covariance basis.
#[derive(Debug, Clone, PartialEq)]
pub struct InputPoint {
    pub y: Vec<f64>,
    pub cov: CovarianceBasis,
}

impl InputPoint {
    pub fn new(y: impl Into<Vec<f64>>) -> Self {
        InputPoint { y: y.into(), cov: CovarianceBasis::Identity }
    }

    pub fn with_covariance(y: impl Into<Vec<f64>>, cov: CovarianceBasis) -> Result<Self> {
        let y = y.into();
        if let CovarianceBasis::Full(c) = &cov {
            if c.nrows() != y.len() {
                return Err(MisreError::InvalidInput(format!(
                    "covariance is {}x{} but the point has {} coordinates",
                    c.nrows(),
                    c.ncols(),
                    y.len()
                )));
            }
        }
        Ok(InputPoint { y, cov })
    }
}

impl From<Vec<f64>> for InputPoint {
    fn from(y: Vec<f64>) -> Self {
        InputPoint::new(y)
    }
}

/// Lifted carriers of a single measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct CarrierSet {
    pub carriers: Vec<DVector<f64>>,
    /// `m × l` Jacobians of the carrier map, one per channel.
    pub jacobians: Vec<DMatrix<f64>>,
    /// `m × m` carrier covariances `J C_y Jᵀ`, one per channel.
    pub covariances: Vec<DMatrix<f64>>,
}

/// Writes the `ζ·m` carriers and the `ζ` row-major `m × l` Jacobians of `y`.
pub(crate) fn fill_carriers(kind: ModelKind, y: &[f64], x: &mut [f64], jac: &mut [f64]) {
    jac.iter_mut().for_each(|v| *v = 0.0);
    match kind {
        ModelKind::Line2d | ModelKind::Plane3d => {
            let l = y.len();
            x[..l].copy_from_slice(y);
            for i in 0..l {
                jac[i * l + i] = 1.0;
            }
        }
        ModelKind::Ellipse2d => {
            let (px, py) = (y[0], y[1]);
            x.copy_from_slice(&[px, py, px * px, px * py, py * py]);
            let rows: [[f64; 2]; 5] =
                [[1.0, 0.0], [0.0, 1.0], [2.0 * px, 0.0], [py, px], [0.0, 2.0 * py]];
            for (r, row) in rows.iter().enumerate() {
                jac[r * 2..r * 2 + 2].copy_from_slice(row);
            }
        }
        ModelKind::Sphere3d => {
            let (px, py, pz) = (y[0], y[1], y[2]);
            x.copy_from_slice(&[px * px + py * py + pz * pz, px, py, pz]);
            let rows: [[f64; 3]; 4] = [
                [2.0 * px, 2.0 * py, 2.0 * pz],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
            ];
            for (r, row) in rows.iter().enumerate() {
                jac[r * 3..r * 3 + 3].copy_from_slice(row);
            }
        }
        ModelKind::Cylinder3d => {
            let (px, py, pz) = (y[0], y[1], y[2]);
            x.copy_from_slice(&[px * px, px * py, px * pz, py * py, py * pz, pz * pz, px, py, pz]);
            let rows: [[f64; 3]; 9] = [
                [2.0 * px, 0.0, 0.0],
                [py, px, 0.0],
                [pz, 0.0, px],
                [0.0, 2.0 * py, 0.0],
                [0.0, pz, py],
                [0.0, 0.0, 2.0 * pz],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
            ];
            for (r, row) in rows.iter().enumerate() {
                jac[r * 3..r * 3 + 3].copy_from_slice(row);
            }
        }
        ModelKind::Fundamental => {
            let (u, v, up, vp) = (y[0], y[1], y[2], y[3]);
            x.copy_from_slice(&[u, v, up, vp, u * up, u * vp, v * up, v * vp]);
            let rows: [[f64; 4]; 8] = [
                [1.0, 0.0, 0.0, 0.0],
                [0.0, 1.0, 0.0, 0.0],
                [0.0, 0.0, 1.0, 0.0],
                [0.0, 0.0, 0.0, 1.0],
                [up, 0.0, u, 0.0],
                [vp, 0.0, 0.0, u],
                [0.0, up, v, 0.0],
                [0.0, vp, 0.0, v],
            ];
            for (r, row) in rows.iter().enumerate() {
                jac[r * 4..r * 4 + 4].copy_from_slice(row);
            }
        }
        ModelKind::Homography => {
            let (u, v, up, vp) = (y[0], y[1], y[2], y[3]);
            let (x1, x2) = x.split_at_mut(9);
            x1.copy_from_slice(&[-u, -v, -1.0, 0.0, 0.0, 0.0, up * u, up * v, up]);
            x2.copy_from_slice(&[0.0, 0.0, 0.0, -u, -v, -1.0, vp * u, vp * v, vp]);
            let (j1, j2) = jac.split_at_mut(36);
            // channel 1: rows are carrier entries, columns (u, v, u', v')
            j1[0] = -1.0;
            j1[4 + 1] = -1.0;
            j1[6 * 4] = up;
            j1[6 * 4 + 2] = u;
            j1[7 * 4 + 1] = up;
            j1[7 * 4 + 2] = v;
            j1[8 * 4 + 2] = 1.0;
            // channel 2
            j2[3 * 4] = -1.0;
            j2[4 * 4 + 1] = -1.0;
            j2[6 * 4] = vp;
            j2[6 * 4 + 3] = u;
            j2[7 * 4 + 1] = vp;
            j2[7 * 4 + 3] = v;
            j2[8 * 4 + 3] = 1.0;
        }
    }
}

/// Lifts one measurement into its carriers, Jacobians and carrier covariances.
pub fn lift(spec: &ModelSpec, point: &InputPoint) -> Result<CarrierSet> {
    let (l, m, zeta) = (spec.input_dim, spec.carrier_dim, spec.channels);
    if point.y.len() != l {
        return Err(MisreError::InvalidInput(format!(
            "{} expects {l} coordinates per point, got {}",
            spec.kind,
            point.y.len()
        )));
    }
    let mut x = vec![0.0; zeta * m];
    let mut jac = vec![0.0; zeta * m * l];
    fill_carriers(spec.kind, &point.y, &mut x, &mut jac);
    let cy = point.cov.matrix(l);
    let mut set = CarrierSet {
        carriers: Vec::with_capacity(zeta),
        jacobians: Vec::with_capacity(zeta),
        covariances: Vec::with_capacity(zeta),
    };
    for c in 0..zeta {
        let carrier = DVector::from_column_slice(&x[c * m..(c + 1) * m]);
        let j = DMatrix::from_row_slice(m, l, &jac[c * m * l..(c + 1) * m * l]);
        let cov = &j * &cy * j.transpose();
        set.carriers.push(carrier);
        set.jacobians.push(j);
        set.covariances.push(cov);
    }
    Ok(set)
}

/// A candidate structure produced from one elemental subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub theta: Vec<f64>,
    pub alpha: f64,
    /// Input indices of the elemental subset.
    pub subset: Vec<usize>,
    /// Ordinal within the sampling batch.
    pub index: usize,
}

/// Singular values below this fraction of the largest count as zero.
const RANK_TOLERANCE: f64 = 1e-9;

/// Solves `xᵀθ = α` exactly for the given carrier rows (all channels of
/// every subset point). Returns the unit `θ` and the mean projection `α`.
pub(crate) fn solve_carrier_rows(
    kind: ModelKind,
    rows: &[&[f64]],
) -> std::result::Result<(Vec<f64>, f64), RejectReason> {
    let m = kind.spec().carrier_dim;
    let r = rows.len();
    let n = r.max(m);
    let mut a = DMatrix::<f64>::zeros(n, m);
    let mut mean = vec![0.0; m];
    if kind.has_intercept() {
        for row in rows {
            for (acc, v) in mean.iter_mut().zip(row.iter()) {
                *acc += v;
            }
        }
        mean.iter_mut().for_each(|v| *v /= r as f64);
    }
    for (i, row) in rows.iter().enumerate() {
        for j in 0..m {
            a[(i, j)] = row[j] - mean[j];
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.as_ref().ok_or(RejectReason::Degenerate)?;
    let s = &svd.singular_values;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[i].total_cmp(&s[j]));
    let s_max = s[order[order.len() - 1]];
    if !(s_max > 1e-300) || !s_max.is_finite() {
        return Err(RejectReason::Degenerate);
    }
    // Nullspace must be exactly one-dimensional.
    if order.len() >= 2 && s[order[1]] <= RANK_TOLERANCE * s_max {
        return Err(RejectReason::Degenerate);
    }
    let theta: Vec<f64> = v_t.row(order[0]).iter().copied().collect();
    let norm = theta.iter().map(|v| v * v).sum::<f64>().sqrt();
    let theta: Vec<f64> = theta.iter().map(|v| v / norm).collect();
    let alpha = if kind.has_intercept() {
        mean.iter().zip(&theta).map(|(a, b)| a * b).sum()
    } else {
        0.0
    };
    Ok((theta, alpha))
}

/// Solves an elemental subset of exactly `m_e` measurements and validates
/// the model constraints.
pub fn solve_elemental(spec: &ModelSpec, subset: &[InputPoint]) -> Result<Hypothesis> {
    if subset.len() != spec.elemental_size {
        return Err(MisreError::InvalidInput(format!(
            "{} needs {} points per elemental subset, got {}",
            spec.kind,
            spec.elemental_size,
            subset.len()
        )));
    }
    let lifted: Vec<CarrierSet> = subset.iter().map(|p| lift(spec, p)).collect::<Result<_>>()?;
    let rows: Vec<&[f64]> = lifted
        .iter()
        .flat_map(|set| set.carriers.iter().map(|c| c.as_slice()))
        .collect();
    let (theta, alpha) = solve_carrier_rows(spec.kind, &rows).map_err(MisreError::Rejected)?;
    validate_constraints(spec.kind, &theta, alpha).map_err(MisreError::Rejected)?;
    Ok(Hypothesis { theta, alpha, subset: (0..subset.len()).collect(), index: 0 })
}

/// Guards the variance of a projection: channels with vanishing variance are
/// at infinite distance unless the residual vanishes too.
#[inline]
pub(crate) fn channel_distance(residual: f64, variance: f64) -> f64 {
    if variance <= 1e-15 {
        if residual.abs() > 1e-12 {
            f64::INFINITY
        } else {
            0.0
        }
    } else {
        residual.abs() / variance.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn line_lift_is_identity() {
        let spec = ModelKind::Line2d.spec();
        let set = lift(&spec, &InputPoint::new(vec![3.0, 4.0])).unwrap();
        assert_eq!(set.carriers[0].as_slice(), &[3.0, 4.0]);
        assert_eq!(set.jacobians[0], DMatrix::identity(2, 2));
    }

    #[test]
    fn ellipse_lift_matches_monomials() {
        let spec = ModelKind::Ellipse2d.spec();
        let set = lift(&spec, &InputPoint::new(vec![1.0, 2.0])).unwrap();
        assert_eq!(set.carriers[0].as_slice(), &[1.0, 2.0, 1.0, 2.0, 4.0]);
        let jt = set.jacobians[0].transpose();
        assert_eq!(
            jt,
            DMatrix::from_row_slice(2, 5, &[1.0, 0.0, 2.0, 2.0, 0.0, 0.0, 1.0, 0.0, 1.0, 4.0])
        );
    }

    #[test]
    fn fundamental_jacobian_depends_on_point() {
        let spec = ModelKind::Fundamental.spec();
        let (u, v, up, vp) = (2.0, 3.0, 5.0, 7.0);
        let set = lift(&spec, &InputPoint::new(vec![u, v, up, vp])).unwrap();
        assert_eq!(
            set.carriers[0].as_slice(),
            &[u, v, up, vp, u * up, u * vp, v * up, v * vp]
        );
        let expected_t = DMatrix::from_row_slice(
            4,
            8,
            &[
                1.0, 0.0, 0.0, 0.0, up, vp, 0.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, 0.0, 0.0, up, vp, //
                0.0, 0.0, 1.0, 0.0, u, 0.0, v, 0.0, //
                0.0, 0.0, 0.0, 1.0, 0.0, u, 0.0, v,
            ],
        );
        assert_eq!(set.jacobians[0].transpose(), expected_t);
    }

    #[test]
    fn sphere_lift() {
        let spec = ModelKind::Sphere3d.spec();
        let set = lift(&spec, &InputPoint::new(vec![1.0, 2.0, 2.0])).unwrap();
        assert_eq!(set.carriers[0].as_slice(), &[9.0, 1.0, 2.0, 2.0]);
    }

    #[test]
    fn homography_carriers_encode_dlt_rows() {
        let spec = ModelKind::Homography.spec();
        let set = lift(&spec, &InputPoint::new(vec![2.0, 3.0, 5.0, 7.0])).unwrap();
        assert_eq!(set.carriers.len(), 2);
        assert_eq!(
            set.carriers[0].as_slice(),
            &[-2.0, -3.0, -1.0, 0.0, 0.0, 0.0, 10.0, 15.0, 5.0]
        );
        assert_eq!(
            set.carriers[1].as_slice(),
            &[0.0, 0.0, 0.0, -2.0, -3.0, -1.0, 14.0, 21.0, 7.0]
        );
    }

    #[test]
    fn lift_rejects_wrong_dimension() {
        let spec = ModelKind::Plane3d.spec();
        assert!(matches!(
            lift(&spec, &InputPoint::new(vec![1.0, 2.0])),
            Err(MisreError::InvalidInput(_))
        ));
    }

    #[test]
    fn covariance_uses_point_basis() {
        let spec = ModelKind::Line2d.spec();
        let c = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        let p = InputPoint::with_covariance(vec![0.0, 0.0], CovarianceBasis::full(c.clone()).unwrap())
            .unwrap();
        let set = lift(&spec, &p).unwrap();
        assert_eq!(set.covariances[0], c);
    }

    #[test]
    fn covariance_basis_requires_unit_determinant() {
        let c = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]);
        assert!(CovarianceBasis::full(c).is_err());
        let c = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.2, 1.0]);
        assert!(CovarianceBasis::full(c).is_err());
    }

    #[test]
    fn horizontal_line_from_two_points() {
        let spec = ModelKind::Line2d.spec();
        let h = solve_elemental(&spec, &[vec![0.0, 0.0].into(), vec![1.0, 0.0].into()]).unwrap();
        assert_relative_eq!(h.theta[0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(h.theta[1].abs(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(h.alpha, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn coincident_points_are_degenerate() {
        let spec = ModelKind::Line2d.spec();
        let r = solve_elemental(&spec, &[vec![1.0, 1.0].into(), vec![1.0, 1.0].into()]);
        assert!(matches!(r, Err(MisreError::Rejected(RejectReason::Degenerate))));
    }

    #[test]
    fn collinear_plane_subset_is_degenerate() {
        let spec = ModelKind::Plane3d.spec();
        let pts: Vec<InputPoint> =
            (0..3).map(|i| vec![i as f64, 2.0 * i as f64, 0.5].into()).collect();
        assert!(matches!(
            solve_elemental(&spec, &pts),
            Err(MisreError::Rejected(RejectReason::Degenerate))
        ));
    }

    #[test]
    fn wrong_subset_size_is_invalid() {
        let spec = ModelKind::Line2d.spec();
        assert!(matches!(
            solve_elemental(&spec, &[vec![0.0, 0.0].into()]),
            Err(MisreError::InvalidInput(_))
        ));
    }

    #[test]
    fn model_names_round_trip() {
        for kind in ModelKind::ALL {
            assert_eq!(kind.name().parse::<ModelKind>().unwrap(), kind);
        }
        assert!("cone3d".parse::<ModelKind>().is_err());
    }

    #[test]
    fn elemental_sizes_follow_carrier_ratio() {
        for kind in ModelKind::ALL {
            let s = kind.spec();
            if !matches!(kind, ModelKind::Homography | ModelKind::Cylinder3d) {
                assert_eq!(s.elemental_size, s.carrier_dim.div_ceil(s.channels));
            }
        }
    }
}
