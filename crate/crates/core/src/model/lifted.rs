use crate::error::{RejectReason, Result};

use super::{
    channel_distance, fill_carriers, solve_carrier_rows, validate_constraints, InputPoint, ModelKind,
    ModelSpec,
};

/// Carriers of a whole point set, stored flat for fast distance evaluation.
///
/// Alongside each carrier the `l × m` matrix `W = Lᵀ Jᵀ` is kept, where
/// `C_y = L Lᵀ`, so that `θᵀ C θ = ‖W θ‖²`.
#[derive(Debug, Clone)]
pub struct LiftedPoints {
    spec: ModelSpec,
    n: usize,
    x: Vec<f64>,
    w: Vec<f64>,
}

impl LiftedPoints {
    pub fn new(kind: ModelKind, points: &[InputPoint]) -> Result<Self> {
        let spec = kind.spec();
        let (l, m, zeta) = (spec.input_dim, spec.carrier_dim, spec.channels);
        let n = points.len();
        let mut x = vec![0.0; n * zeta * m];
        let mut w = vec![0.0; n * zeta * l * m];
        let mut jac = vec![0.0; zeta * m * l];
        for (i, p) in points.iter().enumerate() {
            if p.y.len() != l {
                return Err(crate::MisreError::InvalidInput(format!(
                    "{kind} expects {l} coordinates per point, point {i} has {}",
                    p.y.len()
                )));
            }
            fill_carriers(kind, &p.y, &mut x[i * zeta * m..(i + 1) * zeta * m], &mut jac);
            let chol = p.cov.cholesky_factor(l);
            for c in 0..zeta {
                let j = &jac[c * m * l..(c + 1) * m * l];
                let out = &mut w[(i * zeta + c) * l * m..(i * zeta + c + 1) * l * m];
                for r in 0..l {
                    for k in 0..m {
                        // (Lᵀ Jᵀ)[r][k] = Σ_s L[s][r] J[k][s]
                        out[r * m + k] = match &chol {
                            None => j[k * l + r],
                            Some(lf) => (r..l).map(|s| lf[(s, r)] * j[k * l + s]).sum(),
                        };
                    }
                }
            }
        }
        Ok(LiftedPoints { spec, n, x, w })
    }

    pub fn kind(&self) -> ModelKind {
        self.spec.kind
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn carrier(&self, i: usize, c: usize) -> &[f64] {
        let m = self.spec.carrier_dim;
        let off = (i * self.spec.channels + c) * m;
        &self.x[off..off + m]
    }

    /// `xᵀθ` for channel `c` of point `i`.
    #[inline]
    pub fn projection(&self, i: usize, c: usize, theta: &[f64]) -> f64 {
        dot(self.carrier(i, c), theta)
    }

    /// `θᵀ C θ` for channel `c` of point `i`.
    #[inline]
    pub fn variance(&self, i: usize, c: usize, theta: &[f64]) -> f64 {
        let (l, m) = (self.spec.input_dim, self.spec.carrier_dim);
        let off = (i * self.spec.channels + c) * l * m;
        let w = &self.w[off..off + l * m];
        w.chunks_exact(m).map(|row| dot(row, theta).powi(2)).sum()
    }

    /// Largest channel distance of point `i` and the channel achieving it.
    #[inline]
    pub fn worst_channel(&self, i: usize, theta: &[f64], alpha: f64) -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, 0);
        for c in 0..self.spec.channels {
            let d = channel_distance(self.projection(i, c, theta) - alpha, self.variance(i, c, theta));
            if d > best.0 {
                best = (d, c);
            }
        }
        best
    }

    #[inline]
    pub fn distance(&self, i: usize, theta: &[f64], alpha: f64) -> f64 {
        self.worst_channel(i, theta, alpha).0
    }

    /// Writes the distance of every point into `out`.
    pub fn distances_into(&self, theta: &[f64], alpha: f64, out: &mut Vec<f64>) {
        out.clear();
        out.extend((0..self.n).map(|i| self.distance(i, theta, alpha)));
    }

    pub fn distances(&self, theta: &[f64], alpha: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n);
        self.distances_into(theta, alpha, &mut out);
        out
    }

    /// The points at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> LiftedPoints {
        let (l, m, zeta) = (self.spec.input_dim, self.spec.carrier_dim, self.spec.channels);
        let (xs, ws) = (zeta * m, zeta * l * m);
        let mut x = Vec::with_capacity(indices.len() * xs);
        let mut w = Vec::with_capacity(indices.len() * ws);
        for &i in indices {
            x.extend_from_slice(&self.x[i * xs..(i + 1) * xs]);
            w.extend_from_slice(&self.w[i * ws..(i + 1) * ws]);
        }
        LiftedPoints { spec: self.spec, n: indices.len(), x, w }
    }

    /// Exact solution through the points at `indices`, constraints checked.
    pub fn solve_subset(&self, indices: &[usize]) -> std::result::Result<(Vec<f64>, f64), RejectReason> {
        let rows: Vec<&[f64]> = indices
            .iter()
            .flat_map(|&i| (0..self.spec.channels).map(move |c| self.carrier(i, c)))
            .collect();
        let (theta, alpha) = solve_carrier_rows(self.spec.kind, &rows)?;
        validate_constraints(self.spec.kind, &theta, alpha)?;
        Ok((theta, alpha))
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{lift, CovarianceBasis};
    use approx::assert_relative_eq;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn variance_matches_carrier_covariance() {
        let c = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 0.625]);
        let cov = CovarianceBasis::full(c).unwrap();
        let p = InputPoint::with_covariance(vec![1.5, -0.5], cov).unwrap();
        let theta = [0.3, -0.2, 0.5, 0.4, -0.1];
        let set = lift(&ModelKind::Ellipse2d.spec(), &p).unwrap();
        let t = DVector::from_column_slice(&theta);
        let expected = (t.transpose() * &set.covariances[0] * &t)[0];
        let lifted = LiftedPoints::new(ModelKind::Ellipse2d, &[p]).unwrap();
        assert_relative_eq!(lifted.variance(0, 0, &theta), expected, epsilon = 1e-12);
    }

    #[test]
    fn point_to_line_distance() {
        let lifted = LiftedPoints::new(ModelKind::Line2d, &[vec![5.0, 2.0].into()]).unwrap();
        assert_eq!(lifted.distance(0, &[0.0, 1.0], 0.0), 2.0);
    }

    #[test]
    fn circle_distance_by_hand() {
        let s = 2f64.sqrt();
        let lifted = LiftedPoints::new(ModelKind::Ellipse2d, &[vec![2.0, 0.0].into()]).unwrap();
        let d = lifted.distance(0, &[0.0, 0.0, 1.0 / s, 0.0, 1.0 / s], 1.0 / s);
        assert_relative_eq!(d, 0.75, epsilon = 1e-12);
    }

    #[test]
    fn homography_takes_worst_channel() {
        // identity homography, point displaced only in y'
        let theta: Vec<f64> = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]
            .iter()
            .map(|v| v / 3f64.sqrt())
            .collect();
        let lifted = LiftedPoints::new(ModelKind::Homography, &[vec![0.0, 0.0, 0.0, 0.5].into()]).unwrap();
        let (d, c) = lifted.worst_channel(0, &theta, 0.0);
        assert_eq!(c, 1);
        assert!(d > 0.0);
    }

    #[test]
    fn select_preserves_rows() {
        let pts: Vec<InputPoint> = (0..5).map(|i| vec![i as f64, 2.0 * i as f64].into()).collect();
        let lifted = LiftedPoints::new(ModelKind::Ellipse2d, &pts).unwrap();
        let sub = lifted.select(&[3, 1]);
        assert_eq!(sub.len(), 2);
        assert_eq!(sub.carrier(0, 0), lifted.carrier(3, 0));
        assert_eq!(sub.carrier(1, 0), lifted.carrier(1, 0));
    }
}
