//! Mean-shift refinement of a structure and inlier classification.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MisreError, Result};
use crate::hypothesis::{draw_one, ScoredHypothesis};
use crate::model::{validate_constraints, LiftedPoints, ModelKind};

pub const MAX_ITERATIONS: usize = 100;

/// Epanechnikov profile.
#[inline]
fn kappa(u: f64) -> f64 {
    if u <= 1.0 {
        1.0 - u
    } else {
        0.0
    }
}

/// Kernel density of projections `z̃_i` with variances `B̃_i` at `z`.
///
/// Points with a nonpositive variance are skipped.
pub fn kde(z: f64, projections: &[f64], variances: &[f64], sigma: f64) -> f64 {
    let n = projections.len();
    if n == 0 {
        return 0.0;
    }
    let sum: f64 = projections
        .iter()
        .zip(variances)
        .filter(|(_, &b)| b > 0.0)
        .map(|(&zi, &b)| kappa((z - zi).powi(2) / b))
        .sum();
    sum / (n as f64 * sigma)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeResult {
    pub mode: f64,
    pub height: f64,
    pub iterations: usize,
    pub converged: bool,
    /// The starting window was empty.
    pub no_support: bool,
}

/// One-dimensional projections of the remaining points under a fixed `θ`,
/// indexed for window queries.
#[derive(Debug, Clone)]
pub struct Projections {
    pub z: Vec<f64>,
    /// `B̃_i = σ̂² θᵀC̃_iθ`.
    pub b: Vec<f64>,
    pub sigma: f64,
    order: Vec<usize>,
    sorted_z: Vec<f64>,
    /// Prefix sums of `sorted_z` and of its squares.
    prefix: Vec<(f64, f64)>,
    half_width: f64,
    /// Points excluded for a nonpositive variance.
    pub excluded: usize,
}

impl Projections {
    pub fn new(z: Vec<f64>, b: Vec<f64>, sigma: f64) -> Self {
        let mut order: Vec<usize> = (0..z.len()).filter(|&i| b[i] > 0.0 && z[i].is_finite()).collect();
        let excluded = z.len() - order.len();
        order.sort_by(|&i, &j| z[i].total_cmp(&z[j]));
        let sorted_z: Vec<f64> = order.iter().map(|&i| z[i]).collect();
        let mut prefix = Vec::with_capacity(sorted_z.len() + 1);
        prefix.push((0.0, 0.0));
        for v in &sorted_z {
            let (s1, s2) = prefix[prefix.len() - 1];
            prefix.push((s1 + v, s2 + v * v));
        }
        let half_width = order.iter().map(|&i| b[i]).fold(0.0f64, f64::max).sqrt();
        Projections { z, b, sigma, order, sorted_z, prefix, half_width, excluded }
    }

    /// Projects every point under `(θ, α)`, each through its worst channel.
    pub fn from_points(points: &LiftedPoints, theta: &[f64], alpha: f64, sigma: f64) -> Self {
        let n = points.len();
        let mut z = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for i in 0..n {
            let (_, c) = points.worst_channel(i, theta, alpha);
            z.push(points.projection(i, c, theta));
            b.push(sigma * sigma * points.variance(i, c, theta));
        }
        Projections::new(z, b, sigma)
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    fn candidates(&self, z: f64) -> &[usize] {
        let lo = self.sorted_z.partition_point(|&v| v < z - self.half_width);
        let hi = self.sorted_z.partition_point(|&v| v <= z + self.half_width);
        &self.order[lo..hi]
    }

    /// Sum of `κ` and the window mean at `z`.
    fn window(&self, z: f64) -> (f64, usize, f64) {
        let (mut density, mut count, mut total) = (0.0, 0usize, 0.0);
        for &i in self.candidates(z) {
            let u = (z - self.z[i]).powi(2) / self.b[i];
            if u <= 1.0 {
                density += 1.0 - u;
                count += 1;
                total += self.z[i];
            }
        }
        (density, count, total)
    }

    /// Window sums at `z` when every point has the bandwidth `b`.
    fn fixed_window(&self, z: f64, b: f64) -> (f64, usize, f64) {
        let h = b.sqrt();
        let lo = self.sorted_z.partition_point(|&v| v < z - h);
        let hi = self.sorted_z.partition_point(|&v| v <= z + h);
        let count = hi - lo;
        let s1 = self.prefix[hi].0 - self.prefix[lo].0;
        let s2 = self.prefix[hi].1 - self.prefix[lo].1;
        let density = count as f64 - (count as f64 * z * z - 2.0 * z * s1 + s2) / b;
        (density.max(0.0), count, s1)
    }

    pub fn kde(&self, z: f64) -> f64 {
        let n = self.len();
        if n == 0 {
            return 0.0;
        }
        self.window(z).0 / (n as f64 * self.sigma)
    }

    /// `tol = 1e-6 · σ̂ · median(√H_i)`.
    pub fn tolerance(&self) -> f64 {
        let mut roots: Vec<f64> = self.order.iter().map(|&i| self.b[i].sqrt()).collect();
        if roots.is_empty() {
            return 0.0;
        }
        let mid = roots.len() / 2;
        let (_, median, _) = roots.select_nth_unstable_by(mid, f64::total_cmp);
        1e-6 * *median
    }

    /// Fixed-point iteration `z ← mean of in-window projections`, stopped
    /// early if a step would lower the density.
    pub fn mean_shift(&self, z0: f64, tol: f64, max_iterations: usize) -> ModeResult {
        self.climb(z0, tol, max_iterations, |z| self.window(z))
    }

    /// Mean shift in which every point uses the single bandwidth `b`.
    pub fn mean_shift_fixed(&self, z0: f64, b: f64, tol: f64, max_iterations: usize) -> ModeResult {
        self.climb(z0, tol, max_iterations, |z| self.fixed_window(z, b))
    }

    fn climb(
        &self,
        z0: f64,
        tol: f64,
        max_iterations: usize,
        window: impl Fn(f64) -> (f64, usize, f64),
    ) -> ModeResult {
        let norm = self.len() as f64 * self.sigma;
        let (density, count, total) = window(z0);
        if count == 0 {
            return ModeResult { mode: z0, height: 0.0, iterations: 0, converged: true, no_support: true };
        }
        let (mut z, mut height) = (z0, density / norm);
        let mut next = total / count as f64;
        for it in 1..=max_iterations {
            let (density, count, total) = window(next);
            let next_height = density / norm;
            if count == 0 || next_height < height {
                return ModeResult { mode: z, height, iterations: it, converged: true, no_support: false };
            }
            let step = (next - z).abs();
            z = next;
            height = next_height;
            if step <= tol {
                return ModeResult { mode: z, height, iterations: it, converged: true, no_support: false };
            }
            next = total / count as f64;
        }
        ModeResult { mode: z, height, iterations: max_iterations, converged: false, no_support: false }
    }
}

/// Mean shift over explicit projections and variances.
pub fn mean_shift(z0: f64, projections: &[f64], variances: &[f64], sigma: f64) -> ModeResult {
    let p = Projections::new(projections.to_vec(), variances.to_vec(), sigma);
    let tol = p.tolerance();
    p.mean_shift(z0, tol, MAX_ITERATIONS)
}

/// Refined structure estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub theta: Vec<f64>,
    pub alpha: f64,
    pub mode: ModeResult,
    /// Trial index that produced the highest mode.
    pub trial: usize,
    pub trials: usize,
}

/// Runs `N` mean-shift trials from hypotheses sampled inside the
/// `σ̂`-neighborhood of the winner and keeps the highest mode.
pub fn refine(
    points: &LiftedPoints,
    winner: &ScoredHypothesis,
    sigma: f64,
    trials: usize,
    seed: u64,
) -> Result<Refinement> {
    let m_e = points.spec().elemental_size;
    let neighborhood: Vec<usize> =
        winner.sorted.iter().take_while(|r| r.distance <= sigma).map(|r| r.index).collect();
    if neighborhood.len() < m_e {
        return Err(MisreError::RefinementFailure(format!(
            "{} points within the scale, {m_e} needed",
            neighborhood.len()
        )));
    }
    let best = (0..trials.max(1))
        .into_par_iter()
        .filter_map(|t| {
            let (h, _) = draw_one(points, &neighborhood, seed, t);
            let h = h?;
            let proj = Projections::from_points(points, &h.theta, h.alpha, sigma);
            let mode = proj.mean_shift(h.alpha, proj.tolerance(), MAX_ITERATIONS);
            Some((t, h, mode))
        })
        .reduce_with(|a, b| {
            let ord = b.2.height.total_cmp(&a.2.height).then(a.0.cmp(&b.0));
            if ord == std::cmp::Ordering::Greater {
                b
            } else {
                a
            }
        });
    let (trial, h, mode) = best.ok_or_else(|| {
        MisreError::RefinementFailure("no acceptable subset in the scale neighborhood".into())
    })?;
    Ok(Refinement { theta: h.theta, alpha: mode.mode, mode, trial, trials: trials.max(1) })
}

/// How points are assigned to a refined structure.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InlierRule {
    /// A point is an inlier when the mean-shift trajectory started at its
    /// own projection, with its own bandwidth `B̃_i`, ends within `±σ̂√H_i`
    /// of the mode.
    #[default]
    Trajectory,
    /// `|z̃_i − α̂| ≤ σ̂√H_i`, for comparison.
    Threshold,
}

/// Indices of the points assigned to the structure `(θ̂, α̂)`.
pub fn classify_inliers(points: &LiftedPoints, theta: &[f64], alpha: f64, sigma: f64, rule: InlierRule) -> Vec<usize> {
    let proj = Projections::from_points(points, theta, alpha, sigma);
    let tol = proj.tolerance();
    (0..points.len())
        .into_par_iter()
        .filter(|&i| {
            let band = proj.b[i].sqrt();
            if !(band > 0.0) {
                return (proj.z[i] - alpha).abs() <= 1e-12;
            }
            let end = match rule {
                InlierRule::Threshold => proj.z[i],
                InlierRule::Trajectory => proj.mean_shift_fixed(proj.z[i], proj.b[i], tol, MAX_ITERATIONS).mode,
            };
            (end - alpha).abs() <= band
        })
        .collect()
}

/// Total least squares parameters of a point set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TlsFit {
    pub theta: Vec<f64>,
    pub alpha: f64,
    /// Largest inlier distance under `(θ, α)`.
    pub sigma: f64,
    /// The refit violated the model constraints or was skipped, and the
    /// refined parameters were kept.
    pub fallback: bool,
}

/// Smallest eigenvector of the centered carrier scatter of `inliers`
/// (all channels pooled).
pub fn tls_solution(points: &LiftedPoints, inliers: &[usize]) -> Option<(Vec<f64>, f64)> {
    let spec = points.spec();
    let (m, zeta) = (spec.carrier_dim, spec.channels);
    let rows = inliers.len() * zeta;
    if rows == 0 {
        return None;
    }
    let mut mean = vec![0.0; m];
    if spec.kind.has_intercept() {
        for &i in inliers {
            for c in 0..zeta {
                for (acc, v) in mean.iter_mut().zip(points.carrier(i, c)) {
                    *acc += v;
                }
            }
        }
        mean.iter_mut().for_each(|v| *v /= rows as f64);
    }
    let mut scatter = DMatrix::<f64>::zeros(m, m);
    let mut centered = vec![0.0; m];
    for &i in inliers {
        for c in 0..zeta {
            for (k, v) in points.carrier(i, c).iter().enumerate() {
                centered[k] = v - mean[k];
            }
            for r in 0..m {
                for s in r..m {
                    scatter[(r, s)] += centered[r] * centered[s];
                }
            }
        }
    }
    for r in 0..m {
        for s in 0..r {
            scatter[(r, s)] = scatter[(s, r)];
        }
    }
    let eig = scatter.symmetric_eigen();
    let k = (0..m).min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]))?;
    let v = eig.eigenvectors.column(k);
    let norm = v.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return None;
    }
    let theta: Vec<f64> = v.iter().map(|x| x / norm).collect();
    let alpha = if spec.kind.has_intercept() { mean.iter().zip(&theta).map(|(a, b)| a * b).sum() } else { 0.0 };
    Some((theta, alpha))
}

fn max_distance(points: &LiftedPoints, inliers: &[usize], theta: &[f64], alpha: f64) -> f64 {
    inliers.iter().map(|&i| points.distance(i, theta, alpha)).fold(0.0, f64::max)
}

/// TLS refit over the inliers, falling back to `(θ̂, α̂)` when the refit is
/// not possible or violates the model constraints.
pub fn tls_refit(points: &LiftedPoints, inliers: &[usize], theta_hat: &[f64], alpha_hat: f64) -> TlsFit {
    let kind: ModelKind = points.kind();
    let refit = if inliers.len() >= points.spec().elemental_size {
        tls_solution(points, inliers).filter(|(t, a)| validate_constraints(kind, t, *a).is_ok())
    } else {
        None
    };
    match refit {
        Some((theta, alpha)) => {
            let sigma = max_distance(points, inliers, &theta, alpha);
            TlsFit { theta, alpha, sigma, fallback: false }
        }
        None => {
            let sigma = max_distance(points, inliers, theta_hat, alpha_hat);
            TlsFit { theta: theta_hat.to_vec(), alpha: alpha_hat, sigma, fallback: true }
        }
    }
}
