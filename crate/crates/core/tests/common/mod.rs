//! Independent reference implementations used as test oracles.

#![allow(dead_code)]

use misre::hypothesis::sorted_sequence;
use misre::model::{lift, Hypothesis, LiftedPoints};
use misre::{InputPoint, ModelKind};

/// Central-difference Jacobian of channel `c`'s carrier, row-major `m × l`.
pub fn fd_jacobian(kind: ModelKind, y: &[f64], c: usize) -> Vec<f64> {
    let spec = kind.spec();
    let (m, l) = (spec.carrier_dim, spec.input_dim);
    let mut out = vec![0.0; m * l];
    for j in 0..l {
        let h = 1e-6 * y[j].abs().max(1.0);
        let mut plus = y.to_vec();
        let mut minus = y.to_vec();
        plus[j] += h;
        minus[j] -= h;
        let xp = lift(&spec, &InputPoint::new(plus)).unwrap().carriers[c].clone();
        let xm = lift(&spec, &InputPoint::new(minus)).unwrap().carriers[c].clone();
        for i in 0..m {
            out[i * l + j] = (xp[i] - xm[i]) / (2.0 * h);
        }
    }
    out
}

/// Largest entrywise relative difference, relative to `max(1, |b|)`.
pub fn max_relative(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs() / y.abs().max(1.0)).fold(0.0, f64::max)
}

/// Segment counts by direct comparison with the segment bounds:
/// `(j−1)·w < d ≤ j·w`, with zero in the first segment.
pub fn brute_counts(sorted: &[f64], width: f64, segments: usize) -> Vec<usize> {
    (1..=segments)
        .map(|j| {
            sorted
                .iter()
                .filter(|&&d| {
                    let lo = (j as f64 - 1.0) * width;
                    let hi = j as f64 * width;
                    d <= hi && (d > lo || (j == 1 && d >= 0.0))
                })
                .count()
        })
        .collect()
}

/// Segment bound: the smallest `K` with `K·w ≥ max d`, capped at 10⁴.
pub fn brute_limit(sorted: &[f64], width: f64) -> usize {
    let max = sorted.iter().copied().filter(|d| d.is_finite()).fold(0.0, f64::max);
    let mut k = 1usize;
    while (k as f64) * width < max && k < 10_000 {
        k += 1;
    }
    k
}

/// First `k` with `n_{k+1} ≤ ½ · (1/k) · Σ_{j≤k} n_j`, else the bound.
pub fn brute_expand(sorted: &[f64], width: f64) -> usize {
    let k_max = brute_limit(sorted, width);
    let n = brute_counts(sorted, width, k_max + 1);
    for k in 1..=k_max {
        let s: usize = n[..k].iter().sum();
        if 2 * k * n[k] <= s {
            return k;
        }
    }
    k_max
}

/// Winner by fully sorting every hypothesis' distances:
/// `(score, index)` minimizing the sum of the `n_eps` smallest.
pub fn full_sort_best(points: &LiftedPoints, hypotheses: &[Hypothesis], n_eps: usize) -> (f64, usize) {
    hypotheses
        .iter()
        .map(|h| {
            let seq = sorted_sequence(points, &h.theta, h.alpha);
            let score: f64 = seq.iter().take(n_eps).map(|r| r.distance).sum();
            (score, h.index)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .unwrap()
}

/// Epanechnikov density `Σ κ((z − z_i)²/b_i) / (nσ)`, summed directly.
pub fn kde_direct(z: f64, zs: &[f64], bs: &[f64], sigma: f64) -> f64 {
    let mut s = 0.0;
    for (zi, bi) in zs.iter().zip(bs) {
        let u = (z - zi) * (z - zi) / bi;
        if u <= 1.0 {
            s += 1.0 - u;
        }
    }
    s / (zs.len() as f64 * sigma)
}

fn unit(mut theta: Vec<f64>, alpha: f64) -> (Vec<f64>, f64) {
    let n = theta.iter().map(|v| v * v).sum::<f64>().sqrt();
    theta.iter_mut().for_each(|v| *v /= n);
    (theta, alpha / n)
}

/// `θ·[x y x² xy y²] = α` for the ellipse with the given center, semi-axes
/// and major-axis angle.
pub fn ellipse_theta(center: [f64; 2], a: f64, b: f64, angle: f64) -> (Vec<f64>, f64) {
    let (c, s) = (angle.cos(), angle.sin());
    // (x−x0)ᵀ R diag(1/a², 1/b²) Rᵀ (x−x0) = 1
    let p = c * c / (a * a) + s * s / (b * b);
    let q = 2.0 * c * s * (1.0 / (a * a) - 1.0 / (b * b));
    let r = s * s / (a * a) + c * c / (b * b);
    let [x0, y0] = center;
    let lin_x = -2.0 * p * x0 - q * y0;
    let lin_y = -2.0 * r * y0 - q * x0;
    let constant = p * x0 * x0 + q * x0 * y0 + r * y0 * y0 - 1.0;
    unit(vec![lin_x, lin_y, p, q, r], -constant)
}

pub fn ellipse_point(center: [f64; 2], a: f64, b: f64, angle: f64, t: f64) -> [f64; 2] {
    let (c, s) = (angle.cos(), angle.sin());
    let (u, v) = (a * t.cos(), b * t.sin());
    [center[0] + c * u - s * v, center[1] + s * u + c * v]
}

/// `θ·[‖y‖² x y z] = α` for a sphere.
pub fn sphere_theta(center: [f64; 3], radius: f64) -> (Vec<f64>, f64) {
    let c2: f64 = center.iter().map(|v| v * v).sum();
    unit(vec![1.0, -2.0 * center[0], -2.0 * center[1], -2.0 * center[2]], radius * radius - c2)
}

/// Distance of a single point under `(θ, α)`.
pub fn distance(kind: ModelKind, y: &[f64], theta: &[f64], alpha: f64) -> f64 {
    let lifted = LiftedPoints::new(kind, &[InputPoint::new(y.to_vec())]).unwrap();
    lifted.distance(0, theta, alpha)
}
