//! Adaptive scale from the density of a sorted distance sequence.

use serde::{Deserialize, Serialize};

use crate::error::{MisreError, Result};

/// Largest percentage position scanned.
pub const ETA_MAX: f64 = 50.0;
/// Cap on the number of segments considered by one expansion.
pub const MAX_SEGMENTS: usize = 10_000;

/// One expansion with segment width `Δd_η`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionRecord {
    pub eta: f64,
    pub width: f64,
    pub k_t: usize,
    pub extent: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleStatus {
    Normal,
    NoExpansion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleEstimate {
    pub sigma: f64,
    /// `[η_start, η_t]`, absent when nothing expanded.
    pub region: Option<(f64, f64)>,
    pub records: Vec<ExpansionRecord>,
    pub status: ScaleStatus,
}

/// Segment `k ≥ 1` with `(k−1)·Δd < d ≤ k·Δd`; zero lands in the first.
#[inline]
pub fn segment_of(d: f64, width: f64) -> usize {
    if d <= width {
        return 1;
    }
    let mut k = (d / width).ceil();
    while k * width < d {
        k += 1.0;
    }
    while k > 1.0 && (k - 1.0) * width >= d {
        k -= 1.0;
    }
    k as usize
}

fn check_width(width: f64) -> Result<()> {
    if !(width > 0.0) || !width.is_finite() {
        return Err(MisreError::InvalidInput(format!("segment width must be positive, got {width}")));
    }
    Ok(())
}

fn largest_finite(sorted: &[f64]) -> f64 {
    sorted.iter().rev().copied().find(|d| d.is_finite()).unwrap_or(0.0)
}

/// `K_max = min(⌈max d̃ / Δd⌉, 10⁴)`, at least one.
pub fn segment_limit(sorted: &[f64], width: f64) -> usize {
    let max = largest_finite(sorted);
    if max <= 0.0 {
        return 1;
    }
    let k = max / width;
    if k >= MAX_SEGMENTS as f64 {
        MAX_SEGMENTS
    } else {
        segment_of(max, width)
    }
}

/// Counts `n_k` for `k = 1..=K`, returned zero-based.
pub fn segment_counts(sorted: &[f64], width: f64, segments: usize) -> Result<Vec<usize>> {
    check_width(width)?;
    let mut counts = vec![0usize; segments];
    for &d in sorted {
        if !d.is_finite() {
            break;
        }
        if d / width > segments as f64 + 1.0 {
            break;
        }
        let k = segment_of(d, width);
        if k > segments {
            break;
        }
        counts[k - 1] += 1;
    }
    Ok(counts)
}

/// Smallest `k` whose next segment holds at most half the average of the
/// first `k`; `K_max` when the density never drops.
pub fn expand(sorted: &[f64], width: f64) -> Result<usize> {
    check_width(width)?;
    let k_max = segment_limit(sorted, width);
    let counts = segment_counts(sorted, width, k_max + 1)?;
    let mut prefix = 0usize;
    for k in 1..=k_max {
        prefix += counts[k - 1];
        // n_{k+1} / (S_k / k) ≤ 1/2
        if 2 * counts[k] * k <= prefix {
            return Ok(k);
        }
    }
    Ok(k_max)
}

/// Scans `η = ε, ε+1, …` and returns the farthest expansion inside the
/// region of interest.
///
/// `n_eps` lower-bounds the position used for `Δd_η`, so the first width is
/// the radius of the initial set.
pub fn estimate_scale(sorted: &[f64], epsilon: f64, n_eps: usize) -> Result<ScaleEstimate> {
    let n = sorted.len();
    if n == 0 || n_eps == 0 || n < n_eps {
        return Err(MisreError::InvalidInput(format!(
            "distance sequence of length {n} is shorter than the initial set ({n_eps})"
        )));
    }
    if sorted.windows(2).any(|w| w[0] > w[1]) || sorted.iter().any(|d| d.is_nan() || *d < 0.0) {
        return Err(MisreError::InvalidInput("distance sequence must be sorted and nonnegative".into()));
    }
    let max_finite = largest_finite(sorted);
    let width_at = |eta: f64| {
        let pos = ((eta * n as f64 / 100.0).ceil() as usize).max(n_eps).min(n);
        sorted[pos - 1]
    };
    let mut records = Vec::new();
    let mut region: Option<(f64, f64)> = None;
    let mut sigma = 0.0f64;
    let mut eta = epsilon;
    while eta <= ETA_MAX + 1e-9 {
        let width = width_at(eta);
        if width > 0.0 && width.is_finite() {
            let k_t = expand(sorted, width)?;
            let extent = (k_t as f64 * width).min(max_finite);
            records.push(ExpansionRecord { eta, width, k_t, extent });
            match region {
                None if k_t >= 2 => {
                    region = Some((eta, eta));
                    sigma = extent;
                }
                None => {}
                Some(_) if k_t == 1 => break,
                Some((start, _)) => {
                    region = Some((start, eta));
                    sigma = sigma.max(extent);
                }
            }
        }
        eta += 1.0;
    }
    if region.is_none() {
        return Ok(ScaleEstimate {
            sigma: width_at(epsilon),
            region: None,
            records,
            status: ScaleStatus::NoExpansion,
        });
    }
    Ok(ScaleEstimate { sigma, region, records, status: ScaleStatus::Normal })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Sequence with the given number of points per unit-width segment.
    fn from_counts(counts: &[usize]) -> Vec<f64> {
        let mut seq = Vec::new();
        for (k, &c) in counts.iter().enumerate() {
            for j in 0..c {
                seq.push(k as f64 + (j as f64 + 1.0) / (c as f64 + 1.0));
            }
        }
        seq
    }

    #[test]
    fn counts_by_segment() {
        assert_eq!(segment_counts(&[0.1, 0.2, 0.3, 1.5], 1.0, 2).unwrap(), vec![3, 1]);
        assert_eq!(segment_counts(&[0.0; 7], 1.0, 1).unwrap(), vec![7]);
        assert!(segment_counts(&[1.0], 0.0, 1).is_err());
    }

    #[test]
    fn boundary_belongs_to_lower_segment() {
        assert_eq!(segment_of(1.0, 1.0), 1);
        assert_eq!(segment_of(2.0, 1.0), 2);
        assert_eq!(segment_of(2.0000001, 1.0), 3);
        assert_eq!(segment_of(0.3, 0.1), 3);
    }

    #[test]
    fn expansion_stops_at_density_drop() {
        assert_eq!(expand(&from_counts(&[30, 30, 30, 5, 5]), 1.0).unwrap(), 3);
        assert_eq!(expand(&from_counts(&[30, 14, 14]), 1.0).unwrap(), 1);
    }

    #[test]
    fn identical_points_do_not_expand() {
        let est = estimate_scale(&[0.0; 50], 5.0, 10).unwrap();
        assert_eq!(est.status, ScaleStatus::NoExpansion);
        let est = estimate_scale(&[2.0; 50], 5.0, 10).unwrap();
        assert_eq!(est.status, ScaleStatus::NoExpansion);
        assert_eq!(est.sigma, 2.0);
    }

    #[test]
    fn sharp_gap() {
        let mut seq: Vec<f64> = (1..=95).map(|i| i as f64 / 95.0).collect();
        seq.extend([100.0; 5]);
        let est = estimate_scale(&seq, 5.0, 5).unwrap();
        assert_eq!(est.status, ScaleStatus::Normal);
        assert!(est.region.is_some());
        assert!(est.sigma >= 1.0, "{est:?}");
        let gap_width = est.records.iter().map(|r| r.width).fold(0.0, f64::max);
        assert!(est.sigma <= 2.0 * gap_width.max(1.0));
    }

    #[test]
    fn empty_sequence_is_invalid() {
        assert!(estimate_scale(&[], 5.0, 1).is_err());
        assert!(estimate_scale(&[2.0, 1.0], 5.0, 1).is_err());
    }
}
