//! Random elemental-subset hypotheses scored by the minimum sum of their
//! `n_ε` smallest Mahalanobis distances.

use std::cmp::Ordering;

use nalgebra::DVector;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MisreError, RejectReason, Result};
use crate::model::{channel_distance, CarrierSet, Hypothesis, LiftedPoints};

/// Resampling attempts per requested hypothesis.
pub const MAX_ATTEMPTS: usize = 100;

/// Distance of one point to a hypothesis, reduced over channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceRecord {
    pub index: usize,
    pub distance: f64,
    /// Zero-based channel achieving the maximum.
    pub channel: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredHypothesis {
    pub hypothesis: Hypothesis,
    pub score: f64,
    /// Ascending distances over all points; empty unless materialized.
    pub sorted: Vec<DistanceRecord>,
}

impl ScoredHypothesis {
    /// Point indices of the `n_ε` closest points.
    pub fn initial_set(&self, n_eps: usize) -> Vec<usize> {
        self.sorted.iter().take(n_eps).map(|r| r.index).collect()
    }

    pub fn sorted_distances(&self) -> Vec<f64> {
        self.sorted.iter().map(|r| r.distance).collect()
    }
}

/// `n_ε = max(⌈ε·n/100⌉, 5·m_e)`.
pub fn initial_set_size(n: usize, epsilon: f64, elemental_size: usize) -> usize {
    let by_percent = (epsilon * n as f64 / 100.0).ceil() as usize;
    by_percent.max(5 * elemental_size)
}

/// Largest channel distance of a lifted point, with the channel achieving it.
pub fn mahalanobis(set: &CarrierSet, h: &Hypothesis) -> (f64, usize) {
    let theta = DVector::from_column_slice(&h.theta);
    let mut best = (f64::NEG_INFINITY, 0);
    for (c, (x, cov)) in set.carriers.iter().zip(&set.covariances).enumerate() {
        let variance = (theta.transpose() * cov * &theta)[0];
        let d = channel_distance(x.dot(&theta) - h.alpha, variance);
        if d > best.0 {
            best = (d, c);
        }
    }
    best
}

fn score_with(points: &LiftedPoints, theta: &[f64], alpha: f64, n_eps: usize, scratch: &mut Vec<f64>) -> f64 {
    points.distances_into(theta, alpha, scratch);
    let k = n_eps.min(scratch.len());
    if k == 0 {
        return 0.0;
    }
    if k < scratch.len() {
        scratch.select_nth_unstable_by(k - 1, f64::total_cmp);
    }
    let prefix = &mut scratch[..k];
    prefix.sort_unstable_by(f64::total_cmp);
    prefix.iter().sum()
}

/// Sum of the `n_ε` smallest distances, by linear-time selection.
pub fn score_hypothesis(points: &LiftedPoints, h: &Hypothesis, n_eps: usize) -> f64 {
    score_with(points, &h.theta, h.alpha, n_eps, &mut Vec::with_capacity(points.len()))
}

/// All distances sorted ascending, ties by point index.
pub fn sorted_sequence(points: &LiftedPoints, theta: &[f64], alpha: f64) -> Vec<DistanceRecord> {
    let mut seq: Vec<DistanceRecord> = (0..points.len())
        .map(|i| {
            let (distance, channel) = points.worst_channel(i, theta, alpha);
            DistanceRecord { index: i, distance, channel }
        })
        .collect();
    seq.sort_unstable_by(|a, b| a.distance.total_cmp(&b.distance).then(a.index.cmp(&b.index)));
    seq
}

fn better(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// The hypothesis of minimum score (ties to the lowest index), with its
/// full sorted sequence attached.
pub fn select_best(points: &LiftedPoints, hypotheses: &[Hypothesis], n_eps: usize) -> Result<ScoredHypothesis> {
    let best = hypotheses
        .par_iter()
        .enumerate()
        .map_init(
            || Vec::with_capacity(points.len()),
            |scratch, (pos, h)| (score_with(points, &h.theta, h.alpha, n_eps, scratch), h.index, pos),
        )
        .min_by(|a, b| better(&(a.0, a.1), &(b.0, b.1)))
        .ok_or(MisreError::SamplingFailure { attempts: 0, reason: RejectReason::Degenerate })?;
    let h = hypotheses[best.2].clone();
    let sorted = sorted_sequence(points, &h.theta, h.alpha);
    Ok(ScoredHypothesis { hypothesis: h, score: best.0, sorted })
}

/// Rejection counts from a sampling batch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectionCounts {
    pub degenerate: usize,
    pub constraint: usize,
    /// Requested hypotheses that exhausted their attempts.
    pub exhausted: usize,
}

impl RejectionCounts {
    fn add(mut self, other: RejectionCounts) -> RejectionCounts {
        self.degenerate += other.degenerate;
        self.constraint += other.constraint;
        self.exhausted += other.exhausted;
        self
    }

    pub fn dominant(&self) -> RejectReason {
        if self.constraint > self.degenerate {
            RejectReason::Constraint
        } else {
            RejectReason::Degenerate
        }
    }
}

/// RNG stream of one hypothesis index.
pub(crate) fn substream(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Draws elemental subsets from `pool` (indices into `points`) until one
/// yields an accepted hypothesis.
pub(crate) fn draw_one(
    points: &LiftedPoints,
    pool: &[usize],
    seed: u64,
    index: usize,
) -> (Option<Hypothesis>, RejectionCounts) {
    let m_e = points.spec().elemental_size;
    let mut counts = RejectionCounts::default();
    if pool.len() < m_e {
        counts.exhausted = 1;
        return (None, counts);
    }
    let mut rng = substream(seed, index);
    let mut subset = vec![0; m_e];
    for _ in 0..MAX_ATTEMPTS {
        for (slot, k) in subset.iter_mut().zip(index::sample(&mut rng, pool.len(), m_e)) {
            *slot = pool[k];
        }
        match points.solve_subset(&subset) {
            Ok((theta, alpha)) => {
                return (Some(Hypothesis { theta, alpha, subset, index }), counts);
            }
            Err(RejectReason::Degenerate) => counts.degenerate += 1,
            Err(RejectReason::Constraint) => counts.constraint += 1,
        }
    }
    counts.exhausted = 1;
    (None, counts)
}

/// Outcome of sampling `M` hypotheses.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    pub hypotheses: Vec<Hypothesis>,
    pub rejections: RejectionCounts,
}

/// Samples `M` hypotheses from elemental subsets of `pool`.
///
/// Hypothesis `i` uses its own RNG stream derived from `(seed, i)`, so the
/// batch does not depend on the number of worker threads. A requested index
/// that exhausts [`MAX_ATTEMPTS`] is dropped; the call fails only when no
/// index succeeds.
pub fn sample_from(points: &LiftedPoints, pool: &[usize], m: usize, seed: u64) -> Result<SampleBatch> {
    let drawn: Vec<(Option<Hypothesis>, RejectionCounts)> =
        (0..m).into_par_iter().map(|i| draw_one(points, pool, seed, i)).collect();
    let rejections = drawn.iter().fold(RejectionCounts::default(), |acc, (_, c)| acc.add(*c));
    let hypotheses: Vec<Hypothesis> = drawn.into_iter().filter_map(|(h, _)| h).collect();
    if hypotheses.is_empty() {
        return Err(MisreError::SamplingFailure {
            attempts: rejections.degenerate + rejections.constraint,
            reason: rejections.dominant(),
        });
    }
    Ok(SampleBatch { hypotheses, rejections })
}

/// Samples `M` hypotheses from elemental subsets of all points.
pub fn sample_hypotheses(points: &LiftedPoints, m: usize, seed: u64) -> Result<SampleBatch> {
    let pool: Vec<usize> = (0..points.len()).collect();
    sample_from(points, &pool, m, seed)
}

/// Samples, scores and selects in one parallel pass without storing the batch.
pub fn search(points: &LiftedPoints, m: usize, seed: u64, n_eps: usize) -> Result<(ScoredHypothesis, RejectionCounts)> {
    let pool: Vec<usize> = (0..points.len()).collect();
    let (best, rejections) = (0..m)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(points.len()),
            |scratch, i| {
                let (h, counts) = draw_one(points, &pool, seed, i);
                let scored = h.map(|h| {
                    let s = score_with(points, &h.theta, h.alpha, n_eps, scratch);
                    (s, h)
                });
                (scored, counts)
            },
        )
        .reduce(
            || (None, RejectionCounts::default()),
            |(a, ca), (b, cb)| {
                let best = match (a, b) {
                    (Some(a), Some(b)) => {
                        if better(&(b.0, b.1.index), &(a.0, a.1.index)) == Ordering::Less {
                            Some(b)
                        } else {
                            Some(a)
                        }
                    }
                    (a, b) => a.or(b),
                };
                (best, ca.add(cb))
            },
        );
    let (score, h) = best.ok_or(MisreError::SamplingFailure {
        attempts: rejections.degenerate + rejections.constraint,
        reason: rejections.dominant(),
    })?;
    let sorted = sorted_sequence(points, &h.theta, h.alpha);
    Ok((ScoredHypothesis { hypothesis: h, score, sorted }, rejections))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{lift, InputPoint, ModelKind};
    use approx::assert_relative_eq;

    fn line_points(ys: &[f64]) -> LiftedPoints {
        let pts: Vec<InputPoint> = ys.iter().enumerate().map(|(i, &y)| vec![i as f64, y].into()).collect();
        LiftedPoints::new(ModelKind::Line2d, &pts).unwrap()
    }

    fn horizontal(index: usize, alpha: f64) -> Hypothesis {
        Hypothesis { theta: vec![0.0, 1.0], alpha, subset: vec![], index }
    }

    #[test]
    fn initial_set_size_rules() {
        assert_eq!(initial_set_size(1350, 5.0, 2), 68);
        assert_eq!(initial_set_size(100, 5.0, 5), 25);
    }

    #[test]
    fn mahalanobis_on_carrier_set() {
        let set = lift(&ModelKind::Line2d.spec(), &InputPoint::new(vec![5.0, 2.0])).unwrap();
        assert_eq!(mahalanobis(&set, &horizontal(0, 0.0)), (2.0, 0));
        let s = 2f64.sqrt();
        let set = lift(&ModelKind::Ellipse2d.spec(), &InputPoint::new(vec![2.0, 0.0])).unwrap();
        let circle = Hypothesis { theta: vec![0.0, 0.0, 1.0 / s, 0.0, 1.0 / s], alpha: 1.0 / s, subset: vec![], index: 0 };
        assert_relative_eq!(mahalanobis(&set, &circle).0, 0.75, epsilon = 1e-12);
    }

    #[test]
    fn score_sums_smallest() {
        let pts = line_points(&[0.0, 1.0, 9.0]);
        assert_eq!(score_hypothesis(&pts, &horizontal(0, 0.0), 2), 1.0);
        let on_locus = line_points(&[3.0, 3.0, 3.0, 3.0]);
        assert_eq!(score_hypothesis(&on_locus, &horizontal(0, 3.0), 2), 0.0);
    }

    #[test]
    fn ties_go_to_lower_index() {
        let pts = line_points(&[-5.0, 5.0, 0.0]);
        // alpha = ±2.5 both give distances {2.5, 2.5, 7.5}
        let hs = vec![horizontal(7, 2.5), horizontal(3, -2.5)];
        let best = select_best(&pts, &hs, 2).unwrap();
        assert_eq!(best.hypothesis.index, 3);
        assert_eq!(best.score, 5.0);
        assert_eq!(best.sorted.len(), 3);
    }

    #[test]
    fn single_hypothesis_wins_with_sequence() {
        let pts = line_points(&[4.0, 1.0, 2.0]);
        let best = select_best(&pts, &[horizontal(0, 0.0)], 1).unwrap();
        assert_eq!(best.initial_set(3), vec![1, 2, 0]);
        assert_eq!(best.sorted_distances(), vec![1.0, 2.0, 4.0]);
    }

    #[test]
    fn exact_size_uses_full_set() {
        let pts = line_points(&[0.0, 1.0]);
        let batch = sample_hypotheses(&pts, 5, 1).unwrap();
        assert_eq!(batch.hypotheses.len(), 5);
        for h in &batch.hypotheses {
            let mut s = h.subset.clone();
            s.sort();
            assert_eq!(s, vec![0, 1]);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let ys: Vec<f64> = (0..40).map(|i| ((i * 37) % 11) as f64).collect();
        let pts = line_points(&ys);
        let a = sample_hypotheses(&pts, 30, 99).unwrap();
        let b = sample_hypotheses(&pts, 30, 99).unwrap();
        assert_eq!(a.hypotheses, b.hypotheses);
        let c = sample_hypotheses(&pts, 30, 100).unwrap();
        assert_ne!(a.hypotheses, c.hypotheses);
    }

    #[test]
    fn fused_search_matches_two_step() {
        let ys: Vec<f64> = (0..60).map(|i| ((i * 53) % 17) as f64 * 0.3).collect();
        let pts = line_points(&ys);
        let batch = sample_hypotheses(&pts, 40, 5).unwrap();
        let two_step = select_best(&pts, &batch.hypotheses, 10).unwrap();
        let (fused, _) = search(&pts, 40, 5, 10).unwrap();
        assert_eq!(fused, two_step);
    }

    #[test]
    fn all_degenerate_is_sampling_failure() {
        let pts = LiftedPoints::new(ModelKind::Line2d, &vec![InputPoint::new(vec![1.0, 1.0]); 6]).unwrap();
        assert!(matches!(
            sample_hypotheses(&pts, 3, 0),
            Err(MisreError::SamplingFailure { reason: RejectReason::Degenerate, .. })
        ));
    }
}
