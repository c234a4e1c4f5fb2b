//! The extract-and-remove loop producing strength-ordered structures.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{MisreError, Result};
use crate::hypothesis::{initial_set_size, search, RejectionCounts};
use crate::mode::{classify_inliers, refine, tls_refit, InlierRule};
use crate::model::{
    denormalize_structure, normalize_points, to_geometric_near, GeometricParams, InputPoint, LiftedPoints, ModelKind,
    NormalizationTransform,
};
use crate::scale::{estimate_scale, ScaleEstimate};

pub const SCHEMA_VERSION: u32 = 1;
/// Scales at or below this are treated as exact fits.
pub const SIGMA_FLOOR: f64 = 1e-9;
/// Lower bound on the working scale in normalized units.
const MIN_WORKING_SCALE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationConfig {
    pub model: ModelKind,
    /// `M`, the number of random elemental subsets per iteration.
    pub trials: usize,
    /// `ε`, percent of the remaining points forming the initial set.
    pub epsilon: f64,
    pub seed: u64,
    pub inlier_rule: InlierRule,
    /// Normalize coordinates before estimation.
    pub normalize: bool,
}

impl EstimationConfig {
    pub fn new(model: ModelKind) -> Self {
        EstimationConfig {
            model,
            trials: 1000,
            epsilon: 5.0,
            seed: 0,
            inlier_rule: InlierRule::Trajectory,
            normalize: true,
        }
    }

    pub fn trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn inlier_rule(mut self, rule: InlierRule) -> Self {
        self.inlier_rule = rule;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(MisreError::InvalidConfig("the number of trials must be at least 1".into()));
        }
        if !(1.0..=20.0).contains(&self.epsilon) {
            return Err(MisreError::InvalidConfig(format!(
                "epsilon must lie in [1, 20] percent, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    /// `N = max(1, ⌊M/10⌋)`.
    pub fn refinement_trials(&self) -> usize {
        (self.trials / 10).max(1)
    }
}

/// A recovered structure, in source units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Structure {
    /// 1-based position in strength order.
    pub rank: usize,
    /// 0-based iteration that extracted it.
    pub extraction: usize,
    pub model: ModelKind,
    pub strength: f64,
    /// `σ̂^tls`, the largest inlier distance under the refit.
    pub scale: f64,
    /// Scale found by the expansion criterion.
    pub sigma_hat: f64,
    pub n_in: usize,
    pub theta: Vec<f64>,
    pub alpha: f64,
    pub geometry: Option<GeometricParams>,
    /// The refit scale hit the floor.
    pub exact: bool,
    /// The refit was rejected and the mean-shift estimate kept.
    pub tls_fallback: bool,
    pub inliers: Vec<usize>,
}

/// What happened in one pass of the loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "outcome")]
pub enum IterationOutcome {
    Structure,
    /// No point converged into the band; the initial set was discarded.
    EmptyStructure,
    SamplingFailure { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub iteration: usize,
    pub remaining: usize,
    pub n_eps: usize,
    pub score: Option<f64>,
    /// In normalized units.
    pub scale: Option<ScaleEstimate>,
    pub rejections: RejectionCounts,
    pub refinement_failure: Option<String>,
    pub removed: usize,
    pub outcome: IterationOutcome,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Timings {
    pub total: Duration,
    pub iterations: Vec<Duration>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub schema_version: u32,
    pub model: ModelKind,
    pub n_points: usize,
    pub config: EstimationConfig,
    pub normalization: NormalizationTransform,
    pub structures: Vec<Structure>,
    /// Points not claimed by any structure.
    pub residual: Vec<usize>,
    pub iterations: Vec<IterationReport>,
    #[serde(skip)]
    pub timings: Timings,
}

/// Mean of the selected points when they are 3D.
pub(crate) fn centroid3(points: &[InputPoint], indices: &[usize]) -> Option<[f64; 3]> {
    if indices.is_empty() || points[indices[0]].y.len() != 3 {
        return None;
    }
    let mut c = [0.0; 3];
    for &i in indices {
        for (k, v) in c.iter_mut().enumerate() {
            *v += points[i].y[k];
        }
    }
    Some(c.map(|v| v / indices.len() as f64))
}

/// `s = n_in / σ`, with `σ` floored; the flag marks floored scales.
pub fn strength(n_in: usize, sigma: f64) -> (f64, bool) {
    if sigma <= SIGMA_FLOOR {
        (n_in as f64 / SIGMA_FLOOR, true)
    } else {
        (n_in as f64 / sigma, false)
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of stage `stage` in iteration `iteration`.
pub fn derive_seed(seed: u64, iteration: usize, stage: u64) -> u64 {
    splitmix(splitmix(seed ^ splitmix(iteration as u64)) ^ stage)
}

/// Structure found in one pass, in normalized units and local indices.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub inliers: Vec<usize>,
    pub initial_set: Vec<usize>,
    pub theta: Vec<f64>,
    pub alpha: f64,
    pub sigma_tls: f64,
    pub sigma_hat: f64,
    pub tls_fallback: bool,
    pub report: IterationReport,
}

/// One full pass over the remaining (normalized) points. `None` means the
/// loop should terminate.
pub fn extract_structure(points: &LiftedPoints, config: &EstimationConfig, iteration: usize) -> Option<Extraction> {
    let n = points.len();
    let m_e = points.spec().elemental_size;
    let n_eps = initial_set_size(n, config.epsilon, m_e);
    if n < n_eps {
        return None;
    }
    let mut report = IterationReport {
        iteration,
        remaining: n,
        n_eps,
        score: None,
        scale: None,
        rejections: RejectionCounts::default(),
        refinement_failure: None,
        removed: 0,
        outcome: IterationOutcome::Structure,
    };
    let (winner, rejections) = match search(points, config.trials, derive_seed(config.seed, iteration, 1), n_eps) {
        Ok(found) => found,
        Err(e) => {
            report.outcome = IterationOutcome::SamplingFailure { message: e.to_string() };
            return Some(Extraction {
                inliers: vec![],
                initial_set: vec![],
                theta: vec![],
                alpha: 0.0,
                sigma_tls: 0.0,
                sigma_hat: 0.0,
                tls_fallback: false,
                report,
            });
        }
    };
    report.rejections = rejections;
    report.score = Some(winner.score);
    let initial_set = winner.initial_set(n_eps);
    let scale = estimate_scale(&winner.sorted_distances(), config.epsilon, n_eps)
        .expect("winner sequence covers the initial set");
    let sigma_hat = scale.sigma.max(MIN_WORKING_SCALE);
    report.scale = Some(scale);

    let (theta, alpha) = match refine(
        points,
        &winner,
        sigma_hat,
        config.refinement_trials(),
        derive_seed(config.seed, iteration, 2),
    ) {
        Ok(r) => (r.theta, r.alpha),
        Err(e) => {
            report.refinement_failure = Some(e.to_string());
            (winner.hypothesis.theta.clone(), winner.hypothesis.alpha)
        }
    };
    let inliers = classify_inliers(points, &theta, alpha, sigma_hat, config.inlier_rule);
    if inliers.is_empty() {
        report.outcome = IterationOutcome::EmptyStructure;
        report.removed = initial_set.len();
        return Some(Extraction {
            inliers,
            initial_set,
            theta,
            alpha,
            sigma_tls: 0.0,
            sigma_hat,
            tls_fallback: false,
            report,
        });
    }
    let fit = tls_refit(points, &inliers, &theta, alpha);
    report.removed = inliers.len();
    Some(Extraction {
        inliers,
        initial_set,
        theta: fit.theta,
        alpha: fit.alpha,
        sigma_tls: fit.sigma,
        sigma_hat,
        tls_fallback: fit.fallback,
        report,
    })
}

/// Runs the estimator on `points` until too few remain.
pub fn run(points: &[InputPoint], config: &EstimationConfig) -> Result<EstimationResult> {
    let start = Instant::now();
    config.validate()?;
    let spec = config.model.spec();
    let n = points.len();
    let n_eps = initial_set_size(n, config.epsilon, spec.elemental_size);
    if n < n_eps {
        return Err(MisreError::InvalidInput(format!(
            "{n} points given, at least {n_eps} needed for {}",
            config.model
        )));
    }
    let (normalized, transform) = if config.normalize {
        normalize_points(&spec, points)?
    } else {
        if let Some(p) = points.iter().find(|p| p.y.len() != spec.input_dim) {
            return Err(MisreError::InvalidInput(format!(
                "{} expects {} coordinates per point, got {}",
                config.model,
                spec.input_dim,
                p.y.len()
            )));
        }
        (points.to_vec(), NormalizationTransform::identity(config.model))
    };
    let all = LiftedPoints::new(config.model, &normalized)?;
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut structures = Vec::new();
    let mut reports = Vec::new();
    let mut timings = Timings::default();

    for iteration in 0.. {
        let t0 = Instant::now();
        let working = all.select(&remaining);
        let Some(ex) = extract_structure(&working, config, iteration) else { break };
        let outcome = ex.report.outcome.clone();
        reports.push(ex.report);
        timings.iterations.push(t0.elapsed());
        let local_removed = match outcome {
            IterationOutcome::SamplingFailure { .. } => break,
            IterationOutcome::EmptyStructure => ex.initial_set,
            IterationOutcome::Structure => {
                let (theta, alpha, scale) =
                    denormalize_structure(&spec, &ex.theta, ex.alpha, ex.sigma_tls, &transform)?;
                let sigma_hat = ex.sigma_hat / transform.scale_factor();
                let (s, exact) = strength(ex.inliers.len(), scale);
                let inliers: Vec<usize> = ex.inliers.iter().map(|&i| remaining[i]).collect();
                structures.push(Structure {
                    rank: 0,
                    extraction: iteration,
                    model: config.model,
                    strength: s,
                    scale: scale.max(SIGMA_FLOOR),
                    sigma_hat,
                    n_in: inliers.len(),
                    geometry: to_geometric_near(config.model, &theta, alpha, centroid3(points, &inliers)).ok(),
                    theta,
                    alpha,
                    exact,
                    tls_fallback: ex.tls_fallback,
                    inliers,
                });
                ex.inliers
            }
        };
        let mut drop = vec![false; remaining.len()];
        for i in local_removed {
            drop[i] = true;
        }
        let mut k = 0;
        remaining.retain(|_| {
            k += 1;
            !drop[k - 1]
        });
    }

    structures.sort_by(|a, b| {
        b.strength
            .total_cmp(&a.strength)
            .then(b.n_in.cmp(&a.n_in))
            .then(a.extraction.cmp(&b.extraction))
    });
    for (r, s) in structures.iter_mut().enumerate() {
        s.rank = r + 1;
    }
    let mut claimed = vec![false; n];
    for s in &structures {
        for &i in &s.inliers {
            claimed[i] = true;
        }
    }
    let residual = (0..n).filter(|&i| !claimed[i]).collect();
    timings.total = start.elapsed();
    Ok(EstimationResult {
        schema_version: SCHEMA_VERSION,
        model: config.model,
        n_points: n,
        config: config.clone(),
        normalization: transform,
        structures,
        residual,
        iterations: reports,
        timings,
    })
}
