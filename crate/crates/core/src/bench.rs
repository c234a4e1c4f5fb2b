//! Repeated generate-and-fit benchmarks against planted ground truth.

use std::fmt::Write as _;
use std::time::Instant;

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{generate, LabeledDataset, ScenarioSpec, Shape};
use crate::error::Result;
use crate::hypothesis::sample_from;
use crate::mode::InlierRule;
use crate::model::{denormalize_structure, normalize_points, to_geometric_near, GeometricParams, LiftedPoints};
use crate::pipeline::{centroid3, derive_seed, run, EstimationConfig, EstimationResult};

/// Normal error bound for lines and planes, degrees.
pub const LINEAR_ANGLE_BOUND: f64 = 3.0;
/// Relative center and axis error bound for ellipses and spheres.
pub const QUADRIC_RELATIVE_BOUND: f64 = 0.10;
/// Axis error bound for cylinders, degrees.
pub const CYLINDER_ANGLE_BOUND: f64 = 5.0;
/// Minimum share of a structure's inliers drawn from the planted model.
pub const MIN_PURITY: f64 = 0.5;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchConfig {
    pub scenario: ScenarioSpec,
    pub repeats: usize,
    pub trials: usize,
    pub epsilon: f64,
    pub seed: u64,
    /// Inlier threshold of the RANSAC baseline, in input units; no baseline
    /// when absent.
    pub ransac_threshold: Option<f64>,
    pub inlier_rule: InlierRule,
}

impl BenchConfig {
    pub fn new(scenario: ScenarioSpec, repeats: usize, trials: usize) -> Self {
        BenchConfig { scenario, repeats, trials, epsilon: 5.0, seed: 0, ransac_threshold: None, inlier_rule: InlierRule::default() }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn inlier_rule(mut self, rule: InlierRule) -> Self {
        self.inlier_rule = rule;
        self
    }

    pub fn baseline(mut self, threshold: f64) -> Self {
        self.ransac_threshold = Some(threshold);
        self
    }
}

/// A returned structure, reduced to what matching needs.
#[derive(Debug, Clone, Copy)]
pub struct Candidate<'a> {
    pub inliers: &'a [usize],
    pub geometry: Option<&'a GeometricParams>,
}

/// A planted model matched by a returned structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Match {
    pub rank: usize,
    pub scale: f64,
    pub sigma_hat: f64,
    pub n_in: usize,
    pub strength: f64,
    pub purity: f64,
    /// Largest parameter error: degrees for normals and axes, relative for
    /// centers and sizes, zero for two-view models.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub repetition: usize,
    pub data_seed: u64,
    pub fit_seed: u64,
    /// Indexed by planted model.
    pub matches: Vec<Option<Match>>,
    /// Strengths of structures made mostly of outliers.
    pub outlier_strengths: Vec<f64>,
    pub n_structures: usize,
    pub wall_time: f64,
    /// Recovery by the baseline, indexed by planted model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<Vec<bool>>,
}

impl RunRecord {
    pub fn recovered(&self, labels: &[usize]) -> bool {
        labels.iter().all(|&j| self.matches[j].is_some())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelStats {
    pub label: usize,
    pub model: String,
    pub n_in: usize,
    pub sigma: f64,
    pub successes: usize,
    pub scale_mean: f64,
    pub scale_std: f64,
    pub sigma_hat_mean: f64,
    pub sigma_hat_std: f64,
    pub inliers_mean: f64,
    pub inliers_std: f64,
    pub strength_mean: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline_successes: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub scenario: String,
    pub repeats: usize,
    pub trials: usize,
    pub seed: u64,
    pub models: Vec<ModelStats>,
    /// Runs recovering every planted model.
    pub all_recovered: usize,
    pub mean_wall_time: f64,
    pub runs: Vec<RunRecord>,
}

impl BenchReport {
    /// Number of runs recovering every model in `labels`.
    pub fn recovered_count(&self, labels: &[usize]) -> usize {
        self.runs.iter().filter(|r| r.recovered(labels)).count()
    }

    /// Pairs `(ground-truth strength, outlier strength)` that violate the
    /// expected ordering, over runs recovering every planted model.
    pub fn ordering_violations(&self) -> Vec<(usize, f64, f64)> {
        let mut out = Vec::new();
        for run in self.runs.iter().filter(|r| r.matches.iter().all(Option::is_some)) {
            let weakest = run.matches.iter().flatten().map(|m| m.strength).fold(f64::INFINITY, f64::min);
            for &o in &run.outlier_strengths {
                if o >= weakest {
                    out.push((run.repetition, weakest, o));
                }
            }
        }
        out
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Per-model statistics over successful runs only.
pub fn summarize(spec: &ScenarioSpec, runs: &[RunRecord]) -> Vec<ModelStats> {
    spec.models
        .iter()
        .enumerate()
        .map(|(j, planted)| {
            let hits: Vec<&Match> = runs.iter().filter_map(|r| r.matches[j].as_ref()).collect();
            let col = |f: fn(&Match) -> f64| mean_std(&hits.iter().map(|m| f(m)).collect::<Vec<_>>());
            let (scale_mean, scale_std) = col(|m| m.scale);
            let (sigma_hat_mean, sigma_hat_std) = col(|m| m.sigma_hat);
            let (inliers_mean, inliers_std) = col(|m| m.n_in as f64);
            let (strength_mean, _) = col(|m| m.strength);
            let baseline_successes = runs
                .iter()
                .map(|r| r.baseline.as_ref().map(|b| b[j] as usize))
                .sum::<Option<usize>>()
                .filter(|_| !runs.is_empty());
            ModelStats {
                label: j,
                model: planted.shape.kind().name().to_string(),
                n_in: planted.n_in,
                sigma: planted.sigma,
                successes: hits.len(),
                scale_mean,
                scale_std,
                sigma_hat_mean,
                sigma_hat_std,
                inliers_mean,
                inliers_std,
                strength_mean,
                baseline_successes,
            }
        })
        .collect()
}

fn angle_deg(a: Vector3<f64>, b: Vector3<f64>) -> f64 {
    let c = (a.dot(&b).abs() / (a.norm() * b.norm())).min(1.0);
    c.acos().to_degrees()
}

fn v3(a: &[f64; 3]) -> Vector3<f64> {
    Vector3::new(a[0], a[1], a[2])
}

/// Parameter error of `geometry` against `shape` and whether it is within
/// the per-model bound.
pub fn parameter_error(shape: &Shape, geometry: Option<&GeometricParams>) -> Option<(f64, bool)> {
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    match (shape, geometry) {
        (Shape::Segment { from, to }, Some(GeometricParams::Line { normal, .. })) => {
            let n0 = Vector3::new(from[1] - to[1], to[0] - from[0], 0.0);
            let e = angle_deg(n0, Vector3::new(normal[0], normal[1], 0.0));
            Some((e, e <= LINEAR_ANGLE_BOUND))
        }
        (Shape::PlanePatch { u, v, .. }, Some(GeometricParams::Plane { normal, .. })) => {
            let e = angle_deg(v3(u).cross(&v3(v)), v3(normal));
            Some((e, e <= LINEAR_ANGLE_BOUND))
        }
        (
            Shape::Ellipse { center, semi_major, semi_minor, .. },
            Some(GeometricParams::Ellipse { center: c, semi_major: a, semi_minor: b, .. }),
        ) => {
            let dc = (c[0] - center[0]).hypot(c[1] - center[1]) / semi_major;
            let e = dc.max(rel(*a, *semi_major)).max(rel(*b, *semi_minor));
            Some((e, e <= QUADRIC_RELATIVE_BOUND))
        }
        (Shape::Sphere { center, radius }, Some(GeometricParams::Sphere { center: c, radius: r })) => {
            let e = ((v3(c) - v3(center)).norm() / radius).max(rel(*r, *radius));
            Some((e, e <= QUADRIC_RELATIVE_BOUND))
        }
        (
            Shape::Cylinder { base, direction, radius, .. },
            Some(GeometricParams::Cylinder { point, direction: d, radius: r }),
        ) => {
            let axis = angle_deg(v3(direction), v3(d));
            let offset = v3(point) - v3(base);
            let dir = v3(direction).normalize();
            let dist = (offset - dir * offset.dot(&dir)).norm() / radius;
            let size = rel(*r, *radius).max(dist);
            Some((axis.max(100.0 * size), axis <= CYLINDER_ANGLE_BOUND && size <= QUADRIC_RELATIVE_BOUND))
        }
        (Shape::RigidMotion { .. } | Shape::Homography { .. }, _) => Some((0.0, true)),
        _ => None,
    }
}

/// Share of `inliers` carrying each label: `(purity toward label, count)`.
fn label_share(labels: &[i64], inliers: &[usize], label: i64) -> (f64, usize) {
    if inliers.is_empty() {
        return (0.0, 0);
    }
    let k = inliers.iter().filter(|&&i| labels[i] == label).count();
    (k as f64 / inliers.len() as f64, k)
}

/// For each planted model, the index of the candidate recovering it: purity
/// at least [`MIN_PURITY`] and parameters within bounds, largest overlap
/// first.
pub fn match_candidates(
    spec: &ScenarioSpec,
    labels: &[i64],
    candidates: &[Candidate<'_>],
) -> Vec<Option<(usize, f64, f64)>> {
    spec.models
        .iter()
        .enumerate()
        .map(|(j, planted)| {
            candidates
                .iter()
                .enumerate()
                .filter_map(|(k, c)| {
                    let (purity, overlap) = label_share(labels, c.inliers, j as i64);
                    if purity < MIN_PURITY {
                        return None;
                    }
                    let (error, ok) = parameter_error(&planted.shape, c.geometry)?;
                    ok.then_some((k, purity, error, overlap))
                })
                .max_by(|a, b| a.3.cmp(&b.3).then(b.0.cmp(&a.0)))
                .map(|(k, purity, error, _)| (k, purity, error))
        })
        .collect()
}

/// Evaluates one estimation result against the labeled dataset.
pub fn evaluate(data: &LabeledDataset, result: &EstimationResult) -> (Vec<Option<Match>>, Vec<f64>) {
    let candidates: Vec<Candidate<'_>> = result
        .structures
        .iter()
        .map(|s| Candidate { inliers: &s.inliers, geometry: s.geometry.as_ref() })
        .collect();
    let matched = match_candidates(&data.spec, &data.labels, &candidates);
    let matches = matched
        .iter()
        .map(|m| {
            m.map(|(k, purity, error)| {
                let s = &result.structures[k];
                Match {
                    rank: s.rank,
                    scale: s.scale,
                    sigma_hat: s.sigma_hat,
                    n_in: s.n_in,
                    strength: s.strength,
                    purity,
                    error,
                }
            })
        })
        .collect();
    let outlier_strengths = result
        .structures
        .iter()
        .enumerate()
        .filter(|(k, s)| {
            matched.iter().all(|m| m.map(|(c, ..)| c) != Some(*k))
                && label_share(&data.labels, &s.inliers, -1).0 >= MIN_PURITY
        })
        .map(|(_, s)| s.strength)
        .collect();
    (matches, outlier_strengths)
}

/// A structure found by the baseline.
#[derive(Debug, Clone)]
pub struct BaselineStructure {
    pub inliers: Vec<usize>,
    pub geometry: Option<GeometricParams>,
}

/// Sequential RANSAC with a fixed inlier threshold in input units: the
/// hypothesis with most points within `threshold` is kept, its inliers are
/// removed, and the search repeats until fewer than `min_support` points
/// agree or `max_structures` are found.
pub fn ransac_baseline(
    data: &LabeledDataset,
    trials: usize,
    threshold: f64,
    seed: u64,
    max_structures: usize,
) -> Result<Vec<BaselineStructure>> {
    let kind = data.spec.model;
    let spec = kind.spec();
    let (normalized, transform) = normalize_points(&spec, &data.points)?;
    let points = LiftedPoints::new(kind, &normalized)?;
    let t = threshold * transform.scale_factor();
    let min_support = (2 * spec.elemental_size).max(10);
    let mut remaining: Vec<usize> = (0..points.len()).collect();
    let mut found = Vec::new();
    while found.len() < max_structures && remaining.len() >= min_support {
        let Ok(batch) = sample_from(&points, &remaining, trials, derive_seed(seed, found.len(), 1)) else { break };
        let best = batch
            .hypotheses
            .par_iter()
            .map(|h| {
                let support: Vec<usize> =
                    remaining.iter().copied().filter(|&i| points.distance(i, &h.theta, h.alpha) <= t).collect();
                (support, h)
            })
            .max_by(|a, b| a.0.len().cmp(&b.0.len()).then(b.1.index.cmp(&a.1.index)));
        let Some((support, h)) = best else { break };
        if support.len() < min_support {
            break;
        }
        let (theta, alpha, _) = denormalize_structure(&spec, &h.theta, h.alpha, 0.0, &transform)?;
        let mut claimed = vec![false; points.len()];
        for &i in &support {
            claimed[i] = true;
        }
        remaining.retain(|&i| !claimed[i]);
        found.push(BaselineStructure { geometry: to_geometric_near(kind, &theta, alpha, centroid3(&data.points, &support)).ok(), inliers: support });
    }
    Ok(found)
}

fn run_once(config: &BenchConfig, repetition: usize) -> Result<RunRecord> {
    let data_seed = derive_seed(config.seed, repetition, 10);
    let fit_seed = derive_seed(config.seed, repetition, 11);
    let data = generate(&config.scenario.clone().with_seed(data_seed))?;
    let est = EstimationConfig::new(config.scenario.model).trials(config.trials).epsilon(config.epsilon).seed(fit_seed).inlier_rule(config.inlier_rule);
    let start = Instant::now();
    let result = run(&data.points, &est)?;
    let wall_time = start.elapsed().as_secs_f64();
    let (matches, outlier_strengths) = evaluate(&data, &result);
    let baseline = match config.ransac_threshold {
        Some(t) => {
            let found = ransac_baseline(&data, config.trials, t, fit_seed, config.scenario.models.len() + 2)?;
            let candidates: Vec<Candidate<'_>> =
                found.iter().map(|s| Candidate { inliers: &s.inliers, geometry: s.geometry.as_ref() }).collect();
            Some(match_candidates(&data.spec, &data.labels, &candidates).iter().map(Option::is_some).collect())
        }
        None => None,
    };
    Ok(RunRecord {
        repetition,
        data_seed,
        fit_seed,
        matches,
        outlier_strengths,
        n_structures: result.structures.len(),
        wall_time,
        baseline,
    })
}

/// Runs `repeats` independent generate-and-fit cycles. Repetitions run in
/// parallel on their own seeds, so the report matches a sequential run.
pub fn run_bench(config: &BenchConfig) -> Result<BenchReport> {
    config.scenario.validate()?;
    let runs: Vec<RunRecord> =
        (0..config.repeats).into_par_iter().map(|r| run_once(config, r)).collect::<Result<_>>()?;
    let all: Vec<usize> = (0..config.scenario.models.len()).collect();
    let mean_wall_time = if runs.is_empty() {
        0.0
    } else {
        runs.iter().map(|r| r.wall_time).sum::<f64>() / runs.len() as f64
    };
    Ok(BenchReport {
        scenario: config.scenario.name.clone(),
        repeats: config.repeats,
        trials: config.trials,
        seed: config.seed,
        models: summarize(&config.scenario, &runs),
        all_recovered: runs.iter().filter(|r| r.recovered(&all)).count(),
        mean_wall_time,
        runs,
    })
}

/// Human-readable summary table.
pub fn format_report(report: &BenchReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{}: {} runs, M = {}, seed {}",
        report.scenario, report.repeats, report.trials, report.seed
    );
    let _ = writeln!(
        out,
        "{:>5}  {:>10}  {:>5}  {:>6}  {:>9}  {:>16}  {:>16}  {:>16}  {:>9}",
        "model", "type", "σ_g", "found", "baseline", "scale", "σ̂", "inliers", "strength"
    );
    for m in &report.models {
        let baseline = m.baseline_successes.map_or("-".to_string(), |b| format!("{b}/{}", report.repeats));
        let _ = writeln!(
            out,
            "{:>5}  {:>10}  {:>5}  {:>6}  {:>9}  {:>16}  {:>16}  {:>16}  {:>9.2}",
            m.label + 1,
            m.model,
            m.sigma,
            format!("{}/{}", m.successes, report.repeats),
            baseline,
            format!("{:.2} ± {:.2}", m.scale_mean, m.scale_std),
            format!("{:.2} ± {:.2}", m.sigma_hat_mean, m.sigma_hat_std),
            format!("{:.1} ± {:.1}", m.inliers_mean, m.inliers_std),
            m.strength_mean
        );
    }
    let _ = writeln!(out, "all recovered: {}/{}", report.all_recovered, report.repeats);
    let _ = writeln!(out, "mean wall time: {:.3} s", report.mean_wall_time);
    out
}
