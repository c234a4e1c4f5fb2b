use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Rotation3, Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, UnitSphere};
use serde::{Deserialize, Serialize};

use crate::error::{MisreError, Result};
use crate::model::{InputPoint, ModelKind};

/// Axis-aligned box containing the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Region {
    pub fn square(side: f64) -> Self {
        Region { min: vec![0.0, 0.0], max: vec![side, side] }
    }

    pub fn cube(side: f64) -> Self {
        Region { min: vec![0.0; 3], max: vec![side; 3] }
    }

    /// Both images of a correspondence share the same `w × h` frame.
    pub fn image_pair(width: f64, height: f64) -> Self {
        Region { min: vec![0.0; 4], max: vec![width, height, width, height] }
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    fn contains(&self, p: &[f64]) -> bool {
        p.iter().zip(self.min.iter().zip(&self.max)).all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }
}

/// Exact locus a planted structure is sampled from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Shape {
    /// 2D line segment.
    Segment { from: [f64; 2], to: [f64; 2] },
    /// Parallelogram `origin + s·u + t·v`, `s, t ∈ [0, 1]`.
    PlanePatch { origin: [f64; 3], u: [f64; 3], v: [f64; 3] },
    /// `angle` is the direction of the major axis in radians.
    Ellipse { center: [f64; 2], semi_major: f64, semi_minor: f64, angle: f64 },
    Sphere { center: [f64; 3], radius: f64 },
    /// Finite cylinder starting at `base` and extending `length` along the
    /// unit `direction`.
    Cylinder { base: [f64; 3], direction: [f64; 3], radius: f64, length: f64 },
    /// Correspondences `x' ≃ H x` with `x` uniform in `[source_min, source_max]`.
    Homography { matrix: [[f64; 3]; 3], source_min: [f64; 2], source_max: [f64; 2] },
    /// A rigid object seen by two pinhole cameras `K[I|0]` and `K[R|t]`.
    /// First-image pixels are uniform in the region and depths uniform in
    /// `[depth_min, depth_max]`; `rotation` is an axis-angle vector.
    RigidMotion {
        focal: f64,
        principal: [f64; 2],
        rotation: [f64; 3],
        translation: [f64; 3],
        depth_min: f64,
        depth_max: f64,
    },
}

impl Shape {
    pub fn kind(&self) -> ModelKind {
        match self {
            Shape::Segment { .. } => ModelKind::Line2d,
            Shape::PlanePatch { .. } => ModelKind::Plane3d,
            Shape::Ellipse { .. } => ModelKind::Ellipse2d,
            Shape::Sphere { .. } => ModelKind::Sphere3d,
            Shape::Cylinder { .. } => ModelKind::Cylinder3d,
            Shape::Homography { .. } => ModelKind::Homography,
            Shape::RigidMotion { .. } => ModelKind::Fundamental,
        }
    }

    /// Bounding box corners of the exact locus, where meaningful.
    fn extent(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match self {
            Shape::Segment { from, to } => Some((
                vec![from[0].min(to[0]), from[1].min(to[1])],
                vec![from[0].max(to[0]), from[1].max(to[1])],
            )),
            Shape::PlanePatch { origin, u, v } => {
                let corners: Vec<[f64; 3]> = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]
                    .iter()
                    .map(|&(s, t)| [0, 1, 2].map(|k| origin[k] + s * u[k] + t * v[k]))
                    .collect();
                let lo = (0..3).map(|k| corners.iter().map(|c| c[k]).fold(f64::INFINITY, f64::min)).collect();
                let hi = (0..3).map(|k| corners.iter().map(|c| c[k]).fold(f64::NEG_INFINITY, f64::max)).collect();
                Some((lo, hi))
            }
            Shape::Ellipse { center, semi_major: a, semi_minor: b, angle } => {
                let (s, c) = angle.sin_cos();
                let hx = ((a * c).powi(2) + (b * s).powi(2)).sqrt();
                let hy = ((a * s).powi(2) + (b * c).powi(2)).sqrt();
                Some((vec![center[0] - hx, center[1] - hy], vec![center[0] + hx, center[1] + hy]))
            }
            Shape::Sphere { center, radius } => {
                Some((center.iter().map(|c| c - radius).collect(), center.iter().map(|c| c + radius).collect()))
            }
            Shape::Cylinder { base, direction, radius, length } => {
                let top: Vec<f64> = (0..3).map(|k| base[k] + length * direction[k]).collect();
                let lo = (0..3)
                    .map(|k| base[k].min(top[k]) - radius * (1.0 - direction[k] * direction[k]).max(0.0).sqrt())
                    .collect();
                let hi = (0..3)
                    .map(|k| base[k].max(top[k]) + radius * (1.0 - direction[k] * direction[k]).max(0.0).sqrt())
                    .collect();
                Some((lo, hi))
            }
            Shape::Homography { .. } | Shape::RigidMotion { .. } => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(MisreError::InvalidInput(msg.to_string()));
        match self {
            Shape::Segment { from, to } if from == to => bad("segment endpoints coincide"),
            Shape::Ellipse { semi_major, semi_minor, .. } if !(*semi_minor > 0.0 && semi_major >= semi_minor) => {
                bad("ellipse needs semi_major ≥ semi_minor > 0")
            }
            Shape::Sphere { radius, .. } if !(*radius > 0.0) => bad("sphere radius must be positive"),
            Shape::Cylinder { radius, length, direction, .. } => {
                let n = Vector3::from(*direction).norm();
                if !(*radius > 0.0 && *length > 0.0) || (n - 1.0).abs() > 1e-9 {
                    bad("cylinder needs positive radius and length and a unit direction")
                } else {
                    Ok(())
                }
            }
            Shape::RigidMotion { focal, depth_min, depth_max, .. }
                if !(*focal > 0.0 && *depth_min > 0.0 && depth_max > depth_min) =>
            {
                bad("rigid motion needs a positive focal length and depth range")
            }
            _ => Ok(()),
        }
    }
}

/// How inliers are perturbed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    /// Isotropic for lines, planes and correspondences; along the locus
    /// normal for curves and surfaces.
    #[default]
    Auto,
    Isotropic,
    Normal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedModel {
    pub shape: Shape,
    pub n_in: usize,
    /// Standard deviation of the inlier perturbation, in source units.
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub model: ModelKind,
    pub region: Region,
    pub models: Vec<PlantedModel>,
    pub n_out: usize,
    pub seed: u64,
    #[serde(default)]
    pub noise: NoiseModel,
}

impl ScenarioSpec {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn n_points(&self) -> usize {
        self.models.iter().map(|m| m.n_in).sum::<usize>() + self.n_out
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.model.spec().input_dim;
        if self.region.min.len() != l || self.region.max.len() != l {
            return Err(MisreError::InvalidInput(format!("{} needs a {l}-dimensional region", self.model)));
        }
        if self.region.min.iter().zip(&self.region.max).any(|(a, b)| !(a < b)) {
            return Err(MisreError::InvalidInput("region is empty".into()));
        }
        for (i, m) in self.models.iter().enumerate() {
            if m.shape.kind() != self.model {
                return Err(MisreError::InvalidInput(format!(
                    "planted model {i} is a {}, scenario is {}",
                    m.shape.kind(),
                    self.model
                )));
            }
            if !(m.sigma >= 0.0) {
                return Err(MisreError::InvalidInput(format!("planted model {i} has negative noise")));
            }
            m.shape.validate()?;
            if let Some((lo, hi)) = m.shape.extent() {
                if !self.region.contains(&lo) || !self.region.contains(&hi) {
                    return Err(MisreError::InvalidInput(format!(
                        "planted model {i} does not fit inside the region"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Points with their ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub points: Vec<InputPoint>,
    /// Planted model index per point, `-1` for outliers.
    pub labels: Vec<i64>,
    pub spec: ScenarioSpec,
}

impl LabeledDataset {
    pub fn coordinates(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| p.y.clone()).collect()
    }

    /// Number of points carrying `label`.
    pub fn count(&self, label: i64) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }
}

fn unit_perp(d: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let helper = if d.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let e1 = d.cross(&helper).normalize();
    let e2 = d.cross(&e1);
    (e1, e2)
}

fn project(k: &Matrix3<f64>, p: &Vector3<f64>) -> [f64; 2] {
    let x = k * p;
    [x.x / x.z, x.y / x.z]
}

/// Fundamental matrix of a [`Shape::RigidMotion`], `x'ᵀ F x = 0`.
pub fn rigid_motion_fundamental(focal: f64, principal: [f64; 2], rotation: [f64; 3], translation: [f64; 3]) -> Matrix3<f64> {
    let k = Matrix3::new(focal, 0.0, principal[0], 0.0, focal, principal[1], 0.0, 0.0, 1.0);
    let k_inv = k.try_inverse().expect("focal length is positive");
    let r = Rotation3::from_scaled_axis(Vector3::from(rotation));
    let t = Vector3::from(translation);
    let tx = t.cross_matrix();
    k_inv.transpose() * tx * r.matrix() * k_inv
}

struct Sampler<'a> {
    rng: ChaCha8Rng,
    region: &'a Region,
    noise: NoiseModel,
}

impl Sampler<'_> {
    fn gauss(&mut self, sigma: f64) -> f64 {
        if sigma == 0.0 {
            return 0.0;
        }
        Normal::new(0.0, sigma).expect("finite sigma").sample(&mut self.rng)
    }

    fn along_normal(&self) -> bool {
        self.noise != NoiseModel::Isotropic
    }

    fn isotropic(&mut self, p: &mut [f64], sigma: f64) {
        for v in p.iter_mut() {
            *v += self.gauss(sigma);
        }
    }

    fn sample(&mut self, shape: &Shape, sigma: f64) -> Vec<f64> {
        match shape {
            Shape::Segment { from, to } => {
                let t: f64 = self.rng.random();
                let mut p = vec![from[0] + t * (to[0] - from[0]), from[1] + t * (to[1] - from[1])];
                if self.noise == NoiseModel::Normal {
                    let d = Vector2::new(to[0] - from[0], to[1] - from[1]).normalize();
                    let e = self.gauss(sigma);
                    p[0] -= e * d.y;
                    p[1] += e * d.x;
                } else {
                    self.isotropic(&mut p, sigma);
                }
                p
            }
            Shape::PlanePatch { origin, u, v } => {
                let (s, t): (f64, f64) = (self.rng.random(), self.rng.random());
                let mut p: Vec<f64> = (0..3).map(|k| origin[k] + s * u[k] + t * v[k]).collect();
                if self.noise == NoiseModel::Normal {
                    let n = Vector3::from(*u).cross(&Vector3::from(*v)).normalize();
                    let e = self.gauss(sigma);
                    (0..3).for_each(|k| p[k] += e * n[k]);
                } else {
                    self.isotropic(&mut p, sigma);
                }
                p
            }
            Shape::Ellipse { center, semi_major: a, semi_minor: b, angle } => {
                let phi = self.rng.random_range(0.0..2.0 * PI);
                let (s, c) = angle.sin_cos();
                let (lx, ly) = (a * phi.cos(), b * phi.sin());
                let mut p = vec![center[0] + c * lx - s * ly, center[1] + s * lx + c * ly];
                if self.along_normal() {
                    let (nx, ny) = (phi.cos() / a, phi.sin() / b);
                    let norm = (nx * nx + ny * ny).sqrt();
                    let (nx, ny) = (nx / norm, ny / norm);
                    let e = self.gauss(sigma);
                    p[0] += e * (c * nx - s * ny);
                    p[1] += e * (s * nx + c * ny);
                } else {
                    self.isotropic(&mut p, sigma);
                }
                p
            }
            Shape::Sphere { center, radius } => {
                let u: [f64; 3] = UnitSphere.sample(&mut self.rng);
                if self.along_normal() {
                    let r = radius + self.gauss(sigma);
                    (0..3).map(|k| center[k] + r * u[k]).collect()
                } else {
                    let mut p: Vec<f64> = (0..3).map(|k| center[k] + radius * u[k]).collect();
                    self.isotropic(&mut p, sigma);
                    p
                }
            }
            Shape::Cylinder { base, direction, radius, length } => {
                let d = Vector3::from(*direction);
                let (e1, e2) = unit_perp(&d);
                let h = self.rng.random_range(0.0..*length);
                let phi = self.rng.random_range(0.0..2.0 * PI);
                let radial = e1 * phi.cos() + e2 * phi.sin();
                let r = if self.along_normal() { radius + self.gauss(sigma) } else { *radius };
                let q = Vector3::from(*base) + d * h + radial * r;
                let mut p = vec![q.x, q.y, q.z];
                if !self.along_normal() {
                    self.isotropic(&mut p, sigma);
                }
                p
            }
            Shape::Homography { matrix, source_min, source_max } => {
                let h = Matrix3::from_row_slice(&matrix.concat());
                let x = self.rng.random_range(source_min[0]..source_max[0]);
                let y = self.rng.random_range(source_min[1]..source_max[1]);
                let q = h * Vector3::new(x, y, 1.0);
                let mut p = vec![x, y, q.x / q.z, q.y / q.z];
                self.isotropic(&mut p, sigma);
                p
            }
            Shape::RigidMotion { focal, principal, rotation, translation, depth_min, depth_max } => {
                let k = Matrix3::new(*focal, 0.0, principal[0], 0.0, *focal, principal[1], 0.0, 0.0, 1.0);
                let k_inv = k.try_inverse().expect("focal length is positive");
                let r = Rotation3::from_scaled_axis(Vector3::from(*rotation));
                let t = Vector3::from(*translation);
                let (lo, hi) = (&self.region.min, &self.region.max);
                // keep drawing until the point is visible in the second image
                for _ in 0..10_000 {
                    let x = self.rng.random_range(lo[0]..hi[0]);
                    let y = self.rng.random_range(lo[1]..hi[1]);
                    let depth = self.rng.random_range(*depth_min..*depth_max);
                    let world = k_inv * Vector3::new(x, y, 1.0) * depth;
                    let moved = r * world + t;
                    if moved.z <= 0.0 {
                        continue;
                    }
                    let xp = project(&k, &moved);
                    if (lo[2]..=hi[2]).contains(&xp[0]) && (lo[3]..=hi[3]).contains(&xp[1]) {
                        let mut p = vec![x, y, xp[0], xp[1]];
                        self.isotropic(&mut p, sigma);
                        return p;
                    }
                }
                let cx = (lo[0] + hi[0]) / 2.0;
                let cy = (lo[1] + hi[1]) / 2.0;
                vec![cx, cy, cx, cy]
            }
        }
    }

    fn outlier(&mut self) -> Vec<f64> {
        let region = self.region;
        region.min.iter().zip(&region.max).map(|(a, b)| self.rng.random_range(*a..*b)).collect()
    }
}

/// Samples the scenario: inliers of each planted model in order, then the
/// outliers. Deterministic in `spec.seed`.
pub fn generate(spec: &ScenarioSpec) -> Result<LabeledDataset> {
    spec.validate()?;
    let mut sampler = Sampler { rng: ChaCha8Rng::seed_from_u64(spec.seed), region: &spec.region, noise: spec.noise };
    let mut points = Vec::with_capacity(spec.n_points());
    let mut labels = Vec::with_capacity(spec.n_points());
    for (label, m) in spec.models.iter().enumerate() {
        for _ in 0..m.n_in {
            points.push(InputPoint::new(sampler.sample(&m.shape, m.sigma)));
            labels.push(label as i64);
        }
    }
    for _ in 0..spec.n_out {
        points.push(InputPoint::new(sampler.outlier()));
        labels.push(-1);
    }
    Ok(LabeledDataset { points, labels, spec: spec.clone() })
}

/// Named scenario recipes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    FiveLines,
    ThreeEllipses,
    TwoEllipses,
    SmallCircle,
    LargeCircle,
    SingleLine,
    ThreePlanes,
    TwoSpheres,
    TwoCylinders,
    TwoMotions,
    TwoPlanesHomography,
}

impl Preset {
    pub const ALL: [Preset; 11] = [
        Preset::FiveLines,
        Preset::ThreeEllipses,
        Preset::TwoEllipses,
        Preset::SmallCircle,
        Preset::LargeCircle,
        Preset::SingleLine,
        Preset::ThreePlanes,
        Preset::TwoSpheres,
        Preset::TwoCylinders,
        Preset::TwoMotions,
        Preset::TwoPlanesHomography,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::FiveLines => "five-lines",
            Preset::ThreeEllipses => "three-ellipses",
            Preset::TwoEllipses => "two-ellipses",
            Preset::SmallCircle => "small-circle",
            Preset::LargeCircle => "large-circle",
            Preset::SingleLine => "single-line",
            Preset::ThreePlanes => "three-planes",
            Preset::TwoSpheres => "two-spheres",
            Preset::TwoCylinders => "two-cylinders",
            Preset::TwoMotions => "two-motions",
            Preset::TwoPlanesHomography => "two-planes-homography",
        }
    }

    /// Trial count used for this preset by the benchmarks.
    pub fn default_trials(self) -> usize {
        match self {
            Preset::FiveLines | Preset::SingleLine | Preset::ThreePlanes => 1000,
            Preset::TwoEllipses => 2000,
            _ => 5000,
        }
    }

    pub fn spec(self, seed: u64) -> ScenarioSpec {
        match self {
            Preset::FiveLines => five_lines(seed),
            Preset::ThreeEllipses => three_ellipses(seed),
            Preset::TwoEllipses => two_ellipses(seed),
            Preset::SmallCircle => circle_limit(50.0, seed),
            Preset::LargeCircle => circle_limit(200.0, seed),
            Preset::SingleLine => single_line(3.0, seed),
            Preset::ThreePlanes => three_planes(seed),
            Preset::TwoSpheres => two_spheres(seed),
            Preset::TwoCylinders => two_cylinders(seed),
            Preset::TwoMotions => two_motions(seed),
            Preset::TwoPlanesHomography => two_planes_homography(seed),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = MisreError;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| MisreError::InvalidInput(format!("unknown scenario '{s}'")))
    }
}

fn line(from: [f64; 2], to: [f64; 2], n_in: usize, sigma: f64) -> PlantedModel {
    PlantedModel { shape: Shape::Segment { from, to }, n_in, sigma }
}

fn ellipse(center: [f64; 2], a: f64, b: f64, angle_deg: f64, n_in: usize, sigma: f64) -> PlantedModel {
    PlantedModel {
        shape: Shape::Ellipse { center, semi_major: a, semi_minor: b, angle: angle_deg.to_radians() },
        n_in,
        sigma,
    }
}

/// Five segments in a 700 × 700 image with 300, 250, 200, 150 and 100
/// inliers at noise 3, 6, 9, 12 and 15, plus 350 outliers.
pub fn five_lines(seed: u64) -> ScenarioSpec {
    ScenarioSpec {
        name: "five-lines".into(),
        model: ModelKind::Line2d,
        region: Region::square(700.0),
        models: vec![
            line([60.0, 110.0], [640.0, 590.0], 300, 3.0),
            line([70.0, 610.0], [630.0, 130.0], 250, 6.0),
            line([60.0, 330.0], [640.0, 420.0], 200, 9.0),
            line([420.0, 40.0], [330.0, 660.0], 150, 12.0),
            line([50.0, 60.0], [560.0, 200.0], 100, 15.0),
        ],
        n_out: 350,
        seed,
        noise: NoiseModel::Auto,
    }
}

/// Three ellipses with 300, 250 and 200 inliers at noise 3, 6 and 9, plus
/// 350 outliers in a 700 × 700 image.
pub fn three_ellipses(seed: u64) -> ScenarioSpec {
    ScenarioSpec {
        name: "three-ellipses".into(),
        model: ModelKind::Ellipse2d,
        region: Region::square(700.0),
        models: vec![
            ellipse([185.0, 185.0], 180.0, 120.0, 45.0, 300, 3.0),
            ellipse([525.0, 215.0], 170.0, 115.0, -37.0, 250, 6.0),
            ellipse([345.0, 545.0], 145.0, 105.0, 93.0, 200, 9.0),
        ],
        n_out: 350,
        seed,
        noise: NoiseModel::Auto,
    }
}

/// Two ellipses of 200 inliers each at noise 5 and 10 with 200 outliers.
pub fn two_ellipses(seed: u64) -> ScenarioSpec {
    ScenarioSpec {
        name: "two-ellipses".into(),
        model: ModelKind::Ellipse2d,
        region: Region::square(700.0),
        models: vec![
            ellipse([250.0, 300.0], 170.0, 110.0, 30.0, 200, 5.0),
            ellipse([460.0, 380.0], 180.0, 130.0, -20.0, 200, 10.0),
        ],
        n_out: 200,
        seed,
        noise: NoiseModel::Auto,
    }
}

/// A circle of 200 inliers at noise 10 among 1500 outliers.
pub fn circle_limit(radius: f64, seed: u64) -> ScenarioSpec {
    ScenarioSpec {
        name: if radius > 100.0 { "large-circle".into() } else { "small-circle".into() },
        model: ModelKind::Ellipse2d,
        region: Region::square(700.0),
        models: vec![ellipse([350.0, 350.0], radius, radius, 0.0, 200, 10.0)],
        n_out: 1500,
        seed,
        noise: NoiseModel::Auto,
    }
}

/// One segment of 300 inliers at the given noise with 350 outliers.
pub fn single_line(sigma: f64, seed: u64) -> ScenarioSpec {
    ScenarioSpec {
        name: "single-line".into(),
        model: ModelKind::Line2d,
        region: Region::square(700.0),
        models: vec![line([60.0, 110.0], [640.0, 590.0], 300, sigma)],
        n_out: 350,
        seed,
        noise: NoiseModel::Auto,
    }
}

pub fn three_planes(seed: u64) -> ScenarioSpec {
    let patch = |origin: [f64; 3], u: [f64; 3], v: [f64; 3], n_in: usize, sigma: f64| PlantedModel {
        shape: Shape::PlanePatch { origin, u, v },
        n_in,
        sigma,
    };
    ScenarioSpec {
        name: "three-planes".into(),
        model: ModelKind::Plane3d,
        region: Region::cube(100.0),
        models: vec![
            patch([5.0, 5.0, 10.0], [90.0, 0.0, 0.0], [0.0, 90.0, 5.0], 400, 0.5),
            patch([10.0, 20.0, 5.0], [0.0, 0.0, 90.0], [80.0, 0.0, 0.0], 300, 1.0),
            patch([60.0, 5.0, 5.0], [0.0, 90.0, 0.0], [10.0, 0.0, 85.0], 250, 1.5),
        ],
        n_out: 300,
        seed,
        noise: NoiseModel::Auto,
    }
}

pub fn two_spheres(seed: u64) -> ScenarioSpec {
    let sphere = |center: [f64; 3], radius: f64, n_in: usize, sigma: f64| PlantedModel {
        shape: Shape::Sphere { center, radius },
        n_in,
        sigma,
    };
    ScenarioSpec {
        name: "two-spheres".into(),
        model: ModelKind::Sphere3d,
        region: Region::cube(100.0),
        models: vec![sphere([30.0, 35.0, 40.0], 20.0, 300, 0.5), sphere([68.0, 62.0, 55.0], 25.0, 300, 1.0)],
        n_out: 300,
        seed,
        noise: NoiseModel::Auto,
    }
}

pub fn two_cylinders(seed: u64) -> ScenarioSpec {
    let s = 0.5f64.sqrt();
    let cylinder = |base: [f64; 3], direction: [f64; 3], radius: f64, length: f64, n_in: usize, sigma: f64| {
        PlantedModel { shape: Shape::Cylinder { base, direction, radius, length }, n_in, sigma }
    };
    ScenarioSpec {
        name: "two-cylinders".into(),
        model: ModelKind::Cylinder3d,
        region: Region::cube(100.0),
        models: vec![
            cylinder([30.0, 30.0, 10.0], [0.0, 0.0, 1.0], 15.0, 80.0, 400, 0.3),
            cylinder([45.0, 55.0, 50.0], [s, s, 0.0], 10.0, 40.0, 300, 0.5),
        ],
        n_out: 200,
        seed,
        noise: NoiseModel::Auto,
    }
}

/// Two rigid objects moving independently between two 640 × 480 views.
pub fn two_motions(seed: u64) -> ScenarioSpec {
    let motion = |rotation: [f64; 3], translation: [f64; 3], n_in: usize| PlantedModel {
        shape: Shape::RigidMotion {
            focal: 500.0,
            principal: [320.0, 240.0],
            rotation,
            translation,
            depth_min: 4.0,
            depth_max: 8.0,
        },
        n_in,
        sigma: 0.5,
    };
    ScenarioSpec {
        name: "two-motions".into(),
        model: ModelKind::Fundamental,
        region: Region::image_pair(640.0, 480.0),
        models: vec![
            motion([0.0, 0.08, 0.0], [-1.0, 0.1, 0.2], 250),
            motion([0.05, -0.06, 0.1], [0.6, 0.8, -0.3], 200),
        ],
        n_out: 150,
        seed,
        noise: NoiseModel::Auto,
    }
}

/// Two planar patches related by different homographies between two
/// 640 × 480 views.
pub fn two_planes_homography(seed: u64) -> ScenarioSpec {
    let planar = |matrix: [[f64; 3]; 3], source_min: [f64; 2], source_max: [f64; 2], n_in: usize| PlantedModel {
        shape: Shape::Homography { matrix, source_min, source_max },
        n_in,
        sigma: 0.5,
    };
    ScenarioSpec {
        name: "two-planes-homography".into(),
        model: ModelKind::Homography,
        region: Region::image_pair(640.0, 480.0),
        models: vec![
            planar(
                [[0.95, 0.08, 30.0], [-0.05, 1.02, 12.0], [1e-4, -5e-5, 1.0]],
                [40.0, 40.0],
                [300.0, 420.0],
                200,
            ),
            planar(
                [[1.1, -0.1, -60.0], [0.12, 0.9, 25.0], [-1.5e-4, 1e-4, 1.0]],
                [330.0, 60.0],
                [600.0, 440.0],
                200,
            ),
        ],
        n_out: 150,
        seed,
        noise: NoiseModel::Auto,
    }
}
