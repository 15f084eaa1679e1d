//! Compact metric measure spaces with their normalized uniform measure.
//!
//! Four kinds are supported: an interval `[0, L]`, a circle of circumference
//! `C` (coordinates in `[0, C)`), a flat two-torus, and a finite point cloud
//! carrying either the Euclidean metric or a precomputed distance matrix.
//! The measure is always the uniform probability measure, so every integral
//! in the crate is an average.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// A point of some [`SpaceDescriptor`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    /// Coordinate on an interval or a circle.
    Coord(f64),
    /// Coordinates on the two-torus.
    Coord2([f64; 2]),
    /// Index into a point cloud.
    Index(usize),
}

impl Point {
    /// Scalar coordinate, if this is a 1-D point.
    pub fn coord(&self) -> Option<f64> {
        match *self {
            Point::Coord(x) => Some(x),
            _ => None,
        }
    }

    /// Flat coordinate list used by the exporters.
    pub fn components(&self) -> Vec<f64> {
        match *self {
            Point::Coord(x) => vec![x],
            Point::Coord2([x, y]) => vec![x, y],
            Point::Index(i) => vec![i as f64],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CloudMetric {
    Euclidean { points: Vec<Vec<f64>> },
    /// Row-major `size × size` distance matrix.
    Precomputed { size: usize, distances: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    metric: CloudMetric,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        match &self.metric {
            CloudMetric::Euclidean { points } => points.len(),
            CloudMetric::Precomputed { size, .. } => *size,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn metric(&self) -> &CloudMetric {
        &self.metric
    }

    fn distance(&self, i: usize, j: usize) -> f64 {
        match &self.metric {
            CloudMetric::Euclidean { points } => points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
            CloudMetric::Precomputed { size, distances } => distances[i * size + j],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpaceKind {
    Interval { length: f64 },
    Circle { circumference: f64 },
    Torus2 { circumferences: [f64; 2] },
    PointCloud(Arc<PointCloud>),
}

/// A compact metric space with the uniform probability measure.
///
/// Immutable after construction; cloning is cheap (point clouds are shared).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceSpec", into = "SpaceSpec")]
pub struct SpaceDescriptor {
    kind: SpaceKind,
    diameter: f64,
}

fn check_length(name: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::domain(format!("{name} must be finite and positive, got {value}")))
    }
}

impl SpaceDescriptor {
    pub fn interval(length: f64) -> Result<Self> {
        let length = check_length("interval length", length)?;
        Ok(Self {
            kind: SpaceKind::Interval { length },
            diameter: length,
        })
    }

    pub fn circle(circumference: f64) -> Result<Self> {
        let circumference = check_length("circumference", circumference)?;
        Ok(Self {
            kind: SpaceKind::Circle { circumference },
            diameter: circumference / 2.0,
        })
    }

    pub fn torus2(circumferences: [f64; 2]) -> Result<Self> {
        let c0 = check_length("torus circumference", circumferences[0])?;
        let c1 = check_length("torus circumference", circumferences[1])?;
        Ok(Self {
            kind: SpaceKind::Torus2 {
                circumferences: [c0, c1],
            },
            diameter: (0.25 * (c0 * c0 + c1 * c1)).sqrt(),
        })
    }

    /// Finite point cloud with the Euclidean metric.
    pub fn euclidean_cloud(points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::domain("point cloud must contain at least one point"));
        }
        let dim = points[0].len();
        if dim == 0 || points.iter().any(|p| p.len() != dim) {
            return Err(Error::domain("point cloud coordinates must share a positive dimension"));
        }
        if points.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::domain("point cloud coordinates must be finite"));
        }
        Self::from_cloud(PointCloud {
            metric: CloudMetric::Euclidean { points },
        })
    }

    /// Finite point cloud with a precomputed distance matrix.
    ///
    /// The matrix must be square, symmetric, non-negative with a zero diagonal.
    /// The triangle inequality is the caller's responsibility.
    pub fn precomputed_cloud(distances: Vec<Vec<f64>>) -> Result<Self> {
        let size = distances.len();
        if size == 0 {
            return Err(Error::domain("distance matrix must be non-empty"));
        }
        if distances.iter().any(|row| row.len() != size) {
            return Err(Error::domain("distance matrix must be square"));
        }
        for (i, row) in distances.iter().enumerate() {
            if row[i] != 0.0 {
                return Err(Error::domain("distance matrix must have a zero diagonal"));
            }
            for (j, &d) in row.iter().enumerate() {
                if !d.is_finite() || d < 0.0 || d != distances[j][i] {
                    return Err(Error::domain(
                        "distance matrix must be finite, non-negative and symmetric",
                    ));
                }
            }
        }
        Self::from_cloud(PointCloud {
            metric: CloudMetric::Precomputed {
                size,
                distances: distances.into_iter().flatten().collect(),
            },
        })
    }

    fn from_cloud(cloud: PointCloud) -> Result<Self> {
        let m = cloud.len();
        let mut diameter: f64 = 0.0;
        for i in 0..m {
            for j in (i + 1)..m {
                diameter = diameter.max(cloud.distance(i, j));
            }
        }
        Ok(Self {
            kind: SpaceKind::PointCloud(Arc::new(cloud)),
            diameter,
        })
    }

    pub fn kind(&self) -> &SpaceKind {
        &self.kind
    }

    /// Largest distance between two points of the space.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Whether `ball_measure` has a closed form for this space.
    pub fn is_analytic(&self) -> bool {
        !matches!(self.kind, SpaceKind::PointCloud(_))
    }

    pub fn contains(&self, p: &Point) -> bool {
        match (&self.kind, p) {
            (SpaceKind::Interval { length }, Point::Coord(x)) => x.is_finite() && (0.0..=*length).contains(x),
            (SpaceKind::Circle { circumference }, Point::Coord(x)) => {
                x.is_finite() && (0.0..=*circumference).contains(x)
            }
            (SpaceKind::Torus2 { circumferences }, Point::Coord2(x)) => x
                .iter()
                .zip(circumferences)
                .all(|(x, c)| x.is_finite() && (0.0..=*c).contains(x)),
            (SpaceKind::PointCloud(cloud), Point::Index(i)) => *i < cloud.len(),
            _ => false,
        }
    }

    pub fn check(&self, p: &Point) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::domain(format!("point {p:?} is not in {}", self.label())))
        }
    }

    /// Short human label, e.g. `circle(6.283185307179586)`.
    pub fn label(&self) -> String {
        match &self.kind {
            SpaceKind::Interval { length } => format!("interval({length})"),
            SpaceKind::Circle { circumference } => format!("circle({circumference})"),
            SpaceKind::Torus2 { circumferences } => {
                format!("torus2({}, {})", circumferences[0], circumferences[1])
            }
            SpaceKind::PointCloud(cloud) => format!("point_cloud({} points)", cloud.len()),
        }
    }

    /// Intrinsic distance. Arc length on the circle, flat metric on the torus.
    pub fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.distance_unchecked(x, y))
    }

    /// Distance without domain validation. Both points must belong to the space.
    #[inline]
    pub fn distance_unchecked(&self, x: &Point, y: &Point) -> f64 {
        match (&self.kind, x, y) {
            (SpaceKind::Interval { .. }, Point::Coord(a), Point::Coord(b)) => (a - b).abs(),
            (SpaceKind::Circle { circumference }, Point::Coord(a), Point::Coord(b)) => {
                wrapped(a - b, *circumference)
            }
            (SpaceKind::Torus2 { circumferences }, Point::Coord2(a), Point::Coord2(b)) => {
                let u = wrapped(a[0] - b[0], circumferences[0]);
                let v = wrapped(a[1] - b[1], circumferences[1]);
                (u * u + v * v).sqrt()
            }
            (SpaceKind::PointCloud(cloud), Point::Index(i), Point::Index(j)) => cloud.distance(*i, *j),
            _ => f64::NAN,
        }
    }

    /// `n` i.i.d. uniform points drawn from stream 0 of `seed`.
    pub fn sample_uniform(&self, n: usize, seed: u64) -> PointSet {
        self.sample_uniform_stream(n, seed, 0)
    }

    /// `n` i.i.d. uniform points drawn from the given stream of `seed`.
    pub fn sample_uniform_stream(&self, n: usize, seed: u64, stream: u64) -> PointSet {
        let mut rng = stream_rng(seed, stream);
        let points = (0..n)
            .map(|_| match &self.kind {
                SpaceKind::Interval { length } => Point::Coord(rng.gen::<f64>() * length),
                SpaceKind::Circle { circumference } => Point::Coord(rng.gen::<f64>() * circumference),
                SpaceKind::Torus2 { circumferences } => Point::Coord2([
                    rng.gen::<f64>() * circumferences[0],
                    rng.gen::<f64>() * circumferences[1],
                ]),
                SpaceKind::PointCloud(cloud) => Point::Index(rng.gen_range(0..cloud.len())),
            })
            .collect();
        PointSet {
            space: self.clone(),
            points,
            seed: Some(seed),
            stream,
        }
    }

    /// Exact `μ(B_r(x))` for the open ball.
    pub fn ball_measure(&self, x: &Point, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::domain(format!("ball radius must be non-negative, got {r}")));
        }
        self.check(x)?;
        if r >= self.diameter && self.is_analytic() {
            return Ok(1.0);
        }
        let measure = match (&self.kind, x) {
            (SpaceKind::Interval { length }, Point::Coord(c)) => {
                ((c + r).min(*length) - (c - r).max(0.0)).max(0.0) / length
            }
            (SpaceKind::Circle { circumference }, _) => (2.0 * r).min(*circumference) / circumference,
            (SpaceKind::Torus2 { circumferences }, _) => torus_ball_area(*circumferences, r),
            (SpaceKind::PointCloud(_), _) => {
                return Err(Error::Unsupported(
                    "ball_measure on a point cloud; count sample points instead".into(),
                ))
            }
            _ => unreachable!("checked above"),
        };
        Ok(measure.clamp(0.0, 1.0))
    }

    /// Number of radius-`delta` balls needed to cover the space.
    ///
    /// Exact on the interval and the circle; an upper bound from a square
    /// lattice on the torus and from a greedy net on point clouds.
    pub fn covering_number(&self, delta: f64) -> Result<u64> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::domain(format!("covering radius must be positive, got {delta}")));
        }
        if delta >= self.diameter {
            return Ok(1);
        }
        // Guards against ceil(2.0000000000000004).
        let cover = |length: f64, width: f64| ((length / width) - 1e-12).ceil().max(1.0) as u64;
        let count = match &self.kind {
            SpaceKind::Interval { length } => cover(*length, 2.0 * delta),
            SpaceKind::Circle { circumference } => cover(*circumference, 2.0 * delta),
            SpaceKind::Torus2 { circumferences } => {
                // a square of side delta·√2 fits inside each ball
                let side = delta * 2f64.sqrt();
                cover(circumferences[0], side) * cover(circumferences[1], side)
            }
            SpaceKind::PointCloud(cloud) => {
                let m = cloud.len();
                let mut covered = vec![false; m];
                let mut centers = 0u64;
                for i in 0..m {
                    if covered[i] {
                        continue;
                    }
                    centers += 1;
                    for (j, c) in covered.iter_mut().enumerate() {
                        if cloud.distance(i, j) <= delta {
                            *c = true;
                        }
                    }
                }
                centers
            }
        };
        Ok(count)
    }

    /// Deterministic midpoint grid with roughly `count` points.
    ///
    /// Exactly `count` points on 1-D spaces, a `side × side` lattice with
    /// `side = round(√count)` on the torus, and every point of a cloud.
    pub fn grid(&self, count: usize) -> Vec<Point> {
        match &self.kind {
            SpaceKind::Interval { length } => midpoints(*length, count).map(Point::Coord).collect(),
            SpaceKind::Circle { circumference } => midpoints(*circumference, count).map(Point::Coord).collect(),
            SpaceKind::Torus2 { circumferences } => {
                let side = ((count as f64).sqrt().round() as usize).max(1);
                let xs: Vec<f64> = midpoints(circumferences[0], side).collect();
                let ys: Vec<f64> = midpoints(circumferences[1], side).collect();
                xs.iter()
                    .flat_map(|&x| ys.iter().map(move |&y| Point::Coord2([x, y])))
                    .collect()
            }
            SpaceKind::PointCloud(cloud) => (0..cloud.len()).map(Point::Index).collect(),
        }
    }

    /// Midpoint-rule approximation of `∫ f dμ` on `grid(resolution)`.
    ///
    /// Exact on point clouds, spectrally accurate for smooth periodic `f`.
    pub fn integrate(&self, resolution: usize, f: impl Fn(&Point) -> f64) -> f64 {
        let nodes = self.grid(resolution);
        let total: f64 = nodes.iter().map(&f).sum();
        total / nodes.len() as f64
    }
}

/// Representative of `delta` modulo `period`, folded into `[0, period/2]`.
#[inline]
fn wrapped(delta: f64, period: f64) -> f64 {
    let d = delta.abs() % period;
    d.min(period - d)
}

fn midpoints(length: f64, count: usize) -> impl Iterator<Item = f64> {
    let h = length / count.max(1) as f64;
    (0..count).map(move |i| (i as f64 + 0.5) * h)
}

/// Normalized area of an open disk of radius `r` on the flat torus.
fn torus_ball_area(c: [f64; 2], r: f64) -> f64 {
    // In the fundamental domain [-c0/2, c0/2] × [-c1/2, c1/2], the ball is
    // {u² + v² < r²}; integrate the clipped vertical chord over u.
    let half_v = 0.5 * c[1];
    let u_max = r.min(0.5 * c[0]);
    let primitive = |u: f64| u * (r * r - u * u).max(0.0).sqrt() + r * r * (u / r).clamp(-1.0, 1.0).asin();
    if r == 0.0 {
        return 0.0;
    }
    let area = if r <= half_v {
        2.0 * primitive(u_max)
    } else {
        let u_clip = (r * r - half_v * half_v).sqrt().min(u_max);
        2.0 * (c[1] * u_clip + primitive(u_max) - primitive(u_clip))
    };
    area / (c[0] * c[1])
}

/// The sample `X_1, …, X_n` together with the space it lives in.
#[derive(Debug, Clone)]
pub struct PointSet {
    space: SpaceDescriptor,
    points: Vec<Point>,
    seed: Option<u64>,
    stream: u64,
}

impl PointSet {
    /// Wraps explicit points, validating each one.
    pub fn from_points(space: &SpaceDescriptor, points: Vec<Point>) -> Result<Self> {
        for p in &points {
            space.check(p)?;
        }
        Ok(Self {
            space: space.clone(),
            points,
            seed: None,
            stream: 0,
        })
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Seed the points were drawn with, `None` for explicit point sets.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }
}

// ---------------------------------------------------------------------------
// JSON schema

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CloudMetricKind {
    Euclidean,
    Precomputed,
}

/// Serialized form: `{"kind":"circle","circumference":6.283185307}` and friends.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceSpec {
    Interval {
        length: f64,
    },
    Circle {
        circumference: f64,
    },
    Torus2 {
        circumferences: [f64; 2],
    },
    PointCloud {
        metric: CloudMetricKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        points: Option<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        distances: Option<Vec<Vec<f64>>>,
    },
}

impl TryFrom<SpaceSpec> for SpaceDescriptor {
    type Error = Error;

    fn try_from(spec: SpaceSpec) -> Result<Self> {
        match spec {
            SpaceSpec::Interval { length } => Self::interval(length),
            SpaceSpec::Circle { circumference } => Self::circle(circumference),
            SpaceSpec::Torus2 { circumferences } => Self::torus2(circumferences),
            SpaceSpec::PointCloud {
                metric: CloudMetricKind::Euclidean,
                points: Some(points),
                distances: None,
            } => Self::euclidean_cloud(points),
            SpaceSpec::PointCloud {
                metric: CloudMetricKind::Precomputed,
                points: None,
                distances: Some(d),
            } => Self::precomputed_cloud(d),
            SpaceSpec::PointCloud { .. } => Err(Error::config(
                "point_cloud needs `points` for the euclidean metric or `distances` for a precomputed one",
            )),
        }
    }
}

impl From<SpaceDescriptor> for SpaceSpec {
    fn from(space: SpaceDescriptor) -> Self {
        match space.kind {
            SpaceKind::Interval { length } => SpaceSpec::Interval { length },
            SpaceKind::Circle { circumference } => SpaceSpec::Circle { circumference },
            SpaceKind::Torus2 { circumferences } => SpaceSpec::Torus2 { circumferences },
            SpaceKind::PointCloud(cloud) => match &cloud.metric {
                CloudMetric::Euclidean { points } => SpaceSpec::PointCloud {
                    metric: CloudMetricKind::Euclidean,
                    points: Some(points.clone()),
                    distances: None,
                },
                CloudMetric::Precomputed { size, distances } => SpaceSpec::PointCloud {
                    metric: CloudMetricKind::Precomputed,
                    points: None,
                    distances: Some(distances.chunks(*size).map(<[f64]>::to_vec).collect()),
                },
            },
        }
    }
}

/// Circle of circumference 2π, the workhorse of the experiments.
pub fn unit_circle() -> SpaceDescriptor {
    SpaceDescriptor::circle(2.0 * PI).expect("2π is a valid circumference")
}
