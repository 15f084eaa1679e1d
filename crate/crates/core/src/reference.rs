//! Ground truth for the continuous operators `T_μ`, `U_μ` and `U′_μ`.
//!
//! On the circle of circumference `2π` with the ball kernel of radius `r`,
//! `d_μ ≡ r/π`, so `T_μ` is the average over `(x − r, x + r)`. Its eigenvalues
//! are `1` on constants and `sin(κr)/(κr)` on `cos(κθ)` and `sin(κθ)`. Any other
//! reference space is handled by [`dense_grid_operator`], a quadrature
//! discretization whose spectrum approximates the continuous one.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{DegreeField, KernelDescriptor, KernelForm};
use crate::matrix::DenseMatrix;
use crate::space::{Point, SpaceDescriptor, SpaceKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorTag {
    T,
    U,
    Uprime,
}

impl OperatorTag {
    pub fn label(self) -> &'static str {
        match self {
            OperatorTag::T => "T",
            OperatorTag::U => "U",
            OperatorTag::Uprime => "U'",
        }
    }
}

/// One eigenspace of a reference operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceGroup {
    /// Frequency `κ`; the eigenfunctions are `1` for `κ = 0`, else `cos(κθ)` and `sin(κθ)`.
    pub frequency: usize,
    pub eigenvalue: f64,
    pub multiplicity: usize,
}

impl ReferenceGroup {
    /// Values of the eigenfunctions at `points` on the circle of circumference `2π`.
    pub fn eigenfunctions(&self, points: &[Point]) -> Vec<Vec<f64>> {
        let theta = |p: &Point| p.coord().unwrap_or(0.0);
        let k = self.frequency as f64;
        if self.frequency == 0 {
            vec![vec![1.0; points.len()]]
        } else {
            vec![
                points.iter().map(|p| (k * theta(p)).cos()).collect(),
                points.iter().map(|p| (k * theta(p)).sin()).collect(),
            ]
        }
    }
}

/// Discrete spectrum of a circle reference operator, by frequency.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceSpectrum {
    operator: OperatorTag,
    radius: f64,
    groups: Vec<ReferenceGroup>,
    #[serde(skip)]
    t_eigenvalues: Vec<f64>,
}

impl ReferenceSpectrum {
    pub fn operator(&self) -> OperatorTag {
        self.operator
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Groups by increasing frequency.
    pub fn groups(&self) -> &[ReferenceGroup] {
        &self.groups
    }

    /// Groups by increasing eigenvalue, ties by frequency.
    pub fn ascending(&self) -> Vec<ReferenceGroup> {
        let mut g = self.groups.clone();
        g.sort_by(|a, b| a.eigenvalue.total_cmp(&b.eigenvalue).then(a.frequency.cmp(&b.frequency)));
        g
    }

    pub fn group(&self, frequency: usize) -> Option<&ReferenceGroup> {
        self.groups.iter().find(|g| g.frequency == frequency)
    }

    /// The same eigenspaces for another operator. On the circle `m_μ ≡ 1`, so
    /// `U_μ = U′_μ = I − T_μ`.
    pub fn for_operator(&self, operator: OperatorTag) -> Self {
        let from_t = |v: f64| match operator {
            OperatorTag::T => v,
            OperatorTag::U | OperatorTag::Uprime => 1.0 - v,
        };
        Self {
            operator,
            radius: self.radius,
            groups: self
                .groups
                .iter()
                .zip(&self.t_eigenvalues)
                .map(|(g, t)| ReferenceGroup {
                    eigenvalue: from_t(*t),
                    ..*g
                })
                .collect(),
            t_eigenvalues: self.t_eigenvalues.clone(),
        }
    }
}

/// `T_μ` eigenvalues for the ball kernel of radius `r` on the circle of
/// circumference `2π`, frequencies `0..=max_frequency`.
pub fn circle_ball_spectrum(r: f64, max_frequency: usize) -> Result<ReferenceSpectrum> {
    if !(r > 0.0 && r <= PI) {
        return Err(Error::domain(format!("radius {r} outside (0, π]")));
    }
    let mut groups = vec![ReferenceGroup {
        frequency: 0,
        eigenvalue: 1.0,
        multiplicity: 1,
    }];
    for k in 1..=max_frequency {
        let x = k as f64 * r;
        groups.push(ReferenceGroup {
            frequency: k,
            eigenvalue: x.sin() / x,
            multiplicity: 2,
        });
    }
    Ok(ReferenceSpectrum {
        operator: OperatorTag::T,
        radius: r,
        t_eigenvalues: groups.iter().map(|g| g.eigenvalue).collect(),
        groups,
    })
}

/// A quadrature discretization of a continuous operator.
#[derive(Debug, Clone)]
pub struct DenseGridOperator {
    pub operator: OperatorTag,
    pub nodes: Vec<Point>,
    pub matrix: DenseMatrix,
}

impl DenseGridOperator {
    /// Applies the discretized operator to `f` sampled at the nodes.
    pub fn apply(&self, f: impl Fn(&Point) -> f64) -> Vec<f64> {
        let values: Vec<f64> = self.nodes.iter().map(f).collect();
        self.matrix.mul_vec(&values)
    }
}

/// `grid_n × grid_n` symmetric matrix approximating `T_μ`, `U_μ` or `U′_μ`.
///
/// Nodes are the midpoints of [`SpaceDescriptor::grid`] and carry equal
/// weight. For the ball kernel on an interval or circle the kernel entries
/// are cell averages, the fraction of cell `j` inside `B_r(x_i)`, which
/// removes the first-order error of the discontinuity. `U` is
/// `diag(Σ_j T_ij) − T`, so that constants are annihilated exactly.
pub fn dense_grid_operator(
    kernel: &KernelDescriptor,
    space: &SpaceDescriptor,
    degrees: &DegreeField,
    grid_n: usize,
    operator: OperatorTag,
) -> Result<DenseGridOperator> {
    if grid_n < 16 {
        return Err(Error::domain(format!("grid_n = {grid_n} < 16")));
    }
    let nodes = space.grid(grid_n);
    let n = nodes.len();
    let inv_degrees = nodes
        .iter()
        .map(|x| degrees.positive_degree(x).map(|d| 1.0 / d))
        .collect::<Result<Vec<f64>>>()?;
    let weight = cell_weights(kernel, space, n);
    let scale = 1.0 / n as f64;
    let t = DenseMatrix::from_fn(n, n, |i, j| {
        let w = match &weight {
            Some(w) => w(&nodes[i], &nodes[j]),
            None => kernel.eval(space, &nodes[i], &nodes[j]),
        };
        scale * w * 0.5 * (inv_degrees[i] + inv_degrees[j])
    });
    let matrix = match operator {
        OperatorTag::T => t,
        OperatorTag::Uprime => DenseMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } - t.get(i, j)),
        OperatorTag::U => {
            let rows: Vec<f64> = (0..n).map(|i| t.column(i).iter().sum()).collect();
            DenseMatrix::from_fn(n, n, |i, j| if i == j { rows[i] } else { 0.0 } - t.get(i, j))
        }
    };
    Ok(DenseGridOperator { operator, nodes, matrix })
}

type Weight = Box<dyn Fn(&Point, &Point) -> f64 + Sync>;

/// Cell-averaged ball weights on 1-D spaces.
fn cell_weights(kernel: &KernelDescriptor, space: &SpaceDescriptor, n: usize) -> Option<Weight> {
    let KernelForm::BallIndicator { r } = kernel.form() else {
        return None;
    };
    match *space.kind() {
        SpaceKind::Circle { circumference } => {
            let h = circumference / n as f64;
            if 2.0 * r >= circumference {
                return Some(Box::new(|_, _| 1.0));
            }
            Some(Box::new(move |x, y| {
                let (x, y) = (x.coord().unwrap_or(0.0), y.coord().unwrap_or(0.0));
                let covered: f64 = [-1.0, 0.0, 1.0]
                    .iter()
                    .map(|s| overlap(y - h / 2.0 + s * circumference, y + h / 2.0 + s * circumference, x - r, x + r))
                    .sum();
                covered / h
            }))
        }
        SpaceKind::Interval { length } => {
            let h = length / n as f64;
            Some(Box::new(move |x, y| {
                let (x, y) = (x.coord().unwrap_or(0.0), y.coord().unwrap_or(0.0));
                overlap(y - h / 2.0, y + h / 2.0, x - r, x + r) / h
            }))
        }
        _ => None,
    }
}

fn overlap(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    (a1.min(b1) - a0.max(b0)).max(0.0)
}

/// `[min, max]` of `m_μ` over `grid_n` nodes.
pub fn m_range(degrees: &DegreeField, grid_n: usize) -> Result<(f64, f64)> {
    if grid_n < 2 {
        return Err(Error::domain(format!("grid_n = {grid_n} < 2")));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for x in degrees.space().grid(grid_n) {
        let m = degrees.m(&x)?;
        lo = lo.min(m);
        hi = hi.max(m);
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::unit_circle;
    use crate::spectral::eig_sym;

    fn ball(r: f64) -> KernelDescriptor {
        KernelDescriptor::ball(r, 0.001, 1.0, 1.0).unwrap()
    }

    fn circle_operator(kernel: &KernelDescriptor, grid_n: usize, tag: OperatorTag) -> DenseGridOperator {
        let space = unit_circle();
        let degrees = DegreeField::with_default_resolution(kernel, &space).unwrap();
        dense_grid_operator(kernel, &space, &degrees, grid_n, tag).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let s = circle_ball_spectrum(PI / 4.0, 5).unwrap();
        assert_eq!(s.group(0).unwrap().eigenvalue, 1.0);
        assert!((s.group(2).unwrap().eigenvalue - 2.0 / PI).abs() <= 1e-15);
        assert_eq!(s.group(3).unwrap().multiplicity, 2);
        let s = circle_ball_spectrum(PI, 1).unwrap();
        assert!(s.group(1).unwrap().eigenvalue.abs() <= 1e-15);
        assert!(circle_ball_spectrum(0.0, 3).is_err());
        assert!(circle_ball_spectrum(4.0, 3).is_err());
    }

    #[test]
    fn u_prime_is_one_minus_t_exactly() {
        let t = circle_ball_spectrum(0.9, 12).unwrap();
        let u = t.for_operator(OperatorTag::Uprime);
        for (a, b) in t.groups().iter().zip(u.groups()) {
            assert_eq!(b.eigenvalue, 1.0 - a.eigenvalue);
            assert_eq!(a.multiplicity, b.multiplicity);
        }
        assert_eq!(u.group(0).unwrap().eigenvalue, 0.0);
        assert_eq!(u.for_operator(OperatorTag::T), t);
    }

    #[test]
    fn constant_kernel_grid_operator_is_rank_one() {
        let kernel = KernelDescriptor::constant(1.0, 0.5).unwrap();
        let op = circle_operator(&kernel, 32, OperatorTag::T);
        let s = eig_sym(&op.matrix).unwrap();
        assert!((s.eigenvalues()[31] - 1.0).abs() <= 1e-12);
        assert!(s.eigenvalues()[..31].iter().all(|v| v.abs() <= 1e-12));
        assert!(s.eigenvector(31).iter().all(|v| (v - 1.0 / 32f64.sqrt()).abs() <= 1e-12));
    }

    #[test]
    fn grid_operator_reproduces_circle_eigenfunctions() {
        let r = PI / 4.0;
        let op = circle_operator(&ball(r), 2048, OperatorTag::T);
        for k in 1..=5 {
            let lambda = (k as f64 * r).sin() / (k as f64 * r);
            let tf = op.apply(|p| (k as f64 * p.coord().unwrap()).cos());
            let err = op
                .nodes
                .iter()
                .zip(&tf)
                .map(|(p, v)| (v - lambda * (k as f64 * p.coord().unwrap()).cos()).abs())
                .fold(0.0, f64::max);
            assert!(err <= 5e-4, "κ = {k}: {err}");
        }
    }

    #[test]
    fn grid_spectrum_matches_the_closed_form() {
        let r = PI / 4.0;
        let op = circle_operator(&ball(r), 1024, OperatorTag::T);
        let s = eig_sym(&op.matrix).unwrap();
        let top = s.eigenvalues();
        let n = top.len();
        assert!((top[n - 1] - 1.0).abs() <= 1e-12);
        let lambda1 = r.sin() / r;
        assert!((top[n - 2] - lambda1).abs() <= 1e-4);
        assert!((top[n - 3] - lambda1).abs() <= 1e-4);
        let groups = s.group_ranges();
        for k in [1usize, 2, 3, 5] {
            let lambda = (k as f64 * r).sin() / (k as f64 * r);
            let (start, size) = *groups
                .iter()
                .min_by(|a, b| (top[a.0] - lambda).abs().total_cmp(&(top[b.0] - lambda).abs()))
                .unwrap();
            assert!((top[start] - lambda).abs() <= 1e-4, "κ = {k}");
            assert_eq!(size, 2, "κ = {k}");
        }
    }

    #[test]
    fn u_operators_annihilate_constants() {
        let op = circle_operator(&ball(1.0), 64, OperatorTag::U);
        assert!(op.apply(|_| 1.0).iter().all(|v| v.abs() <= 1e-14));
        assert!(op.matrix.symmetry_defect() <= 1e-15);
        let op = circle_operator(&ball(1.0), 64, OperatorTag::Uprime);
        assert!(op.apply(|_| 1.0).iter().all(|v| v.abs() <= 1e-12));
    }

    #[test]
    fn m_range_examples() {
        let space = unit_circle();
        let kernel = KernelDescriptor::constant(1.0, 0.5).unwrap();
        let degrees = DegreeField::with_default_resolution(&kernel, &space).unwrap();
        assert_eq!(m_range(&degrees, 8).unwrap(), (1.0, 1.0));
        let kernel = ball(PI / 4.0);
        let degrees = DegreeField::with_default_resolution(&kernel, &space).unwrap();
        let (lo, hi) = m_range(&degrees, 64).unwrap();
        assert!((lo - 1.0).abs() <= 1e-9 && (hi - 1.0).abs() <= 1e-9);
        let interval = SpaceDescriptor::interval(1.0).unwrap();
        let form = KernelForm::TruncatedGaussian { t: 0.05, epsilon: 0.3 };
        let kernel = KernelDescriptor::new(form, 1.0, 0.01, crate::kernel::ContinuityModulus { scale: 10.0, exponent: 1.0 }).unwrap();
        let degrees = DegreeField::new(&kernel, &interval, 256).unwrap();
        let (lo, hi) = m_range(&degrees, 16).unwrap();
        assert!(lo < hi);
        assert!(m_range(&degrees, 1).is_err());
    }
}
