//! Checks that a (kernel, space) pair satisfies the declared hypotheses.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::space::{Point, SpaceDescriptor, SpaceKind};

use super::{DegreeField, KernelDescriptor, KernelForm, DEFAULT_RESOLUTION};

/// Perturbed centers per probe: 16 offsets on each side in 1-D, 16 angles × 2 radii on the torus.
const FAN_SIZE: usize = 32;

/// Declared constants are usually entered rounded; the modulus comparison
/// allows this much relative slack.
pub const MODULUS_RELATIVE_SLACK: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModulusProbe {
    /// Exact annulus measure `μ(B_{r+δ}(x) \ B_{r-δ}(x))` for ball kernels on homogeneous spaces.
    Annulus,
    /// Maximum over a fan of perturbed centers, integrated by quadrature.
    Fan,
    /// The kernel does not depend on its arguments.
    Trivial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModulusEstimate {
    pub delta: f64,
    /// Lower bound on `sup_x ‖k_δ(x; ·)‖_{L¹}`.
    pub estimate: f64,
    /// `C_ω δ^{m'}` from the kernel descriptor.
    pub declared: f64,
    pub probe: ModulusProbe,
}

impl ModulusEstimate {
    pub fn within_declared(&self) -> bool {
        self.estimate <= self.declared * (1.0 + MODULUS_RELATIVE_SLACK)
    }
}

/// Estimates `sup_x ∫ sup_{y ∈ B_δ(x)} |k(x, z) − k(y, z)| dμ(z)` over `probe_count` centers.
pub fn modulus_estimate(
    kernel: &KernelDescriptor,
    space: &SpaceDescriptor,
    delta: f64,
    probe_count: usize,
) -> Result<ModulusEstimate> {
    if !(delta > 0.0) {
        return Err(Error::domain(format!("delta must be positive, got {delta}")));
    }
    let declared = kernel.modulus().bound(delta);
    let annulus_applies = match (kernel.form(), space.kind()) {
        (KernelForm::BallIndicator { .. }, SpaceKind::Circle { .. }) => true,
        (KernelForm::BallIndicator { r }, SpaceKind::Torus2 { circumferences }) => {
            r + delta <= 0.5 * circumferences[0].min(circumferences[1])
        }
        _ => false,
    };
    if let KernelForm::Constant { .. } = kernel.form() {
        return Ok(ModulusEstimate {
            delta,
            estimate: 0.0,
            declared,
            probe: ModulusProbe::Trivial,
        });
    }
    if annulus_applies {
        let KernelForm::BallIndicator { r } = kernel.form() else {
            unreachable!()
        };
        let mut estimate: f64 = 0.0;
        for x in space.grid(probe_count.max(1)) {
            let outer = space.ball_measure(&x, r + delta)?;
            let inner = space.ball_measure(&x, (r - delta).max(0.0))?;
            estimate = estimate.max(outer - inner);
        }
        return Ok(ModulusEstimate {
            delta,
            estimate,
            declared,
            probe: ModulusProbe::Annulus,
        });
    }
    modulus_fan_estimate(kernel, space, delta, probe_count, DEFAULT_RESOLUTION)
}

/// The fan-of-centers estimate, available for every kernel and space.
pub fn modulus_fan_estimate(
    kernel: &KernelDescriptor,
    space: &SpaceDescriptor,
    delta: f64,
    probe_count: usize,
    resolution: usize,
) -> Result<ModulusEstimate> {
    if !(delta > 0.0) {
        return Err(Error::domain(format!("delta must be positive, got {delta}")));
    }
    if resolution == 0 {
        return Err(Error::config("quadrature resolution must be positive"));
    }
    let nodes = space.grid(resolution);
    let mut estimate: f64 = 0.0;
    for x in space.grid(probe_count.max(1)) {
        let fan = perturbed_centers(space, &x, delta);
        if fan.is_empty() {
            continue;
        }
        let total: f64 = nodes
            .iter()
            .map(|z| {
                let kxz = kernel.eval(space, &x, z);
                fan.iter()
                    .map(|y| (kxz - kernel.eval(space, y, z)).abs())
                    .fold(0.0, f64::max)
            })
            .sum();
        estimate = estimate.max(total / nodes.len() as f64);
    }
    Ok(ModulusEstimate {
        delta,
        estimate,
        declared: kernel.modulus().bound(delta),
        probe: ModulusProbe::Fan,
    })
}

fn perturbed_centers(space: &SpaceDescriptor, x: &Point, delta: f64) -> Vec<Point> {
    // stay strictly inside the open ball
    let reach = delta * (1.0 - 1e-9);
    let half = FAN_SIZE / 2;
    match (space.kind(), x) {
        (SpaceKind::Interval { length }, Point::Coord(c)) => (1..=half)
            .flat_map(|j| {
                let s = reach * j as f64 / half as f64;
                [c - s, c + s]
            })
            .filter(|y| (0.0..=*length).contains(y))
            .map(Point::Coord)
            .collect(),
        (SpaceKind::Circle { circumference }, Point::Coord(c)) => (1..=half)
            .flat_map(|j| {
                let s = reach * j as f64 / half as f64;
                [c - s, c + s]
            })
            .map(|y| Point::Coord(y.rem_euclid(*circumference)))
            .collect(),
        (SpaceKind::Torus2 { circumferences }, Point::Coord2(c)) => (0..half)
            .flat_map(|j| {
                let angle = std::f64::consts::TAU * j as f64 / half as f64;
                [0.5 * reach, reach].map(|rho| {
                    Point::Coord2([
                        (c[0] + rho * angle.cos()).rem_euclid(circumferences[0]),
                        (c[1] + rho * angle.sin()).rem_euclid(circumferences[1]),
                    ])
                })
            })
            .collect(),
        (SpaceKind::PointCloud(cloud), Point::Index(i)) => {
            let mut near: Vec<(f64, usize)> = (0..cloud.len())
                .filter(|j| j != i)
                .map(|j| (space.distance_unchecked(x, &Point::Index(j)), j))
                .filter(|(d, _)| *d < delta)
                .collect();
            near.sort_by(|a, b| a.0.total_cmp(&b.0));
            near.into_iter().take(FAN_SIZE).map(|(_, j)| Point::Index(j)).collect()
        }
        _ => Vec::new(),
    }
}

/// Outcome of the membership check for the measure class defined by `(a, ω, k)`.
#[derive(Debug, Clone, Serialize)]
pub struct MembershipReport {
    pub kernel: String,
    pub space: String,
    pub grid: usize,
    /// `inf_x d_μ(x)` over the grid.
    pub min_degree: f64,
    /// `min_degree − a`; positive when the lower bound holds.
    pub lower_bound_margin: f64,
    pub lower_bound_pass: bool,
    /// `max k(x, y)` over grid pairs.
    pub max_kernel: f64,
    pub upper_bound_pass: bool,
    pub modulus: Vec<ModulusEstimate>,
    /// `min_δ (declared − estimate)`.
    pub modulus_margin: f64,
    pub modulus_pass: bool,
    pub passed: bool,
}

/// δ ladder used for the continuity check, relative to the diameter.
pub const MODULUS_LADDER: [f64; 5] = [1e-3, 3e-3, 1e-2, 3e-2, 1e-1];

pub fn verify_membership(kernel: &KernelDescriptor, space: &SpaceDescriptor, grid: usize) -> Result<MembershipReport> {
    if grid < 2 {
        return Err(Error::domain("membership grid needs at least 2 points"));
    }
    let degrees = DegreeField::with_default_resolution(kernel, space)?;
    let nodes = space.grid(grid);
    let min_degree = nodes.iter().map(|x| degrees.at(x)).fold(f64::INFINITY, f64::min);
    let a = kernel.degree_lower_bound();

    let step = nodes.len().div_ceil(256).max(1);
    let sub: Vec<&Point> = nodes.iter().step_by(step).collect();
    let max_kernel = sub
        .iter()
        .flat_map(|x| sub.iter().map(move |y| kernel.eval(space, x, y)))
        .fold(0.0, f64::max);

    let modulus = MODULUS_LADDER
        .iter()
        .map(|f| modulus_estimate(kernel, space, f * space.diameter(), grid.min(16)))
        .collect::<Result<Vec<_>>>()?;
    let modulus_margin = modulus
        .iter()
        .map(|m| m.declared - m.estimate)
        .fold(f64::INFINITY, f64::min);
    let modulus_pass = modulus.iter().all(ModulusEstimate::within_declared);
    let lower_bound_pass = min_degree > a;
    let upper_bound_pass = max_kernel <= kernel.upper_bound();
    Ok(MembershipReport {
        kernel: kernel.label(),
        space: space.label(),
        grid,
        min_degree,
        lower_bound_margin: min_degree - a,
        lower_bound_pass,
        max_kernel,
        upper_bound_pass,
        modulus,
        modulus_margin,
        modulus_pass,
        passed: lower_bound_pass && upper_bound_pass && modulus_pass,
    })
}
