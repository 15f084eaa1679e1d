use std::cell::Cell;

use crate::error::{Error, Result};
use crate::quadrature::CompositeRule;
use crate::space::{Point, SpaceDescriptor, SpaceKind};

use super::{KernelDescriptor, KernelForm};

/// Quadrature resolution used when none is given.
pub const DEFAULT_RESOLUTION: usize = 4096;

const GL_ORDER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeMethod {
    /// Closed form (ball measure, constant kernel).
    Analytic,
    /// Deterministic quadrature on the reference space.
    Quadrature,
    /// Exact finite average over a point cloud.
    ExactSum,
}

/// The continuous degree `d_μ(x) = ∫ k(x, y) dμ(y)` and the objects built on it.
///
/// Integrals against `k(x, ·)` use composite Gauss–Legendre on the support
/// of the kernel for 1-D ball-type kernels (whose integrands are smooth
/// there), the midpoint rule on periodic spaces, and exact averages on
/// point clouds.
#[derive(Debug, Clone)]
pub struct DegreeField {
    kernel: KernelDescriptor,
    space: SpaceDescriptor,
    method: DegreeMethod,
    resolution: usize,
    rule: CompositeRule,
}

impl DegreeField {
    pub fn new(kernel: &KernelDescriptor, space: &SpaceDescriptor, resolution: usize) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::config("quadrature resolution must be positive"));
        }
        let method = match (kernel.form(), space.kind()) {
            (_, SpaceKind::PointCloud(_)) => DegreeMethod::ExactSum,
            (KernelForm::Constant { .. }, _) | (KernelForm::BallIndicator { .. }, _) => DegreeMethod::Analytic,
            _ => DegreeMethod::Quadrature,
        };
        Ok(Self {
            kernel: *kernel,
            space: space.clone(),
            method,
            resolution,
            rule: CompositeRule::new(GL_ORDER, (resolution / GL_ORDER).max(4)),
        })
    }

    pub fn with_default_resolution(kernel: &KernelDescriptor, space: &SpaceDescriptor) -> Result<Self> {
        Self::new(kernel, space, DEFAULT_RESOLUTION)
    }

    pub fn kernel(&self) -> &KernelDescriptor {
        &self.kernel
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn method(&self) -> DegreeMethod {
        self.method
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// `d_μ(x)` for a point of the space.
    pub fn at(&self, x: &Point) -> f64 {
        match (self.method, self.kernel.form()) {
            (DegreeMethod::Analytic, KernelForm::Constant { c }) => c,
            (DegreeMethod::Analytic, KernelForm::BallIndicator { r }) => {
                self.space.ball_measure(x, r).expect("analytic degree on a valid point")
            }
            _ => self.integrate_against(x, |_| 1.0),
        }
    }

    pub fn at_checked(&self, x: &Point) -> Result<f64> {
        self.space.check(x)?;
        Ok(self.at(x))
    }

    /// `∫ k(x, y) g(y) dμ(y)`.
    pub fn integrate_against(&self, x: &Point, g: impl Fn(&Point) -> f64) -> f64 {
        let kernel = &self.kernel;
        let space = &self.space;
        match (kernel.form(), space.kind(), x) {
            (KernelForm::Constant { c }, _, _) => c * space.integrate(self.resolution, g),
            (_, SpaceKind::PointCloud(_), _) | (_, SpaceKind::Torus2 { .. }, _) => {
                space.integrate(self.resolution, |y| kernel.eval(space, x, y) * g(y))
            }
            (KernelForm::Gaussian { .. }, SpaceKind::Circle { .. }, _) => {
                space.integrate(self.resolution, |y| kernel.eval(space, x, y) * g(y))
            }
            (form, SpaceKind::Interval { length }, Point::Coord(c)) => {
                let support = support_radius(form).unwrap_or(*length);
                let lo = (c - support).max(0.0);
                let hi = (c + support).min(*length);
                // Degree-type integrands have kinks where the ball meets the boundary.
                let mut cuts = vec![lo, hi, *c];
                cuts.extend([support, length - support].into_iter().filter(|b| *b > lo && *b < hi));
                cuts.sort_by(f64::total_cmp);
                cuts.dedup();
                let integrand = |t: f64| {
                    let y = Point::Coord(t);
                    kernel.eval(space, x, &y) * g(&y)
                };
                cuts.windows(2)
                    .map(|w| self.rule.integrate(w[0], w[1], integrand))
                    .sum::<f64>()
                    / length
            }
            (form, SpaceKind::Circle { circumference }, Point::Coord(c)) => {
                let support = support_radius(form).expect("gaussian handled above");
                let half = support.min(0.5 * circumference);
                let integrand = |t: f64| {
                    let y = Point::Coord(t.rem_euclid(*circumference));
                    kernel.eval(space, x, &y) * g(&y)
                };
                let total = self.rule.integrate(c - half, *c, integrand) + self.rule.integrate(*c, c + half, integrand);
                total / circumference
            }
            _ => unreachable!("point kind matches space kind"),
        }
    }

    /// `h_μ(x, y) = ½ k(x, y) (1/d_μ(x) + 1/d_μ(y))`.
    pub fn h(&self, x: &Point, y: &Point) -> Result<f64> {
        let dx = self.positive_degree(x)?;
        let dy = self.positive_degree(y)?;
        Ok(0.5 * self.kernel.eval(&self.space, x, y) * (1.0 / dx + 1.0 / dy))
    }

    /// `m_μ(x) = ∫ h_μ(x, y) dμ(y)`.
    pub fn m(&self, x: &Point) -> Result<f64> {
        let dx = self.positive_degree(x)?;
        let degenerate = Cell::new(false);
        let value = self.integrate_against(x, |y| {
            let dy = self.at(y);
            if dy <= 0.0 {
                degenerate.set(true);
                return 0.0;
            }
            0.5 * (1.0 / dx + 1.0 / dy)
        });
        if degenerate.get() {
            return Err(Error::degenerate("d_μ vanishes inside the support of k(x, ·)"));
        }
        Ok(value)
    }

    pub(crate) fn positive_degree(&self, x: &Point) -> Result<f64> {
        let d = self.at_checked(x)?;
        if d > 0.0 {
            Ok(d)
        } else {
            Err(Error::degenerate(format!("d_μ({x:?}) = {d}")))
        }
    }
}

/// Radius outside of which the kernel vanishes, if any.
fn support_radius(form: KernelForm) -> Option<f64> {
    match form {
        KernelForm::BallIndicator { r } => Some(r),
        KernelForm::TruncatedGaussian { epsilon, .. } => Some(epsilon),
        _ => None,
    }
}

/// `h_μ` for a kernel and its degree field.
pub fn h_kernel(degrees: &DegreeField, x: &Point, y: &Point) -> Result<f64> {
    degrees.h(x, y)
}
