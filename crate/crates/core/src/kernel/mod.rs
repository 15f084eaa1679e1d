//! Symmetric non-negative kernels together with their declared constants.
//!
//! A [`KernelDescriptor`] carries the kernel shape and the hypotheses it is
//! meant to satisfy: the upper bound `M` (`k ≤ M`), the degree lower bound
//! `a` (`d_μ ≥ a`), and a power-law continuity modulus `ω(δ) ≤ C_ω δ^{m'}`.
//! These are inputs, checked by [`verify_membership`], never inferred.

mod degree;
mod membership;

pub use degree::{h_kernel, DegreeField, DegreeMethod, DEFAULT_RESOLUTION};
pub use membership::{
    modulus_estimate, modulus_fan_estimate, verify_membership, MembershipReport, ModulusEstimate, ModulusProbe,
    MODULUS_LADDER, MODULUS_RELATIVE_SLACK,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{Point, SpaceDescriptor};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelForm {
    /// `k(x, y) = 1` if `d(x, y) < r`, else `0`.
    BallIndicator { r: f64 },
    /// `k(x, y) = exp(-d(x, y)² / 4t)`.
    Gaussian { t: f64 },
    /// Gaussian cut off outside the open ball of radius `epsilon`.
    TruncatedGaussian { t: f64, epsilon: f64 },
    Constant { c: f64 },
}

/// `ω(δ) ≤ scale · δ^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuityModulus {
    pub scale: f64,
    pub exponent: f64,
}

impl ContinuityModulus {
    pub fn bound(&self, delta: f64) -> f64 {
        self.scale * delta.powf(self.exponent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelSpec", into = "KernelSpec")]
pub struct KernelDescriptor {
    form: KernelForm,
    upper_bound: f64,
    degree_lower_bound: f64,
    modulus: ContinuityModulus,
}

impl KernelDescriptor {
    /// Validates `0 < a ≤ 1 ≤ M`, positive modulus parameters and the shape parameters.
    pub fn new(form: KernelForm, upper_bound: f64, degree_lower_bound: f64, modulus: ContinuityModulus) -> Result<Self> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::domain(format!("{name} must be finite and positive, got {v}")))
            }
        };
        match form {
            KernelForm::BallIndicator { r } => positive("ball radius r", r)?,
            KernelForm::Gaussian { t } => positive("gaussian time t", t)?,
            KernelForm::TruncatedGaussian { t, epsilon } => {
                positive("gaussian time t", t)?;
                positive("truncation radius epsilon", epsilon)?;
            }
            KernelForm::Constant { c } => positive("constant c", c)?,
        }
        if !(degree_lower_bound > 0.0 && degree_lower_bound <= 1.0) {
            return Err(Error::domain(format!("a must lie in (0, 1], got {degree_lower_bound}")));
        }
        if !(upper_bound >= 1.0 && upper_bound.is_finite()) {
            return Err(Error::domain(format!("M must lie in [1, ∞), got {upper_bound}")));
        }
        positive("C_omega", modulus.scale)?;
        positive("m_prime", modulus.exponent)?;
        let sup = match form {
            KernelForm::BallIndicator { .. } | KernelForm::Gaussian { .. } | KernelForm::TruncatedGaussian { .. } => 1.0,
            KernelForm::Constant { c } => c,
        };
        if sup > upper_bound {
            return Err(Error::domain(format!("kernel supremum {sup} exceeds M = {upper_bound}")));
        }
        Ok(Self {
            form,
            upper_bound,
            degree_lower_bound,
            modulus,
        })
    }

    /// Ball indicator with `M = 1`, the given `a` and the modulus `C_ω δ^{m'}`.
    pub fn ball(r: f64, a: f64, c_omega: f64, m_prime: f64) -> Result<Self> {
        Self::new(
            KernelForm::BallIndicator { r },
            1.0,
            a,
            ContinuityModulus {
                scale: c_omega,
                exponent: m_prime,
            },
        )
    }

    /// Constant kernel `c` with `M = max(1, c)` and a Lipschitz-free modulus.
    pub fn constant(c: f64, a: f64) -> Result<Self> {
        Self::new(
            KernelForm::Constant { c },
            c.max(1.0),
            a,
            ContinuityModulus {
                scale: 1.0,
                exponent: 1.0,
            },
        )
    }

    pub fn gaussian(t: f64, a: f64, c_omega: f64, m_prime: f64) -> Result<Self> {
        Self::new(
            KernelForm::Gaussian { t },
            1.0,
            a,
            ContinuityModulus {
                scale: c_omega,
                exponent: m_prime,
            },
        )
    }

    pub fn form(&self) -> KernelForm {
        self.form
    }

    /// The constant `M` of the upper bound.
    pub fn upper_bound(&self) -> f64 {
        self.upper_bound
    }

    /// The constant `a` of the degree lower bound.
    pub fn degree_lower_bound(&self) -> f64 {
        self.degree_lower_bound
    }

    pub fn modulus(&self) -> ContinuityModulus {
        self.modulus
    }

    /// `k(x, y)` for points already known to belong to `space`.
    #[inline]
    pub fn eval(&self, space: &SpaceDescriptor, x: &Point, y: &Point) -> f64 {
        match self.form {
            KernelForm::Constant { c } => c,
            form => self.profile(form, space.distance_unchecked(x, y)),
        }
    }

    /// `k(x, y)` with domain validation of both points.
    pub fn eval_checked(&self, space: &SpaceDescriptor, x: &Point, y: &Point) -> Result<f64> {
        let d = space.distance(x, y)?;
        Ok(self.profile(self.form, d))
    }

    /// Kernel value as a function of the distance.
    #[inline]
    pub fn profile(&self, form: KernelForm, d: f64) -> f64 {
        match form {
            KernelForm::BallIndicator { r } => {
                if d < r {
                    1.0
                } else {
                    0.0
                }
            }
            KernelForm::Gaussian { t } => (-d * d / (4.0 * t)).exp(),
            KernelForm::TruncatedGaussian { t, epsilon } => {
                if d < epsilon {
                    (-d * d / (4.0 * t)).exp()
                } else {
                    0.0
                }
            }
            KernelForm::Constant { c } => c,
        }
    }

    /// Short label used in reports.
    pub fn label(&self) -> String {
        match self.form {
            KernelForm::BallIndicator { r } => format!("ball(r={r})"),
            KernelForm::Gaussian { t } => format!("gaussian(t={t})"),
            KernelForm::TruncatedGaussian { t, epsilon } => format!("truncated_gaussian(t={t}, epsilon={epsilon})"),
            KernelForm::Constant { c } => format!("constant({c})"),
        }
    }
}

/// Flat JSON form, e.g.
/// `{"form":"ball","r":0.785398,"M":1,"a":0.2,"C_omega":0.6366,"m_prime":1}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub form: KernelFormTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(rename = "M")]
    pub upper_bound: f64,
    pub a: f64,
    #[serde(rename = "C_omega")]
    pub c_omega: f64,
    pub m_prime: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFormTag {
    Ball,
    Gaussian,
    TruncatedGaussian,
    Constant,
}

impl TryFrom<KernelSpec> for KernelDescriptor {
    type Error = Error;

    fn try_from(spec: KernelSpec) -> Result<Self> {
        let need = |name: &str, v: Option<f64>| v.ok_or_else(|| Error::config(format!("kernel is missing `{name}`")));
        let reject = |names: &[(&str, Option<f64>)]| -> Result<()> {
            match names.iter().find(|(_, v)| v.is_some()) {
                Some((name, _)) => Err(Error::config(format!("`{name}` does not apply to this kernel form"))),
                None => Ok(()),
            }
        };
        let form = match spec.form {
            KernelFormTag::Ball => {
                reject(&[("t", spec.t), ("epsilon", spec.epsilon), ("c", spec.c)])?;
                KernelForm::BallIndicator { r: need("r", spec.r)? }
            }
            KernelFormTag::Gaussian => {
                reject(&[("r", spec.r), ("epsilon", spec.epsilon), ("c", spec.c)])?;
                KernelForm::Gaussian { t: need("t", spec.t)? }
            }
            KernelFormTag::TruncatedGaussian => {
                reject(&[("r", spec.r), ("c", spec.c)])?;
                KernelForm::TruncatedGaussian {
                    t: need("t", spec.t)?,
                    epsilon: need("epsilon", spec.epsilon)?,
                }
            }
            KernelFormTag::Constant => {
                reject(&[("r", spec.r), ("t", spec.t), ("epsilon", spec.epsilon)])?;
                KernelForm::Constant { c: need("c", spec.c)? }
            }
        };
        KernelDescriptor::new(
            form,
            spec.upper_bound,
            spec.a,
            ContinuityModulus {
                scale: spec.c_omega,
                exponent: spec.m_prime,
            },
        )
    }
}

impl From<KernelDescriptor> for KernelSpec {
    fn from(k: KernelDescriptor) -> Self {
        let mut spec = KernelSpec {
            form: KernelFormTag::Constant,
            r: None,
            t: None,
            epsilon: None,
            c: None,
            upper_bound: k.upper_bound,
            a: k.degree_lower_bound,
            c_omega: k.modulus.scale,
            m_prime: k.modulus.exponent,
        };
        match k.form {
            KernelForm::BallIndicator { r } => {
                spec.form = KernelFormTag::Ball;
                spec.r = Some(r);
            }
            KernelForm::Gaussian { t } => {
                spec.form = KernelFormTag::Gaussian;
                spec.t = Some(t);
            }
            KernelForm::TruncatedGaussian { t, epsilon } => {
                spec.form = KernelFormTag::TruncatedGaussian;
                spec.t = Some(t);
                spec.epsilon = Some(epsilon);
            }
            KernelForm::Constant { c } => spec.c = Some(c),
        }
        spec
    }
}
