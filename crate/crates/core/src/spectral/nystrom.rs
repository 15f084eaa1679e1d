//! Extension of Laplacian eigenvectors to eigenfunctions on the whole space.
//!
//! For an eigenpair `(λ, v)` of `L′` with `λ ≠ 1`,
//! `f(x) = (1/n) Σ_j h_n(X_j, x) v_j / (1 − λ)`; for `L` with `λ` outside the
//! range of `m_n`, the denominator is `m_n(x) − λ`. In both cases `f(X_i) = v_i`
//! and `f` is an eigenfunction of `U′_n` or `U_n` with eigenvalue `λ`.

use crate::empirical::{LaplacianVariant, OperatorBundle};
use crate::error::{Error, Result};
use crate::space::Point;

/// Closest a denominator may come to zero.
pub const ESSENTIAL_TOLERANCE: f64 = 1e-6;

/// Relative residual accepted for an eigenpair handed to the extension.
const EIGENPAIR_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct ExtendedEigenfunction<'a> {
    bundle: &'a OperatorBundle,
    vector: Vec<f64>,
    eigenvalue: f64,
    variant: LaplacianVariant,
}

impl<'a> ExtendedEigenfunction<'a> {
    pub fn vector(&self) -> &[f64] {
        &self.vector
    }

    pub fn eigenvalue(&self) -> f64 {
        self.eigenvalue
    }

    pub fn variant(&self) -> LaplacianVariant {
        self.variant
    }

    pub fn bundle(&self) -> &'a OperatorBundle {
        self.bundle
    }

    pub fn eval(&self, x: &Point) -> Result<f64> {
        self.eval_with_row(&self.bundle.h_row(x)?, x)
    }

    /// Evaluation from a precomputed `h_n(x, ·)/n` row.
    pub(crate) fn eval_with_row(&self, row: &[f64], x: &Point) -> Result<f64> {
        let numerator: f64 = row.iter().zip(&self.vector).map(|(h, v)| h * v).sum();
        let denominator = match self.variant {
            LaplacianVariant::Identity => 1.0 - self.eigenvalue,
            LaplacianVariant::Amv => {
                let m: f64 = row.iter().sum();
                let d = m - self.eigenvalue;
                if d.abs() < ESSENTIAL_TOLERANCE {
                    return Err(Error::EssentialSpectrum(format!(
                        "m_n({x:?}) = {m} is within {ESSENTIAL_TOLERANCE} of λ = {}",
                        self.eigenvalue
                    )));
                }
                d
            }
        };
        Ok(numerator / denominator)
    }

    /// `f` at every grid point.
    pub fn eval_many(&self, points: &[Point]) -> Result<Vec<f64>> {
        points.iter().map(|x| self.eval(x)).collect()
    }

    /// `sup_x |U f(x) − λ f(x)|` over `points`, with `U` the operator of the
    /// variant.
    pub fn residual(&self, points: &[Point]) -> Result<f64> {
        let on_sample: Vec<f64> = self.vector.clone();
        let mut worst: f64 = 0.0;
        for x in points {
            let fx = self.eval(x)?;
            let ux = self.bundle.apply_u_values(&on_sample, fx, x, self.variant)?;
            worst = worst.max((ux - self.eigenvalue * fx).abs());
        }
        Ok(worst)
    }
}

fn check_eigenpair(bundle: &OperatorBundle, v: &[f64], lambda: f64, variant: LaplacianVariant) -> Result<()> {
    if v.len() != bundle.len() {
        return Err(Error::domain(format!("vector has {} entries, the sample has {}", v.len(), bundle.len())));
    }
    let lap = bundle.laplacian(variant)?;
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return Err(Error::domain("the zero vector is not an eigenvector"));
    }
    let residual = lap
        .mul_vec(v)
        .iter()
        .zip(v)
        .map(|(a, b)| (a - lambda * b).abs())
        .fold(0.0, f64::max);
    if residual > EIGENPAIR_TOLERANCE * (1.0 + lambda.abs()) * scale {
        return Err(Error::domain(format!(
            "λ = {lambda} is not an eigenvalue for v: residual {residual:e}"
        )));
    }
    Ok(())
}

/// Extension of an eigenpair of `L′`.
pub fn nystrom_extend_identity(bundle: &OperatorBundle, v: Vec<f64>, lambda: f64) -> Result<ExtendedEigenfunction<'_>> {
    if (lambda - 1.0).abs() < ESSENTIAL_TOLERANCE {
        return Err(Error::EssentialSpectrum("the essential spectrum of U′_n is {1}".into()));
    }
    check_eigenpair(bundle, &v, lambda, LaplacianVariant::Identity)?;
    Ok(ExtendedEigenfunction {
        bundle,
        vector: v,
        eigenvalue: lambda,
        variant: LaplacianVariant::Identity,
    })
}

/// Extension of an eigenpair of `L`.
pub fn nystrom_extend_amv(bundle: &OperatorBundle, v: Vec<f64>, lambda: f64) -> Result<ExtendedEigenfunction<'_>> {
    let m = bundle.sample_m()?;
    let lo = m.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = m.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo - ESSENTIAL_TOLERANCE < lambda && lambda < hi + ESSENTIAL_TOLERANCE {
        return Err(Error::EssentialSpectrum(format!("λ = {lambda} lies in the range [{lo}, {hi}] of m_n")));
    }
    check_eigenpair(bundle, &v, lambda, LaplacianVariant::Amv)?;
    Ok(ExtendedEigenfunction {
        bundle,
        vector: v,
        eigenvalue: lambda,
        variant: LaplacianVariant::Amv,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::kernel::KernelDescriptor;
    use crate::space::{unit_circle, SpaceDescriptor};
    use crate::spectral::eig_sym;

    fn constant_bundle(n: usize) -> OperatorBundle {
        let kernel = KernelDescriptor::constant(1.0, 0.5).unwrap();
        OperatorBundle::build(&kernel, &SpaceDescriptor::interval(1.0).unwrap().sample_uniform(n, 2)).unwrap()
    }

    #[test]
    fn constant_kernel_extensions_are_constant() {
        let b = constant_bundle(9);
        let v = vec![1.0 / 3.0; 9];
        let grid = SpaceDescriptor::interval(1.0).unwrap().grid(20);
        let f = nystrom_extend_identity(&b, v.clone(), 0.0).unwrap();
        assert!(f.eval_many(&grid).unwrap().iter().all(|y| (y - 1.0 / 3.0).abs() <= 1e-15));
        let f = nystrom_extend_amv(&b, v.clone(), 0.0).unwrap();
        assert!(f.eval_many(&grid).unwrap().iter().all(|y| (y - 1.0 / 3.0).abs() <= 1e-15));
        assert!(matches!(nystrom_extend_amv(&b, v.clone(), 1.0), Err(Error::EssentialSpectrum(_))));
        assert!(matches!(nystrom_extend_identity(&b, v.clone(), 1.0), Err(Error::EssentialSpectrum(_))));
        assert!(matches!(nystrom_extend_identity(&b, v, 0.25), Err(Error::Domain(_))));
    }

    #[test]
    fn extensions_interpolate_and_solve_the_eigen_equation() {
        let kernel = KernelDescriptor::ball(PI / 4.0, 0.2, 2.0 / PI, 1.0).unwrap();
        let b = OperatorBundle::build(&kernel, &unit_circle().sample_uniform(256, 6)).unwrap();
        let grid = unit_circle().grid(64);
        let s = eig_sym(b.identity_laplacian().unwrap()).unwrap();
        for k in 0..6 {
            let f = nystrom_extend_identity(&b, s.eigenvector(k).to_vec(), s.eigenvalues()[k]).unwrap();
            let on_sample = f.eval_many(b.points().points()).unwrap();
            let gap = on_sample.iter().zip(f.vector()).map(|(a, c)| (a - c).abs()).fold(0.0, f64::max);
            assert!(gap <= 1e-9);
            assert!(f.residual(&grid).unwrap() <= 1e-7 * (1.0 + f.eigenvalue().abs()));
        }
        let s = eig_sym(b.amv_laplacian().unwrap()).unwrap();
        let f = nystrom_extend_amv(&b, s.eigenvector(0).to_vec(), s.eigenvalues()[0]).unwrap();
        let on_sample = f.eval_many(b.points().points()).unwrap();
        assert!(on_sample.iter().zip(f.vector()).all(|(a, c)| (a - c).abs() <= 1e-9));
        assert!(f.residual(&grid).unwrap() <= 1e-9);
    }
}
