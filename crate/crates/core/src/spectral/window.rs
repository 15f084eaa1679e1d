//! Spectral windows and the projections they select.

use serde::{Deserialize, Serialize};

use super::{Coverage, Spectrum};
use crate::empirical::{restrict, LaplacianVariant, OperatorBundle};
use crate::error::{Error, Result};
use crate::space::Point;

/// Default distance kept between a window boundary and any eigenvalue.
pub const WINDOW_MARGIN: f64 = 1e-3;

/// An open interval `(lo, hi)` of the real line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
    #[serde(default = "default_margin")]
    pub margin: f64,
}

fn default_margin() -> f64 {
    WINDOW_MARGIN
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::IllPosedWindow(format!("({lo}, {hi}) is not an interval")));
        }
        Ok(Self {
            lo,
            hi,
            margin: WINDOW_MARGIN,
        })
    }

    pub fn around(center: f64, half_width: f64) -> Result<Self> {
        Self::new(center - half_width, center + half_width)
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lo < value && value < self.hi
    }

    /// Indices of the eigenvalues inside the window, after checking that none
    /// sits near a boundary and that the spectrum covers the whole window.
    pub fn select(&self, spectrum: &Spectrum) -> Result<Vec<usize>> {
        Window::new(self.lo, self.hi)?;
        for &v in spectrum.eigenvalues() {
            if (v - self.lo).abs() < self.margin || (v - self.hi).abs() < self.margin {
                return Err(Error::IllPosedWindow(format!(
                    "eigenvalue {v} lies within {} of the boundary of ({}, {})",
                    self.margin, self.lo, self.hi
                )));
            }
        }
        if let Coverage::Lowest { upper } = spectrum.coverage() {
            if self.hi > upper - self.margin {
                return Err(Error::IllPosedWindow(format!(
                    "window ({}, {}) reaches past the computed part of the spectrum (≤ {upper})",
                    self.lo, self.hi
                )));
            }
        }
        Ok((0..spectrum.len())
            .filter(|&k| self.contains(spectrum.eigenvalues()[k]))
            .collect())
    }

    /// Rejects windows that meet the essential spectrum: `{1}` for `U′_n`, and
    /// the range of `m_n` on the sample for `U_n`.
    pub fn check_essential(&self, bundle: &OperatorBundle, variant: LaplacianVariant) -> Result<()> {
        let (lo, hi) = match variant {
            LaplacianVariant::Identity => (1.0, 1.0),
            LaplacianVariant::Amv => {
                let m = bundle.sample_m()?;
                let lo = m.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = m.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            }
        };
        if self.lo < hi + self.margin && lo - self.margin < self.hi {
            return Err(Error::IllPosedWindow(format!(
                "window ({}, {}) meets the essential spectrum [{lo}, {hi}]",
                self.lo, self.hi
            )));
        }
        Ok(())
    }
}

/// Orthogonal projection of `target` onto the eigenvectors selected by `window`.
pub fn spectral_window_project(spectrum: &Spectrum, window: &Window, target: &[f64]) -> Result<Vec<f64>> {
    if target.len() != spectrum.dimension() {
        return Err(Error::domain(format!(
            "target has {} entries, the spectrum dimension is {}",
            target.len(),
            spectrum.dimension()
        )));
    }
    let selected = window.select(spectrum)?;
    Ok(project_onto(spectrum, &selected, target).1)
}

/// Coefficients `v_kᵀ target` and the projection `Σ_k (v_kᵀ target) v_k`.
fn project_onto(spectrum: &Spectrum, selected: &[usize], target: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut out = vec![0.0; target.len()];
    let mut coefficients = Vec::with_capacity(selected.len());
    for &k in selected {
        let v = spectrum.eigenvector(k);
        let c: f64 = v.iter().zip(target).map(|(a, b)| a * b).sum();
        out.iter_mut().zip(v).for_each(|(o, vi)| *o += c * vi);
        coefficients.push(c);
    }
    (coefficients, out)
}

/// Sup-norm distance between `u` and its spectral projection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectionError {
    /// `max_i |u(X_i) − (Pr_n ρ_n u)_i|`.
    pub sample: f64,
    /// Sup over an off-sample grid of `|u(x) − Pr_n u(x)|`, through the
    /// extended eigenfunctions.
    pub grid: Option<f64>,
    /// Number of eigenvectors in the window.
    pub rank: usize,
}

impl ProjectionError {
    pub fn value(&self) -> f64 {
        self.grid.map_or(self.sample, |g| g.max(self.sample))
    }
}

/// `‖u − Pr_n u‖∞` on the sample and, when `grid` is given, on the grid as
/// well. `spectrum` must decompose the Laplacian of `variant`.
pub fn projection_error(
    bundle: &OperatorBundle,
    spectrum: &Spectrum,
    window: &Window,
    variant: LaplacianVariant,
    u: impl Fn(&Point) -> f64,
    grid: Option<&[Point]>,
) -> Result<ProjectionError> {
    if spectrum.dimension() != bundle.len() {
        return Err(Error::domain("spectrum and bundle sizes differ"));
    }
    window.check_essential(bundle, variant)?;
    let selected = window.select(spectrum)?;
    let values = restrict(&u, bundle.points());
    let (coefficients, projected) = project_onto(spectrum, &selected, &values);
    let sample = values
        .iter()
        .zip(&projected)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let grid = match grid {
        None => None,
        Some(points) => {
            let extensions = selected
                .iter()
                .map(|&k| {
                    let v = spectrum.eigenvector(k).to_vec();
                    let lambda = spectrum.eigenvalues()[k];
                    match variant {
                        LaplacianVariant::Identity => super::nystrom_extend_identity(bundle, v, lambda),
                        LaplacianVariant::Amv => super::nystrom_extend_amv(bundle, v, lambda),
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            let mut worst: f64 = 0.0;
            for x in points {
                let row = bundle.h_row(x)?;
                let mut value = 0.0;
                for (f, c) in extensions.iter().zip(&coefficients) {
                    value += c * f.eval_with_row(&row, x)?;
                }
                worst = worst.max((u(x) - value).abs());
            }
            Some(worst)
        }
    };
    Ok(ProjectionError {
        sample,
        grid,
        rank: selected.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelDescriptor;
    use crate::matrix::DenseMatrix;
    use crate::space::SpaceDescriptor;
    use crate::spectral::eig_sym;

    fn constant_setup(n: usize) -> (OperatorBundle, Spectrum) {
        let space = SpaceDescriptor::interval(1.0).unwrap();
        let kernel = KernelDescriptor::constant(1.0, 0.5).unwrap();
        let b = OperatorBundle::build(&kernel, &space.sample_uniform(n, 4)).unwrap();
        let s = eig_sym(b.identity_laplacian().unwrap()).unwrap();
        (b, s)
    }

    #[test]
    fn full_and_empty_windows() {
        let (_, s) = constant_setup(6);
        let t = [0.3, -1.0, 2.0, 0.0, 5.0, 1.5];
        let all = spectral_window_project(&s, &Window::new(-0.5, 1.5).unwrap(), &t).unwrap();
        assert!(all.iter().zip(&t).all(|(a, b)| (a - b).abs() <= 1e-12));
        let none = spectral_window_project(&s, &Window::new(2.0, 3.0).unwrap(), &t).unwrap();
        assert_eq!(none, vec![0.0; 6]);
        let ones = spectral_window_project(&s, &Window::new(-0.5, 0.5).unwrap(), &[1.0; 6]).unwrap();
        assert!(ones.iter().all(|v| (v - 1.0).abs() <= 1e-12));
    }

    #[test]
    fn boundary_eigenvalues_are_rejected() {
        let (_, s) = constant_setup(4);
        let err = spectral_window_project(&s, &Window::new(-0.5, 0.9995).unwrap(), &[1.0; 4]);
        assert!(matches!(err, Err(Error::IllPosedWindow(_))));
        assert!(Window::new(1.0, 1.0).is_err());
    }

    #[test]
    fn windows_meeting_the_essential_spectrum_are_rejected() {
        let (b, s) = constant_setup(8);
        let w = Window::new(0.5, 1.5).unwrap();
        let r = projection_error(&b, &s, &w, LaplacianVariant::Identity, |_| 1.0, None);
        assert!(matches!(r, Err(Error::IllPosedWindow(_))));
        let s_amv = eig_sym(b.amv_laplacian().unwrap()).unwrap();
        let r = projection_error(&b, &s_amv, &w, LaplacianVariant::Amv, |_| 1.0, None);
        assert!(matches!(r, Err(Error::IllPosedWindow(_))));
    }

    #[test]
    fn projector_is_idempotent_and_symmetric() {
        let a = DenseMatrix::from_fn(12, 12, |i, j| 1.0 / (1.0 + i as f64 + j as f64) + if i == j { i as f64 } else { 0.0 });
        let s = eig_sym(&a).unwrap();
        let lo = s.eigenvalues()[2] - 0.3;
        let hi = s.eigenvalues()[5] + 0.3;
        let w = Window::new(lo, hi).unwrap().with_margin(1e-6);
        let x: Vec<f64> = (0..12).map(|i| (i as f64).sin()).collect();
        let y: Vec<f64> = (0..12).map(|i| (i as f64 * 0.7).cos()).collect();
        let px = spectral_window_project(&s, &w, &x).unwrap();
        let ppx = spectral_window_project(&s, &w, &px).unwrap();
        assert!(px.iter().zip(&ppx).all(|(a, b)| (a - b).abs() <= 1e-10));
        let py = spectral_window_project(&s, &w, &y).unwrap();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
        assert!((dot(&px, &y) - dot(&x, &py)).abs() <= 1e-10);
    }

    #[test]
    fn error_of_an_eigenfunction_is_zero() {
        let (b, s) = constant_setup(10);
        let w = Window::new(-0.5, 0.5).unwrap();
        let grid = SpaceDescriptor::interval(1.0).unwrap().grid(33);
        let e = projection_error(&b, &s, &w, LaplacianVariant::Identity, |_| 0.7, Some(&grid)).unwrap();
        assert!(e.value() <= 1e-12);
        assert_eq!(e.rank, 1);
        let empty = Window::new(-2.0, -1.0).unwrap();
        let e = projection_error(&b, &s, &empty, LaplacianVariant::Identity, |p| p.coord().unwrap() - 3.0, None).unwrap();
        let sup = b.points().points().iter().map(|p| (p.coord().unwrap() - 3.0).abs()).fold(0.0, f64::max);
        assert_eq!(e.value(), sup);
    }
}
