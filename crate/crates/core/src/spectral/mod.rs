//! Eigendecompositions, spectral windows and eigenfunction extension.
//!
//! [`eig_sym`] computes the full decomposition of a symmetric matrix and
//! [`eig_sym_lowest`] the lowest part of it. A [`Spectrum`] keeps eigenvalues in
//! ascending order, eigenvectors with a fixed sign convention, and multiplicity
//! groups formed with a gap tolerance relative to `‖A‖max`.

mod lowest;
mod matching;
mod nystrom;
mod window;

use faer::Side;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

pub use lowest::LowestOptions;
pub use matching::{match_reference, principal_angles, GroupMatch};
pub use nystrom::{nystrom_extend_amv, nystrom_extend_identity, ExtendedEigenfunction, ESSENTIAL_TOLERANCE};
pub use window::{projection_error, spectral_window_project, ProjectionError, Window, WINDOW_MARGIN};

/// Relative gap below which neighbouring eigenvalues share a group.
pub const GAP_TOLERANCE: f64 = 1e-6;

/// Absolute symmetry tolerance, scaled by `max(1, ‖A‖max)`.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Which part of the spectrum a [`Spectrum`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Coverage {
    Full,
    /// Every eigenvalue `≤ upper` is present.
    Lowest { upper: f64 },
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: DenseMatrix,
    groups: Vec<usize>,
    scale: f64,
    coverage: Coverage,
}

impl Spectrum {
    fn assemble(eigenvalues: Vec<f64>, mut eigenvectors: DenseMatrix, scale: f64, coverage: Coverage) -> Self {
        let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
        order.sort_by(|&i, &j| eigenvalues[i].total_cmp(&eigenvalues[j]));
        let n = eigenvectors.nrows();
        let sorted_values: Vec<f64> = order.iter().map(|&i| eigenvalues[i]).collect();
        let mut sorted = DenseMatrix::zeros(n, order.len());
        for (dst, &src) in order.iter().enumerate() {
            let col = eigenvectors.column(src);
            let pivot = col
                .iter()
                .enumerate()
                .fold(0, |best, (i, v)| if v.abs() > col[best].abs() { i } else { best });
            let sign = if col.get(pivot).copied().unwrap_or(0.0) < 0.0 { -1.0 } else { 1.0 };
            for (i, v) in col.iter().enumerate() {
                sorted.set(i, dst, sign * v);
            }
        }
        eigenvectors = sorted;
        let gap = GAP_TOLERANCE * scale;
        let mut groups = Vec::with_capacity(sorted_values.len());
        let mut id = 0;
        for (i, v) in sorted_values.iter().enumerate() {
            if i > 0 && v - sorted_values[i - 1] > gap {
                id += 1;
            }
            groups.push(id);
        }
        Self {
            eigenvalues: sorted_values,
            eigenvectors,
            groups,
            scale,
            coverage,
        }
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors, one column per eigenvalue.
    pub fn eigenvectors(&self) -> &DenseMatrix {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, k: usize) -> &[f64] {
        self.eigenvectors.column(k)
    }

    /// Group id of every eigenvalue.
    pub fn groups(&self) -> &[usize] {
        &self.groups
    }

    /// `(first index, size)` of every multiplicity group.
    pub fn group_ranges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for (i, g) in self.groups.iter().enumerate() {
            match out.last_mut() {
                Some(last) if self.groups[last.0] == *g => last.1 += 1,
                _ => out.push((i, 1)),
            }
        }
        out
    }

    /// `‖A‖max` of the decomposed matrix.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn gap_tolerance(&self) -> f64 {
        GAP_TOLERANCE * self.scale
    }

    pub fn coverage(&self) -> Coverage {
        self.coverage
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Dimension of the underlying matrix.
    pub fn dimension(&self) -> usize {
        self.eigenvectors.nrows()
    }

    /// `max_k ‖A v_k − λ_k v_k‖∞`.
    pub fn max_residual(&self, a: &DenseMatrix) -> f64 {
        (0..self.len())
            .map(|k| {
                let v = self.eigenvector(k);
                a.mul_vec(v)
                    .iter()
                    .zip(v)
                    .map(|(av, vi)| (av - self.eigenvalues[k] * vi).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// `max |VᵀV − I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let v = self.eigenvectors.as_faer();
        let gram = v.transpose() * v;
        let mut worst: f64 = 0.0;
        for j in 0..gram.ncols() {
            for i in 0..gram.nrows() {
                let id = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - id).abs());
            }
        }
        worst
    }
}

fn check_symmetric(a: &DenseMatrix) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::domain(format!("matrix is {}×{}", a.nrows(), a.ncols())));
    }
    let scale = a.max_abs();
    let defect = a.symmetry_defect();
    if !(defect <= SYMMETRY_TOLERANCE * scale.max(1.0)) {
        return Err(Error::domain(format!("matrix is not symmetric: max |a_ij − a_ji| = {defect:e}")));
    }
    Ok(scale)
}

/// Full eigendecomposition of a symmetric matrix.
pub fn eig_sym(a: &DenseMatrix) -> Result<Spectrum> {
    let scale = check_symmetric(a)?;
    let evd = a
        .as_faer()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?;
    let values: Vec<f64> = evd.S().column_vector().iter().copied().collect();
    let vectors = DenseMatrix::from_faer(evd.U());
    Ok(Spectrum::assemble(values, vectors, scale, Coverage::Full))
}

/// The `count` lowest eigenpairs of a symmetric matrix, widened so that the
/// last multiplicity group is complete. Falls back to [`eig_sym`] for small
/// matrices.
pub fn eig_sym_lowest(a: &DenseMatrix, count: usize, options: &LowestOptions) -> Result<Spectrum> {
    let scale = check_symmetric(a)?;
    let n = a.nrows();
    if count == 0 {
        return Err(Error::domain("at least one eigenpair must be requested"));
    }
    if n <= options.dense_threshold || count + options.block >= n / 2 {
        let full = eig_sym(a)?;
        return Ok(full.truncate(count));
    }
    let (values, vectors) = lowest::lowest_eigenpairs(a, count, scale, options)?;
    let upper = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spectrum = Spectrum::assemble(values, vectors, scale, Coverage::Lowest { upper });
    Ok(spectrum.drop_incomplete_top_group(count))
}

impl Spectrum {
    /// Lowest `count` pairs, extended to the end of the straddling group.
    fn truncate(self, count: usize) -> Self {
        if count >= self.len() {
            return self;
        }
        let mut keep = count;
        while keep < self.len() && self.groups[keep] == self.groups[keep - 1] {
            keep += 1;
        }
        if keep == self.len() {
            return self;
        }
        let upper = self.eigenvalues[keep - 1];
        self.keep_prefix(keep, Coverage::Lowest { upper })
    }

    /// A top group touching the end of a partial spectrum may be missing
    /// members, so it is discarded unless that would leave fewer than `count`.
    fn drop_incomplete_top_group(self, count: usize) -> Self {
        let Some(&last) = self.groups.last() else { return self };
        let keep = self.groups.iter().position(|g| *g == last).unwrap_or(0);
        if keep < count {
            return self;
        }
        let upper = self.eigenvalues[keep - 1];
        self.keep_prefix(keep, Coverage::Lowest { upper })
    }

    fn keep_prefix(self, keep: usize, coverage: Coverage) -> Self {
        let n = self.eigenvectors.nrows();
        let vectors = DenseMatrix::from_fn(n, keep, |i, j| self.eigenvectors.get(i, j));
        Self {
            eigenvalues: self.eigenvalues[..keep].to_vec(),
            eigenvectors: vectors,
            groups: self.groups[..keep].to_vec(),
            scale: self.scale,
            coverage,
        }
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::empirical::OperatorBundle;
    use crate::kernel::KernelDescriptor;
    use crate::space::{unit_circle, SpaceDescriptor};

    fn constant_identity_laplacian(n: usize) -> DenseMatrix {
        let space = SpaceDescriptor::interval(1.0).unwrap();
        let kernel = KernelDescriptor::constant(1.0, 0.5).unwrap();
        let b = OperatorBundle::build(&kernel, &space.sample_uniform(n, 1)).unwrap();
        b.identity_laplacian().unwrap().clone()
    }

    #[test]
    fn constant_kernel_spectrum_is_zero_then_ones() {
        for n in [2, 8, 64] {
            let s = eig_sym(&constant_identity_laplacian(n)).unwrap();
            assert!(s.eigenvalues()[0].abs() <= 1e-12);
            assert!(s.eigenvalues()[1..].iter().all(|v| (v - 1.0).abs() <= 1e-12));
            assert_eq!(s.group_ranges(), vec![(0, 1), (1, n - 1)]);
            let v0 = s.eigenvector(0);
            assert!(v0.iter().all(|v| (v - 1.0 / (n as f64).sqrt()).abs() <= 1e-12));
        }
    }

    #[test]
    fn identity_matrix() {
        let s = eig_sym(&DenseMatrix::identity(5)).unwrap();
        assert_eq!(s.eigenvalues(), &[1.0; 5]);
        assert_eq!(s.group_ranges(), vec![(0, 5)]);
    }

    #[test]
    fn rejects_asymmetric_input() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0 + 1e-9, 1.0]]).unwrap();
        assert!(matches!(eig_sym(&a), Err(Error::Domain(_))));
        assert!(eig_sym(&DenseMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn sign_convention_makes_the_largest_entry_positive() {
        let a = DenseMatrix::from_rows(&[vec![2.0, -1.0, 0.0], vec![-1.0, 2.0, -1.0], vec![0.0, -1.0, 2.0]]).unwrap();
        let s = eig_sym(&a).unwrap();
        for k in 0..3 {
            let v = s.eigenvector(k);
            let big = v.iter().fold(0.0f64, |m, x| if x.abs() > m.abs() { *x } else { m });
            assert!(big > 0.0);
        }
        assert!(s.max_residual(&a) <= 1e-12);
        assert!(s.orthonormality_defect() <= 1e-12);
    }

    #[test]
    fn residuals_and_orthonormality_on_a_ball_laplacian() {
        let kernel = KernelDescriptor::ball(PI / 4.0, 0.2, 2.0 / PI, 1.0).unwrap();
        let b = OperatorBundle::build(&kernel, &unit_circle().sample_uniform(300, 2)).unwrap();
        for lap in [b.amv_laplacian().unwrap(), b.identity_laplacian().unwrap()] {
            let s = eig_sym(lap).unwrap();
            assert!(s.max_residual(lap) <= 1e-9 * s.scale());
            assert!(s.orthonormality_defect() <= 1e-9);
        }
    }

    #[test]
    fn lowest_pairs_agree_with_full_decomposition() {
        let kernel = KernelDescriptor::ball(PI / 4.0, 0.2, 2.0 / PI, 1.0).unwrap();
        let b = OperatorBundle::build(&kernel, &unit_circle().sample_uniform(600, 9)).unwrap();
        let lap = b.identity_laplacian().unwrap();
        let full = eig_sym(lap).unwrap();
        let options = LowestOptions {
            dense_threshold: 0,
            ..LowestOptions::default()
        };
        let low = eig_sym_lowest(lap, 7, &options).unwrap();
        assert!(low.len() >= 7);
        assert!(matches!(low.coverage(), Coverage::Lowest { .. }));
        for (k, v) in low.eigenvalues().iter().enumerate() {
            assert!((v - full.eigenvalues()[k]).abs() <= 1e-10, "{k}: {v} vs {}", full.eigenvalues()[k]);
        }
        assert!(low.max_residual(lap) <= 1e-9 * low.scale());
        assert!(low.orthonormality_defect() <= 1e-9);
    }

    #[test]
    fn truncation_keeps_whole_groups() {
        let s = eig_sym(&constant_identity_laplacian(8)).unwrap().truncate(3);
        assert_eq!(s.len(), 8);
        let a = DenseMatrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 2.0]]).unwrap();
        let s = eig_sym(&a).unwrap().truncate(2);
        assert_eq!(s.len(), 3);
        let s = eig_sym(&a).unwrap().truncate(1);
        assert_eq!(s.len(), 1);
        assert_eq!(s.coverage(), Coverage::Lowest { upper: 1.0 });
    }
}
