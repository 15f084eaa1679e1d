//! Lowest eigenpairs of a large symmetric matrix by block Davidson iteration.
//!
//! Without a preconditioner, expanding the search space with Ritz residuals
//! spans the same block Krylov space as Lanczos; the basis is kept fully
//! orthogonal and is restarted from the current Ritz vectors when it grows
//! past `max_basis`.

use faer::{Mat, Side};
use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowestOptions {
    /// Vectors added per expansion step.
    pub block: usize,
    pub max_basis: usize,
    /// Residual tolerance `‖A y − θ y‖₂ ≤ tolerance · ‖A‖max`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Matrices up to this size are decomposed densely.
    pub dense_threshold: usize,
    pub seed: u64,
}

impl Default for LowestOptions {
    fn default() -> Self {
        Self {
            block: 4,
            max_basis: 160,
            tolerance: 1e-10,
            max_iterations: 4000,
            dense_threshold: 1536,
            seed: 0x5eed,
        }
    }
}

pub(super) fn lowest_eigenpairs(
    a: &DenseMatrix,
    count: usize,
    scale: f64,
    options: &LowestOptions,
) -> Result<(Vec<f64>, DenseMatrix)> {
    let n = a.nrows();
    let block = options.block.max(1);
    let wanted = (count + block).min(n);
    let max_basis = options.max_basis.max(wanted + 2 * block).min(n);
    let threshold = options.tolerance * scale.max(f64::MIN_POSITIVE);
    let a = a.as_faer();
    let mut rng = stream_rng(options.seed, 0);
    let mut random_block = |cols: usize| Mat::<f64>::from_fn(n, cols, |_, _| rng.gen::<f64>() - 0.5);

    let mut q = Mat::<f64>::zeros(n, 0);
    let mut aq = Mat::<f64>::zeros(n, 0);
    let mut h = Mat::<f64>::zeros(0, 0);
    let mut x = random_block(wanted + block);

    for _ in 0..options.max_iterations {
        let mut fresh = orthonormalize_against(q.as_ref(), x);
        if fresh.ncols() == 0 {
            fresh = orthonormalize_against(q.as_ref(), random_block(block));
        }
        if fresh.ncols() == 0 {
            return Err(Error::LinearAlgebra("search space exhausted".into()));
        }
        let afresh = a * fresh.as_ref();
        let cross = q.transpose() * afresh.as_ref();
        let inner = fresh.transpose() * afresh.as_ref();
        let m = q.ncols();
        let b = fresh.ncols();
        h = Mat::from_fn(m + b, m + b, |i, j| match (i < m, j < m) {
            (true, true) => h[(i, j)],
            (true, false) => cross[(i, j - m)],
            (false, true) => cross[(j, i - m)],
            (false, false) => 0.5 * (inner[(i - m, j - m)] + inner[(j - m, i - m)]),
        });
        q = hcat(q, fresh);
        aq = hcat(aq, afresh);

        let evd = h
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?;
        let theta: Vec<f64> = evd.S().column_vector().iter().copied().collect();
        let take = wanted.min(theta.len());
        let s = evd.U().subcols(0, take);
        let y = q.as_ref() * s;
        let ay = aq.as_ref() * s;
        let residual = Mat::<f64>::from_fn(n, take, |i, j| ay[(i, j)] - theta[j] * y[(i, j)]);
        let unconverged: Vec<usize> = (0..take)
            .filter(|&j| residual.col(j).norm_l2() > threshold)
            .collect();
        if unconverged.is_empty() && take == wanted {
            let vectors = DenseMatrix::from_faer(y.as_ref());
            return Ok((theta[..take].to_vec(), vectors));
        }
        let chosen: Vec<usize> = unconverged.into_iter().take(block).collect();
        x = Mat::from_fn(n, chosen.len(), |i, j| residual[(i, chosen[j])]);

        if q.ncols() + block > max_basis {
            let keep = (wanted + block).min(theta.len());
            let s = evd.U().subcols(0, keep);
            q = q.as_ref() * s;
            aq = aq.as_ref() * s;
            h = Mat::from_fn(keep, keep, |i, j| if i == j { theta[i] } else { 0.0 });
        }
    }
    Err(Error::LinearAlgebra(format!(
        "lowest {count} eigenpairs did not converge in {} iterations",
        options.max_iterations
    )))
}

fn hcat(left: Mat<f64>, right: Mat<f64>) -> Mat<f64> {
    let m = left.ncols();
    Mat::from_fn(left.nrows(), m + right.ncols(), |i, j| {
        if j < m {
            left[(i, j)]
        } else {
            right[(i, j - m)]
        }
    })
}

/// Orthonormal basis of the part of `x` orthogonal to the orthonormal `q`;
/// nearly dependent columns are dropped.
fn orthonormalize_against(q: faer::MatRef<'_, f64>, mut x: Mat<f64>) -> Mat<f64> {
    for _ in 0..2 {
        if q.ncols() > 0 {
            let coeffs = q.transpose() * x.as_ref();
            x -= q * coeffs;
        }
    }
    let mut kept: Vec<Vec<f64>> = Vec::new();
    for j in 0..x.ncols() {
        let mut v: Vec<f64> = x.col(j).iter().copied().collect();
        let original = norm(&v);
        if original == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for u in &kept {
                let c = dot(u, &v);
                v.iter_mut().zip(u).for_each(|(vi, ui)| *vi -= c * ui);
            }
            if q.ncols() > 0 {
                let qv: Vec<f64> = (0..q.ncols()).map(|k| dot_col(q, k, &v)).collect();
                for (k, c) in qv.iter().enumerate() {
                    for (i, vi) in v.iter_mut().enumerate() {
                        *vi -= c * q[(i, k)];
                    }
                }
            }
        }
        let len = norm(&v);
        if len > 1e-10 * original {
            v.iter_mut().for_each(|vi| *vi /= len);
            kept.push(v);
        }
    }
    Mat::from_fn(x.nrows(), kept.len(), |i, j| kept[j][i])
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dot_col(q: faer::MatRef<'_, f64>, k: usize, v: &[f64]) -> f64 {
    v.iter().enumerate().map(|(i, vi)| q[(i, k)] * vi).sum()
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}
