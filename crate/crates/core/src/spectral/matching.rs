//! Pairing empirical eigenvalue clusters with reference eigenspaces.
//!
//! Individual eigenvectors are not identifiable inside a multiplicity group,
//! so reference groups are matched to empirical eigenvalues by rank and the
//! two subspaces are compared through their principal angles.

use faer::{Mat, Side};
use serde::Serialize;

use super::Spectrum;
use crate::error::{Error, Result};
use crate::reference::ReferenceSpectrum;
use crate::space::PointSet;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupMatch {
    pub frequency: usize,
    pub reference_eigenvalue: f64,
    pub multiplicity: usize,
    /// Indices into the empirical spectrum.
    pub indices: Vec<usize>,
    pub empirical_eigenvalues: Vec<f64>,
    /// Mean of the matched empirical eigenvalues.
    pub cluster_mean: f64,
    /// `max |λ_n − λ|` over the cluster.
    pub max_deviation: f64,
    /// Largest principal angle, in radians, between the empirical eigenvectors
    /// and the reference eigenfunctions restricted to the sample.
    pub max_angle: f64,
}

/// Matches the reference groups, in ascending eigenvalue order, to
/// consecutive runs of the empirical spectrum. Groups that would run past the
/// computed eigenvalues are left out.
pub fn match_reference(spectrum: &Spectrum, reference: &ReferenceSpectrum, points: &PointSet) -> Result<Vec<GroupMatch>> {
    if points.len() != spectrum.dimension() {
        return Err(Error::domain("points and spectrum sizes differ"));
    }
    let mut out = Vec::new();
    let mut rank = 0;
    for group in reference.ascending() {
        let indices: Vec<usize> = (rank..rank + group.multiplicity).collect();
        rank += group.multiplicity;
        if rank > spectrum.len() {
            break;
        }
        let values: Vec<f64> = indices.iter().map(|&k| spectrum.eigenvalues()[k]).collect();
        let vectors: Vec<Vec<f64>> = indices.iter().map(|&k| spectrum.eigenvector(k).to_vec()).collect();
        let functions = group.eigenfunctions(points.points());
        let angles = principal_angles(&vectors, &functions)?;
        out.push(GroupMatch {
            frequency: group.frequency,
            reference_eigenvalue: group.eigenvalue,
            multiplicity: group.multiplicity,
            cluster_mean: values.iter().sum::<f64>() / values.len() as f64,
            max_deviation: values.iter().map(|v| (v - group.eigenvalue).abs()).fold(0.0, f64::max),
            max_angle: angles.iter().copied().fold(0.0, f64::max),
            indices,
            empirical_eigenvalues: values,
        });
    }
    Ok(out)
}

/// Principal angles, ascending, between the spans of two families of vectors.
pub fn principal_angles(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<Vec<f64>> {
    let qa = orthonormal_basis(a)?;
    let qb = orthonormal_basis(b)?;
    let cross = Mat::<f64>::from_fn(qa.len(), qb.len(), |i, j| dot(&qa[i], &qb[j]));
    let gram = if qa.len() <= qb.len() {
        cross.as_ref() * cross.transpose()
    } else {
        cross.transpose() * cross.as_ref()
    };
    let mut cosines: Vec<f64> = gram
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?
        .into_iter()
        .map(|s| s.max(0.0).sqrt().min(1.0))
        .collect();
    cosines.sort_by(|x, y| y.total_cmp(x));
    Ok(cosines.into_iter().map(f64::acos).collect())
}

fn orthonormal_basis(vectors: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        let original = dot(&w, &w).sqrt();
        for _ in 0..2 {
            for u in &basis {
                let c = dot(u, &w);
                w.iter_mut().zip(u).for_each(|(wi, ui)| *wi -= c * ui);
            }
        }
        let len = dot(&w, &w).sqrt();
        if !(len > 1e-12 * original) {
            return Err(Error::domain("vectors are linearly dependent"));
        }
        w.iter_mut().for_each(|wi| *wi /= len);
        basis.push(w);
    }
    Ok(basis)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
