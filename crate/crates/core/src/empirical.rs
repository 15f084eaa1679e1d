//! Sample matrices and empirical integral operators.
//!
//! For a sample `X_1, …, X_n` with empirical measure `μ_n`, the bundle holds
//!
//! * `K_ij = k(X_i, X_j) / n`, the similarity matrix,
//! * `D_ii = Σ_j K_ij = d_n(X_i)`, the degrees,
//! * `M_ii = Σ_j K_ij / D_jj`,
//! * `L = ½(I + M − D⁻¹K − KD⁻¹)` and `L′ = I − ½(D⁻¹K + KD⁻¹)`.
//!
//! The operators `P_n`, `T̂_n`, `T_n`, `U_n` and `U′_n` act on functions and can
//! be evaluated anywhere in the space, so that `ρ_n P_n = K ρ_n`,
//! `ρ_n U_n = L ρ_n` and `ρ_n U′_n = L′ ρ_n` with `ρ_n` the restriction to the
//! sample.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{DegreeField, KernelDescriptor};
use crate::matrix::DenseMatrix;
use crate::space::{Point, PointSet, SpaceDescriptor};

/// Which Laplacian, or which of `U_n` / `U′_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaplacianVariant {
    /// `L` and `U_n f = m_n f − T̂_n f`.
    Amv,
    /// `L′` and `U′_n f = f − T̂_n f`.
    Identity,
}

impl LaplacianVariant {
    pub fn label(self) -> &'static str {
        match self {
            LaplacianVariant::Amv => "amv",
            LaplacianVariant::Identity => "identity",
        }
    }
}

#[derive(Debug, Clone)]
struct Laplacians {
    mean_ratio: Vec<f64>,
    amv: DenseMatrix,
    identity: DenseMatrix,
}

/// A sample together with its matrices.
#[derive(Debug, Clone)]
pub struct OperatorBundle {
    kernel: KernelDescriptor,
    points: PointSet,
    similarity: DenseMatrix,
    degrees: Vec<f64>,
    min_degree: f64,
    laplacians: Option<Laplacians>,
}

impl OperatorBundle {
    /// Assembles every matrix. A vanishing degree does not fail the build; it
    /// leaves the Laplacians unavailable.
    pub fn build(kernel: &KernelDescriptor, points: &PointSet) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::domain("a bundle needs at least one sample point"));
        }
        let space = points.space();
        let xs = points.points();
        let scale = 1.0 / n as f64;
        let similarity = DenseMatrix::from_fn(n, n, |i, j| kernel.eval(space, &xs[i], &xs[j]) * scale);
        // K is symmetric, so column i is row i.
        let degrees: Vec<f64> = (0..n).map(|i| similarity.column(i).iter().sum()).collect();
        let min_degree = degrees.iter().copied().fold(f64::INFINITY, f64::min);

        let laplacians = (min_degree > 0.0).then(|| {
            let inv: Vec<f64> = degrees.iter().map(|d| 1.0 / d).collect();
            let mean_ratio: Vec<f64> = (0..n)
                .map(|i| similarity.column(i).iter().zip(&inv).map(|(k, v)| k * v).sum())
                .collect();
            let off = |i: usize, j: usize| 0.5 * similarity.get(i, j) * (inv[i] + inv[j]);
            let amv = DenseMatrix::from_fn(n, n, |i, j| {
                let diag = if i == j { 0.5 * (1.0 + mean_ratio[i]) } else { 0.0 };
                diag - off(i, j)
            });
            let identity = DenseMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } - off(i, j));
            Laplacians {
                mean_ratio,
                amv,
                identity,
            }
        });

        Ok(Self {
            kernel: *kernel,
            points: points.clone(),
            similarity,
            degrees,
            min_degree,
            laplacians,
        })
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn kernel(&self) -> &KernelDescriptor {
        &self.kernel
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn space(&self) -> &SpaceDescriptor {
        self.points.space()
    }

    /// `K`.
    pub fn similarity(&self) -> &DenseMatrix {
        &self.similarity
    }

    /// Diagonal of `D`.
    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn degree_matrix(&self) -> DenseMatrix {
        diagonal(&self.degrees)
    }

    pub fn min_degree(&self) -> f64 {
        self.min_degree
    }

    /// True when some `d_n(X_i)` vanishes.
    pub fn is_degenerate(&self) -> bool {
        self.laplacians.is_none()
    }

    fn laplacians(&self) -> Result<&Laplacians> {
        self.laplacians.as_ref().ok_or_else(|| {
            Error::degenerate(format!(
                "min_i d_n(X_i) = {}, the Laplacians are unavailable",
                self.min_degree
            ))
        })
    }

    /// Diagonal of `M`.
    pub fn mean_ratio(&self) -> Result<&[f64]> {
        Ok(&self.laplacians()?.mean_ratio)
    }

    pub fn mean_ratio_matrix(&self) -> Result<DenseMatrix> {
        Ok(diagonal(self.mean_ratio()?))
    }

    /// `L`.
    pub fn amv_laplacian(&self) -> Result<&DenseMatrix> {
        Ok(&self.laplacians()?.amv)
    }

    /// `L′`.
    pub fn identity_laplacian(&self) -> Result<&DenseMatrix> {
        Ok(&self.laplacians()?.identity)
    }

    pub fn laplacian(&self, variant: LaplacianVariant) -> Result<&DenseMatrix> {
        match variant {
            LaplacianVariant::Amv => self.amv_laplacian(),
            LaplacianVariant::Identity => self.identity_laplacian(),
        }
    }

    /// `m_n(X_i) = ½(1 + M_ii)`, the values of `m_n` on the sample.
    pub fn sample_m(&self) -> Result<Vec<f64>> {
        Ok(self.mean_ratio()?.iter().map(|m| 0.5 * (1.0 + m)).collect())
    }

    /// The unnormalized graph Laplacian `D − K`.
    pub fn unnormalized_laplacian(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.len(), self.len(), |i, j| {
            let d = if i == j { self.degrees[i] } else { 0.0 };
            d - self.similarity.get(i, j)
        })
    }

    /// `I − D^{-1/2} K D^{-1/2}`.
    pub fn normalized_symmetric_laplacian(&self) -> Result<DenseMatrix> {
        self.laplacians()?;
        let s: Vec<f64> = self.degrees.iter().map(|d| 1.0 / d.sqrt()).collect();
        Ok(DenseMatrix::from_fn(self.len(), self.len(), |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            id - s[i] * self.similarity.get(i, j) * s[j]
        }))
    }

    /// `I − D⁻¹K`.
    pub fn random_walk_laplacian(&self) -> Result<DenseMatrix> {
        self.laplacians()?;
        Ok(DenseMatrix::from_fn(self.len(), self.len(), |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            id - self.similarity.get(i, j) / self.degrees[i]
        }))
    }

    /// `k(x, X_j) / n` for every `j`.
    pub fn kernel_row(&self, x: &Point) -> Vec<f64> {
        let scale = 1.0 / self.len() as f64;
        let space = self.space();
        self.points
            .points()
            .iter()
            .map(|xj| self.kernel.eval(space, x, xj) * scale)
            .collect()
    }

    /// `d_n(x) = (1/n) Σ_j k(x, X_j)`; equals `D_ii` bit for bit at `x = X_i`.
    pub fn empirical_degree(&self, x: &Point) -> f64 {
        self.kernel_row(x).iter().sum()
    }

    /// `h_n(x, X_j) / n` for every `j`.
    pub fn h_row(&self, x: &Point) -> Result<Vec<f64>> {
        self.laplacians()?;
        let mut row = self.kernel_row(x);
        let dx: f64 = row.iter().sum();
        if dx <= 0.0 {
            return Err(Error::degenerate(format!("d_n({x:?}) = {dx}")));
        }
        let inv_x = 1.0 / dx;
        for (w, d) in row.iter_mut().zip(&self.degrees) {
            *w *= 0.5 * (inv_x + 1.0 / d);
        }
        Ok(row)
    }

    /// `m_n(x) = T̂_n 1 (x)`.
    pub fn empirical_m(&self, x: &Point) -> Result<f64> {
        Ok(self.h_row(x)?.iter().sum())
    }

    /// `P_n g(x)` from the sample values `ρ_n g`.
    pub fn apply_p_values(&self, values: &[f64], x: &Point) -> f64 {
        self.check_values(values);
        dot(&self.kernel_row(x), values)
    }

    /// `P_n g(x) = (1/n) Σ_j k(x, X_j) g(X_j)`.
    pub fn apply_p(&self, g: impl Fn(&Point) -> f64, x: &Point) -> f64 {
        self.apply_p_values(&restrict(g, &self.points), x)
    }

    /// `T̂_n g(x)` from the sample values `ρ_n g`.
    pub fn apply_t_hat_values(&self, values: &[f64], x: &Point) -> Result<f64> {
        self.check_values(values);
        Ok(dot(&self.h_row(x)?, values))
    }

    /// `T̂_n g(x) = (1/n) Σ_j h_n(x, X_j) g(X_j)`.
    pub fn apply_t_hat(&self, g: impl Fn(&Point) -> f64, x: &Point) -> Result<f64> {
        self.apply_t_hat_values(&restrict(g, &self.points), x)
    }

    /// `T_n g(x) = (1/n) Σ_j h_μ(x, X_j) g(X_j)`, with the continuous degree.
    pub fn apply_t(&self, degrees: &DegreeField, g: impl Fn(&Point) -> f64, x: &Point) -> Result<f64> {
        let n = self.len() as f64;
        let mut total = 0.0;
        for xj in self.points.points() {
            total += degrees.h(x, xj)? * g(xj);
        }
        Ok(total / n)
    }

    /// `U_n g(x)` or `U′_n g(x)` from `ρ_n g` and `g(x)`.
    pub fn apply_u_values(&self, values: &[f64], gx: f64, x: &Point, variant: LaplacianVariant) -> Result<f64> {
        self.check_values(values);
        let h = self.h_row(x)?;
        let t_hat = dot(&h, values);
        Ok(match variant {
            LaplacianVariant::Amv => h.iter().sum::<f64>() * gx - t_hat,
            LaplacianVariant::Identity => gx - t_hat,
        })
    }

    /// `U_n g(x) = m_n(x) g(x) − T̂_n g(x)` or `U′_n g(x) = g(x) − T̂_n g(x)`.
    pub fn apply_u(&self, g: impl Fn(&Point) -> f64, x: &Point, variant: LaplacianVariant) -> Result<f64> {
        let values = restrict(&g, &self.points);
        self.apply_u_values(&values, g(x), x, variant)
    }

    fn check_values(&self, values: &[f64]) {
        assert_eq!(values.len(), self.len(), "one value per sample point");
    }
}

/// `ρ_n f = (f(X_1), …, f(X_n))`.
pub fn restrict(f: impl Fn(&Point) -> f64, points: &PointSet) -> Vec<f64> {
    points.points().iter().map(f).collect()
}

fn diagonal(values: &[f64]) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(values.len(), values.len());
    for (i, v) in values.iter().enumerate() {
        m.set(i, i, *v);
    }
    m
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use rand::Rng;

    use super::*;
    use crate::rng::stream_rng;
    use crate::space::unit_circle;

    fn constant_bundle(n: usize) -> OperatorBundle {
        let space = SpaceDescriptor::interval(1.0).unwrap();
        let kernel = KernelDescriptor::constant(1.0, 0.5).unwrap();
        OperatorBundle::build(&kernel, &space.sample_uniform(n, 3)).unwrap()
    }

    fn ball_bundle(n: usize, seed: u64) -> OperatorBundle {
        let kernel = KernelDescriptor::ball(PI / 4.0, 0.2, 2.0 / PI, 1.0).unwrap();
        OperatorBundle::build(&kernel, &unit_circle().sample_uniform(n, seed)).unwrap()
    }

    fn rows(m: &DenseMatrix) -> Vec<Vec<f64>> {
        (0..m.nrows()).map(|i| m.row(i)).collect()
    }

    #[test]
    fn constant_kernel_two_points() {
        let b = constant_bundle(2);
        assert_eq!(rows(b.similarity()), vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
        assert_eq!(b.degrees(), &[1.0, 1.0]);
        assert_eq!(b.mean_ratio().unwrap(), &[1.0, 1.0]);
        let lp = rows(b.identity_laplacian().unwrap());
        assert_eq!(lp, vec![vec![0.5, -0.5], vec![-0.5, 0.5]]);
        assert_eq!(rows(b.amv_laplacian().unwrap()), lp);
        assert_eq!(b.min_degree(), 1.0);
    }

    #[test]
    fn degrees_are_exact_row_sums_and_match_empirical_degree() {
        let b = ball_bundle(300, 11);
        for (i, x) in b.points().points().iter().enumerate() {
            let row_sum: f64 = b.similarity().column(i).iter().sum();
            assert_eq!(b.degrees()[i], row_sum);
            assert_eq!(b.empirical_degree(x), b.degrees()[i]);
        }
    }

    #[test]
    fn ball_min_degree_in_binomial_band() {
        let b = ball_bundle(512, 7);
        let half = 4.0 * (0.25f64 * 0.75 / 512.0).sqrt();
        assert!((0.25 - half..=0.25 + half).contains(&b.min_degree()), "{}", b.min_degree());
    }

    #[test]
    fn laplacians_are_symmetric_and_annihilate_constants() {
        let b = ball_bundle(200, 5);
        for lap in [b.amv_laplacian().unwrap(), b.identity_laplacian().unwrap()] {
            assert!(lap.symmetry_defect() <= 1e-14);
        }
        let ones = vec![1.0; 200];
        let l1 = b.amv_laplacian().unwrap().mul_vec(&ones);
        assert!(l1.iter().all(|v| v.abs() <= 1e-12));
    }

    #[test]
    fn intertwining_on_random_functions() {
        let mut rng = stream_rng(99, 0);
        for trial in 0..40 {
            let n = rng.gen_range(2..=64);
            let b = ball_bundle(n, 1000 + trial);
            let (a, w, phase): (f64, f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(1.0..5.0), rng.gen());
            let f = move |p: &Point| a * (w * p.coord().unwrap() + phase).sin() + 0.3;
            let rho = restrict(f, b.points());
            let kf = b.similarity().mul_vec(&rho);
            let lf = b.amv_laplacian().unwrap().mul_vec(&rho);
            let lpf = b.identity_laplacian().unwrap().mul_vec(&rho);
            for (i, x) in b.points().points().iter().enumerate() {
                assert!((b.apply_p(f, x) - kf[i]).abs() <= 1e-12);
                assert!((b.apply_u(f, x, LaplacianVariant::Amv).unwrap() - lf[i]).abs() <= 1e-12);
                assert!((b.apply_u(f, x, LaplacianVariant::Identity).unwrap() - lpf[i]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn constant_kernel_operator_values() {
        let b = constant_bundle(16);
        let g = |p: &Point| p.coord().unwrap().powi(2);
        let mean = restrict(g, b.points()).iter().sum::<f64>() / 16.0;
        let x = Point::Coord(0.37);
        assert!((b.apply_p(g, &x) - mean).abs() <= 1e-15);
        assert!((b.apply_p(|_| 1.0, &x) - b.empirical_degree(&x)).abs() <= 1e-15);
        assert_eq!(b.apply_p(|_| 0.0, &x), 0.0);
        assert!((b.apply_t_hat(|_| 1.0, &x).unwrap() - 1.0).abs() <= 1e-15);
        let up = b.apply_u(g, &x, LaplacianVariant::Identity).unwrap();
        assert!((up - (0.37f64.powi(2) - mean)).abs() <= 1e-15);
    }

    #[test]
    fn u_n_on_constants() {
        let b = ball_bundle(128, 4);
        for x in unit_circle().grid(17) {
            let amv = b.apply_u(|_| 1.0, &x, LaplacianVariant::Amv).unwrap();
            assert!(amv.abs() <= 1e-14);
            let id = b.apply_u(|_| 1.0, &x, LaplacianVariant::Identity).unwrap();
            assert!((id - (1.0 - b.empirical_m(&x).unwrap())).abs() <= 1e-15);
        }
    }

    #[test]
    fn t_hat_bounds_and_single_terms() {
        let b = ball_bundle(64, 8);
        let m_upper = b.kernel().upper_bound();
        for x in unit_circle().grid(31) {
            let a = b.empirical_degree(&x).min(b.min_degree());
            let v = b.apply_t_hat(|p| p.coord().unwrap().cos(), &x).unwrap();
            assert!(v.abs() <= 2.0 * m_upper / a);
        }
        let i = 5;
        let xi = b.points().points()[i];
        let mut e = vec![0.0; 64];
        e[i] = 1.0;
        let h_ii = 0.5 * (2.0 / b.degrees()[i]);
        assert!((b.apply_t_hat_values(&e, &xi).unwrap() - h_ii / 64.0).abs() <= 1e-15);
    }

    #[test]
    fn t_n_tracks_t_hat() {
        let b = ball_bundle(2048, 21);
        let degrees = DegreeField::with_default_resolution(b.kernel(), b.space()).unwrap();
        let g = |p: &Point| p.coord().unwrap().cos();
        let sup_dev = b.degrees().iter().map(|d| (d - 0.25).abs()).fold(0.0, f64::max);
        for x in unit_circle().grid(16) {
            let t = b.apply_t(&degrees, g, &x).unwrap();
            let th = b.apply_t_hat(g, &x).unwrap();
            assert!((t - th).abs() <= 40.0 * sup_dev.max(b.empirical_degree(&x) - 0.25).abs() + 1e-12);
        }
    }

    #[test]
    fn isolated_off_sample_point_is_degenerate() {
        let space = SpaceDescriptor::interval(1.0).unwrap();
        let kernel = KernelDescriptor::ball(0.01, 0.001, 1.0, 1.0).unwrap();
        // Sample degrees include k(X_i, X_i), so only off-sample points can be isolated.
        let points = PointSet::from_points(&space, vec![Point::Coord(0.1), Point::Coord(0.9)]).unwrap();
        let b = OperatorBundle::build(&kernel, &points).unwrap();
        assert!(!b.is_degenerate());
        assert_eq!(b.min_degree(), 0.5);
        let far = Point::Coord(0.5);
        assert_eq!(b.empirical_degree(&far), 0.0);
        assert!(matches!(b.apply_t_hat(|_| 1.0, &far), Err(Error::DegenerateDegree(_))));
        assert!(OperatorBundle::build(&kernel, &space.sample_uniform(0, 1)).is_err());
    }

    #[test]
    fn normalized_laplacians_for_constant_kernel() {
        let b = constant_bundle(4);
        let sym = b.normalized_symmetric_laplacian().unwrap();
        let rw = b.random_walk_laplacian().unwrap();
        let lp = b.identity_laplacian().unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((sym.get(i, j) - lp.get(i, j)).abs() <= 1e-15);
                assert!((rw.get(i, j) - lp.get(i, j)).abs() <= 1e-15);
            }
        }
        let un = b.unnormalized_laplacian();
        assert!(un.mul_vec(&[1.0; 4]).iter().all(|v| v.abs() <= 1e-15));
    }
}
