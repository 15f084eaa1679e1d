//! Uniform deviation of `P_n g` from `P_μ g`.

use crate::error::{Error, Result};
use crate::kernel::DegreeField;
use crate::space::Point;

/// `max_x |P_n g(x) − P_μ g(x)|` over `probes`, for a sample of size `n`
/// drawn from `seed`.
pub fn gc_sup_error(degrees: &DegreeField, g: impl Fn(&Point) -> f64, n: usize, seed: u64, probes: &[Point]) -> Result<f64> {
    gc_sup_error_stream(degrees, g, n, seed, 0, probes)
}

/// As [`gc_sup_error`], drawing the sample from stream `stream` of `seed`.
pub fn gc_sup_error_stream(
    degrees: &DegreeField,
    g: impl Fn(&Point) -> f64,
    n: usize,
    seed: u64,
    stream: u64,
    probes: &[Point],
) -> Result<f64> {
    if probes.is_empty() {
        return Err(Error::domain("the probe grid is empty"));
    }
    if n == 0 {
        return Err(Error::domain("the sample is empty"));
    }
    let space = degrees.space();
    let kernel = degrees.kernel();
    let sample = space.sample_uniform_stream(n, seed, stream);
    let values: Vec<f64> = sample.points().iter().map(&g).collect();
    let mut worst: f64 = 0.0;
    for x in probes {
        space.check(x)?;
        let empirical: f64 = sample
            .points()
            .iter()
            .zip(&values)
            .map(|(xj, gj)| kernel.eval(space, x, xj) * gj)
            .sum::<f64>()
            / n as f64;
        let exact = degrees.integrate_against(x, &g);
        worst = worst.max((empirical - exact).abs());
    }
    Ok(worst)
}
