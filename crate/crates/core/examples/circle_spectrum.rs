//! Lowest eigenvalues of L′ on the circle next to their limits.

use std::f64::consts::PI;

use laplacian_lab::empirical::OperatorBundle;
use laplacian_lab::kernel::KernelDescriptor;
use laplacian_lab::reference::{circle_ball_spectrum, OperatorTag};
use laplacian_lab::space::unit_circle;
use laplacian_lab::spectral::{eig_sym_lowest, match_reference, LowestOptions};

fn main() -> laplacian_lab::Result<()> {
    let n = std::env::args().nth(1).map_or(1024, |s| s.parse().expect("n is an integer"));
    let kernel = KernelDescriptor::ball(PI / 4.0, 0.2, 2.0 / PI, 1.0)?;
    let points = unit_circle().sample_uniform(n, 1);
    let bundle = OperatorBundle::build(&kernel, &points)?;
    let spectrum = eig_sym_lowest(bundle.identity_laplacian()?, 11, &LowestOptions::default())?;
    let reference = circle_ball_spectrum(PI / 4.0, 5)?.for_operator(OperatorTag::Uprime);
    for m in match_reference(&spectrum, &reference, &points)? {
        println!(
            "κ={} limit {:.5} empirical {:?} max angle {:.3}",
            m.frequency, m.reference_eigenvalue, m.empirical_eigenvalues, m.max_angle
        );
    }
    Ok(())
}
