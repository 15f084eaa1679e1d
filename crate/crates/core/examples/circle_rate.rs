//! Eigenprojection error of `cos` on the circle along an n ladder.
//!
//! `cargo run --release --example circle_rate -- 256,512,1024 5`

use std::f64::consts::PI;

use laplacian_lab::empirical::LaplacianVariant;
use laplacian_lab::kernel::KernelDescriptor;
use laplacian_lab::rates::{run_rate_experiment, RateExperiment, TargetFunction};
use laplacian_lab::space::unit_circle;
use laplacian_lab::spectral::Window;

fn main() -> laplacian_lab::Result<()> {
    let mut args = std::env::args().skip(1);
    let ladder = args
        .next()
        .map(|s| s.split(',').map(|n| n.parse().expect("ladder entries are integers")).collect())
        .unwrap_or_else(|| vec![256, 512, 1024, 2048]);
    let trials = args.next().map_or(5, |t| t.parse().expect("trials is an integer"));
    let experiment = RateExperiment {
        ladder,
        trials,
        seed: 2024,
        window: Window::new(0.04, 0.22)?,
        variant: LaplacianVariant::Identity,
        target: TargetFunction::Cos { frequency: 1 },
        probe_grid: 512,
        alpha: 1.0,
    };
    let kernel = KernelDescriptor::ball(PI / 4.0, 0.2, 2.0 / PI, 1.0)?;
    let report = run_rate_experiment(&kernel, &unit_circle(), &experiment)?;
    println!("{:>6} {:>10} {:>10} {:>10}", "n", "q1", "median", "q3");
    for r in &report.records {
        let f = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.5}"));
        println!("{:>6} {:>10} {:>10} {:>10}", r.n, f(r.q1), f(r.median), f(r.q3));
    }
    if let Some(slope) = report.fitted_exponent {
        println!("fitted exponent {slope:.3}");
    }
    Ok(())
}
