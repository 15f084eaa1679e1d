use std::f64::consts::PI;

use laplacian_lab::empirical::LaplacianVariant;
use laplacian_lab::kernel::KernelDescriptor;
use laplacian_lab::rates::{run_rate_experiment, RateExperiment, TargetFunction};
use laplacian_lab::space::unit_circle;
use laplacian_lab::spectral::Window;

fn experiment(ladder: Vec<usize>, trials: usize, seed: u64) -> RateExperiment {
    RateExperiment {
        ladder,
        trials,
        seed,
        window: Window::new(0.04, 0.22).unwrap(),
        variant: LaplacianVariant::Identity,
        target: TargetFunction::Cos { frequency: 1 },
        probe_grid: 128,
        alpha: 1.0,
    }
}

// Quadrupling n should roughly halve the median error.
#[test]
fn quadrupling_n_about_halves_the_median() {
    let kernel = KernelDescriptor::ball(PI / 4.0, 0.2, 2.0 / PI, 1.0).unwrap();
    let report = run_rate_experiment(&kernel, &unit_circle(), &experiment(vec![256, 1024], 8, 21)).unwrap();
    let m = report.medians();
    let ratio = m[0].unwrap() / m[1].unwrap();
    assert!((1.2..=3.5).contains(&ratio), "ratio {ratio}");
    for r in &report.records {
        assert!(r.q1.unwrap() <= r.median.unwrap() && r.median.unwrap() <= r.q3.unwrap());
        assert_eq!(r.excluded, 0);
    }
    let envelope = report.envelope.unwrap();
    assert!(envelope.dominated);
}

#[test]
fn reruns_are_bitwise_identical() {
    let kernel = KernelDescriptor::ball(PI / 4.0, 0.2, 2.0 / PI, 1.0).unwrap();
    let e = experiment(vec![64, 128], 3, 4);
    let a = run_rate_experiment(&kernel, &unit_circle(), &e).unwrap();
    let b = run_rate_experiment(&kernel, &unit_circle(), &e).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
}

#[test]
fn constant_target_is_reproduced_exactly() {
    // Under the constant kernel, constants span the λ = 0 eigenspace of I − J/n.
    let kernel = KernelDescriptor::constant(1.0, 0.5).unwrap();
    let mut e = experiment(vec![16, 32], 2, 1);
    e.window = Window::new(-0.5, 0.5).unwrap();
    e.target = TargetFunction::Constant { value: 2.0 };
    let report = run_rate_experiment(&kernel, &unit_circle(), &e).unwrap();
    assert!(report.medians().iter().all(|m| m.unwrap() <= 1e-12));
    assert_eq!(report.fitted_exponent, None);
}
