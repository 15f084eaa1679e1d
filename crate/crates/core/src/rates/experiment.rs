//! Empirical decay of `‖u − Pr_n u‖∞` along a ladder of sample sizes.

use serde::{Deserialize, Serialize};

use crate::empirical::{LaplacianVariant, OperatorBundle};
use crate::error::{Error, Result};
use crate::kernel::KernelDescriptor;
use crate::rng::trial_stream;
use crate::space::{Point, SpaceDescriptor, SpaceKind};
use crate::spectral::{eig_sym_lowest, projection_error, Coverage, LowestOptions, Spectrum, Window};

/// The function `u` whose projection is tracked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetFunction {
    Constant { value: f64 },
    /// `cos(2πκx/P)` in the first coordinate, with `P` the circumference on
    /// periodic spaces and twice the length on an interval.
    Cos { frequency: u32 },
    Sin { frequency: u32 },
}

impl TargetFunction {
    pub fn label(&self) -> String {
        match *self {
            TargetFunction::Constant { value } => format!("constant({value})"),
            TargetFunction::Cos { frequency } => format!("cos({frequency})"),
            TargetFunction::Sin { frequency } => format!("sin({frequency})"),
        }
    }

    fn period(space: &SpaceDescriptor) -> Result<f64> {
        match space.kind() {
            SpaceKind::Interval { length } => Ok(2.0 * length),
            SpaceKind::Circle { circumference } => Ok(*circumference),
            SpaceKind::Torus2 { circumferences } => Ok(circumferences[0]),
            SpaceKind::PointCloud(_) => Err(Error::Unsupported("trigonometric targets need a coordinate space".into())),
        }
    }

    /// The target as a function on `space`.
    pub fn on(&self, space: &SpaceDescriptor) -> Result<impl Fn(&Point) -> f64 + Sync + Send + 'static> {
        let (kind, omega, value) = match *self {
            TargetFunction::Constant { value } => (0u8, 0.0, value),
            TargetFunction::Cos { frequency } => (1, 2.0 * std::f64::consts::PI * frequency as f64 / Self::period(space)?, 0.0),
            TargetFunction::Sin { frequency } => (2, 2.0 * std::f64::consts::PI * frequency as f64 / Self::period(space)?, 0.0),
        };
        Ok(move |p: &Point| {
            let x = match *p {
                Point::Coord(x) => x,
                Point::Coord2([x, _]) => x,
                Point::Index(_) => 0.0,
            };
            match kind {
                0 => value,
                1 => (omega * x).cos(),
                _ => (omega * x).sin(),
            }
        })
    }
}

fn default_variant() -> LaplacianVariant {
    LaplacianVariant::Identity
}

fn default_probe_grid() -> usize {
    512
}

fn default_alpha() -> f64 {
    1.0
}

/// Parameters of a rate experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateExperiment {
    /// Strictly increasing sample sizes.
    pub ladder: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub window: Window,
    #[serde(default = "default_variant")]
    pub variant: LaplacianVariant,
    pub target: TargetFunction,
    /// Off-sample probe points for the sup norm; 0 keeps the sample only.
    #[serde(default = "default_probe_grid")]
    pub probe_grid: usize,
    /// `α` of the envelope `4Cα √(ln n)/√n`.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

impl RateExperiment {
    pub fn validate(&self) -> Result<()> {
        if self.ladder.is_empty() || self.ladder[0] == 0 {
            return Err(Error::config("the n ladder must be non-empty and positive"));
        }
        if self.ladder.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("the n ladder must be strictly increasing"));
        }
        if self.trials == 0 {
            return Err(Error::config("at least one trial is needed"));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::config("alpha must be positive"));
        }
        Window::new(self.window.lo, self.window.hi)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub n: usize,
    pub trial: usize,
    /// `None` for excluded trials.
    pub error: Option<f64>,
    pub sample_error: Option<f64>,
    pub grid_error: Option<f64>,
    pub rank: Option<usize>,
    pub excluded: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRecord {
    pub n: usize,
    pub trials: usize,
    pub excluded: usize,
    pub median: Option<f64>,
    pub q1: Option<f64>,
    pub q3: Option<f64>,
}

/// `4Cα √(ln n)/√n` with `C` scaled so the envelope touches the largest
/// median from above.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Envelope {
    pub alpha: f64,
    pub constant: f64,
    pub values: Vec<f64>,
    /// Medians at or below the envelope.
    pub dominated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub space: String,
    pub kernel: String,
    pub experiment: RateExperiment,
    pub records: Vec<RateRecord>,
    pub outcomes: Vec<TrialOutcome>,
    /// Least-squares slope of `ln(median)` against `ln n`; absent when the
    /// errors sit at round-off level or fewer than two medians exist.
    pub fitted_exponent: Option<f64>,
    pub envelope: Option<Envelope>,
}

/// Errors below this level are treated as exact, and not fitted.
const ROUND_OFF: f64 = 1e-9;

impl RateReport {
    /// Tidy rows `n,trial,error,excluded_flag`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,trial,error,excluded_flag\n");
        for o in &self.outcomes {
            let error = o.error.map_or_else(String::new, |e| format!("{e:?}"));
            out.push_str(&format!("{},{},{},{}\n", o.n, o.trial, error, u8::from(o.excluded.is_some())));
        }
        out
    }

    pub fn medians(&self) -> Vec<Option<f64>> {
        self.records.iter().map(|r| r.median).collect()
    }
}

/// Builds a bundle per `(n, trial)`, projects the target through the window
/// and aggregates the sup-norm errors. Trials with a degenerate degree or a
/// window that becomes ill-posed for their sample are excluded and counted.
pub fn run_rate_experiment(kernel: &KernelDescriptor, space: &SpaceDescriptor, experiment: &RateExperiment) -> Result<RateReport> {
    experiment.validate()?;
    let u = experiment.target.on(space)?;
    let probes = (experiment.probe_grid > 0).then(|| space.grid(experiment.probe_grid));
    let mut outcomes = Vec::new();
    let mut records = Vec::new();
    for &n in &experiment.ladder {
        let mut errors = Vec::new();
        for trial in 0..experiment.trials {
            let outcome = run_trial(kernel, space, experiment, n, trial, &u, probes.as_deref())?;
            if let Some(e) = outcome.error {
                errors.push(e);
            }
            outcomes.push(outcome);
        }
        errors.sort_by(f64::total_cmp);
        records.push(RateRecord {
            n,
            trials: experiment.trials,
            excluded: experiment.trials - errors.len(),
            median: quantile(&errors, 0.5),
            q1: quantile(&errors, 0.25),
            q3: quantile(&errors, 0.75),
        });
    }
    let fitted_exponent = fit_exponent(&records);
    let envelope = envelope(&records, experiment.alpha);
    Ok(RateReport {
        space: space.label(),
        kernel: kernel.label(),
        experiment: experiment.clone(),
        records,
        outcomes,
        fitted_exponent,
        envelope,
    })
}

fn run_trial(
    kernel: &KernelDescriptor,
    space: &SpaceDescriptor,
    experiment: &RateExperiment,
    n: usize,
    trial: usize,
    u: &(impl Fn(&Point) -> f64 + Sync),
    probes: Option<&[Point]>,
) -> Result<TrialOutcome> {
    let excluded = |reason: String| TrialOutcome {
        n,
        trial,
        error: None,
        sample_error: None,
        grid_error: None,
        rank: None,
        excluded: Some(reason),
    };
    let points = space.sample_uniform_stream(n, experiment.seed, trial_stream(n, trial));
    let bundle = OperatorBundle::build(kernel, &points)?;
    if bundle.is_degenerate() {
        return Ok(excluded(format!("degenerate degree (min_degree = {})", bundle.min_degree())));
    }
    let result = experiment
        .window
        .check_essential(&bundle, experiment.variant)
        .and_then(|_| covering_spectrum(&bundle, experiment.variant, &experiment.window))
        .and_then(|spectrum| projection_error(&bundle, &spectrum, &experiment.window, experiment.variant, u, probes));
    match result {
        Ok(e) => Ok(TrialOutcome {
            n,
            trial,
            error: Some(e.value()),
            sample_error: Some(e.sample),
            grid_error: e.grid,
            rank: Some(e.rank),
            excluded: None,
        }),
        Err(err @ (Error::DegenerateDegree(_) | Error::IllPosedWindow(_))) => Ok(excluded(err.to_string())),
        Err(err) => Err(err),
    }
}

/// Lowest part of the spectrum, widened until it reaches past the window.
fn covering_spectrum(bundle: &OperatorBundle, variant: LaplacianVariant, window: &Window) -> Result<Spectrum> {
    let lap = bundle.laplacian(variant)?;
    let n = lap.nrows();
    let options = LowestOptions::default();
    let mut count = 2.min(n);
    loop {
        let spectrum = eig_sym_lowest(lap, count, &options)?;
        match spectrum.coverage() {
            Coverage::Full => return Ok(spectrum),
            Coverage::Lowest { upper } if upper >= window.hi + window.margin || count >= n => return Ok(spectrum),
            Coverage::Lowest { .. } => count = (2 * count).min(n),
        }
    }
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo]))
}

fn fit_exponent(records: &[RateRecord]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| r.median.filter(|m| *m > ROUND_OFF).map(|m| ((r.n as f64).ln(), m.ln())))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn envelope(records: &[RateRecord], alpha: f64) -> Option<Envelope> {
    let shape = |n: usize| ((n as f64).ln() / n as f64).sqrt();
    let scale = records
        .iter()
        .filter(|r| r.n >= 2)
        .filter_map(|r| r.median.filter(|m| *m > ROUND_OFF).map(|m| m / shape(r.n)))
        .fold(None, |acc: Option<f64>, s| Some(acc.map_or(s, |a| a.max(s))))?;
    let values: Vec<f64> = records.iter().map(|r| scale * shape(r.n.max(2))).collect();
    let dominated = records
        .iter()
        .zip(&values)
        .all(|(r, v)| r.median.is_none_or(|m| m <= v * (1.0 + 1e-12)));
    Some(Envelope {
        alpha,
        constant: scale / (4.0 * alpha),
        values,
        dominated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_experiment() -> RateExperiment {
        RateExperiment {
            ladder: vec![8, 16, 32],
            trials: 3,
            seed: 1,
            window: Window::new(-0.5, 0.5).unwrap(),
            variant: LaplacianVariant::Identity,
            target: TargetFunction::Constant { value: 1.0 },
            probe_grid: 32,
            alpha: 1.0,
        }
    }

    #[test]
    fn quantiles_interpolate() {
        let d = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&d, 0.5), Some(2.5));
        assert_eq!(quantile(&d, 0.25), Some(1.75));
        assert_eq!(quantile(&[], 0.5), None);
    }

    #[test]
    fn constant_kernel_errors_vanish_and_the_fit_is_skipped() {
        let space = crate::space::unit_circle();
        let kernel = KernelDescriptor::constant(1.0, 0.5).unwrap();
        let report = run_rate_experiment(&kernel, &space, &constant_experiment()).unwrap();
        assert!(report.outcomes.iter().all(|o| o.error.unwrap() <= 1e-9));
        assert_eq!(report.fitted_exponent, None);
        assert!(report.envelope.is_none());
        assert_eq!(report.records.len(), 3);
        let csv = report.to_csv();
        assert_eq!(csv.lines().count(), 10);
        assert!(csv.starts_with("n,trial,error,excluded_flag\n8,0,"));
    }

    #[test]
    fn ladder_validation() {
        let mut e = constant_experiment();
        e.ladder = vec![16, 8];
        assert!(matches!(e.validate(), Err(Error::Config(_))));
        e.ladder = vec![];
        assert!(e.validate().is_err());
        e.ladder = vec![4];
        e.trials = 0;
        assert!(e.validate().is_err());
    }

    #[test]
    fn exponent_fit_recovers_a_power_law() {
        let records: Vec<RateRecord> = [100usize, 400, 1600]
            .iter()
            .map(|&n| RateRecord {
                n,
                trials: 1,
                excluded: 0,
                median: Some(3.0 * (n as f64).powf(-0.5)),
                q1: None,
                q3: None,
            })
            .collect();
        assert!((fit_exponent(&records).unwrap() + 0.5).abs() <= 1e-12);
        let env = envelope(&records, 2.0).unwrap();
        assert!(env.dominated);
        assert!(env.constant > 0.0);
    }

    #[test]
    fn target_functions() {
        let space = crate::space::unit_circle();
        let f = TargetFunction::Cos { frequency: 1 }.on(&space).unwrap();
        assert!((f(&Point::Coord(1.0)) - 1f64.cos()).abs() <= 1e-15);
        let interval = SpaceDescriptor::interval(2.0).unwrap();
        let g = TargetFunction::Cos { frequency: 1 }.on(&interval).unwrap();
        assert!((g(&Point::Coord(2.0)) + 1.0).abs() <= 1e-15);
        let json = r#"{"kind":"cos","frequency":1}"#;
        let t: TargetFunction = serde_json::from_str(json).unwrap();
        assert_eq!(t, TargetFunction::Cos { frequency: 1 });
        assert!(serde_json::from_str::<TargetFunction>(r#"{"kind":"cos","frequency":1,"x":2}"#).is_err());
    }
}
