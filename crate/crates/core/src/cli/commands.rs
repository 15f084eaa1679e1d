use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::config::{hex, ExperimentConfig};
use crate::empirical::{LaplacianVariant, OperatorBundle};
use crate::error::{Error, Result};
use crate::io::{self, Series};
use crate::kernel::{verify_membership, DegreeField, KernelDescriptor, KernelForm};
use crate::matrix::DenseMatrix;
use crate::rates::{gc_sup_error_stream, rate_constants, run_rate_experiment};
use crate::reference::{circle_ball_spectrum, OperatorTag};
use crate::rng::trial_stream;
use crate::space::{PointSet, SpaceDescriptor, SpaceKind};
use crate::spectral::{eig_sym, eig_sym_lowest, match_reference, LowestOptions};

/// What a command printed and whether it counts as success.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub success: bool,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { stdout, success: true }
    }
}

/// Files written to the output directory, with their SHA-256 checksums.
struct Artifacts {
    dir: PathBuf,
    files: BTreeMap<String, String>,
}

impl Artifacts {
    fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: BTreeMap::new(),
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn text(&mut self, name: &str, contents: &str) -> Result<()> {
        std::fs::write(self.path(name), contents)?;
        self.record(name)
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.text(name, &s)
    }

    fn matrix(&mut self, name: &str, m: &DenseMatrix, binary: bool) -> Result<()> {
        let csv = format!("{name}.csv");
        io::write_matrix_csv(&self.path(&csv), m)?;
        self.record(&csv)?;
        if binary {
            let bin = format!("{name}.bin");
            io::write_matrix_binary(&self.path(&bin), m)?;
            self.record(&bin)?;
        }
        Ok(())
    }

    fn record(&mut self, name: &str) -> Result<()> {
        let bytes = std::fs::read(self.path(name))?;
        self.files.insert(name.to_string(), hex(&Sha256::digest(bytes)));
        Ok(())
    }

    /// Writes `manifest.json`. The timestamp is the only field that varies
    /// between identical runs.
    fn finish(self, command: &str, config: &ExperimentConfig, details: Value) -> Result<String> {
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let manifest = json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "config_hash": config.hash(),
            "seed": config.seed,
            "details": details,
            "files": self.files,
            "timestamp": timestamp,
        });
        let path = self.path("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
        Ok(format!("{}\n", path.display()))
    }
}

fn sample_bundle(config: &ExperimentConfig, n: usize) -> Result<(SpaceDescriptor, OperatorBundle)> {
    if n == 0 {
        return Err(Error::config("n must be at least 1"));
    }
    let space = config.space()?.clone();
    let kernel = *config.kernel()?;
    let points = space.sample_uniform(n, config.seed);
    let bundle = OperatorBundle::build(&kernel, &points)?;
    Ok((space, bundle))
}

fn points_csv(points: &PointSet) -> String {
    let mut out = String::from("index,coordinates\n");
    for (i, p) in points.points().iter().enumerate() {
        let coords: Vec<String> = p.components().iter().map(f64::to_string).collect();
        out.push_str(&format!("{i},{}\n", coords.join(" ")));
    }
    out
}

fn diagonal(values: &[f64]) -> DenseMatrix {
    let n = values.len();
    DenseMatrix::from_fn(n, n, |i, j| if i == j { values[i] } else { 0.0 })
}

pub fn cmd_matrices(config: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let section = config.section(&config.matrices, "matrices")?;
    let (_, bundle) = sample_bundle(config, section.n)?;
    let mut files = Artifacts::create(out)?;
    let binary = section.binary;
    files.text("points.csv", &points_csv(bundle.points()))?;
    files.matrix("K", bundle.similarity(), binary)?;
    files.matrix("D", &bundle.degree_matrix(), binary)?;
    files.matrix("Mdiag", &diagonal(bundle.mean_ratio()?), binary)?;
    files.matrix("L", bundle.amv_laplacian()?, binary)?;
    files.matrix("Lprime", bundle.identity_laplacian()?, binary)?;
    files.matrix("L_unnormalized", &bundle.unnormalized_laplacian(), binary)?;
    files.matrix("L_sym", &bundle.normalized_symmetric_laplacian()?, binary)?;
    files.matrix("L_rw", &bundle.random_walk_laplacian()?, binary)?;
    let details = json!({ "n": bundle.len(), "min_degree": bundle.min_degree() });
    Ok(Outcome::ok(files.finish("matrices", config, details)?))
}

fn reference_operator(variant: LaplacianVariant) -> OperatorTag {
    match variant {
        LaplacianVariant::Amv => OperatorTag::U,
        LaplacianVariant::Identity => OperatorTag::Uprime,
    }
}

fn ball_on_unit_circle(kernel: &KernelDescriptor, space: &SpaceDescriptor) -> Result<f64> {
    match (kernel.form(), space.kind()) {
        (KernelForm::BallIndicator { r }, SpaceKind::Circle { circumference })
            if (circumference - 2.0 * std::f64::consts::PI).abs() <= 1e-12 =>
        {
            Ok(r)
        }
        _ => Err(Error::config(
            "a closed-form reference spectrum exists only for the ball kernel on the circle of circumference 2π",
        )),
    }
}

pub fn cmd_spectrum(config: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let section = config.section(&config.spectrum, "spectrum")?;
    let (space, bundle) = sample_bundle(config, section.n)?;
    let variant = section.variant;
    if let Some(window) = &section.window {
        window.check_essential(&bundle, variant)?;
    }
    let radius = match &section.reference {
        Some(_) => Some(ball_on_unit_circle(bundle.kernel(), &space)?),
        None => None,
    };
    let laplacian = bundle.laplacian(variant)?;
    let spectrum = match section.count {
        Some(count) => eig_sym_lowest(laplacian, count, &LowestOptions::default())?,
        None => eig_sym(laplacian)?,
    };
    let mut files = Artifacts::create(out)?;
    files.text("spectrum.csv", &io::spectrum_csv(&spectrum))?;
    let indexed = Series {
        label: variant.label().to_string(),
        points: spectrum.eigenvalues().iter().enumerate().map(|(k, v)| (k as f64, *v)).collect(),
    };
    files.text("spectrum.svg", &io::svg_plot("empirical spectrum", "index", "eigenvalue", &[indexed], false))?;
    if section.eigenvectors {
        files.matrix("eigenvectors", spectrum.eigenvectors(), false)?;
    }
    let mut details = json!({
        "n": bundle.len(),
        "variant": variant,
        "min_degree": bundle.min_degree(),
        "eigenvalues": spectrum.len(),
    });
    if let (Some(reference), Some(r)) = (&section.reference, radius) {
        let reference = circle_ball_spectrum(r, reference.max_frequency)?.for_operator(reference_operator(variant));
        files.text("reference.csv", &io::reference_csv(&reference))?;
        let matches = match_reference(&spectrum, &reference, bundle.points())?;
        files.text("matched.csv", &io::matched_csv(&matches))?;
        details["matched_groups"] = json!(matches.len());
    }
    if let Some(window) = &section.window {
        let indices = window.select(&spectrum)?;
        let values: Vec<f64> = indices.iter().map(|&k| spectrum.eigenvalues()[k]).collect();
        files.json("window.json", &json!({ "window": window, "indices": indices, "eigenvalues": values }))?;
    }
    Ok(Outcome::ok(files.finish("spectrum", config, details)?))
}

pub fn cmd_rates(config: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let section = config.section(&config.rates, "rates")?;
    let experiment = section.experiment(config.seed);
    let report = run_rate_experiment(config.kernel()?, config.space()?, &experiment)?;
    let mut files = Artifacts::create(out)?;
    files.text("rates.csv", &report.to_csv())?;
    files.json(
        "rates_summary.json",
        &json!({
            "config_hash": config.hash(),
            "seed": config.seed,
            "records": report.records,
            "fitted_exponent": report.fitted_exponent,
            "envelope": report.envelope,
        }),
    )?;
    let medians = Series {
        label: "median error".into(),
        points: report
            .records
            .iter()
            .filter_map(|r| r.median.map(|m| (r.n as f64, m)))
            .collect(),
    };
    let mut series = vec![medians];
    if let Some(envelope) = &report.envelope {
        series.push(Series {
            label: "envelope".into(),
            points: report.records.iter().zip(&envelope.values).map(|(r, v)| (r.n as f64, *v)).collect(),
        });
    }
    files.text("rates.svg", &io::svg_plot("eigenprojection error", "n", "sup error", &series, true))?;
    let details = json!({
        "fitted_exponent": report.fitted_exponent,
        "excluded": report.records.iter().map(|r| r.excluded).sum::<usize>(),
    });
    Ok(Outcome::ok(files.finish("rates", config, details)?))
}

pub fn cmd_constants(config: &ExperimentConfig) -> Result<Outcome> {
    let inputs = config.section(&config.constants, "constants")?;
    let constants = rate_constants(inputs)?;
    let report = json!({ "config_hash": config.hash(), "seed": config.seed, "constants": constants });
    Ok(Outcome::ok(serde_json::to_string_pretty(&report)? + "\n"))
}

#[derive(Serialize)]
struct GcMedian {
    target: String,
    n: usize,
    median: f64,
}

pub fn cmd_gc(config: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let section = config.section(&config.gc, "gc")?;
    if section.ladder.is_empty() || section.ladder.contains(&0) || section.trials == 0 {
        return Err(Error::config("gc needs a non-empty ladder of positive n and at least one trial"));
    }
    if section.probe_grid == 0 {
        return Err(Error::config("gc needs a positive probe grid"));
    }
    let space = config.space()?;
    let degrees = DegreeField::with_default_resolution(config.kernel()?, space)?;
    let probes = space.grid(section.probe_grid);
    let mut csv = String::from("target,n,trial,error\n");
    let mut medians = Vec::new();
    let mut series = Vec::new();
    for target in &section.targets {
        let g = target.on(space)?;
        let label = target.label();
        let mut curve = Vec::new();
        for &n in &section.ladder {
            let errors = (0..section.trials)
                .into_par_iter()
                .map(|t| gc_sup_error_stream(&degrees, &g, n, config.seed, trial_stream(n, t), &probes))
                .collect::<Result<Vec<f64>>>()?;
            for (t, e) in errors.iter().enumerate() {
                csv.push_str(&format!("{label},{n},{t},{e}\n"));
            }
            let mut sorted = errors;
            sorted.sort_by(f64::total_cmp);
            let mid = sorted.len() / 2;
            let median = if sorted.len() % 2 == 1 {
                sorted[mid]
            } else {
                0.5 * (sorted[mid - 1] + sorted[mid])
            };
            curve.push((n as f64, median));
            medians.push(GcMedian {
                target: label.clone(),
                n,
                median,
            });
        }
        series.push(Series { label, points: curve });
    }
    let mut files = Artifacts::create(out)?;
    files.text("gc.csv", &csv)?;
    files.json("gc_summary.json", &json!({ "config_hash": config.hash(), "seed": config.seed, "medians": medians }))?;
    files.text("gc.svg", &io::svg_plot("uniform deviation of P_n g", "n", "sup error", &series, true))?;
    let mut stdout = String::new();
    for m in &medians {
        stdout.push_str(&format!("{} n={} median={}\n", m.target, m.n, m.median));
    }
    stdout.push_str(&files.finish("gc", config, json!({ "medians": medians }))?);
    Ok(Outcome::ok(stdout))
}

pub fn cmd_verify(config: &ExperimentConfig) -> Result<Outcome> {
    let grid = config.verify.as_ref().map_or(512, |v| v.grid);
    let report = verify_membership(config.kernel()?, config.space()?, grid)?;
    let success = report.passed;
    let text = serde_json::to_string_pretty(&json!({ "config_hash": config.hash(), "seed": config.seed, "report": report }))?;
    Ok(Outcome {
        stdout: text + "\n",
        success,
    })
}
