//! File formats: CSV and binary matrices, spectrum tables and SVG plots.
//!
//! Floats are written with Rust's shortest round-trip formatting, so every
//! file reads back to the identical bits.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::reference::ReferenceSpectrum;
use crate::spectral::{GroupMatch, Spectrum};

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::domain(format!("malformed CSV: {other:?}")),
    }
}

fn parse_f64(field: &str) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::domain(format!("not a number: {field:?}")))
}

/// Row-major CSV without a header.
pub fn write_matrix_csv(path: &Path, m: &DenseMatrix) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(csv_error)?;
    for i in 0..m.nrows() {
        w.write_record(m.row(i).iter().map(|v| v.to_string())).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_csv(path: &Path) -> Result<DenseMatrix> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_path(path).map_err(csv_error)?;
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record.map_err(csv_error)?;
        rows.push(record.iter().map(parse_f64).collect::<Result<Vec<f64>>>()?);
    }
    DenseMatrix::from_rows(&rows)
}

/// An 8-byte little-endian `n` followed by the `n × n` entries, column-major,
/// as little-endian `f64`.
pub fn write_matrix_binary(path: &Path, m: &DenseMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::domain("the binary format holds square matrices"));
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&(m.nrows() as u64).to_le_bytes())?;
    for v in m.as_slice() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_binary(path: &Path) -> Result<DenseMatrix> {
    let mut r = BufReader::new(File::open(path)?);
    let mut header = [0u8; 8];
    r.read_exact(&mut header)?;
    let n = usize::try_from(u64::from_le_bytes(header)).map_err(|_| Error::domain("matrix size overflows"))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != n * n * 8 {
        return Err(Error::domain(format!("expected {} payload bytes, found {}", n * n * 8, bytes.len())));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    DenseMatrix::from_column_major(n, n, data)
}

/// `index,eigenvalue,group`.
pub fn spectrum_csv(spectrum: &Spectrum) -> String {
    let mut out = String::from("index,eigenvalue,group\n");
    for (k, (v, g)) in spectrum.eigenvalues().iter().zip(spectrum.groups()).enumerate() {
        let _ = writeln!(out, "{k},{v},{g}");
    }
    out
}

/// One row of a spectrum table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumRow {
    pub index: usize,
    pub eigenvalue: f64,
    pub group: usize,
}

pub fn parse_spectrum_csv(text: &str) -> Result<Vec<SpectrumRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers().map_err(csv_error)?.clone();
    if headers.iter().collect::<Vec<_>>() != ["index", "eigenvalue", "group"] {
        return Err(Error::domain("spectrum CSV header must be index,eigenvalue,group"));
    }
    r.records()
        .map(|rec| {
            let rec = rec.map_err(csv_error)?;
            let int = |i: usize| -> Result<usize> {
                rec[i].parse().map_err(|_| Error::domain(format!("not an integer: {:?}", &rec[i])))
            };
            Ok(SpectrumRow {
                index: int(0)?,
                eigenvalue: parse_f64(&rec[1])?,
                group: int(2)?,
            })
        })
        .collect()
}

/// `frequency,eigenvalue,multiplicity`.
pub fn reference_csv(reference: &ReferenceSpectrum) -> String {
    let mut out = String::from("frequency,eigenvalue,multiplicity\n");
    for g in reference.groups() {
        let _ = writeln!(out, "{},{},{}", g.frequency, g.eigenvalue, g.multiplicity);
    }
    out
}

/// Matched reference and empirical groups, one row per group.
pub fn matched_csv(matches: &[GroupMatch]) -> String {
    let mut out = String::from("frequency,reference_eigenvalue,multiplicity,indices,cluster_mean,max_deviation,max_angle\n");
    for m in matches {
        let indices: Vec<String> = m.indices.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            m.frequency,
            m.reference_eigenvalue,
            m.multiplicity,
            indices.join(" "),
            m.cluster_mean,
            m.max_deviation,
            m.max_angle
        );
    }
    out
}

/// Parses any headed CSV into its header and rows of fields.
pub fn parse_table(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers().map_err(csv_error)?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()).map_err(csv_error))
        .collect::<Result<Vec<Vec<String>>>>()?;
    Ok((headers, rows))
}

/// A named series of `(x, y)` points.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Standalone SVG scatter/line plot; the data are repeated in a comment.
pub fn svg_plot(title: &str, x_label: &str, y_label: &str, series: &[Series], log_log: bool) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const PAD: f64 = 60.0;
    const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
    let map = |v: f64| if log_log { v.ln() } else { v };
    let usable: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .filter(|(x, y)| x.is_finite() && y.is_finite() && (!log_log || (*x > 0.0 && *y > 0.0)))
        .map(|(x, y)| (map(x), map(y)))
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = usable.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), (x, y)| (a.min(*x), b.max(*x), c.min(*y), d.max(*y)),
    );
    if usable.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 <= 0.0 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 <= 0.0 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let px = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let py = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    out.push_str("<!-- data\n");
    for s in series {
        for (x, y) in &s.points {
            let _ = writeln!(out, "{},{x},{y}", s.label.replace("--", "- -"));
        }
    }
    out.push_str("-->\n");
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        out,
        r#"<path d="M{PAD},{PAD} L{PAD},{} L{},{}" fill="none" stroke="black"/>"#,
        H - PAD,
        W - PAD,
        H - PAD
    );
    let axis = |v: f64| if log_log { format!("{:.3e}", v.exp()) } else { format!("{v:.4}") };
    let _ = writeln!(out, r#"<text x="{PAD}" y="{}" text-anchor="middle">{}</text>"#, H - PAD + 16.0, axis(x0));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W - PAD, H - PAD + 16.0, axis(x1));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, PAD - 4.0, H - PAD, axis(y0));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, PAD - 4.0, PAD + 4.0, axis(y1));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 16.0, escape(x_label));
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(y_label)
    );
    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<(f64, f64)> = s
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite() && (!log_log || (*x > 0.0 && *y > 0.0)))
            .map(|(x, y)| (px(map(*x)), py(map(*y))))
            .collect();
        if pts.len() > 1 {
            let d: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}"/>"#, d.join(" "));
        }
        for (x, y) in &pts {
            let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}"/>"#);
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            W - PAD - 140.0,
            PAD + 16.0 * k as f64,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
