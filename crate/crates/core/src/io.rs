//! Plain-text file formats.
//!
//! | file          | header                                   |
//! |---------------|------------------------------------------|
//! | coefficients  | `ell,m,re,im` (rows in flat order)       |
//! | weights       | `ell,beta`                               |
//! | spectrum      | `ell,C`                                  |
//! | grid field    | `# quadrature-grid ...` then `theta,phi,value` |
//! | frontier      | `lambda,discrepancy,hybrid_norm,l0_count`|
//! | l0 staircase  | `lambda_lower,lambda_upper,count,discrepancy_lower,discrepancy_upper` |
//! | scaling curve | `gamma,discrepancy,marker`               |
//!
//! Floats are written with 17 significant digits so that reading a file back
//! reproduces every value bit for bit.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::coeffs::{coefficient_count, flat_index, CoefficientSet, DegreeWeights};
use crate::error::{Error, Result};
use crate::frontier::{Frontier, L0Frontier};
use crate::scaling::ScalingReport;
use crate::sht::{GridField, QuadratureGrid};
use crate::simulate::PowerSpectrum;

/// Tolerance for flagging parsed coefficients as a real field.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn reader(input: impl Read, comments: bool) -> csv::Reader<impl Read> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(if comments { Some(b'#') } else { None })
        .from_reader(input)
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, expected: &[&str]) -> Result<()> {
    let headers = rdr.headers().map_err(csv_error)?;
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(Error::format(
            1,
            format!("expected header `{}`, found `{}`", expected.join(","), got.join(",")),
        ));
    }
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::format(line, format!("{kind:?}")),
    }
}

fn field<T: std::str::FromStr>(record: &csv::StringRecord, idx: usize, name: &str) -> Result<T> {
    let line = record.position().map_or(0, |p| p.line() as usize);
    let raw = record
        .get(idx)
        .ok_or_else(|| Error::format(line, format!("missing column `{name}`")))?;
    raw.parse()
        .map_err(|_| Error::format(line, format!("cannot parse `{raw}` as {name}")))
}

/// Reads a coefficient table. Rows must cover every `(ell, m)` in flat
/// order. Symmetric input is flagged as a real field; with
/// `require_real_field` asymmetric input is rejected.
pub fn read_coefficients(input: impl Read, require_real_field: bool) -> Result<CoefficientSet> {
    let mut rdr = reader(input, false);
    check_header(&mut rdr, &["ell", "m", "re", "im"])?;
    let mut entries = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let ell: usize = field(&rec, 0, "ell")?;
        let m: i64 = field(&rec, 1, "m")?;
        if m.unsigned_abs() as usize > ell || flat_index(ell, m) != entries.len() {
            return Err(Error::format(
                line,
                format!(
                    "row (ell={ell}, m={m}) out of order or invalid at position {}",
                    entries.len()
                ),
            ));
        }
        entries.push(Complex64::new(field(&rec, 2, "re")?, field(&rec, 3, "im")?));
    }
    let n = entries.len();
    let mut set = CoefficientSet::from_vec(entries)
        .map_err(|_| Error::format(n + 1, format!("{n} rows do not form a complete band-limited set")))?;
    debug_assert_eq!(set.len(), coefficient_count(set.band_limit()));
    match set.conjugate_symmetry_violation(SYMMETRY_TOL) {
        None => set.mark_real_field(SYMMETRY_TOL)?,
        Some((ell, m)) if require_real_field => {
            return Err(Error::format(
                0,
                format!("coefficients violate conjugate symmetry at (ell={ell}, m={m})"),
            ))
        }
        Some(_) => {}
    }
    Ok(set)
}

pub fn write_coefficients(mut out: impl Write, a: &CoefficientSet) -> Result<()> {
    writeln!(out, "ell,m,re,im")?;
    for (ell, block) in a.blocks() {
        for (i, c) in block.iter().enumerate() {
            let m = i as i64 - ell as i64;
            writeln!(out, "{ell},{m},{},{}", fmt_f64(c.re), fmt_f64(c.im))?;
        }
    }
    Ok(())
}

fn read_per_degree(input: impl Read, value_name: &str) -> Result<Vec<f64>> {
    let mut rdr = reader(input, false);
    check_header(&mut rdr, &["ell", value_name])?;
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let ell: usize = field(&rec, 0, "ell")?;
        if ell != values.len() {
            return Err(Error::format(
                line,
                format!("expected ell={}, found {ell}", values.len()),
            ));
        }
        values.push(field(&rec, 1, value_name)?);
    }
    if values.is_empty() {
        return Err(Error::format(1, "no rows"));
    }
    Ok(values)
}

fn write_per_degree(mut out: impl Write, value_name: &str, values: &[f64]) -> Result<()> {
    writeln!(out, "ell,{value_name}")?;
    for (ell, v) in values.iter().enumerate() {
        writeln!(out, "{ell},{}", fmt_f64(*v))?;
    }
    Ok(())
}

pub fn read_weights(input: impl Read) -> Result<DegreeWeights> {
    DegreeWeights::new(read_per_degree(input, "beta")?)
}

pub fn write_weights(out: impl Write, beta: &DegreeWeights) -> Result<()> {
    write_per_degree(out, "beta", beta.as_slice())
}

pub fn read_spectrum(input: impl Read) -> Result<PowerSpectrum> {
    PowerSpectrum::new(read_per_degree(input, "C")?)
}

pub fn write_spectrum(out: impl Write, spectrum: &PowerSpectrum) -> Result<()> {
    write_per_degree(out, "C", spectrum.as_slice())
}

/// Writes the real part of a grid field.
pub fn write_grid_field(mut out: impl Write, f: &GridField) -> Result<()> {
    let g = f.grid();
    writeln!(
        out,
        "# quadrature-grid band_limit={} n_theta={} n_phi={}",
        g.band_limit(),
        g.n_theta(),
        g.n_phi()
    )?;
    writeln!(out, "theta,phi,value")?;
    for ((theta, phi), v) in g.nodes().zip(f.values()) {
        writeln!(out, "{},{},{}", fmt_f64(theta), fmt_f64(phi), fmt_f64(v.re))?;
    }
    Ok(())
}

/// Reads a real grid field, rebuilding the grid from the header comment and
/// checking every node position against it.
pub fn read_grid_field(mut input: impl Read) -> Result<GridField> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let first = text.lines().next().unwrap_or_default();
    let band_limit = first
        .strip_prefix("# quadrature-grid")
        .and_then(|rest| {
            rest.split_whitespace()
                .find_map(|kv| kv.strip_prefix("band_limit="))
                .and_then(|v| v.parse::<usize>().ok())
        })
        .ok_or_else(|| Error::format(1, "missing `# quadrature-grid band_limit=L` header"))?;
    let grid = QuadratureGrid::new(band_limit);

    let mut rdr = reader(text.as_bytes(), true);
    check_header(&mut rdr, &["theta", "phi", "value"])?;
    let mut values = Vec::with_capacity(grid.len());
    let mut nodes = grid.nodes();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let theta: f64 = field(&rec, 0, "theta")?;
        let phi: f64 = field(&rec, 1, "phi")?;
        let (t, p) = nodes
            .next()
            .ok_or_else(|| Error::format(line, "more rows than grid points"))?;
        if (theta - t).abs() > 1e-12 || (phi - p).abs() > 1e-12 {
            return Err(Error::format(
                line,
                format!("node ({theta}, {phi}) does not match grid ({t}, {p})"),
            ));
        }
        values.push(field(&rec, 2, "value")?);
    }
    drop(nodes);
    if values.len() != grid.len() {
        return Err(Error::format(
            0,
            format!("{} rows for a grid of {} points", values.len(), grid.len()),
        ));
    }
    GridField::from_real(grid, &values)
}

/// Path samples; see [`Frontier::samples`].
pub fn write_frontier(mut out: impl Write, frontier: &Frontier, interior_samples: usize) -> Result<()> {
    writeln!(out, "lambda,discrepancy,hybrid_norm,l0_count")?;
    for p in frontier.samples(interior_samples) {
        writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(p.lambda),
            fmt_f64(p.discrepancy),
            fmt_f64(p.hybrid_norm),
            p.active_count
        )?;
    }
    Ok(())
}

pub fn write_l0_frontier(mut out: impl Write, l0: &L0Frontier) -> Result<()> {
    writeln!(
        out,
        "lambda_lower,lambda_upper,count,discrepancy_lower,discrepancy_upper"
    )?;
    for s in &l0.steps {
        writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f64(s.lambda_lower),
            fmt_f64(s.lambda_upper),
            s.count,
            fmt_f64(s.discrepancy_lower),
            fmt_f64(s.discrepancy_upper)
        )?;
    }
    Ok(())
}

/// `q(gamma)` on `samples` points of `[0, 2 gamma_norm]` plus marker rows for
/// `gamma = 1`, `gamma_norm` and `gamma_opt`, sorted by gamma.
pub fn write_scaling_curve(mut out: impl Write, report: &ScalingReport, samples: usize) -> Result<()> {
    let mut rows: Vec<(f64, &str)> = report
        .sweep(2.0 * report.gamma_norm, samples)
        .into_iter()
        .map(|(g, _)| (g, ""))
        .collect();
    rows.push((1.0, "unscaled"));
    rows.push((report.gamma_norm, "gamma_norm"));
    rows.push((report.gamma_opt, "gamma_opt"));
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    writeln!(out, "gamma,discrepancy,marker")?;
    for (g, marker) in rows {
        writeln!(out, "{},{},{marker}", fmt_f64(g), fmt_f64(report.discrepancy_at(g)))?;
    }
    Ok(())
}

/// Ordered `key = value` document.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValueDoc {
    entries: Vec<(String, String)>,
}

impl KeyValueDoc {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    pub fn push_f64(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        self.push(key, fmt_f64(value))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.get(key)?.parse().ok()
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn write(&self, mut out: impl Write) -> Result<()> {
        for (k, v) in &self.entries {
            writeln!(out, "{k} = {v}")?;
        }
        Ok(())
    }

    /// Parses `key = value` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = Self::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once(" = ")
                .ok_or_else(|| Error::format(i + 1, format!("expected `key = value`, found `{line}`")))?;
            doc.push(k.trim(), v.trim());
        }
        Ok(doc)
    }
}
