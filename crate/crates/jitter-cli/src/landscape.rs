//! Landscape flipping: samples a 1-D curve, applies the wrapper transform
//! at each requested level, writes the curves as CSV, and reports how many
//! local minima each flipped curve has.

use std::fs;
use std::path::Path;

use jitter::analysis::{count_local_minima, flip_curve, CurveSamples};

use crate::error::{CliError, CliResult};

pub const DEFAULT_GRID: usize = 2001;
pub const MINIMA_TOL: f64 = 1e-12;

pub struct LandscapeOutput {
    pub csv: String,
    /// `(column label, local minima count)` per curve, original first.
    pub minima: Vec<(String, usize)>,
}

fn named_curve(
    name: &str,
    lo: Option<f64>,
    hi: Option<f64>,
    grid: usize,
) -> CliResult<Option<CurveSamples>> {
    let build = |default_lo: f64, default_hi: f64, f: fn(f64) -> f64| -> CliResult<CurveSamples> {
        let lo = lo.unwrap_or(default_lo);
        let hi = hi.unwrap_or(default_hi);
        CurveSamples::from_fn(lo, hi, grid, f).map_err(CliError::config)
    };
    match name {
        "parabola" => build(-1.0, 1.0, |x| x * x).map(Some),
        "double-well" => build(-1.5, 1.5, |x| {
            let w = x * x - 1.0;
            w * w
        })
        .map(Some),
        _ => Ok(None),
    }
}

fn curve_from_csv(path: &Path) -> CliResult<CurveSamples> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 {
            return Err(CliError::Config(format!(
                "{} line {}: expected two columns, got {}",
                path.display(),
                idx + 1,
                fields.len()
            )));
        }
        let x: Result<f64, _> = fields[0].trim().parse();
        let y: Result<f64, _> = fields[1].trim().parse();
        match (x, y) {
            (Ok(x), Ok(y)) => {
                xs.push(x);
                ys.push(y);
            }
            _ if idx == 0 => {} // header row
            _ => {
                return Err(CliError::Config(format!(
                    "{} line {}: cannot parse '{line}' as two numbers",
                    path.display(),
                    idx + 1
                )));
            }
        }
    }
    CurveSamples::new(xs, ys).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Loads a named curve or a two-column CSV file.
pub fn load_curve(
    curve: &str,
    lo: Option<f64>,
    hi: Option<f64>,
    grid: usize,
) -> CliResult<CurveSamples> {
    if grid < 3 {
        return Err(CliError::Config(format!(
            "grid must be at least 3 points, got {grid}"
        )));
    }
    if let Some(samples) = named_curve(curve, lo, hi, grid)? {
        return Ok(samples);
    }
    let path = Path::new(curve);
    if path.exists() {
        return curve_from_csv(path);
    }
    Err(CliError::Config(format!(
        "unknown curve '{curve}': expected parabola, double-well, or a CSV file path"
    )))
}

/// Flips the curve at each level and renders the CSV plus minima counts.
/// Values print in shortest round-trip form so the x grid survives exactly.
pub fn analyze(curve: &CurveSamples, levels: &[f64]) -> CliResult<LandscapeOutput> {
    for level in levels {
        if !level.is_finite() {
            return Err(CliError::Config(format!("level {level} is not finite")));
        }
    }
    let flipped: Vec<(String, CurveSamples)> = levels
        .iter()
        .map(|&level| (format!("flooded_{level}"), flip_curve(curve, level)))
        .collect();

    let mut csv = String::from("x,original");
    for (label, _) in &flipped {
        csv.push(',');
        csv.push_str(label);
    }
    csv.push('\n');
    for i in 0..curve.len() {
        csv.push_str(&format!("{},{}", curve.xs()[i], curve.ys()[i]));
        for (_, samples) in &flipped {
            csv.push_str(&format!(",{}", samples.ys()[i]));
        }
        csv.push('\n');
    }

    let mut minima = Vec::with_capacity(flipped.len() + 1);
    minima.push((
        "original".to_string(),
        count_local_minima(curve, MINIMA_TOL).map_err(CliError::config)?,
    ));
    for (label, samples) in &flipped {
        minima.push((
            label.clone(),
            count_local_minima(samples, MINIMA_TOL).map_err(CliError::config)?,
        ));
    }
    Ok(LandscapeOutput { csv, minima })
}

pub fn run(
    curve_name: &str,
    lo: Option<f64>,
    hi: Option<f64>,
    grid: usize,
    levels: &[f64],
    out: Option<&Path>,
) -> CliResult<()> {
    let curve = load_curve(curve_name, lo, hi, grid)?;
    let output = analyze(&curve, levels)?;
    match out {
        Some(path) => {
            fs::write(path, &output.csv)
                .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))?;
        }
        None => print!("{}", output.csv),
    }
    for (label, count) in &output.minima {
        let plural = if *count == 1 { "minimum" } else { "minima" };
        println!("{label}: {count} local {plural}");
    }
    Ok(())
}
