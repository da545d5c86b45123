//! Batch classification over a grid of `(λ, ν, Π, n)`.
//!
//! Cells `(λ, ν, Π)` run in parallel; rows come back in the lexicographic
//! order of the input lists, then increasing `n`, whatever the completion
//! order. Values of `n` past the precision guard are skipped.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::special_case_matrix;
use crate::config::RunConfig;
use crate::ensemble::{symplectic_ensemble, EnsembleConfig};
use crate::error::{Error, Result};
use crate::homoclinic::{transversality_delta, HomoclinicMatrix};
use crate::io::{csv_bytes, fmt_f64, read_matrix_file};
use crate::linear_model::{LinearModelParams, GOLDEN_OMEGA};
use crate::precision::max_n;
use crate::spectrum::{full_report, Classification};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PiSource {
    SpecialCase { delta_values: Vec<f64> },
    File { path: PathBuf },
    SeededEnsemble { count: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Parse(format!("unknown format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub lambda_values: Vec<f64>,
    pub nu_values: Vec<f64>,
    /// Inclusive `[first, last]`.
    pub n_range: (u32, u32),
    pub pi_source: PiSource,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if self.lambda_values.is_empty() || self.nu_values.is_empty() {
            return bad("lambda and nu lists must be non-empty");
        }
        if let Some(l) = self.lambda_values.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
            return Err(Error::InvalidParameter(format!("lambda {l} is not in (0, 1)")));
        }
        if self.nu_values.iter().any(|v| !v.is_finite()) {
            return bad("nu values must be finite");
        }
        let (a, b) = self.n_range;
        if a == 0 || a > b {
            return bad("n range must be a non-empty range of positive integers");
        }
        match &self.pi_source {
            PiSource::SpecialCase { delta_values } if delta_values.is_empty() => bad("delta list must be non-empty"),
            PiSource::SeededEnsemble { count: 0, .. } => bad("ensemble count must be positive"),
            _ => Ok(()),
        }
    }

    /// Labelled homoclinic matrices in source order.
    pub fn matrices(&self) -> Result<Vec<(String, HomoclinicMatrix)>> {
        match &self.pi_source {
            PiSource::SpecialCase { delta_values } => Ok(delta_values
                .iter()
                .map(|d| (format!("delta={}", fmt_f64(*d)), special_case_matrix(*d)))
                .collect()),
            PiSource::File { path } => {
                let h = HomoclinicMatrix::new(read_matrix_file(path)?)?;
                Ok(vec![(format!("file:{}", path.display()), h)])
            }
            PiSource::SeededEnsemble { count, seed } => Ok(symplectic_ensemble(*count, *seed, &EnsembleConfig::default())
                .into_iter()
                .enumerate()
                .map(|(i, h)| (format!("ensemble:{seed}:{i}"), h))
                .collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub nu: f64,
    pub pi_label: String,
    pub n: u32,
    #[serde(rename = "Delta")]
    pub delta: f64,
    pub d22: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub classification: Classification,
    pub min_unit_circle_distance: f64,
    /// First hyperbolic `n` seen so far in this cell.
    #[serde(rename = "N0_running")]
    pub n0_running: Option<u32>,
}

pub const SWEEP_HEADER: [&str; 11] = [
    "lambda",
    "nu",
    "pi_label",
    "n",
    "Delta",
    "d22",
    "A",
    "B",
    "classification",
    "min_unit_circle_distance",
    "N0_running",
];

fn run_cell(
    lambda: f64,
    nu: f64,
    label: &str,
    h: &HomoclinicMatrix,
    n_range: (u32, u32),
    cfg: &RunConfig,
) -> Result<Vec<SweepRow>> {
    let p = LinearModelParams::new(GOLDEN_OMEGA, nu, lambda)?;
    let last = n_range.1.min(max_n(lambda, cfg.precision_mode));
    let delta = transversality_delta(h);
    let mut n0 = None;
    (n_range.0..=last)
        .map(|n| {
            let r = full_report(h, &p, n, cfg)?;
            if n0.is_none() && r.classification.is_hyperbolic() {
                n0 = Some(n);
            }
            Ok(SweepRow {
                lambda,
                nu,
                pi_label: label.to_string(),
                n,
                delta,
                d22: h.d22(),
                a: r.a_n,
                b: r.b_n,
                classification: r.classification,
                min_unit_circle_distance: r.min_unit_circle_distance,
                n0_running: n0,
            })
        })
        .collect()
}

/// All rows of the sweep, in deterministic order. Runs on the current rayon pool.
pub fn run_sweep(spec: &SweepSpec, cfg: &RunConfig) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let matrices = spec.matrices()?;
    let mut cells = Vec::new();
    for &lambda in &spec.lambda_values {
        for &nu in &spec.nu_values {
            for (label, h) in &matrices {
                cells.push((lambda, nu, label.as_str(), h));
            }
        }
    }
    let chunks = cells
        .par_iter()
        .map(|(lambda, nu, label, h)| run_cell(*lambda, *nu, label, h, spec.n_range, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

pub fn rows_to_bytes(rows: &[SweepRow], format: OutputFormat) -> Result<Vec<u8>> {
    match format {
        OutputFormat::Csv => csv_bytes(
            &SWEEP_HEADER,
            rows.iter().map(|r| {
                vec![
                    fmt_f64(r.lambda),
                    fmt_f64(r.nu),
                    r.pi_label.clone(),
                    r.n.to_string(),
                    fmt_f64(r.delta),
                    fmt_f64(r.d22),
                    fmt_f64(r.a),
                    fmt_f64(r.b),
                    r.classification.to_string(),
                    fmt_f64(r.min_unit_circle_distance),
                    r.n0_running.map(|n| n.to_string()).unwrap_or_default(),
                ]
            }),
        ),
        OutputFormat::Json => {
            let mut out = serde_json::to_vec_pretty(rows).map_err(|e| Error::Io(e.to_string()))?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shear_grid_spec() -> SweepSpec {
        SweepSpec {
            lambda_values: vec![0.5],
            nu_values: vec![0.0, 1.0],
            n_range: (1, 20),
            pi_source: PiSource::SpecialCase {
                delta_values: vec![0.0, 1.0],
            },
            output: None,
            format: OutputFormat::Csv,
        }
    }

    #[test]
    fn only_the_twisted_transverse_cell_becomes_hyperbolic() {
        let rows = run_sweep(&shear_grid_spec(), &RunConfig::default()).unwrap();
        assert_eq!(rows.len(), 4 * 20);
        for r in &rows {
            let twisted = r.nu != 0.0 && r.delta != 0.0;
            assert_eq!(r.classification == Classification::HyperbolicReal, twisted, "{r:?}");
            assert_eq!(r.n0_running.is_some(), twisted);
        }
        // lexicographic order: nu outer to delta inner, then n
        assert_eq!(rows[0].pi_label, "delta=0.0");
        assert_eq!(rows[20].pi_label, "delta=1.0");
        assert_eq!(rows[40].nu, 1.0);
    }

    #[test]
    fn guard_skips_rows() {
        let mut spec = shear_grid_spec();
        spec.n_range = (50, 60);
        let rows = run_sweep(&spec, &RunConfig::default()).unwrap();
        assert!(rows.is_empty());
        let bytes = rows_to_bytes(&rows, OutputFormat::Csv).unwrap();
        assert_eq!(String::from_utf8(bytes).unwrap(), SWEEP_HEADER.join(",") + "\n");
    }

    #[test]
    fn seeded_sweeps_are_identical() {
        let spec = SweepSpec {
            lambda_values: vec![0.5, 0.8],
            nu_values: vec![1.0],
            n_range: (1, 10),
            pi_source: PiSource::SeededEnsemble { count: 5, seed: 7 },
            output: None,
            format: OutputFormat::Csv,
        };
        let a = rows_to_bytes(&run_sweep(&spec, &RunConfig::default()).unwrap(), OutputFormat::Csv).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| run_sweep(&spec, &RunConfig::default())).unwrap();
        assert_eq!(a, rows_to_bytes(&b, OutputFormat::Csv).unwrap());
    }

    #[test]
    fn spec_validation() {
        let mut spec = shear_grid_spec();
        spec.lambda_values = vec![1.5];
        assert!(spec.validate().is_err());
        let mut spec = shear_grid_spec();
        spec.n_range = (5, 4);
        assert!(spec.validate().is_err());
        let js = serde_json::to_string(&shear_grid_spec()).unwrap();
        let back: SweepSpec = serde_json::from_str(&js).unwrap();
        assert_eq!(back, shear_grid_spec());
    }
}
