//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 oracle mismatch,
//! 3 precision guard exceeded, 5 transversality or torsion precondition
//! violated, 6 spectrum not yet real hyperbolic, 64 usage error, 74 I/O error.

use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::asymptotics::{asymptotic_table, special_case_factor, special_case_matrix, SpecialCaseParams, FACTOR_TOL};
use crate::config::{PrecisionMode, RunConfig};
use crate::dynamics::{
    default_n_max, engineered_fixed_point, engineered_window, itinerary, measured_u_expansion, sample_window,
    ReturnRecord, WindowConfig,
};
use crate::error::{Error, Result};
use crate::homoclinic::{transversality_report, HomoclinicMatrix};
use crate::io::{asymptotics_csv, orbit_csv, parse_matrix, read_matrix_file, write_atomic};
use crate::linear_model::{rotation_number_warning, LinearModelParams, GOLDEN_OMEGA};
use crate::spectrum::{full_report, transition_matrix};
use crate::sweep::{rows_to_bytes, run_sweep, OutputFormat, PiSource, SweepSpec};
use crate::symplectic::{symplectic_dense_eigenvalues, Mat4, Vec4};
use crate::verify::{all_passed, run_suites};

const EXIT_OK: i32 = 0;
const EXIT_VERIFY_FAILED: i32 = 1;
const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "transtorsion", version, about = "Spectra of homoclinic transition matrices near partially hyperbolic tori")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_parser = parse_precision)]
    precision: Option<PrecisionMode>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: logical CPU count).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Write the result here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_parser = parse_format)]
    format: Option<OutputFormat>,
    #[arg(long, global = true)]
    tol_spec: Option<f64>,
    #[arg(long, global = true)]
    tol_hyp: Option<f64>,
    #[arg(long, global = true)]
    tol_rank: Option<f64>,
    #[arg(long, global = true)]
    tol_eig: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Spectrum report for one transition matrix.
    Analyze(AnalyzeArgs),
    /// Classification over a parameter grid.
    Sweep(SweepArgs),
    /// Eigenvalues against their large-n models.
    Asymptotics(AsymptoticsArgs),
    /// Window itineraries of the linear model.
    Simulate(SimulateArgs),
    /// Run the property suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct MatrixArgs {
    /// `identity` or a file with 16 reals, row-major in (phi, s, rho, u) order.
    #[arg(long, value_name = "identity|FILE")]
    pi: Option<String>,
    /// The 16 reals given directly.
    #[arg(long, value_name = "REALS")]
    pi_inline: Option<String>,
    /// The shear family: identity with `delta` in the (rho, phi) entry.
    #[arg(long)]
    special_case: bool,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    delta: f64,
    /// Accept a non-symplectic matrix and use the dense eigenvalue path.
    #[arg(long)]
    allow_non_symplectic: bool,
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long)]
    lambda: f64,
    #[arg(long, allow_negative_numbers = true)]
    nu: f64,
    /// Rotation frequency (default: 2π times the golden ratio conjugate).
    #[arg(long, allow_negative_numbers = true)]
    omega: Option<f64>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    matrix: MatrixArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(short = 'n')]
    n: u32,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// JSON sweep specification; the list flags below are used when absent.
    #[arg(long, value_name = "PATH")]
    spec: Option<PathBuf>,
    #[arg(long, value_name = "LIST")]
    lambda_values: Option<String>,
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    nu_values: Option<String>,
    /// Inclusive range `first..last`.
    #[arg(long, value_name = "RANGE")]
    n_range: Option<String>,
    /// Shear-family matrices for these deltas.
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    delta_values: Option<String>,
    /// A single matrix file.
    #[arg(long, value_name = "FILE")]
    pi_file: Option<PathBuf>,
    /// Seeded random symplectic matrices; the seed is `--seed`.
    #[arg(long, value_name = "COUNT")]
    ensemble: Option<usize>,
}

#[derive(Debug, Args)]
struct AsymptoticsArgs {
    #[command(flatten)]
    matrix: MatrixArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// `5,10,20` or `first..last:step`.
    #[arg(long, value_name = "LIST")]
    n_list: String,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    matrix: MatrixArgs,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    nu: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    omega: Option<f64>,
    /// Use the built-in window and model tuned for the shear matrix with delta = 1.
    #[arg(long)]
    engineered: bool,
    /// `phi,s,0,0`.
    #[arg(long, value_name = "VEC", allow_hyphen_values = true)]
    p_plus: Option<String>,
    /// `phi,0,0,u`.
    #[arg(long, value_name = "VEC", allow_hyphen_values = true)]
    p_minus: Option<String>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    /// Number of random start points drawn from the window.
    #[arg(long)]
    seeds: Option<usize>,
    /// Explicit start point in window coordinates; repeatable.
    #[arg(long, value_name = "VEC", allow_hyphen_values = true)]
    start: Vec<String>,
    /// Returns per itinerary.
    #[arg(short = 'k', default_value_t = 10)]
    k: usize,
    #[arg(long)]
    n_max: Option<u32>,
    /// Dump the longest itinerary as `step,phi,s,rho,u,n`.
    #[arg(long, value_name = "PATH")]
    orbit_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Run only this suite; repeatable.
    #[arg(long)]
    suite: Vec<String>,
}

fn parse_precision(s: &str) -> std::result::Result<PrecisionMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_format(s: &str) -> std::result::Result<OutputFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_reals(s: &str) -> Result<Vec<f64>> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::Parse(format!("`{t}` is not a real number")))
        })
        .collect()
}

fn parse_vec4(s: &str) -> Result<Vec4> {
    match parse_reals(s)?.as_slice() {
        [a, b, c, d] => Ok(Vec4::new(*a, *b, *c, *d)),
        other => Err(Error::Parse(format!("expected 4 reals, got {}", other.len()))),
    }
}

fn parse_u32(t: &str) -> Result<u32> {
    t.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("`{t}` is not a non-negative integer")))
}

/// `a..b` inclusive.
fn parse_range(s: &str) -> Result<(u32, u32)> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| Error::Parse(format!("`{s}` is not a range `first..last`")))?;
    Ok((parse_u32(a)?, parse_u32(b)?))
}

/// `5,10,20` or `first..last:step` (inclusive).
fn parse_n_list(s: &str) -> Result<Vec<u32>> {
    if s.contains("..") {
        let (range, step) = match s.split_once(':') {
            Some((r, st)) => (r, parse_u32(st)?),
            None => (s, 1),
        };
        if step == 0 {
            return Err(Error::Parse("step must be positive".into()));
        }
        let (a, b) = parse_range(range)?;
        Ok((a..=b).step_by(step as usize).collect())
    } else {
        s.split(',').map(parse_u32).collect()
    }
}

impl GlobalArgs {
    fn run_config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
            }
            None => RunConfig::default(),
        };
        if let Some(m) = self.precision {
            cfg.precision_mode = m;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        let t = &mut cfg.tolerances;
        for (slot, flag) in [
            (&mut t.tol_spec, self.tol_spec),
            (&mut t.tol_hyp, self.tol_hyp),
            (&mut t.tol_rank, self.tol_rank),
            (&mut t.tol_eig, self.tol_eig),
        ] {
            if let Some(v) = flag {
                *slot = v;
            }
        }
        Ok(cfg)
    }
}

impl MatrixArgs {
    fn given(&self) -> bool {
        self.pi.is_some() || self.pi_inline.is_some() || self.special_case
    }

    fn resolve(&self, cfg: &RunConfig) -> Result<(HomoclinicMatrix, Option<f64>)> {
        let sources = [self.pi.is_some(), self.pi_inline.is_some(), self.special_case];
        if sources.iter().filter(|b| **b).count() != 1 {
            return Err(Error::InvalidParameter(
                "give exactly one of --pi, --pi-inline, --special-case".into(),
            ));
        }
        if self.special_case {
            return Ok((special_case_matrix(self.delta), Some(self.delta)));
        }
        let m: Mat4 = match (&self.pi, &self.pi_inline) {
            (Some(p), _) if p == "identity" => Mat4::identity(),
            (Some(p), _) => read_matrix_file(Path::new(p))?,
            (None, Some(text)) => parse_matrix(&text.replace(',', " "))?,
            (None, None) => unreachable!("checked above"),
        };
        match HomoclinicMatrix::with_tolerance(m, cfg.tolerances.tol_spec) {
            Err(Error::NonSymplectic { .. }) if self.allow_non_symplectic => Ok((HomoclinicMatrix::unchecked(m), None)),
            other => Ok((other?, None)),
        }
    }
}

impl ModelArgs {
    fn params(&self, err: &mut (dyn Write + Send)) -> Result<LinearModelParams> {
        model_params(self.omega, self.nu, self.lambda, err)
    }
}

fn model_params(omega: Option<f64>, nu: f64, lambda: f64, err: &mut (dyn Write + Send)) -> Result<LinearModelParams> {
    let omega = omega.unwrap_or(GOLDEN_OMEGA);
    if let Some(w) = rotation_number_warning(omega) {
        let _ = writeln!(err, "warning: {w}");
    }
    LinearModelParams::new(omega, nu, lambda)
}

fn emit(bytes: &[u8], output: Option<&Path>, out: &mut (dyn Write + Send)) -> Result<()> {
    match output {
        Some(path) => write_atomic(path, bytes),
        None => out.write_all(bytes).map_err(Error::from),
    }
}

fn json_bytes(v: &impl serde::Serialize) -> Result<Vec<u8>> {
    let mut b = serde_json::to_vec_pretty(v).map_err(|e| Error::Io(e.to_string()))?;
    b.push(b'\n');
    Ok(b)
}

fn cmd_analyze(a: &AnalyzeArgs, g: &GlobalArgs, cfg: &RunConfig, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32> {
    let (h, delta) = a.matrix.resolve(cfg)?;
    let p = a.model.params(err)?;
    let report = full_report(&h, &p, a.n, cfg)?;
    let mut v = serde_json::to_value(&report).map_err(|e| Error::Io(e.to_string()))?;
    let obj = v.as_object_mut().expect("report serializes to an object");
    obj.insert("params".into(), json!(p));
    obj.insert("homoclinic_matrix".into(), json!(h.matrix().0));
    obj.insert(
        "transversality".into(),
        json!(transversality_report(&h, cfg.tolerances.tol_rank)),
    );
    if let Some(delta) = delta {
        let f = special_case_factor(&SpecialCaseParams { delta, p, n: a.n })?;
        obj.insert(
            "shear_factorization".into(),
            json!({
                "factor_roots": [f.first, f.second],
                "residual": f.residual,
                "printed_variant_root": f.printed_second,
                "printed_variant_residual": f.printed_residual,
                "printed_variant_matches": f.printed_residual <= FACTOR_TOL,
            }),
        );
        if f.printed_residual > FACTOR_TOL {
            let _ = writeln!(
                err,
                "note: the factor lambda^(2n) + lambda^(-n) disagrees with the traced polynomial (gap {:e}); lambda^n + lambda^(-n) matches (gap {:e})",
                f.printed_residual, f.residual
            );
        }
    }
    emit(&json_bytes(&v)?, g.output.as_deref(), out)?;
    Ok(EXIT_OK)
}

fn required<'a>(o: &'a Option<String>, name: &str) -> Result<&'a str> {
    o.as_deref()
        .ok_or_else(|| Error::InvalidParameter(format!("--{name} is required without --spec")))
}

fn sweep_spec(a: &SweepArgs, g: &GlobalArgs, cfg: &RunConfig) -> Result<SweepSpec> {
    let mut spec = match &a.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
        }
        None => {
            let pi_source = match (&a.delta_values, &a.pi_file, a.ensemble) {
                (Some(d), None, None) => PiSource::SpecialCase {
                    delta_values: parse_reals(d)?,
                },
                (None, Some(path), None) => PiSource::File { path: path.clone() },
                (None, None, Some(count)) => PiSource::SeededEnsemble { count, seed: cfg.seed },
                _ => {
                    return Err(Error::InvalidParameter(
                        "give exactly one of --delta-values, --pi-file, --ensemble".into(),
                    ))
                }
            };
            SweepSpec {
                lambda_values: parse_reals(required(&a.lambda_values, "lambda-values")?)?,
                nu_values: parse_reals(required(&a.nu_values, "nu-values")?)?,
                n_range: parse_range(required(&a.n_range, "n-range")?)?,
                pi_source,
                output: None,
                format: OutputFormat::Csv,
            }
        }
    };
    if let Some(o) = &g.output {
        spec.output = Some(o.clone());
    }
    if let Some(f) = g.format {
        spec.format = f;
    }
    Ok(spec)
}

fn cmd_sweep(a: &SweepArgs, g: &GlobalArgs, cfg: &RunConfig, out: &mut (dyn Write + Send)) -> Result<i32> {
    let spec = sweep_spec(a, g, cfg)?;
    let rows = run_sweep(&spec, cfg)?;
    emit(&rows_to_bytes(&rows, spec.format)?, spec.output.as_deref(), out)?;
    Ok(EXIT_OK)
}

fn cmd_asymptotics(
    a: &AsymptoticsArgs,
    g: &GlobalArgs,
    cfg: &RunConfig,
    out: &mut (dyn Write + Send),
    err: &mut (dyn Write + Send),
) -> Result<i32> {
    let (h, _) = a.matrix.resolve(cfg)?;
    let p = a.model.params(err)?;
    let ns = parse_n_list(&a.n_list)?;
    if ns.is_empty() || ns.contains(&0) {
        return Err(Error::InvalidParameter("n list must hold positive integers".into()));
    }
    let table = asymptotic_table(&h, &p, &ns, cfg)?;
    let bytes = match g.format.unwrap_or_default() {
        OutputFormat::Csv => asymptotics_csv(&table)?,
        OutputFormat::Json => json_bytes(&table)?,
    };
    emit(&bytes, g.output.as_deref(), out)?;
    Ok(EXIT_OK)
}

/// Start points in window coordinates, each with its label.
fn simulation_starts(a: &SimulateArgs, cfg: &RunConfig) -> Result<Vec<(String, [f64; 4])>> {
    let mut starts = a
        .start
        .iter()
        .enumerate()
        .map(|(i, s)| parse_vec4(s).map(|v| (format!("start:{i}"), v.to_array())))
        .collect::<Result<Vec<_>>>()?;
    let seeds = match a.seeds {
        Some(k) => k,
        None if starts.is_empty() && a.engineered => {
            let c = engineered_fixed_point();
            starts.push(("engineered".into(), [c[0], c[1], c[2], c[3] + 1e-4]));
            0
        }
        None if starts.is_empty() => 16,
        None => 0,
    };
    starts.extend((0..seeds).map(|i| {
        let seed = cfg.seed.wrapping_add(i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (format!("seed:{seed}"), sample_window(&mut rng))
    }));
    Ok(starts)
}

fn simulation_setup(a: &SimulateArgs, cfg: &RunConfig, err: &mut (dyn Write + Send)) -> Result<(WindowConfig, LinearModelParams, HomoclinicMatrix)> {
    let (w0, p0) = engineered_window();
    let h = if a.matrix.given() {
        a.matrix.resolve(cfg)?.0
    } else if a.engineered {
        special_case_matrix(1.0)
    } else {
        return Err(Error::InvalidParameter(
            "give a matrix (--pi, --pi-inline, --special-case) or --engineered".into(),
        ));
    };
    let p = match (a.lambda, a.nu, a.engineered) {
        (Some(lambda), Some(nu), _) => model_params(a.omega, nu, lambda, err)?,
        (None, None, true) => p0,
        _ => return Err(Error::InvalidParameter("give both --lambda and --nu".into())),
    };
    let w = match (&a.p_plus, &a.p_minus) {
        (Some(pp), Some(pm)) => {
            let (pp, pm) = (parse_vec4(pp)?, parse_vec4(pm)?);
            let radius = a.radius.unwrap_or_else(|| WindowConfig::default_radius(pp, pm));
            WindowConfig::new(pp, pm, radius, a.mu.unwrap_or(radius))?
        }
        (None, None) if a.engineered => {
            WindowConfig::new(w0.p_plus, w0.p_minus, a.radius.unwrap_or(w0.radius), a.mu.unwrap_or(w0.mu))?
        }
        _ => {
            return Err(Error::InvalidParameter(
                "give both --p-plus and --p-minus, or --engineered".into(),
            ))
        }
    };
    Ok((w, p, h))
}

fn cmd_simulate(a: &SimulateArgs, g: &GlobalArgs, cfg: &RunConfig, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32> {
    let (w, p, h) = simulation_setup(a, cfg, err)?;
    let n_max = a.n_max.unwrap_or_else(|| default_n_max(&p));
    let starts = simulation_starts(a, cfg)?;
    let runs: Vec<Vec<ReturnRecord>> = starts
        .par_iter()
        .map(|(_, c)| itinerary(&h, &w, &p, *c, a.k, n_max))
        .collect();

    let mut text = String::new();
    for ((label, c), records) in starts.iter().zip(&runs) {
        let line = json!({
            "start_label": label,
            "start": c,
            "length": records.len(),
            "return_times": records.iter().map(|r| r.n).collect::<Vec<_>>(),
            "itinerary": records,
        });
        text.push_str(&line.to_string());
        text.push('\n');
    }
    let longest = runs.iter().max_by_key(|r| r.len()).cloned().unwrap_or_default();
    // expansion along the leading run of equal return times
    let prefix: Vec<ReturnRecord> = match longest.first() {
        Some(first) => longest.iter().take_while(|r| r.n == first.n).copied().collect(),
        None => Vec::new(),
    };
    let measured = measured_u_expansion(&h, &w, &p, &prefix);
    let dominant = match prefix.first() {
        Some(r) => Some(
            symplectic_dense_eigenvalues(&transition_matrix(&h, &p, r.n)?)?
                .eigenvalues
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max),
        ),
        None => None,
    };
    let summary = json!({
        "summary": {
            "itineraries": runs.len(),
            "max_length": longest.len(),
            "constant_return_time_run": prefix.len(),
            "measured_expansion": measured,
            "dominant_eigenvalue_modulus": dominant,
        }
    });
    text.push_str(&summary.to_string());
    text.push('\n');
    if let Some(path) = &a.orbit_csv {
        write_atomic(path, &orbit_csv(&longest)?)?;
    }
    emit(text.as_bytes(), g.output.as_deref(), out)?;
    Ok(EXIT_OK)
}

fn cmd_verify(a: &VerifyArgs, g: &GlobalArgs, cfg: &RunConfig, out: &mut (dyn Write + Send)) -> Result<i32> {
    let results = run_suites(cfg, &a.suite)?;
    let mut text = String::new();
    for r in &results {
        if r.passed() {
            text.push_str(&format!("PASS {:<16} {} checks\n", r.name, r.checks));
        } else {
            text.push_str(&format!(
                "FAIL {:<16} {} of {} checks failed; first: {}\n",
                r.name,
                r.failures,
                r.checks,
                r.first_failure.as_deref().unwrap_or("no checks ran")
            ));
        }
    }
    let passed = results.iter().filter(|r| r.passed()).count();
    text.push_str(&format!("{passed}/{} suites passed\n", results.len()));
    emit(text.as_bytes(), g.output.as_deref(), out)?;
    Ok(if all_passed(&results) { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

fn dispatch(cli: &Cli, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32> {
    let cfg = cli.global.run_config()?;
    // verify reports invalid tolerances as a failing suite instead of refusing to run
    if !matches!(cli.command, Command::Verify(_)) {
        cfg.validate()?;
    }
    let g = &cli.global;
    match &cli.command {
        Command::Analyze(a) => cmd_analyze(a, g, &cfg, out, err),
        Command::Sweep(a) => cmd_sweep(a, g, &cfg, out),
        Command::Asymptotics(a) => cmd_asymptotics(a, g, &cfg, out, err),
        Command::Simulate(a) => cmd_simulate(a, g, &cfg, out, err),
        Command::Verify(a) => cmd_verify(a, g, &cfg, out),
    }
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_inner(args, out, err, false)
}

fn run_inner<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send), color: bool) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.global.jobs {
        Some(0) => Err(Error::InvalidParameter("--jobs must be positive".into())),
        Some(jobs) => match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            Ok(pool) => pool.install(|| dispatch(&cli, out, err)),
            Err(e) => Err(Error::InvalidParameter(e.to_string())),
        },
        None => dispatch(&cli, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let label = if color { "\x1b[1;31merror\x1b[0m" } else { "error" };
            let _ = writeln!(err, "{label}: {e}");
            e.exit_code()
        }
    }
}

/// Entry point for the binary: process arguments and standard streams.
pub fn run() -> i32 {
    let color = std::env::var("TT_SPEC_COLOR").map_or(true, |v| v != "never") && std::io::stderr().is_terminal();
    let code = run_inner(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr(), color);
    let _ = std::io::stdout().flush();
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_lists() {
        assert_eq!(parse_n_list("5..30:5").unwrap(), vec![5, 10, 15, 20, 25, 30]);
        assert_eq!(parse_n_list("2,4").unwrap(), vec![2, 4]);
        assert_eq!(parse_n_list("3..5").unwrap(), vec![3, 4, 5]);
        assert!(parse_n_list("1..4:0").is_err());
        assert!(parse_n_list("a,b").is_err());
    }

    #[test]
    fn vectors_and_ranges() {
        assert_eq!(parse_vec4("1,-2, 0 ,3").unwrap(), Vec4::new(1.0, -2.0, 0.0, 3.0));
        assert!(parse_vec4("1,2").is_err());
        assert_eq!(parse_range("1..40").unwrap(), (1, 40));
        assert!(parse_range("7").is_err());
    }

    #[test]
    fn flags_override_config_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"seed": 3, "tolerances": {"tol_hyp": 1e-5}}"#).unwrap();
        let cli = Cli::try_parse_from([
            "tt",
            "--config",
            path.to_str().unwrap(),
            "--seed",
            "9",
            "verify",
        ])
        .unwrap();
        let cfg = cli.global.run_config().unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.tolerances.tol_hyp, 1e-5);
    }

    #[test]
    fn usage_errors_exit_64() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run_with(["tt", "bogus"], &mut out, &mut err), 64);
        assert_eq!(run_with(["tt", "analyze", "-n", "2"], &mut out, &mut err), 64);
        assert_eq!(run_with(["tt", "--help"], &mut out, &mut err), 0);
    }
}
