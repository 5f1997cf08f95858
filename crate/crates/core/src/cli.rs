//! Command-line driver. Exit status 0 on success, 1 for usage, input and
//! numerical errors, 2 for invariant violations.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::audit::run_audit;
use crate::error::{Error, ErrorKind, Result};
use crate::error_bounds::{pointwise_bound, PowerReport, PreimageModel, Representer};
use crate::inverse::{solve_tikhonov, InverseProblem, InverseSolution};
use crate::io::{format_complex, format_real, to_json_vec, JsonComplex};
use crate::kernel::{gram, psd_check};
use crate::numeric::sinc_pi;
use crate::sampling::{kramer_reconstruct_grid, SamplingScheme};
use crate::spec::{self, TargetSpec};
use crate::synthesis::TransformKernelSpec;

pub const THREADS_ENV: &str = "KERNELFORGE_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "kernelforge",
    version,
    about = "Reproducing kernels by integration over parameter measures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate K on a grid (default 41×41 over [-2, 2]²).
    BuildKernel(CommonArgs),
    /// Gram matrix of a kernel on explicit points, with a PSD check.
    Gram(CommonArgs),
    /// Kramer reconstruction of a target from its samples.
    SampleReconstruct(CommonArgs),
    /// Tikhonov-regularized inverse problem.
    SolveInverse(CommonArgs),
    /// Power function and pointwise error bound.
    ErrorBound(CommonArgs),
    /// Seeded invariant suites across all modules.
    Audit(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// JSON spec file.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Seed for randomized audits.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// `{"error_kind", "detail"}` plus the diagnostic report for invariant violations.
pub fn error_json(err: &Error) -> Value {
    let mut v = json!({
        "error_kind": err.kind().as_str(),
        "detail": err.to_string(),
    });
    if let Error::InvariantViolation { report: Some(r), .. } = err {
        v["report"] = r.clone();
    }
    if let Error::Conditioning { condition_estimate, .. } = err {
        v["condition_estimate"] = json!(condition_estimate);
    }
    v
}

pub fn exit_code(err: &Error) -> i32 {
    match err.kind() {
        ErrorKind::InvariantViolation => 2,
        _ => 1,
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(
                e.kind(),
                K::DisplayHelp | K::DisplayVersion | K::DisplayHelpOnMissingArgumentOrSubcommand
            ) {
                let _ = e.print();
                return 0;
            }
            let err = Error::Argument(e.to_string().trim().to_string());
            eprintln!("{}", error_json(&err));
            return 1;
        }
    };
    match configure_threads().and_then(|_| run(cli.command)) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("{}", error_json(&err));
            exit_code(&err)
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| Error::Argument(format!("{THREADS_ENV}={raw:?} is not a nonnegative integer")))?;
    if n > 0 {
        // a second initialization in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn read_spec(args: &CommonArgs) -> Result<Value> {
    let path = args
        .spec
        .as_ref()
        .ok_or_else(|| Error::Argument("--spec PATH is required for this command".into()))?;
    let text =
        fs::read_to_string(path).map_err(|e| Error::Argument(format!("cannot read spec {}: {e}", path.display())))?;
    spec::parse_document(&text)
}

fn write_output(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, content)?,
        None => std::io::stdout().write_all(content.as_bytes())?,
    }
    Ok(())
}

fn to_pretty<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::BuildKernel(a) => build_kernel(&a),
        Command::Gram(a) => gram_command(&a),
        Command::SampleReconstruct(a) => sample_reconstruct(&a),
        Command::SolveInverse(a) => solve_inverse(&a),
        Command::ErrorBound(a) => error_bound(&a),
        Command::Audit(a) => audit(&a),
    }
}

fn build_kernel(a: &CommonArgs) -> Result<()> {
    let (built, grid) = spec::parse_build(&read_spec(a)?)?;
    let axis = grid.values()?;
    let dim = built.kernel.domain_dim();
    // points t·e₁ on the first coordinate axis
    let point = |t: f64| {
        let mut p = vec![0.0; dim];
        p[0] = t;
        p
    };
    let pts: Vec<Vec<f64>> = axis.iter().map(|&t| point(t)).collect();
    let rows = pts
        .iter()
        .map(|x| {
            pts.iter()
                .map(|y| built.kernel.evaluate(x, y))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let content = match a.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = String::from("x\\y");
            for t in &axis {
                s.push(',');
                s.push_str(&format_real(*t));
            }
            s.push('\n');
            for (t, row) in axis.iter().zip(&rows) {
                s.push_str(&format_real(*t));
                for v in row {
                    s.push(',');
                    s.push_str(&format_complex(*v));
                }
                s.push('\n');
            }
            s
        }
        Format::Json => to_pretty(&json!({
            "family": built.family,
            "label": built.kernel.label(),
            "grid": axis,
            "values": rows.iter().map(|r| to_json_vec(r)).collect::<Vec<_>>(),
        }))?,
    };
    write_output(a.out.as_deref(), &content)
}

fn gram_command(a: &CommonArgs) -> Result<()> {
    let (built, pts) = spec::parse_gram(&read_spec(a)?)?;
    let g = gram(&built.kernel, &pts)?;
    let rep = psd_check(&g);
    let content = match a.format.unwrap_or(Format::Csv) {
        Format::Csv => g.to_csv(),
        Format::Json => {
            let n = g.size();
            let entries: Vec<Vec<JsonComplex>> = (0..n)
                .map(|i| (0..n).map(|j| g.entries()[(i, j)].into()).collect())
                .collect();
            to_pretty(&json!({"points": pts, "entries": entries, "psd": rep}))?
        }
    };
    write_output(a.out.as_deref(), &content)?;
    if !rep.passed {
        return Err(Error::InvariantViolation {
            message: format!("Gram matrix of {} is not positive semidefinite", built.kernel.label()),
            report: serde_json::to_value(rep).ok(),
        });
    }
    Ok(())
}

type TargetFn = dyn Fn(&[f64]) -> Result<Complex64> + Sync;

fn sample_reconstruct(a: &CommonArgs) -> Result<()> {
    let s = spec::parse_sample(&read_spec(a)?)?;
    let kernel = s.kernel.kernel.clone();
    let scheme = SamplingScheme::new(kernel.clone(), s.nodes, s.kernel.transform.clone())?;
    let target: Box<TargetFn> = match &s.target {
        TargetSpec::ShiftedSinc { shift } => {
            let shift = *shift;
            Box::new(move |x: &[f64]| Ok(Complex64::new(sinc_pi(x[0] - shift), 0.0)))
        }
        TargetSpec::KernelSection { center } => {
            let center = center.clone();
            Box::new(move |x: &[f64]| kernel.evaluate(x, &center))
        }
    };
    let samples = scheme.nodes().iter().map(|y| target(y)).collect::<Result<Vec<_>>>()?;
    let rec = kramer_reconstruct_grid(&scheme, &samples, &s.grid)?;
    let oracle = s.grid.iter().map(|x| target(x)).collect::<Result<Vec<_>>>()?;
    let errors: Vec<f64> = rec.iter().zip(&oracle).map(|(r, o)| (r - o).norm()).collect();
    let content = match a.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let dim = s.grid.first().map_or(1, Vec::len);
            let mut out = if dim == 1 {
                "x".to_string()
            } else {
                (0..dim).map(|i| format!("x_{i}")).collect::<Vec<_>>().join(",")
            };
            out.push_str(",reconstruction,oracle,error\n");
            for (((x, r), o), e) in s.grid.iter().zip(&rec).zip(&oracle).zip(&errors) {
                let xs: Vec<String> = x.iter().map(|v| format_real(*v)).collect();
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    xs.join(","),
                    format_complex(*r),
                    format_complex(*o),
                    format_real(*e)
                ));
            }
            out
        }
        Format::Json => to_pretty(&json!({
            "grid": s.grid,
            "reconstruction": to_json_vec(&rec),
            "oracle": to_json_vec(&oracle),
            "error": errors,
            "max_offdiag_ratio": scheme.max_offdiag_ratio(),
            "non_orthogonal": scheme.non_orthogonal(),
        }))?,
    };
    write_output(a.out.as_deref(), &content)
}

/// Solves the problem described by a `solve-inverse` document.
pub fn solve_inverse_document(doc: &Value) -> Result<InverseSolution> {
    let s = spec::parse_inverse(doc)?;
    let transform = s.kernel.require_transform()?.clone();
    let problem = InverseProblem::new(transform, s.sample_points, s.data, s.gamma)?;
    solve_tikhonov(&problem)
}

/// Runs the bound check described by an `error-bound` document.
pub fn error_bound_document(doc: &Value) -> Result<PowerReport> {
    let s = spec::parse_bound(doc)?;
    let transform = TransformKernelSpec::fourier(s.measure.clone())?;
    if s.x.len() != transform.domain_dim() {
        return Err(Error::Argument(format!(
            "x has dimension {}, the transform expects {}",
            s.x.len(),
            transform.domain_dim()
        )));
    }
    let model = PreimageModel::new(s.g.kernel.clone(), s.observation_nodes, s.measure)?;
    let rep = Representer::new(s.g.kernel, s.centers, s.coeffs)?;
    pointwise_bound(&model, &transform, &rep, &s.x)
}

fn solve_inverse(a: &CommonArgs) -> Result<()> {
    let sol = solve_inverse_document(&read_spec(a)?)?;
    let content = match a.format.unwrap_or(Format::Json) {
        Format::Json => to_pretty(&sol.to_json())?,
        Format::Csv => {
            let mut out = String::from("i,alpha,fitted\n");
            for (i, (al, f)) in sol.alpha.iter().zip(&sol.fitted).enumerate() {
                out.push_str(&format!("{i},{},{}\n", format_complex(*al), format_complex(*f)));
            }
            out
        }
    };
    write_output(a.out.as_deref(), &content)
}

/// `out.json` ↦ `out.power.csv`, `out.csv` ↦ `out.report.json`.
fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}"))
}

fn error_bound(a: &CommonArgs) -> Result<()> {
    let report = error_bound_document(&read_spec(a)?)?;
    let json = to_pretty(&report)?;
    let csv = report.power_csv();
    let format = a.format.unwrap_or(Format::Json);
    match (a.out.as_deref(), format) {
        (Some(out), Format::Json) => {
            fs::write(out, &json)?;
            fs::write(sibling(out, "power.csv"), &csv)?;
        }
        (Some(out), Format::Csv) => {
            fs::write(out, &csv)?;
            fs::write(sibling(out, "report.json"), &json)?;
        }
        (None, Format::Json) => write_output(None, &json)?,
        (None, Format::Csv) => write_output(None, &csv)?,
    }
    Ok(())
}

fn audit(a: &CommonArgs) -> Result<()> {
    if a.format == Some(Format::Csv) {
        return Err(Error::Argument("audit output is JSON only".into()));
    }
    let summary = run_audit(a.seed);
    write_output(a.out.as_deref(), &to_pretty(&summary)?)?;
    if !summary.passed {
        let failed: Vec<&str> = summary
            .suites
            .iter()
            .filter(|s| !s.passed)
            .map(|s| s.name.as_str())
            .collect();
        return Err(Error::InvariantViolation {
            message: format!("audit suites failed: {}", failed.join(", ")),
            report: serde_json::to_value(&summary).ok(),
        });
    }
    Ok(())
}
