//! Command-line front end: decompose, assemble, solve, apply, report.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::energy::{assemble_q, energy, QMatrix, QuadratureConfig};
use crate::error::{Error, Result};
use crate::field::{render, sample_field};
use crate::io::{load_mesh, save_mesh, MeshFormat};
use crate::mesh::{Dimension, SurfaceMesh};
use crate::patching::{apply_signs, extract_patches, PatchDecomposition};
use crate::solver::{brute_force, local_search, SolveResult, BRUTE_FORCE_LIMIT};
use crate::winding::SignAssignment;

#[derive(Debug, Parser)]
#[command(name = "gwn-orient", version, about = "Repair facet orientations by minimizing winding-number energy")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for patch signs and write the reoriented mesh.
    Orient(OrientArgs),
    /// Print the interaction matrix and energy of a sign vector.
    Energy(EnergyArgs),
    /// Render the winding-number field (PPM, or JSON grid for `.json` output).
    Field(FieldArgs),
    /// Print the patch decomposition.
    Patches(PatchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverChoice {
    Brute,
    Local,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Input format; inferred from the extension when omitted.
    #[arg(long)]
    pub format: Option<MeshFormat>,
}

#[derive(Debug, Args)]
pub struct QuadArgs {
    #[arg(long = "quad-base")]
    pub base: Option<usize>,
    #[arg(long = "quad-levels")]
    pub levels: Option<usize>,
    #[arg(long = "quad-tol")]
    pub tol: Option<f64>,
    #[arg(long = "div-threshold")]
    pub threshold: Option<f64>,
}

impl QuadArgs {
    pub fn config(&self) -> QuadratureConfig {
        let d = QuadratureConfig::default();
        QuadratureConfig {
            base_points: self.base.unwrap_or(d.base_points),
            refinement_levels: self.levels.unwrap_or(d.refinement_levels),
            convergence_tol: self.tol.unwrap_or(d.convergence_tol),
            divergence_threshold: self.threshold.unwrap_or(d.divergence_threshold),
        }
    }
}

#[derive(Debug, Args)]
pub struct OrientArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub output: PathBuf,
    /// Defaults to brute force when the patch count allows it.
    #[arg(long, value_enum)]
    pub solver: Option<SolverChoice>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Local-search restarts; defaults to four per patch.
    #[arg(long)]
    pub restarts: Option<usize>,
    #[command(flatten)]
    pub quad: QuadArgs,
}

#[derive(Debug, Args)]
pub struct EnergyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Comma-separated patch signs; all +1 when omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub signs: Option<String>,
    #[command(flatten)]
    pub quad: QuadArgs,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub signs: Option<String>,
    #[arg(long, default_value_t = 256)]
    pub resolution: usize,
    #[arg(long, default_value_t = 1.5)]
    pub margin: f64,
    #[arg(long = "clamp-min", default_value_t = -0.25, allow_hyphen_values = true)]
    pub clamp_min: f64,
    #[arg(long = "clamp-max", default_value_t = 1.25, allow_hyphen_values = true)]
    pub clamp_max: f64,
    #[command(flatten)]
    pub quad: QuadArgs,
}

#[derive(Debug, Args)]
pub struct PatchArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Process exit status for an error: 3 for non-orientable input, 4 for
/// quadrature failures, 2 for everything else (parse, config, i/o).
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NonOrientablePatch { .. } => 3,
        Error::ConflictingDivergence { .. } | Error::NoConvergence { .. } => 4,
        _ => 2,
    }
}

#[derive(Debug, Serialize)]
pub struct OrientReport {
    pub n: usize,
    pub signs: SignAssignment,
    /// Energy with every patch at +1 (each patch in its reference orientation).
    pub energy_before: f64,
    pub energy_after: f64,
    pub method: String,
    pub evaluations: u64,
    pub divergent_entries: usize,
    /// 1-based ids of patches whose sign is -1.
    pub flipped_patches: Vec<usize>,
}

fn load(args: &InputArgs) -> Result<SurfaceMesh> {
    let format = args.format.unwrap_or_else(|| MeshFormat::from_path(&args.input));
    load_mesh(&args.input, format)
}

fn parse_signs(text: Option<&str>, decomp: &PatchDecomposition) -> Result<SignAssignment> {
    let signs = match text {
        Some(t) => SignAssignment::parse_csv(t)?,
        None => SignAssignment::all_positive(decomp.num_patches()),
    };
    decomp.check_signs(&signs)?;
    Ok(signs)
}

fn write_output(path: Option<&Path>, bytes: &[u8], stdout: &mut dyn Write) -> Result<()> {
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| Error::Io { path, source }
    };
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(io_err(p)),
        None => stdout
            .write_all(bytes)
            .and_then(|_| stdout.write_all(b"\n"))
            .map_err(io_err(Path::new("<stdout>"))),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes")
}

/// Solves for signs with the requested (or default) method.
pub fn solve(q: &QMatrix, choice: Option<SolverChoice>, restarts: Option<usize>, seed: u64) -> Result<SolveResult> {
    let choice = choice.unwrap_or(if q.n() <= BRUTE_FORCE_LIMIT {
        SolverChoice::Brute
    } else {
        SolverChoice::Local
    });
    match choice {
        SolverChoice::Brute => brute_force(q),
        SolverChoice::Local => local_search(q, restarts.unwrap_or(4 * q.n().max(1)), seed),
    }
}

pub fn run_orient(args: &OrientArgs, stdout: &mut dyn Write) -> Result<OrientReport> {
    let mesh = load(&args.input)?;
    let decomp = extract_patches(&mesh)?;
    let q = assemble_q(&mesh, &decomp, &args.quad.config())?;
    let before = energy(&q, &SignAssignment::all_positive(q.n()))?;
    let result = solve(&q, args.solver, args.restarts, args.seed)?;
    let oriented = apply_signs(&mesh, &decomp, &result.signs)?;
    save_mesh(&oriented, &args.output)?;
    let report = OrientReport {
        n: q.n(),
        flipped_patches: (0..q.n()).filter(|&i| result.signs.get(i) < 0.0).map(|i| i + 1).collect(),
        signs: result.signs,
        energy_before: before,
        energy_after: result.energy,
        method: result.method.to_string(),
        evaluations: result.evaluations,
        divergent_entries: q.divergent_count(),
    };
    write_output(None, to_json(&report).as_bytes(), stdout)?;
    Ok(report)
}

/// JSON energy report for `q` at `signs`.
pub fn energy_report(q: &QMatrix, signs: &SignAssignment, cfg: &QuadratureConfig) -> Result<serde_json::Value> {
    let diagnostics: Vec<_> = q
        .upper_pairs()
        .map(|(i, j, _)| json!({ "i": i + 1, "j": j + 1, "diagnostics": q.diagnostics(i, j) }))
        .collect();
    Ok(json!({
        "n": q.n(),
        "finite_entries": q.finite_count(),
        "divergent_entries": q.divergent_count(),
        "q": q.rows(),
        "big_m": q.big_m(),
        "signs": signs,
        "energy": energy(q, signs)?,
        "quadrature": cfg,
        "diagnostics": diagnostics,
    }))
}

pub fn run_energy(args: &EnergyArgs, stdout: &mut dyn Write) -> Result<serde_json::Value> {
    let mesh = load(&args.input)?;
    let decomp = extract_patches(&mesh)?;
    let signs = parse_signs(args.signs.as_deref(), &decomp)?;
    let cfg = args.quad.config();
    let q = assemble_q(&mesh, &decomp, &cfg)?;
    let report = energy_report(&q, &signs, &cfg)?;
    write_output(args.output.as_deref(), to_json(&report).as_bytes(), stdout)?;
    Ok(report)
}

pub fn run_field(args: &FieldArgs, stdout: &mut dyn Write) -> Result<serde_json::Value> {
    let mesh = load(&args.input)?;
    let as_json = args.output.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if mesh.dimension() == Dimension::Three && !as_json {
        return Err(Error::Config("image output needs a 2D mesh; use a .json output for 3D grids".into()));
    }
    let decomp = extract_patches(&mesh)?;
    let signs = parse_signs(args.signs.as_deref(), &decomp)?;
    let q = assemble_q(&mesh, &decomp, &args.quad.config())?;
    let e = energy(&q, &signs)?;
    let grid = sample_field(&mesh, &decomp, &signs, args.resolution, args.margin)?;
    let bytes = if as_json {
        grid.to_json().into_bytes()
    } else {
        render(&grid, args.clamp_min, args.clamp_max)?
    };
    write_output(Some(&args.output), &bytes, stdout)?;
    let report = json!({ "n": q.n(), "signs": signs, "energy": e, "masked_cells": grid.masked_count() });
    write_output(None, to_json(&report).as_bytes(), stdout)?;
    Ok(report)
}

pub fn run_patches(args: &PatchArgs, stdout: &mut dyn Write) -> Result<serde_json::Value> {
    let mesh = load(&args.input)?;
    let report = serde_json::to_value(extract_patches(&mesh)?.report()).expect("report serializes");
    write_output(args.output.as_deref(), to_json(&report).as_bytes(), stdout)?;
    Ok(report)
}

/// Parses `args` and runs the subcommand, returning the process exit code.
/// Diagnostics go to `stderr` as a single line.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = write!(stderr, "{e}");
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Orient(a) => run_orient(a, stdout).map(|_| ()),
        Command::Energy(a) => run_energy(a, stdout).map(|_| ()),
        Command::Field(a) => run_field(a, stdout).map(|_| ()),
        Command::Patches(a) => run_patches(a, stdout).map(|_| ()),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}
