//! `qtorsion`: torsion functions, spectra and inequality audits for metric
//! graphs read from JSON.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 solver error, 3 a proven
//! inequality reported as violated.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use quantum_torsion::bounds::{audit, BoundRecord, BoundsReport};
use quantum_torsion::random::{battery, RandomGraphParams};
use quantum_torsion::shape_opt::{self, Objective, OptimizeOptions};
use quantum_torsion::spectral::{integrated_heat_content, lowest_eigenpairs, SpectralOptions};
use quantum_torsion::surgery::{family_generator, Family};
use quantum_torsion::{format_number, torsion_function, Error, MetricGraph};

/// Mesh segment cap for graphs audited in batches.
const BATCH_SEGMENT_CAP: usize = 20_000;

#[derive(Parser)]
#[command(name = "qtorsion", version, about = "Torsional rigidity and spectra of metric graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write output to FILE instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Emit JSON instead of a table.
    #[arg(long, global = true)]
    json: bool,
    /// Significant digits of numeric output.
    #[arg(long, global = true, default_value_t = 12)]
    precision: usize,
}

#[derive(clap::Args, Clone, Copy)]
struct MeshArgs {
    /// Target mesh segment length (default: shortest edge / 16).
    #[arg(long)]
    h: Option<f64>,
    /// Relative convergence tolerance of the eigensolver.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

impl MeshArgs {
    fn options(self) -> Result<SpectralOptions, CliError> {
        if let Some(h) = self.h {
            if !(h > 0.0 && h.is_finite()) {
                return Err(CliError::Usage(format!("--h must be positive, got {h}")));
            }
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(CliError::Usage(format!("--tol must be positive, got {}", self.tol)));
        }
        Ok(SpectralOptions { h: self.h, tol: self.tol, ..SpectralOptions::default() })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Torsion function as JSON.
    Torsion { input: String },
    /// Torsional rigidity T.
    Rigidity { input: String },
    /// Lowest eigenvalues.
    Spectrum {
        input: String,
        #[arg(long, default_value_t = 5)]
        modes: usize,
        #[command(flatten)]
        mesh: MeshArgs,
        /// Include nodal values of every mode in JSON output.
        #[arg(long)]
        samples: bool,
    },
    /// Audit of the inequalities for T and the ground state.
    Bounds {
        #[arg(required_unless_present_any = ["batch", "random"])]
        input: Option<String>,
        /// Audit every *.json file in DIR.
        #[arg(long, value_name = "DIR", conflicts_with_all = ["input", "random"])]
        batch: Option<PathBuf>,
        /// Audit N random graphs.
        #[arg(long, value_name = "N", conflicts_with = "input")]
        random: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        mesh: MeshArgs,
    },
    /// Analytic edge-length derivatives of T against central differences.
    GradCheck {
        input: String,
        /// Difference step as a fraction of each edge length.
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
    },
    /// Projected-gradient optimization of T at fixed total length.
    Optimize {
        input: String,
        #[arg(long, default_value = "max")]
        objective: String,
        /// Length floor (default: 1e-4 |G| / |E|).
        #[arg(long)]
        floor: Option<f64>,
        #[arg(long, default_value_t = 500)]
        iters: usize,
    },
    /// Emit a family graph as JSON.
    Gen {
        /// path_DN, path_DD, star:K, flower:K, stower:L,P, lasso,
        /// pumpkin_chain:AxB.., caterpillar:K
        family: String,
        #[arg(long, value_delimiter = ',')]
        lengths: Vec<f64>,
    },
    /// Partial sums of the integrated heat content against T.
    HeatCheck {
        input: String,
        #[arg(long, default_value_t = 9)]
        modes: usize,
        #[command(flatten)]
        mesh: MeshArgs,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Solver(String),
    Violated(String),
    /// An audit that still has a report to print.
    WithOutput(String, Box<CliError>),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Solver(_) => 2,
            CliError::Violated(_) => 3,
            CliError::WithOutput(_, inner) => inner.code(),
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Solver(m) | CliError::Violated(m) => m,
            CliError::WithOutput(_, inner) => inner.message(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Graph(_) | Error::BadParameters(_) | Error::PreconditionViolated(_) | Error::Inadmissible(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Solver(e.to_string()),
        }
    }
}

fn read_input(source: &str) -> Result<String, CliError> {
    if source == "-" {
        let mut text = String::new();
        io::stdin().read_to_string(&mut text).map_err(|e| CliError::Usage(format!("stdin: {e}")))?;
        Ok(text)
    } else {
        fs::read_to_string(source).map_err(|e| CliError::Usage(format!("{source}: {e}")))
    }
}

fn load(source: &str) -> Result<MetricGraph, CliError> {
    let text = read_input(source)?;
    MetricGraph::from_json(&text).map_err(|e| CliError::Usage(format!("{source}: {e}")))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize") + "\n"
}

struct Output {
    precision: usize,
    json: bool,
}

impl Output {
    fn num(&self, x: f64) -> String {
        format_number(x, self.precision)
    }
}

fn run(cli: &Cli) -> Result<String, CliError> {
    let out = Output { precision: cli.precision.max(1), json: cli.json };
    match &cli.command {
        Command::Torsion { input } => {
            let g = load(input)?;
            Ok(torsion_function(&g)?.to_json() + "\n")
        }
        Command::Rigidity { input } => {
            let t = torsion_function(&load(input)?)?.rigidity;
            Ok(if out.json { to_json(&serde_json::json!({ "rigidity": t })) } else { format!("{}\n", out.num(t)) })
        }
        Command::Spectrum { input, modes, mesh, samples } => {
            let g = load(input)?;
            if *modes == 0 {
                return Err(CliError::Usage("--modes must be at least 1".into()));
            }
            let result = lowest_eigenpairs(&g, *modes, &mesh.options()?)?;
            if out.json {
                return Ok(to_json(&result.report(*samples)));
            }
            let mut text = format!("# h = {}, dofs = {}\n", out.num(result.mesh.h_max()), result.mesh.num_dofs());
            for (k, (lam, res)) in result.eigenvalues.iter().zip(&result.residuals).enumerate() {
                text.push_str(&format!("{:>3} {:>22} {:>10}\n", k + 1, out.num(*lam), format_number(*res, 2)));
            }
            Ok(text)
        }
        Command::Bounds { input, batch, random, seed, mesh } => {
            let opts = mesh.options()?;
            match (input, batch, random) {
                (Some(source), None, None) => {
                    let report = audit(&load(source)?, &opts);
                    let text = if out.json {
                        to_json(&report.all_records().collect::<Vec<_>>())
                    } else {
                        report.to_table(out.precision)
                    };
                    finish_audit(text, &[(source.clone(), Ok(report))])
                }
                (None, Some(dir), None) => {
                    let files = json_files(dir)?;
                    let graphs: Vec<(String, Result<MetricGraph, CliError>)> =
                        files.iter().map(|p| (p.display().to_string(), load(&p.display().to_string()))).collect();
                    batch_audit(graphs, opts, &out)
                }
                (None, None, Some(n)) => {
                    let graphs = battery(*seed, *n, &RandomGraphParams::default())
                        .into_iter()
                        .enumerate()
                        .map(|(i, g)| (format!("random#{i} (seed {seed})"), Ok(g)))
                        .collect();
                    batch_audit(graphs, opts, &out)
                }
                _ => Err(CliError::Usage("give exactly one of INPUT, --batch or --random".into())),
            }
        }
        Command::GradCheck { input, step } => {
            let g = load(input)?;
            if !(*step > 0.0 && *step < 0.25) {
                return Err(CliError::Usage(format!("--step must lie in (0, 0.25), got {step}")));
            }
            #[derive(Serialize)]
            struct Row {
                edge: String,
                analytic: f64,
                finite_difference: f64,
                abs_error: f64,
                halving_ratio: f64,
            }
            let mut rows = Vec::new();
            for (e, edge) in g.edges().iter().enumerate() {
                let s = step * edge.length;
                let check = shape_opt::grad_check(&g, e, s)?;
                let ratio = shape_opt::grad_check_order(&g, e, s)?;
                rows.push(Row {
                    edge: edge.id.clone(),
                    analytic: check.analytic,
                    finite_difference: check.finite_difference,
                    abs_error: check.abs_error,
                    halving_ratio: ratio,
                });
            }
            if out.json {
                return Ok(to_json(&rows));
            }
            let mut text = format!("{:<16} {:>20} {:>20} {:>10} {:>8}\n", "edge", "dT/dl", "central FD", "error", "ratio");
            for r in rows {
                text.push_str(&format!(
                    "{:<16} {:>20} {:>20} {:>10} {:>8}\n",
                    r.edge,
                    out.num(r.analytic),
                    out.num(r.finite_difference),
                    format_number(r.abs_error, 3),
                    format_number(r.halving_ratio, 4)
                ));
            }
            Ok(text)
        }
        Command::Optimize { input, objective, floor, iters } => {
            let g = load(input)?;
            let objective: Objective = objective.parse()?;
            let opts = OptimizeOptions { objective, floor: *floor, max_iters: *iters, ..OptimizeOptions::default() };
            let traj = shape_opt::optimize(&g, &opts)?;
            eprintln!("stop: {:?} after {} iterates, T = {}", traj.stop, traj.iterates.len(), out.num(traj.last().rigidity));
            Ok(traj.to_json_lines())
        }
        Command::Gen { family, lengths } => {
            let family: Family = family.parse()?;
            Ok(family_generator(&family, lengths)?.to_json() + "\n")
        }
        Command::HeatCheck { input, modes, mesh } => {
            let g = load(input)?;
            if *modes == 0 {
                return Err(CliError::Usage("--modes must be at least 1".into()));
            }
            let heat = integrated_heat_content(&g, *modes, &mesh.options()?)?;
            let t = torsion_function(&g)?.rigidity;
            if out.json {
                return Ok(to_json(&serde_json::json!({ "rigidity": t, "heat": heat })));
            }
            let mut text = format!("# T = {}, FEM rigidity = {}, h = {}\n", out.num(t), out.num(heat.fem_rigidity), out.num(heat.h));
            for (k, (term, sum)) in heat.terms.iter().zip(&heat.partial_sums).enumerate() {
                text.push_str(&format!("{:>3} {:>22} {:>22} {:>10}\n", k + 1, out.num(*term), out.num(*sum), format_number(sum / t, 6)));
            }
            Ok(text)
        }
    }
}

fn json_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::Usage(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

#[derive(Serialize)]
struct BatchEntry<'a> {
    source: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a str>,
    records: Vec<&'a BoundRecord>,
}

fn batch_audit(graphs: Vec<(String, Result<MetricGraph, CliError>)>, opts: SpectralOptions, out: &Output) -> Result<String, CliError> {
    let opts = SpectralOptions { segment_cap: Some(BATCH_SEGMENT_CAP), ..opts };
    let reports: Vec<(String, Result<BoundsReport, CliError>)> =
        graphs.into_par_iter().map(|(name, g)| (name, g.map(|g| audit(&g, &opts)))).collect();
    let text = if out.json {
        let entries: Vec<BatchEntry> = reports
            .iter()
            .map(|(name, r)| match r {
                Ok(report) => BatchEntry { source: name, error: None, records: report.all_records().collect() },
                Err(e) => BatchEntry { source: name, error: Some(e.message()), records: Vec::new() },
            })
            .collect();
        to_json(&entries)
    } else {
        let mut text = String::new();
        for (name, r) in &reports {
            text.push_str(&format!("== {name}\n"));
            match r {
                Ok(report) => text.push_str(&report.to_table(out.precision)),
                Err(e) => text.push_str(&format!("error: {}\n", e.message())),
            }
        }
        let violated = reports.iter().filter(|(_, r)| r.as_ref().is_ok_and(BoundsReport::has_violation)).count();
        text.push_str(&format!("# {} graphs, {} with a violated record\n", reports.len(), violated));
        text
    };
    finish_audit(text, &reports)
}

/// Output of an audit with the exit status its records call for.
fn finish_audit(text: String, reports: &[(String, Result<BoundsReport, CliError>)]) -> Result<String, CliError> {
    let mut violated = Vec::new();
    let mut failed = Vec::new();
    for (name, r) in reports {
        match r {
            Ok(report) => {
                violated.extend(report.violations().map(|v| format!("{name}: {} ({} {} {})", v.name, v.lhs, v.relation, v.rhs)));
                failed.extend(report.errors().map(|v| format!("{name}: {}: {}", v.name, v.status)));
            }
            Err(e) => failed.push(format!("{name}: {}", e.message())),
        }
    }
    let status = if !violated.is_empty() {
        CliError::Violated(format!("violated: {}", violated.join("; ")))
    } else if !failed.is_empty() {
        let input_error = reports.iter().any(|(_, r)| matches!(r, Err(CliError::Usage(_))));
        let msg = failed.join("; ");
        if input_error {
            CliError::Usage(msg)
        } else {
            CliError::Solver(msg)
        }
    } else {
        return Ok(text);
    };
    Err(CliError::WithOutput(text, Box::new(status)))
}

fn emit(cli: &Cli, text: &str) -> Result<(), CliError> {
    match &cli.out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).map_err(|e| CliError::Usage(format!("stdout: {e}")))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (text, status) = match run(&cli) {
        Ok(text) => (text, Ok(())),
        Err(CliError::WithOutput(text, inner)) => (text, Err(*inner)),
        Err(e) => (String::new(), Err(e)),
    };
    if let Err(e) = emit(&cli, &text) {
        eprintln!("qtorsion: {}", e.message());
        return ExitCode::from(e.code());
    }
    match status {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qtorsion: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
