use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::bench;
use crate::cac;
use crate::dp::Mode;
use crate::gen::{self, Layout};
use crate::geom::{read_points, UnitDiskGraph};
use crate::oracle;
use crate::sc::{decompose, width_of, ScConfig};
use crate::solve::{solve, SolveOptions};
use crate::Error;

#[derive(Parser, Debug)]
#[command(name = "udgpack", version, about = "Vertex-disjoint cycle packing on unit disk graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Seeded random point set as `x,y` CSV.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Side of the square; defaults to an average degree near 4.
        #[arg(long)]
        side: Option<f64>,
        #[arg(long, value_enum, default_value = "uniform")]
        layout: Layout,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Maximum cycle packing, or a decision for `--k`. Exits 1 when fewer than k cycles exist.
    Solve {
        input: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum, default_value = "standard")]
        mode: Mode,
        #[arg(long, default_value_t = 3)]
        z: usize,
        /// Validate the decomposition before running the program.
        #[arg(long)]
        check: bool,
        /// Write run statistics here as JSON.
        #[arg(long)]
        stats: Option<PathBuf>,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Surface-cut decomposition as JSON, with its validity report.
    Decompose {
        input: PathBuf,
        #[arg(long, default_value_t = 8)]
        spread: usize,
    },
    /// K_{z,z}-free pairings of 2m points on a circle.
    Arcs {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        z: usize,
        #[arg(long)]
        count_only: bool,
    },
    /// Exhaustive maximum packing for small inputs.
    Oracle { input: PathBuf },
    /// Checks a cycle list (JSON with a `cycles` field, or a bare array) against a point set.
    Verify { input: PathBuf, solution: PathBuf },
    /// Regression suites as CSV.
    Bench {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[arg(long, default_value_t = 3)]
        per: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Suite {
    Width,
    Runtime,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Infeasible(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Infeasible(_) => 1,
            CliError::Lib(Error::Input(_) | Error::DuplicatePoint(..) | Error::OracleLimit { .. }) => 2,
            CliError::Io(_) | CliError::Json(_) => 2,
            CliError::Lib(_) => 3,
        }
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    match execute(cli.cmd, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load(path: &Path) -> Result<UnitDiskGraph, Error> {
    UnitDiskGraph::new(read_points(path)?)
}

fn emit(out: &mut dyn Write, v: &serde_json::Value) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, v)?;
    writeln!(out)?;
    Ok(())
}

pub fn execute(cmd: Cmd, out: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Cmd::Gen { n, seed, side, layout, out: path } => {
            let side = side.unwrap_or_else(|| (n as f64 * std::f64::consts::PI / 4.0).sqrt());
            let pts = gen::points(layout, n, side, seed);
            let mut text = String::from("x,y\n");
            for p in &pts {
                text.push_str(&format!("{},{}\n", p.x, p.y));
            }
            match path {
                Some(p) => std::fs::write(p, text)?,
                None => out.write_all(text.as_bytes())?,
            }
        }
        Cmd::Solve { input, k, mode, z, check, stats, budget } => {
            let g = load(&input)?;
            let mut opts = SolveOptions { mode, z, k, check, ..Default::default() };
            if let Some(b) = budget {
                opts.budget = b;
            }
            let sol = solve(&g, &opts)?;
            if let Some(p) = stats {
                std::fs::write(p, serde_json::to_string_pretty(&sol.report)?)?;
            }
            let feasible = k.map(|k| sol.value >= k);
            let cycles = match k {
                Some(k) if sol.value >= k => &sol.cycles[..k],
                _ => &sol.cycles[..],
            };
            emit(out, &json!({ "value": sol.value, "k": k, "feasible": feasible, "exact": !sol.report.dense, "cycles": cycles }))?;
            if feasible == Some(false) {
                return Err(CliError::Infeasible(format!("only {} vertex-disjoint cycles exist, {} requested", sol.value, k.unwrap_or(0))));
            }
        }
        Cmd::Decompose { input, spread } => {
            let g = load(&input)?;
            let cfg = ScConfig { spread, ..Default::default() };
            let b = decompose(&g, &cfg)?;
            let report = b.sc.check(&g, &b.map, spread)?;
            let surface = b.surface.as_ref().map(|s| s.check().map(|_| json!({ "width": s.width(), "depth": s.depth(), "nodes": s.nodes.len() })));
            let surface = match surface {
                Some(r) => Some(r?),
                None => None,
            };
            emit(
                out,
                &json!({
                    "n": g.n(),
                    "ell": b.h.ell,
                    "width": width_of(&b.sc, &g, &b.map),
                    "report": report,
                    "surface": surface,
                    "decomposition": b.sc.to_json(),
                }),
            )?;
        }
        Cmd::Arcs { m, z, count_only } => {
            let all = cac::enumerate_kzz_free(m, z);
            if count_only {
                emit(out, &json!({ "m": m, "z": z, "count": all.len() }))?;
            } else {
                let pairings: Vec<_> = all.iter().map(|p| p.pairs.clone()).collect();
                emit(out, &json!({ "m": m, "z": z, "count": all.len(), "pairings": pairings }))?;
            }
        }
        Cmd::Oracle { input } => {
            let g = load(&input)?;
            let r = oracle::max_cycle_packing(&g)?;
            emit(out, &json!({ "value": r.value, "cycles": r.solution }))?;
        }
        Cmd::Verify { input, solution } => {
            let g = load(&input)?;
            let text = std::fs::read_to_string(&solution)?;
            let v: serde_json::Value = serde_json::from_str(&text)?;
            let cycles: Vec<Vec<usize>> = serde_json::from_value(v.get("cycles").cloned().unwrap_or(v))?;
            let ok = oracle::verify_solution(&g, &cycles);
            emit(out, &json!({ "valid": ok, "cycles": cycles.len() }))?;
            if !ok {
                return Err(CliError::Infeasible("not a set of vertex-disjoint cycles".into()));
            }
        }
        Cmd::Bench { suite, sizes, per, seed, out: path } => {
            let mut buf = Vec::new();
            match suite {
                Suite::Width => {
                    let sizes = sizes.unwrap_or_else(|| vec![50, 100, 200, 400, 800]);
                    bench::write_csv(&bench::width_suite(&sizes, per, seed, &ScConfig::default())?, &mut buf)?;
                }
                Suite::Runtime => {
                    let sizes = sizes.unwrap_or_else(|| vec![20, 40, 60, 80]);
                    bench::write_csv(&bench::runtime_suite(&sizes, per, seed, &SolveOptions::default())?, &mut buf)?;
                }
            }
            match path {
                Some(p) => std::fs::write(p, buf)?,
                None => out.write_all(&buf)?,
            }
        }
    }
    Ok(())
}
