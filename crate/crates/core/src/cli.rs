//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::expansion::{Expansion, ExpansionError};
use crate::hugoniot::write_shock_csv;
use crate::model::{validate, ModelError, ProblemConfig, ProblemSpec};
use crate::reference::{
    compare, output_times, run_reference, sweep, write_fronts_csv, Comparison, ExactDamped, FiniteVolume,
    ReferenceError, ShockOracle, ShockTrack, SECOND_ORDER_BOUND,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_USAGE: i32 = 4;

const FIELD_SAMPLES: usize = 400;

#[derive(Debug, Parser)]
#[command(name = "shockfit", version, about = "Shock-curve asymptotics with a finite-volume reference")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Directory for CSV and JSON outputs.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,
    /// Override the marching step.
    #[arg(long, global = true)]
    pub dt: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a configuration and report every check.
    Validate { config: PathBuf },
    /// Build the expansion and write shock and field CSVs.
    Solve {
        config: PathBuf,
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Run the finite-volume solver and write snapshots and fronts.
    Reference {
        config: PathBuf,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        cells: Option<usize>,
    },
    /// Compare the expansion with the finite-volume shocks at one epsilon.
    Compare {
        config: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        cells: Option<usize>,
        /// Constant `C` of the pass bound `max(2 grid_error, C eps^2)`.
        #[arg(long, default_value_t = SECOND_ORDER_BOUND)]
        bound: f64,
    },
    /// Fit the order of the shock error over a list of epsilon values.
    Sweep {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        #[arg(long)]
        cells: Option<usize>,
        /// Closed-form oracle `D_MINUS,D_PLUS,RATE` in place of the solver.
        #[arg(long, value_delimiter = ',')]
        exact: Option<Vec<f64>>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Solve { .. } => "solve",
            Command::Reference { .. } => "reference",
            Command::Compare { .. } => "compare",
            Command::Sweep { .. } => "sweep",
        }
    }

    fn overrides(&self) -> Value {
        match self {
            Command::Validate { .. } => json!({}),
            Command::Solve { eps, .. } => json!({ "eps": eps }),
            Command::Reference { eps, cells, .. } => json!({ "eps": eps, "cells": cells }),
            Command::Compare { eps, cells, bound, .. } => json!({ "eps": eps, "cells": cells, "bound": bound }),
            Command::Sweep { eps, cells, exact, .. } => json!({ "eps": eps, "cells": cells, "exact": exact }),
        }
    }

    fn config(&self) -> &Path {
        match self {
            Command::Validate { config }
            | Command::Solve { config, .. }
            | Command::Reference { config, .. }
            | Command::Compare { config, .. }
            | Command::Sweep { config, .. } => config,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("configuration: {0}")]
    Model(#[from] ModelError),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("expansion: {0}")]
    Expansion(#[from] ExpansionError),
    #[error("reference: {0}")]
    Reference(ReferenceError),
    #[error("{0}")]
    Check(String),
}

impl From<ReferenceError> for CliError {
    fn from(e: ReferenceError) -> Self {
        match e {
            ReferenceError::Usage(m) => CliError::Usage(m),
            ReferenceError::Model(m) => CliError::Model(m),
            e => CliError::Reference(e),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => EXIT_USAGE,
            CliError::Model(_) | CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Expansion(_) | CliError::Reference(_) => EXIT_NUMERICAL,
            CliError::Check(_) => EXIT_CHECK,
        }
    }
}

/// What a run did, written next to its outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: &'static str,
    pub config: PathBuf,
    pub out: PathBuf,
    pub overrides: Value,
    pub exit_status: i32,
    pub error: Option<String>,
    pub seconds: f64,
}

/// Writes `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut BufWriter<&mut fs::File>) -> io::Result<()>) -> Result<(), CliError> {
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        fill(&mut w).map_err(io_err)?;
        w.flush().map_err(io_err)?;
    }
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(io::Error::other)?;
        writeln!(w)
    })
}

struct Overrides {
    eps: Option<f64>,
    cells: Option<usize>,
    dt: Option<f64>,
}

fn load(path: &Path, o: &Overrides) -> Result<ProblemSpec<f64>, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut config = ProblemConfig::from_json(&text).map_err(ModelError::from)?;
    if let Some(e) = o.eps {
        config.epsilon = e;
    }
    if let Some(n) = o.cells {
        config.numerics.fv_cells = n;
    }
    if let Some(dt) = o.dt {
        config.numerics.dt = dt;
    }
    Ok(ProblemSpec::from_config(config)?)
}

fn checked(spec: &ProblemSpec<f64>, out: &Path) -> Result<(), CliError> {
    let report = validate(spec);
    write_json(&out.join("validation.json"), &report.to_json())?;
    if report.passed() {
        Ok(())
    } else {
        let names: Vec<&str> = report.failures().filter(|c| c.mandatory).map(|c| c.name).collect();
        Err(CliError::Validation(names.join(", ")))
    }
}

fn write_fields(path: &Path, e: &Expansion<f64>, times: &[f64]) -> Result<(), CliError> {
    let (lo, hi) = e.spec.numerics.fv_domain;
    let mut rows = Vec::with_capacity(times.len() * (FIELD_SAMPLES + 1));
    for &t in times {
        for i in 0..=FIELD_SAMPLES {
            let x = lo + (hi - lo) * i as f64 / FIELD_SAMPLES as f64;
            let (u0, v0) = e.eval_leading(x, t)?;
            let (u1, v1) = e.eval_first_order(x, t)?;
            rows.push((t, x, e.region_at(x, t).name(), [u0, v0, u1, v1]));
        }
    }
    write_atomic(path, |w| {
        writeln!(w, "t,x,region,u0,v0,u1,v1")?;
        for (t, x, region, vals) in &rows {
            write!(w, "{t:.16e},{x:.16e},{region}")?;
            for v in vals {
                write!(w, ",{v:.16e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    })
}

fn write_expansion(out: &Path, e: &Expansion<f64>) -> Result<(), CliError> {
    write_atomic(&out.join("shocks.csv"), |w| write_shock_csv(w, &e.first.minus, &e.first.plus))?;
    write_fields(&out.join("fields.csv"), e, &output_times(&e.spec))
}

fn write_track(path: &Path, track: &ShockTrack<f64>) -> Result<(), CliError> {
    write_atomic(path, |w| write_fronts_csv(w, &track.t, &track.minus, &track.plus))
}

fn execute(cli: &Cli) -> Result<Value, CliError> {
    let out = &cli.out;
    fs::create_dir_all(out).map_err(|source| CliError::Io {
        path: out.clone(),
        source,
    })?;
    let mut o = Overrides {
        eps: None,
        cells: None,
        dt: cli.dt,
    };
    match &cli.command {
        Command::Validate { config } => {
            let spec = load(config, &o)?;
            let report = validate(&spec);
            println!("{report}");
            write_json(&out.join("validation.json"), &report.to_json())?;
            if !report.passed() {
                let names: Vec<&str> = report.failures().filter(|c| c.mandatory).map(|c| c.name).collect();
                return Err(CliError::Validation(names.join(", ")));
            }
            Ok(Value::Null)
        }
        Command::Solve { config, eps } => {
            o.eps = *eps;
            let spec = load(config, &o)?;
            checked(&spec, out)?;
            let e = Expansion::build(&spec)?;
            write_expansion(out, &e)?;
            let last = e.first.minus.len() - 1;
            Ok(json!({
                "epsilon": spec.epsilon,
                "s1_minus_at_T": e.first.minus.s1[last],
                "s1_plus_at_T": e.first.plus.s1[last],
            }))
        }
        Command::Reference { config, eps, cells } => {
            (o.eps, o.cells) = (*eps, *cells);
            let spec = load(config, &o)?;
            checked(&spec, out)?;
            let times = output_times(&spec);
            let sol = run_reference(&spec, &times)?;
            for k in 0..sol.times.len() {
                write_atomic(&out.join(format!("snapshot_{k:03}.csv")), |w| sol.write_csv(w, k))?;
            }
            let track = ShockTrack::from_solution(&sol)?;
            write_track(&out.join("fronts.csv"), &track)?;
            Ok(json!({
                "cells": sol.cells,
                "steps": sol.steps,
                "max_courant": sol.max_courant,
                "budget_error": sol.budget_error,
            }))
        }
        Command::Compare {
            config,
            eps,
            cells,
            bound,
        } => {
            (o.eps, o.cells) = (Some(*eps), *cells);
            let spec = load(config, &o)?;
            checked(&spec, out)?;
            let e = Expansion::build(&spec)?;
            write_expansion(out, &e)?;
            let oracle = FiniteVolume {
                cells: spec.numerics.fv_cells,
            };
            let run = oracle.run(&spec, &output_times(&spec))?;
            write_track(&out.join("fronts.csv"), &run.track)?;
            let c: Comparison = compare(&e, &run, *eps, *bound);
            write_json(&out.join("compare.json"), &c)?;
            if !c.pass {
                return Err(CliError::Check(format!(
                    "shock errors {:.3e}, {:.3e} exceed the bound",
                    c.e_minus, c.e_plus
                )));
            }
            Ok(json!(c))
        }
        Command::Sweep {
            config,
            eps,
            cells,
            exact,
        } => {
            o.cells = *cells;
            let spec = load(config, &o)?;
            checked(&spec, out)?;
            let report = match exact.as_deref() {
                Some(&[d_minus, d_plus, rate]) => {
                    sweep(&spec, eps, &ExactDamped { d_minus, d_plus, rate }, cli.workers)?
                }
                Some(_) => return Err(CliError::Usage("--exact takes D_MINUS,D_PLUS,RATE".into())),
                None => {
                    let oracle = FiniteVolume {
                        cells: spec.numerics.fv_cells,
                    };
                    sweep(&spec, eps, &oracle, cli.workers)?
                }
            };
            write_json(&out.join("sweep.json"), &report)?;
            write_atomic(&out.join("sweep.csv"), |w| {
                writeln!(w, "epsilon,e_minus,e_plus,grid_error_estimate")?;
                for r in &report.rows {
                    writeln!(
                        w,
                        "{:.16e},{:.16e},{:.16e},{:.16e}",
                        r.epsilon, r.e_minus, r.e_plus, r.grid_error_estimate
                    )?;
                }
                Ok(())
            })?;
            if !report.pass {
                return Err(CliError::Check(format!("fitted slope {:?} outside the band", report.slope)));
            }
            Ok(json!({ "slope": report.slope }))
        }
    }
}

/// Parses `args`, runs the subcommand and returns the exit status.
pub fn run(args: impl IntoIterator<Item = impl Into<OsString> + Clone>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let started = Instant::now();
    let result = execute(&cli);
    let status = result.as_ref().map_or_else(CliError::exit_code, |_| EXIT_OK);
    match &result {
        Ok(Value::Null) => {}
        Ok(summary) => println!("{summary}"),
        Err(e) => eprintln!("error: {e}"),
    }
    let manifest = RunManifest {
        subcommand: cli.command.name(),
        config: cli.command.config().to_path_buf(),
        out: cli.out.clone(),
        overrides: json!({ "dt": cli.dt, "workers": cli.workers, "command": cli.command.overrides() }),
        exit_status: status,
        error: result.err().map(|e| e.to_string()),
        seconds: started.elapsed().as_secs_f64(),
    };
    if cli.out.is_dir() {
        if let Err(e) = write_json(&cli.out.join("manifest.json"), &manifest) {
            eprintln!("error: {e}");
        }
    }
    status
}
