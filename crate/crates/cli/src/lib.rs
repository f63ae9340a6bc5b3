//! The `lgf` command line: tabulation, single-point probes, timing comparisons and the
//! two applications, all emitting CSV (or JSON) with `# key=value` metadata.

pub mod table_file;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lgf_core::apps::periodic3d::convergence_study;
use lgf_core::apps::randomwalk::{kappa_rw, mc_simulate, return_probability, WalkParams};
use lgf_core::bench::{run_bench, BenchSpec};
use lgf_core::quad1d::check_delta;
use lgf_core::{
    evaluate_with, tabulate_with, DispatchOptions, LatticeConfig, LatticePoint, LgfError, Method, MethodChoice,
    RowOptions, Tolerance,
};

use table_file::{format_float, Cell, Document, Format, LgfTableFile};

pub const TOOL: &str = concat!("lgf ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Unattainable(String),
    #[error("{0}")]
    Divergence(String),
    #[error("{0}")]
    Format(String),
    #[error("{0}")]
    Compute(LgfError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl From<LgfError> for CliError {
    fn from(e: LgfError) -> Self {
        match e {
            LgfError::ToleranceTooSmall(_) => CliError::Unattainable(e.to_string()),
            LgfError::InvalidAnisotropy(_)
            | LgfError::NotScreened(_)
            | LgfError::InvalidParameter(_)
            | LgfError::InvalidWalk(_) => CliError::Usage(e.to_string()),
            other => CliError::Compute(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Unattainable(_) => 3,
            CliError::Divergence(_) => 4,
            CliError::Format(_) | CliError::Compute(_) | CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "lgf", version, about = "Lattice Green's functions of the screened anisotropic 2D Laplacian")]
pub struct Cli {
    /// Worker threads for the parallel kernels.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    /// Write to this file instead of standard output.
    #[arg(short = 'o', long = "output", global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Table of B_c(n, m) on [0, L] x [0, M].
    Tabulate {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long = "L")]
        l: usize,
        #[arg(long = "M")]
        m: usize,
    },
    /// One value B_c(n, m) with its certificate.
    Probe {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
        #[arg(long, allow_hyphen_values = true)]
        m: i64,
    },
    /// Median timings of every evaluator over [0, L] x [0, M], relative to the heat-kernel oracle.
    Bench {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long = "L", default_value_t = 99)]
        l: usize,
        #[arg(long = "M", default_value_t = 99)]
        m: usize,
        /// Timed runs after one discarded warmup.
        #[arg(long, default_value_t = 5)]
        runs: usize,
        /// Heat-kernel integration cut; defaults to where its tail bound is eps/2.
        #[arg(long)]
        t_max: Option<f64>,
    },
    /// Convergence study of the periodic 3D Poisson solver.
    App3d {
        /// dx2/dx1 for each refinement series.
        #[arg(long, value_delimiter = ',', default_values_t = [2.0, 4.0])]
        aspect: Vec<f64>,
        /// Points per period along the third axis, one level each.
        #[arg(long, value_delimiter = ',', default_values_t = [8, 16, 32, 64])]
        periods: Vec<usize>,
        #[arg(long, default_value_t = 1e-10)]
        eps: f64,
    },
    /// Return probabilities of the walk with killing along lattice rays.
    Walk {
        #[command(flatten)]
        params: WalkArgs,
        #[arg(long, value_enum, default_value_t = Ray::Both)]
        ray: Ray,
        /// Largest ray index.
        #[arg(long, default_value_t = 20)]
        max: usize,
        #[arg(long, default_value_t = 1e-12)]
        eps: f64,
        /// Monte Carlo trials per point; 0 skips the simulation columns.
        #[arg(long, default_value_t = 0)]
        mc_trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
pub struct LatticeArgs {
    #[arg(long, default_value_t = 1.0)]
    pub alpha1: f64,
    #[command(flatten)]
    pub screening: Screening,
    #[arg(long, default_value_t = 1e-10)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Screening {
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub c2: Option<f64>,
}

#[derive(Debug, Args)]
pub struct WalkArgs {
    #[arg(long, requires = "p2", conflicts_with = "pk")]
    pub p1: Option<f64>,
    #[arg(long, requires = "p1", conflicts_with = "pk")]
    pub p2: Option<f64>,
    /// Killing probability of the family p1 = 0.2(1 - pk), p2 = 0.3(1 - pk).
    #[arg(long)]
    pub pk: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Ray {
    Axis,
    Diagonal,
    Both,
}

struct Lattice {
    cfg: LatticeConfig,
    tol: Tolerance,
    opts: DispatchOptions,
}

impl LatticeArgs {
    fn resolve(&self) -> Result<Lattice, CliError> {
        let c2 = match (self.screening.c, self.screening.c2) {
            (Some(c), None) => c * c,
            (None, Some(c2)) => c2,
            _ => return Err(CliError::Usage("give exactly one of --c and --c2".into())),
        };
        let cfg = LatticeConfig::new(self.alpha1, c2)?;
        let tol = Tolerance::new(self.eps)?;
        check_delta(self.delta)?;
        let opts = DispatchOptions {
            row: RowOptions {
                delta: self.delta,
                ..RowOptions::default()
            },
            ..DispatchOptions::default()
        };
        Ok(Lattice { cfg, tol, opts })
    }
}

fn lattice_metadata(lat: &Lattice, choice: &MethodChoice) -> Vec<(String, String)> {
    let resolution_key = match choice.method {
        Method::Series => "terms_used",
        Method::Quad1D | Method::FftBatch => "n_pts_used",
    };
    [
        ("tool", TOOL.to_string()),
        ("alpha1", format_float(lat.cfg.alpha1())),
        ("c2", format_float(lat.cfg.c2())),
        ("eps", format_float(lat.tol.eps())),
        ("delta", format_float(lat.opts.row.delta)),
        ("method", choice.method.to_string()),
        ("bound", choice.method.bound_name().to_string()),
        ("certificate", format_float(choice.certificate)),
        (resolution_key, choice.resolution.to_string()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

fn tabulate(lattice: &LatticeArgs, l: usize, m: usize) -> Result<Document, CliError> {
    let lat = lattice.resolve()?;
    let table = tabulate_with(&lat.cfg, lat.tol, l, m, &lat.opts)?;
    let entries = table
        .rows()
        .iter()
        .enumerate()
        .flat_map(|(mi, row)| row.iter().enumerate().map(move |(ni, &v)| (ni as i64, mi as i64, v)))
        .collect();
    let file = LgfTableFile {
        metadata: lattice_metadata(&lat, &table.method),
        entries,
    };
    Ok(file.to_document())
}

fn probe(lattice: &LatticeArgs, n: i64, m: i64) -> Result<Document, CliError> {
    let lat = lattice.resolve()?;
    let eval = evaluate_with(&lat.cfg, LatticePoint::new(n, m), lat.tol, &lat.opts);
    let file = LgfTableFile {
        metadata: lattice_metadata(&lat, &eval.choice),
        entries: vec![(n, m, eval.value)],
    };
    Ok(file.to_document())
}

/// The report and whether the heat-kernel oracle was flagged.
fn bench(lattice: &LatticeArgs, l: usize, m: usize, runs: usize, t_max: Option<f64>) -> Result<(Document, bool), CliError> {
    let lat = lattice.resolve()?;
    if t_max.is_some_and(|t| !(t > 0.0 && t.is_finite())) {
        return Err(CliError::Usage("--t-max must be positive and finite".into()));
    }
    let mut spec = BenchSpec::new(lat.cfg, l, m, lat.tol);
    spec.runs = runs.max(1);
    spec.t_max = t_max;
    let report = run_bench(&spec)?;
    let mut doc = Document::new(&["method", "median_seconds", "speedup", "max_error", "flagged"]);
    doc.meta("tool", TOOL)
        .meta("alpha1", format_float(report.alpha1))
        .meta("c2", format_float(report.c2))
        .meta("eps", format_float(report.eps))
        .meta("L", l)
        .meta("M", m)
        .meta("runs", spec.runs)
        .meta("t_max", format_float(report.t_max))
        .meta("bessel_tail_bound", format_float(report.bessel_tail_bound));
    for t in &report.timings {
        doc.push(vec![
            Cell::Text(t.method.clone()),
            Cell::Float(t.median_seconds),
            Cell::Float(t.speedup),
            Cell::Float(t.max_error),
            Cell::Bool(t.flagged),
        ]);
    }
    Ok((doc, report.bessel_diverged()))
}

fn app3d(aspects: &[f64], periods: &[usize], eps: f64) -> Result<Document, CliError> {
    let tol = Tolerance::new(eps)?;
    if periods.is_empty() || aspects.is_empty() {
        return Err(CliError::Usage("--aspect and --periods need at least one value".into()));
    }
    let mut doc = Document::new(&["aspect", "n_p", "dx1", "dx2", "dx3", "n1", "n2", "n3", "max_error"]);
    doc.meta("tool", TOOL).meta("eps", format_float(eps));
    let mut rows = Vec::new();
    for &aspect in aspects {
        if !(aspect > 0.0 && aspect.is_finite()) {
            return Err(CliError::Usage(format!("aspect ratio must be positive, got {aspect}")));
        }
        let study = convergence_study(aspect, periods, tol)?;
        doc.meta(&format!("slope_aspect_{}", format_float(aspect)), format_float(study.slope));
        for level in &study.levels {
            rows.push(vec![
                Cell::Float(aspect),
                Cell::Int(level.n_p as i64),
                Cell::Float(level.dx[0]),
                Cell::Float(level.dx[1]),
                Cell::Float(level.dx[2]),
                Cell::Int(level.dims[0] as i64),
                Cell::Int(level.dims[1] as i64),
                Cell::Int(level.dims[2] as i64),
                Cell::Float(level.max_error),
            ]);
        }
    }
    rows.into_iter().for_each(|r| doc.push(r));
    Ok(doc)
}

fn walk(params: &WalkArgs, ray: Ray, max: usize, eps: f64, trials: u64, seed: u64) -> Result<Document, CliError> {
    let w = match (params.p1, params.p2, params.pk) {
        (Some(p1), Some(p2), None) => WalkParams::new(p1, p2)?,
        (None, None, Some(pk)) => WalkParams::family(pk)?,
        _ => return Err(CliError::Usage("give --p1 and --p2, or --pk".into())),
    };
    let tol = Tolerance::new(eps)?;
    let mut rays: Vec<(&str, LatticePoint)> = Vec::new();
    for k in 0..=max as i64 {
        if matches!(ray, Ray::Axis | Ray::Both) {
            rays.push(("axis", LatticePoint::new(k, 0)));
        }
        if matches!(ray, Ray::Diagonal | Ray::Both) {
            rays.push(("diagonal", LatticePoint::new(k, k)));
        }
    }
    rays.sort_by_key(|&(name, _)| name == "diagonal");
    let points: Vec<LatticePoint> = rays.iter().map(|&(_, p)| p).collect();
    let rho = return_probability(&w, &points, tol)?;

    let mut columns = vec!["ray", "n", "m", "rho"];
    if trials > 0 {
        columns.extend(["mc", "mc_se"]);
    }
    let mut doc = Document::new(&columns);
    doc.meta("tool", TOOL)
        .meta("p1", format_float(w.p1()))
        .meta("p2", format_float(w.p2()))
        .meta("pk", format_float(w.pk()))
        .meta("kappa", format_float(kappa_rw(&w)))
        .meta("eps", format_float(eps));
    if trials > 0 {
        doc.meta("mc_trials", trials).meta("seed", seed);
    }
    for (i, (&(name, p), &(_, r))) in rays.iter().zip(&rho).enumerate() {
        let mut row = vec![Cell::Text(name.into()), Cell::Int(p.n), Cell::Int(p.m), Cell::Float(r)];
        if trials > 0 {
            let (est, se) = mc_simulate(&w, p, trials, seed.wrapping_add(i as u64));
            row.extend([Cell::Float(est), Cell::Float(se)]);
        }
        doc.push(row);
    }
    Ok(doc)
}

/// Runs one invocation, writing its output before reporting a flagged benchmark.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // Only the first pool in a process takes effect.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let mut diverged = false;
    let doc = match &cli.command {
        Command::Tabulate { lattice, l, m } => tabulate(lattice, *l, *m)?,
        Command::Probe { lattice, n, m } => probe(lattice, *n, *m)?,
        Command::Bench { lattice, l, m, runs, t_max } => {
            let (doc, flagged) = bench(lattice, *l, *m, *runs, *t_max)?;
            diverged = flagged;
            doc
        }
        Command::App3d { aspect, periods, eps } => app3d(aspect, periods, *eps)?,
        Command::Walk { params, ray, max, eps, mc_trials, seed } => {
            walk(params, *ray, *max, *eps, *mc_trials, *seed)?
        }
    };
    let text = doc.render(cli.format.into());
    match &cli.output {
        Some(path) => std::fs::write(path, text)?,
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            // A reader that stops early (`| head`) is not a failure.
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
            other => other?,
        },
    }
    if diverged {
        return Err(CliError::Divergence(
            "heat-kernel oracle did not converge: its tail bound exceeds eps".into(),
        ));
    }
    Ok(())
}
