//! Subcommands other than `run`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use llglab_core::cgl::{picard_iterate, CglConfig};
use llglab_core::field::{ComplexField, Grid, SpinField};
use llglab_core::lab::{decay_bump, generate_initial_data, generic_cgl_data, InitialDataSpec};
use llglab_core::llg::{solve, LlgConfig, Scheme};
use llglab_core::morrey::{morrey_norm, BallLattice, MorreyReport};
use llglab_core::semigroup::{log_spaced, verify_decay, DecayKind, SemigroupParams};
use llglab_core::snapshot::Snapshot;
use llglab_core::LabError;

use crate::config::{ConfigError, LabConfig};
use crate::runner;

/// Exit status for configuration and usage problems.
pub const EXIT_USAGE: i32 = 2;
/// Exit status when a check or solve fails.
pub const EXIT_FAIL: i32 = 1;

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 32)]
    pub n: usize,
    #[arg(long, default_value_t = 2.0 * PI)]
    pub length: f64,
}

impl GridArgs {
    fn grid(&self) -> Result<Grid, LabError> {
        Grid::new(self.dim, self.n, self.length)
    }
}

pub struct RunOutcome {
    pub summary: runner::Summary,
    pub out: PathBuf,
}

/// Loads a config, applies `LLGLAB_SEED`, and runs it. Output goes to `out`,
/// else the config's `output`, else `out/<config stem>`.
pub fn run_config(path: &Path, jobs: usize, out: Option<&Path>) -> Result<RunOutcome, ConfigError> {
    let mut cfg = LabConfig::load(path)?;
    if let Ok(seed) = std::env::var("LLGLAB_SEED") {
        cfg.seed = seed.trim().parse().map_err(|_| ConfigError(format!("LLGLAB_SEED = '{seed}' is not an unsigned integer")))?;
    }
    let out = match (out, &cfg.output) {
        (Some(o), _) => o.to_path_buf(),
        (None, Some(o)) => o.clone(),
        (None, None) => runner::default_output(path),
    };
    let summary = runner::run(&cfg, &out, jobs)?;
    Ok(RunOutcome { summary, out })
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum KindArg {
    Value,
    Gradient,
}

#[derive(Args, Debug, Clone)]
pub struct SemigroupArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long = "p-tilde", default_value_t = 2.0)]
    pub p_tilde: f64,
    #[arg(long, default_value_t = 2.0)]
    pub q: f64,
    #[arg(long, value_enum, default_value_t = KindArg::Value)]
    pub kind: KindArg,
    /// Width of the Gaussian test bump in grid cells.
    #[arg(long = "width-cells", default_value_t = 1.0)]
    pub width_cells: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub t0: f64,
    #[arg(long, default_value_t = 1e-1)]
    pub t1: f64,
    #[arg(long, default_value_t = 21)]
    pub samples: usize,
    #[arg(long = "c-max", default_value_t = 50.0)]
    pub c_max: f64,
    /// Snapshot whose pointwise magnitude replaces the bump.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

/// Returns the `t,norm,compensated_ratio` table and the verdict.
pub fn verify_semigroup(a: &SemigroupArgs) -> Result<(String, bool), LabError> {
    let (grid, f) = match &a.input {
        Some(path) => {
            let snap = Snapshot::load(path)?;
            let mag = snap.magnitude()?;
            (snap.grid()?, mag.to_complex())
        }
        None => {
            let g = a.grid.grid()?;
            let f = decay_bump(&g, a.width_cells);
            (g, f)
        }
    };
    let params = SemigroupParams::new(a.lambda, &grid)?;
    let kind = match a.kind {
        KindArg::Value => DecayKind::Value,
        KindArg::Gradient => DecayKind::Gradient,
    };
    let times = log_spaced(a.t0, a.t1, a.samples);
    let r = verify_decay(&f, a.p, a.p_tilde, a.q, &times, &params, kind, &BallLattice::standard(&grid), a.c_max)?;
    Ok((r.csv(), r.pass()))
}

#[derive(Args, Debug, Clone)]
pub struct CglArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = 3.2)]
    pub p: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long = "T", default_value_t = 0.5)]
    pub t_final: f64,
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long = "max-iter", default_value_t = 40)]
    pub max_iter: usize,
    /// `generic:<M22 norm>` or a snapshot of a complex tuple.
    #[arg(long, default_value = "generic:1e-3")]
    pub v0: String,
    /// Directory for `cgl_log.csv`, `xpt.csv` and the final state; the log is
    /// printed when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_v0(spec: &str, grid: &GridArgs) -> Result<Vec<ComplexField>, LabError> {
    match spec.strip_prefix("generic:") {
        Some(v) => {
            let m22: f64 = v.parse().map_err(|_| LabError::InvalidArgument(format!("bad M22 value '{v}'")))?;
            generic_cgl_data(&grid.grid()?, m22)
        }
        None => Snapshot::load(Path::new(spec))?.to_complex_tuple(),
    }
}

/// Solves and returns a printable report.
pub fn cgl_solve(a: &CglArgs) -> Result<String, LabError> {
    let v0 = parse_v0(&a.v0, &a.grid)?;
    let mut cfg = CglConfig::new(a.lambda, a.p, a.t_final, a.steps)?;
    cfg.picard_tol = a.tol;
    cfg.picard_max_iter = a.max_iter;
    cfg.log_xpt = true;
    let out = picard_iterate(&v0, &cfg)?;
    let mut report = String::new();
    match &a.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            runner::write_picard(dir, &out)?;
        }
        None => report.push_str(&out.log_csv()),
    }
    for w in &out.warnings {
        let _ = writeln!(report, "warning: {w}");
    }
    let _ = writeln!(
        report,
        "converged={} iterations={} residual={:.3e} R1={:.6e} R2={:.6e} R3={:.6e}",
        out.converged,
        out.log.len(),
        out.residual,
        out.xpt.r1,
        out.xpt.r2,
        out.xpt.r3
    );
    Ok(report)
}

#[derive(Args, Debug, Clone)]
pub struct LlgArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long = "T", default_value_t = 0.1)]
    pub t_final: f64,
    /// Defaults to a quarter of the stability cap.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, default_value = "rk4")]
    pub scheme: String,
    #[arg(long = "out-dir")]
    pub out_dir: PathBuf,
    #[arg(long = "snapshot-every", default_value_t = 10)]
    pub snapshot_every: usize,
    /// `constant`, `equatorial:<a>`, `bump:<a>` or `rough:<a>:<k>:<seed>`.
    #[arg(long, default_value = "equatorial:0.1")]
    pub init: String,
    /// Snapshot of the initial spin field; overrides `--init`.
    #[arg(long)]
    pub m0: Option<PathBuf>,
}

fn parse_init(spec: &str) -> Result<InitialDataSpec, LabError> {
    let bad = || LabError::InvalidArgument(format!("cannot parse initial data '{spec}'"));
    let num = |s: Option<&str>| -> Result<f64, LabError> { s.ok_or_else(bad)?.parse().map_err(|_| bad()) };
    let mut parts = spec.split(':');
    let e3 = [0.0, 0.0, 1.0];
    Ok(match parts.next() {
        Some("constant") => InitialDataSpec::Constant { m_inf: e3 },
        Some("equatorial") => InitialDataSpec::EquatorialWave { amplitude: num(parts.next())?, wavenumber: 1.0 },
        Some("bump") => InitialDataSpec::BumpChart { m_inf: e3, amplitude: num(parts.next())?, width: 0.5 },
        Some("rough") => {
            let amplitude = num(parts.next())?;
            let k = num(parts.next())?;
            let seed = num(parts.next())? as u64;
            InitialDataSpec::RoughMollified { m_inf: e3, amplitude, k, seed }
        }
        _ => return Err(bad()),
    })
}

pub fn llg_run(a: &LlgArgs) -> Result<String, LabError> {
    let m0: SpinField = match &a.m0 {
        Some(p) => Snapshot::load(p)?.to_spin()?,
        None => generate_initial_data(&parse_init(&a.init)?, &a.grid.grid()?)?,
    };
    let grid = m0.grid().clone();
    let scheme: Scheme = a.scheme.parse()?;
    let mut cfg = match a.dt {
        Some(dt) => LlgConfig::new(&grid, a.lambda, a.t_final, dt, scheme)?,
        None => LlgConfig::at_cap_fraction(&grid, a.lambda, a.t_final, 4.0, scheme)?,
    };
    cfg.output_every = a.snapshot_every;
    cfg.validate(&grid)?;
    let (traj, ledger) = solve(&m0, &cfg)?;
    fs::create_dir_all(&a.out_dir)?;
    fs::write(a.out_dir.join("ledger.csv"), ledger.csv())?;
    for (i, (_, m)) in traj.iter().enumerate() {
        Snapshot::from_spin(m).save(&a.out_dir.join(format!("snap_{i:05}.llgf")))?;
    }
    let e = &ledger.energies;
    Ok(format!("steps={} snapshots={} E0={:.9e} E(T)={:.9e}\n", cfg.steps().0, traj.len(), e[0], e[e.len() - 1]))
}

#[derive(Args, Debug, Clone)]
pub struct MorreyArgs {
    /// Snapshot; its pointwise magnitude is measured.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 2.0)]
    pub q: f64,
    /// Center stride; defaults to the standard lattice for the grid.
    #[arg(long)]
    pub stride: Option<usize>,
}

pub fn morrey(a: &MorreyArgs) -> Result<String, LabError> {
    let snap = Snapshot::load(&a.input)?;
    let grid = snap.grid()?;
    let lattice = match a.stride {
        Some(s) => BallLattice::new(&grid, s, None)?,
        None => BallLattice::standard(&grid),
    };
    let r = morrey_norm(&snap.magnitude()?, a.p, a.q, &lattice)?;
    Ok(format!("{}\n{}\n", MorreyReport::csv_header(grid.dim()), r.csv_row()))
}
