//! Executes the experiments declared in a [`LabConfig`], one output directory
//! per experiment plus a `summary.csv`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use llglab_core::cgl::{coulomb_divergence_residual, exponent_window_check, picard_iterate, stability_experiment, PicardOutcome};
use llglab_core::field::{divergence, ComplexField, Grid, SpinField};
use llglab_core::frame::{build_frame, check_identities, coulomb_gauge_fix, derive_gauge, IdentityResiduals};
use llglab_core::lab::{
    decay_report, decay_suite, generate_initial_data, generic_cgl_data, h1_approach, mollify_and_project, refinement_study, rough_raw_field,
    uniqueness_experiment, CrossValidationConfig, Verdict,
};
use llglab_core::llg::{check_energy_inequality, check_equivalent_form, gradient_norm, llg_rhs, solve, EnergyLedger};
use llglab_core::morrey::{morrey_norm, BallLattice, MorreyReport};
use llglab_core::snapshot::Snapshot;
use llglab_core::LabError;

use crate::config::{CglData, ConfigError, Experiment, LabConfig};

/// Identity residual bound on smooth data.
pub const IDENTITY_TOL: f64 = 1e-8;
/// Bound on `div a` after Coulomb fixing.
pub const DIV_TOL: f64 = 1e-10;
/// Cross-solver discrepancy bound.
pub const CROSS_TOL: f64 = 1e-3;
/// Required improvement of the discrepancy under refinement.
pub const REFINEMENT_RATIO: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
    Error,
}

impl Status {
    fn of(ok: bool) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Inconclusive => "INCONCLUSIVE",
            Status::Error => "ERROR",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub experiment: &'static str,
    pub name: String,
    pub value: f64,
    /// Human-readable bound, e.g. `<= 1e-8`.
    pub bound: String,
    pub status: Status,
    pub note: String,
}

impl Check {
    fn new(experiment: Experiment, name: impl Into<String>, value: f64, bound: impl Into<String>, status: Status) -> Check {
        Check { experiment: experiment.name(), name: name.into(), value, bound: bound.into(), status, note: String::new() }
    }

    fn at_most(experiment: Experiment, name: impl Into<String>, value: f64, tol: f64) -> Check {
        Check::new(experiment, name, value, format!("<= {tol:e}"), Status::of(value <= tol))
    }

    fn at_least(experiment: Experiment, name: impl Into<String>, value: f64, tol: f64) -> Check {
        Check::new(experiment, name, value, format!(">= {tol:e}"), Status::of(value >= tol))
    }

    fn error(experiment: Experiment, e: &LabError) -> Check {
        let mut c = Check::new(experiment, "run", f64::NAN, "-", Status::Error);
        c.note = e.to_string();
        c
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Summary {
    pub checks: Vec<Check>,
}

impl Summary {
    pub const CSV_HEADER: &'static str = "experiment,check,value,bound,status,note";

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status == Status::Pass)
    }

    pub fn csv(&self) -> String {
        let mut s = format!("{}\n", Self::CSV_HEADER);
        for c in &self.checks {
            let note = c.note.replace([',', '\n'], ";");
            let _ = writeln!(s, "{},{},{:.9e},{},{},{}", c.experiment, c.name, c.value, c.bound, c.status.label(), note);
        }
        s
    }
}

/// Everything an experiment needs, built once before any output is written.
struct Prepared {
    cfg: LabConfig,
    grid: Grid,
    m0: SpinField,
}

fn prepare(cfg: &LabConfig) -> Result<Prepared, ConfigError> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let m0 = match &cfg.initial.snapshot {
        Some(path) => {
            let snap = Snapshot::load(path).map_err(|e| ConfigError(format!("initial.snapshot {}: {e}", path.display())))?;
            let m = snap.to_spin().map_err(|e| ConfigError(format!("initial.snapshot: {e}")))?;
            if m.grid() != &grid {
                return Err(ConfigError("initial.snapshot: grid differs from [grid]".into()));
            }
            m
        }
        None => generate_initial_data(&cfg.initial.spec(cfg.seed), &grid).map_err(|e| ConfigError(format!("initial: {e}")))?,
    };
    Ok(Prepared { cfg: cfg.clone(), grid, m0 })
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), LabError> {
    fs::write(dir.join(name), contents)?;
    Ok(())
}

/// Runs every declared experiment, writing into `out`. Configuration problems
/// are reported before `out` is touched; solver errors become `ERROR` rows.
pub fn run(cfg: &LabConfig, out: &Path, jobs: usize) -> Result<Summary, ConfigError> {
    let prep = prepare(cfg)?;
    fs::create_dir_all(out).map_err(|e| ConfigError(format!("{}: {e}", out.display())))?;
    let list = &prep.cfg.experiments.run;
    let slots: Vec<Mutex<Option<Vec<Check>>>> = list.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = jobs.clamp(1, list.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= list.len() {
                    break;
                }
                let dir = out.join(list[i].name());
                let checks = match fs::create_dir_all(&dir).map_err(LabError::from).and_then(|_| run_one(&prep, list[i], &dir)) {
                    Ok(c) => c,
                    Err(e) => vec![Check::error(list[i], &e)],
                };
                *slots[i].lock().unwrap() = Some(checks);
            });
        }
    });
    let mut summary = Summary::default();
    for slot in slots {
        summary.checks.extend(slot.into_inner().unwrap().unwrap_or_default());
    }
    fs::write(out.join("summary.csv"), summary.csv()).map_err(|e| ConfigError(format!("summary: {e}")))?;
    Ok(summary)
}

fn run_one(p: &Prepared, e: Experiment, dir: &Path) -> Result<Vec<Check>, LabError> {
    match e {
        Experiment::Identities => identities(p, dir),
        Experiment::Energy => energy(p, dir),
        Experiment::Decay => decay(p, dir),
        Experiment::Semigroup => semigroup(p, dir),
        Experiment::Cgl => cgl(p, dir),
        Experiment::Window => window(p, dir),
        Experiment::Mollify => mollify(p, dir),
        Experiment::CrossValidation => cross_validation(p, dir),
        Experiment::Uniqueness => uniqueness(p, dir),
        Experiment::Stability => stability(p, dir),
        Experiment::Morrey => morrey(p, dir),
    }
}

fn lambda_of(p: &Prepared) -> f64 {
    p.cfg.llg.as_ref().map(|l| l.lambda).or(p.cfg.cgl.as_ref().map(|c| c.lambda)).unwrap_or(1.0)
}

/// Identity residuals of `m` with `∂_t m` from the LLG right-hand side, in
/// the Coulomb gauge; also the equivalent-form residual and `div a`.
pub fn identity_residuals(m: &SpinField, lambda: f64) -> Result<(IdentityResiduals, f64, f64), LabError> {
    let frame = build_frame(m)?;
    let dt_m = llg_rhs(m, lambda);
    let state = derive_gauge(m, &dt_m, &frame, None)?;
    let fixed = coulomb_gauge_fix(&state)?;
    let rotated = frame.rotate(&fixed.theta);
    let res = check_identities(m, &rotated, &fixed, lambda)?;
    let equivalent = check_equivalent_form(m, &dt_m, lambda);
    let div = divergence(&fixed.a)?.sup_norm();
    Ok((res, equivalent, div))
}

fn identities(p: &Prepared, dir: &Path) -> Result<Vec<Check>, LabError> {
    let e = Experiment::Identities;
    let (res, equivalent, div) = identity_residuals(&p.m0, lambda_of(p))?;
    write(dir, "residuals.csv", &format!("{}\n{}\n", IdentityResiduals::CSV_HEADER, res.csv_row()))?;
    write(dir, "gauge.csv", &format!("equivalent_form,div_a\n{equivalent:.17e},{div:.17e}\n"))?;
    Ok(vec![
        Check::at_most(e, "torsion", res.torsion, IDENTITY_TOL),
        Check::at_most(e, "curvature", res.curvature, IDENTITY_TOL),
        Check::at_most(e, "u0_eq", res.u0_eq, IDENTITY_TOL),
        Check::at_most(e, "tension", res.tension, IDENTITY_TOL),
        Check::at_most(e, "equivalent_form", equivalent, IDENTITY_TOL),
        Check::at_most(e, "div_a", div, DIV_TOL),
    ])
}

fn llg_run(p: &Prepared) -> Result<(llglab_core::trajectory::Trajectory<SpinField>, EnergyLedger), LabError> {
    let section = p.cfg.llg.as_ref().expect("validated");
    let cfg = section.build(&p.grid).map_err(|e| LabError::InvalidArgument(e.0))?;
    solve(&p.m0, &cfg)
}

fn energy(p: &Prepared, dir: &Path) -> Result<Vec<Check>, LabError> {
    let e = Experiment::Energy;
    let lambda = p.cfg.llg.as_ref().expect("validated").lambda;
    let (traj, ledger) = llg_run(p)?;
    write(dir, "ledger.csv", &ledger.csv())?;
    if let Some((_, m)) = traj.last() {
        Snapshot::from_spin(m).save(&dir.join("final.llgf"))?;
    }
    let check = check_energy_inequality(&ledger, lambda)?;
    let mut gap = Check::new(e, "energy_balance", check.worst_equality_gap, format!("<= {:e}", check.tolerance), Status::of(check.equality_holds()));
    gap.note = format!("E0 = {:.9e}", ledger.energies[0]);
    Ok(vec![
        gap,
        Check::new(e, "energy_inequality", check.worst_violation, format!("<= {:e}", check.tolerance), Status::of(check.inequality_holds())),
        Check::new(e, "energy_monotone", check.worst_energy_increase, format!("<= {:e}", check.tolerance), Status::of(check.monotone())),
    ])
}

fn decay(p: &Prepared, dir: &Path) -> Result<Vec<Check>, LabError> {
    let e = Experiment::Decay;
    let (traj, ledger) = llg_run(p)?;
    let d = decay_report(&ledger);
    write(dir, "decay.csv", &d.csv())?;
    let mut h1 = String::from("t,h1_distance\n");
    for (t, v) in h1_approach(&traj) {
        let _ = writeln!(h1, "{t:.17e},{v:.17e}");
    }
    write(dir, "h1_approach.csv", &h1)?;
    Ok(vec![
        Check::new(e, "grad_compensated_bounded", d.max_grad, "second half <= 2x first half", Status::of(d.grad_bounded)),
        Check::new(e, "hess_compensated_bounded", d.max_hess, "second half <= 2x first half", Status::of(d.hess_bounded)),
    ])
}

fn semigroup(p: &Prepared, dir: &Path) -> Result<Vec<Check>, LabError> {
    let e = Experiment::Semigroup;
    let s = &p.cfg.semigroup;
    let reports = decay_suite(&p.grid, s.lambda, &s.widths, s.t0, s.t1, s.samples, s.c_max)?;
    let mut checks = Vec::new();
    for (w, r) in reports {
        let kind = match r.kind {
            llglab_core::semigroup::DecayKind::Value => "value",
            llglab_core::semigroup::DecayKind::Gradient => "gradient",
        };
        let tag = format!("{kind}_p{}_pt{}_w{w}", r.p, r.p_tilde);
        write(dir, &format!("{tag}.csv"), &r.csv())?;
        let mut c = Check::new(e, tag, r.max_ratio, format!("<= {} and final decade non-increasing", r.c_max), Status::of(r.pass()));
        if !r.non_increasing_final_decade() {
            c.note = "final decade increases".into();
        }
        checks.push(c);
    }
    Ok(checks)
}

fn cgl_data(p: &Prepared) -> Result<Vec<ComplexField>, LabError> {
    let c = p.cfg.cgl.as_ref().expect("validated");
    match c.data {
        CglData::FromInitial => llglab_core::frame::coulomb_u(&p.m0),
        CglData::Generic => generic_cgl_data(&p.grid, c.m22),
    }
}

/// Writes the Picard log, the final `X^p_T` components and the last state.
pub fn write_picard(dir: &Path, out: &PicardOutcome) -> Result<(), LabError> {
    write(dir, "cgl_log.csv", &out.log_csv())?;
    let x = &out.xpt;
    write(
        dir,
        "xpt.csv",
        &format!(
            "p,T,R1,R2,R3,total,residual,v0_m22,smallness_ratio,converged\n{},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{}\n",
            x.p,
            x.t_final,
            x.r1,
            x.r2,
            x.r3,
            x.total,
            out.residual,
            out.v0_m22,
            out.smallness_ratio(),
            out.converged
        ),
    )?;
    if let Some((_, u)) = out.trajectory.last() {
        Snapshot::from_complex_tuple(u)?.save(&dir.join("u_final.llgf"))?;
    }
    Ok(())
}

fn cgl(p: &Prepared, dir: &Path) -> Result<Vec<Check>, LabError> {
    let e = Experiment::Cgl;
    let section = p.cfg.cgl.as_ref().expect("validated");
    let cfg = section.build().map_err(|e| LabError::InvalidArgument(e.0))?;
    let out = match picard_iterate(&cgl_data(p)?, &cfg) {
        Ok(o) => o,
        Err(err @ LabError::NonContraction { .. }) => {
            let mut c = Check::new(e, "contraction", f64::NAN, "converges", Status::Fail);
            c.note = err.to_string();
            return Ok(vec![c]);
        }
        Err(err) => return Err(err),
    };
    write_picard(dir, &out)?;
    let div = coulomb_divergence_residual(&out.trajectory, cfg.lambda)?;
    let mut conv = Check::new(e, "converged", out.log.len() as f64, format!("< {} iterations", cfg.picard_max_iter), Status::of(out.converged));
    conv.note = out.warnings.join("; ");
    Ok(vec![conv, Check::at_most(e, "fixed_point_residual", out.residual, 10.0 * cfg.picard_tol), Check::at_most(e, "div_a", div, DIV_TOL)])
}

/// `count` midpoints of equal cells covering `(lo, hi)`.
pub fn scan_points(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / count as f64).collect()
}

fn window(p: &Prepared, dir: &Path) -> Result<Vec<Check>, LabError> {
    let e = Experiment::Window;
    let w = &p.cfg.window;
    let mut csv = String::from("p,valid,first_failure,delta1,delta2\n");
    let mut mismatches = 0usize;
    let points = scan_points(w.p_min, w.p_max, w.samples);
    for &pv in points.iter().chain([3.0, 10.0 / 3.0].iter()) {
        let r = exponent_window_check(pv);
        let expected = pv > 3.0 && pv < 10.0 / 3.0;
        if r.valid() != expected {
            mismatches += 1;
        }
        match r.first_failure() {
            Some(f) => {
                let _ = writeln!(csv, "{pv:.17e},false,{}/{},{:.17e},{:.17e}", f.term, f.target, f.delta1, f.delta2);
            }
            None => {
                let _ = writeln!(csv, "{pv:.17e},true,,,");
            }
        }
    }
    write(dir, "window.csv", &csv)?;
    let tag = |pv: f64| exponent_window_check(pv).first_failure().map(|f| format!("{}/{}", f.term, f.target)).unwrap_or_default();
    let at3 = tag(3.0);
    let at_top = tag(10.0 / 3.0);
    let mut c3 = Check::new(e, "failing_pair_at_3", 3.0, "f1/R2", Status::of(at3 == "f1/R2"));
    c3.note = at3;
    let mut ct = Check::new(e, "failing_pair_at_10_3", 10.0 / 3.0, "f3/R1", Status::of(at_top == "f3/R1"));
    ct.note = at_top;
    Ok(vec![Check::at_most(e, "scan_mismatches", mismatches as f64, 0.0), c3, ct])
}

fn mollify(p: &Prepared, dir: &Path) -> Result<Vec<Check>, LabError> {
    let e = Experiment::Mollify;
    let m = &p.cfg.mollify;
    let raw = rough_raw_field(&p.grid, p.cfg.initial.m_infinity, m.amplitude, p.cfg.seed)?;
    let mut csv = String::from("k,raw_grad_m22,mollified_grad_m22,ratio,min_norm,max_norm\n");
    let mut checks = Vec::new();
    for &k in &m.ks {
        match mollify_and_project(&raw, k) {
            Ok((_, r)) => {
                let _ = writeln!(csv, "{k},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}", r.raw_grad_m22, r.mollified_grad_m22, r.ratio, r.min_norm, r.max_norm);
                checks.push(Check::at_most(e, format!("ratio_k{k}"), r.ratio, m.max_ratio));
                let in_shell = r.min_norm >= 0.75 && r.max_norm <= 1.0 + 1e-12;
                checks.push(Check::new(e, format!("shell_k{k}"), r.min_norm, "3/4 <= |m| <= 1", Status::of(in_shell)));
            }
            Err(err) => {
                let mut c = Check::new(e, format!("shell_k{k}"), f64::NAN, "3/4 <= |m| <= 1", Status::Fail);
                c.note = err.to_string();
                checks.push(c);
            }
        }
    }
    write(dir, "mollify.csv", &csv)?;
    Ok(checks)
}

fn cross_config(p: &Prepared) -> (f64, f64, CrossValidationConfig) {
    let c = p.cfg.cgl.as_ref().expect("validated");
    let mut x = CrossValidationConfig::for_grid(&p.grid, c.lambda, c.t_final, c.time_steps);
    x.picard_tol = c.tol;
    x.duhamel_substeps = c.substeps;
    x.p = c.p;
    (c.lambda, c.t_final, x)
}

fn cross_validation(p: &Prepared, dir: &Path) -> Result<Vec<Check>, LabError> {
    let e = Experiment::CrossValidation;
    let (lambda, t, x) = cross_config(p);
    let study = refinement_study(&p.m0, lambda, t, &x)?;
    write(dir, "discrepancy.csv", &study.coarse.csv())?;
    write(dir, "discrepancy_refined.csv", &study.fine.csv())?;
    Ok(vec![Check::at_most(e, "relative_discrepancy", study.coarse.max, CROSS_TOL), Check::at_least(e, "refinement_ratio", study.ratio(), REFINEMENT_RATIO)])
}

fn uniqueness(p: &Prepared, dir: &Path) -> Result<Vec<Check>, LabError> {
    let e = Experiment::Uniqueness;
    let section = p.cfg.llg.as_ref().expect("validated");
    let first = section.build(&p.grid).map_err(|e| LabError::InvalidArgument(e.0))?;
    let mut second = first.clone();
    second.dt = first.dt / 2.0;
    second.output_every = 2 * first.output_every;
    let eps0 = p.cfg.cgl.as_ref().map(|c| c.eps0).unwrap_or(llglab_core::cgl::DEFAULT_EPS0);
    let rec = uniqueness_experiment(&p.m0, &first, &second, 5, eps0)?;
    write(dir, "gronwall.csv", &rec.csv())?;
    let status = match rec.verdict {
        Verdict::Pass => Status::Pass,
        Verdict::Fail => Status::Fail,
        Verdict::Inconclusive => Status::Inconclusive,
    };
    let last = rec.difference.last().copied().unwrap_or(0.0);
    let mut c = Check::new(e, "compensated_difference_nonincreasing", last, "non-increasing after 5 samples", status);
    c.note = "numerical consistency proxy: two discretizations of one solve".into();
    Ok(vec![c])
}

fn stability(p: &Prepared, dir: &Path) -> Result<Vec<Check>, LabError> {
    let e = Experiment::Stability;
    let section = p.cfg.cgl.as_ref().expect("validated");
    let cfg = section.build().map_err(|e| LabError::InvalidArgument(e.0))?;
    let v0 = generic_cgl_data(&p.grid, section.m22)?;
    let perturbation = perturbation(&p.grid);
    let rec = stability_experiment(&v0, &perturbation, &p.cfg.stability.deltas, &cfg)?;
    let mut csv = String::from("delta,ratio\n");
    for (d, r) in rec.deltas.iter().zip(&rec.ratios) {
        let _ = writeln!(csv, "{d:.17e},{r:.17e}");
    }
    write(dir, "stability.csv", &csv)?;
    Ok(vec![Check::at_most(e, "ratio_spread", rec.spread(), p.cfg.stability.max_spread)])
}

/// `e^{2ix} ê_1`.
pub fn perturbation(grid: &Grid) -> Vec<ComplexField> {
    let mut v = vec![grid.sample_complex(|x| num_complex::Complex64::new(0.0, 2.0 * x[0]).exp())];
    v.extend((1..grid.dim()).map(|_| ComplexField::zeros(grid)));
    v
}

fn morrey(p: &Prepared, dir: &Path) -> Result<Vec<Check>, LabError> {
    let e = Experiment::Morrey;
    let m = &p.cfg.morrey;
    let r: MorreyReport = morrey_norm(&gradient_norm(p.m0.as_vector()), m.p, m.q, &BallLattice::standard(&p.grid))?;
    write(dir, "morrey.csv", &format!("{}\n{}\n", MorreyReport::csv_header(p.grid.dim()), r.csv_row()))?;
    Ok(vec![Check::new(e, "grad_morrey_finite", r.value, "finite", Status::of(r.value.is_finite()))])
}

/// Default output directory when neither the command line nor the config
/// names one.
pub fn default_output(config_path: &Path) -> PathBuf {
    let stem = config_path.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
    PathBuf::from("out").join(stem)
}
