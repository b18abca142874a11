//! Mild solutions of the gauged complex Ginzburg-Landau system
//!
//! ```text
//! u_l(t) = S(t) v0_l + ∫_0^t S(t-s) F_l(u, a, a0)(s) ds
//! ```
//!
//! where `S(t)` has Fourier multiplier `e^{(i-λ)|ξ|²t}`. Solutions are
//! computed by Picard iteration on a uniform time grid. Also holds the exponent
//! bookkeeping that decides for which `p` the fixed-point estimates close.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::field::{derivative, ComplexField, Grid, ScalarField, SpectralField, Spectrum};
use crate::frame::gauge_fields_from_u;
use crate::morrey::{morrey_norm, pointwise_norm, xpt_norm, BallLattice, XptReport};
use crate::semigroup::{DuhamelStepper, SemigroupParams};
use crate::trajectory::Trajectory;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Default smallness threshold on `‖v0‖_{M^{2,2}}`.
pub const DEFAULT_EPS0: f64 = 0.05;

/// The three pieces of `F`: cubic in `u`, linear in the connection, and
/// quadratic in it.
#[derive(Clone, Debug, PartialEq)]
pub struct NonlinearityParts {
    pub f1: Vec<ComplexField>,
    pub f2: Vec<ComplexField>,
    pub f3: Vec<ComplexField>,
}

impl NonlinearityParts {
    pub fn total(&self) -> Vec<ComplexField> {
        self.f1.iter().zip(&self.f2).zip(&self.f3).map(|((a, b), c)| a.add(b).add(c)).collect()
    }
}

fn check_tuple(u: &[ComplexField], a: &[ScalarField]) -> Result<Grid> {
    let first = u.first().ok_or_else(|| LabError::InvalidArgument("empty u".into()))?;
    let grid = first.grid().clone();
    if u.len() != grid.dim() || a.len() != grid.dim() {
        return Err(LabError::InvalidArgument(format!("need {} components of u and a, got {} and {}", grid.dim(), u.len(), a.len())));
    }
    if u.iter().any(|f| f.grid() != &grid) || a.iter().any(|f| f.grid() != &grid) {
        return Err(LabError::GridMismatch);
    }
    Ok(grid)
}

/// ```text
/// f1_l = (λ-i) i Σ_k Im(u_l ū_k) u_k
/// f2_l = (λ-i) 2i (a·∇) u_l - i a0_1 u_l
/// f3_l = -(λ-i) |a|² u_l - i a0_2 u_l
/// ```
pub fn nonlinearity_parts(u: &[ComplexField], a: &[ScalarField], a0_1: &ScalarField, a0_2: &ScalarField, lambda: f64) -> Result<NonlinearityParts> {
    let grid = check_tuple(u, a)?;
    if a0_1.grid() != &grid || a0_2.grid() != &grid {
        return Err(LabError::GridMismatch);
    }
    let n = grid.dim();
    let len = grid.len();
    let c = Complex64::new(lambda, -1.0);
    let du: Vec<Vec<ComplexField>> = u.iter().map(|ul| (0..n).map(|k| derivative(ul, k, 1)).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?;
    let build = |f: &dyn Fn(usize) -> Complex64| ComplexField::new(grid.clone(), (0..len).map(f).collect()).expect("same grid");

    let mut f1 = Vec::with_capacity(n);
    let mut f2 = Vec::with_capacity(n);
    let mut f3 = Vec::with_capacity(n);
    for l in 0..n {
        f1.push(build(&|j| {
            let ul = u[l].values()[j];
            let mut s = Complex64::new(0.0, 0.0);
            for uk in u {
                let uk = uk.values()[j];
                s += (ul * uk.conj()).im * uk;
            }
            c * I * s
        }));
        f2.push(build(&|j| {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..n {
                s += a[k].values()[j] * du[l][k].values()[j];
            }
            c * 2.0 * I * s - I * a0_1.values()[j] * u[l].values()[j]
        }));
        f3.push(build(&|j| {
            let a2: f64 = a.iter().map(|ak| ak.values()[j].powi(2)).sum();
            let ul = u[l].values()[j];
            -c * a2 * ul - I * a0_2.values()[j] * ul
        }));
    }
    Ok(NonlinearityParts { f1, f2, f3 })
}

/// `F(u, a, a0)` with `a0 = a0_1 + a0_2`.
#[allow(non_snake_case)]
pub fn nonlinearity_F(u: &[ComplexField], a: &[ScalarField], a0_1: &ScalarField, a0_2: &ScalarField, lambda: f64) -> Result<Vec<ComplexField>> {
    Ok(nonlinearity_parts(u, a, a0_1, a0_2, lambda)?.total())
}

/// `F` with the connection recovered from `u` in the Coulomb gauge.
pub fn forcing(u: &[ComplexField], lambda: f64) -> Result<Vec<ComplexField>> {
    let g = gauge_fields_from_u(u, lambda)?;
    nonlinearity_F(u, &g.a, &g.a0_1, &g.a0_2, lambda)
}

/// One exponent pair of the Beta-function bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentPair {
    /// Which part of `F` (`f1`, `f2`, `f3`).
    pub term: &'static str,
    /// Which component of the `X^p_T` norm it is estimated in (`R1`, `R2`, `R3`).
    pub target: &'static str,
    pub delta1: f64,
    pub delta2: f64,
    pub valid: bool,
    /// `B[δ1, δ2] = ∫_0^1 (1-s)^{-δ1} s^{-δ2} ds` when both are below 1.
    pub beta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WindowReport {
    pub p: f64,
    pub pairs: Vec<ExponentPair>,
}

impl WindowReport {
    pub fn valid(&self) -> bool {
        self.pairs.iter().all(|e| e.valid)
    }

    pub fn failing(&self) -> impl Iterator<Item = &ExponentPair> {
        self.pairs.iter().filter(|e| !e.valid)
    }

    pub fn first_failure(&self) -> Option<&ExponentPair> {
        self.failing().next()
    }
}

/// Margin under 1 that a δ must clear; keeps the open endpoints of the window
/// out despite rounding in `3/p` and `5/2 - 5/p`.
const DELTA_MARGIN: f64 = 1e-12;

/// Evaluates the nine `(δ1, δ2)` pairs for a given `p`. The set is valid
/// exactly on the open interval `3 < p < 10/3`.
pub fn exponent_window_check(p: f64) -> WindowReport {
    let table: [(&'static str, &'static str, f64, f64); 9] = [
        ("f1", "R1", 2.0 / p, 1.5 * (1.0 - 2.0 / p)),
        ("f1", "R2", 3.0 / p, 1.5 * (1.0 - 2.0 / p)),
        ("f1", "R3", 3.0 / p - 0.5, 1.5 * (1.0 - 2.0 / p)),
        ("f2", "R1", 1.0 / p, 1.5 - 2.0 / p),
        ("f2", "R2", 2.0 / p, 1.5 - 2.0 / p),
        ("f2", "R3", 2.0 / p - 0.5, 1.5 - 2.0 / p),
        ("f3", "R1", (4.0 - p) / p, 2.5 - 5.0 / p),
        ("f3", "R2", (5.0 - p) / p, 2.5 - 5.0 / p),
        ("f3", "R3", 5.0 / p - 1.5, 2.5 - 5.0 / p),
    ];
    let pairs = table
        .iter()
        .map(|&(term, target, d1, d2)| {
            let valid = p.is_finite() && d1 < 1.0 - DELTA_MARGIN && d2 < 1.0 - DELTA_MARGIN;
            ExponentPair { term, target, delta1: d1, delta2: d2, valid, beta: valid.then(|| beta_integral(d1, d2)) }
        })
        .collect();
    WindowReport { p, pairs }
}

/// Tanh-sinh rule on `[0, b]` for an integrand bounded on the closed interval.
fn tanh_sinh<F: Fn(f64) -> f64>(f: F, b: f64) -> f64 {
    let step = 1.0 / 64.0;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut acc = 0.0;
    let kmax = (4.5 / step) as i64;
    for k in -kmax..=kmax {
        let tau = k as f64 * step;
        let x = half_pi * tau.sinh();
        // s = (1 + tanh x)/2 in a form that keeps both tails accurate.
        let s = 1.0 / (1.0 + (-2.0 * x).exp());
        let w = half_pi * tau.cosh() * 2.0 * s * (1.0 - s);
        if w == 0.0 {
            continue;
        }
        acc += f(b * s) * w;
    }
    acc * b * step
}

/// `∫_0^1 (1-s)^{-δ1} s^{-δ2} ds` for `δ1, δ2 < 1`. Each half is mapped by
/// `s = v^k`, `k = 1/(1-δ)`, which absorbs the endpoint singularity into the
/// Jacobian; the remaining bounded integrand is handled by tanh-sinh.
pub fn beta_integral(delta1: f64, delta2: f64) -> f64 {
    assert!(delta1 < 1.0 && delta2 < 1.0, "beta_integral needs both exponents below 1");
    let half = |d_near: f64, d_far: f64| {
        let k = 1.0 / (1.0 - d_near);
        let upper = 0.5_f64.powf(1.0 - d_near);
        k * tanh_sinh(|v| (1.0 - v.powf(k)).powf(-d_far), upper)
    };
    half(delta2, delta1) + half(delta1, delta2)
}

/// Settings of the Picard solver.
#[derive(Clone, Debug, PartialEq)]
pub struct CglConfig {
    pub lambda: f64,
    pub p: f64,
    pub t_final: f64,
    /// Number of uniform intervals in `[0, T]`.
    pub time_steps: usize,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    /// Midpoint substeps per interval in the Duhamel weights.
    pub duhamel_substeps: usize,
    pub eps0: f64,
    /// Record `R1..R3` for every iterate, not only the last.
    pub log_xpt: bool,
}

impl CglConfig {
    pub fn new(lambda: f64, p: f64, t_final: f64, time_steps: usize) -> Result<CglConfig> {
        let cfg = CglConfig { lambda, p, t_final, time_steps, picard_tol: 1e-8, picard_max_iter: 40, duhamel_substeps: 8, eps0: DEFAULT_EPS0, log_xpt: false };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(LabError::InvalidArgument(format!("lambda must be positive, got {}", self.lambda)));
        }
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return Err(LabError::InvalidArgument(format!("T must be positive, got {}", self.t_final)));
        }
        if self.time_steps == 0 || self.duhamel_substeps == 0 || self.picard_max_iter == 0 {
            return Err(LabError::InvalidArgument("time_steps, duhamel_substeps and picard_max_iter must be >= 1".into()));
        }
        if !(self.picard_tol > 0.0) {
            return Err(LabError::InvalidArgument(format!("picard_tol must be positive, got {}", self.picard_tol)));
        }
        let window = exponent_window_check(self.p);
        if let Some(bad) = window.first_failure() {
            return Err(LabError::InvalidArgument(format!(
                "p = {} is outside the admissible window (3, 10/3): pair {}/{} has δ1 = {:.6}, δ2 = {:.6}",
                self.p, bad.term, bad.target, bad.delta1, bad.delta2
            )));
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        let dt = self.t_final / self.time_steps as f64;
        (0..=self.time_steps).map(|m| if m == self.time_steps { self.t_final } else { m as f64 * dt }).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// `sup_t ‖u^{j+1}(t) - u^j(t)‖_{L²}` over the time grid.
    pub increment: f64,
    pub xpt: Option<XptReport>,
}

#[derive(Clone, Debug)]
pub struct PicardOutcome {
    pub trajectory: Trajectory<Vec<ComplexField>>,
    pub xpt: XptReport,
    pub log: Vec<IterationRecord>,
    pub converged: bool,
    /// Increment produced by one further application of the map.
    pub residual: f64,
    pub v0_m22: f64,
    pub warnings: Vec<String>,
}

impl PicardOutcome {
    pub const LOG_HEADER: &'static str = "iter,increment,xpt_R1,xpt_R2,xpt_R3";

    pub fn log_csv(&self) -> String {
        let mut s = String::from(Self::LOG_HEADER);
        s.push('\n');
        for r in &self.log {
            match &r.xpt {
                Some(x) => s.push_str(&format!("{},{:.17e},{:.17e},{:.17e},{:.17e}\n", r.iteration, r.increment, x.r1, x.r2, x.r3)),
                None => s.push_str(&format!("{},{:.17e},,,\n", r.iteration, r.increment)),
            }
        }
        s
    }

    /// `sup_t ‖u(t)‖_{M^{2,2}} / ‖v0‖_{M^{2,2}}`.
    pub fn smallness_ratio(&self) -> f64 {
        if self.v0_m22 == 0.0 {
            return 0.0;
        }
        self.xpt.r3 / self.v0_m22
    }
}

fn tuple_l2_distance(a: &[ComplexField], b: &[ComplexField]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.sub(y).l2_norm().powi(2)).sum::<f64>().sqrt()
}

/// Fixed-point map on node values: free evolution plus Duhamel term with `F`
/// interpolated linearly between nodes.
struct PicardMap {
    params: SemigroupParams,
    stepper: DuhamelStepper,
    free: Vec<Vec<ComplexField>>,
    lambda: f64,
}

impl PicardMap {
    fn new(v0: &[ComplexField], cfg: &CglConfig) -> Result<PicardMap> {
        let grid = v0[0].grid().clone();
        let params = SemigroupParams::new(cfg.lambda, &grid)?;
        let dt = cfg.t_final / cfg.time_steps as f64;
        let stepper = DuhamelStepper::new(&params, dt, cfg.duhamel_substeps)?;
        let free = cfg
            .times()
            .iter()
            .map(|&t| v0.iter().map(|f| crate::semigroup::apply_semigroup(f, t, &params)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(PicardMap { params, stepper, free, lambda: cfg.lambda })
    }

    fn apply(&self, u: &[Vec<ComplexField>]) -> Result<Vec<Vec<ComplexField>>> {
        let grid = self.params.grid();
        let n = grid.dim();
        let forcing_hat: Vec<Vec<Spectrum>> = u
            .par_iter()
            .map(|state| Ok(forcing(state, self.lambda)?.iter().map(|f| Spectrum::from_complex(f.values(), grid)).collect()))
            .collect::<Result<_>>()?;
        let mut out = Vec::with_capacity(u.len());
        let mut integral: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); grid.len()]; n];
        for m in 0..u.len() {
            if m > 0 {
                for l in 0..n {
                    self.stepper.advance(&mut integral[l], forcing_hat[m - 1][l].coeffs(), forcing_hat[m][l].coeffs());
                }
            }
            let state = (0..n)
                .map(|l| {
                    let mut s = Spectrum::zeros(grid);
                    s.coeffs_mut().copy_from_slice(&integral[l]);
                    self.free[m][l].add(&s.into_complex())
                })
                .collect();
            out.push(state);
        }
        Ok(out)
    }
}

fn sup_increment(a: &[Vec<ComplexField>], b: &[Vec<ComplexField>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| tuple_l2_distance(x, y)).fold(0.0, |m, d| if d.is_nan() || m.is_nan() { f64::NAN } else { m.max(d) })
}

/// Picard iteration for the mild formulation. Stops when the sup-in-time
/// `L²` increment drops below `picard_tol`; reports `NonContraction` when the
/// increments grow three times in a row or stop being finite.
pub fn picard_iterate(v0: &[ComplexField], cfg: &CglConfig) -> Result<PicardOutcome> {
    cfg.validate()?;
    let grid = v0.first().ok_or_else(|| LabError::InvalidArgument("empty v0".into()))?.grid().clone();
    if v0.len() != grid.dim() {
        return Err(LabError::InvalidArgument(format!("v0 needs {} components, got {}", grid.dim(), v0.len())));
    }
    if v0.iter().any(|f| f.grid() != &grid) {
        return Err(LabError::GridMismatch);
    }
    let lattice = BallLattice::standard(&grid);
    let times = cfg.times();
    let q = 2.0_f64.min(grid.dim() as f64);
    let v0_m22 = morrey_norm(&pointwise_norm(v0), 2.0, q, &lattice)?.value;
    let mut warnings = Vec::new();
    if v0_m22 > cfg.eps0 {
        warnings.push(format!("‖v0‖_M22 = {v0_m22:.3e} exceeds the smallness threshold {:.3e}", cfg.eps0));
    }

    let map = PicardMap::new(v0, cfg)?;
    let mut current = map.free.clone();
    let mut log = Vec::new();
    let mut growth_streak = 0;
    let mut converged = false;
    for iteration in 1..=cfg.picard_max_iter {
        let next = map.apply(&current)?;
        let increment = sup_increment(&next, &current);
        if !increment.is_finite() {
            return Err(LabError::NonContraction { iteration, increment });
        }
        if let Some(prev) = log.last().map(|r: &IterationRecord| r.increment) {
            growth_streak = if increment > prev { growth_streak + 1 } else { 0 };
        }
        let xpt = if cfg.log_xpt { Some(xpt_norm(&times, &next, cfg.p, &lattice)?) } else { None };
        log.push(IterationRecord { iteration, increment, xpt });
        current = next;
        if growth_streak >= 3 {
            return Err(LabError::NonContraction { iteration, increment });
        }
        if increment < cfg.picard_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        warnings.push(format!("no convergence after {} iterations", cfg.picard_max_iter));
    }
    let residual = sup_increment(&map.apply(&current)?, &current);
    let xpt = xpt_norm(&times, &current, cfg.p, &lattice)?;
    let mut trajectory = Trajectory::new("picard-duhamel");
    for (t, state) in times.into_iter().zip(current) {
        trajectory.push(t, state)?;
    }
    Ok(PicardOutcome { trajectory, xpt, log, converged, residual, v0_m22, warnings })
}

/// `div a` of the Coulomb connection at every node; should vanish to
/// round-off.
pub fn coulomb_divergence_residual(traj: &Trajectory<Vec<ComplexField>>, lambda: f64) -> Result<f64> {
    let mut worst = 0.0_f64;
    for (_, u) in traj.iter() {
        let g = gauge_fields_from_u(u, lambda)?;
        worst = worst.max(crate::field::divergence(&g.a)?.sup_norm());
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityRecord {
    pub deltas: Vec<f64>,
    /// `‖u_a - u_b‖_{X^p_T} / ‖v0_a - v0_b‖_{M^{2,2}}` for each perturbation size.
    pub ratios: Vec<f64>,
    /// Set when every perturbation is identically zero; ratios are then 0.
    pub zero_difference: bool,
}

impl StabilityRecord {
    /// `(max - min) / min` of the ratios.
    pub fn spread(&self) -> f64 {
        if self.ratios.is_empty() || self.zero_difference {
            return 0.0;
        }
        let lo = self.ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.ratios.iter().cloned().fold(0.0, f64::max);
        (hi - lo) / lo
    }
}

/// Solves from `v0_a` and from `v0_a + δ·perturbation` for each `δ` and
/// records the Lipschitz ratio of the solution map.
pub fn stability_experiment(v0_a: &[ComplexField], perturbation: &[ComplexField], deltas: &[f64], cfg: &CglConfig) -> Result<StabilityRecord> {
    let base = picard_iterate(v0_a, cfg)?;
    let grid = v0_a[0].grid().clone();
    let lattice = BallLattice::standard(&grid);
    let q = 2.0_f64.min(grid.dim() as f64);
    let mut ratios = Vec::with_capacity(deltas.len());
    let mut all_zero = true;
    for &delta in deltas {
        let dv: Vec<ComplexField> = perturbation.iter().map(|f| f.scale(Complex64::new(delta, 0.0))).collect();
        let denom = morrey_norm(&pointwise_norm(&dv), 2.0, q, &lattice)?.value;
        if denom == 0.0 {
            ratios.push(0.0);
            continue;
        }
        all_zero = false;
        let v0_b: Vec<ComplexField> = v0_a.iter().zip(&dv).map(|(a, d)| a.add(d)).collect();
        let other = picard_iterate(&v0_b, cfg)?;
        let diff: Vec<Vec<ComplexField>> =
            base.trajectory.states().iter().zip(other.trajectory.states()).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p.sub(q)).collect()).collect();
        let num = xpt_norm(base.trajectory.times(), &diff, cfg.p, &lattice)?.total;
        ratios.push(num / denom);
    }
    Ok(StabilityRecord { deltas: deltas.to_vec(), ratios, zero_difference: all_zero })
}
