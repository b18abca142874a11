//! Direct time integration of `∂_t m = -m × Δm - λ m × (m × Δm)` with
//! explicit Runge-Kutta stages, pointwise renormalization, and the energy
//! and local-energy diagnostics.

use std::fmt;
use std::str::FromStr;

use crate::error::{LabError, Result};
use crate::field::{cross3, dot3, norm3, Grid, ScalarField, SpinField, VectorField};
use crate::morrey::{ball_sum, integrate_piecewise_linear, morrey_norm, BallLattice};
use crate::trajectory::Trajectory;

/// Fraction of the explicit stability limit used by the default cap.
pub const C_STAB: f64 = 0.4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    Rk2,
    Rk4,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Rk2 => "rk2",
            Scheme::Rk4 => "rk4",
        })
    }
}

impl FromStr for Scheme {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Scheme> {
        match s.to_ascii_lowercase().as_str() {
            "rk2" | "projected-rk2" => Ok(Scheme::Rk2),
            "rk4" | "projected-rk4" => Ok(Scheme::Rk4),
            other => Err(LabError::InvalidArgument(format!("unknown scheme '{other}' (rk2 or rk4)"))),
        }
    }
}

/// Largest admissible step: `C_STAB / ((1 + λ) |ξ|²_max)`.
pub fn stability_cap(grid: &Grid, lambda: f64) -> f64 {
    C_STAB / ((1.0 + lambda) * grid.xi_squared_max())
}

#[derive(Clone, Debug, PartialEq)]
pub struct LlgConfig {
    pub lambda: f64,
    pub t_final: f64,
    pub dt: f64,
    pub scheme: Scheme,
    pub renormalize_every: usize,
    /// Store a snapshot and a ledger row every this many steps (and at the
    /// final time).
    pub output_every: usize,
}

impl LlgConfig {
    pub fn new(grid: &Grid, lambda: f64, t_final: f64, dt: f64, scheme: Scheme) -> Result<LlgConfig> {
        let cfg = LlgConfig { lambda, t_final, dt, scheme, renormalize_every: 1, output_every: 1 };
        cfg.validate(grid)?;
        Ok(cfg)
    }

    /// A step of `cap / divisor`.
    pub fn at_cap_fraction(grid: &Grid, lambda: f64, t_final: f64, divisor: f64, scheme: Scheme) -> Result<LlgConfig> {
        LlgConfig::new(grid, lambda, t_final, stability_cap(grid, lambda) / divisor, scheme)
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(LabError::InvalidArgument(format!("lambda = {} must be positive", self.lambda)));
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return Err(LabError::InvalidArgument(format!("final time {} must be >= 0", self.t_final)));
        }
        if !(self.dt > 0.0) {
            return Err(LabError::InvalidArgument(format!("dt = {} must be positive", self.dt)));
        }
        let cap = stability_cap(grid, self.lambda);
        if self.dt > cap * (1.0 + 1e-12) {
            return Err(LabError::StepTooLarge { dt: self.dt, cap });
        }
        if self.renormalize_every == 0 || self.output_every == 0 {
            return Err(LabError::InvalidArgument("renormalize_every and output_every must be >= 1".into()));
        }
        Ok(())
    }

    /// Number of steps and the uniform step actually taken.
    pub fn steps(&self) -> (usize, f64) {
        if self.t_final == 0.0 {
            return (0, self.dt);
        }
        let n = (self.t_final / self.dt - 1e-9).ceil().max(1.0) as usize;
        (n, self.t_final / n as f64)
    }
}

/// `-v × Δv - λ v × (v × Δv)`, with any residual normal component removed.
fn rhs_vector(v: &VectorField, lambda: f64) -> VectorField {
    let lap = v.laplacian();
    VectorField::from_fn(v.grid(), |i| {
        let (m, l) = (v.get(i), lap.get(i));
        let a = cross3(m, l);
        let b = cross3(m, a);
        let mut r = [-a[0] - lambda * b[0], -a[1] - lambda * b[1], -a[2] - lambda * b[2]];
        let mm = dot3(m, m);
        if mm > 0.0 {
            let c = dot3(r, m) / mm;
            r = [r[0] - c * m[0], r[1] - c * m[1], r[2] - c * m[2]];
        }
        r
    })
}

pub fn llg_rhs(m: &SpinField, lambda: f64) -> VectorField {
    rhs_vector(m.as_vector(), lambda)
}

fn advance(v: &VectorField, k1: &VectorField, dt: f64, lambda: f64, scheme: Scheme) -> VectorField {
    match scheme {
        Scheme::Rk2 => {
            let k2 = rhs_vector(&v.axpy(dt, k1), lambda);
            v.axpy(0.5 * dt, k1).axpy(0.5 * dt, &k2)
        }
        Scheme::Rk4 => {
            let k2 = rhs_vector(&v.axpy(0.5 * dt, k1), lambda);
            let k3 = rhs_vector(&v.axpy(0.5 * dt, &k2), lambda);
            let k4 = rhs_vector(&v.axpy(dt, &k3), lambda);
            v.axpy(dt / 6.0, k1).axpy(dt / 3.0, &k2).axpy(dt / 3.0, &k3).axpy(dt / 6.0, &k4)
        }
    }
}

fn has_nan(v: &VectorField) -> bool {
    v.components().iter().any(|c| c.iter().any(|x| !x.is_finite()))
}

fn normalize(v: VectorField) -> Result<SpinField> {
    SpinField::from_vectors(v)
}

/// One step from `m` followed by renormalization.
pub fn step(m: &SpinField, dt: f64, lambda: f64, scheme: Scheme) -> Result<SpinField> {
    let k1 = llg_rhs(m, lambda);
    let next = advance(m.as_vector(), &k1, dt, lambda, scheme);
    if has_nan(&next) {
        return Err(LabError::BlowupSuspected { t: dt, last_good_t: 0.0 });
    }
    normalize(next)
}

/// Dirichlet energy `½ Σ |ξ|² |m̂|²` (the form for which the spectral
/// Laplacian is exactly its gradient).
pub fn dirichlet_energy(m: &VectorField) -> f64 {
    let grid = m.grid();
    let mut total = 0.0;
    for c in m.components() {
        let mut buf: Vec<num_complex::Complex64> = c.iter().map(|&x| num_complex::Complex64::new(x, 0.0)).collect();
        grid.forward(&mut buf);
        total += buf.iter().enumerate().map(|(j, z)| grid.xi_squared(j) * z.norm_sqr()).sum::<f64>();
    }
    0.5 * total * grid.cell_volume() / grid.len() as f64
}

/// `Σ |v|² h^n`.
fn l2_squared(v: &VectorField) -> f64 {
    v.components().iter().flat_map(|c| c.iter()).map(|x| x * x).sum::<f64>() * v.grid().cell_volume()
}

/// Pointwise `|∇m|`.
pub fn gradient_norm(m: &VectorField) -> ScalarField {
    let grad = m.gradient();
    let v = (0..m.len()).map(|i| grad.iter().map(|d| dot3(d.get(i), d.get(i))).sum::<f64>().sqrt()).collect();
    ScalarField::new(m.grid().clone(), v).expect("same grid")
}

/// Pointwise `|∇²m|` (all second partials of all components).
pub fn hessian_norm(m: &VectorField) -> ScalarField {
    let grad = m.gradient();
    let dim = m.grid().dim();
    let mut acc = vec![0.0; m.len()];
    for a in 0..dim {
        for b in 0..dim {
            let d = grad[a].partial(b);
            for (i, s) in acc.iter_mut().enumerate() {
                *s += dot3(d.get(i), d.get(i));
            }
        }
    }
    ScalarField::new(m.grid().clone(), acc.into_iter().map(f64::sqrt).collect()).expect("same grid")
}

/// Per-output diagnostics of a direct run.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct EnergyLedger {
    pub times: Vec<f64>,
    pub energies: Vec<f64>,
    /// `∫_0^t ∫ |∂_t m|²`
    pub dissipation: Vec<f64>,
    pub sup_grad: Vec<f64>,
    pub sup_hess: Vec<f64>,
    /// `‖∇m‖_{M^{2,q}}` with `q = min(2, n)`.
    pub morrey22: Vec<f64>,
}

impl EnergyLedger {
    pub const CSV_HEADER: &'static str = "t,E,dissipation,sup_grad,morrey22";

    pub fn csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for i in 0..self.times.len() {
            out.push_str(&format!("{},{},{},{},{}\n", self.times[i], self.energies[i], self.dissipation[i], self.sup_grad[i], self.morrey22[i]));
        }
        out
    }

    fn record(&mut self, t: f64, m: &VectorField, dissipation: f64, lattice: &BallLattice) -> Result<()> {
        let g = gradient_norm(m);
        let q = (m.grid().dim() as f64).min(2.0);
        self.times.push(t);
        self.energies.push(dirichlet_energy(m));
        self.dissipation.push(dissipation);
        self.sup_grad.push(g.sup_norm());
        self.sup_hess.push(hessian_norm(m).sup_norm());
        self.morrey22.push(morrey_norm(&g, 2.0, q, lattice)?.value);
        Ok(())
    }
}

/// Integrates to `t_final`, storing snapshots and ledger rows every
/// `output_every` steps and at the end.
pub fn solve(m0: &SpinField, config: &LlgConfig) -> Result<(Trajectory<SpinField>, EnergyLedger)> {
    let grid = m0.grid().clone();
    config.validate(&grid)?;
    let (n_steps, dt) = config.steps();
    let lattice = BallLattice::standard(&grid);
    let blowup_grad = 1e6 / grid.spacing();

    let mut traj = Trajectory::new(format!("projected-{} dt={dt}", config.scheme));
    let mut ledger = EnergyLedger::default();
    let mut v = m0.as_vector().clone();
    let mut k1 = rhs_vector(&v, config.lambda);
    let mut power = l2_squared(&k1);
    let mut dissipation = 0.0;
    traj.push(0.0, m0.clone())?;
    ledger.record(0.0, &v, 0.0, &lattice)?;
    let mut last_good = 0.0;

    for s in 1..=n_steps {
        let t = s as f64 * dt;
        let mut next = advance(&v, &k1, dt, config.lambda, config.scheme);
        if has_nan(&next) {
            return Err(LabError::BlowupSuspected { t, last_good_t: last_good });
        }
        if s % config.renormalize_every == 0 || s == n_steps {
            next = normalize(next).map_err(|_| LabError::BlowupSuspected { t, last_good_t: last_good })?.into_vector();
        }
        v = next;
        k1 = rhs_vector(&v, config.lambda);
        let p = l2_squared(&k1);
        dissipation += 0.5 * dt * (power + p);
        power = p;
        let output = s % config.output_every == 0 || s == n_steps;
        if output || s % 8 == 0 {
            let g = gradient_norm(&v).sup_norm();
            if !g.is_finite() || g > blowup_grad {
                return Err(LabError::BlowupSuspected { t, last_good_t: last_good });
            }
        }
        last_good = t;
        if output {
            traj.push(t, normalize(v.clone())?)?;
            ledger.record(t, &v, dissipation, &lattice)?;
        }
    }
    Ok((traj, ledger))
}

/// Worst signed violations of the energy law over the ledger.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyCheck {
    /// `max_t E(t) + c ∫∫|∂_t m|² - E(0)`, `c = λ/(1+λ²)`
    pub worst_violation: f64,
    /// `max_t |E(t) + c ∫∫|∂_t m|² - E(0)|`
    pub worst_equality_gap: f64,
    pub tolerance: f64,
    /// Largest increase of `E` between consecutive rows.
    pub worst_energy_increase: f64,
}

impl EnergyCheck {
    pub fn inequality_holds(&self) -> bool {
        self.worst_violation <= self.tolerance
    }

    pub fn equality_holds(&self) -> bool {
        self.worst_equality_gap <= self.tolerance
    }

    pub fn monotone(&self) -> bool {
        self.worst_energy_increase <= self.tolerance
    }
}

pub fn check_energy_inequality(ledger: &EnergyLedger, lambda: f64) -> Result<EnergyCheck> {
    if ledger.times.is_empty() {
        return Err(LabError::EmptyTrajectory);
    }
    let e0 = ledger.energies[0];
    let c = lambda / (1.0 + lambda * lambda);
    let mut worst = 0.0_f64;
    let mut gap = 0.0_f64;
    for (e, d) in ledger.energies.iter().zip(&ledger.dissipation) {
        let r = e + c * d - e0;
        worst = worst.max(r);
        gap = gap.max(r.abs());
    }
    let rise = ledger.energies.windows(2).fold(0.0_f64, |m, w| m.max(w[1] - w[0]));
    Ok(EnergyCheck { worst_violation: worst, worst_equality_gap: gap, tolerance: 1e-4 * e0 + 1e-10, worst_energy_increase: rise })
}

/// `Δm + |∇m|² m` pointwise.
pub fn tension(m: &SpinField) -> VectorField {
    crate::frame::tension_field(m)
}

/// Sup of `λ ∂_t m + m × ∂_t m - (1+λ²)(Δm + |∇m|² m)`.
pub fn check_equivalent_form(m: &SpinField, dt_m: &VectorField, lambda: f64) -> f64 {
    let tau = tension(m);
    let s = 1.0 + lambda * lambda;
    (0..m.len()).fold(0.0_f64, |w, i| {
        let (mi, d, t) = (m.get(i), dt_m.get(i), tau.get(i));
        let c = cross3(mi, d);
        let r = [lambda * d[0] + c[0] - s * t[0], lambda * d[1] + c[1] - s * t[1], lambda * d[2] + c[2] - s * t[2]];
        w.max(norm3(r))
    })
}

/// Sup of `-m × (m × Δm) - (Δm + |∇m|² m)`.
pub fn tension_identity_residual(m: &SpinField) -> f64 {
    let lap = m.as_vector().laplacian();
    let tau = tension(m);
    (0..m.len()).fold(0.0_f64, |w, i| {
        let mi = m.get(i);
        let b = cross3(mi, cross3(mi, lap.get(i)));
        let t = tau.get(i);
        w.max(norm3([-b[0] - t[0], -b[1] - t[1], -b[2] - t[2]]))
    })
}

/// Smooth cutoff `exp(1 - 1/(1 - |x-c|²/R²))` inside the ball, zero outside.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cutoff {
    pub center: [f64; 3],
    pub radius: f64,
}

impl Cutoff {
    /// Value and gradient at a grid point (wrapped displacement).
    pub fn eval(&self, grid: &Grid, flat: usize) -> (f64, [f64; 3]) {
        let x = grid.coords(flat);
        let l = grid.length();
        let mut d = [0.0; 3];
        for a in 0..grid.dim() {
            let mut r = x[a] - self.center[a];
            r -= l * (r / l).round();
            d[a] = r;
        }
        let s = dot3(d, d) / (self.radius * self.radius);
        if s >= 1.0 {
            return (0.0, [0.0; 3]);
        }
        let phi = (1.0 - 1.0 / (1.0 - s)).exp();
        let c = -phi * 2.0 / (self.radius * self.radius * (1.0 - s) * (1.0 - s));
        (phi, [c * d[0], c * d[1], c * d[2]])
    }
}

/// Constant in the local energy inequality obtained from Young's inequality.
pub fn local_energy_constant(lambda: f64) -> f64 {
    let s = 1.0 + lambda * lambda;
    4.0 * s * s / lambda
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalEnergyRecord {
    /// `λ ∫∫ |∂_t m|² φ² + (1+λ²) ∫ |∇m(t2)|² φ²`
    pub lhs: f64,
    /// `(1+λ²) ∫ |∇m(t1)|² φ² + C(λ) ∫∫ |∇m|² |∇φ|²`
    pub rhs: f64,
    pub c_lambda: f64,
}

impl LocalEnergyRecord {
    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }

    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs * (1.0 + 1e-9) + 1e-14
    }
}

fn check_window(traj: &Trajectory<SpinField>, t1: f64, t2: f64) -> Result<()> {
    let times = traj.times();
    if times.is_empty() {
        return Err(LabError::EmptyTrajectory);
    }
    if !(t1 < t2) || times[0] > t1 + 1e-12 || *times.last().unwrap() < t2 - 1e-12 {
        return Err(LabError::CoverageFailure(format!("trajectory spans [{}, {}], window is [{t1}, {t2}]", times[0], times.last().unwrap())));
    }
    Ok(())
}

/// Both sides of the localized energy inequality on `[t1, t2]`; time
/// integrals by trapezoid on the stored samples with `∂_t m` recomputed
/// from the equation.
pub fn check_local_energy(traj: &Trajectory<SpinField>, t1: f64, t2: f64, cutoff: &Cutoff, lambda: f64) -> Result<LocalEnergyRecord> {
    check_window(traj, t1, t2)?;
    let grid = traj.states()[0].grid().clone();
    let hn = grid.cell_volume();
    let weights: Vec<(f64, f64)> = (0..grid.len())
        .map(|i| {
            let (phi, g) = cutoff.eval(&grid, i);
            (phi * phi, dot3(g, g))
        })
        .collect();
    let mut dtm_phi = Vec::with_capacity(traj.len());
    let mut grad_phi = Vec::with_capacity(traj.len());
    let mut grad_dphi = Vec::with_capacity(traj.len());
    for m in traj.states() {
        let dt = llg_rhs(m, lambda);
        let g = gradient_norm(m.as_vector());
        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        for (i, &(p2, dp2)) in weights.iter().enumerate() {
            let gi2 = g.values()[i] * g.values()[i];
            a += dot3(dt.get(i), dt.get(i)) * p2;
            b += gi2 * p2;
            c += gi2 * dp2;
        }
        dtm_phi.push(a * hn);
        grad_phi.push(b * hn);
        grad_dphi.push(c * hn);
    }
    let times = traj.times();
    let at = |series: &[f64], t: f64| interp(times, series, t);
    let s = 1.0 + lambda * lambda;
    let c_lambda = local_energy_constant(lambda);
    let lhs = lambda * integrate_piecewise_linear(times, &dtm_phi, t1, t2) + s * at(&grad_phi, t2);
    let rhs = s * at(&grad_phi, t1) + c_lambda * integrate_piecewise_linear(times, &grad_dphi, t1, t2);
    Ok(LocalEnergyRecord { lhs, rhs, c_lambda })
}

fn interp(times: &[f64], s: &[f64], t: f64) -> f64 {
    match times.iter().position(|&x| x >= t) {
        Some(0) => s[0],
        Some(j) => {
            let w = (t - times[j - 1]) / (times[j] - times[j - 1]);
            s[j - 1] * (1.0 - w) + s[j] * w
        }
        None => *s.last().unwrap(),
    }
}

/// `∫_{P_{r/2}(z)} |∂_t m|² / (r^{-2} ∫_{P_r(z)} |∇m|²)` for `z = (x0, t0)`.
pub fn dissipation_ratio(traj: &Trajectory<SpinField>, center: usize, t0: f64, r: f64, lambda: f64) -> Result<f64> {
    check_window(traj, t0 - r * r, t0)?;
    let grid = traj.states()[0].grid().clone();
    let hn = grid.cell_volume();
    let mut inner = Vec::with_capacity(traj.len());
    let mut outer = Vec::with_capacity(traj.len());
    for m in traj.states() {
        let dt = llg_rhs(m, lambda);
        let dt2: Vec<f64> = (0..m.len()).map(|i| dot3(dt.get(i), dt.get(i))).collect();
        let g2: Vec<f64> = gradient_norm(m.as_vector()).values().iter().map(|x| x * x).collect();
        inner.push(ball_sum(&dt2, &grid, center, r / 2.0) * hn);
        outer.push(ball_sum(&g2, &grid, center, r) * hn);
    }
    let times = traj.times();
    let num = integrate_piecewise_linear(times, &inner, t0 - r * r / 4.0, t0);
    let den = integrate_piecewise_linear(times, &outer, t0 - r * r, t0) / (r * r);
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn equatorial(g: &Grid, amp: f64) -> SpinField {
        SpinField::from_fn(g, |x| {
            let th = amp * x[0].sin();
            [th.cos(), th.sin(), 0.0]
        })
        .unwrap()
    }

    #[test]
    fn constant_map_is_stationary() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let m = SpinField::constant(&g, [0.0, 0.6, 0.8]).unwrap();
        assert!(llg_rhs(&m, 1.0).sup_norm() < 1e-15);
        let next = step(&m, 1e-3, 1.0, Scheme::Rk4).unwrap();
        assert!(next.as_vector().axpy(-1.0, m.as_vector()).sup_norm() < 1e-15);
        let cfg = LlgConfig::at_cap_fraction(&g, 1.0, 0.01, 1.0, Scheme::Rk2).unwrap();
        let (traj, ledger) = solve(&m, &cfg).unwrap();
        assert!(ledger.energies.iter().all(|&e| e.abs() < 1e-28));
        assert_eq!(check_energy_inequality(&ledger, 1.0).unwrap().worst_violation, 0.0);
        assert!(traj.states().iter().all(|s| s.as_vector().axpy(-1.0, m.as_vector()).sup_norm() < 1e-15));
    }

    #[test]
    fn equatorial_closed_forms() {
        let g = Grid::new(1, 64, 2.0 * PI).unwrap();
        let m = equatorial(&g, 0.1);
        let lap = m.as_vector().laplacian();
        let rhs = llg_rhs(&m, 1.0);
        for i in 0..g.len() {
            let x = g.coords(i)[0];
            let th = 0.1 * x.sin();
            let th2 = -0.1 * x.sin();
            let mi = m.get(i);
            let mxl = cross3(mi, lap.get(i));
            assert!(norm3([mxl[0], mxl[1], mxl[2] - th2]) < 1e-8);
            let tau = [-th2 * th.sin(), th2 * th.cos(), 0.0];
            // rhs = -m×Δm + λ τ with λ = 1
            let expect = [tau[0], tau[1], -th2];
            assert!(norm3([rhs.get(i)[0] - expect[0], rhs.get(i)[1] - expect[1], rhs.get(i)[2] - expect[2]]) < 1e-8);
        }
        assert!(tension_identity_residual(&m) < 1e-8);
    }

    #[test]
    fn initial_energy_of_equatorial_wave() {
        let g = Grid::new(1, 64, 2.0 * PI).unwrap();
        let e0 = dirichlet_energy(equatorial(&g, 0.1).as_vector());
        assert!((e0 - 0.01 * PI / 2.0).abs() < 1e-6);
    }

    #[test]
    fn step_cap_enforced() {
        let g = Grid::new(1, 32, 2.0 * PI).unwrap();
        let cap = stability_cap(&g, 1.0);
        assert!(matches!(LlgConfig::new(&g, 1.0, 1.0, 2.0 * cap, Scheme::Rk2), Err(LabError::StepTooLarge { .. })));
        assert!(LlgConfig::new(&g, 1.0, 1.0, cap, Scheme::Rk2).is_ok());
        assert_eq!("rk4".parse::<Scheme>().unwrap(), Scheme::Rk4);
        assert!("euler".parse::<Scheme>().is_err());
    }

    #[test]
    fn rk2_is_second_order() {
        let g = Grid::new(1, 32, 2.0 * PI).unwrap();
        let m0 = equatorial(&g, 0.5);
        let t = 0.05;
        let run = |dt: f64, scheme| {
            let cfg = LlgConfig { lambda: 1.0, t_final: t, dt, scheme, renormalize_every: 1, output_every: usize::MAX };
            solve(&m0, &cfg).unwrap().0.last().unwrap().1.clone()
        };
        let cap = stability_cap(&g, 1.0);
        let reference = run(cap / 16.0, Scheme::Rk4);
        let e1 = run(cap, Scheme::Rk2).as_vector().axpy(-1.0, reference.as_vector()).sup_norm();
        let e2 = run(cap / 2.0, Scheme::Rk2).as_vector().axpy(-1.0, reference.as_vector()).sup_norm();
        assert!(e1 / e2 >= 3.5, "ratio {}", e1 / e2);
    }

    #[test]
    fn equivalent_form_discriminates() {
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        let m = SpinField::from_fn(&g, |x| [0.3 * x[0].sin(), 0.2 * (x[1] + x[0]).cos(), 1.0]).unwrap();
        let dt = llg_rhs(&m, 0.7);
        assert!(check_equivalent_form(&m, &dt, 0.7) < 1e-8);
        let noisy = VectorField::from_fn(&g, |i| {
            let d = dt.get(i);
            [d[0] + 1e-3 * ((i * 31) % 7) as f64, d[1], d[2]]
        });
        assert!(check_equivalent_form(&m, &noisy, 0.7) > 1e-4);
    }

    #[test]
    fn local_energy_constant_trajectory() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let m = SpinField::constant(&g, [0.0, 0.0, 1.0]).unwrap();
        let mut tr = Trajectory::new("const");
        tr.push(0.0, m.clone()).unwrap();
        tr.push(1.0, m).unwrap();
        let cut = Cutoff { center: [PI, PI, 0.0], radius: 1.0 };
        let rec = check_local_energy(&tr, 0.0, 1.0, &cut, 1.0).unwrap();
        assert_eq!((rec.lhs, rec.rhs), (0.0, 0.0));
        assert!(rec.holds());
        assert!(check_local_energy(&tr, 0.0, 2.0, &cut, 1.0).is_err());
    }

    #[test]
    fn cutoff_gradient_matches_finite_differences() {
        let g = Grid::new(1, 64, 2.0 * PI).unwrap();
        let cut = Cutoff { center: [PI, 0.0, 0.0], radius: 1.5 };
        let g_fine = Grid::new(1, 1 << 16, 2.0 * PI).unwrap();
        let h = g_fine.spacing();
        for i in 0..g.len() {
            let x = g.coords(i)[0];
            let j = (x / h).round() as usize;
            let (_, d) = cut.eval(&g, i);
            let nf = g_fine.len();
            let fd = (cut.eval(&g_fine, (j + 1) % nf).0 - cut.eval(&g_fine, (j + nf - 1) % nf).0) / (2.0 * h);
            assert!((d[0] - fd).abs() < 1e-6, "x = {x}");
        }
    }
}
