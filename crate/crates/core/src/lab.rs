//! Initial data and multi-solver experiments.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::cgl::{picard_iterate, CglConfig};
use crate::error::{LabError, Result};
use crate::field::{norm3, ComplexField, Grid, ScalarField, Spectrum, SpinField, VectorField};
use crate::frame::{coulomb_u, gradient_magnitude_from_u};
use crate::llg::{gradient_norm, solve, EnergyLedger, LlgConfig, Scheme};
use crate::morrey::{morrey_norm, pointwise_norm, BallLattice};
use crate::semigroup::{log_spaced, verify_decay, DecayKind, DecayReport, SemigroupParams};

/// Lower bound on the pre-projection modulus of mollified data.
pub const MIN_MOLLIFIED_NORM: f64 = 0.75;

#[derive(Clone, Debug, PartialEq)]
pub enum InitialDataSpec {
    Constant {
        m_inf: [f64; 3],
    },
    /// `(cos(a sin kx), sin(a sin kx), 0)`.
    EquatorialWave {
        amplitude: f64,
        wavenumber: f64,
    },
    /// `Π(m_inf + a·b(x)·e)`, `b` a Gaussian of the given width centred in the
    /// box and `e` a fixed unit vector orthogonal to `m_inf`.
    BumpChart {
        m_inf: [f64; 3],
        amplitude: f64,
        width: f64,
    },
    /// Seeded white noise around `m_inf`, projected, then mollified at scale
    /// `1/k` and projected again.
    RoughMollified {
        m_inf: [f64; 3],
        amplitude: f64,
        k: f64,
        seed: u64,
    },
}

fn unit(v: [f64; 3]) -> Result<[f64; 3]> {
    let n = norm3(v);
    if !(n > 0.0) || !n.is_finite() {
        return Err(LabError::InvalidArgument(format!("m_inf = {v:?} is not normalizable")));
    }
    Ok([v[0] / n, v[1] / n, v[2] / n])
}

fn orthogonal_unit(m: [f64; 3]) -> [f64; 3] {
    // Cross with the coordinate axis least aligned with m.
    let axis = if m[0].abs() <= m[1].abs() && m[0].abs() <= m[2].abs() {
        [1.0, 0.0, 0.0]
    } else if m[1].abs() <= m[2].abs() {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let c = crate::field::cross3(m, axis);
    let n = norm3(c);
    [c[0] / n, c[1] / n, c[2] / n]
}

pub fn generate_initial_data(spec: &InitialDataSpec, grid: &Grid) -> Result<SpinField> {
    match *spec {
        InitialDataSpec::Constant { m_inf } => SpinField::constant(grid, unit(m_inf)?),
        InitialDataSpec::EquatorialWave { amplitude, wavenumber } => SpinField::from_fn(grid, |x| {
            let phi = amplitude * (wavenumber * x[0]).sin();
            [phi.cos(), phi.sin(), 0.0]
        }),
        InitialDataSpec::BumpChart { m_inf, amplitude, width } => {
            if !(width > 0.0) {
                return Err(LabError::InvalidArgument(format!("bump width {width} must be positive")));
            }
            let m = unit(m_inf)?;
            let e = orthogonal_unit(m);
            let c = grid.length() / 2.0;
            let dim = grid.dim();
            SpinField::from_fn(grid, |x| {
                let r2: f64 = (0..dim).map(|a| (x[a] - c).powi(2)).sum();
                let b = amplitude * (-r2 / (width * width)).exp();
                [m[0] + b * e[0], m[1] + b * e[1], m[2] + b * e[2]]
            })
        }
        InitialDataSpec::RoughMollified { m_inf, amplitude, k, seed } => {
            let raw = rough_raw_field(grid, m_inf, amplitude, seed)?;
            Ok(mollify_and_project(&raw, k)?.0)
        }
    }
}

/// `Π(m_inf + a·ξ)` with `ξ` i.i.d. standard normal per point and component,
/// drawn in row-major order.
pub fn rough_raw_field(grid: &Grid, m_inf: [f64; 3], amplitude: f64, seed: u64) -> Result<SpinField> {
    let m = unit(m_inf)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noise = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        let z: [f64; 3] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
        noise.push([m[0] + amplitude * z[0], m[1] + amplitude * z[1], m[2] + amplitude * z[2]]);
    }
    SpinField::from_vectors(VectorField::from_fn(grid, |i| noise[i]))
}

/// Unit-mass samples of `k^n φ(k x)`, `φ ∝ exp(-1/(1-|x|²))` on the unit ball,
/// wrapped onto the torus.
pub fn mollifier_kernel(grid: &Grid, k: f64) -> Result<Vec<f64>> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(LabError::InvalidArgument(format!("mollification k = {k} must be positive")));
    }
    let h = grid.spacing();
    let n = grid.n();
    let mut w: Vec<f64> = (0..grid.len())
        .map(|j| {
            let idx = grid.multi_index(j);
            let r2: f64 = (0..grid.dim())
                .map(|a| {
                    let d = idx[a].min(n - idx[a]) as f64 * h * k;
                    d * d
                })
                .sum();
            if r2 < 1.0 {
                (-1.0 / (1.0 - r2)).exp()
            } else {
                0.0
            }
        })
        .collect();
    let total: f64 = w.iter().sum();
    if total == 0.0 {
        // Support narrower than one cell: the identity.
        w[0] = 1.0;
    } else {
        w.iter_mut().for_each(|x| *x /= total);
    }
    Ok(w)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MollificationReport {
    pub k: f64,
    pub raw_grad_m22: f64,
    pub mollified_grad_m22: f64,
    /// `‖∇m0^k‖ / ‖∇m0_raw‖` in `M^{2,2}`.
    pub ratio: f64,
    pub min_norm: f64,
    pub max_norm: f64,
}

/// `‖∇m‖_{M^{2,q}}` with `q = min(2, n)`.
pub fn gradient_m22(m: &VectorField) -> Result<f64> {
    let grid = m.grid();
    let q = 2.0_f64.min(grid.dim() as f64);
    Ok(morrey_norm(&gradient_norm(m), 2.0, q, &BallLattice::standard(grid))?.value)
}

/// Convolves with the mollifier at scale `1/k`, checks the modulus stays in
/// `[3/4, 1]`, and projects back to the sphere.
pub fn mollify_and_project(raw: &SpinField, k: f64) -> Result<(SpinField, MollificationReport)> {
    let grid = raw.grid().clone();
    let kernel = Spectrum::from_real(&mollifier_kernel(&grid, k)?, &grid);
    let comps: Vec<Vec<f64>> = (0..3)
        .map(|c| {
            let s = Spectrum::from_real(raw.as_vector().component(c), &grid);
            let kh = kernel.coeffs();
            s.apply(|j| kh[j]).into_real().into_values()
        })
        .collect();
    let [c0, c1, c2]: [Vec<f64>; 3] = comps.try_into().expect("three components");
    let smooth = VectorField::new(grid.clone(), [c0, c1, c2])?;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    for i in 0..smooth.len() {
        let r = norm3(smooth.get(i));
        lo = lo.min(r);
        hi = hi.max(r);
    }
    if lo < MIN_MOLLIFIED_NORM {
        return Err(LabError::MollificationTooWeak { min_norm: lo });
    }
    let projected = SpinField::from_vectors(smooth)?;
    let raw_g = gradient_m22(raw.as_vector())?;
    let out_g = gradient_m22(projected.as_vector())?;
    let ratio = if raw_g == 0.0 { 0.0 } else { out_g / raw_g };
    Ok((projected, MollificationReport { k, raw_grad_m22: raw_g, mollified_grad_m22: out_g, ratio, min_norm: lo, max_norm: hi }))
}

/// Generic `n`-component data for the mild solver: Gaussian bumps of width
/// `0.6` with distinct centres, phases and amplitudes, scaled so that
/// `‖v0‖_{M^{2,2}}` equals `m22`. A single plane wave would make `F` vanish.
pub fn generic_cgl_data(grid: &Grid, m22: f64) -> Result<Vec<ComplexField>> {
    use num_complex::Complex64;
    let n = grid.dim();
    let c = grid.length() / 2.0;
    let shifts = [[0.0, 0.0, 0.0], [-0.64, 0.66, 0.3], [0.5, -0.4, -0.6]];
    let raw: Vec<ComplexField> = (0..n)
        .map(|l| {
            grid.sample_complex(|x| {
                let r2: f64 = (0..n).map(|a| (x[a] - c - shifts[l][a]).powi(2)).sum();
                let phase = if l == 0 { x[0] + if n > 1 { 0.5 * x[1] } else { 0.0 } } else { -x[l] };
                Complex64::new(0.0, phase).exp() * Complex64::i().powu(l as u32) * 0.7_f64.powi(l as i32) * (-r2 / 0.36).exp()
            })
        })
        .collect();
    let q = 2.0_f64.min(n as f64);
    let base = morrey_norm(&pointwise_norm(&raw), 2.0, q, &BallLattice::standard(grid))?.value;
    Ok(raw.iter().map(|f| f.scale(Complex64::new(m22 / base, 0.0))).collect())
}

/// Exponent pairs `(p, p̃)` of the decay suite, all with `q = 2`.
pub const DECAY_PAIRS: [(f64, f64); 3] = [(2.0, 2.0), (2.0, 4.0), (2.0, 6.0)];

/// Gaussian bump centred in the box, `σ = width_cells · h`.
pub fn decay_bump(grid: &Grid, width_cells: f64) -> ComplexField {
    let c = grid.length() / 2.0;
    let sigma = width_cells * grid.spacing();
    let dim = grid.dim();
    grid.sample_complex(|x| {
        let r2: f64 = (0..dim).map(|a| (x[a] - c).powi(2)).sum();
        num_complex::Complex64::new((-r2 / (2.0 * sigma * sigma)).exp(), 0.0)
    })
}

/// Value and gradient decay ratios for every bump width and every pair in
/// [`DECAY_PAIRS`] with `p̃ <= p(n+1)`, sampled at `samples` log-spaced times
/// in `[t0, t1]`.
pub fn decay_suite(grid: &Grid, lambda: f64, widths: &[f64], t0: f64, t1: f64, samples: usize, c_max: f64) -> Result<Vec<(f64, DecayReport)>> {
    let params = SemigroupParams::new(lambda, grid)?;
    let lattice = BallLattice::standard(grid);
    let times = log_spaced(t0, t1, samples);
    let q = 2.0_f64.min(grid.dim() as f64);
    let mut out = Vec::new();
    for &w in widths {
        let f = decay_bump(grid, w);
        for &(p, pt) in DECAY_PAIRS.iter().filter(|(p, pt)| *pt <= p * (grid.dim() as f64 + 1.0)) {
            for kind in [DecayKind::Value, DecayKind::Gradient] {
                out.push((w, verify_decay(&f, p, pt, q, &times, &params, kind, &lattice, c_max)?));
            }
        }
    }
    Ok(out)
}

/// Resolution of one cross-validation pass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossValidationConfig {
    /// Uniform intervals of the mild solver; also the comparison times.
    pub cgl_steps: usize,
    /// Direct-solver steps per mild-solver interval.
    pub llg_substeps: usize,
    pub duhamel_substeps: usize,
    pub picard_tol: f64,
    pub p: f64,
    pub scheme: Scheme,
}

impl CrossValidationConfig {
    /// Default resolution for a grid: the direct step stays under the
    /// stability cap.
    pub fn for_grid(grid: &Grid, lambda: f64, t_final: f64, cgl_steps: usize) -> CrossValidationConfig {
        let cap = crate::llg::stability_cap(grid, lambda);
        let interval = t_final / cgl_steps as f64;
        CrossValidationConfig {
            cgl_steps,
            llg_substeps: (interval / cap).ceil().max(1.0) as usize,
            duhamel_substeps: 8,
            picard_tol: 1e-14,
            p: 3.2,
            scheme: Scheme::Rk4,
        }
    }

    pub fn refined(&self) -> CrossValidationConfig {
        CrossValidationConfig { cgl_steps: 2 * self.cgl_steps, ..*self }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscrepancyReport {
    pub times: Vec<f64>,
    /// `‖ |∇m|_direct - |u|_mild ‖_{L²} / ‖ |∇m|_direct ‖_{L²}` per time.
    pub relative: Vec<f64>,
    pub max: f64,
    pub picard_iterations: usize,
}

impl DiscrepancyReport {
    pub const CSV_HEADER: &'static str = "t,relative_discrepancy";

    pub fn csv(&self) -> String {
        let mut s = format!("{}\n", Self::CSV_HEADER);
        for (t, d) in self.times.iter().zip(&self.relative) {
            s.push_str(&format!("{t:.17e},{d:.17e}\n"));
        }
        s
    }
}

/// Runs the direct LLG solver and the mild CGL solver from the same data and
/// compares the gauge-invariant fields `|∇m|` and `(Σ_k |u_k|²)^{1/2}`.
pub fn cross_validate(m0: &SpinField, lambda: f64, t_final: f64, cfg: &CrossValidationConfig) -> Result<DiscrepancyReport> {
    let grid = m0.grid().clone();
    let total = cfg.cgl_steps * cfg.llg_substeps;
    let mut llg_cfg = LlgConfig::new(&grid, lambda, t_final, t_final / total as f64, cfg.scheme)?;
    llg_cfg.output_every = cfg.llg_substeps;
    let (direct, _) = solve(m0, &llg_cfg)?;

    let mut cgl_cfg = CglConfig::new(lambda, cfg.p, t_final, cfg.cgl_steps)?;
    cgl_cfg.picard_tol = cfg.picard_tol;
    cgl_cfg.duhamel_substeps = cfg.duhamel_substeps;
    let mild = picard_iterate(&coulomb_u(m0)?, &cgl_cfg)?;

    if direct.len() != mild.trajectory.len() {
        return Err(LabError::InvalidArgument(format!("output counts differ: {} vs {}", direct.len(), mild.trajectory.len())));
    }
    let mut times = Vec::with_capacity(direct.len());
    let mut relative = Vec::with_capacity(direct.len());
    for ((t, m), (_, u)) in direct.iter().zip(mild.trajectory.iter()) {
        let a = gradient_norm(m.as_vector());
        let b = gradient_magnitude_from_u(u);
        let diff = a.zip_map(&b, |x, y| x - y).l2_norm();
        let base = a.l2_norm();
        times.push(t);
        relative.push(if base == 0.0 { diff } else { diff / base });
    }
    let max = relative.iter().cloned().fold(0.0, f64::max);
    Ok(DiscrepancyReport { times, relative, max, picard_iterations: mild.log.len() })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefinementStudy {
    pub coarse: DiscrepancyReport,
    pub fine: DiscrepancyReport,
}

impl RefinementStudy {
    pub fn ratio(&self) -> f64 {
        if self.fine.max == 0.0 {
            return f64::INFINITY;
        }
        self.coarse.max / self.fine.max
    }
}

pub fn refinement_study(m0: &SpinField, lambda: f64, t_final: f64, cfg: &CrossValidationConfig) -> Result<RefinementStudy> {
    Ok(RefinementStudy { coarse: cross_validate(m0, lambda, t_final, cfg)?, fine: cross_validate(m0, lambda, t_final, &cfg.refined())? })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// Two direct solves standing in for two weak solutions.
#[derive(Clone, Debug, PartialEq)]
pub struct GronwallRecord {
    pub times: Vec<f64>,
    /// `‖m⁽¹⁾(t) - m⁽²⁾(t)‖_{L²}`.
    pub difference: Vec<f64>,
    /// `t^{-1/2} ‖m⁽¹⁾(t) - m⁽²⁾(t)‖²_{L²}`, zero at `t = 0`.
    pub compensated: Vec<f64>,
    /// Output samples skipped before monotonicity is checked.
    pub transient: usize,
    pub grad_m22: f64,
    pub smallness_violated: bool,
    pub verdict: Verdict,
}

impl GronwallRecord {
    pub const CSV_HEADER: &'static str = "t,difference,compensated";

    pub fn csv(&self) -> String {
        let mut s = format!("{}\n", Self::CSV_HEADER);
        for i in 0..self.times.len() {
            s.push_str(&format!("{:.17e},{:.17e},{:.17e}\n", self.times[i], self.difference[i], self.compensated[i]));
        }
        s
    }
}

/// Relative slack allowed between consecutive compensated samples.
const MONOTONE_SLACK: f64 = 1e-9;

/// Solves twice and checks that `t^{-1/2}‖m⁽¹⁾ - m⁽²⁾‖²` does not increase
/// after `transient` output samples. The two configurations must produce
/// output at the same times. Data with `‖∇m0‖_{M^{2,2}} > eps0` can at best
/// be INCONCLUSIVE.
pub fn uniqueness_experiment(m0: &SpinField, first: &LlgConfig, second: &LlgConfig, transient: usize, eps0: f64) -> Result<GronwallRecord> {
    let (a, _) = solve(m0, first)?;
    let (b, _) = solve(m0, second)?;
    if a.len() != b.len() || a.times().iter().zip(b.times()).any(|(x, y)| (x - y).abs() > 1e-9 * x.abs().max(1.0)) {
        return Err(LabError::InvalidArgument("the two runs must share output times".into()));
    }
    let h = m0.grid().cell_volume();
    let mut difference = Vec::with_capacity(a.len());
    let mut compensated = Vec::with_capacity(a.len());
    for ((t, x), (_, y)) in a.iter().zip(b.iter()) {
        let mut s = 0.0;
        for i in 0..x.len() {
            let (p, q) = (x.get(i), y.get(i));
            s += (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2);
        }
        let d2 = s * h;
        difference.push(d2.sqrt());
        compensated.push(if t > 0.0 { d2 / t.sqrt() } else { 0.0 });
    }
    let grad_m22 = gradient_m22(m0.as_vector())?;
    let smallness_violated = grad_m22 > eps0;
    let start = transient.max(1).min(compensated.len());
    let monotone = compensated[start..].windows(2).all(|w| w[1] <= w[0] * (1.0 + MONOTONE_SLACK));
    let verdict = match (smallness_violated, monotone) {
        (true, _) => Verdict::Inconclusive,
        (false, true) => Verdict::Pass,
        (false, false) => Verdict::Fail,
    };
    Ok(GronwallRecord { times: a.times().to_vec(), difference, compensated, transient, grad_m22, smallness_violated, verdict })
}

/// Compensated sup-norms `t^{k/2}‖∇^k m(t)‖_∞` for `k = 1, 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecaySummary {
    pub times: Vec<f64>,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
    pub max_grad: f64,
    pub max_hess: f64,
    pub grad_bounded: bool,
    pub hess_bounded: bool,
}

impl DecaySummary {
    pub const CSV_HEADER: &'static str = "t,t_half_sup_grad,t_sup_hess";

    pub fn pass(&self) -> bool {
        self.grad_bounded && self.hess_bounded
    }

    pub fn csv(&self) -> String {
        let mut s = format!("{}\n", Self::CSV_HEADER);
        for i in 0..self.times.len() {
            s.push_str(&format!("{:.17e},{:.17e},{:.17e}\n", self.times[i], self.grad[i], self.hess[i]));
        }
        s
    }
}

/// Bounded means: after dropping the first 10% of the window, the maximum
/// over the second half is at most twice the maximum over the first half.
fn bounded_series(times: &[f64], s: &[f64]) -> bool {
    let t_end = match times.last() {
        Some(&t) if t > 0.0 => t,
        _ => return true,
    };
    let t0 = 0.1 * t_end;
    let mid = 0.5 * (t0 + t_end);
    let (mut first, mut second) = (0.0_f64, 0.0_f64);
    for (&t, &v) in times.iter().zip(s) {
        if !v.is_finite() {
            return false;
        }
        if t < t0 {
            continue;
        }
        if t <= mid {
            first = first.max(v);
        } else {
            second = second.max(v);
        }
    }
    second <= 2.0 * first
}

pub fn decay_report(ledger: &EnergyLedger) -> DecaySummary {
    let grad: Vec<f64> = ledger.times.iter().zip(&ledger.sup_grad).map(|(t, g)| t.sqrt() * g).collect();
    let hess: Vec<f64> = ledger.times.iter().zip(&ledger.sup_hess).map(|(t, g)| t * g).collect();
    DecaySummary {
        times: ledger.times.clone(),
        max_grad: grad.iter().cloned().fold(0.0, f64::max),
        max_hess: hess.iter().cloned().fold(0.0, f64::max),
        grad_bounded: bounded_series(&ledger.times, &grad),
        hess_bounded: bounded_series(&ledger.times, &hess),
        grad,
        hess,
    }
}

/// `‖∇m(t) - ∇m0‖_{L²}` for each stored time: the short-time `H¹` approach
/// to the data, reported without a threshold.
pub fn h1_approach(traj: &crate::trajectory::Trajectory<SpinField>) -> Vec<(f64, f64)> {
    let Some(m0) = traj.states().first() else { return Vec::new() };
    let g0 = m0.as_vector().gradient();
    traj.iter()
        .map(|(t, m)| {
            let g = m.as_vector().gradient();
            let mut s = 0.0;
            for (a, b) in g.iter().zip(&g0) {
                s += b.axpy(-1.0, a).l2_norm().powi(2);
            }
            (t, s.sqrt())
        })
        .collect()
}

/// Scalar `|∇m|` of a spin field; a convenience for CSV output.
pub fn gradient_field(m: &SpinField) -> ScalarField {
    gradient_norm(m.as_vector())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn closed_forms() {
        let g = Grid::new(1, 32, 2.0 * PI).unwrap();
        let c = generate_initial_data(&InitialDataSpec::Constant { m_inf: [0.0, 0.0, 2.0] }, &g).unwrap();
        assert!((0..g.len()).all(|i| c.get(i) == [0.0, 0.0, 1.0]));
        let w = generate_initial_data(&InitialDataSpec::EquatorialWave { amplitude: 0.1, wavenumber: 1.0 }, &g).unwrap();
        let x = g.coords(5)[0];
        let phi = 0.1 * x.sin();
        let v = w.get(5);
        assert!((v[0] - phi.cos()).abs() < 1e-15 && (v[1] - phi.sin()).abs() < 1e-15 && v[2] == 0.0);
        assert!(w.unit_defect() < 1e-15);
    }

    #[test]
    fn mollifier_has_unit_mass() {
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        for k in [0.5, 2.0, 8.0, 100.0] {
            let w = mollifier_kernel(&g, k).unwrap();
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            assert!(w.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn rough_data_is_seeded() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let spec = InitialDataSpec::RoughMollified { m_inf: [0.0, 0.0, 1.0], amplitude: 0.2, k: 2.0, seed: 3 };
        let a = generate_initial_data(&spec, &g).unwrap();
        let b = generate_initial_data(&spec, &g).unwrap();
        assert_eq!(a, b);
        let big = InitialDataSpec::RoughMollified { m_inf: [0.0, 0.0, 1.0], amplitude: 50.0, k: 0.5, seed: 3 };
        assert!(matches!(generate_initial_data(&big, &g), Err(LabError::MollificationTooWeak { .. })));
    }

    #[test]
    fn constant_data_gives_zero_discrepancy() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let m0 = SpinField::constant(&g, [0.0, 0.0, 1.0]).unwrap();
        let cfg = CrossValidationConfig::for_grid(&g, 1.0, 0.05, 5);
        let rep = cross_validate(&m0, 1.0, 0.05, &cfg).unwrap();
        assert_eq!(rep.max, 0.0);
        let d = decay_report(&solve(&m0, &LlgConfig::at_cap_fraction(&g, 1.0, 0.05, 2.0, Scheme::Rk2).unwrap()).unwrap().1);
        assert_eq!(d.max_grad, 0.0);
        assert!(d.pass());
    }

    #[test]
    fn identical_runs_pass_uniqueness() {
        let g = Grid::new(1, 32, 2.0 * PI).unwrap();
        let m0 = generate_initial_data(&InitialDataSpec::EquatorialWave { amplitude: 0.01, wavenumber: 1.0 }, &g).unwrap();
        let cfg = LlgConfig::at_cap_fraction(&g, 1.0, 0.05, 2.0, Scheme::Rk2).unwrap();
        let rec = uniqueness_experiment(&m0, &cfg, &cfg, 5, 0.05).unwrap();
        assert!(rec.difference.iter().all(|&d| d == 0.0));
        assert_eq!(rec.verdict, Verdict::Pass);
    }
}
