//! The dissipative Schrödinger semigroup `S(t)` generated by `(λ - i)Δ`,
//! applied as the Fourier multiplier `exp((i - λ)|ξ|² t)`, and Duhamel
//! quadrature.

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::field::{gradient, ComplexField, Grid, SpectralField, Spectrum};
use crate::morrey::{morrey_norm, pointwise_norm, BallLattice};

#[derive(Clone, Debug, PartialEq)]
pub struct SemigroupParams {
    lambda: f64,
    grid: Grid,
}

impl SemigroupParams {
    pub fn new(lambda: f64, grid: &Grid) -> Result<SemigroupParams> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(LabError::InvalidArgument(format!("damping lambda = {lambda} must be positive")));
        }
        Ok(SemigroupParams { lambda, grid: grid.clone() })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `exp((i - λ)|ξ|² t)` at a spectral index.
    #[inline]
    pub fn multiplier(&self, flat: usize, t: f64) -> Complex64 {
        (Complex64::new(-self.lambda, 1.0) * (self.grid.xi_squared(flat) * t)).exp()
    }

    fn check(&self, f: &ComplexField, t: f64) -> Result<()> {
        if *f.grid() != self.grid {
            return Err(LabError::GridMismatch);
        }
        if t < 0.0 || t.is_nan() {
            return Err(LabError::NegativeTime(t));
        }
        Ok(())
    }

    /// Spectrum of `S(t)f`.
    pub fn evolve_spectrum(&self, s: Spectrum, t: f64) -> Spectrum {
        if t == 0.0 {
            return s;
        }
        s.apply(|j| self.multiplier(j, t))
    }
}

pub fn apply_semigroup(f: &ComplexField, t: f64, params: &SemigroupParams) -> Result<ComplexField> {
    params.check(f, t)?;
    if t == 0.0 {
        return Ok(f.clone());
    }
    Ok(params.evolve_spectrum(f.spectrum(), t).into_complex())
}

/// `∇S(t)f`, one field per axis. Goes through [`apply_semigroup`] and the
/// shared spectral gradient so both routes agree bit for bit.
pub fn apply_grad_semigroup(f: &ComplexField, t: f64, params: &SemigroupParams) -> Result<Vec<ComplexField>> {
    Ok(gradient(&apply_semigroup(f, t, params)?))
}

/// Which quantity the compensated ratio tracks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecayKind {
    /// `t^{(q/2)(1/p - 1/p̃)} ‖S(t)f‖_{M^{p̃,q}} / ‖f‖_{M^{p,q}}`
    Value,
    /// `t^{1/2 + (q/2)(1/p - 1/p̃)} ‖∇S(t)f‖_{M^{p̃,q}} / ‖f‖_{M^{p,q}}`
    Gradient,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayReport {
    pub kind: DecayKind,
    pub p: f64,
    pub p_tilde: f64,
    pub q: f64,
    pub t_samples: Vec<f64>,
    pub norms: Vec<f64>,
    pub ratio_series: Vec<f64>,
    pub max_ratio: f64,
    pub c_max: f64,
}

impl DecayReport {
    pub fn bounded(&self) -> bool {
        self.max_ratio <= self.c_max
    }

    /// Max over the last decade of samples is at most twice the max over the
    /// first decade.
    pub fn no_upward_trend(&self) -> bool {
        let t0 = self.t_samples[0];
        let t1 = *self.t_samples.last().unwrap();
        let max_in = |lo: f64, hi: f64| {
            self.t_samples
                .iter()
                .zip(&self.ratio_series)
                .filter(|(t, _)| **t >= lo * (1.0 - 1e-12) && **t <= hi * (1.0 + 1e-12))
                .fold(0.0_f64, |m, (_, r)| m.max(*r))
        };
        max_in(t1 / 10.0, t1) <= 2.0 * max_in(t0, t0 * 10.0)
    }

    /// Samples with `t` in the last decade are non-increasing.
    pub fn non_increasing_final_decade(&self) -> bool {
        let t1 = *self.t_samples.last().unwrap();
        let tail: Vec<f64> = self.t_samples.iter().zip(&self.ratio_series).filter(|(t, _)| **t >= t1 / 10.0 * (1.0 - 1e-12)).map(|(_, r)| *r).collect();
        tail.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12))
    }

    pub fn pass(&self) -> bool {
        self.bounded() && self.no_upward_trend()
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("t,norm,compensated_ratio\n");
        for ((t, n), r) in self.t_samples.iter().zip(&self.norms).zip(&self.ratio_series) {
            out.push_str(&format!("{t},{n},{r}\n"));
        }
        out
    }
}

/// Compensated decay ratios of `S(t)f` (or its gradient) over `t_list`.
#[allow(clippy::too_many_arguments)]
pub fn verify_decay(
    f: &ComplexField,
    p: f64,
    p_tilde: f64,
    q: f64,
    t_list: &[f64],
    params: &SemigroupParams,
    kind: DecayKind,
    lattice: &BallLattice,
    c_max: f64,
) -> Result<DecayReport> {
    let n = params.grid.dim() as f64;
    if !(p <= p_tilde && p_tilde <= p * (n + 1.0) * (1.0 + 1e-12)) {
        return Err(LabError::InvalidArgument(format!("need p <= p_tilde <= p(n+1), got p = {p}, p_tilde = {p_tilde}")));
    }
    if t_list.is_empty() || t_list.iter().any(|&t| !(t > 0.0)) {
        return Err(LabError::InvalidArgument("sample times must be positive".into()));
    }
    let (lo, hi) = t_list.iter().fold((f64::INFINITY, 0.0_f64), |(a, b), &t| (a.min(t), b.max(t)));
    if hi / lo < 100.0 * (1.0 - 1e-12) {
        return Err(LabError::InvalidArgument("sample times must span at least two decades".into()));
    }
    let base = morrey_norm(&f.abs(), p, q, lattice)?.value;
    if base == 0.0 {
        return Err(LabError::ZeroField);
    }
    let spec = f.spectrum();
    let shift = (q / 2.0) * (1.0 / p - 1.0 / p_tilde);
    let mut norms = Vec::with_capacity(t_list.len());
    let mut ratios = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let evolved = params.evolve_spectrum(spec.clone(), t);
        let (mag, power) = match kind {
            DecayKind::Value => (evolved.into_complex().abs(), shift),
            DecayKind::Gradient => {
                let g: Vec<ComplexField> = (0..params.grid.dim()).map(|a| evolved.clone().differentiate(a, 1).into_complex()).collect();
                (pointwise_norm(&g), 0.5 + shift)
            }
        };
        let norm = morrey_norm(&mag, p_tilde, q, lattice)?.value;
        norms.push(norm);
        ratios.push(t.powf(power) * norm / base);
    }
    let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    Ok(DecayReport { kind, p, p_tilde, q, t_samples: t_list.to_vec(), norms, ratio_series: ratios, max_ratio, c_max })
}

/// `count` log-spaced samples on `[t0, t1]`.
pub fn log_spaced(t0: f64, t1: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![t0];
    }
    let (a, b) = (t0.ln(), t1.ln());
    (0..count).map(|j| (a + (b - a) * j as f64 / (count - 1) as f64).exp()).collect()
}

/// `∫_0^t S(t-s) F(s) ds` by the midpoint exponential product rule over
/// `steps` equal intervals.
pub fn duhamel_integral<F>(forcing: F, t: f64, steps: usize, params: &SemigroupParams) -> Result<ComplexField>
where
    F: Fn(f64) -> Result<ComplexField>,
{
    if steps == 0 {
        return Err(LabError::InvalidArgument("steps must be >= 1".into()));
    }
    if t < 0.0 || t.is_nan() {
        return Err(LabError::NegativeTime(t));
    }
    let ds = t / steps as f64;
    let mut acc = Spectrum::zeros(&params.grid);
    for j in 0..steps {
        let s = (j as f64 + 0.5) * ds;
        let f = forcing(s)?;
        if *f.grid() != params.grid {
            return Err(LabError::GridMismatch);
        }
        let piece = params.evolve_spectrum(f.spectrum(), t - s).apply(|_| Complex64::new(ds, 0.0));
        acc.add_assign(&piece);
    }
    Ok(acc.into_complex())
}

/// Per-mode weights of one interval of the Duhamel recursion when the
/// forcing is linear in time between nodes:
/// `I_{m+1} = E I_m + W0 F_m + W1 F_{m+1}` (all in spectral space), with the
/// interval integral taken by the composite midpoint exponential rule on
/// `substeps` sub-intervals.
#[derive(Clone, Debug)]
pub struct DuhamelStepper {
    propagator: Vec<Complex64>,
    w0: Vec<Complex64>,
    w1: Vec<Complex64>,
}

impl DuhamelStepper {
    pub fn new(params: &SemigroupParams, dt: f64, substeps: usize) -> Result<DuhamelStepper> {
        if substeps == 0 {
            return Err(LabError::InvalidArgument("substeps must be >= 1".into()));
        }
        if !(dt > 0.0) {
            return Err(LabError::InvalidArgument(format!("interval length {dt} must be positive")));
        }
        let grid = &params.grid;
        let k = substeps as f64;
        let h = dt / k;
        let mut propagator = Vec::with_capacity(grid.len());
        let mut w0 = Vec::with_capacity(grid.len());
        let mut w1 = Vec::with_capacity(grid.len());
        // Weights depend only on |ξ|², which takes few distinct values.
        let mut cache: std::collections::HashMap<u64, (Complex64, Complex64, Complex64)> = Default::default();
        for j in 0..grid.len() {
            let xi2 = grid.xi_squared(j);
            let entry = *cache.entry(xi2.to_bits()).or_insert_with(|| {
                let z = Complex64::new(-params.lambda, 1.0) * xi2;
                let mut a = Complex64::new(0.0, 0.0);
                let mut b = Complex64::new(0.0, 0.0);
                for s in 0..substeps {
                    let theta = (s as f64 + 0.5) / k;
                    let e = (z * (dt - theta * dt)).exp() * h;
                    a += e * (1.0 - theta);
                    b += e * theta;
                }
                ((z * dt).exp(), a, b)
            });
            propagator.push(entry.0);
            w0.push(entry.1);
            w1.push(entry.2);
        }
        Ok(DuhamelStepper { propagator, w0, w1 })
    }

    /// Advances the accumulated integral across one interval, in place.
    pub fn advance(&self, integral: &mut [Complex64], f_left: &[Complex64], f_right: &[Complex64]) {
        for j in 0..integral.len() {
            integral[j] = self.propagator[j] * integral[j] + self.w0[j] * f_left[j] + self.w1[j] * f_right[j];
        }
    }

    pub fn propagator(&self) -> &[Complex64] {
        &self.propagator
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn max_err(a: &ComplexField, b: &ComplexField) -> f64 {
        a.values().iter().zip(b.values()).fold(0.0_f64, |m, (x, y)| m.max((x - y).norm()))
    }

    #[test]
    fn plane_wave_is_an_eigenfunction() {
        let g = Grid::new(1, 16, 2.0 * PI).unwrap();
        let params = SemigroupParams::new(1.0, &g).unwrap();
        let f = g.sample_complex(|x| Complex64::new(0.0, x[0]).exp());
        let out = apply_semigroup(&f, 0.5, &params).unwrap();
        let factor = (Complex64::new(-1.0, 1.0) * 0.5).exp();
        assert!(max_err(&out, &f.scale(factor)) < 1e-14);
        assert!((factor.norm() - 0.60653).abs() < 1e-5);
        assert_eq!(apply_semigroup(&f, 0.0, &params).unwrap(), f);
        assert_eq!(apply_semigroup(&f, -1.0, &params), Err(LabError::NegativeTime(-1.0)));
        assert!(SemigroupParams::new(0.0, &g).is_err());
    }

    #[test]
    fn gradient_examples() {
        let g = Grid::new(1, 16, 2.0 * PI).unwrap();
        let params = SemigroupParams::new(1.0, &g).unwrap();
        let f = g.sample_complex(|x| Complex64::new(0.0, x[0]).exp());
        let d = apply_grad_semigroup(&f, 0.0, &params).unwrap();
        assert!(max_err(&d[0], &f.scale(Complex64::new(0.0, 1.0))) < 1e-13);
        let c = g.sample_complex(|_| Complex64::new(2.0, -1.0));
        assert!(apply_grad_semigroup(&c, 0.3, &params).unwrap()[0].sup_norm() < 1e-14);

        let g2 = Grid::new(2, 16, 2.0 * PI).unwrap();
        let params = SemigroupParams::new(0.7, &g2).unwrap();
        let f = g2.sample_complex(|x| Complex64::new(x[0].sin(), (2.0 * x[1]).cos()));
        let grad = apply_grad_semigroup(&f, 0.2, &params).unwrap();
        let via = gradient(&apply_semigroup(&f, 0.2, &params).unwrap());
        for (a, b) in grad.iter().zip(&via) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn duhamel_constant_forcing_closed_form() {
        let g = Grid::new(1, 16, 2.0 * PI).unwrap();
        let params = SemigroupParams::new(1.0, &g).unwrap();
        let f = g.sample_complex(|x| Complex64::new(0.0, x[0]).exp());
        let t = 0.5;
        let out = duhamel_integral(|_| Ok(f.clone()), t, 64, &params).unwrap();
        let z = Complex64::new(-1.0, 1.0);
        let exact = f.scale((Complex64::new(1.0, 0.0) - (z * t).exp()) / Complex64::new(1.0, -1.0));
        assert!(max_err(&out, &exact) / exact.sup_norm() < 1e-4);

        let zero = duhamel_integral(|_| Ok(ComplexField::zeros(&g)), t, 8, &params).unwrap();
        assert_eq!(zero.sup_norm(), 0.0);
        assert!(duhamel_integral(|_| Ok(f.clone()), t, 0, &params).is_err());
    }

    #[test]
    fn duhamel_is_second_order() {
        let g = Grid::new(1, 16, 2.0 * PI).unwrap();
        let params = SemigroupParams::new(1.0, &g).unwrap();
        let forcing = |s: f64| Ok(g.sample_complex(|x| Complex64::new(0.0, x[0]).exp() * (3.0 * s).cos()));
        let t = 0.5;
        // Per-mode closed form with z = i - 1 for k = 1:
        // ∫ e^{z(t-s)} cos(3s) ds.
        let z = Complex64::new(-1.0, 1.0);
        let i3 = Complex64::new(0.0, 3.0);
        let term = |w: Complex64| ((w * t).exp() - (z * t).exp()) / (w - z);
        let exact_coeff = (term(i3) + term(-i3)) * 0.5;
        let exact = g.sample_complex(|x| Complex64::new(0.0, x[0]).exp() * exact_coeff);
        let e1 = max_err(&duhamel_integral(forcing, t, 16, &params).unwrap(), &exact);
        let e2 = max_err(&duhamel_integral(forcing, t, 32, &params).unwrap(), &exact);
        assert!(e1 / e2 >= 3.5, "ratio {}", e1 / e2);
    }

    #[test]
    fn stepper_matches_direct_midpoint_sum_for_linear_forcing() {
        let g = Grid::new(1, 16, 2.0 * PI).unwrap();
        let params = SemigroupParams::new(1.0, &g).unwrap();
        let t = 0.4;
        let intervals = 4;
        let sub = 3;
        let dt = t / intervals as f64;
        let shape = g.sample_complex(|x| Complex64::new(x[0].cos(), (2.0 * x[0]).sin()));
        let forcing = |s: f64| Ok(shape.scale(Complex64::new(1.0 + 2.0 * s, 0.0)));
        let direct = duhamel_integral(forcing, t, intervals * sub, &params).unwrap();
        let stepper = DuhamelStepper::new(&params, dt, sub).unwrap();
        let mut acc = vec![Complex64::new(0.0, 0.0); g.len()];
        for m in 0..intervals {
            let l = forcing(m as f64 * dt).unwrap().spectrum();
            let r = forcing((m + 1) as f64 * dt).unwrap().spectrum();
            stepper.advance(&mut acc, l.coeffs(), r.coeffs());
        }
        let mut spec = Spectrum::zeros(&g);
        spec.coeffs_mut().copy_from_slice(&acc);
        assert!(max_err(&spec.into_complex(), &direct) < 1e-13);
    }

    #[test]
    fn decay_examples() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let params = SemigroupParams::new(1.0, &g).unwrap();
        let lat = BallLattice::full(&g);
        let ts = log_spaced(1e-3, 1e-1, 9);
        let wave = g.sample_complex(|x| Complex64::new(0.0, 3.0 * x[0]).exp());
        let rep = verify_decay(&wave, 2.0, 4.0, 2.0, &ts, &params, DecayKind::Value, &lat, 50.0).unwrap();
        assert!(rep.pass());
        assert_eq!(rep.ratio_series.len(), ts.len());

        let rep = verify_decay(&wave, 2.0, 2.0, 2.0, &ts, &params, DecayKind::Value, &lat, 1.1).unwrap();
        assert!(rep.pass() && rep.max_ratio <= 1.0 + 1e-12);

        assert_eq!(verify_decay(&ComplexField::zeros(&g), 2.0, 4.0, 2.0, &ts, &params, DecayKind::Value, &lat, 50.0), Err(LabError::ZeroField));
        assert!(verify_decay(&wave, 2.0, 7.0, 2.0, &ts, &params, DecayKind::Value, &lat, 50.0).is_err());
        assert!(verify_decay(&wave, 2.0, 4.0, 2.0, &ts[..3], &params, DecayKind::Value, &lat, 50.0).is_err());
        let csv = rep.csv();
        assert!(csv.starts_with("t,norm,compensated_ratio\n"));
        assert_eq!(csv.lines().count(), ts.len() + 1);
    }
}
