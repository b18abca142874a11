//! Moving frames along a spin field, the complex derivative coefficients
//! `u`, the connection `a`, gauge changes and the elliptic gauge-field
//! solves.
//!
//! The frame is the rotation taking `e3` to `m` about the axis `e3 × m`,
//! applied to `e1, e2`:
//!
//! ```text
//! X = e1 - m1/(1+m3) (m + e3),   Y = e2 - m2/(1+m3) (m + e3)
//! ```
//!
//! It is smooth away from `m = -e3`.

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::field::{cross3, derivative, dot3, inverse_laplacian_of_divergence, norm3, ComplexField, ScalarField, SpectralField, SpinField, VectorField};

/// Samples with `m3` below this are rejected.
pub const POLE_EXCLUSION: f64 = -1.0 + 0.05;

#[derive(Clone, Debug, PartialEq)]
pub struct TangentFrame {
    pub x: VectorField,
    pub y: VectorField,
}

impl TangentFrame {
    /// Largest violation of orthonormality, tangency and `X × Y = m`.
    pub fn defect(&self, m: &SpinField) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..m.len() {
            let (x, y, mi) = (self.x.get(i), self.y.get(i), m.get(i));
            let c = cross3(x, y);
            let errs = [
                (norm3(x) - 1.0).abs(),
                (norm3(y) - 1.0).abs(),
                dot3(x, y).abs(),
                dot3(x, mi).abs(),
                dot3(y, mi).abs(),
                norm3([c[0] - mi[0], c[1] - mi[1], c[2] - mi[2]]),
            ];
            worst = errs.iter().fold(worst, |w, e| w.max(*e));
        }
        worst
    }

    /// Rotates the frame by angle `theta` so that `X + iY` becomes
    /// `e^{-iθ}(X + iY)`, matching [`gauge_transform`].
    pub fn rotate(&self, theta: &ScalarField) -> TangentFrame {
        let grid = self.x.grid();
        let mut x = VectorField::zeros(grid);
        let mut y = VectorField::zeros(grid);
        for (i, &th) in theta.values().iter().enumerate() {
            let (s, c) = th.sin_cos();
            let (xi, yi) = (self.x.get(i), self.y.get(i));
            x.set(i, [c * xi[0] + s * yi[0], c * xi[1] + s * yi[1], c * xi[2] + s * yi[2]]);
            y.set(i, [c * yi[0] - s * xi[0], c * yi[1] - s * xi[1], c * yi[2] - s * xi[2]]);
        }
        TangentFrame { x, y }
    }

    /// `Re(w) X + Im(w) Y` pointwise.
    pub fn synthesize(&self, w: &ComplexField) -> VectorField {
        VectorField::from_fn(self.x.grid(), |i| {
            let (x, y, c) = (self.x.get(i), self.y.get(i), w.values()[i]);
            [c.re * x[0] + c.im * y[0], c.re * x[1] + c.im * y[1], c.re * x[2] + c.im * y[2]]
        })
    }

    /// `⟨v, X⟩ + i⟨v, Y⟩` pointwise.
    pub fn project(&self, v: &VectorField) -> ComplexField {
        let values = (0..v.len()).map(|i| Complex64::new(dot3(v.get(i), self.x.get(i)), dot3(v.get(i), self.y.get(i)))).collect();
        ComplexField::new(self.x.grid().clone(), values).expect("same grid")
    }
}

pub fn build_frame(m: &SpinField) -> Result<TangentFrame> {
    let grid = m.grid();
    let mut x = VectorField::zeros(grid);
    let mut y = VectorField::zeros(grid);
    for i in 0..m.len() {
        let v = m.get(i);
        if v[2] < POLE_EXCLUSION {
            return Err(LabError::PoleProximity { index: i, m3: v[2] });
        }
        let s = [v[0], v[1], v[2] + 1.0];
        let c1 = v[0] / (1.0 + v[2]);
        let c2 = v[1] / (1.0 + v[2]);
        x.set(i, [1.0 - c1 * s[0], -c1 * s[1], -c1 * s[2]]);
        y.set(i, [-c2 * s[0], 1.0 - c2 * s[1], -c2 * s[2]]);
    }
    Ok(TangentFrame { x, y })
}

/// Derivative coefficients and connection of one snapshot in one gauge.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeState {
    /// `u_k = ⟨∂_k m, X⟩ + i⟨∂_k m, Y⟩`
    pub u: Vec<ComplexField>,
    /// `u_0 = ⟨∂_t m, X⟩ + i⟨∂_t m, Y⟩`
    pub u0: ComplexField,
    /// `a_k = ⟨∂_k X, Y⟩`
    pub a: Vec<ScalarField>,
    /// Temporal connection `⟨∂_t X, Y⟩`, when the frame's time derivative
    /// was supplied.
    pub a0: Option<ScalarField>,
    pub a0_1: ScalarField,
    pub a0_2: ScalarField,
    /// Accumulated gauge phase (mean zero).
    pub theta: ScalarField,
}

/// Frames at `t - δ` and `t + δ` for the centered temporal connection.
#[derive(Clone, Copy, Debug)]
pub struct FrameTimePair<'a> {
    pub before: &'a TangentFrame,
    pub after: &'a TangentFrame,
    pub delta: f64,
}

pub fn derive_gauge(m: &SpinField, dt_m: &VectorField, frame: &TangentFrame, time_pair: Option<FrameTimePair<'_>>) -> Result<GaugeState> {
    let grid = m.grid().clone();
    if *dt_m.grid() != grid || *frame.x.grid() != grid {
        return Err(LabError::GridMismatch);
    }
    let normal = (0..m.len()).fold(0.0_f64, |w, i| w.max(dot3(dt_m.get(i), m.get(i)).abs()));
    if normal > 1e-8 {
        return Err(LabError::NonTangential(normal));
    }
    let u = m.as_vector().gradient().iter().map(|d| frame.project(d)).collect();
    let u0 = frame.project(dt_m);
    let a = frame
        .x
        .gradient()
        .iter()
        .map(|dx| {
            let v = (0..m.len()).map(|i| dot3(dx.get(i), frame.y.get(i))).collect();
            ScalarField::new(grid.clone(), v).expect("same grid")
        })
        .collect();
    let a0 = time_pair.map(|tp| {
        let v = (0..m.len())
            .map(|i| {
                let (b, f) = (tp.before.x.get(i), tp.after.x.get(i));
                let dx = [(f[0] - b[0]) / (2.0 * tp.delta), (f[1] - b[1]) / (2.0 * tp.delta), (f[2] - b[2]) / (2.0 * tp.delta)];
                dot3(dx, frame.y.get(i))
            })
            .collect();
        ScalarField::new(grid.clone(), v).expect("same grid")
    });
    Ok(GaugeState { u, u0, a, a0, a0_1: ScalarField::zeros(&grid), a0_2: ScalarField::zeros(&grid), theta: ScalarField::zeros(&grid) })
}

fn rotate(u: &ComplexField, theta: &ScalarField) -> ComplexField {
    let values = u.values().iter().zip(theta.values()).map(|(z, &th)| z * Complex64::from_polar(1.0, -th)).collect();
    ComplexField::new(u.grid().clone(), values).expect("same grid")
}

/// `u -> e^{-iθ} u`, `a_α -> a_α + ∂_α θ`.
pub fn gauge_transform(state: &GaugeState, theta: &ScalarField) -> GaugeState {
    let a = state.a.iter().enumerate().map(|(axis, a)| a.zip_map(&derivative(theta, axis, 1).expect("axis in range"), |x, y| x + y)).collect();
    GaugeState {
        u: state.u.iter().map(|f| rotate(f, theta)).collect(),
        u0: rotate(&state.u0, theta),
        a,
        a0: state.a0.clone(),
        a0_1: state.a0_1.clone(),
        a0_2: state.a0_2.clone(),
        theta: state.theta.zip_map(theta, |x, y| x + y),
    }
}

/// The phase `θ = (-Δ)^{-1} div a` that makes the connection divergence free.
pub fn coulomb_phase(a: &[ScalarField]) -> Result<ScalarField> {
    inverse_laplacian_of_divergence(a)
}

pub fn coulomb_gauge_fix(state: &GaugeState) -> Result<GaugeState> {
    Ok(gauge_transform(state, &coulomb_phase(&state.a)?))
}

/// Spatial connection and both parts of the temporal connection, recovered
/// from `u` alone under the Coulomb gauge.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeFields {
    pub a: Vec<ScalarField>,
    pub a0_1: ScalarField,
    pub a0_2: ScalarField,
}

impl GaugeFields {
    pub fn a0(&self) -> ScalarField {
        self.a0_1.zip_map(&self.a0_2, |x, y| x + y)
    }
}

/// Solves, with every mean mode removed,
///
/// ```text
/// -Δ a_β    = div Im(u_β ū)
/// -Δ a0_1   = div [λ Im(ū div u) - Re(ū div u)]
/// -Δ a0_2   = div [λ Re((a·u) ū) + Im((a·u) ū)]
/// ```
pub fn gauge_fields_from_u(u: &[ComplexField], lambda: f64) -> Result<GaugeFields> {
    let first = u.first().ok_or_else(|| LabError::InvalidArgument("empty u".into()))?;
    let grid = first.grid().clone();
    let n = grid.dim();
    if u.len() != n {
        return Err(LabError::InvalidArgument(format!("u needs {n} components, got {}", u.len())));
    }
    let len = grid.len();
    let real = |f: &dyn Fn(usize) -> f64| ScalarField::new(grid.clone(), (0..len).map(f).collect()).expect("same grid");

    let mut a = Vec::with_capacity(n);
    for beta in 0..n {
        let src: Vec<ScalarField> = (0..n).map(|alpha| real(&|i| (u[beta].values()[i] * u[alpha].values()[i].conj()).im)).collect();
        a.push(inverse_laplacian_of_divergence(&src)?);
    }

    let div_u = crate::field::divergence(u)?;
    let src1: Vec<ScalarField> = (0..n)
        .map(|alpha| {
            real(&|i| {
                let w = u[alpha].values()[i].conj() * div_u.values()[i];
                lambda * w.im - w.re
            })
        })
        .collect();
    let a0_1 = inverse_laplacian_of_divergence(&src1)?;

    let a_dot_u: Vec<Complex64> = (0..len).map(|i| (0..n).map(|k| u[k].values()[i] * a[k].values()[i]).sum()).collect();
    let src2: Vec<ScalarField> = (0..n)
        .map(|alpha| {
            real(&|i| {
                let w = a_dot_u[i] * u[alpha].values()[i].conj();
                lambda * w.re + w.im
            })
        })
        .collect();
    let a0_2 = inverse_laplacian_of_divergence(&src2)?;
    Ok(GaugeFields { a, a0_1, a0_2 })
}

/// Fills `a0_1`, `a0_2` of a Coulomb-gauge state from its `u`.
pub fn with_temporal_gauge(state: &GaugeState, lambda: f64) -> Result<GaugeState> {
    let g = gauge_fields_from_u(&state.u, lambda)?;
    Ok(GaugeState { a0_1: g.a0_1, a0_2: g.a0_2, ..state.clone() })
}

/// `D_k u = ∂_k u + i a_k u`.
pub fn covariant_derivative(u: &ComplexField, a: &ScalarField, axis: usize) -> Result<ComplexField> {
    let d = derivative(u, axis, 1)?;
    let values = d.values().iter().zip(u.values()).zip(a.values()).map(|((dv, uv), &av)| dv + Complex64::new(0.0, av) * uv).collect();
    ComplexField::new(u.grid().clone(), values)
}

/// `Σ_k D_k u_k`.
pub fn covariant_divergence(u: &[ComplexField], a: &[ScalarField]) -> Result<ComplexField> {
    let mut acc = ComplexField::zeros(u[0].grid());
    for k in 0..u.len() {
        acc = acc.add(&covariant_derivative(&u[k], &a[k], k)?);
    }
    Ok(acc)
}

/// Sup-norm residuals of the structural identities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityResiduals {
    /// `D_α u_β - D_β u_α`
    pub torsion: f64,
    /// `∂_α a_β - ∂_β a_α - Im(u_α ū_β)`
    pub curvature: f64,
    /// `u_0 - (λ - i) Σ D_k u_k`
    pub u0_eq: f64,
    /// `Δm + |∇m|² m - (Re(w) X + Im(w) Y)`, `w = Σ D_k u_k`
    pub tension: f64,
}

impl IdentityResiduals {
    pub const CSV_HEADER: &'static str = "torsion,curvature,u0_eq,tension";

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{}", self.torsion, self.curvature, self.u0_eq, self.tension)
    }

    pub fn max(&self) -> f64 {
        self.torsion.max(self.curvature).max(self.u0_eq).max(self.tension)
    }
}

/// `Δm + |∇m|² m` pointwise.
pub fn tension_field(m: &SpinField) -> VectorField {
    let lap = m.as_vector().laplacian();
    let grad = m.as_vector().gradient();
    VectorField::from_fn(m.grid(), |i| {
        let g2: f64 = grad.iter().map(|d| dot3(d.get(i), d.get(i))).sum();
        let (l, v) = (lap.get(i), m.get(i));
        [l[0] + g2 * v[0], l[1] + g2 * v[1], l[2] + g2 * v[2]]
    })
}

pub fn check_identities(m: &SpinField, frame: &TangentFrame, state: &GaugeState, lambda: f64) -> Result<IdentityResiduals> {
    let n = m.grid().dim();
    let sup = |f: &ComplexField| f.sup_norm();
    let mut torsion = 0.0_f64;
    let mut curvature = 0.0_f64;
    for alpha in 0..n {
        for beta in (alpha + 1)..n {
            let lhs = covariant_derivative(&state.u[beta], &state.a[alpha], alpha)?;
            let rhs = covariant_derivative(&state.u[alpha], &state.a[beta], beta)?;
            torsion = torsion.max(sup(&lhs.sub(&rhs)));
            let dab = derivative(&state.a[beta], alpha, 1)?;
            let dba = derivative(&state.a[alpha], beta, 1)?;
            for i in 0..m.len() {
                let im = (state.u[alpha].values()[i] * state.u[beta].values()[i].conj()).im;
                curvature = curvature.max((dab.values()[i] - dba.values()[i] - im).abs());
            }
        }
    }
    let w = covariant_divergence(&state.u, &state.a)?;
    let u0_eq = sup(&state.u0.sub(&w.scale(Complex64::new(lambda, -1.0))));
    let tau = tension_field(m);
    let synth = frame.synthesize(&w);
    let tension = tau.axpy(-1.0, &synth).sup_norm();
    Ok(IdentityResiduals { torsion, curvature, u0_eq, tension })
}

/// `(Σ_k |u_k|²)^{1/2}`, which equals `|∇m|` in every gauge.
pub fn gradient_magnitude_from_u(u: &[ComplexField]) -> ScalarField {
    crate::morrey::pointwise_norm(u)
}

/// `|∇m|` computed from the spin field directly.
pub fn gradient_magnitude(m: &SpinField) -> ScalarField {
    let grad = m.as_vector().gradient();
    let grid = m.grid().clone();
    let v = (0..m.len()).map(|i| grad.iter().map(|d| dot3(d.get(i), d.get(i))).sum::<f64>().sqrt()).collect();
    ScalarField::new(grid, v).expect("same grid")
}

/// Coulomb-gauge `u` of a spin field: build the frame, derive `u` and `a`,
/// fix the gauge.
pub fn coulomb_u(m: &SpinField) -> Result<Vec<ComplexField>> {
    let frame = build_frame(m)?;
    let zero = VectorField::zeros(m.grid());
    let state = derive_gauge(m, &zero, &frame, None)?;
    Ok(coulomb_gauge_fix(&state)?.u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Grid, SpinField};
    use std::f64::consts::PI;

    fn equatorial(g: &Grid, amp: f64) -> SpinField {
        SpinField::from_fn(g, |x| {
            let phi = amp * x[0].sin();
            [phi.cos(), phi.sin(), 0.0]
        })
        .unwrap()
    }

    #[test]
    fn north_pole_frame_is_the_standard_basis() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let m = SpinField::constant(&g, [0.0, 0.0, 1.0]).unwrap();
        let f = build_frame(&m).unwrap();
        for i in 0..g.len() {
            assert_eq!(f.x.get(i), [1.0, 0.0, 0.0]);
            assert_eq!(f.y.get(i), [0.0, 1.0, 0.0]);
        }
        let m = SpinField::constant(&g, [1.0, 0.0, 0.0]).unwrap();
        assert!(build_frame(&m).unwrap().defect(&m) < 1e-12);
    }

    #[test]
    fn pole_proximity_rejected() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        let s = (1.0_f64 - 0.96 * 0.96).sqrt();
        let m = SpinField::from_fn(&g, |x| if x[0] == 0.5 { [s, 0.0, -0.96] } else { [0.0, 0.0, 1.0] }).unwrap();
        assert!(matches!(build_frame(&m), Err(LabError::PoleProximity { index: 4, .. })));
    }

    #[test]
    fn constant_map_has_zero_gauge() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let m = SpinField::constant(&g, [0.6, 0.0, 0.8]).unwrap();
        let f = build_frame(&m).unwrap();
        let st = derive_gauge(&m, &VectorField::zeros(&g), &f, None).unwrap();
        assert!(st.u.iter().all(|u| u.sup_norm() < 1e-14));
        assert!(st.a.iter().all(|a| a.sup_norm() < 1e-14));
        assert_eq!(st.u0.sup_norm(), 0.0);
        assert!(check_identities(&m, &f, &st, 1.0).unwrap().max() < 1e-13);
    }

    #[test]
    fn equatorial_magnitudes_match_finite_differences() {
        let g = Grid::new(1, 64, 2.0 * PI).unwrap();
        let m = equatorial(&g, 0.1);
        let f = build_frame(&m).unwrap();
        let st = derive_gauge(&m, &VectorField::zeros(&g), &f, None).unwrap();
        let h = 1e-6;
        for i in 0..g.len() {
            let x = g.coords(i)[0];
            // |θ'| against a centered difference of the closed form of m.
            let mp = [(0.1 * (x + h).sin()).cos(), (0.1 * (x + h).sin()).sin()];
            let mm = [(0.1 * (x - h).sin()).cos(), (0.1 * (x - h).sin()).sin()];
            let fd = (((mp[0] - mm[0]) / (2.0 * h)).powi(2) + ((mp[1] - mm[1]) / (2.0 * h)).powi(2)).sqrt();
            assert!((st.u[0].values()[i].norm() - fd).abs() < 1e-8);
            assert!((st.u[0].values()[i].norm() - (0.1 * x.cos()).abs()).abs() < 1e-12);
        }
        let recon = f.synthesize(&st.u[0]);
        let dm = m.as_vector().partial(0);
        assert!(recon.axpy(-1.0, &dm).sup_norm() < 1e-10);
    }

    #[test]
    fn non_tangential_time_derivative_rejected() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        let m = SpinField::constant(&g, [0.0, 0.0, 1.0]).unwrap();
        let f = build_frame(&m).unwrap();
        let dt = VectorField::from_fn(&g, |_| [0.0, 0.0, 1e-3]);
        assert!(matches!(derive_gauge(&m, &dt, &f, None), Err(LabError::NonTangential(_))));
    }

    fn random_state(g: &Grid) -> GaugeState {
        let u = vec![
            g.sample_complex(|x| Complex64::new(x[0].sin() + 0.3 * x[1].cos(), (x[0] + x[1]).cos())),
            g.sample_complex(|x| Complex64::new((2.0 * x[1]).sin(), 0.5 * x[0].cos())),
        ];
        let a = vec![g.sample(|x| x[0].cos() + (x[1] - x[0]).sin()), g.sample(|x| (2.0 * x[0]).sin() * x[1].cos())];
        GaugeState { u0: u[0].clone(), u, a, a0: None, a0_1: ScalarField::zeros(g), a0_2: ScalarField::zeros(g), theta: ScalarField::zeros(g) }
    }

    #[test]
    fn gauge_transform_group_law() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let st = random_state(&g);
        assert_eq!(gauge_transform(&st, &ScalarField::zeros(&g)).u, st.u);
        let c = gauge_transform(&st, &ScalarField::constant(&g, 0.7));
        for (a, b) in c.a.iter().zip(&st.a) {
            assert!(a.zip_map(b, |x, y| x - y).sup_norm() < 1e-14);
        }
        let t1 = g.sample(|x| x[0].sin());
        let t2 = g.sample(|x| (x[0] + 2.0 * x[1]).cos());
        let two = gauge_transform(&gauge_transform(&st, &t1), &t2);
        let one = gauge_transform(&st, &t1.zip_map(&t2, |x, y| x + y));
        for k in 0..2 {
            assert!(two.u[k].sub(&one.u[k]).sup_norm() < 1e-12);
            assert!(two.a[k].zip_map(&one.a[k], |x, y| x - y).sup_norm() < 1e-12);
        }
    }

    #[test]
    fn coulomb_examples() {
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        let mut st = random_state(&g);
        let fixed = coulomb_gauge_fix(&st).unwrap();
        let div = crate::field::divergence(&fixed.a).unwrap();
        assert!(div.sup_norm() <= 1e-10);
        let twice = coulomb_gauge_fix(&fixed).unwrap();
        for k in 0..2 {
            assert!(twice.u[k].sub(&fixed.u[k]).sup_norm() < 1e-12);
        }

        // Pure gradient a = ∇φ: the fixed connection vanishes and u picks
        // up the phase e^{iφ} (θ = -φ).
        let phi = g.sample(|x| x[0].sin() * x[1].cos());
        st.a = crate::field::gradient(&phi);
        let fixed = coulomb_gauge_fix(&st).unwrap();
        assert!(fixed.a.iter().all(|a| a.sup_norm() < 1e-12));
        let expect = rotate(&st.u[0], &phi.map(|v| -v));
        assert!(fixed.u[0].sub(&expect).sup_norm() < 1e-12);

        // Already divergence free.
        st.a = vec![g.sample(|x| x[1].sin()), g.sample(|x| x[0].cos())];
        let fixed = coulomb_gauge_fix(&st).unwrap();
        assert!(fixed.theta.sup_norm() < 1e-12);
        assert!(fixed.u[1].sub(&st.u[1]).sup_norm() < 1e-12);
    }

    #[test]
    fn gauge_field_examples() {
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        let zero = vec![ComplexField::zeros(&g), ComplexField::zeros(&g)];
        let out = gauge_fields_from_u(&zero, 1.0).unwrap();
        assert!(out.a.iter().all(|a| a.sup_norm() == 0.0) && out.a0().sup_norm() == 0.0);

        let real_u = vec![g.sample(|x| x[0].sin()).to_complex(), g.sample(|x| x[1].cos()).to_complex()];
        let out = gauge_fields_from_u(&real_u, 1.0).unwrap();
        assert!(out.a.iter().all(|a| a.sup_norm() < 1e-14));

        let u = random_state(&g).u;
        let out = gauge_fields_from_u(&u, 0.8).unwrap();
        for beta in 0..2 {
            let lhs = crate::field::laplacian(&out.a[beta]).map(|v| -v);
            let src: Vec<ScalarField> = (0..2)
                .map(|al| ScalarField::new(g.clone(), (0..g.len()).map(|i| (u[beta].values()[i] * u[al].values()[i].conj()).im).collect()).unwrap())
                .collect();
            let rhs = crate::field::divergence(&src).unwrap();
            assert!(lhs.zip_map(&rhs, |x, y| x - y).sup_norm() <= 1e-10);
        }
    }
}
