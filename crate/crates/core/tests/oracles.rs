use llglab_core::cgl::{beta_integral, exponent_window_check, nonlinearity_F, nonlinearity_parts};
use llglab_core::field::VectorField;
use llglab_core::field::{ComplexField, Grid, SpinField};
use llglab_core::frame::{build_frame, coulomb_gauge_fix, derive_gauge, gauge_fields_from_u};
use llglab_core::lab::{generate_initial_data, InitialDataSpec};
use llglab_core::llg::dirichlet_energy;
use llglab_core::semigroup::{apply_semigroup, SemigroupParams};
use num_complex::Complex64;
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[test]
fn beta_matches_gamma_quotient() {
    for i in 0..200 {
        let p = 2.5 + 1.5 * (i as f64 + 0.5) / 200.0;
        for pair in exponent_window_check(p).pairs.iter().filter(|e| e.valid) {
            let (d1, d2) = (pair.delta1, pair.delta2);
            let exact = gamma(1.0 - d1) * gamma(1.0 - d2) / gamma(2.0 - d1 - d2);
            let got = pair.beta.unwrap();
            assert!((got - exact).abs() <= 1e-10 * exact, "p={p} {d1} {d2}: {got} vs {exact}");
        }
    }
    for (d1, d2) in [(0.99, 0.2), (-1.5, 0.95), (0.5, 0.999)] {
        let exact = gamma(1.0 - d1) * gamma(1.0 - d2) / gamma(2.0 - d1 - d2);
        assert!((beta_integral(d1, d2) - exact).abs() <= 1e-9 * exact);
    }
}

/// Plane-wave combinations with closed-form derivatives.
struct Wave {
    modes: Vec<([f64; 2], Complex64)>,
}

impl Wave {
    fn value(&self, x: [f64; 3]) -> Complex64 {
        self.modes.iter().map(|(k, c)| c * (I * (k[0] * x[0] + k[1] * x[1])).exp()).sum()
    }
    fn d(&self, axis: usize, x: [f64; 3]) -> Complex64 {
        self.modes.iter().map(|(k, c)| c * I * k[axis] * (I * (k[0] * x[0] + k[1] * x[1])).exp()).sum()
    }
}

#[test]
fn nonlinearity_matches_pointwise_formula() {
    let g = Grid::new(2, 16, 2.0 * PI).unwrap();
    let lambda = 0.7;
    let w = [
        Wave { modes: vec![([1.0, 0.0], Complex64::new(0.3, 0.1)), ([-2.0, 1.0], Complex64::new(0.0, -0.2))] },
        Wave { modes: vec![([0.0, 1.0], Complex64::new(-0.1, 0.25)), ([1.0, 2.0], Complex64::new(0.15, 0.0))] },
    ];
    let a_fn = [|x: [f64; 3]| 0.4 * x[1].sin() - 0.1, |x: [f64; 3]| 0.2 * (x[0] + x[1]).cos()];
    let a01 = |x: [f64; 3]| 0.3 * x[0].cos();
    let a02 = |x: [f64; 3]| -0.25 * (2.0 * x[1]).sin() + 0.05;

    let u: Vec<ComplexField> = w.iter().map(|wl| g.sample_complex(|x| wl.value(x))).collect();
    let a: Vec<_> = a_fn.iter().map(|f| g.sample(f)).collect();
    let f = nonlinearity_F(&u, &a, &g.sample(a01), &g.sample(a02), lambda).unwrap();

    let c = Complex64::new(lambda, -1.0);
    for j in 0..g.len() {
        let x = g.coords(j);
        let uv = [w[0].value(x), w[1].value(x)];
        let av = [a_fn[0](x), a_fn[1](x)];
        let a0 = a01(x) + a02(x);
        for l in 0..2 {
            let cubic: Complex64 = (0..2).map(|k| I * (uv[l] * uv[k].conj()).im * uv[k]).sum();
            let transport: Complex64 = (0..2).map(|k| 2.0 * I * av[k] * w[l].d(k, x)).sum();
            let mass = (av[0] * av[0] + av[1] * av[1]) * uv[l];
            let expect = c * (cubic + transport - mass) - I * a0 * uv[l];
            assert!((f[l].values()[j] - expect).norm() < 1e-13, "point {j} component {l}");
        }
    }

    let parts = nonlinearity_parts(&u, &a, &g.sample(a01), &g.sample(a02), lambda).unwrap();
    for (l, total) in parts.total().iter().enumerate() {
        assert_eq!(total, &f[l]);
    }
}

#[test]
fn connection_from_frame_matches_connection_from_u() {
    // Route one: differentiate the frame, then fix the gauge. Route two:
    // solve the elliptic equations that use only u.
    let g = Grid::new(2, 64, 2.0 * PI).unwrap();
    let m = SpinField::from_fn(&g, |x| [0.4 * x[0].sin(), 0.3 * (x[0] - x[1]).cos(), 1.0]).unwrap();
    let frame = build_frame(&m).unwrap();
    let state = coulomb_gauge_fix(&derive_gauge(&m, &VectorField::zeros(&g), &frame, None).unwrap()).unwrap();
    let fields = gauge_fields_from_u(&state.u, 1.0).unwrap();
    for (a, b) in state.a.iter().zip(&fields.a) {
        let mean = a.mean();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - mean - y).abs() < 1e-10);
        }
    }
}

#[test]
fn semigroup_on_plane_waves() {
    let g = Grid::new(2, 16, 2.0 * PI).unwrap();
    let lambda = 1.3;
    let p = SemigroupParams::new(lambda, &g).unwrap();
    for (k1, k2) in [(1.0, 0.0), (3.0, -2.0), (-5.0, 7.0)] {
        let f = g.sample_complex(|x| (I * (k1 * x[0] + k2 * x[1])).exp());
        let t = 0.013;
        let factor = (Complex64::new(-lambda, 1.0) * (k1 * k1 + k2 * k2) * t).exp();
        let out = apply_semigroup(&f, t, &p).unwrap();
        for (a, b) in out.values().iter().zip(f.values()) {
            assert!((a - b * factor).norm() <= 1e-12 * factor.norm().max(1e-300));
        }
    }
}

#[test]
fn equatorial_energy_closed_form() {
    // E = a² k² L^{n-1} π / 2 for the wave (cos(a sin kx), sin(a sin kx), 0).
    for (dim, a, k) in [(1, 0.1, 1.0), (1, 0.3, 2.0), (2, 0.1, 1.0)] {
        let g = Grid::new(dim, 64, 2.0 * PI).unwrap();
        let m = generate_initial_data(&InitialDataSpec::EquatorialWave { amplitude: a, wavenumber: k }, &g).unwrap();
        let exact = a * a * k * k * PI / 2.0 * (2.0 * PI).powi(dim as i32 - 1);
        assert!((dirichlet_energy(m.as_vector()) - exact).abs() < 1e-12 * exact.max(1.0));
    }
}
