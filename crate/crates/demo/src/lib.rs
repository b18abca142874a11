//! Browser bindings. Every export returns a flat `Float64Array` of rows so
//! the page can plot without a JSON layer; errors become JS exceptions.

use std::f64::consts::PI;

use llglab_core::cgl::exponent_window_check;
use llglab_core::field::Grid;
use llglab_core::lab::{decay_bump, generate_initial_data, InitialDataSpec};
use llglab_core::llg::{solve, LlgConfig, Scheme};
use llglab_core::morrey::BallLattice;
use llglab_core::semigroup::{log_spaced, verify_decay, DecayKind, SemigroupParams};
use llglab_core::LabError;
use wasm_bindgen::prelude::*;

fn js(e: LabError) -> JsError {
    JsError::new(&e.to_string())
}

/// Rows `(t, compensated_ratio)` for a Gaussian bump on the 2D torus with
/// `p = q = 2`.
pub fn decay_curve(n: usize, width_cells: f64, lambda: f64, p_tilde: f64, gradient: bool) -> Result<Vec<f64>, LabError> {
    let grid = Grid::new(2, n, 2.0 * PI)?;
    let params = SemigroupParams::new(lambda, &grid)?;
    let kind = if gradient { DecayKind::Gradient } else { DecayKind::Value };
    let times = log_spaced(1e-3, 1e-1, 21);
    let r = verify_decay(&decay_bump(&grid, width_cells), 2.0, p_tilde, 2.0, &times, &params, kind, &BallLattice::standard(&grid), 50.0)?;
    Ok(r.t_samples.iter().zip(&r.ratio_series).flat_map(|(t, x)| [*t, *x]).collect())
}

/// Rows `(t, E, E + λ/(1+λ²)·∫∫|∂_t m|²)` for the 1D equatorial wave.
pub fn energy_curve(n: usize, amplitude: f64, lambda: f64, t_final: f64) -> Result<Vec<f64>, LabError> {
    let grid = Grid::new(1, n, 2.0 * PI)?;
    let m0 = generate_initial_data(&InitialDataSpec::EquatorialWave { amplitude, wavenumber: 1.0 }, &grid)?;
    let mut cfg = LlgConfig::at_cap_fraction(&grid, lambda, t_final, 4.0, Scheme::Rk4)?;
    cfg.output_every = (cfg.steps().0 / 200).max(1);
    let (_, ledger) = solve(&m0, &cfg)?;
    let c = lambda / (1.0 + lambda * lambda);
    Ok((0..ledger.times.len()).flat_map(|i| [ledger.times[i], ledger.energies[i], ledger.energies[i] + c * ledger.dissipation[i]]).collect())
}

/// Rows `(p, valid, failing_pairs)` over `count` cell midpoints of `(lo, hi)`.
pub fn window_scan(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .flat_map(|i| {
            let p = lo + (hi - lo) * (i as f64 + 0.5) / count as f64;
            let r = exponent_window_check(p);
            [p, if r.valid() { 1.0 } else { 0.0 }, r.failing().count() as f64]
        })
        .collect()
}

/// One line per exponent pair at `p`: `term/target δ1 δ2 B-or-invalid`.
pub fn window_table(p: f64) -> String {
    exponent_window_check(p)
        .pairs
        .iter()
        .map(|e| {
            let b = e.beta.map_or("invalid".to_string(), |b| format!("B = {b:.6}"));
            format!("{}/{}  δ1 = {:+.4}  δ2 = {:+.4}  {b}", e.term, e.target, e.delta1, e.delta2)
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[wasm_bindgen(js_name = decayCurve)]
pub fn decay_curve_js(n: usize, width_cells: f64, lambda: f64, p_tilde: f64, gradient: bool) -> Result<Vec<f64>, JsError> {
    decay_curve(n, width_cells, lambda, p_tilde, gradient).map_err(js)
}

#[wasm_bindgen(js_name = energyCurve)]
pub fn energy_curve_js(n: usize, amplitude: f64, lambda: f64, t_final: f64) -> Result<Vec<f64>, JsError> {
    energy_curve(n, amplitude, lambda, t_final).map_err(js)
}

#[wasm_bindgen(js_name = windowScan)]
pub fn window_scan_js(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    window_scan(lo, hi, count)
}

#[wasm_bindgen(js_name = windowTable)]
pub fn window_table_js(p: f64) -> String {
    window_table(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decay_rows_are_bounded() {
        let rows = decay_curve(32, 1.0, 1.0, 4.0, false).unwrap();
        assert_eq!(rows.len(), 42);
        assert!(rows.chunks(2).all(|r| r[1] > 0.0 && r[1] <= 50.0));
    }

    #[test]
    fn energy_rows_balance() {
        let rows = energy_curve(32, 0.1, 1.0, 0.2).unwrap();
        let e0 = rows[1];
        assert!((e0 - 0.01 * PI / 2.0).abs() < 1e-12);
        for r in rows.chunks(3) {
            assert!((r[2] - e0).abs() <= 1e-4 * e0);
            assert!(r[1] <= e0 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn window_scan_matches_interval() {
        for r in window_scan(2.5, 4.0, 60).chunks(3) {
            assert_eq!(r[1] == 1.0, r[0] > 3.0 && r[0] < 10.0 / 3.0);
            assert_eq!(r[1] == 1.0, r[2] == 0.0);
        }
        assert_eq!(window_table(3.2).lines().count(), 9);
        assert!(window_table(3.0).contains("invalid"));
    }

    #[test]
    fn bad_grid_is_an_error() {
        assert!(decay_curve(12, 1.0, 1.0, 4.0, false).is_err());
    }
}
