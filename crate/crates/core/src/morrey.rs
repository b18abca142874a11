//! Discrete Morrey norms on the torus.
//!
//! A ball is the closed set of grid points whose wrapped Euclidean distance
//! to the center is at most `r`. Ball sums are accumulated in row-major
//! order of the absolute grid index, which makes the stride-1 result
//! identical to an exhaustive enumeration of every grid point.

use crate::error::{LabError, Result};
use crate::field::{ComplexField, Grid, ScalarField, SpectralField};

/// Centers (multiples of a stride along each axis) and dyadic radii.
#[derive(Clone, Debug, PartialEq)]
pub struct BallLattice {
    centers: Vec<usize>,
    radii: Vec<f64>,
    stride: usize,
}

impl BallLattice {
    /// Every `stride`-th grid point per axis and radii `h, 2h, 4h, …` up to
    /// `r_max` (default `L/2`).
    pub fn new(grid: &Grid, stride: usize, r_max: Option<f64>) -> Result<BallLattice> {
        if stride == 0 {
            return Err(LabError::InvalidArgument("center stride must be >= 1".into()));
        }
        let half = grid.length() / 2.0;
        let r_max = r_max.unwrap_or(half);
        if r_max > half * (1.0 + 1e-12) {
            return Err(LabError::InvalidArgument(format!("r_max {r_max} exceeds L/2 = {half}")));
        }
        let mut radii = Vec::new();
        let mut r = grid.spacing();
        while r <= r_max * (1.0 + 1e-12) {
            radii.push(r);
            r *= 2.0;
        }
        let centers = (0..grid.len()).filter(|&i| grid.multi_index(i)[..grid.dim()].iter().all(|c| c % stride == 0)).collect();
        BallLattice::with_parts(grid, centers, radii, stride)
    }

    /// Stride 1, radii up to `L/2`.
    pub fn full(grid: &Grid) -> BallLattice {
        BallLattice::new(grid, 1, None).expect("full lattice is always valid")
    }

    /// Stride 2 once `N >= 64`, stride 1 below.
    pub fn standard(grid: &Grid) -> BallLattice {
        let stride = if grid.n() >= 64 { 2 } else { 1 };
        BallLattice::new(grid, stride, None).expect("standard lattice is always valid")
    }

    /// Explicit centers and radii; radii must double and stay within `L/2`.
    pub fn with_parts(grid: &Grid, centers: Vec<usize>, radii: Vec<f64>, stride: usize) -> Result<BallLattice> {
        let half = grid.length() / 2.0;
        if radii.iter().any(|&r| !(r > 0.0) || r > half * (1.0 + 1e-12)) {
            return Err(LabError::InvalidArgument("radii must lie in (0, L/2]".into()));
        }
        for w in radii.windows(2) {
            if ((w[1] / w[0]) - 2.0).abs() > 1e-12 {
                return Err(LabError::InvalidArgument("radii must be dyadic".into()));
            }
        }
        if centers.iter().any(|&c| c >= grid.len()) {
            return Err(LabError::InvalidArgument("center outside the grid".into()));
        }
        Ok(BallLattice { centers, radii, stride })
    }

    pub fn centers(&self) -> &[usize] {
        &self.centers
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty() || self.radii.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MorreyReport {
    pub value: f64,
    pub p: f64,
    pub q: f64,
    pub witness_center: usize,
    pub witness_coords: [f64; 3],
    pub witness_radius: f64,
    pub dim: usize,
    pub stride: usize,
    pub n_centers: usize,
    pub n_radii: usize,
}

impl MorreyReport {
    pub fn csv_header(dim: usize) -> String {
        let axes = ["witness_cx", "witness_cy", "witness_cz"];
        let mut cols = vec!["p".to_string(), "q".into(), "value".into()];
        cols.extend(axes[..dim].iter().map(|s| s.to_string()));
        cols.push("witness_r".into());
        cols.join(",")
    }

    pub fn csv_row(&self) -> String {
        let mut cols = vec![self.p.to_string(), self.q.to_string(), self.value.to_string()];
        cols.extend(self.witness_coords[..self.dim].iter().map(|c| c.to_string()));
        cols.push(self.witness_radius.to_string());
        cols.join(",")
    }
}

/// The per-ball functional `(r^{q-n} Σ_{B_r} |f|^p h^n)^{1/p}` given the sum
/// of `|f|^p` over the ball.
#[inline]
pub fn ball_value(sum: f64, r: f64, p: f64, q: f64, grid: &Grid) -> f64 {
    (r.powf(q - grid.dim() as f64) * sum * grid.cell_volume()).powf(1.0 / p)
}

/// Sum of `weights` over the closed torus ball `B_r(center)`, accumulated in
/// row-major order of the absolute index.
pub fn ball_sum(weights: &[f64], grid: &Grid, center: usize, r: f64) -> f64 {
    let c = grid.multi_index(center);
    let mut acc = 0.0;
    accumulate(weights, grid, &c, r * r, 0, 0.0, 0, &mut acc);
    acc
}

/// Number of grid points in `B_r(center)`.
pub fn ball_count(grid: &Grid, center: usize, r: f64) -> usize {
    let ones = vec![1.0; grid.len()];
    ball_sum(&ones, grid, center, r) as usize
}

#[allow(clippy::too_many_arguments)]
fn accumulate(weights: &[f64], grid: &Grid, c: &[usize; 3], r2: f64, axis: usize, partial: f64, base: usize, acc: &mut f64) {
    let n = grid.n();
    let h = grid.spacing();
    let last = axis + 1 == grid.dim();
    if !last {
        for y in 0..n {
            let d = grid.wrapped_offset(y, c[axis]) as f64 * h;
            let s = partial + d * d;
            if s <= r2 {
                accumulate(weights, grid, c, r2, axis + 1, s, (base + y) * n, acc);
            }
        }
        return;
    }
    // Largest in-ball offset along the contiguous axis.
    let mut k = 0usize;
    loop {
        if k > n / 2 {
            break;
        }
        let d = k as f64 * h;
        if partial + d * d <= r2 {
            k += 1;
        } else {
            break;
        }
    }
    if k == 0 {
        return;
    }
    let k = (k - 1) as i64;
    let row = &weights[base..base + n];
    let ci = c[axis] as i64;
    let ni = n as i64;
    if 2 * k + 1 >= ni {
        for w in row {
            *acc += *w;
        }
        return;
    }
    let (lo, hi) = (ci - k, ci + k);
    if lo < 0 {
        for w in &row[..=(hi as usize)] {
            *acc += *w;
        }
        for w in &row[((lo + ni) as usize)..] {
            *acc += *w;
        }
    } else if hi >= ni {
        for w in &row[..=((hi - ni) as usize)] {
            *acc += *w;
        }
        for w in &row[(lo as usize)..] {
            *acc += *w;
        }
    } else {
        for w in &row[(lo as usize)..=(hi as usize)] {
            *acc += *w;
        }
    }
}

/// `‖f‖_{M^{p,q}}` over the lattice, with the maximizing ball as witness.
pub fn morrey_norm(f: &ScalarField, p: f64, q: f64, lattice: &BallLattice) -> Result<MorreyReport> {
    let grid = f.grid();
    if !(p >= 1.0) || !p.is_finite() {
        return Err(LabError::InvalidArgument(format!("p = {p} must satisfy 1 <= p < inf")));
    }
    if !(0.0..=grid.dim() as f64).contains(&q) {
        return Err(LabError::InvalidArgument(format!("q = {q} must lie in [0, n]")));
    }
    if lattice.is_empty() {
        return Err(LabError::EmptyLattice);
    }
    let weights: Vec<f64> = f.values().iter().map(|v| v.abs().powf(p)).collect();
    let mut best = (-1.0_f64, lattice.centers[0], lattice.radii[0]);
    for &c in &lattice.centers {
        for &r in &lattice.radii {
            let v = ball_value(ball_sum(&weights, grid, c, r), r, p, q, grid);
            if v > best.0 {
                best = (v, c, r);
            }
        }
    }
    Ok(MorreyReport {
        value: best.0,
        p,
        q,
        witness_center: best.1,
        witness_coords: grid.coords(best.1),
        witness_radius: best.2,
        dim: grid.dim(),
        stride: lattice.stride,
        n_centers: lattice.centers.len(),
        n_radii: lattice.radii.len(),
    })
}

/// Smallest `C` with `‖f‖_{M^{p1,q}} <= C ‖f‖_{M^{p2,q}}` for every `f` on
/// this lattice (`p1 <= p2`), from Hölder on each ball.
pub fn holder_constant(grid: &Grid, lattice: &BallLattice, q: f64, p1: f64, p2: f64) -> f64 {
    let e = 1.0 / p1 - 1.0 / p2;
    let n = grid.dim() as f64;
    let mut c = 0.0_f64;
    for &center in &lattice.centers {
        for &r in &lattice.radii {
            let vol = ball_count(grid, center, r) as f64 * grid.cell_volume();
            c = c.max((r.powf(q - n) * vol).powf(e));
        }
    }
    c
}

/// Pointwise Euclidean norm of a tuple of complex fields.
pub fn pointwise_norm(u: &[ComplexField]) -> ScalarField {
    let grid = u[0].grid().clone();
    let values = (0..grid.len()).map(|i| u.iter().map(|f| f.values()[i].norm_sqr()).sum::<f64>().sqrt()).collect();
    ScalarField::new(grid, values).expect("same grid")
}

/// Pointwise `(Σ_{l,k} |∂_k u_l|²)^{1/2}`.
pub fn pointwise_gradient_norm(u: &[ComplexField]) -> ScalarField {
    let grid = u[0].grid().clone();
    let mut acc = vec![0.0; grid.len()];
    for f in u {
        let spec = f.spectrum();
        for axis in 0..grid.dim() {
            let d: ComplexField = ComplexField::from_spectrum(spec.clone().differentiate(axis, 1));
            for (a, v) in acc.iter_mut().zip(d.values()) {
                *a += v.norm_sqr();
            }
        }
    }
    ScalarField::new(grid, acc.into_iter().map(f64::sqrt).collect()).expect("same grid")
}

/// Which part of a parabolic cylinder is sampled.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderSpec {
    /// Flat index of the spatial center `x0`.
    pub center: usize,
    pub t0: f64,
    pub r0: f64,
    /// Stride for sub-cylinder centers; ignored when `single`.
    pub center_stride: usize,
    /// Only evaluate `P_{r0}(z0)` itself.
    pub single: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParabolicReport {
    pub value: f64,
    pub witness_center: usize,
    pub witness_radius: f64,
    pub witness_time: f64,
    pub n_cylinders: usize,
}

/// Integral over `[a, b]` of the piecewise-linear interpolant of `(times, s)`.
pub(crate) fn integrate_piecewise_linear(times: &[f64], s: &[f64], a: f64, b: f64) -> f64 {
    let interp = |t: f64| -> f64 {
        let j = match times.iter().position(|&x| x >= t) {
            Some(0) => return s[0],
            Some(j) => j,
            None => return *s.last().unwrap(),
        };
        let (t0, t1) = (times[j - 1], times[j]);
        let w = (t - t0) / (t1 - t0);
        s[j - 1] * (1.0 - w) + s[j] * w
    };
    let mut nodes = vec![(a, interp(a))];
    for (&t, &v) in times.iter().zip(s) {
        if t > a && t < b {
            nodes.push((t, v));
        }
    }
    nodes.push((b, interp(b)));
    nodes.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum()
}

const TIME_EPS: f64 = 1e-12;

/// Parabolic Morrey norm `sup (r^{2-(n+2)} ∫∫_{P_r(z)} |g|²)^{1/2}` over
/// sub-cylinders of `P_{r0}(z0)`; `grad_norms[j]` is `|∇m|` at `times[j]`.
pub fn parabolic_morrey_norm(times: &[f64], grad_norms: &[ScalarField], spec: &CylinderSpec) -> Result<ParabolicReport> {
    if times.is_empty() || times.len() != grad_norms.len() {
        return Err(LabError::EmptyTrajectory);
    }
    let grid = grad_norms[0].grid().clone();
    let n = grid.dim() as f64;
    if !(spec.r0 > 0.0) || spec.r0 > spec.t0.sqrt() * (1.0 + 1e-12) {
        return Err(LabError::CoverageFailure(format!("need 0 < r0 <= sqrt(t0), got r0 = {}", spec.r0)));
    }
    let (t_lo, t_hi) = (spec.t0 - spec.r0 * spec.r0, spec.t0);
    if times[0] > t_lo + TIME_EPS || *times.last().unwrap() < t_hi - TIME_EPS {
        return Err(LabError::CoverageFailure(format!("trajectory spans [{}, {}], cylinder needs [{t_lo}, {t_hi}]", times[0], times.last().unwrap())));
    }
    let weights: Vec<Vec<f64>> = grad_norms.iter().map(|g| g.values().iter().map(|v| v * v).collect()).collect();
    let slab = |center: usize, r: f64, top: f64| -> f64 {
        let s: Vec<f64> = weights.iter().map(|w| ball_sum(w, &grid, center, r) * grid.cell_volume()).collect();
        integrate_piecewise_linear(times, &s, top - r * r, top)
    };
    let value_of = |integral: f64, r: f64| (r.powf(2.0 - (n + 2.0)) * integral).sqrt();

    if spec.single {
        let v = value_of(slab(spec.center, spec.r0, spec.t0), spec.r0);
        return Ok(ParabolicReport { value: v, witness_center: spec.center, witness_radius: spec.r0, witness_time: spec.t0, n_cylinders: 1 });
    }

    let mut radii = Vec::new();
    let mut r = spec.r0;
    while r >= grid.spacing() * (1.0 - 1e-12) {
        radii.push(r);
        r /= 2.0;
    }
    let mut tops: Vec<f64> = times.iter().copied().filter(|&t| t <= t_hi + TIME_EPS).collect();
    if !tops.iter().any(|&t| (t - t_hi).abs() <= TIME_EPS) {
        tops.push(t_hi);
    }
    let c0 = grid.multi_index(spec.center);
    let h = grid.spacing();
    let stride = spec.center_stride.max(1);
    let mut best = ParabolicReport { value: -1.0, witness_center: spec.center, witness_radius: spec.r0, witness_time: spec.t0, n_cylinders: 0 };
    for x in 0..grid.len() {
        let xi = grid.multi_index(x);
        if xi[..grid.dim()].iter().any(|v| v % stride != 0) && x != spec.center {
            continue;
        }
        let mut d2 = 0.0;
        for a in 0..grid.dim() {
            let d = grid.wrapped_offset(xi[a], c0[a]) as f64 * h;
            d2 += d * d;
        }
        let dist = d2.sqrt();
        for &r in &radii {
            if dist + r > spec.r0 * (1.0 + 1e-12) {
                continue;
            }
            for &top in &tops {
                if top - r * r < t_lo - TIME_EPS {
                    continue;
                }
                let v = value_of(slab(x, r, top), r);
                best.n_cylinders += 1;
                if v > best.value {
                    best.value = v;
                    best.witness_center = x;
                    best.witness_radius = r;
                    best.witness_time = top;
                }
            }
        }
    }
    Ok(best)
}

/// `X^p_T` components of a sampled trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct XptReport {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub total: f64,
    pub p: f64,
    pub t_final: f64,
    /// Sample times attaining each supremum.
    pub r1_time: f64,
    pub r2_time: f64,
    pub r3_time: f64,
}

fn check_series(times: &[f64], u: &[Vec<ComplexField>]) -> Result<()> {
    if times.is_empty() || times.len() != u.len() || u.iter().any(|s| s.is_empty()) {
        return Err(LabError::EmptyTrajectory);
    }
    Ok(())
}

/// `R1 = sup t^{1/2-1/p}‖u‖_{M^{p,2}}`, `R2 = sup t^{1/2}‖∇u‖_{M^{2,2}}`,
/// `R3 = sup ‖u‖_{M^{2,2}}`; `t = 0` only enters `R3`.
pub fn xpt_norm(times: &[f64], u: &[Vec<ComplexField>], p: f64, lattice: &BallLattice) -> Result<XptReport> {
    check_series(times, u)?;
    if !(p > 2.0) {
        return Err(LabError::InvalidArgument(format!("X^p_T needs p > 2, got {p}")));
    }
    let mut rep =
        XptReport { r1: 0.0, r2: 0.0, r3: 0.0, total: 0.0, p, t_final: *times.last().unwrap(), r1_time: times[0], r2_time: times[0], r3_time: times[0] };
    for (&t, state) in times.iter().zip(u) {
        let mag = pointwise_norm(state);
        let m22 = morrey_norm(&mag, 2.0, 2.0, lattice)?.value;
        if m22 > rep.r3 {
            rep.r3 = m22;
            rep.r3_time = t;
        }
        if t > 0.0 {
            let a = t.powf(0.5 - 1.0 / p) * morrey_norm(&mag, p, 2.0, lattice)?.value;
            if a > rep.r1 {
                rep.r1 = a;
                rep.r1_time = t;
            }
            let b = t.sqrt() * morrey_norm(&pointwise_gradient_norm(state), 2.0, 2.0, lattice)?.value;
            if b > rep.r2 {
                rep.r2 = b;
                rep.r2_time = t;
            }
        }
    }
    rep.total = rep.r1 + rep.r2 + rep.r3;
    Ok(rep)
}

/// `R1 + R2` only.
pub fn ypt_norm(times: &[f64], u: &[Vec<ComplexField>], p: f64, lattice: &BallLattice) -> Result<f64> {
    let r = xpt_norm(times, u, p, lattice)?;
    Ok(r.r1 + r.r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    /// Exhaustive oracle: every grid point, in row-major order.
    fn brute_ball_sum(w: &[f64], grid: &Grid, center: usize, r: f64) -> f64 {
        let c = grid.multi_index(center);
        let h = grid.spacing();
        let mut acc = 0.0;
        for y in 0..grid.len() {
            let yi = grid.multi_index(y);
            let mut s = 0.0;
            for a in 0..grid.dim() {
                let n = grid.n();
                let raw = yi[a].abs_diff(c[a]);
                let d = raw.min(n - raw) as f64 * h;
                s += d * d;
            }
            if s <= r * r {
                acc += w[y];
            }
        }
        acc
    }

    fn brute_morrey(f: &ScalarField, p: f64, q: f64) -> f64 {
        let grid = f.grid();
        let w: Vec<f64> = f.values().iter().map(|v| v.abs().powf(p)).collect();
        let mut radii = vec![];
        let mut r = grid.spacing();
        while r <= grid.length() / 2.0 * (1.0 + 1e-12) {
            radii.push(r);
            r *= 2.0;
        }
        let mut best = -1.0_f64;
        for c in 0..grid.len() {
            for &r in &radii {
                let v = (r.powf(q - grid.dim() as f64) * brute_ball_sum(&w, grid, c, r) * grid.cell_volume()).powf(1.0 / p);
                best = best.max(v);
            }
        }
        best
    }

    #[test]
    fn zero_field_has_zero_norm() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let rep = morrey_norm(&ScalarField::zeros(&g), 3.0, 1.0, &BallLattice::full(&g)).unwrap();
        assert_eq!(rep.value, 0.0);
    }

    #[test]
    fn constant_field_matches_brute_force() {
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        let f = ScalarField::constant(&g, 1.0);
        let rep = morrey_norm(&f, 2.0, 2.0, &BallLattice::full(&g)).unwrap();
        assert_eq!(rep.value, brute_morrey(&f, 2.0, 2.0));
        // With q = n the largest ball wins.
        assert!((rep.witness_radius - PI).abs() < 1e-12);
    }

    #[test]
    fn spike_maximized_at_smallest_radius() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let h = g.spacing();
        let mut v = vec![0.0; g.len()];
        let spike = g.flat_index(&[5, 9]);
        v[spike] = 1.0 / (h * h);
        let f = ScalarField::new(g.clone(), v).unwrap();
        let rep = morrey_norm(&f, 2.0, 1.0, &BallLattice::full(&g)).unwrap();
        assert_eq!(rep.value, brute_morrey(&f, 2.0, 1.0));
        assert!((rep.witness_radius - h).abs() < 1e-15);
        assert!(ball_sum(f.values(), &g, rep.witness_center, h) > 0.0);
    }

    #[test]
    fn ball_sum_matches_brute_force_in_every_dimension() {
        for (dim, n) in [(1, 32), (2, 16), (3, 8)] {
            let g = Grid::new(dim, n, 2.0 * PI).unwrap();
            let w: Vec<f64> = (0..g.len()).map(|i| ((i * 7919) % 101) as f64 * 0.37 + 0.1).collect();
            for c in [0, g.len() / 3, g.len() - 1] {
                for r in [g.spacing(), 2.0 * g.spacing(), 1.7, PI] {
                    assert_eq!(ball_sum(&w, &g, c, r), brute_ball_sum(&w, &g, c, r), "dim {dim} c {c} r {r}");
                }
            }
        }
    }

    #[test]
    fn lattice_validation() {
        let g = Grid::new(1, 16, 2.0 * PI).unwrap();
        assert!(BallLattice::new(&g, 1, Some(4.0)).is_err());
        assert!(BallLattice::with_parts(&g, vec![0], vec![0.5, 0.9], 1).is_err());
        let lat = BallLattice::new(&g, 1, None).unwrap();
        assert!(lat.radii().iter().all(|&r| r <= PI * (1.0 + 1e-12)));
        let empty = BallLattice::with_parts(&g, vec![], vec![1.0], 1).unwrap();
        assert_eq!(morrey_norm(&ScalarField::constant(&g, 1.0), 2.0, 1.0, &empty), Err(LabError::EmptyLattice));
        assert_eq!(BallLattice::standard(&Grid::new(2, 64, 1.0).unwrap()).stride(), 2);
    }

    #[test]
    fn csv_row_layout() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let rep = morrey_norm(&ScalarField::constant(&g, 2.0), 2.0, 2.0, &BallLattice::full(&g)).unwrap();
        assert_eq!(MorreyReport::csv_header(2), "p,q,value,witness_cx,witness_cy,witness_r");
        assert_eq!(rep.csv_row().split(',').count(), 6);
    }

    #[test]
    fn parabolic_single_and_oracle() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let times: Vec<f64> = (0..8).map(|j| 0.5 + 0.25 * j as f64).collect();
        let density = g.sample(|x| 1.0 + 0.5 * x[0].sin() * x[1].cos());
        let traj = vec![density.clone(); times.len()];
        let center = g.flat_index(&[8, 8]);
        let t0 = *times.last().unwrap();
        let r0 = 1.2_f64;
        let single = CylinderSpec { center, t0, r0, center_stride: 1, single: true };
        let rep = parabolic_morrey_norm(&times, &traj, &single).unwrap();
        let w: Vec<f64> = density.values().iter().map(|v| v * v).collect();
        let direct = (r0.powf(-2.0) * r0 * r0 * brute_ball_sum(&w, &g, center, r0) * g.cell_volume()).sqrt();
        assert!((rep.value - direct).abs() <= 1e-12 * direct);

        // Brute-force enumeration of sub-cylinders for a time-constant field.
        let full = CylinderSpec { single: false, ..single };
        let rep = parabolic_morrey_norm(&times, &traj, &full).unwrap();
        let h = g.spacing();
        let mut best = 0.0_f64;
        let mut r = r0;
        let mut radii = vec![];
        while r >= h * (1.0 - 1e-12) {
            radii.push(r);
            r /= 2.0;
        }
        for x in 0..g.len() {
            let xi = g.multi_index(x);
            let d = ((g.wrapped_offset(xi[0], 8) as f64 * h).powi(2) + (g.wrapped_offset(xi[1], 8) as f64 * h).powi(2)).sqrt();
            for &r in &radii {
                if d + r > r0 * (1.0 + 1e-12) {
                    continue;
                }
                // Constant in time: the time integral is exactly r².
                let v = (r.powf(-2.0) * r * r * brute_ball_sum(&w, &g, x, r) * g.cell_volume()).sqrt();
                best = best.max(v);
            }
        }
        assert!((rep.value - best).abs() <= 1e-12 * best);

        let zero = vec![ScalarField::zeros(&g); times.len()];
        assert_eq!(parabolic_morrey_norm(&times, &zero, &full).unwrap().value, 0.0);

        let bad = CylinderSpec { t0: 10.0, ..single };
        assert!(matches!(parabolic_morrey_norm(&times, &traj, &bad), Err(LabError::CoverageFailure(_))));
    }

    #[test]
    fn piecewise_linear_integral_is_exact_for_linear_data() {
        let times = [0.0, 0.3, 1.0, 1.5];
        let s: Vec<f64> = times.iter().map(|t| 2.0 * t + 1.0).collect();
        let exact = |a: f64, b: f64| (b * b + b) - (a * a + a);
        for (a, b) in [(0.0, 1.5), (0.1, 0.2), (0.25, 1.2)] {
            assert!((integrate_piecewise_linear(&times, &s, a, b) - exact(a, b)).abs() < 1e-14);
        }
    }

    #[test]
    fn xpt_examples() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let lat = BallLattice::full(&g);
        let zero = vec![ComplexField::zeros(&g), ComplexField::zeros(&g)];
        let rep = xpt_norm(&[0.0, 0.5], &[zero.clone(), zero], 3.2, &lat).unwrap();
        assert_eq!((rep.r1, rep.r2, rep.r3), (0.0, 0.0, 0.0));

        let a = 0.3;
        let wave = g.sample_complex(|x| Complex64::new(0.0, x[0]).exp() * a);
        let u = vec![wave.clone(), ComplexField::zeros(&g)];
        let rep = xpt_norm(&[1.0], std::slice::from_ref(&u), 3.2, &lat).unwrap();
        let mag = pointwise_norm(&u);
        assert_eq!(rep.r1, morrey_norm(&mag, 3.2, 2.0, &lat).unwrap().value);
        assert_eq!(rep.r3, morrey_norm(&mag, 2.0, 2.0, &lat).unwrap().value);
        assert_eq!(rep.r2, morrey_norm(&pointwise_gradient_norm(&u), 2.0, 2.0, &lat).unwrap().value);
        assert!((ypt_norm(&[1.0], std::slice::from_ref(&u), 3.2, &lat).unwrap() - (rep.r1 + rep.r2)).abs() < 1e-15);

        // Planted supremum at the second sample.
        let big = vec![wave.scale(Complex64::new(5.0, 0.0)), ComplexField::zeros(&g)];
        let rep = xpt_norm(&[0.5, 1.0], &[u, big], 3.2, &lat).unwrap();
        assert_eq!((rep.r1_time, rep.r2_time, rep.r3_time), (1.0, 1.0, 1.0));
        assert!(xpt_norm(&[], &[], 3.2, &lat).is_err());
    }
}
