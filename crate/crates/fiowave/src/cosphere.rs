//! Geometry of the cosphere bundle `S* = torus x S^1`: the parabolic
//! quasi-metric, ball enumeration, and the fractional Hardy-Littlewood
//! maximal operator of index lambda.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::error::{FioError, Result};
use crate::grid::Grid;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
const PI: f64 = std::f64::consts::PI;

/// A point of phase space: position on the torus, unit direction, optional scale.
#[derive(Clone, Copy, Debug)]
pub struct CospherePoint {
    pub x: [f64; 2],
    pub omega: [f64; 2],
    pub scale: Option<f64>,
}

impl CospherePoint {
    pub fn new(x: [f64; 2], omega: [f64; 2]) -> Result<Self> {
        let norm = (omega[0] * omega[0] + omega[1] * omega[1]).sqrt();
        if (norm - 1.0).abs() > 1e-14 {
            return Err(FioError::UnsupportedRange(format!(
                "direction must be unit length, |omega| = {norm}"
            )));
        }
        Ok(CospherePoint {
            x,
            omega,
            scale: None,
        })
    }

    pub fn with_scale(mut self, sigma: f64) -> Self {
        self.scale = Some(sigma);
        self
    }

    pub fn from_angle(x: [f64; 2], theta: f64) -> Self {
        CospherePoint {
            x,
            omega: [theta.cos(), theta.sin()],
            scale: None,
        }
    }
}

/// Equispaced unit vectors per scale: `N_j = ceil(2 pi 2^{j/2})` directions
/// at scale `sigma_j = 2^-j`. Scales are independent; there is no refinement
/// chain between them.
#[derive(Clone, Debug)]
pub struct DirectionGrid {
    per_scale: Vec<Vec<[f64; 2]>>,
}

impl DirectionGrid {
    pub fn new(max_scale: usize) -> Self {
        let per_scale = (0..=max_scale)
            .map(|j| {
                let count = Self::count_at(j);
                (0..count)
                    .map(|k| {
                        let th = TWO_PI * k as f64 / count as f64;
                        [th.cos(), th.sin()]
                    })
                    .collect()
            })
            .collect();
        DirectionGrid { per_scale }
    }

    pub fn count_at(j: usize) -> usize {
        (TWO_PI * (2f64).powf(j as f64 / 2.0)).ceil() as usize
    }

    pub fn max_scale(&self) -> usize {
        self.per_scale.len() - 1
    }

    pub fn at_scale(&self, j: usize) -> &[[f64; 2]] {
        &self.per_scale[j]
    }

    /// Angle between adjacent directions at scale j.
    pub fn spacing(&self, j: usize) -> f64 {
        TWO_PI / self.per_scale[j].len() as f64
    }
}

#[inline]
pub fn wrap_diff(a: f64, b: f64) -> f64 {
    // shorter arc per axis on the period-2pi torus
    let mut d = a - b;
    while d > PI {
        d -= TWO_PI;
    }
    while d < -PI {
        d += TWO_PI;
    }
    d
}

/// The explicit quasi-metric
/// `d(a,b) = (|omega.(x-y)| + |x-y|^2 + |omega-nu|^2)^{1/2}`
/// with torus-periodic position differences. The anisotropic term is
/// averaged over the two directions so the expression is symmetric in its
/// arguments, staying within the same equivalence class.
pub fn metric_d(a: &CospherePoint, b: &CospherePoint) -> f64 {
    let dx = [wrap_diff(a.x[0], b.x[0]), wrap_diff(a.x[1], b.x[1])];
    let along_a = (a.omega[0] * dx[0] + a.omega[1] * dx[1]).abs();
    let along_b = (b.omega[0] * dx[0] + b.omega[1] * dx[1]).abs();
    let along = 0.5 * (along_a + along_b);
    let cross = dx[0] * dx[0] + dx[1] * dx[1];
    let dw0 = a.omega[0] - b.omega[0];
    let dw1 = a.omega[1] - b.omega[1];
    let ang = dw0 * dw0 + dw1 * dw1;
    (along + cross + ang).sqrt()
}

/// All points of `grid x direction-grid(j)` within quasi-metric distance
/// `tau` of the center.
pub fn ball_members(
    center: &CospherePoint,
    tau: f64,
    grid: &Grid,
    dirs: &DirectionGrid,
    j: usize,
) -> Result<Vec<CospherePoint>> {
    if !(tau > 0.0) {
        return Err(FioError::UnsupportedRange("tau must be positive".into()));
    }
    let ds = dirs.at_scale(j);
    if ds.is_empty() {
        return Err(FioError::UnsupportedRange("empty direction grid".into()));
    }
    let n = grid.size();
    let h = grid.spacing();
    let mut out = Vec::new();
    for d in ds {
        for iy in 0..n {
            for ix in 0..n {
                let p = CospherePoint {
                    x: [iy as f64 * h, ix as f64 * h],
                    omega: *d,
                    scale: None,
                };
                if metric_d(center, &p) <= tau {
                    out.push(p);
                }
            }
        }
    }
    Ok(out)
}

/// Real phase-space samples at one scale, layout `[dir][grid point]`.
#[derive(Clone, Debug)]
pub struct PhaseFunctionSample {
    pub grid: Grid,
    pub dirs: Vec<[f64; 2]>,
    pub data: Vec<f64>,
}

impl PhaseFunctionSample {
    pub fn new(grid: Grid, dirs: Vec<[f64; 2]>, data: Vec<f64>) -> Result<Self> {
        if data.len() != dirs.len() * grid.point_count() {
            return Err(FioError::GridMismatch(
                "phase sample dimensions do not match grid x directions".into(),
            ));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(FioError::UnsupportedRange(
                "phase samples must be finite".into(),
            ));
        }
        Ok(PhaseFunctionSample { grid, dirs, data })
    }

    pub fn value(&self, dir: usize, lin: usize) -> f64 {
        self.data[dir * self.grid.point_count() + lin]
    }

    /// Discrete `L^p` norm with the product measure `h^2 * 2pi/ndir`.
    pub fn norm_lp(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.data.iter().map(|v| v.abs()).fold(0.0, f64::max);
        }
        let cell = self.grid.cell_measure() * TWO_PI / self.dirs.len() as f64;
        (self.data.iter().map(|v| v.abs().powf(p)).sum::<f64>() * cell).powf(1.0 / p)
    }
}

/// Geometric radius ladder (ratio 2) from one grid cell to the diameter of
/// phase space. The degenerate singleton ball is handled separately by the
/// maximal operator.
pub fn radius_ladder(grid: &Grid) -> Vec<f64> {
    // diameter bound: |omega.dx| <= pi, |dx|^2 <= 2 pi^2, |omega-nu|^2 <= 4
    let diam = (PI + 2.0 * PI * PI + 4.0).sqrt();
    let mut out = Vec::new();
    let mut tau = grid.spacing();
    while tau < diam {
        out.push(tau);
        tau *= 2.0;
    }
    out.push(tau);
    out
}

fn fft2(data: &mut [Complex64], n: usize, plan: &Arc<dyn Fft<f64>>) {
    for row in data.chunks_exact_mut(n) {
        plan.process(row);
    }
    let mut col = vec![Complex64::default(); n];
    for c in 0..n {
        for r in 0..n {
            col[r] = data[r * n + c];
        }
        plan.process(&mut col);
        for r in 0..n {
            data[r * n + c] = col[r];
        }
    }
}

/// The fractional maximal operator `M_lambda g = (M(|g|^lambda))^{1/lambda}`,
/// where `M` is the centered ball-average maximal operator over the radius
/// ladder plus the degenerate singleton ball. Including the singleton makes
/// `M_lambda g >= |g|` hold pointwise and exactly.
///
/// Ball averages are evaluated by circular correlation: for a fixed center
/// direction the membership kernel depends only on the position offset, so
/// each (direction pair, radius) contributes one FFT-sized stencil.
pub fn maximal_mlambda(g: &PhaseFunctionSample, lambda: f64) -> Result<PhaseFunctionSample> {
    if !(lambda > 0.0) {
        return Err(FioError::UnsupportedRange("lambda must be > 0".into()));
    }
    let n = g.grid.size();
    let count = g.grid.point_count();
    let ndir = g.dirs.len();
    let h = g.grid.spacing();
    let taus = radius_ladder(&g.grid);

    let powed: Vec<Vec<f64>> = (0..ndir)
        .map(|d| {
            (0..count)
                .map(|lin| g.value(d, lin).abs().powf(lambda))
                .collect()
        })
        .collect();

    // unnormalized forward DFT of each source slice, shared across centers
    let powed_hat: Vec<Vec<Complex64>> = powed
        .par_iter()
        .map(|u| {
            let mut planner = FftPlanner::<f64>::new();
            let fwd = planner.plan_fft_forward(n);
            let mut buf: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            fft2(&mut buf, n, &fwd);
            buf
        })
        .collect();

    let best: Vec<Vec<f64>> = (0..ndir)
        .into_par_iter()
        .map(|dw| {
            let omega = g.dirs[dw];
            let phi: Vec<f64> = (0..count)
                .map(|lin| {
                    let dy = wrap_diff((lin / n) as f64 * h, 0.0);
                    let dx = wrap_diff((lin % n) as f64 * h, 0.0);
                    (omega[0] * dy + omega[1] * dx).abs() + dy * dy + dx * dx
                })
                .collect();
            let mut planner = FftPlanner::<f64>::new();
            let fwd = planner.plan_fft_forward(n);
            let inv = planner.plan_fft_inverse(n);
            // singleton ball
            let mut local: Vec<f64> = powed[dw].clone();
            for &tau in &taus {
                let t2 = tau * tau;
                let mut acc = vec![Complex64::default(); count];
                let mut members = 0usize;
                for (dv, nu) in g.dirs.iter().enumerate() {
                    let dn0 = omega[0] - nu[0];
                    let dn1 = omega[1] - nu[1];
                    let rem = t2 - (dn0 * dn0 + dn1 * dn1);
                    if rem < 0.0 {
                        continue;
                    }
                    let mut kern: Vec<Complex64> = phi
                        .iter()
                        .map(|&v| {
                            if v <= rem {
                                Complex64::new(1.0, 0.0)
                            } else {
                                Complex64::default()
                            }
                        })
                        .collect();
                    members += kern.iter().filter(|v| v.re > 0.5).count();
                    fft2(&mut kern, n, &fwd);
                    for (a, (k, u)) in acc.iter_mut().zip(kern.iter().zip(powed_hat[dv].iter())) {
                        *a += k.conj() * u;
                    }
                }
                if members == 0 {
                    continue;
                }
                fft2(&mut acc, n, &inv);
                let scale = 1.0 / (count as f64 * members as f64);
                for (slot, v) in local.iter_mut().zip(acc.iter()) {
                    let avg = v.re * scale;
                    if avg > *slot {
                        *slot = avg;
                    }
                }
            }
            local
        })
        .collect();

    let mut data = Vec::with_capacity(ndir * count);
    for row in best {
        for v in row {
            data.push(v.max(0.0).powf(1.0 / lambda));
        }
    }
    PhaseFunctionSample::new(g.grid.clone(), g.dirs.clone(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rand_points(_grid: &Grid, count: usize, seed: u64) -> Vec<CospherePoint> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let x = [rng.gen_range(0.0..TWO_PI), rng.gen_range(0.0..TWO_PI)];
                CospherePoint::from_angle(x, rng.gen_range(0.0..TWO_PI))
            })
            .collect()
    }

    #[test]
    fn metric_basics() {
        let a = CospherePoint::from_angle([1.0, 2.0], 0.3);
        assert_eq!(metric_d(&a, &a), 0.0);

        // x-y = 0.01 e1, omega = nu = e1: sqrt(0.01 + 0.0001)
        let p = CospherePoint::from_angle([1.01, 2.0], 0.0);
        let q = CospherePoint::from_angle([1.0, 2.0], 0.0);
        assert!((metric_d(&p, &q) - (0.01f64 + 0.0001).sqrt()).abs() < 1e-9);

        // tangential offset is quadratically cheaper: x-y = 0.01 e2, omega = nu = e1
        let p = CospherePoint::from_angle([1.0, 2.01], 0.0);
        assert!((metric_d(&p, &q) - 0.01).abs() < 1e-12);
    }

    #[test]
    fn metric_symmetric_and_periodic() {
        let grid = Grid::square(16).unwrap();
        let _ = &grid;
        for (a, b) in rand_points(&Grid::square(16).unwrap(), 50, 1)
            .into_iter()
            .zip(rand_points(&Grid::square(16).unwrap(), 50, 2))
        {
            assert!((metric_d(&a, &b) - metric_d(&b, &a)).abs() < 1e-14);
        }
        // wrap-around: points near opposite edges are close
        let a = CospherePoint::from_angle([0.01, 0.0], 1.0);
        let b = CospherePoint::from_angle([TWO_PI - 0.01, 0.0], 1.0);
        assert!(metric_d(&a, &b) < 0.2);
    }

    #[test]
    fn quasi_triangle_constant_bounded() {
        let pts = rand_points(&Grid::square(16).unwrap(), 3 * 10_000, 3);
        let mut worst: f64 = 0.0;
        for tri in pts.chunks_exact(3) {
            let dab = metric_d(&tri[0], &tri[1]);
            let dbc = metric_d(&tri[1], &tri[2]);
            let dac = metric_d(&tri[0], &tri[2]);
            if dab + dbc > 0.0 {
                worst = worst.max(dac / (dab + dbc));
            }
        }
        assert!(worst <= 3.0, "quasi-triangle constant {worst}");
    }

    #[test]
    fn tiny_ball_is_center_family() {
        let grid = Grid::square(16).unwrap();
        let dirs = DirectionGrid::new(3);
        let h = grid.spacing();
        let center = CospherePoint {
            x: [4.0 * h, 7.0 * h],
            omega: dirs.at_scale(3)[2],
            scale: None,
        };
        // tau below spacing^2: only points with x = center.x and omega ~ omega
        let tau = h * h * 0.5;
        let members = ball_members(&center, tau, &grid, &dirs, 3).unwrap();
        assert!(!members.is_empty());
        for m in &members {
            assert!((m.x[0] - center.x[0]).abs() < 1e-12);
            assert!((m.x[1] - center.x[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn doubling_bound() {
        let grid = Grid::square(32).unwrap();
        let dirs = DirectionGrid::new(4);
        let center = CospherePoint::from_angle([3.0, 3.0], 0.7);
        for tau in [0.1, 0.2, 0.3, 0.5] {
            let small = ball_members(&center, tau, &grid, &dirs, 4).unwrap().len();
            let big = ball_members(&center, 2.0 * tau, &grid, &dirs, 4)
                .unwrap()
                .len();
            if small > 0 {
                let ratio = big as f64 / small as f64;
                assert!(ratio <= 32.0, "tau={tau}: doubling ratio {ratio}"); // 2^(2n+1) = 32
            }
        }
    }

    #[test]
    fn maximal_constant_fixed_point() {
        let grid = Grid::square(16).unwrap();
        let dirs = DirectionGrid::new(2);
        let ds = dirs.at_scale(2).to_vec();
        let data = vec![-2.5f64; ds.len() * grid.point_count()];
        let g = PhaseFunctionSample::new(grid, ds, data).unwrap();
        let m = maximal_mlambda(&g, 1.0).unwrap();
        for v in &m.data {
            assert!((v - 2.5).abs() < 1e-10);
        }
    }

    #[test]
    fn maximal_dominates_pointwise_and_monotone_in_lambda() {
        use rand::{Rng, SeedableRng};
        let grid = Grid::square(16).unwrap();
        let dirs = DirectionGrid::new(2);
        let ds = dirs.at_scale(2).to_vec();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let data: Vec<f64> = (0..ds.len() * grid.point_count())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let g = PhaseFunctionSample::new(grid, ds, data).unwrap();
        let m1 = maximal_mlambda(&g, 1.0).unwrap();
        let m2 = maximal_mlambda(&g, 2.0).unwrap();
        for i in 0..g.data.len() {
            assert!(m1.data[i] >= g.data[i].abs() - 1e-12);
            assert!(m2.data[i] >= m1.data[i] - 1e-12); // power-mean inequality
        }
    }

    #[test]
    fn maximal_of_ball_indicator_decays() {
        // brute-force oracle on a small grid
        let grid = Grid::square(16).unwrap();
        let dirs = DirectionGrid::new(2);
        let ds = dirs.at_scale(2).to_vec();
        let h = grid.spacing();
        let center = CospherePoint {
            x: [8.0 * h, 8.0 * h],
            omega: ds[0],
            scale: None,
        };
        let tau = 0.5;
        let n = grid.size();
        let mut data = vec![0.0f64; ds.len() * grid.point_count()];
        for (d, nu) in ds.iter().enumerate() {
            for lin in 0..grid.point_count() {
                let p = CospherePoint {
                    x: [(lin / n) as f64 * h, (lin % n) as f64 * h],
                    omega: *nu,
                    scale: None,
                };
                if metric_d(&center, &p) <= tau {
                    data[d * grid.point_count() + lin] = 1.0;
                }
            }
        }
        let g = PhaseFunctionSample::new(grid.clone(), ds.clone(), data).unwrap();
        let m = maximal_mlambda(&g, 1.0).unwrap();
        // value 1 at the center, strictly smaller far away
        let lin_c = 8 * n + 8;
        assert!((m.value(0, lin_c) - 1.0).abs() < 1e-9);
        let lin_far = 0;
        assert!(m.value(0, lin_far) < 1.0);
        assert!(m.value(0, lin_far) > 0.0);
    }
}
