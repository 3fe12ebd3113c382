//! Construction of the discrete dyadic-parabolic tight frame.
//!
//! Raw windows are `psi_{j,k}(xi) = R_j(|xi|) * phi((xihat - omega_jk)/sqrt(sigma_j))`
//! with `R_j` a gauss-core bump on the annulus `[2^(j-1), 2^(j+1)]` and
//! `sigma_j = 2^-j`. Tightness is enforced by construction: every window
//! (including the low-frequency one) is divided pointwise by the square root
//! of the total squared sum, after which
//! `sum_{j,k} psi_{j,k}(xi)^2 + rho(xi)^2 = 1` exactly on the lattice.
//!
//! The finest radial window plateaus at 1 above its peak so the partition
//! covers the Nyquist corners that no dyadic annulus of the continuum family
//! reaches; its declared annulus is `[2^(J-1), inf)`.

use rayon::prelude::*;

use crate::cosphere::DirectionGrid;
use crate::error::{FioError, Result};
use crate::grid::Grid;
use crate::multiplier::{MultiplierSpec, SupportBounds};
use crate::profile;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Static description of one packet window.
#[derive(Clone, Debug)]
pub struct PacketBlockInfo {
    pub scale: usize,
    pub dir: usize,
    /// Unit direction of the block.
    pub omega: [f64; 2],
    /// Nominal center frequency `2^j omega`, rounded to the lattice.
    pub center: [i64; 2],
    /// `sigma_j = 2^-j`.
    pub sigma: f64,
}

/// The full frame: renormalized windows per (scale, direction) plus the
/// low-frequency window, all sampled on the lattice.
#[derive(Clone, Debug)]
pub struct PacketFrame {
    grid: Grid,
    levels: usize,
    dirs: DirectionGrid,
    blocks: Vec<PacketBlockInfo>,
    windows: Vec<MultiplierSpec>,
    rho: MultiplierSpec,
    hash: u64,
}

/// Radial amplitude of scale j: optimized rising edge over `[2^(j-1), 2^j]`
/// times falling edge over `[2^j, 2^(j+1)]`. The top scale omits the falling
/// factor and plateaus at 1. Small deviations of the squared sum from 1 are
/// removed by the tightness renormalization.
pub fn radial_profile(j: usize, levels: usize, rho: f64) -> f64 {
    if rho <= 0.0 {
        return 0.0;
    }
    let s = (2f64).powi(-(j as i32));
    let up = profile::packet_rise(2.0 * rho * s - 1.0);
    if j == levels {
        up
    } else {
        up * profile::packet_fall(rho * s - 1.0)
    }
}

/// Low-frequency amplitude: the falling edge over `[1, 2]`; identically 1 on
/// `|xi| <= 1`, zero from `|xi| >= 2`.
pub fn low_profile(rho: f64) -> f64 {
    profile::packet_fall(rho - 1.0)
}

/// Angular amplitude for direction offset `dtheta` (radians) at direction
/// spacing `delta`: plateau for `|dtheta| <= delta/10`, shoulder out to
/// `9 delta/10`.
pub fn angular_profile(dtheta: f64, delta: f64) -> f64 {
    let t = (dtheta / delta).abs();
    if t <= 0.1 {
        1.0
    } else if t >= 0.9 {
        0.0
    } else {
        (std::f64::consts::FRAC_PI_2 * profile::packet_rise((t - 0.1) / 0.8)).cos()
    }
}

fn fnv64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Build the tight frame with `J` packet scales on the given grid.
/// Requires `2^J <= N/4` so the finest annulus is resolvable. `J = 0` is the
/// degenerate frame consisting of the low-frequency block only, for which
/// tightness forces `rho = 1` everywhere.
pub fn build_frame(grid: &Grid, levels: usize) -> Result<PacketFrame> {
    if grid.dim() != 2 {
        return Err(FioError::UnsupportedRange(
            "packet frames are built for n = 2".into(),
        ));
    }
    if levels > 0 && (1usize << levels) > grid.size() / 4 {
        return Err(FioError::Frame(format!(
            "J = {levels} too large for N = {}: need 2^J <= N/4",
            grid.size()
        )));
    }
    let dirs = DirectionGrid::new(levels.max(1));
    let count = grid.point_count();

    // block geometry
    let mut blocks = Vec::new();
    for j in 1..=levels {
        for (k, omega) in dirs.at_scale(j).iter().enumerate() {
            let r = (2f64).powi(j as i32);
            blocks.push(PacketBlockInfo {
                scale: j,
                dir: k,
                omega: *omega,
                center: [(r * omega[0]).round() as i64, (r * omega[1]).round() as i64],
                sigma: (2f64).powi(-(j as i32)),
            });
        }
    }

    // raw windows and the squared total
    let raw: Vec<Vec<f64>> = blocks
        .par_iter()
        .map(|b| {
            let delta = TWO_PI / dirs.at_scale(b.scale).len() as f64;
            let theta_k = TWO_PI * b.dir as f64 / dirs.at_scale(b.scale).len() as f64;
            (0..count)
                .map(|lin| {
                    let eta = grid.freq_of(lin);
                    let e0 = eta[0] as f64;
                    let e1 = eta[1] as f64;
                    let rho = (e0 * e0 + e1 * e1).sqrt();
                    if rho == 0.0 {
                        return 0.0;
                    }
                    let rad = radial_profile(b.scale, levels, rho);
                    if rad == 0.0 {
                        return 0.0;
                    }
                    let mut dth = e1.atan2(e0) - theta_k;
                    while dth > std::f64::consts::PI {
                        dth -= TWO_PI;
                    }
                    while dth < -std::f64::consts::PI {
                        dth += TWO_PI;
                    }
                    rad * angular_profile(dth, delta)
                })
                .collect()
        })
        .collect();

    let rho_raw: Vec<f64> = (0..count)
        .map(|lin| {
            let eta = grid.freq_of(lin);
            let rho = ((eta[0] * eta[0] + eta[1] * eta[1]) as f64).sqrt();
            if levels == 0 {
                1.0
            } else {
                low_profile(rho)
            }
        })
        .collect();

    let mut total = vec![0.0f64; count];
    for w in &raw {
        for (t, v) in total.iter_mut().zip(w.iter()) {
            *t += v * v;
        }
    }
    for (t, v) in total.iter_mut().zip(rho_raw.iter()) {
        *t += v * v;
    }
    for (lin, t) in total.iter().enumerate() {
        if *t <= 0.0 {
            return Err(FioError::FrameCoverage(format!(
                "no window covers lattice frequency {:?}",
                grid.freq_of(lin)
            )));
        }
    }
    let inv_sqrt: Vec<f64> = total.iter().map(|t| 1.0 / t.sqrt()).collect();

    let windows: Vec<MultiplierSpec> = blocks
        .iter()
        .zip(raw.into_iter())
        .map(|(b, mut w)| {
            for (v, s) in w.iter_mut().zip(inv_sqrt.iter()) {
                *v *= s;
            }
            let values = w
                .into_iter()
                .map(|v| num_complex::Complex64::new(v, 0.0))
                .collect();
            let support = SupportBounds {
                rho_min: (2f64).powi(b.scale as i32 - 1),
                rho_max: if b.scale == levels {
                    f64::INFINITY
                } else {
                    (2f64).powi(b.scale as i32 + 1)
                },
                cone: Some((vec![b.omega[0], b.omega[1]], 2.0 * b.sigma.sqrt())),
            };
            MultiplierSpec::from_values(
                &format!("psi_{}_{}", b.scale, b.dir),
                grid.clone(),
                values,
            )
            .expect("length matches")
            .with_support(support)
        })
        .collect();

    let rho_values = rho_raw
        .iter()
        .zip(inv_sqrt.iter())
        .map(|(v, s)| num_complex::Complex64::new(v * s, 0.0))
        .collect();
    let rho = MultiplierSpec::from_values("rho", grid.clone(), rho_values)?.with_support(
        SupportBounds {
            rho_min: 0.0,
            rho_max: if levels == 0 { f64::INFINITY } else { 2.0 },
            cone: None,
        },
    );

    let mut tag = Vec::new();
    tag.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    tag.extend_from_slice(&(grid.size() as u32).to_le_bytes());
    tag.extend_from_slice(&(levels as u32).to_le_bytes());
    tag.extend_from_slice(&(blocks.len() as u32).to_le_bytes());
    let hash = fnv64(&tag);

    Ok(PacketFrame {
        grid: grid.clone(),
        levels,
        dirs,
        blocks,
        windows,
        rho,
        hash,
    })
}

impl PacketFrame {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn direction_grid(&self) -> &DirectionGrid {
        &self.dirs
    }

    pub fn blocks(&self) -> &[PacketBlockInfo] {
        &self.blocks
    }

    pub fn window(&self, idx: usize) -> &MultiplierSpec {
        &self.windows[idx]
    }

    pub fn windows(&self) -> &[MultiplierSpec] {
        &self.windows
    }

    pub fn rho(&self) -> &MultiplierSpec {
        &self.rho
    }

    pub fn hash(&self) -> u64 {
        self.hash
    }

    /// Index of the block for (scale, direction).
    pub fn block_index(&self, scale: usize, dir: usize) -> Option<usize> {
        self.blocks
            .iter()
            .position(|b| b.scale == scale && b.dir == dir)
    }

    /// Largest deviation of `sum psi^2 + rho^2` from 1 over the lattice.
    pub fn tightness_residual(&self) -> f64 {
        let count = self.grid.point_count();
        let mut worst = 0.0f64;
        for lin in 0..count {
            let mut t = self.rho.values()[lin].re.powi(2);
            for w in &self.windows {
                t += w.values()[lin].re.powi(2);
            }
            worst = worst.max((t - 1.0).abs());
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Field;
    use crate::multiplier::apply_multiplier;

    #[test]
    fn tightness_by_construction() {
        let grid = Grid::square(64).unwrap();
        let frame = build_frame(&grid, 3).unwrap();
        assert!(
            frame.tightness_residual() <= 1e-13,
            "residual {}",
            frame.tightness_residual()
        );
    }

    #[test]
    fn supports_exact() {
        let grid = Grid::square(64).unwrap();
        let frame = build_frame(&grid, 3).unwrap();
        for w in frame.windows() {
            w.verify_support().unwrap();
        }
        frame.rho().verify_support().unwrap();
    }

    #[test]
    fn degenerate_frame_is_identity_window() {
        let grid = Grid::square(16).unwrap();
        let frame = build_frame(&grid, 0).unwrap();
        assert!(frame.blocks().is_empty());
        for v in frame.rho().values() {
            assert!((v.re - 1.0).abs() <= 1e-13);
        }
    }

    #[test]
    fn too_fine_rejected() {
        let grid = Grid::square(16).unwrap();
        assert!(build_frame(&grid, 3).is_err());
        assert!(build_frame(&grid, 2).is_ok());
    }

    #[test]
    fn packet_kernel_concentrates_in_parabolic_box() {
        // interior scale j = 4 on N = 128: mass fraction outside
        // {|x.omega| <= 16 sigma, |x| <= 16 sqrt(sigma)} at most 1e-4
        let grid = Grid::square(128).unwrap();
        let frame = build_frame(&grid, 5).unwrap();
        let idx = frame.block_index(4, 0).unwrap();
        let b = &frame.blocks()[idx];
        let spec: Vec<num_complex::Complex64> = frame.window(idx).values().to_vec();
        let kernel = Field::from_spectrum(grid.clone(), spec).unwrap();
        let sigma = b.sigma;
        let (mut inside, mut total) = (0.0f64, 0.0f64);
        for (lin, v) in kernel.samples().iter().enumerate() {
            let x = grid.point_of(lin);
            let dx = [
                crate::cosphere::wrap_diff(x[0], 0.0),
                crate::cosphere::wrap_diff(x[1], 0.0),
            ];
            let along = (b.omega[0] * dx[0] + b.omega[1] * dx[1]).abs();
            let r = (dx[0] * dx[0] + dx[1] * dx[1]).sqrt();
            let m = v.norm_sqr();
            total += m;
            if along <= 16.0 * sigma && r <= 16.0 * sigma.sqrt() {
                inside += m;
            }
        }
        let outside_frac = 1.0 - inside / total;
        assert!(outside_frac <= 1e-4, "outside mass fraction {outside_frac}");
    }

    #[test]
    fn field_in_one_cone_hits_one_block() {
        let grid = Grid::square(64).unwrap();
        let frame = build_frame(&grid, 3).unwrap();
        // pick a block and a field whose spectrum sits strictly inside it
        let idx = frame.block_index(3, 0).unwrap();
        let w = frame.window(idx);
        // field = inverse transform of the window itself (spectrum = window)
        let f = Field::from_spectrum(grid.clone(), w.values().to_vec()).unwrap();
        for (i, other) in frame.windows().iter().enumerate() {
            let c = apply_multiplier(&f, other).unwrap();
            let b = &frame.blocks()[i];
            let me = &frame.blocks()[idx];
            // blocks at the same scale adjacent in angle overlap; distant ones cannot
            if b.scale == me.scale || b.scale + 1 == me.scale || me.scale + 1 == b.scale {
                continue;
            }
            assert!(c.norm_l2() < 1e-12, "unexpected overlap with block {i}");
        }
    }
}
