//! Littlewood-Paley decomposition on the frequency lattice.
//!
//! The family is built from the base profile `psi0` (1 on `|xi| <= 1/2`,
//! 0 on `|xi| >= 1`) via `psi_j(xi) = psi0(2^-j xi) - psi0(2^(1-j) xi)`.
//! The final window closes the partition at the top so that
//! `sum_j psi_j(xi) = 1` holds exactly at every lattice point, including the
//! Nyquist corners that no dyadic annulus of the continuum family reaches.

use num_complex::Complex64;

use crate::error::Result;
use crate::grid::{Field, Grid};
use crate::multiplier::{apply_multiplier, MultiplierSpec, SupportBounds};
use crate::profile;

/// The Littlewood-Paley windows plus the two low-frequency cutoffs used
/// throughout: `q` (1 on `|xi| <= 2`) and the packet window `rho`
/// (1 on `|xi| <= 1/2`, 0 on `|xi| >= 2`).
#[derive(Clone, Debug)]
pub struct LPFamily {
    grid: Grid,
    /// psi_0 .. psi_J; the last entry is the top closure window.
    pub windows: Vec<MultiplierSpec>,
    /// Low-frequency cutoff q, identically 1 on `|xi| <= 2`.
    pub q: MultiplierSpec,
    /// Packet low-frequency window rho.
    pub rho: MultiplierSpec,
}

/// Scalar radial profile of the j-th window (top window of an J+1 family
/// plateaus at 1 for large rho).
pub fn lp_profile(j: usize, top: usize, rho: f64) -> f64 {
    if j == 0 {
        profile::lp_psi0(rho)
    } else if j < top {
        profile::lp_shell(rho, j as u32)
    } else {
        // top closure: 1 - sum of everything below = 1 - psi0(2^(1-top) rho)
        1.0 - profile::lp_psi0((2f64).powi(1 - top as i32) * rho)
    }
}

/// Radial derivative of [`lp_profile`].
pub fn lp_profile_d(j: usize, top: usize, rho: f64) -> f64 {
    if j == 0 {
        profile::lp_psi0_d(rho)
    } else if j < top {
        profile::lp_shell_d(rho, j as u32)
    } else {
        let s = (2f64).powi(1 - top as i32);
        -s * profile::lp_psi0_d(s * rho)
    }
}

impl LPFamily {
    /// Number of genuine dyadic shells needed to cover the lattice of `grid`,
    /// i.e. the index of the top closure window.
    pub fn top_index(grid: &Grid) -> usize {
        let mut top = 1usize;
        while (2f64).powi(top as i32 - 1) < grid.max_freq() {
            top += 1;
        }
        top
    }

    pub fn new(grid: &Grid) -> Self {
        let top = Self::top_index(grid);
        let windows = (0..=top)
            .map(|j| {
                let m = MultiplierSpec::from_radial(
                    &format!("psi_{j}"),
                    grid,
                    move |rho| lp_profile(j, top, rho),
                );
                let support = if j == 0 {
                    SupportBounds {
                        rho_min: 0.0,
                        rho_max: 1.0,
                        cone: None,
                    }
                } else if j < top {
                    SupportBounds {
                        rho_min: (2f64).powi(j as i32 - 2),
                        rho_max: (2f64).powi(j as i32),
                        cone: None,
                    }
                } else {
                    SupportBounds {
                        rho_min: (2f64).powi(top as i32 - 2),
                        rho_max: f64::INFINITY,
                        cone: None,
                    }
                };
                m.with_support(support)
            })
            .collect();
        let q = MultiplierSpec::from_radial("q", grid, |rho| profile::plateau(rho, 2.0, 4.0))
            .with_support(SupportBounds {
                rho_min: 0.0,
                rho_max: 4.0,
                cone: None,
            });
        let rho_w = MultiplierSpec::from_radial("rho", grid, |r| profile::plateau(r, 0.5, 2.0))
            .with_support(SupportBounds {
                rho_min: 0.0,
                rho_max: 2.0,
                cone: None,
            });
        LPFamily {
            grid: grid.clone(),
            windows,
            q,
            rho: rho_w,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Number of windows (top closure included).
    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest deviation of the partition of unity from 1 over the lattice.
    pub fn partition_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for lin in 0..self.grid.point_count() {
            let s: Complex64 = self.windows.iter().map(|w| w.values()[lin]).sum();
            worst = worst.max((s - Complex64::new(1.0, 0.0)).norm());
        }
        worst
    }
}

/// Decompose `f` into Littlewood-Paley pieces `psi_j(D) f`. The pieces sum
/// back to `f` to roundoff because the windows partition unity exactly.
pub fn littlewood_paley(f: &Field, lp: &LPFamily) -> Result<Vec<Field>> {
    f.grid().same(lp.grid())?;
    lp.windows
        .iter()
        .map(|w| apply_multiplier(f, w))
        .collect()
}
