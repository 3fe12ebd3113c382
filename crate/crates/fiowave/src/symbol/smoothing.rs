//! Paradifferential symbol smoothing: `a = a#_gamma + ab_gamma`, where the
//! smooth part low-passes the spatial dependence at scale `2^(gamma k)` on
//! the frequency annulus `|eta| ~ 2^k` and the rough remainder keeps the
//! high spatial frequencies.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use crate::error::{FioError, Result};
use crate::grid::{Field, Grid};
use crate::lp::{lp_profile, LPFamily};
use crate::multiplier::{apply_multiplier, MultiplierSpec};
use crate::profile;
use crate::symbol::{SpatialSupport, Symbol, SymbolClass};

/// Spatial low-pass at scale `2^(gamma k)`: plateau to half the scale,
/// support up to the full scale.
fn lowpass_window(grid: &Grid, cutoff: f64) -> MultiplierSpec {
    MultiplierSpec::from_radial(&format!("lowpass_{cutoff:.3}"), grid, move |rho| {
        profile::plateau(rho, cutoff / 2.0, cutoff)
    })
}

struct SliceCache {
    sharp: Mutex<HashMap<(u64, u64), Arc<Vec<Complex64>>>>,
}

/// Result of the smoothing split: two lazily evaluated symbols sharing a
/// per-frequency cache of the low-passed spatial slices.
pub fn smooth_split(a: &Symbol, gamma: f64) -> Result<(Symbol, Symbol)> {
    if gamma < a.delta {
        return Err(FioError::UnsupportedRange(format!(
            "gamma = {gamma} below the symbol's delta = {}",
            a.delta
        )));
    }
    let grid = a.grid().clone();
    let lp = LPFamily::new(&grid);
    let top = lp.len() - 1;
    let cache = Arc::new(SliceCache {
        sharp: Mutex::new(HashMap::new()),
    });

    // sharp(x, eta) = sum_k (lowpass_{gamma k} a(., eta))(x) psi_k(|eta|)
    let sharp_eval = {
        let a = a.clone();
        let grid = grid.clone();
        let cache = cache.clone();
        move |x_lin: usize, eta: [f64; 2]| -> Complex64 {
            let rho = (eta[0] * eta[0] + eta[1] * eta[1]).sqrt();
            let mut acc = Complex64::default();
            for k in 0..=top {
                let w = lp_profile(k, top, rho);
                if w == 0.0 {
                    continue;
                }
                let key = (eta[0].to_bits() ^ (k as u64) << 1, eta[1].to_bits());
                let slice = {
                    let mut guard = cache.sharp.lock().unwrap();
                    if let Some(s) = guard.get(&key) {
                        s.clone()
                    } else {
                        let raw = Field::from_samples(grid.clone(), a.x_slice(eta))
                            .expect("slice length");
                        let cutoff = (2f64).powf(gamma * k as f64);
                        let filt = apply_multiplier(&raw, &lowpass_window(&grid, cutoff))
                            .expect("same grid");
                        let arc = Arc::new(filt.samples().to_vec());
                        guard.insert(key, arc.clone());
                        arc
                    }
                };
                acc += slice[x_lin] * w;
            }
            acc
        }
    };

    let sharp_class = SymbolClass::Hormander {
        rho: 1.0,
        delta: gamma,
    };
    let mut sharp = Symbol::from_fn(&grid, a.order, sharp_class, sharp_eval);
    // spatial spectrum of the sharp part per eta-annulus lies below the cutoff
    let g = gamma;
    sharp = sharp.with_spatial_support(SpatialSupport {
        lo: Arc::new(|_| 0.0),
        hi: Arc::new(move |rho| {
            // largest cutoff among annuli containing rho: |eta| ~ 2^k with
            // rho <= 2^k (shell k covers [2^{k-2}, 2^k])
            let k = rho.max(1.0).log2().ceil().max(0.0);
            (2f64).powf(g * (k + 1.0))
        }),
    });

    let flat_eval = {
        let a = a.clone();
        let sharp = sharp.clone();
        move |x_lin: usize, eta: [f64; 2]| a.eval(x_lin, eta) - sharp.eval(x_lin, eta)
    };
    let flat_class = match a.class {
        SymbolClass::ZygmundRough { r, .. } => SymbolClass::ZygmundRough { r, delta: gamma },
        SymbolClass::SobolevRough { r, .. } => SymbolClass::SobolevRough { r, delta: gamma },
        other => other,
    };
    let flat = Symbol::from_fn(
        &grid,
        a.order - (gamma - a.delta) * a.regularity.min(1e6),
        flat_class,
        flat_eval,
    );
    Ok((sharp, flat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::{estimate_seminorm, weierstrass};

    #[test]
    fn x_independent_symbol_has_zero_flat_part() {
        let grid = Grid::square(16).unwrap();
        let a = Symbol::from_multiplier(&grid, 1.0, |eta| {
            Complex64::new((1.0 + eta[0] * eta[0] + eta[1] * eta[1]).sqrt(), 0.0)
        });
        let (_, flat) = smooth_split(&a, 0.5).unwrap();
        for lin in [0usize, 5, 100] {
            for eta in [[0.0, 0.0], [3.0, 1.0], [7.0, -2.0]] {
                assert!(flat.eval(lin, eta).norm() <= 1e-13);
            }
        }
    }

    #[test]
    fn telescoping_exact() {
        let grid = Grid::square(16).unwrap();
        let w = weierstrass(&grid, 0.7, 3, 5);
        let ww = w.clone();
        let a = Symbol::from_fn(
            &grid,
            1.0,
            SymbolClass::ZygmundRough { r: 0.7, delta: 0.0 },
            move |x_lin, eta| {
                let q = (1.0 + eta[0] * eta[0] + eta[1] * eta[1]).sqrt();
                ww.samples()[x_lin] * q
            },
        );
        let (sharp, flat) = smooth_split(&a, 0.5).unwrap();
        for lin in [0usize, 17, 200] {
            for eta in [[1.0, 0.0], [4.0, 3.0], [-6.0, 2.0]] {
                let sum = sharp.eval(lin, eta) + flat.eval(lin, eta);
                let direct = a.eval(lin, eta);
                assert!(
                    (sum - direct).norm() <= 1e-13 * (1.0 + direct.norm()),
                    "telescoping defect at {eta:?}"
                );
            }
        }
    }

    #[test]
    fn cutoff_dichotomy() {
        // a(x,eta) = b(x) psi_{k0}(|eta|) with b high-pass beyond the
        // smoothing cutoff: sharp part vanishes on that annulus
        let grid = Grid::square(32).unwrap();
        let lp = LPFamily::new(&grid);
        let top = lp.len() - 1;
        let k0 = 2usize; // annulus |eta| ~ 4, gamma = 1/2 cutoff = 2
        let b = Field::random_band(&grid, 6.0, 14.0, 3); // spatial spectrum above 4
        let bb = b.clone();
        let a = Symbol::from_fn(
            &grid,
            0.0,
            SymbolClass::ZygmundRough { r: 1.0, delta: 0.0 },
            move |x_lin, eta| {
                let rho = (eta[0] * eta[0] + eta[1] * eta[1]).sqrt();
                bb.samples()[x_lin] * lp_profile(k0, top, rho)
            },
        );
        let (sharp, flat) = smooth_split(&a, 0.5).unwrap();
        // on the k0 shell the cutoff is 2^{k0/2} = 2 < 6, so nothing survives
        for lin in [3usize, 40, 511] {
            let eta = [4.0, 0.0];
            assert!(sharp.eval(lin, eta).norm() <= 1e-12);
            let defect = (flat.eval(lin, eta) - a.eval(lin, eta)).norm();
            assert!(defect <= 1e-12);
        }
    }

    #[test]
    fn flat_part_order_drop_measured() {
        // Hoelder-r spatial roughness: the flat part decays like
        // <eta>^{m - gamma r} along dyadic frequencies
        let grid = Grid::square(64).unwrap();
        let r = 0.6;
        let m = 1.0;
        let w = weierstrass(&grid, r, 5, 11);
        let ww = w.clone();
        let a = Symbol::from_fn(
            &grid,
            m,
            SymbolClass::ZygmundRough { r, delta: 0.0 },
            move |x_lin, eta| {
                let q = (1.0 + eta[0] * eta[0] + eta[1] * eta[1]).sqrt().powf(m);
                ww.samples()[x_lin] * q
            },
        );
        let gamma = 0.5;
        let (_, flat) = smooth_split(&a, gamma).unwrap();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for k in 2..=5 {
            let eta = [(2f64).powi(k), 0.0];
            let sup = (0..grid.point_count())
                .map(|lin| flat.eval(lin, eta).norm())
                .fold(0.0, f64::max);
            xs.push(k as f64);
            ys.push(sup.log2());
        }
        let slope = crate::symbol::seminorm::ls_slope(&xs, &ys);
        let expected = m - gamma * r;
        assert!(
            (slope - expected).abs() <= 0.3,
            "flat decay slope {slope} vs {expected}"
        );
    }

    #[test]
    fn gamma_below_delta_rejected() {
        let grid = Grid::square(16).unwrap();
        let mut a = Symbol::from_multiplier(&grid, 0.0, |_| Complex64::new(1.0, 0.0));
        a.delta = 0.5;
        assert!(smooth_split(&a, 0.25).is_err());
    }

    #[test]
    fn spatial_support_bounds_hold() {
        let grid = Grid::square(16).unwrap();
        let w = weierstrass(&grid, 0.8, 3, 7);
        let ww = w.clone();
        let a = Symbol::from_fn(
            &grid,
            0.0,
            SymbolClass::ZygmundRough { r: 0.8, delta: 0.0 },
            move |x_lin, _| ww.samples()[x_lin],
        );
        let (sharp, _) = smooth_split(&a, 0.5).unwrap();
        sharp.verify_spatial_support(1e-12).unwrap();
    }
}
