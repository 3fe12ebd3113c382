//! Separable expansion of a symbol: per dyadic annulus, the windowed symbol
//! `a(x,eta) psi_k(eta)` is expanded in a tensor Fourier series on the
//! annulus's bounding box and the resulting mode coefficients are compressed
//! into low-rank triples (weight, spatial factor, frequency factor). An
//! eta-smooth symbol costs a handful of terms per annulus; application is
//! one frequency-windowed transform and one pointwise product per term.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{FioError, Result};
use crate::grid::{Field, Grid};
use crate::lp::{lp_profile, LPFamily};
use crate::symbol::Symbol;

/// One rank-one term: `weight * spatial(x) * freq(eta)`.
pub struct SepTerm {
    pub annulus: usize,
    /// Singular weight.
    pub weight: f64,
    /// Spatial factor over the grid (unit sup norm scale folded into weight).
    pub spatial: Vec<Complex64>,
    /// Frequency factor on the lattice, supported in the annulus.
    pub freq: Vec<Complex64>,
}

pub struct SeparableExpansion {
    grid: Grid,
    pub terms: Vec<SepTerm>,
    /// Conservative lattice sup bound on the reconstruction error.
    pub truncation_error: f64,
    pub tol: f64,
}

impl std::fmt::Debug for SeparableExpansion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SeparableExpansion")
            .field("terms", &self.terms.len())
            .field("truncation_error", &self.truncation_error)
            .finish()
    }
}

/// Expand `a` into rank-one separable terms meeting `tol` on the lattice,
/// with at most `max_terms` terms.
///
/// Per annulus, the windowed symbol is first expanded in a tensor Fourier
/// series on the annulus's bounding box (the smoothness of `a` in eta makes
/// these coefficients decay), small modes are pruned, and the surviving
/// mode-coefficient matrix is compressed by an SVD into rank-one triples.
pub fn separable_expand(a: &Symbol, tol: f64, max_terms: usize) -> Result<SeparableExpansion> {
    if !(tol > 0.0) {
        return Err(FioError::UnsupportedRange("tol must be > 0".into()));
    }
    let grid = a.grid().clone();
    let n = grid.size();
    let count = grid.point_count();
    let lp = LPFamily::new(&grid);
    let top = lp.len() - 1;

    let mut terms: Vec<SepTerm> = Vec::new();
    let mut trunc = 0.0f64;
    for k in 0..=top {
        let pts: Vec<(usize, f64)> = (0..count)
            .filter_map(|lin| {
                let e = grid.freq_of(lin);
                let rho = ((e[0] * e[0] + e[1] * e[1]) as f64).sqrt();
                let w = lp_profile(k, top, rho);
                if w > 0.0 {
                    Some((lin, w))
                } else {
                    None
                }
            })
            .collect();
        if pts.is_empty() {
            continue;
        }
        // bounding box side (power of two) for the shell support
        let reach = (2f64).powi(k as i32);
        let mut side = 8usize;
        while (side as f64) < 2.0 * reach + 2.0 {
            side *= 2;
        }
        let side = side.min(n);
        let modes = side * side;

        // per x: box samples of a(x,.) psi_k, then box DFT
        let coeffs: Vec<Vec<Complex64>> = (0..count)
            .into_par_iter()
            .map(|x_lin| {
                let mut slab = vec![Complex64::default(); modes];
                let mut any = false;
                for (b_lin, slot) in slab.iter_mut().enumerate() {
                    let bi = (b_lin / side) as i64;
                    let bj = (b_lin % side) as i64;
                    let ei = if bi < side as i64 / 2 { bi } else { bi - side as i64 };
                    let ej = if bj < side as i64 / 2 { bj } else { bj - side as i64 };
                    let rho = ((ei * ei + ej * ej) as f64).sqrt();
                    let w = lp_profile(k, top, rho);
                    if w == 0.0 {
                        continue;
                    }
                    *slot = a.eval(x_lin, [ei as f64, ej as f64]) * w;
                    any = true;
                }
                if any {
                    ndfft_box(&mut slab, side);
                    let s = 1.0 / modes as f64;
                    for v in slab.iter_mut() {
                        *v *= s;
                    }
                }
                slab
            })
            .collect();

        // prune modes by their sup over x
        let mode_tol = tol / (4.0 * (1.0 + top as f64) * modes as f64);
        let mut kept_modes = Vec::new();
        for m_lin in 0..modes {
            let w = coeffs.iter().map(|c| c[m_lin].norm()).fold(0.0, f64::max);
            if w > mode_tol {
                kept_modes.push(m_lin);
            } else {
                trunc += w;
            }
        }
        if kept_modes.is_empty() {
            continue;
        }
        // SVD the (x, kept mode) coefficient matrix
        let mat = DMatrix::from_fn(count, kept_modes.len(), |r, c| coeffs[r][kept_modes[c]]);
        let svd = mat.svd(true, true);
        let u = svd.u.as_ref().expect("u");
        let vt = svd.v_t.as_ref().expect("vt");
        let s = &svd.singular_values;
        for (i, &sv) in s.iter().enumerate() {
            // the frequency profiles built below have sup <= sqrt(modes), so
            // weight the cutoff accordingly
            if sv * (kept_modes.len() as f64).sqrt() <= tol / (2.0 * (1.0 + top as f64)) {
                trunc += sv;
                continue;
            }
            let spatial: Vec<Complex64> = (0..count).map(|r| u[(r, i)]).collect();
            // frequency profile on the annulus lattice from the kept modes
            let mut freq = vec![Complex64::default(); count];
            for &(lin, _) in &pts {
                let e = grid.freq_of(lin);
                let mut acc = Complex64::default();
                for (c, &m_lin) in kept_modes.iter().enumerate() {
                    let bi = (m_lin / side) as i64;
                    let bj = (m_lin % side) as i64;
                    let mi = if bi < side as i64 / 2 { bi } else { bi - side as i64 };
                    let mj = if bj < side as i64 / 2 { bj } else { bj - side as i64 };
                    let phase = 2.0 * std::f64::consts::PI * ((mi * e[0] + mj * e[1]) as f64)
                        / side as f64;
                    acc += vt[(i, c)] * Complex64::new(phase.cos(), phase.sin());
                }
                freq[lin] = acc;
            }
            terms.push(SepTerm {
                annulus: k,
                weight: sv,
                spatial,
                freq,
            });
        }
    }
    if terms.len() > max_terms {
        return Err(FioError::Truncation(format!(
            "needs {} terms for tol {tol:.1e}, budget {max_terms}",
            terms.len()
        )));
    }
    terms.sort_by(|x, y| y.weight.partial_cmp(&x.weight).unwrap());
    Ok(SeparableExpansion {
        grid,
        terms,
        truncation_error: trunc,
        tol,
    })
}

fn ndfft_box(data: &mut [Complex64], side: usize) {
    use rustfft::FftPlanner;
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(side);
    for row in data.chunks_exact_mut(side) {
        fft.process(row);
    }
    let mut col = vec![Complex64::default(); side];
    for c in 0..side {
        for r in 0..side {
            col[r] = data[r * side + c];
        }
        fft.process(&mut col);
        for r in 0..side {
            data[r * side + c] = col[r];
        }
    }
}

impl SeparableExpansion {
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Terms on a given annulus.
    pub fn terms_on(&self, k: usize) -> usize {
        self.terms.iter().filter(|t| t.annulus == k).count()
    }

    /// Evaluate the expansion at a lattice point.
    pub fn eval(&self, x_lin: usize, eta: [i64; 2]) -> Complex64 {
        let lat = self.grid.lin_of(&eta);
        self.terms
            .iter()
            .map(|t| t.spatial[x_lin] * t.freq[lat] * t.weight)
            .sum()
    }

    /// Apply `a(x,D) f = sum_t weight_t * spatial_t .* (freq_t(D) f)`.
    pub fn apply(&self, f: &Field) -> Result<Field> {
        self.grid.same(f.grid())?;
        let count = self.grid.point_count();
        let spec = f.spectrum();
        let partials: Vec<Vec<Complex64>> = self
            .terms
            .par_iter()
            .map(|t| {
                let filt: Vec<Complex64> = spec
                    .iter()
                    .zip(t.freq.iter())
                    .map(|(v, w)| v * w)
                    .collect();
                let base = Field::from_spectrum(self.grid.clone(), filt).expect("grid");
                base.samples()
                    .iter()
                    .zip(t.spatial.iter())
                    .map(|(b, s)| b * s * t.weight)
                    .collect()
            })
            .collect();
        let mut acc = vec![Complex64::default(); count];
        for p in partials {
            for (slot, v) in acc.iter_mut().zip(p.iter()) {
                *slot += v;
            }
        }
        Field::from_samples(self.grid.clone(), acc)
    }

    /// Exact adjoint of [`SeparableExpansion::apply`].
    pub fn apply_adjoint(&self, g: &Field) -> Result<Field> {
        self.grid.same(g.grid())?;
        let count = self.grid.point_count();
        let partials: Vec<Vec<Complex64>> = self
            .terms
            .par_iter()
            .map(|t| {
                // adjoint of spatial .* freq(D): conj(freq)(D) (conj(spatial) .* g)
                let prod: Vec<Complex64> = g
                    .samples()
                    .iter()
                    .zip(t.spatial.iter())
                    .map(|(v, s)| v * s.conj() * t.weight)
                    .collect();
                let field = Field::from_samples(self.grid.clone(), prod).expect("grid");
                field
                    .spectrum()
                    .iter()
                    .zip(t.freq.iter())
                    .map(|(v, w)| v * w.conj())
                    .collect()
            })
            .collect();
        let mut acc = vec![Complex64::default(); count];
        for p in partials {
            for (slot, v) in acc.iter_mut().zip(p.iter()) {
                *slot += v;
            }
        }
        Field::from_spectrum(self.grid.clone(), acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::{quantize_apply, SymbolClass};

    #[test]
    fn product_symbol_is_rank_one_per_annulus() {
        // a(x,eta) = b(x) chi(eta) with chi one LP shell: exactly one term on
        // the overlapping annuli, zero error
        let grid = Grid::square(16).unwrap();
        let lp = LPFamily::new(&grid);
        let top = lp.len() - 1;
        let b = Field::from_fn(&grid, |x| Complex64::new((x[0]).cos() + 1.5, 0.0));
        let bb = b.clone();
        let a = Symbol::from_fn(
            &grid,
            0.0,
            SymbolClass::ZygmundRough { r: 3.0, delta: 0.0 },
            move |x_lin, eta| {
                let rho = (eta[0] * eta[0] + eta[1] * eta[1]).sqrt();
                bb.samples()[x_lin] * lp_profile(2, top, rho)
            },
        );
        let exp = separable_expand(&a, 1e-10, 64).unwrap();
        for k in 0..=top {
            assert!(exp.terms_on(k) <= 1, "annulus {k} has {} terms", exp.terms_on(k));
        }
        for lin in [0usize, 3, 77] {
            for eta in [[2i64, 0], [3, 1], [0, 2]] {
                let direct = a.eval(lin, [eta[0] as f64, eta[1] as f64]);
                let via = exp.eval(lin, eta);
                assert!((direct - via).norm() <= 1e-9, "mismatch at {eta:?}");
            }
        }
    }

    #[test]
    fn expansion_apply_matches_direct_quantization() {
        let grid = Grid::square(16).unwrap();
        let f = Field::random_band(&grid, 0.0, 100.0, 21);
        let a = Symbol::from_fn(
            &grid,
            0.0,
            SymbolClass::ZygmundRough { r: 2.0, delta: 0.0 },
            |x_lin, eta| {
                let q = 1.0 / (1.0 + eta[0] * eta[0] + eta[1] * eta[1]).sqrt();
                Complex64::new(1.0 + 0.4 * ((x_lin % 16) as f64 * 0.39).sin() * q, 0.1 * q)
            },
        );
        let exp = separable_expand(&a, 1e-9, 100_000).unwrap();
        let dense = quantize_apply(&a, &f).unwrap();
        let fast = exp.apply(&f).unwrap();
        let rel = fast.sub(&dense).norm_l2() / dense.norm_l2();
        assert!(rel <= 1e-7, "expansion apply error {rel}");
        let g = Field::random_band(&grid, 0.0, 100.0, 22);
        let lhs = fast.inner(&g);
        let rhs = f.inner(&exp.apply_adjoint(&g).unwrap());
        assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + lhs.norm()));
    }

    #[test]
    fn eta_smooth_symbol_needs_few_terms() {
        // spec target: error <= 1e-8 with at most 8 terms per annulus
        let grid = Grid::square(32).unwrap();
        let b = Field::from_fn(&grid, |x| Complex64::new(1.0 + 0.5 * x[1].sin(), 0.0));
        let bb = b.clone();
        let a = Symbol::from_fn(
            &grid,
            0.0,
            SymbolClass::ZygmundRough { r: 3.0, delta: 0.0 },
            move |x_lin, _eta| bb.samples()[x_lin],
        );
        let exp = separable_expand(&a, 1e-8, 100_000).unwrap();
        let lp = LPFamily::new(&grid);
        for k in 0..lp.len() {
            assert!(
                exp.terms_on(k) <= 8,
                "annulus {k}: {} terms",
                exp.terms_on(k)
            );
        }
    }

    #[test]
    fn term_budget_enforced() {
        let grid = Grid::square(16).unwrap();
        let a = Symbol::from_fn(
            &grid,
            0.0,
            SymbolClass::ZygmundRough { r: 0.5, delta: 0.0 },
            |x_lin, eta| {
                Complex64::new(((x_lin as f64) * 1.7).sin() * (eta[0] * 0.9).cos(), 0.0)
            },
        );
        assert!(separable_expand(&a, 1e-12, 3).is_err());
    }

    #[test]
    fn term_count_grows_slowly_in_tolerance() {
        let grid = Grid::square(16).unwrap();
        let b = Field::from_fn(&grid, |x| Complex64::new(1.0 + 0.3 * (x[0] + x[1]).cos(), 0.0));
        let bb = b.clone();
        let a = Symbol::from_fn(
            &grid,
            0.0,
            SymbolClass::ZygmundRough { r: 3.0, delta: 0.0 },
            move |x_lin, eta| {
                let q = (-0.1 * (eta[0] * eta[0] + eta[1] * eta[1]).sqrt()).exp();
                bb.samples()[x_lin] * Complex64::new(1.0 + 0.2 * q, 0.0)
            },
        );
        let counts: Vec<usize> = [1e-4, 1e-6, 1e-8]
            .iter()
            .map(|&tol| separable_expand(&a, tol, 1_000_000).unwrap().term_count())
            .collect();
        let g1 = counts[1] as f64 - counts[0] as f64;
        let g2 = counts[2] as f64 - counts[1] as f64;
        assert!(
            g2 <= (g1.max(0.0) + 8.0) * 2.0,
            "superlinear growth {counts:?}"
        );
    }
}
