//! Fourier multipliers `m(D)` sampled on the frequency lattice.

use num_complex::Complex64;

use crate::error::{FioError, Result};
use crate::grid::{Field, Grid};

/// Declared frequency-support bounds of a multiplier, used by tests to check
/// that supports hold exactly on the lattice.
#[derive(Clone, Debug, Default)]
pub struct SupportBounds {
    /// `m(eta) = 0` whenever `|eta| < rho_min`.
    pub rho_min: f64,
    /// `m(eta) = 0` whenever `|eta| > rho_max` (infinite if unbounded).
    pub rho_max: f64,
    /// Optional angular cone: unit direction and maximal chord `|etahat - dir|`.
    pub cone: Option<(Vec<f64>, f64)>,
}

/// A scalar function of frequency sampled on the lattice.
#[derive(Clone, Debug)]
pub struct MultiplierSpec {
    pub name: String,
    grid: Grid,
    values: Vec<Complex64>,
    pub support: Option<SupportBounds>,
}

impl MultiplierSpec {
    pub fn from_values(name: &str, grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.point_count() {
            return Err(FioError::GridMismatch("multiplier length mismatch".into()));
        }
        Ok(MultiplierSpec {
            name: name.into(),
            grid,
            values,
            support: None,
        })
    }

    /// Sample a real-valued function of the frequency vector.
    pub fn from_fn(name: &str, grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.point_count())
            .map(|lin| {
                let eta: Vec<f64> = grid.freq_of(lin).iter().map(|&e| e as f64).collect();
                Complex64::new(f(&eta), 0.0)
            })
            .collect();
        MultiplierSpec {
            name: name.into(),
            grid: grid.clone(),
            values,
            support: None,
        }
    }

    /// Sample a complex-valued function of the frequency vector.
    pub fn from_fn_complex(name: &str, grid: &Grid, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let values = (0..grid.point_count())
            .map(|lin| {
                let eta: Vec<f64> = grid.freq_of(lin).iter().map(|&e| e as f64).collect();
                f(&eta)
            })
            .collect();
        MultiplierSpec {
            name: name.into(),
            grid: grid.clone(),
            values,
            support: None,
        }
    }

    /// Sample a radial profile `m(|eta|)`.
    pub fn from_radial(name: &str, grid: &Grid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(name, grid, |eta| {
            f((eta.iter().map(|e| e * e).sum::<f64>()).sqrt())
        })
    }

    pub fn with_support(mut self, support: SupportBounds) -> Self {
        self.support = Some(support);
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Pointwise product of two multipliers.
    pub fn product(&self, other: &MultiplierSpec) -> Result<MultiplierSpec> {
        self.grid.same(other.grid())?;
        let values = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| a * b)
            .collect();
        Ok(MultiplierSpec {
            name: format!("{}*{}", self.name, other.name),
            grid: self.grid.clone(),
            values,
            support: None,
        })
    }

    /// Check declared support bounds exactly on the lattice.
    pub fn verify_support(&self) -> Result<()> {
        let Some(sb) = &self.support else {
            return Ok(());
        };
        for (lin, v) in self.values.iter().enumerate() {
            if v.norm() == 0.0 {
                continue;
            }
            let eta: Vec<f64> = self.grid.freq_of(lin).iter().map(|&e| e as f64).collect();
            let rho = eta.iter().map(|e| e * e).sum::<f64>().sqrt();
            if rho < sb.rho_min || rho > sb.rho_max {
                return Err(FioError::Frame(format!(
                    "{}: nonzero value at |eta|={rho} outside [{}, {}]",
                    self.name, sb.rho_min, sb.rho_max
                )));
            }
            if let Some((dir, max_chord)) = &sb.cone {
                if rho > 0.0 {
                    let chord: f64 = eta
                        .iter()
                        .zip(dir.iter())
                        .map(|(e, d)| (e / rho - d).powi(2))
                        .sum::<f64>()
                        .sqrt();
                    if chord > *max_chord {
                        return Err(FioError::Frame(format!(
                            "{}: nonzero value at chord {chord} > {max_chord}",
                            self.name
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Apply a Fourier multiplier: the output transform is `m(eta)` times the
/// transform of `f`, pointwise on the lattice.
pub fn apply_multiplier(f: &Field, m: &MultiplierSpec) -> Result<Field> {
    f.grid().same(m.grid())?;
    let spec = f.spectrum();
    let out: Vec<Complex64> = spec
        .iter()
        .zip(m.values().iter())
        .map(|(a, b)| a * b)
        .collect();
    Field::from_spectrum(f.grid().clone(), out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_multiplier_is_identity() {
        let grid = Grid::square(16).unwrap();
        let f = Field::random_band(&grid, 0.0, 100.0, 3);
        let one = MultiplierSpec::from_fn("one", &grid, |_| 1.0);
        let g = apply_multiplier(&f, &one).unwrap();
        assert!(f.sub(&g).norm_l2() <= 1e-12);
    }

    #[test]
    fn mean_projection() {
        // m = indicator of {0}, f = 3 + e^{i x1} -> constant field 3
        let grid = Grid::square(16).unwrap();
        let wave = Field::plane_wave(&grid, &[1, 0]);
        let f = wave.axpy(
            Complex64::new(3.0, 0.0),
            &Field::from_fn(&grid, |_| Complex64::new(1.0, 0.0)),
        );
        let m = MultiplierSpec::from_fn("mean", &grid, |eta| {
            if eta.iter().all(|&e| e == 0.0) {
                1.0
            } else {
                0.0
            }
        });
        let g = apply_multiplier(&f, &m).unwrap();
        for v in g.samples() {
            assert!((v - Complex64::new(3.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn laplacian_eigenfunction() {
        // m(eta)=|eta|^2, f = e^{i(2x1+x2)} -> 5 f
        let grid = Grid::square(16).unwrap();
        let f = Field::plane_wave(&grid, &[2, 1]);
        let m = MultiplierSpec::from_fn("abs2", &grid, |eta| eta.iter().map(|e| e * e).sum());
        let g = apply_multiplier(&f, &m).unwrap();
        let expect = f.scale(Complex64::new(5.0, 0.0));
        assert!(g.sub(&expect).norm_l2() / expect.norm_l2() < 1e-12);
    }

    #[test]
    fn grid_mismatch_rejected() {
        let g1 = Grid::square(16).unwrap();
        let g2 = Grid::square(32).unwrap();
        let f = Field::zero(&g1);
        let m = MultiplierSpec::from_fn("one", &g2, |_| 1.0);
        assert!(apply_multiplier(&f, &m).is_err());
    }

    #[test]
    fn composition_equals_product() {
        let grid = Grid::square(16).unwrap();
        let f = Field::random_band(&grid, 0.0, 100.0, 11);
        let m1 = MultiplierSpec::from_radial("r1", &grid, |r| 1.0 / (1.0 + r));
        let m2 = MultiplierSpec::from_fn("r2", &grid, |eta| eta[0]);
        let lhs = apply_multiplier(&apply_multiplier(&f, &m1).unwrap(), &m2).unwrap();
        let rhs = apply_multiplier(&f, &m1.product(&m2).unwrap()).unwrap();
        let denom = rhs.norm_l2().max(1e-30);
        assert!(lhs.sub(&rhs).norm_l2() / denom <= 1e-12);
    }
}
