//! Periodic grid and complex fields with cached Fourier coefficients.
//!
//! The discrete model is the torus `[0, 2pi)^n` sampled at `N` points per
//! axis. The frequency lattice is the set of integer vectors in
//! `[-N/2, N/2)^n`. Transform conventions:
//!
//! * forward:  `fhat(eta) = h^n * sum_x f(x) exp(-i eta.x)`, `h = 2pi/N`,
//! * inverse:  `f(x) = (2pi)^-n * sum_eta fhat(eta) exp(i eta.x)`,
//!
//! which are exact inverses on the lattice and make Parseval hold to
//! rounding: `<f,g> = h^n sum f conj(g) = (2pi)^-n sum fhat conj(ghat)`.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{FioError, Result};

/// Periodic n-dimensional sampling grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    n: usize,
    size: usize,
}

impl Grid {
    pub fn new(n: usize, size: usize) -> Result<Self> {
        if n == 0 {
            return Err(FioError::UnsupportedRange("dimension must be >= 1".into()));
        }
        if size < 8 || size % 2 != 0 {
            return Err(FioError::UnsupportedRange(format!(
                "points-per-axis must be even and >= 8, got {size}"
            )));
        }
        Ok(Grid { n, size })
    }

    /// Planar grid, the default model (n = 2).
    pub fn square(size: usize) -> Result<Self> {
        Grid::new(2, size)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Total number of samples `N^n`.
    pub fn point_count(&self) -> usize {
        self.size.pow(self.n as u32)
    }

    /// Physical spacing `2pi / N`.
    pub fn spacing(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.size as f64
    }

    /// Cell measure `h^n`.
    pub fn cell_measure(&self) -> f64 {
        self.spacing().powi(self.n as i32)
    }

    /// Signed integer frequency for a 1-d bin index.
    #[inline]
    pub fn freq_1d(&self, idx: usize) -> i64 {
        let half = self.size / 2;
        if idx < half {
            idx as i64
        } else {
            idx as i64 - self.size as i64
        }
    }

    /// Frequency vector of a linear spectral index (row-major).
    pub fn freq_of(&self, lin: usize) -> Vec<i64> {
        let mut out = vec![0i64; self.n];
        let mut rem = lin;
        for ax in (0..self.n).rev() {
            out[ax] = self.freq_1d(rem % self.size);
            rem /= self.size;
        }
        out
    }

    /// Physical coordinates of a linear sample index.
    pub fn point_of(&self, lin: usize) -> Vec<f64> {
        let h = self.spacing();
        let mut out = vec![0.0; self.n];
        let mut rem = lin;
        for ax in (0..self.n).rev() {
            out[ax] = (rem % self.size) as f64 * h;
            rem /= self.size;
        }
        out
    }

    /// Linear index from per-axis indices (wrapping).
    pub fn lin_of(&self, idx: &[i64]) -> usize {
        let mut lin = 0usize;
        for ax in 0..self.n {
            let m = idx[ax].rem_euclid(self.size as i64) as usize;
            lin = lin * self.size + m;
        }
        lin
    }

    /// Largest frequency magnitude on the lattice (corner).
    pub fn max_freq(&self) -> f64 {
        (self.n as f64).sqrt() * (self.size as f64 / 2.0)
    }

    pub fn same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(FioError::GridMismatch(format!(
                "expected n={} N={}, got n={} N={}",
                self.n, self.size, other.n, other.size
            )));
        }
        Ok(())
    }
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry((len, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(len)
            } else {
                planner.plan_fft_forward(len)
            }
        })
        .clone()
}

/// Unnormalized n-D DFT in place over a row-major hypercube.
fn ndfft(data: &mut [Complex64], n: usize, size: usize, inverse: bool) {
    let fft = plan(size, inverse);
    let total = data.len();
    debug_assert_eq!(total, size.pow(n as u32));
    let mut scratch = vec![Complex64::default(); size];
    for ax in 0..n {
        // stride between consecutive elements along axis `ax`
        let stride = size.pow((n - 1 - ax) as u32);
        let block = stride * size;
        if stride == 1 {
            for chunk in data.chunks_exact_mut(size) {
                fft.process(chunk);
            }
        } else {
            for base in (0..total).step_by(block) {
                for off in 0..stride {
                    for (s, slot) in scratch.iter_mut().enumerate() {
                        *slot = data[base + off + s * stride];
                    }
                    fft.process(&mut scratch);
                    for (s, v) in scratch.iter().enumerate() {
                        data[base + off + s * stride] = *v;
                    }
                }
            }
        }
    }
}

/// Complex-valued function sampled on a [`Grid`], with a lazily cached
/// forward transform. Immutable after construction.
#[derive(Clone, Debug)]
pub struct Field {
    grid: Grid,
    samples: Arc<Vec<Complex64>>,
    spectrum: OnceLock<Arc<Vec<Complex64>>>,
}

impl Field {
    pub fn from_samples(grid: Grid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.point_count() {
            return Err(FioError::GridMismatch(format!(
                "sample count {} does not match grid {}",
                samples.len(),
                grid.point_count()
            )));
        }
        Ok(Field {
            grid,
            samples: Arc::new(samples),
            spectrum: OnceLock::new(),
        })
    }

    pub fn zero(grid: &Grid) -> Self {
        Field {
            grid: grid.clone(),
            samples: Arc::new(vec![Complex64::default(); grid.point_count()]),
            spectrum: OnceLock::new(),
        }
    }

    /// Build from Fourier coefficients on the frequency lattice.
    pub fn from_spectrum(grid: Grid, mut spec: Vec<Complex64>) -> Result<Self> {
        if spec.len() != grid.point_count() {
            return Err(FioError::GridMismatch("spectrum length mismatch".into()));
        }
        let keep = spec.clone();
        ndfft(&mut spec, grid.dim(), grid.size(), true);
        let scale = 1.0 / (2.0 * std::f64::consts::PI).powi(grid.dim() as i32);
        for v in spec.iter_mut() {
            *v *= scale;
        }
        let f = Field {
            grid,
            samples: Arc::new(spec),
            spectrum: OnceLock::new(),
        };
        let _ = f.spectrum.set(Arc::new(keep));
        Ok(f)
    }

    /// Sample a function of the physical coordinates.
    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let mut samples = vec![Complex64::default(); grid.point_count()];
        for (lin, slot) in samples.iter_mut().enumerate() {
            *slot = f(&grid.point_of(lin));
        }
        Field {
            grid: grid.clone(),
            samples: Arc::new(samples),
            spectrum: OnceLock::new(),
        }
    }

    /// Plane wave `exp(i k.x)` for an integer frequency vector.
    pub fn plane_wave(grid: &Grid, k: &[i64]) -> Self {
        Field::from_fn(grid, |x| {
            let phase: f64 = x.iter().zip(k).map(|(xi, ki)| xi * *ki as f64).sum();
            Complex64::new(phase.cos(), phase.sin())
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// Fourier coefficients `fhat(eta)`, computed once and cached.
    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum.get_or_init(|| {
            let mut data = self.samples.as_ref().clone();
            ndfft(&mut data, self.grid.dim(), self.grid.size(), false);
            let scale = self.grid.cell_measure();
            for v in data.iter_mut() {
                *v *= scale;
            }
            Arc::new(data)
        })
    }

    /// `L^2` norm with the torus measure.
    pub fn norm_l2(&self) -> f64 {
        let s: f64 = self.samples.iter().map(|v| v.norm_sqr()).sum();
        (s * self.grid.cell_measure()).sqrt()
    }

    /// `L^p` norm on the torus; `p = inf` gives the max norm.
    pub fn norm_lp(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.samples.iter().map(|v| v.norm()).fold(0.0, f64::max);
        }
        let s: f64 = self.samples.iter().map(|v| v.norm().powf(p)).sum();
        (s * self.grid.cell_measure()).powf(1.0 / p)
    }

    /// Sesquilinear inner product `<f,g> = h^n sum f conj(g)`.
    pub fn inner(&self, other: &Field) -> Complex64 {
        debug_assert_eq!(self.grid, other.grid);
        let s: Complex64 = self
            .samples
            .iter()
            .zip(other.samples.iter())
            .map(|(a, b)| a * b.conj())
            .sum();
        s * self.grid.cell_measure()
    }

    pub fn scale(&self, c: Complex64) -> Field {
        let samples = self.samples.iter().map(|v| v * c).collect();
        Field {
            grid: self.grid.clone(),
            samples: Arc::new(samples),
            spectrum: OnceLock::new(),
        }
    }

    pub fn add(&self, other: &Field) -> Field {
        debug_assert_eq!(self.grid, other.grid);
        let samples = self
            .samples
            .iter()
            .zip(other.samples.iter())
            .map(|(a, b)| a + b)
            .collect();
        Field {
            grid: self.grid.clone(),
            samples: Arc::new(samples),
            spectrum: OnceLock::new(),
        }
    }

    pub fn sub(&self, other: &Field) -> Field {
        debug_assert_eq!(self.grid, other.grid);
        let samples = self
            .samples
            .iter()
            .zip(other.samples.iter())
            .map(|(a, b)| a - b)
            .collect();
        Field {
            grid: self.grid.clone(),
            samples: Arc::new(samples),
            spectrum: OnceLock::new(),
        }
    }

    pub fn axpy(&self, c: Complex64, other: &Field) -> Field {
        debug_assert_eq!(self.grid, other.grid);
        let samples = self
            .samples
            .iter()
            .zip(other.samples.iter())
            .map(|(a, b)| a + c * b)
            .collect();
        Field {
            grid: self.grid.clone(),
            samples: Arc::new(samples),
            spectrum: OnceLock::new(),
        }
    }

    /// Pointwise product `self * other` in physical space.
    pub fn mul_pointwise(&self, other: &Field) -> Field {
        debug_assert_eq!(self.grid, other.grid);
        let samples = self
            .samples
            .iter()
            .zip(other.samples.iter())
            .map(|(a, b)| a * b)
            .collect();
        Field {
            grid: self.grid.clone(),
            samples: Arc::new(samples),
            spectrum: OnceLock::new(),
        }
    }

    /// Pointwise product with a real scalar function given by samples.
    pub fn mul_real(&self, weights: &[f64]) -> Field {
        debug_assert_eq!(self.samples.len(), weights.len());
        let samples = self
            .samples
            .iter()
            .zip(weights.iter())
            .map(|(a, w)| a * *w)
            .collect();
        Field {
            grid: self.grid.clone(),
            samples: Arc::new(samples),
            spectrum: OnceLock::new(),
        }
    }

    /// Seeded band-limited random field: unit-variance Gaussian coefficients on
    /// lattice frequencies with `lo <= |eta| <= hi`, then normalized to unit L2.
    pub fn random_band(grid: &Grid, lo: f64, hi: f64, seed: u64) -> Field {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut spec = vec![Complex64::default(); grid.point_count()];
        for (lin, slot) in spec.iter_mut().enumerate() {
            let eta = grid.freq_of(lin);
            let rho = (eta.iter().map(|&e| (e * e) as f64).sum::<f64>()).sqrt();
            if rho >= lo && rho <= hi {
                // Box-Muller
                let u1: f64 = rng.gen_range(1e-12..1.0);
                let u2: f64 = rng.gen_range(0.0..1.0);
                let r = (-2.0 * u1.ln()).sqrt();
                *slot = Complex64::new(
                    r * (2.0 * std::f64::consts::PI * u2).cos(),
                    r * (2.0 * std::f64::consts::PI * u2).sin(),
                );
            }
        }
        let f = Field::from_spectrum(grid.clone(), spec).expect("matching length");
        let n = f.norm_l2();
        if n > 0.0 {
            f.scale(Complex64::new(1.0 / n, 0.0))
        } else {
            f
        }
    }
}
