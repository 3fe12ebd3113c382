//! Rough pseudodifferential symbols `a(x, eta)`: representation, seminorm
//! estimation, Kohn-Nirenberg quantization, symbol smoothing, and the
//! separable (per-annulus Fourier) expansion used to apply operators fast.

mod quantize;
pub(crate) mod seminorm;
mod separable;
mod smoothing;

pub use quantize::{quantize_adjoint, quantize_apply};
pub use seminorm::{estimate_seminorm, weierstrass, SeminormEntry, SeminormReport};
pub use separable::{separable_expand, SeparableExpansion};
pub use smoothing::smooth_split;

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{FioError, Result};
use crate::grid::Grid;

/// Declared symbol class.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub enum SymbolClass {
    /// Hoermander `S^m_{rho,delta}`.
    #[serde(rename = "S^m_{rho,delta}")]
    Hormander { rho: f64, delta: f64 },
    /// `C^r_* S^m_{1,delta}` (Zygmund spatial regularity).
    #[serde(rename = "C^r_* S^m_{1,delta}")]
    ZygmundRough { r: f64, delta: f64 },
    /// `h^{r,inf} S^m_{1,delta}` surrogate.
    #[serde(rename = "h^{r,inf} S^m_{1,delta}")]
    SobolevRough { r: f64, delta: f64 },
    /// `A^r S^m_{1,delta}` (extra smoothness in x).
    #[serde(rename = "A^r S^m_{1,delta}")]
    ExtraSmooth { r: f64, delta: f64 },
}

enum Backend {
    Closure(Arc<dyn Fn(usize, [f64; 2]) -> Complex64 + Send + Sync>),
    /// x-major table: `values[x_lin * count + eta_lin]`.
    Dense(Arc<Vec<Complex64>>),
}

impl Clone for Backend {
    fn clone(&self) -> Self {
        match self {
            Backend::Closure(f) => Backend::Closure(f.clone()),
            Backend::Dense(v) => Backend::Dense(v.clone()),
        }
    }
}

/// Declared spatial Fourier support of `a(., eta)`: for each frequency the
/// spatial spectrum lies in the annulus `[lo(eta), hi(eta)]`.
#[derive(Clone)]
pub struct SpatialSupport {
    pub lo: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub hi: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

/// A rough pseudodifferential symbol with metadata.
#[derive(Clone)]
pub struct Symbol {
    grid: Grid,
    backend: Backend,
    /// Order m.
    pub order: f64,
    /// Spatial regularity r.
    pub regularity: f64,
    /// Type delta.
    pub delta: f64,
    pub class: SymbolClass,
    pub spatial_support: Option<SpatialSupport>,
    expansion: Option<Arc<SeparableExpansion>>,
}

impl std::fmt::Debug for Symbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Symbol")
            .field("order", &self.order)
            .field("regularity", &self.regularity)
            .field("delta", &self.delta)
            .field("class", &self.class)
            .finish()
    }
}

impl Symbol {
    /// Symbol from an evaluator over (grid point index, frequency vector).
    /// The frequency argument is continuous so eta-derivatives can be taken
    /// by finite differences.
    pub fn from_fn(
        grid: &Grid,
        order: f64,
        class: SymbolClass,
        eval: impl Fn(usize, [f64; 2]) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        let (regularity, delta) = match class {
            SymbolClass::Hormander { delta, .. } => (f64::INFINITY, delta),
            SymbolClass::ZygmundRough { r, delta }
            | SymbolClass::SobolevRough { r, delta }
            | SymbolClass::ExtraSmooth { r, delta } => (r, delta),
        };
        Symbol {
            grid: grid.clone(),
            backend: Backend::Closure(Arc::new(eval)),
            order,
            regularity,
            delta,
            class,
            spatial_support: None,
            expansion: None,
        }
    }

    /// Frequency-only symbol `a(x, eta) = m(eta)`.
    pub fn from_multiplier(grid: &Grid, order: f64, m: impl Fn([f64; 2]) -> Complex64 + Send + Sync + 'static) -> Self {
        Symbol::from_fn(
            grid,
            order,
            SymbolClass::Hormander { rho: 1.0, delta: 0.0 },
            move |_, eta| m(eta),
        )
    }

    /// Dense x-major sample table.
    pub fn from_dense(
        grid: &Grid,
        order: f64,
        class: SymbolClass,
        values: Vec<Complex64>,
    ) -> Result<Self> {
        let count = grid.point_count();
        if values.len() != count * count {
            return Err(FioError::GridMismatch(
                "dense symbol table must be N^n x N^n".into(),
            ));
        }
        let mut s = Symbol::from_fn(grid, order, class, |_, _| Complex64::default());
        s.backend = Backend::Dense(Arc::new(values));
        Ok(s)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn with_spatial_support(mut self, support: SpatialSupport) -> Self {
        self.spatial_support = Some(support);
        self
    }

    pub fn with_expansion(mut self, exp: SeparableExpansion) -> Self {
        self.expansion = Some(Arc::new(exp));
        self
    }

    pub fn expansion(&self) -> Option<&SeparableExpansion> {
        self.expansion.as_deref()
    }

    /// Evaluate at a grid point (by linear index) and continuous frequency.
    /// Dense-backed symbols round the frequency to the lattice.
    pub fn eval(&self, x_lin: usize, eta: [f64; 2]) -> Complex64 {
        match &self.backend {
            Backend::Closure(f) => f(x_lin, eta),
            Backend::Dense(v) => {
                let count = self.grid.point_count();
                let lin = self
                    .grid
                    .lin_of(&[eta[0].round() as i64, eta[1].round() as i64]);
                v[x_lin * count + lin]
            }
        }
    }

    /// Samples of `a(., eta)` over the grid for a fixed lattice frequency.
    pub fn x_slice(&self, eta: [f64; 2]) -> Vec<Complex64> {
        (0..self.grid.point_count())
            .map(|x| self.eval(x, eta))
            .collect()
    }

    /// Verify the declared spatial Fourier support bounds exactly on the
    /// lattice (used by tests; cost one spatial FFT per lattice frequency).
    pub fn verify_spatial_support(&self, tol: f64) -> Result<()> {
        let Some(sup) = &self.spatial_support else {
            return Ok(());
        };
        let grid = &self.grid;
        for lin_eta in 0..grid.point_count() {
            let eta_i = grid.freq_of(lin_eta);
            let eta = [eta_i[0] as f64, eta_i[1] as f64];
            let slice = crate::grid::Field::from_samples(grid.clone(), self.x_slice(eta))?;
            let spec = slice.spectrum();
            let lo = (sup.lo)((eta[0] * eta[0] + eta[1] * eta[1]).sqrt());
            let hi = (sup.hi)((eta[0] * eta[0] + eta[1] * eta[1]).sqrt());
            let scale = spec.iter().map(|v| v.norm()).fold(0.0, f64::max);
            for (lin_xi, v) in spec.iter().enumerate() {
                if v.norm() <= tol * scale.max(1e-300) {
                    continue;
                }
                let xi = grid.freq_of(lin_xi);
                let r = ((xi[0] * xi[0] + xi[1] * xi[1]) as f64).sqrt();
                if r < lo - 1e-9 || r > hi + 1e-9 {
                    return Err(FioError::Frame(format!(
                        "spatial spectrum of a(., {eta:?}) leaks to |xi| = {r} outside [{lo}, {hi}]"
                    )));
                }
            }
        }
        Ok(())
    }
}
