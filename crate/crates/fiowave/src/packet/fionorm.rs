//! The FIO-adapted quasi-norm: low-frequency `L^p` term plus a direction
//! quadrature of `H^{s,p}` norms of the parabolic-cutoff pieces.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{FioError, Result};
use crate::grid::Field;
use crate::lp::LPFamily;
use crate::multiplier::{apply_multiplier, MultiplierSpec};
use crate::norms::{norm_classical, SpaceTag};
use crate::packet::{parabolic_cutoff_phi, PacketFrame};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Norm value with every term that produced it.
#[derive(Clone, Debug, Serialize)]
pub struct FIONormReport {
    pub s: f64,
    pub p: f64,
    pub total: f64,
    /// `||q(D) f||_p`.
    pub lowfreq: f64,
    /// Quadrature angles of the direction set.
    pub angles: Vec<f64>,
    /// Per-direction `||phi_nu(D) f||_{H^{s,p}}`.
    pub terms: Vec<f64>,
    /// Uniform quadrature weight `2 pi / N_dirs`.
    pub weight: f64,
    /// True when the inner norm used the flagged `p = inf` surrogate.
    pub surrogate: bool,
}

/// Precomputed direction set and cutoff multipliers for a fixed frame, so
/// repeated norm evaluations share the expensive quadrature.
pub struct FioNormEngine {
    lp: LPFamily,
    angles: Vec<f64>,
    phis: Vec<MultiplierSpec>,
    weight: f64,
}

impl FioNormEngine {
    /// Direction count `N = 2^(ceil(J/2) + 3)` from the frame depth.
    pub fn default_dirs(levels: usize) -> usize {
        1usize << (levels.div_ceil(2) + 3)
    }

    pub fn new(frame: &PacketFrame) -> Self {
        Self::with_dirs(frame, Self::default_dirs(frame.levels()))
    }

    pub fn with_dirs(frame: &PacketFrame, n_dirs: usize) -> Self {
        let lp = LPFamily::new(frame.grid());
        let angles: Vec<f64> = (0..n_dirs)
            .map(|i| TWO_PI * i as f64 / n_dirs as f64)
            .collect();
        let phis: Vec<MultiplierSpec> = angles
            .par_iter()
            .map(|&th| parabolic_cutoff_phi([th.cos(), th.sin()], frame))
            .collect();
        FioNormEngine {
            lp,
            angles,
            phis,
            weight: TWO_PI / n_dirs as f64,
        }
    }

    pub fn norm(&self, f: &Field, s: f64, p: f64) -> Result<FIONormReport> {
        if p < 1.0 {
            return Err(FioError::UnsupportedRange(format!(
                "p = {p} < 1 unsupported"
            )));
        }
        let lowfreq = apply_multiplier(f, &self.lp.q)?.norm_lp(p);
        let terms: Vec<f64> = self
            .phis
            .par_iter()
            .map(|phi| {
                let piece = apply_multiplier(f, phi)?;
                Ok(norm_classical(&piece, &self.lp, SpaceTag::Hsp, s, p)?.value)
            })
            .collect::<Result<Vec<_>>>()?;
        let surrogate = p.is_infinite();
        let total = if surrogate {
            lowfreq + terms.iter().cloned().fold(0.0, f64::max)
        } else {
            lowfreq
                + (terms.iter().map(|t| t.powf(p)).sum::<f64>() * self.weight).powf(1.0 / p)
        };
        Ok(FIONormReport {
            s,
            p,
            total,
            lowfreq,
            angles: self.angles.clone(),
            terms,
            weight: self.weight,
            surrogate,
        })
    }
}

/// One-shot convenience wrapper around [`FioNormEngine`].
pub fn norm_hsp_fio(f: &Field, s: f64, p: f64, frame: &PacketFrame) -> Result<FIONormReport> {
    FioNormEngine::new(frame).norm(f, s, p)
}
