//! Wave packet analysis (W) and synthesis (V). Because the discrete frame is
//! tight by construction, `V W = I` holds to roundoff and `W` is an isometry
//! onto its range.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{FioError, Result};
use crate::grid::{Field, Grid};
use crate::packet::PacketFrame;

/// Packet coefficients: one complex array per (scale, direction) block plus
/// the low-frequency block, each sampled over the grid.
#[derive(Clone, Debug)]
pub struct PacketCoefficients {
    pub grid: Grid,
    pub frame_hash: u64,
    pub blocks: Vec<Vec<Complex64>>,
    pub low: Vec<Complex64>,
}

impl PacketCoefficients {
    pub fn zeros_like(frame: &PacketFrame) -> Self {
        let count = frame.grid().point_count();
        PacketCoefficients {
            grid: frame.grid().clone(),
            frame_hash: frame.hash(),
            blocks: vec![vec![Complex64::default(); count]; frame.blocks().len()],
            low: vec![Complex64::default(); count],
        }
    }

    /// Frame-side `l^2` norm: the same measure as the field `L^2` norm, so the
    /// tight-frame isometry reads `||W f||_2 = ||f||_2`.
    pub fn norm_l2(&self) -> f64 {
        let cell = self.grid.cell_measure();
        let mut acc: f64 = self.low.iter().map(|v| v.norm_sqr()).sum();
        for b in &self.blocks {
            acc += b.iter().map(|v| v.norm_sqr()).sum::<f64>();
        }
        (acc * cell).sqrt()
    }

    /// Coefficient-space inner product `<c, d>`.
    pub fn inner(&self, other: &PacketCoefficients) -> Complex64 {
        let cell = self.grid.cell_measure();
        let mut acc: Complex64 = self
            .low
            .iter()
            .zip(other.low.iter())
            .map(|(a, b)| a * b.conj())
            .sum();
        for (x, y) in self.blocks.iter().zip(other.blocks.iter()) {
            acc += x
                .iter()
                .zip(y.iter())
                .map(|(a, b)| a * b.conj())
                .sum::<Complex64>();
        }
        acc * cell
    }
}

/// Analysis: block (j,k) holds the samples of `psi_{j,k}(D) f`, and the low
/// block holds `rho(D) f`.
pub fn transform_w(f: &Field, frame: &PacketFrame) -> Result<PacketCoefficients> {
    f.grid().same(frame.grid())?;
    let spec = f.spectrum();
    let blocks: Vec<Vec<Complex64>> = frame
        .windows()
        .par_iter()
        .map(|w| {
            let filtered: Vec<Complex64> = spec
                .iter()
                .zip(w.values().iter())
                .map(|(a, b)| a * b)
                .collect();
            Field::from_spectrum(f.grid().clone(), filtered)
                .expect("length matches")
                .samples()
                .to_vec()
        })
        .collect();
    let low_spec: Vec<Complex64> = spec
        .iter()
        .zip(frame.rho().values().iter())
        .map(|(a, b)| a * b)
        .collect();
    let low = Field::from_spectrum(f.grid().clone(), low_spec)?
        .samples()
        .to_vec();
    Ok(PacketCoefficients {
        grid: f.grid().clone(),
        frame_hash: frame.hash(),
        blocks,
        low,
    })
}

/// Synthesis: the adjoint of [`transform_w`]. For `c = W f` this reproduces
/// `f` exactly up to roundoff.
pub fn synthesize_v(c: &PacketCoefficients, frame: &PacketFrame) -> Result<Field> {
    if c.frame_hash != frame.hash() {
        return Err(FioError::Frame(
            "coefficients do not reference this frame".into(),
        ));
    }
    c.grid.same(frame.grid())?;
    if c.blocks.len() != frame.blocks().len() {
        return Err(FioError::Frame("block count mismatch".into()));
    }
    let count = c.grid.point_count();
    let partial: Vec<Vec<Complex64>> = c
        .blocks
        .par_iter()
        .enumerate()
        .map(|(i, block)| {
            let coef = Field::from_samples(c.grid.clone(), block.clone()).expect("length");
            let spec = coef.spectrum();
            spec.iter()
                .zip(frame.window(i).values().iter())
                .map(|(a, b)| a * b)
                .collect()
        })
        .collect();
    let mut acc = vec![Complex64::default(); count];
    for p in partial {
        for (slot, v) in acc.iter_mut().zip(p.iter()) {
            *slot += v;
        }
    }
    let lowf = Field::from_samples(c.grid.clone(), c.low.clone())?;
    for ((slot, v), w) in acc
        .iter_mut()
        .zip(lowf.spectrum().iter())
        .zip(frame.rho().values().iter())
    {
        *slot += v * w;
    }
    Field::from_spectrum(c.grid.clone(), acc)
}
