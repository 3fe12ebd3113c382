//! Dyadic-parabolic wave-packet frames, FIO-adapted function-space norms,
//! rough pseudodifferential operators with symbol smoothing, and a
//! bicharacteristic-flow parametrix with Duhamel iteration for wave
//! equations with rough coefficients, all on the periodic torus.
//!
//! The `examples/` directory contains one runnable program per major
//! capability; the `fiowave` binary exposes the experiment harness.

pub mod cosphere;
pub mod error;
pub mod exponents;
pub mod grid;
pub mod lp;
pub mod multiplier;
pub mod norms;
pub mod packet;
pub mod symbol;
pub mod waveop;
pub mod profile;

pub use error::{FioError, Result};
pub use grid::{Field, Grid};
