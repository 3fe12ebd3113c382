//! The exponent bookkeeping for fixed-time wave regularity.

use crate::error::{FioError, Result};

/// Fixed-time Sobolev loss `s(p) = (n-1)/2 * |1/p - 1/2|` for `0 < p <= inf`.
pub fn sp_exponent(p: f64, n: usize) -> Result<f64> {
    if !(p > 0.0) {
        return Err(FioError::UnsupportedRange(format!("p must be > 0, got {p}")));
    }
    let inv = if p.is_infinite() { 0.0 } else { 1.0 / p };
    Ok((n as f64 - 1.0) / 2.0 * (inv - 0.5).abs())
}

/// Regularity threshold `r(p) = 4 s(p) + 2 max(0, 1/p - 1)`.
pub fn rp_exponent(p: f64, n: usize) -> Result<f64> {
    let sp = sp_exponent(p, n)?;
    let inv = if p.is_infinite() { 0.0 } else { 1.0 / p };
    Ok(4.0 * sp + 2.0 * (inv - 1.0).max(0.0))
}

/// Predicted loss exponent for a rough symbol of spatial regularity `r`:
/// zero above the threshold `r(p)`, and `(r(p) - r)/2 + eps` in the stated
/// intermediate window. Outside that window the theorem is void.
pub fn predicted_loss_sigma(r: f64, p: f64, n: usize, eps: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(FioError::UnsupportedRange("r must be > 0".into()));
    }
    if !(eps > 0.0) {
        return Err(FioError::UnsupportedRange("eps must be > 0".into()));
    }
    let rp = rp_exponent(p, n)?;
    let inv = if p.is_infinite() { 0.0 } else { 1.0 / p };
    let floor = 2.0 * n as f64 * (inv - 1.0).max(0.0);
    if r > rp {
        Ok(0.0)
    } else if r > floor {
        Ok((rp - r) / 2.0 + eps)
    } else {
        Err(FioError::StatementVoid(format!(
            "r = {r} outside ({floor}, {rp}]: no boundedness statement applies"
        )))
    }
}
