//! Smooth window profiles built from the `exp(-1/t)` family.
//!
//! Every window in the library (Littlewood-Paley shells, packet annuli,
//! angular bumps, frequency cutoffs) is assembled from two closed-form
//! pieces: a compactly supported bump and a monotone step. Both have
//! analytic derivatives, which the Hamiltonian flow relies on.

/// `exp(-1/u)` for `u > 0`, zero otherwise. All derivatives vanish at 0.
#[inline]
fn efn(u: f64) -> f64 {
    if u > 0.0 {
        (-1.0 / u).exp()
    } else {
        0.0
    }
}

#[inline]
fn efn_d(u: f64) -> f64 {
    if u > 0.0 {
        (-1.0 / u).exp() / (u * u)
    } else {
        0.0
    }
}

/// C-infinity step: 0 for `u <= 0`, 1 for `u >= 1`, strictly monotone between.
#[inline]
pub fn step(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let a = efn(u);
        let b = efn(1.0 - u);
        a / (a + b)
    }
}

/// Derivative of [`step`].
#[inline]
pub fn step_d(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        0.0
    } else {
        let a = efn(u);
        let b = efn(1.0 - u);
        let da = efn_d(u);
        let db = -efn_d(1.0 - u);
        (da * b - a * db) / ((a + b) * (a + b))
    }
}

/// Normalized bump `exp(1 - 1/(1-t^2))` on (-1, 1), zero outside; peak value 1 at t = 0.
#[inline]
pub fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

/// Derivative of [`bump`].
#[inline]
pub fn bump_d(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        let s = 1.0 - t * t;
        bump(t) * (-2.0 * t / (s * s))
    }
}

/// Radial plateau window: 1 on `[0, lo]`, 0 on `[hi, inf)`, smooth between.
#[inline]
pub fn plateau(rho: f64, lo: f64, hi: f64) -> f64 {
    1.0 - step((rho - lo) / (hi - lo))
}

#[inline]
pub fn plateau_d(rho: f64, lo: f64, hi: f64) -> f64 {
    -step_d((rho - lo) / (hi - lo)) / (hi - lo)
}

/// Base Littlewood-Paley profile `psi0`: 1 for `rho <= 1/2`, 0 for `rho >= 1`.
#[inline]
pub fn lp_psi0(rho: f64) -> f64 {
    plateau(rho, 0.5, 1.0)
}

#[inline]
pub fn lp_psi0_d(rho: f64) -> f64 {
    plateau_d(rho, 0.5, 1.0)
}

/// Shell profile `psi_j(rho) = psi0(2^-j rho) - psi0(2^(1-j) rho)` for `j >= 1`.
/// Support is `[2^(j-2), 2^j]`; for j = 1 this is the unit annulus `[1/2, 2]`.
#[inline]
pub fn lp_shell(rho: f64, j: u32) -> f64 {
    let s = (2f64).powi(-(j as i32));
    lp_psi0(s * rho) - lp_psi0(2.0 * s * rho)
}

#[inline]
pub fn lp_shell_d(rho: f64, j: u32) -> f64 {
    let s = (2f64).powi(-(j as i32));
    s * lp_psi0_d(s * rho) - 2.0 * s * lp_psi0_d(2.0 * s * rho)
}

/// Angular bump with plateau 1/4 and support 1 (in units of the parabolic width).
#[inline]
pub fn angular(u: f64) -> f64 {
    let u = u.abs();
    if u <= 0.25 {
        1.0
    } else if u >= 1.0 {
        0.0
    } else {
        1.0 - step((u - 0.25) / 0.75)
    }
}

/// Gaussian-core bump `exp(-a t^2 / (1 - t^2))` on (-1, 1), zero outside.
/// Looks like a Gaussian over most of its support, which keeps the far tails
/// of packet kernels small at the resolutions we run at.
#[inline]
pub fn gauss_core(t: f64, a: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-a * t * t / (1.0 - t * t)).exp()
    }
}

/// Derivative of [`gauss_core`] in `t`.
#[inline]
pub fn gauss_core_d(t: f64, a: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        let s = 1.0 - t * t;
        gauss_core(t, a) * (-2.0 * a * t / (s * s))
    }
}

/// Concentration parameter of the packet radial windows.
pub const PACKET_RADIAL_A: f64 = 2.0;

/// Radial packet profile on the unit annulus `[1/2, 2]`: a gauss-core bump
/// centered linearly at 5/4 with half-width 3/4. `packet_radial(rho * sigma)`
/// is the scale-`sigma` window.
#[inline]
pub fn packet_radial(rho: f64) -> f64 {
    gauss_core((rho - 1.25) / 0.75, PACKET_RADIAL_A)
}

/// Radial derivative of [`packet_radial`].
#[inline]
pub fn packet_radial_d(rho: f64) -> f64 {
    gauss_core_d((rho - 1.25) / 0.75, PACKET_RADIAL_A) / 0.75
}

/// Symmetric C^4 polynomial smoothstep: 0 at 0, 1 at 1, first four
/// derivatives vanish at both ends, `smoothstep4(1-v) = 1 - smoothstep4(v)`.
#[inline]
pub fn smoothstep4(v: f64) -> f64 {
    if v <= 0.0 {
        0.0
    } else if v >= 1.0 {
        1.0
    } else {
        v * v * v * v * v * (126.0 - 420.0 * v + 540.0 * v * v - 315.0 * v * v * v + 70.0 * v * v * v * v)
    }
}

/// Derivative of [`smoothstep4`].
#[inline]
pub fn smoothstep4_d(v: f64) -> f64 {
    if v <= 0.0 || v >= 1.0 {
        0.0
    } else {
        let w = v * (1.0 - v);
        630.0 * w * w * w * w
    }
}

/// Monotone cubic (Fritsch-Carlson) through equispaced knots on [0, 1].
fn pchip8(ys: &[f64; 8], v: f64) -> f64 {
    if v <= 0.0 {
        return ys[0];
    }
    if v >= 1.0 {
        return ys[7];
    }
    let h = 1.0 / 7.0;
    let mut d = [0.0f64; 7];
    for i in 0..7 {
        d[i] = (ys[i + 1] - ys[i]) / h;
    }
    let mut m = [0.0f64; 8];
    for i in 1..7 {
        m[i] = if d[i - 1] * d[i] <= 0.0 {
            0.0
        } else {
            2.0 * d[i - 1] * d[i] / (d[i - 1] + d[i])
        };
    }
    let i = ((v / h).floor() as usize).min(6);
    let t = (v - i as f64 * h) / h;
    let (y0, y1, m0, m1) = (ys[i], ys[i + 1], m[i] * h, m[i + 1] * h);
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * m1
}

// Packet transition edges, numerically optimized for kernel concentration in
// the parabolic box (rise and fall are deliberately not complementary; the
// small coverage ripple is removed by the tightness renormalization).
const RISE_KNOTS: [f64; 8] = [
    0.0,
    0.12922197369083005,
    0.2968592360419221,
    0.5246665145111518,
    0.7442433943744361,
    0.8913420963892956,
    0.9794800340578708,
    1.0,
];
const FALL_KNOTS: [f64; 8] = [
    1.0,
    0.9906164953886589,
    0.9537517556102938,
    0.8470741004900951,
    0.6644999083027515,
    0.4105283544276379,
    0.13906631344343146,
    0.0,
];

/// Rising packet edge: 0 at 0, 1 at 1.
#[inline]
pub fn packet_rise(v: f64) -> f64 {
    pchip8(&RISE_KNOTS, v).clamp(0.0, 1.0)
}

/// Falling packet edge: 1 at 0, 0 at 1.
#[inline]
pub fn packet_fall(v: f64) -> f64 {
    pchip8(&FALL_KNOTS, v).clamp(0.0, 1.0)
}
