//! Parabolic cutoffs `phi_omega = int_0^4 psi_{omega,tau} dtau/tau` and the
//! radial reproducing multiplier `m` with `f = int m(D) phi_nu(D) f dnu` on
//! high-pass fields.

use std::sync::OnceLock;

use crate::error::{FioError, Result};
use crate::multiplier::{MultiplierSpec, SupportBounds};
use crate::packet::PacketFrame;
use crate::profile;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Admissibility constant `A = int_0^inf Psi(sigma)^2 dsigma/sigma` of the
/// raw radial profile; the continuous family uses `Psi/sqrt(A)` so the scale
/// integral of its square is one.
fn admissibility() -> f64 {
    static A: OnceLock<f64> = OnceLock::new();
    *A.get_or_init(|| {
        // support is [1/2, 2]; composite Simpson in sigma
        let m = 8192;
        let (lo, hi) = (0.5, 2.0);
        let h = (hi - lo) / m as f64;
        let mut acc = 0.0;
        for i in 0..=m {
            let s = lo + i as f64 * h;
            let w = if i == 0 || i == m {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += w * profile::packet_radial(s).powi(2) / s;
        }
        acc * h / 3.0
    })
}

/// Continuous radial packet profile, unit scale admissibility.
fn radial_cont(rho: f64) -> f64 {
    if rho <= 0.0 {
        0.0
    } else {
        profile::packet_radial(rho) / admissibility().sqrt()
    }
}

/// Angular normalization `c_tau = (int_{S^1} phi((e1-nu)/sqrt(tau))^2 dnu)^{-1/2}`,
/// tabulated over log tau and interpolated cubically.
fn c_tau(tau: f64) -> f64 {
    const LO: f64 = -12.0; // ln tau range [e^-12, e^2]
    const HI: f64 = 2.0;
    const M: usize = 8192;
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        (0..=M)
            .map(|i| {
                let u = LO + (HI - LO) * i as f64 / M as f64;
                let t = u.exp();
                let sq = t.sqrt();
                // int_0^{2pi} phi(2 sin(theta/2)/sqrt(tau))^2 dtheta by trapezoid
                let k = 4096;
                let mut acc = 0.0;
                for s in 0..k {
                    let th = TWO_PI * s as f64 / k as f64;
                    let chord = 2.0 * (th / 2.0).sin().abs();
                    acc += profile::angular(chord / sq).powi(2);
                }
                let integral = acc * TWO_PI / k as f64;
                integral.max(1e-300).powf(-0.5)
            })
            .collect()
    });
    let u = tau.max(1e-300).ln().clamp(LO, HI);
    let x = (u - LO) / (HI - LO) * M as f64;
    let i = (x.floor() as usize).min(M - 1);
    let t = x - i as f64;
    // Catmull-Rom on the uniform table
    let p0 = table[i.saturating_sub(1)];
    let p1 = table[i];
    let p2 = table[(i + 1).min(M)];
    let p3 = table[(i + 2).min(M)];
    let a = -0.5 * p0 + 1.5 * p1 - 1.5 * p2 + 0.5 * p3;
    let b = p0 - 2.5 * p1 + 2.0 * p2 - 0.5 * p3;
    let c = -0.5 * p0 + 0.5 * p2;
    ((a * t + b) * t + c) * t + p1
}

/// Scale-integrated cutoff evaluated at radial modulus `rho` and angular
/// chord `chord`: `int_0^4 Psi(tau rho) c_tau phi(chord/sqrt(tau)) dtau/tau`.
/// Geometric quadrature with ratio-2 refinement until the value changes by
/// at most 1e-10.
pub fn phi_scalar(rho: f64, chord: f64) -> f64 {
    if rho < 0.125 {
        return 0.0;
    }
    // integrand support in tau
    let lo = 0.5 / rho;
    let hi = (2.0 / rho).min(4.0);
    if lo >= hi {
        return 0.0;
    }
    let (ulo, uhi) = (lo.ln(), hi.ln());
    let eval = |m: usize| -> f64 {
        // trapezoid in u = ln tau; endpoints vanish (window support)
        let du = (uhi - ulo) / m as f64;
        let mut acc = 0.0;
        for i in 1..m {
            let tau = (ulo + i as f64 * du).exp();
            let v = radial_cont(tau * rho);
            if v == 0.0 {
                continue;
            }
            acc += v * c_tau(tau) * profile::angular(chord / tau.sqrt());
        }
        acc * du
    };
    let mut m = 32;
    let mut prev = eval(m);
    loop {
        m *= 2;
        let next = eval(m);
        if (next - prev).abs() <= 1e-10 || m >= 4096 {
            return next;
        }
        prev = next;
    }
}

/// Wrapper exposing the scalar cutoff with its direction fixed.
#[derive(Clone, Copy, Debug)]
pub struct PhiOmega {
    pub omega: [f64; 2],
}

impl PhiOmega {
    pub fn value(&self, eta: &[f64; 2]) -> f64 {
        let rho = (eta[0] * eta[0] + eta[1] * eta[1]).sqrt();
        if rho == 0.0 {
            return 0.0;
        }
        let c0 = eta[0] / rho - self.omega[0];
        let c1 = eta[1] / rho - self.omega[1];
        phi_scalar(rho, (c0 * c0 + c1 * c1).sqrt())
    }
}

/// The parabolic cutoff `phi_omega` sampled on the lattice of the frame's grid.
pub fn parabolic_cutoff_phi(omega: [f64; 2], frame: &PacketFrame) -> MultiplierSpec {
    let grid = frame.grid().clone();
    let phi = PhiOmega { omega };
    MultiplierSpec::from_fn(&format!("phi_({:.4},{:.4})", omega[0], omega[1]), &grid, |eta| {
        phi.value(&[eta[0], eta[1]])
    })
    .with_support(SupportBounds {
        rho_min: 0.125,
        rho_max: f64::INFINITY,
        cone: None,
    })
}

/// Radial reproducing multiplier: `m(xi) = 1 / int_{S^1} phi_nu(xi) dnu` on
/// `|xi| >= 1/2`, computed from a radial profile so it is radial exactly.
/// `n_dirs` sets the direction quadrature resolution.
pub fn reproducing_m(frame: &PacketFrame, n_dirs: usize) -> Result<MultiplierSpec> {
    let grid = frame.grid().clone();
    // direction integral as a function of the modulus
    let dir_integral = |rho: f64| -> f64 {
        if rho == 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for i in 0..n_dirs {
            let th = TWO_PI * i as f64 / n_dirs as f64;
            let chord = 2.0 * (th / 2.0).sin().abs();
            acc += phi_scalar(rho, chord);
        }
        acc * TWO_PI / n_dirs as f64
    };

    // distinct moduli on the lattice
    use std::collections::BTreeMap;
    let mut moduli: BTreeMap<u64, f64> = BTreeMap::new();
    for lin in 0..grid.point_count() {
        let eta = grid.freq_of(lin);
        let rho = ((eta[0] * eta[0] + eta[1] * eta[1]) as f64).sqrt();
        moduli.insert(rho.to_bits(), rho);
    }
    let mut inv: BTreeMap<u64, f64> = BTreeMap::new();
    use rayon::prelude::*;
    let entries: Vec<(u64, f64)> = moduli
        .par_iter()
        .map(|(&bits, &rho)| {
            if rho < 0.5 {
                return Ok((bits, 0.0));
            }
            let d = dir_integral(rho);
            if d < 1e-10 {
                return Err(FioError::FrameCoverage(format!(
                    "direction integral {d} below tolerance at |xi| = {rho}"
                )));
            }
            Ok((bits, 1.0 / d))
        })
        .collect::<Result<Vec<_>>>()?;
    for (bits, v) in entries {
        inv.insert(bits, v);
    }

    Ok(MultiplierSpec::from_fn("reproducing_m", &grid, |eta| {
        let rho = (eta[0] * eta[0] + eta[1] * eta[1]).sqrt();
        *inv.get(&rho.to_bits()).unwrap_or(&0.0)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Field, Grid};
    use crate::multiplier::apply_multiplier;
    use crate::packet::build_frame;

    #[test]
    fn vanishes_below_one_eighth_and_off_cone() {
        assert_eq!(phi_scalar(1.0 / 16.0, 0.0), 0.0);
        // perpendicular direction at |xi| >= 4: chord = sqrt(2) > 2/sqrt(rho)
        let phi = PhiOmega { omega: [1.0, 0.0] };
        assert_eq!(phi.value(&[0.0, 4.0]), 0.0);
        assert_eq!(phi.value(&[0.0, 9.0]), 0.0);
    }

    #[test]
    fn growth_rate_quarter_power() {
        // along its own direction phi_omega grows like |xi|^{1/4} (n = 2)
        let mut vals = Vec::new();
        for j in 2..=6 {
            let rho = (2f64).powi(j);
            vals.push(phi_scalar(rho, 0.0));
        }
        for w in vals.windows(2) {
            let ratio = w[1] / w[0];
            let ideal = (2f64).powf(0.25);
            assert!(
                ratio > ideal / 2.0 && ratio < ideal * 2.0,
                "octave ratio {ratio} vs ideal {ideal}"
            );
        }
    }

    #[test]
    fn reproducing_identity_on_high_pass() {
        let grid = Grid::square(64).unwrap();
        let frame = build_frame(&grid, 4).unwrap();
        let n_dirs = 256;
        let m = reproducing_m(&frame, n_dirs).unwrap();
        // high-pass field
        let f = Field::random_band(&grid, 3.0, 24.0, 31);
        // sum_i w m(D) phi_{nu_i}(D) f with an independent (coarser) quadrature
        let mut acc = Field::zero(&grid);
        let steps = 160;
        for i in 0..steps {
            let th = TWO_PI * i as f64 / steps as f64;
            let phi = parabolic_cutoff_phi([th.cos(), th.sin()], &frame);
            let part = apply_multiplier(&f, &phi).unwrap();
            acc = acc.axpy(
                num_complex::Complex64::new(TWO_PI / steps as f64, 0.0),
                &part,
            );
        }
        let repro = apply_multiplier(&acc, &m).unwrap();
        let rel = repro.sub(&f).norm_l2() / f.norm_l2();
        assert!(rel <= 1e-3, "reproduction error {rel}");
    }

    #[test]
    fn m_is_radial() {
        let grid = Grid::square(32).unwrap();
        let frame = build_frame(&grid, 2).unwrap();
        let m = reproducing_m(&frame, 64).unwrap();
        // compare values at lattice points with equal modulus
        let a = m.values()[grid.lin_of(&[5, 0])];
        let b = m.values()[grid.lin_of(&[0, 5])];
        let c = m.values()[grid.lin_of(&[-5, 0])];
        assert!((a - b).norm() < 1e-14);
        assert!((a - c).norm() < 1e-14);
        let d = m.values()[grid.lin_of(&[3, 4])]; // also modulus 5
        assert!((a - d).norm() < 1e-14);
    }

    #[test]
    fn low_pass_part_not_reproduced() {
        let grid = Grid::square(32).unwrap();
        let frame = build_frame(&grid, 2).unwrap();
        let m = reproducing_m(&frame, 64).unwrap();
        // constant field: phi_nu kills it, reproduction returns zero
        let f = Field::from_fn(&grid, |_| num_complex::Complex64::new(1.0, 0.0));
        let phi = parabolic_cutoff_phi([1.0, 0.0], &frame);
        let part = apply_multiplier(&f, &phi).unwrap();
        let repro = apply_multiplier(&part, &m).unwrap();
        assert!(repro.norm_l2() < 1e-12);
    }
}
