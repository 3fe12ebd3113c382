use fiowave::grid::{Field, Grid};
use fiowave::profile::{step, step_gc};
use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

fn probe(name: &str, gg: fn(f64) -> f64) {
    let grid = Grid::new(1, 256).unwrap();
    let spec: Vec<Complex64> = (0..grid.point_count())
        .map(|lin| {
            let rho = (grid.freq_of(lin)[0] as f64).abs();
            let up = (FRAC_PI_2 * gg(2.0 * (rho / 16.0) - 1.0)).sin();
            let down = (FRAC_PI_2 * gg(2.0 * (rho / 32.0) - 1.0)).cos();
            Complex64::new(up * down, 0.0)
        })
        .collect();
    let kernel = Field::from_spectrum(grid.clone(), spec).unwrap();
    let (mut out, mut total) = (0.0f64, 0.0);
    for (lin, v) in kernel.samples().iter().enumerate() {
        let x = fiowave::cosphere::wrap_diff(grid.point_of(lin)[0], 0.0).abs();
        let m = v.norm_sqr();
        total += m;
        if x > 1.0 {
            out += m;
        }
    }
    println!("1D radial crossfade {name}: {:.3e}", out / total);

    let n = 1024usize;
    let gr = Grid::new(1, n).unwrap();
    let delta = 0.25f64;
    let spec: Vec<Complex64> = (0..n)
        .map(|i| {
            let th = if i < n / 2 {
                i as f64
            } else {
                i as f64 - n as f64
            } * 2.0
                * std::f64::consts::PI
                / n as f64;
            let t = (th / delta).abs();
            let v = if t <= 0.25 {
                1.0
            } else if t >= 0.75 {
                0.0
            } else {
                (FRAC_PI_2 * gg(2.0 * (t - 0.25))).cos()
            };
            Complex64::new(v, 0.0)
        })
        .collect();
    let kernel = Field::from_spectrum(gr.clone(), spec).unwrap();
    let (mut out, mut total) = (0.0f64, 0.0);
    for (lin, v) in kernel.samples().iter().enumerate() {
        let x = fiowave::cosphere::wrap_diff(gr.point_of(lin)[0], 0.0).abs();
        let m = v.norm_sqr();
        total += m;
        if x * 16.0 > 4.0 {
            out += m;
        }
    }
    println!("1D angular crossfade {name}: {:.3e}", out / total);
}

fn main() {
    probe("efn", step);
    probe("gc", step_gc);
}
