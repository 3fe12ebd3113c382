use fiowave::grid::Grid;
use fiowave::lp::{lp_profile, LPFamily};
use fiowave::symbol::{Symbol, SymbolClass};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;

fn ndfft_box(data: &mut [Complex64], side: usize) {
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(side);
    for row in data.chunks_exact_mut(side) {
        fft.process(row);
    }
    let mut col = vec![Complex64::default(); side];
    for c in 0..side {
        for r in 0..side {
            col[r] = data[r * side + c];
        }
        fft.process(&mut col);
        for r in 0..side {
            data[r * side + c] = col[r];
        }
    }
}

fn main() {
    let grid = Grid::square(16).unwrap();
    let a = Symbol::from_fn(
        &grid,
        0.0,
        SymbolClass::ZygmundRough { r: 2.0, delta: 0.0 },
        |x_lin, eta| {
            let q = 1.0 / (1.0 + eta[0] * eta[0] + eta[1] * eta[1]).sqrt();
            Complex64::new(1.0 + 0.4 * ((x_lin % 16) as f64 * 0.39).sin() * q, 0.1 * q)
        },
    );
    let lp = LPFamily::new(&grid);
    let top = lp.len() - 1;
    let k = 0usize;
    let side = 8usize;
    let modes = side * side;
    let count = grid.point_count();
    // replicate the slab + dft for x = 0 only
    let x_lin = 0usize;
    let mut slab = vec![Complex64::default(); modes];
    for (b_lin, slot) in slab.iter_mut().enumerate() {
        let bi = (b_lin / side) as i64;
        let bj = (b_lin % side) as i64;
        let ei = if bi < side as i64 / 2 { bi } else { bi - side as i64 };
        let ej = if bj < side as i64 / 2 { bj } else { bj - side as i64 };
        let rho = ((ei * ei + ej * ej) as f64).sqrt();
        let w = lp_profile(k, top, rho);
        if w == 0.0 { continue; }
        *slot = a.eval(x_lin, [ei as f64, ej as f64]) * w;
    }
    ndfft_box(&mut slab, side);
    for v in slab.iter_mut() { *v /= modes as f64; }
    let series_dc: Complex64 = slab.iter().sum();
    println!("x=0 series at DC: {series_dc:.4} direct {:.4}", a.eval(0, [0.0, 0.0]));

    // now the full matrix path for shell 0: all x, all modes, svd, reconstruct DC
    let coeffs: Vec<Vec<Complex64>> = (0..count).map(|x| {
        let mut slab = vec![Complex64::default(); modes];
        for (b_lin, slot) in slab.iter_mut().enumerate() {
            let bi = (b_lin / side) as i64;
            let bj = (b_lin % side) as i64;
            let ei = if bi < side as i64 / 2 { bi } else { bi - side as i64 };
            let ej = if bj < side as i64 / 2 { bj } else { bj - side as i64 };
            let rho = ((ei * ei + ej * ej) as f64).sqrt();
            let w = lp_profile(k, top, rho);
            if w == 0.0 { continue; }
            *slot = a.eval(x, [ei as f64, ej as f64]) * w;
        }
        ndfft_box(&mut slab, side);
        for v in slab.iter_mut() { *v /= modes as f64; }
        slab
    }).collect();
    let kept: Vec<usize> = (0..modes).collect();
    let mat = DMatrix::from_fn(count, kept.len(), |r, c| coeffs[r][kept[c]]);
    let svd = mat.clone().svd(true, true);
    let u = svd.u.as_ref().unwrap();
    let vt = svd.v_t.as_ref().unwrap();
    println!("singular values: {:?}", &svd.singular_values.as_slice()[..6.min(svd.singular_values.len())]);
    // reconstruct sum over modes for x = 0
    let mut acc = Complex64::default();
    for i in 0..svd.singular_values.len() {
        let mut row = Complex64::default();
        for c in 0..kept.len() {
            row += vt[(i, c)];
        }
        acc += u[(0, i)] * Complex64::new(svd.singular_values[i], 0.0) * row;
    }
    println!("svd-reconstructed DC sum x=0: {acc:.4}");
}
