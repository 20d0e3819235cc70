//! Thin 2D DFT helpers on square grids (row-major storage).

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Forward 2D DFT of real samples on a g×g grid, normalized by 1/g²:
/// `out[k] = (1/g²) Σ_j f(x_j) e^{−2πi k·j/g}`.
pub fn dft2_forward(samples: &[f64], g: usize) -> Vec<Complex64> {
    assert_eq!(samples.len(), g * g);
    let mut data: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(g);
    // rows
    for row in data.chunks_exact_mut(g) {
        fft.process(row);
    }
    // columns via transpose, fft, transpose back
    let mut tr = vec![Complex64::default(); g * g];
    for i in 0..g {
        for j in 0..g {
            tr[j * g + i] = data[i * g + j];
        }
    }
    for row in tr.chunks_exact_mut(g) {
        fft.process(row);
    }
    let norm = 1.0 / (g * g) as f64;
    let mut out = vec![Complex64::default(); g * g];
    for i in 0..g {
        for j in 0..g {
            out[i * g + j] = tr[j * g + i] * norm;
        }
    }
    out
}

/// Fetch the coefficient of integer frequency `(k1, k2)` from a forward
/// DFT, wrapping negative frequencies the FFT way.
pub fn dft2_coeff(out: &[Complex64], g: usize, k1: i64, k2: i64) -> Complex64 {
    let gi = g as i64;
    let a = k1.rem_euclid(gi) as usize;
    let b = k2.rem_euclid(gi) as usize;
    out[a * g + b]
}
