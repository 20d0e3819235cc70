//! Truncated white noise on the torus and its renormalized energy.
//!
//! A truncated white-noise field keeps one iid standard-Gaussian
//! coefficient per basis mode in `Λ_N`. Its renormalized kinetic energy is
//! the centered quadratic form
//!
//! ```text
//! Ẽ_N = (1/8π²) Σ_{k ∈ Λ_N} (c_k² − 1)/|k|²,
//! ```
//!
//! and the quadratic pairing of the truncated field against the Green
//! kernel reduces to `−(1/4π²) Σ c_k²/|k|²`, so the two are linked per
//! sample through the lattice constant `L = (1/8π²) Σ |k|⁻²`:
//! pairing = −2·energy − 2·L. That identity (and the variance constant
//! `S4 = (1/32π⁴) Σ |k|⁻⁴`) anchor the test suite.

use crate::spectral::dft::{dft2_coeff, dft2_forward};
use crate::spectral::{basis_eval, GreenEvaluator, HalfLattice, IndexSet, WaveIndex};
use crate::torus::{min_image, Accumulator};
use crate::vortex::EnergyWindow;
use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;
use std::sync::Arc;

/// A scalar field on the torus stored by its real-basis coefficients over
/// `Λ_N` (equivalently, Hermitian complex coefficients over `Λ̂_N` with a
/// vanishing zero mode).
#[derive(Debug, Clone)]
pub struct SpectralField {
    modes: Arc<IndexSet>,
    coeffs: Vec<f64>,
}

impl SpectralField {
    pub fn new(modes: Arc<IndexSet>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != modes.len() {
            return Err(Error::InvalidInput(format!(
                "{} coefficients for an index set of {} modes",
                coeffs.len(),
                modes.len()
            )));
        }
        Ok(SpectralField { modes, coeffs })
    }

    pub fn zero(cutoff: u32) -> Result<Self> {
        let modes = Arc::new(IndexSet::new(cutoff)?);
        let coeffs = vec![0.0; modes.len()];
        Ok(SpectralField { modes, coeffs })
    }

    pub fn cutoff(&self) -> u32 {
        self.modes.cutoff()
    }

    pub fn index_set(&self) -> &Arc<IndexSet> {
        &self.modes
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Real-basis coefficient `⟨ω, e_k⟩`, if `k` is within the cutoff.
    pub fn coeff(&self, k: WaveIndex) -> Option<f64> {
        self.modes.index_of(k).map(|i| self.coeffs[i])
    }

    /// Complex coefficient `ĉ(k) = ∫ ω(x) e^{−2πik·x} dx`.
    ///
    /// For `k` in the positive half-lattice this is `(c_k + i c_{−k})/√2`;
    /// the mirror coefficient is its conjugate, and
    /// `|ĉ(k)|² = (c_k² + c_{−k}²)/2`.
    pub fn complex_coeff(&self, k: WaveIndex) -> Option<Complex64> {
        let (pos, neg, flip) = match k.half_lattice() {
            HalfLattice::Positive => (k, k.neg(), false),
            HalfLattice::Negative => (k.neg(), k, true),
        };
        let cp = self.coeff(pos)?;
        let cn = self.coeff(neg)?;
        let v = Complex64::new(cp, cn) / 2f64.sqrt();
        Some(if flip { v.conj() } else { v })
    }

    /// Point evaluation `Σ c_k e_k(x)` (test/diagnostic use).
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        let mut acc = Accumulator::new();
        for (i, &k) in self.modes.modes().iter().enumerate() {
            acc.add(self.coeffs[i] * basis_eval(k, x));
        }
        acc.value()
    }

    /// Restriction to a smaller cutoff sharing the same coefficients
    /// (same randomness on the common modes).
    pub fn restrict(&self, cutoff: u32) -> Result<SpectralField> {
        if cutoff > self.cutoff() {
            return Err(Error::InvalidRange(format!(
                "cannot restrict cutoff {} to larger cutoff {}",
                self.cutoff(),
                cutoff
            )));
        }
        let modes = Arc::new(IndexSet::new(cutoff)?);
        let coeffs = modes
            .modes()
            .iter()
            .map(|&k| self.coeff(k).expect("restriction is a subset"))
            .collect();
        Ok(SpectralField { modes, coeffs })
    }
}

/// Draw a truncated white-noise field: iid standard Gaussian coefficients
/// over `Λ_{n_cut}` in canonical mode order.
pub fn sample_truncated_wn<R: Rng + ?Sized>(n_cut: u32, rng: &mut R) -> Result<SpectralField> {
    let modes = Arc::new(IndexSet::new(n_cut)?);
    let coeffs = (0..modes.len())
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    Ok(SpectralField { modes, coeffs })
}

/// As [`sample_truncated_wn`] but reusing a cached index set.
pub fn sample_truncated_wn_with<R: Rng + ?Sized>(
    modes: &Arc<IndexSet>,
    rng: &mut R,
) -> SpectralField {
    let coeffs = (0..modes.len())
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    SpectralField {
        modes: Arc::clone(modes),
        coeffs,
    }
}

/// Centered truncated kinetic energy `(1/8π²) Σ (c_k² − 1)/|k|²`.
pub fn renormalized_energy(field: &SpectralField) -> f64 {
    let mut acc = Accumulator::new();
    for (i, &k) in field.modes.modes().iter().enumerate() {
        let c = field.coeffs[i];
        acc.add((c * c - 1.0) / k.norm2());
    }
    acc.value() / (8.0 * PI * PI)
}

/// Exact lattice sums over `Λ_N`: `L = (1/8π²) Σ |k|⁻²` and
/// `S4 = (1/32π⁴) Σ |k|⁻⁴`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSums {
    pub l: f64,
    pub s4: f64,
}

pub fn lattice_sums(n_cut: u32) -> Result<LatticeSums> {
    let modes = IndexSet::new(n_cut)?;
    let mut l = Accumulator::new();
    let mut s4 = Accumulator::new();
    for &k in modes.modes() {
        let n2 = k.norm2();
        l.add(1.0 / n2);
        s4.add(1.0 / (n2 * n2));
    }
    Ok(LatticeSums {
        l: l.value() / (8.0 * PI * PI),
        s4: s4.value() / (32.0 * PI.powi(4)),
    })
}

/// Quadratic pairing of the truncated field against the Green kernel:
/// `−(1/4π²) Σ_{k ∈ Λ_N} c_k²/|k|²`.
pub fn quad_green_truncated(field: &SpectralField) -> f64 {
    let mut acc = Accumulator::new();
    for (i, &k) in field.modes.modes().iter().enumerate() {
        let c = field.coeffs[i];
        acc.add(c * c / k.norm2());
    }
    -acc.value() / (4.0 * PI * PI)
}

/// Fourier transform of a translation-invariant symmetric kernel,
/// tabulated on the modes of an index set by grid quadrature (a g² grid
/// DFT). Used to evaluate `⟨ω̂⊗ω̂, f⟩` spectrally.
#[derive(Debug, Clone)]
pub struct KernelTransform {
    modes: Arc<IndexSet>,
    hat: Vec<f64>,
    /// quadrature value of `∫∫ f(x,y)² dxdy = ∫ f(z)² dz`
    pub square_integral: f64,
    /// quadrature value of `Σ_{k ∈ Λ̂} f̂(k)` (the truncated diagonal trace)
    pub truncated_trace: f64,
}

impl KernelTransform {
    /// Tabulate the kernel transform on `modes` from samples on a `grid²`
    /// uniform grid. The grid must oversample the cutoff (`grid ≥ 4·N`).
    pub fn new<F>(kernel: F, grid: usize, modes: &Arc<IndexSet>) -> Result<Self>
    where
        F: Fn([f64; 2]) -> f64,
    {
        if grid < 4 * modes.cutoff() as usize {
            return Err(Error::InvalidRange(format!(
                "grid {} too coarse for cutoff {}",
                grid,
                modes.cutoff()
            )));
        }
        let mut samples = vec![0.0; grid * grid];
        let mut sq = Accumulator::new();
        for i in 0..grid {
            for j in 0..grid {
                let x = [i as f64 / grid as f64, j as f64 / grid as f64];
                let v = kernel(x);
                samples[i * grid + j] = v;
                sq.add(v * v);
            }
        }
        let hat_grid = dft2_forward(&samples, grid);
        let mut hat = Vec::with_capacity(modes.len());
        let mut trace = Accumulator::new();
        trace.add(dft2_coeff(&hat_grid, grid, 0, 0).re);
        for &k in modes.modes() {
            let v = dft2_coeff(&hat_grid, grid, k.k1() as i64, k.k2() as i64).re;
            hat.push(v);
            trace.add(v);
        }
        Ok(KernelTransform {
            modes: Arc::clone(modes),
            hat,
            square_integral: sq.value() / (grid * grid) as f64,
            truncated_trace: trace.value(),
        })
    }

    /// `⟨ω̂⊗ω̂, f⟩ = Σ_{k ∈ Λ} f̂(k) c_k²` for a field on the same index set.
    pub fn quad(&self, field: &SpectralField) -> Result<f64> {
        if !Arc::ptr_eq(&self.modes, &field.modes) && self.modes.cutoff() != field.cutoff() {
            return Err(Error::InvalidRange(
                "kernel transform and field use different cutoffs".into(),
            ));
        }
        let mut acc = Accumulator::new();
        for (i, c) in field.coeffs.iter().enumerate() {
            acc.add(self.hat[i] * c * c);
        }
        Ok(acc.value())
    }
}

/// Monte-Carlo mean and variance of `⟨ω̂⊗ω̂, f⟩` over truncated
/// white-noise draws, with standard errors.
#[derive(Debug, Clone, Copy)]
pub struct QuadKernelStats {
    pub mean: f64,
    pub variance: f64,
    pub se_mean: f64,
    pub se_variance: f64,
    pub draws: usize,
}

pub fn quad_kernel_mc<R: Rng + ?Sized>(
    transform: &KernelTransform,
    draws: usize,
    rng: &mut R,
) -> Result<QuadKernelStats> {
    if draws < 2 {
        return Err(Error::InvalidCount("need at least 2 draws".into()));
    }
    let mut values = Vec::with_capacity(draws);
    for _ in 0..draws {
        let f = sample_truncated_wn_with(&transform.modes, rng);
        values.push(transform.quad(&f)?);
    }
    Ok(sample_stats(&values))
}

pub(crate) fn sample_stats(values: &[f64]) -> QuadKernelStats {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let m2 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m4 = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    let variance = m2 * n / (n - 1.0);
    QuadKernelStats {
        mean,
        variance,
        se_mean: (m2 / n).sqrt(),
        se_variance: ((m4 - m2 * m2).max(0.0) / n).sqrt(),
        draws: values.len(),
    }
}

/// Rejection-sample truncated white noise conditioned on the renormalized
/// energy landing in `window`. Returns the accepted field and the number
/// of attempts (whose reciprocal estimates the window mass).
pub fn condition_wn<R: Rng + ?Sized>(
    n_cut: u32,
    window: EnergyWindow,
    rng: &mut R,
    max_attempts: u64,
) -> Result<(SpectralField, u64)> {
    if max_attempts == 0 {
        return Err(Error::InvalidCount("max_attempts must be >= 1".into()));
    }
    let modes = Arc::new(IndexSet::new(n_cut)?);
    for attempt in 1..=max_attempts {
        let f = sample_truncated_wn_with(&modes, rng);
        if window.contains(renormalized_energy(&f)) {
            return Ok((f, attempt));
        }
    }
    Err(Error::AcceptanceFailure {
        attempts: max_attempts,
    })
}

/// Deterministic witness that every energy window is reachable at a large
/// enough cutoff: constant squared coefficients `c_k² = 1 + c` give
/// `Ẽ_N = c·L`, and `c` is chosen per the window's position so the energy
/// lands in the shrunken window `[a + δ₀, b − δ₀]`, `δ₀ = (b−a)/5`.
///
/// Windows wider than 1 are first shrunk to width 1. For windows entirely
/// below `−L(N)` no such witness exists at this cutoff (the truncated
/// energy is bounded below by `−L`), reported as a cutoff-too-small error.
pub fn support_witness(window: EnergyWindow, n_cut: u32) -> Result<SpectralField> {
    let (a, b0) = (window.a(), window.b());
    if !a.is_finite() {
        return Err(Error::InvalidRange(
            "support witness needs a finite lower edge".into(),
        ));
    }
    let b = if b0 - a > 1.0 { a + 1.0 } else { b0 };
    let delta0 = (b - a) / 5.0;
    let sums = lattice_sums(n_cut)?;
    let l = sums.l;
    let c = if a + 2.0 * delta0 > 0.0 {
        // window entirely above zero: aim at [a+3δ₀, a+4δ₀]
        (a + 3.5 * delta0) / l
    } else if a + 3.0 * delta0 >= 0.0 {
        // window straddles zero: unit coefficients land exactly at 0
        0.0
    } else {
        // negative window: aim at [a+δ₀, a+2δ₀]; needs L > −a
        if l <= -a {
            return Err(Error::CutoffTooSmall {
                cutoff: n_cut,
                lattice_sum: l,
                needed: -a,
            });
        }
        (a + 1.5 * delta0) / l
    };
    debug_assert!(c > -1.0);
    let modes = Arc::new(IndexSet::new(n_cut)?);
    let coeffs = vec![(1.0 + c).sqrt(); modes.len()];
    Ok(SpectralField { modes, coeffs })
}

/// The mollified Green kernel `G_n(x) = G(x)·(1 − χ(n x))`, vanishing on a
/// disc of radius `r/(2n)` around the origin and equal to `G` outside
/// radius `r/n`; the blend uses a C² quintic ramp.
#[derive(Debug, Clone)]
pub struct MollifiedGreen<'a> {
    index: u32,
    radius: f64,
    green: &'a GreenEvaluator,
}

impl<'a> MollifiedGreen<'a> {
    pub const DEFAULT_RADIUS: f64 = 0.1;

    pub fn new(index: u32, green: &'a GreenEvaluator) -> Result<Self> {
        Self::with_radius(index, Self::DEFAULT_RADIUS, green)
    }

    pub fn with_radius(index: u32, radius: f64, green: &'a GreenEvaluator) -> Result<Self> {
        if index == 0 {
            return Err(Error::InvalidCount("mollification index must be >= 1".into()));
        }
        if !(radius > 0.0 && radius < 0.5) {
            return Err(Error::InvalidRange(
                "mollifier radius must lie in (0, 1/2)".into(),
            ));
        }
        Ok(MollifiedGreen {
            index,
            radius,
            green,
        })
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    /// Support radius of the cutoff, `r/n`.
    pub fn cut_radius(&self) -> f64 {
        self.radius / self.index as f64
    }

    /// `G_n` as a function of the displacement.
    pub fn value(&self, x: [f64; 2]) -> f64 {
        let d = min_image(x);
        let rho = (d[0] * d[0] + d[1] * d[1]).sqrt() * self.index as f64;
        if rho <= 0.5 * self.radius {
            return 0.0;
        }
        let g = self
            .green
            .green(d)
            .expect("outside the mollified core the kernel is regular");
        if rho >= self.radius {
            g
        } else {
            // C² ramp from 0 at r/2 to 1 at r
            let u = (rho - 0.5 * self.radius) / (0.5 * self.radius);
            let ramp = u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
            g * ramp
        }
    }

    /// Two-point form `G_n(x, y) = G_n(x − y)`.
    pub fn value_xy(&self, x: [f64; 2], y: [f64; 2]) -> f64 {
        self.value([x[0] - y[0], x[1] - y[1]])
    }
}
