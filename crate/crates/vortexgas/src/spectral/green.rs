//! Validated evaluators for the torus Green function and Biot–Savart kernel.
//!
//! `G` is the zero-mean solution of `ΔG = δ₀ − 1` on the unit torus, with
//! Fourier coefficients `Ĝ(k) = −1/(4π²|k|²)` for `k ≠ 0` and `Ĝ(0) = 0`.
//! The Biot–Savart kernel is `K = ∇⊥G = (∂₂G, −∂₁G)`.
//!
//! Two backends are provided:
//!
//! - [`SpectralGreen`]: plain truncation of the Fourier series at a cutoff
//!   `M`. Slowly convergent; serves as the independent reference for
//!   cross-validation.
//! - [`EwaldGreen`]: short-range/long-range splitting with exponentially
//!   convergent parts on both sides. Writing `1/(4π²|k|²)` as an integral
//!   over heat-kernel times and cutting at a splitting time `s` gives
//!
//!   ```text
//!   G(x) = s − (1/4π) Σ_m E₁(|x+m|²/(4s))
//!            − Σ_{k≠0} e^{−4π²|k|²s}/(4π²|k|²) · cos(2π k·x)
//!   ```
//!
//!   where the image sum runs over the integer lattice and `E₁` is the
//!   exponential integral. Both sums are truncated where the exponents
//!   exceed `z_cut`, so each dropped term is below `e^{−z_cut}`.
//!
//! Both backends are immutable after construction and cheap to share.

use super::expint::exp_integral_e1;
use super::IndexSet;
use crate::torus::{min_image, Accumulator};
use crate::{Error, Result};
use std::f64::consts::PI;

/// Points closer than this to a lattice point are rejected rather than
/// evaluated; the kernel blows up logarithmically there and silent huge
/// values would corrupt downstream dynamics.
pub const SINGULARITY_GUARD: f64 = 1e-10;

fn guard_check(d: [f64; 2]) -> Result<f64> {
    let r2 = d[0] * d[0] + d[1] * d[1];
    if r2 < SINGULARITY_GUARD * SINGULARITY_GUARD {
        return Err(Error::SingularPoint(d[0], d[1]));
    }
    Ok(r2)
}

/// Plain spectral truncation of the Green-function series at cutoff `M`.
#[derive(Debug, Clone)]
pub struct SpectralGreen {
    cutoff: u32,
}

impl SpectralGreen {
    pub fn new(cutoff: u32) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::InvalidCount("spectral cutoff must be >= 1".into()));
        }
        Ok(SpectralGreen { cutoff })
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    /// Sum `f(k, cos(2πk·x), sin(2πk·x))` over the half-lattice `|k| ≤ M`,
    /// `k ∈ Z²₊`, with one trig call per lattice row and a complex
    /// recurrence along the row.
    fn half_lattice_sum<F>(&self, x: [f64; 2], mut f: F)
    where
        F: FnMut(i64, i64, f64, f64),
    {
        let m = self.cutoff as i64;
        let step_re = (2.0 * PI * x[1]).cos();
        let step_im = (2.0 * PI * x[1]).sin();
        for k1 in 0..=m {
            let k2_max = ((m * m - k1 * k1) as f64).sqrt().floor() as i64;
            let k2_min = if k1 == 0 { 1 } else { -k2_max };
            if k2_min > k2_max {
                continue;
            }
            let phase0 = 2.0 * PI * (k1 as f64 * x[0] + k2_min as f64 * x[1]);
            let mut w_re = phase0.cos();
            let mut w_im = phase0.sin();
            let mut k2 = k2_min;
            loop {
                f(k1, k2, w_re, w_im);
                if k2 == k2_max {
                    break;
                }
                k2 += 1;
                let t = w_re * step_re - w_im * step_im;
                w_im = w_re * step_im + w_im * step_re;
                w_re = t;
            }
        }
    }

    pub fn green(&self, x: [f64; 2]) -> Result<f64> {
        let d = min_image(x);
        guard_check(d)?;
        let mut acc = Accumulator::new();
        self.half_lattice_sum(d, |k1, k2, c, _s| {
            let n2 = (k1 * k1 + k2 * k2) as f64;
            acc.add(c / n2);
        });
        // cos is even, so the half-lattice carries factor 2
        Ok(-2.0 * acc.value() / (4.0 * PI * PI))
    }

    pub fn biot_savart(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        let d = min_image(x);
        guard_check(d)?;
        let mut g1 = Accumulator::new();
        let mut g2 = Accumulator::new();
        self.half_lattice_sum(d, |k1, k2, _c, s| {
            let n2 = (k1 * k1 + k2 * k2) as f64;
            g1.add(k1 as f64 * s / n2);
            g2.add(k2 as f64 * s / n2);
        });
        // ∇G = Σ k sin(2πk·x)/(2π|k|²); sine is odd, factor 2 again
        let grad = [g1.value() / PI, g2.value() / PI];
        Ok([grad[1], -grad[0]])
    }
}

/// One long-range Fourier mode of the Ewald splitting, restricted to the
/// positive half-lattice with the mirror factor baked in.
#[derive(Debug, Clone, Copy)]
pub struct EwaldMode {
    pub k1: i32,
    pub k2: i32,
    /// `2 e^{−4π²|k|²s} / (4π²|k|²)`: coefficient of `cos(2πk·x)` in `−G_long`.
    pub cg: f64,
    /// `k · 2 e^{−4π²|k|²s} / (2π|k|²)`: coefficient of `sin(2πk·x)` in `∇G_long`.
    pub gvec: [f64; 2],
}

/// Hermite-cubic tables for the radial factors of the short-range sums:
/// the entire part `φ(z) = E₁(z) + ln z + γ` (with `φ' = (1−e^{−z})/z`)
/// and the Gaussian `e^{−z}`, both on `[0, z_cut]`. With exact nodal
/// derivatives the interpolation error is below 1e-13 at the grid used,
/// which the table tests pin down. Tables keep the O(N²) ensemble loops
/// off libm without losing determinism.
#[derive(Debug, Clone)]
struct RadialTable {
    inv_step: f64,
    phi_val: Vec<f64>,
    phi_der: Vec<f64>,
    exp_val: Vec<f64>,
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const TABLE_NODES: usize = 4096;

impl RadialTable {
    fn new(z_cut: f64) -> Self {
        let n = TABLE_NODES;
        let step = z_cut / n as f64;
        let mut phi_val = Vec::with_capacity(n + 2);
        let mut phi_der = Vec::with_capacity(n + 2);
        let mut exp_val = Vec::with_capacity(n + 2);
        for i in 0..=n + 1 {
            let z = i as f64 * step;
            let (p, d) = if z == 0.0 {
                (0.0, 1.0)
            } else {
                (
                    exp_integral_e1(z) + z.ln() + EULER_GAMMA,
                    (1.0 - (-z).exp()) / z,
                )
            };
            phi_val.push(p);
            phi_der.push(d);
            exp_val.push((-z).exp());
        }
        RadialTable {
            inv_step: 1.0 / step,
            phi_val,
            phi_der,
            exp_val,
        }
    }

    /// `E₁(z) = φ(z) − γ − ln z` for `0 < z ≤ z_cut`.
    #[inline]
    fn e1(&self, z: f64) -> f64 {
        self.phi(z) - EULER_GAMMA - z.ln()
    }

    #[inline]
    fn phi(&self, z: f64) -> f64 {
        let u = z * self.inv_step;
        let i = u as usize;
        let t = u - i as f64;
        let h = 1.0 / self.inv_step;
        let (p0, p1) = (self.phi_val[i], self.phi_val[i + 1]);
        let (m0, m1) = (self.phi_der[i] * h, self.phi_der[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        p0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + m0 * (t3 - 2.0 * t2 + t)
            + p1 * (-2.0 * t3 + 3.0 * t2)
            + m1 * (t3 - t2)
    }

    /// `e^{−z}` for `0 ≤ z ≤ z_cut`.
    #[inline]
    fn gauss(&self, z: f64) -> f64 {
        let u = z * self.inv_step;
        let i = u as usize;
        let t = u - i as f64;
        let h = 1.0 / self.inv_step;
        let (p0, p1) = (self.exp_val[i], self.exp_val[i + 1]);
        let (m0, m1) = (-p0 * h, -p1 * h);
        let t2 = t * t;
        let t3 = t2 * t;
        p0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + m0 * (t3 - 2.0 * t2 + t)
            + p1 * (-2.0 * t3 + 3.0 * t2)
            + m1 * (t3 - t2)
    }
}

/// Ewald-split evaluator. Production backend for dynamics and ensembles.
#[derive(Debug, Clone)]
pub struct EwaldGreen {
    s: f64,
    z_cut: f64,
    r2_cut: f64,
    image_range: i32,
    k_cut: u32,
    modes: Vec<EwaldMode>,
    table: RadialTable,
}

impl EwaldGreen {
    /// Default splitting, balanced for the O(N²) pair workloads. The
    /// short-range radius stays below 1/2, so the image sum reduces to the
    /// minimum image itself.
    pub fn new() -> Self {
        Self::with_params(0.0018, 28.0).expect("default Ewald parameters are valid")
    }

    /// `s` is the splitting time, `z_cut` the exponent cutoff applied to
    /// both sums (every dropped term is below `e^{−z_cut}`).
    pub fn with_params(s: f64, z_cut: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidRange("Ewald splitting must be positive".into()));
        }
        if !(10.0..=700.0).contains(&z_cut) {
            return Err(Error::InvalidRange("Ewald exponent cutoff out of range".into()));
        }
        let k_cut = (z_cut / (4.0 * PI * PI * s)).sqrt().ceil() as u32;
        let r2_cut = 4.0 * s * z_cut;
        let image_range = (r2_cut.sqrt() + 0.5).floor() as i32;
        let set = IndexSet::new(k_cut.max(1))?;
        let mut modes = Vec::new();
        for &k in set.modes() {
            if k.half_lattice() != super::HalfLattice::Positive {
                continue;
            }
            let n2 = k.norm2();
            let expo = 4.0 * PI * PI * n2 * s;
            if expo > z_cut {
                continue;
            }
            let damp = (-expo).exp();
            modes.push(EwaldMode {
                k1: k.k1(),
                k2: k.k2(),
                cg: 2.0 * damp / (4.0 * PI * PI * n2),
                gvec: [
                    k.k1() as f64 * damp / (PI * n2),
                    k.k2() as f64 * damp / (PI * n2),
                ],
            });
        }
        Ok(EwaldGreen {
            s,
            z_cut,
            r2_cut,
            image_range,
            k_cut,
            modes,
            table: RadialTable::new(z_cut),
        })
    }

    pub fn splitting(&self) -> f64 {
        self.s
    }

    pub fn k_cut(&self) -> u32 {
        self.k_cut
    }

    /// Long-range modes over the positive half-lattice (mirror factors
    /// already folded in). Consumed by the structure-factor fast paths.
    pub fn modes(&self) -> &[EwaldMode] {
        &self.modes
    }

    /// Squared radius beyond which short-range image terms are dropped.
    pub fn r2_cut(&self) -> f64 {
        self.r2_cut
    }

    pub fn image_range(&self) -> i32 {
        self.image_range
    }

    /// Short-range (image sum) part of `G`, including the `+s` constant.
    /// `d` must already be a minimum-image displacement.
    pub fn short_range(&self, d: [f64; 2]) -> f64 {
        let inv4s = 1.0 / (4.0 * self.s);
        let mut acc = Accumulator::new();
        for mx in -self.image_range..=self.image_range {
            for my in -self.image_range..=self.image_range {
                let dx = d[0] + mx as f64;
                let dy = d[1] + my as f64;
                let r2 = dx * dx + dy * dy;
                let z = r2 * inv4s;
                if z <= self.z_cut {
                    acc.add(exp_integral_e1(z));
                }
            }
        }
        self.s - acc.value() / (4.0 * PI)
    }

    /// Tabulated equivalent of [`Self::short_range`] for the O(N²)
    /// ensemble loops (interpolation error ≤ 1e-13 absolute).
    #[inline]
    pub fn short_range_fast(&self, d: [f64; 2]) -> f64 {
        let inv4s = 1.0 / (4.0 * self.s);
        let mut sum = 0.0;
        for mx in -self.image_range..=self.image_range {
            for my in -self.image_range..=self.image_range {
                let dx = d[0] + mx as f64;
                let dy = d[1] + my as f64;
                let z = (dx * dx + dy * dy) * inv4s;
                if z <= self.z_cut {
                    sum += self.table.e1(z);
                }
            }
        }
        self.s - sum / (4.0 * PI)
    }

    /// Tabulated Gaussian `e^{−z}` for `0 ≤ z ≤ z_cut`.
    #[inline]
    pub fn gauss_fast(&self, z: f64) -> f64 {
        self.table.gauss(z)
    }

    /// Gradient of the short-range part at a minimum-image displacement.
    pub fn short_range_grad(&self, d: [f64; 2]) -> [f64; 2] {
        let inv4s = 1.0 / (4.0 * self.s);
        let mut g1 = 0.0;
        let mut g2 = 0.0;
        for mx in -self.image_range..=self.image_range {
            for my in -self.image_range..=self.image_range {
                let dx = d[0] + mx as f64;
                let dy = d[1] + my as f64;
                let r2 = dx * dx + dy * dy;
                let z = r2 * inv4s;
                if z <= self.z_cut {
                    let w = (-z).exp() / (2.0 * PI * r2);
                    g1 += dx * w;
                    g2 += dy * w;
                }
            }
        }
        [g1, g2]
    }

    /// Long-range part of `G` (the damped cosine sum).
    pub fn long_range(&self, d: [f64; 2]) -> f64 {
        let mut acc = Accumulator::new();
        for_modes_trig(&self.modes, d, |mode, c, _s| acc.add(mode.cg * c));
        -acc.value()
    }

    fn long_range_grad(&self, d: [f64; 2]) -> [f64; 2] {
        let mut g1 = Accumulator::new();
        let mut g2 = Accumulator::new();
        for_modes_trig(&self.modes, d, |mode, _c, s| {
            g1.add(mode.gvec[0] * s);
            g2.add(mode.gvec[1] * s);
        });
        [g1.value(), g2.value()]
    }

    pub fn green(&self, x: [f64; 2]) -> Result<f64> {
        let d = min_image(x);
        guard_check(d)?;
        Ok(self.short_range(d) + self.long_range(d))
    }

    pub fn biot_savart(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        let d = min_image(x);
        guard_check(d)?;
        let gs = self.short_range_grad(d);
        let gl = self.long_range_grad(d);
        let grad = [gs[0] + gl[0], gs[1] + gl[1]];
        Ok([grad[1], -grad[0]])
    }

    /// Phase tables sized for this evaluator's mode cutoff.
    pub fn phase_tables(&self, positions: &[[f64; 2]]) -> super::PhaseTables {
        super::PhaseTables::new(positions, self.k_cut)
    }

    /// Weighted structure factors `(C_m, S_m) = Σ_j ξ_j (cos, sin)(2πk_m·x_j)`
    /// per stored half-lattice mode. Each mode's sum runs over vortices in
    /// index order, so results are identical for any thread count.
    pub fn structure_factors(
        &self,
        tables: &super::PhaseTables,
        intensities: &[f64],
    ) -> Vec<[f64; 2]> {
        let modes = &self.modes;
        crate::exec::indexed_map(modes.len(), |m| {
            let mode = &modes[m];
            let mut c = 0.0;
            let mut s = 0.0;
            for (j, &xi) in intensities.iter().enumerate() {
                let (pc, ps) = tables.phase(j, mode.k1, mode.k2);
                c += xi * pc;
                s += xi * ps;
            }
            [c, s]
        })
    }
}

impl Default for EwaldGreen {
    fn default() -> Self {
        Self::new()
    }
}

/// Evaluate `f(mode, cos(2πk·d), sin(2πk·d))` for each stored half-lattice
/// mode, one trig call per lattice row and a complex recurrence within it.
/// Mode order is fixed, so sums built on top are reproducible.
pub(crate) fn for_modes_trig<F>(modes: &[EwaldMode], d: [f64; 2], mut f: F)
where
    F: FnMut(&EwaldMode, f64, f64),
{
    let step_re = (2.0 * PI * d[1]).cos();
    let step_im = (2.0 * PI * d[1]).sin();
    let mut i = 0usize;
    while i < modes.len() {
        let k1 = modes[i].k1;
        // modes are stored sorted by (k1, k2); find the row extent
        let mut j = i;
        while j < modes.len() && modes[j].k1 == k1 {
            j += 1;
        }
        let row = &modes[i..j];
        let phase0 = 2.0 * PI * (k1 as f64 * d[0] + row[0].k2 as f64 * d[1]);
        let mut w_re = phase0.cos();
        let mut w_im = phase0.sin();
        let mut expected_k2 = row[0].k2;
        for mode in row {
            // rows are contiguous in k2 by construction of IndexSet
            debug_assert_eq!(mode.k2, expected_k2);
            f(mode, w_re, w_im);
            expected_k2 += 1;
            let t = w_re * step_re - w_im * step_im;
            w_im = w_re * step_im + w_im * step_re;
            w_re = t;
        }
        i = j;
    }
}

/// Backend-tagged evaluator for `G` and `K = ∇⊥G`.
#[derive(Debug, Clone)]
pub enum GreenEvaluator {
    Spectral(SpectralGreen),
    Ewald(EwaldGreen),
}

impl GreenEvaluator {
    pub fn spectral(cutoff: u32) -> Result<Self> {
        Ok(GreenEvaluator::Spectral(SpectralGreen::new(cutoff)?))
    }

    pub fn ewald() -> Self {
        GreenEvaluator::Ewald(EwaldGreen::new())
    }

    pub fn ewald_with(s: f64, z_cut: f64) -> Result<Self> {
        Ok(GreenEvaluator::Ewald(EwaldGreen::with_params(s, z_cut)?))
    }

    pub fn backend_name(&self) -> &'static str {
        match self {
            GreenEvaluator::Spectral(_) => "spectral-truncation",
            GreenEvaluator::Ewald(_) => "ewald-split",
        }
    }

    /// Absolute accuracy target for point values of `G`.
    pub fn green_tolerance(&self) -> f64 {
        match self {
            // disc partial sums of the series converge like M^{-3/2} away
            // from the singularity; the constant is an empirical envelope
            GreenEvaluator::Spectral(s) => 2.0 / (s.cutoff as f64).powf(1.5),
            GreenEvaluator::Ewald(_) => 1e-12,
        }
    }

    /// Absolute accuracy target for point values of `K`.
    ///
    /// The truncated sine series for `K` converges like `M^{-1/2}` with a
    /// constant that deteriorates near the singularity; the envelope below
    /// covers evaluation points down to `|x| ≈ 0.07`.
    pub fn biot_savart_tolerance(&self) -> f64 {
        match self {
            GreenEvaluator::Spectral(s) => 4.0 / (s.cutoff as f64).sqrt(),
            GreenEvaluator::Ewald(_) => 1e-12,
        }
    }

    pub fn green(&self, x: [f64; 2]) -> Result<f64> {
        match self {
            GreenEvaluator::Spectral(b) => b.green(x),
            GreenEvaluator::Ewald(b) => b.green(x),
        }
    }

    pub fn biot_savart(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        match self {
            GreenEvaluator::Spectral(b) => b.biot_savart(x),
            GreenEvaluator::Ewald(b) => b.biot_savart(x),
        }
    }

    /// Green value for a displacement already reduced to minimum image,
    /// with the self-interaction convention `G(0) = 0` NOT applied: the
    /// caller is responsible for excluding the diagonal.
    pub fn green_delta(&self, d: [f64; 2]) -> Result<f64> {
        self.green(d)
    }
}

impl Default for GreenEvaluator {
    fn default() -> Self {
        GreenEvaluator::ewald()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{green_fourier_coeff, WaveIndex};

    fn sample_points() -> Vec<[f64; 2]> {
        vec![
            [0.31, 0.17],
            [0.5, 0.0],
            [0.125, 0.625],
            [0.77, 0.13],
            [0.05, 0.95],
            [0.5, 0.5],
            [0.42, 0.42],
        ]
    }

    #[test]
    fn singularity_guard_rejects_lattice_points() {
        let g = GreenEvaluator::ewald();
        assert!(matches!(
            g.green([0.0, 0.0]),
            Err(Error::SingularPoint(_, _))
        ));
        assert!(matches!(
            g.green([1.0, 1.0 + 1e-12]),
            Err(Error::SingularPoint(_, _))
        ));
        assert!(g.green([1e-6, 0.0]).is_ok());
    }

    #[test]
    fn green_is_even_and_kernel_is_odd() {
        let ew = GreenEvaluator::ewald();
        for &x in &sample_points() {
            let neg = [-x[0], -x[1]];
            let a = ew.green(x).unwrap();
            let b = ew.green(neg).unwrap();
            assert!((a - b).abs() < 1e-12, "G({x:?}) != G(-x): {a} vs {b}");
            let ka = ew.biot_savart(x).unwrap();
            let kb = ew.biot_savart(neg).unwrap();
            assert!((ka[0] + kb[0]).abs() < 1e-12);
            assert!((ka[1] + kb[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn kernel_vanishes_at_half_period() {
        for g in [GreenEvaluator::ewald(), GreenEvaluator::spectral(64).unwrap()] {
            let k = g.biot_savart([0.5, 0.5]).unwrap();
            assert!(k[0].abs() < 1e-12 && k[1].abs() < 1e-12, "{k:?}");
        }
    }

    #[test]
    fn ewald_is_invariant_under_splitting_choice() {
        // the same function must come out for different splittings
        let a = EwaldGreen::with_params(0.002, 40.0).unwrap();
        let b = EwaldGreen::with_params(0.02, 40.0).unwrap();
        let c = EwaldGreen::new();
        for &x in &sample_points() {
            let va = a.green(x).unwrap();
            let vb = b.green(x).unwrap();
            let vc = c.green(x).unwrap();
            assert!((va - vb).abs() < 1e-12, "G split mismatch at {x:?}: {va} vs {vb}");
            assert!((va - vc).abs() < 1e-12);
            let ka = a.biot_savart(x).unwrap();
            let kb = b.biot_savart(x).unwrap();
            for i in 0..2 {
                assert!((ka[i] - kb[i]).abs() < 1e-12, "K split mismatch at {x:?}");
            }
        }
    }

    #[test]
    fn spectral_and_ewald_agree_within_truncation_tolerance() {
        let spec = GreenEvaluator::spectral(512).unwrap();
        let ew = GreenEvaluator::ewald();
        for &x in &sample_points() {
            let d = (spec.green(x).unwrap() - ew.green(x).unwrap()).abs();
            assert!(
                d < spec.green_tolerance(),
                "G mismatch {d:e} at {x:?} exceeds {:e}",
                spec.green_tolerance()
            );
            let ks = spec.biot_savart(x).unwrap();
            let ke = ew.biot_savart(x).unwrap();
            let dk = ((ks[0] - ke[0]).powi(2) + (ks[1] - ke[1]).powi(2)).sqrt();
            assert!(
                dk < spec.biot_savart_tolerance(),
                "K mismatch {dk:e} at {x:?}"
            );
        }
    }

    #[test]
    fn biot_savart_matches_finite_difference_of_green() {
        let ew = GreenEvaluator::ewald();
        let h = 1e-5;
        for &x in &[[0.31, 0.17], [0.62, 0.44], [0.21, 0.83]] {
            let k = ew.biot_savart(x).unwrap();
            let d2 = (ew.green([x[0], x[1] + h]).unwrap() - ew.green([x[0], x[1] - h]).unwrap())
                / (2.0 * h);
            let d1 = (ew.green([x[0] + h, x[1]]).unwrap() - ew.green([x[0] - h, x[1]]).unwrap())
                / (2.0 * h);
            assert!((k[0] - d2).abs() < 1e-7, "K1 vs FD: {} vs {}", k[0], d2);
            assert!((k[1] + d1).abs() < 1e-7, "K2 vs FD: {} vs {}", k[1], -d1);
        }
    }

    #[test]
    fn finite_difference_error_shrinks_second_order() {
        let ew = GreenEvaluator::ewald();
        let x = [0.31, 0.17];
        let k = ew.biot_savart(x).unwrap()[0];
        let fd = |h: f64| {
            (ew.green([x[0], x[1] + h]).unwrap() - ew.green([x[0], x[1] - h]).unwrap()) / (2.0 * h)
        };
        let e1 = (fd(1e-3) - k).abs();
        let e2 = (fd(5e-4) - k).abs();
        let ratio = e1 / e2;
        assert!((3.0..5.0).contains(&ratio), "FD order ratio {ratio}");
    }

    #[test]
    fn zero_mean_on_offset_grid() {
        let ew = GreenEvaluator::ewald();
        let g = 128usize;
        let mut acc = Accumulator::new();
        for i in 0..g {
            for j in 0..g {
                let x = [(i as f64 + 0.5) / g as f64, (j as f64 + 0.5) / g as f64];
                acc.add(ew.green(x).unwrap());
            }
        }
        let mean = acc.value() / (g * g) as f64;
        // the residual is pure sampling aliasing, O(1/g²)
        assert!(mean.abs() < 1e-5, "grid mean {mean:e}");
    }

    #[test]
    fn discrete_divergence_of_kernel_vanishes() {
        let ew = GreenEvaluator::ewald();
        let div = |x: [f64; 2], h: f64| {
            let kx1 = ew.biot_savart([x[0] + h, x[1]]).unwrap()[0];
            let kx0 = ew.biot_savart([x[0] - h, x[1]]).unwrap()[0];
            let ky1 = ew.biot_savart([x[0], x[1] + h]).unwrap()[1];
            let ky0 = ew.biot_savart([x[0], x[1] - h]).unwrap()[1];
            (kx1 - kx0) / (2.0 * h) + (ky1 - ky0) / (2.0 * h)
        };
        for &x in &[[0.33, 0.19], [0.71, 0.52]] {
            let d1 = div(x, 1e-3).abs();
            let d2 = div(x, 5e-4).abs();
            assert!(d1 < 1e-3, "divergence {d1:e} too large");
            // K is divergence-free analytically, so the discrete value is
            // pure O(h²) truncation
            assert!(d2 < d1, "divergence did not shrink with h");
        }
    }

    #[test]
    fn radial_tables_track_the_exact_functions() {
        let e = EwaldGreen::new();
        let z_cut = 28.0;
        for i in 1..=5000 {
            let z = z_cut * i as f64 / 5000.0;
            let exact = (-z).exp();
            assert!(
                (e.gauss_fast(z) - exact).abs() < 1e-13,
                "gauss table off at z = {z}"
            );
        }
        for i in 0..500 {
            let d = [0.017 + i as f64 * 0.0009, 0.31 - i as f64 * 0.0004];
            let exact = e.short_range(d);
            let fast = e.short_range_fast(d);
            assert!(
                (exact - fast).abs() < 1e-13,
                "short-range table off at {d:?}: {exact} vs {fast}"
            );
        }
    }

    #[test]
    fn green_fourier_coeff_is_the_series_coefficient() {
        // spot check: the long- and short-range parts recombine to the bare
        // coefficient at a few modes, via direct quadrature on a small grid
        let ew = EwaldGreen::new();
        let g = 64usize;
        for &(k1, k2) in &[(1i32, 0i32), (2, 1), (0, 3)] {
            let k = WaveIndex::new(k1, k2).unwrap();
            let mut re = 0.0;
            for i in 0..g {
                for j in 0..g {
                    let x = [(i as f64 + 0.5) / g as f64, (j as f64 + 0.5) / g as f64];
                    let v = ew.green(x).unwrap();
                    re += v * (2.0 * PI * k.dot(x)).cos();
                }
            }
            re /= (g * g) as f64;
            let expect = green_fourier_coeff(k);
            // percent-level smoke check: a 64² point-sample DFT of the
            // singular kernel aliases at O(|k|²/g²); the tight validation
            // is the mollified-DFT acceptance test
            assert!(
                (re - expect).abs() < 1e-2 * expect.abs(),
                "mode ({k1},{k2}): {re} vs {expect}"
            );
        }
    }
}
