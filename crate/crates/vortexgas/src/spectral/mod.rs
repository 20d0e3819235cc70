//! Fourier basis and wavenumber index sets on the unit torus.
//!
//! The real orthonormal basis of zero-mean square-integrable functions is
//!
//! ```text
//! e_k(x) = √2 cos(2π k·x)   for k in the positive half-lattice,
//! e_k(x) = √2 sin(2π k·x)   for k in the negative half-lattice,
//! ```
//!
//! where the positive half-lattice is `{k ≠ 0 : k₁ > 0 or (k₁ = 0, k₂ > 0)}`
//! and the negative one is its reflection. Index sets `Λ_N` collect all
//! nonzero integer vectors with `|k| ≤ N`.

pub mod dft;
mod expint;
mod green;

pub use expint::exp_integral_e1;
pub use green::{EwaldGreen, EwaldMode, GreenEvaluator, SpectralGreen, SINGULARITY_GUARD};

use crate::{Error, Result};
use std::f64::consts::{PI, SQRT_2};

/// Half-lattice classification of a nonzero wave index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfLattice {
    /// `k₁ > 0`, or `k₁ = 0` and `k₂ > 0` (cosine modes).
    Positive,
    /// The reflection of the positive half (sine modes).
    Negative,
}

/// A nonzero integer wave vector on the dual lattice of `T²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WaveIndex {
    k1: i32,
    k2: i32,
}

impl WaveIndex {
    pub fn new(k1: i32, k2: i32) -> Result<Self> {
        if k1 == 0 && k2 == 0 {
            return Err(Error::ZeroWaveIndex);
        }
        Ok(WaveIndex { k1, k2 })
    }

    #[inline]
    pub fn k1(&self) -> i32 {
        self.k1
    }

    #[inline]
    pub fn k2(&self) -> i32 {
        self.k2
    }

    /// Which half-lattice the index belongs to. Total and exclusive over
    /// all nonzero indices.
    #[inline]
    pub fn half_lattice(&self) -> HalfLattice {
        if self.k1 > 0 || (self.k1 == 0 && self.k2 > 0) {
            HalfLattice::Positive
        } else {
            HalfLattice::Negative
        }
    }

    #[inline]
    pub fn neg(&self) -> WaveIndex {
        WaveIndex {
            k1: -self.k1,
            k2: -self.k2,
        }
    }

    /// `|k|²` as a float.
    #[inline]
    pub fn norm2(&self) -> f64 {
        (self.k1 as f64) * (self.k1 as f64) + (self.k2 as f64) * (self.k2 as f64)
    }

    /// Perpendicular vector `k⊥ = (k₂, −k₁)`.
    #[inline]
    pub fn perp(&self) -> [f64; 2] {
        [self.k2 as f64, -(self.k1 as f64)]
    }

    #[inline]
    pub fn dot(&self, x: [f64; 2]) -> f64 {
        self.k1 as f64 * x[0] + self.k2 as f64 * x[1]
    }
}

/// Evaluate the real basis function `e_k` at a torus point.
pub fn basis_eval(k: WaveIndex, x: [f64; 2]) -> f64 {
    let phase = 2.0 * PI * k.dot(x);
    match k.half_lattice() {
        HalfLattice::Positive => SQRT_2 * phase.cos(),
        HalfLattice::Negative => SQRT_2 * phase.sin(),
    }
}

/// Fourier coefficient of the torus Green function: `Ĝ(k) = −1/(4π²|k|²)`
/// for `k ≠ 0` (the zero mode vanishes by the zero-mean normalization).
pub fn green_fourier_coeff(k: WaveIndex) -> f64 {
    -1.0 / (4.0 * PI * PI * k.norm2())
}

/// Per-configuration tables of complex phases `e^{2πi a x}` along each
/// coordinate, from which `e^{2πi k·x}` for any `|k₁|,|k₂| ≤ k_max` is one
/// complex multiply. Built once per configuration, these keep the
/// structure-factor and vorticity-transform inner loops trig-free.
#[derive(Debug, Clone)]
pub struct PhaseTables {
    k_max: i32,
    stride1: usize,
    stride2: usize,
    re1: Vec<f64>,
    im1: Vec<f64>,
    re2: Vec<f64>,
    im2: Vec<f64>,
}

impl PhaseTables {
    pub fn new(positions: &[[f64; 2]], k_max: u32) -> Self {
        let k = k_max as i32;
        let n = positions.len();
        let stride1 = k_max as usize + 1;
        let stride2 = 2 * k_max as usize + 1;
        let mut re1 = vec![0.0; n * stride1];
        let mut im1 = vec![0.0; n * stride1];
        let mut re2 = vec![0.0; n * stride2];
        let mut im2 = vec![0.0; n * stride2];
        for (i, p) in positions.iter().enumerate() {
            let (s1, c1) = (2.0 * PI * p[0]).sin_cos();
            let (mut wr, mut wi) = (1.0, 0.0);
            for a in 0..stride1 {
                re1[i * stride1 + a] = wr;
                im1[i * stride1 + a] = wi;
                let t = wr * c1 - wi * s1;
                wi = wr * s1 + wi * c1;
                wr = t;
            }
            let (s2, c2) = (2.0 * PI * p[1]).sin_cos();
            let (mut wr, mut wi) = (1.0, 0.0);
            for b in 0..=k as usize {
                re2[i * stride2 + (k as usize + b)] = wr;
                im2[i * stride2 + (k as usize + b)] = wi;
                // negative powers are the conjugates
                re2[i * stride2 + (k as usize - b)] = wr;
                im2[i * stride2 + (k as usize - b)] = -wi;
                let t = wr * c2 - wi * s2;
                wi = wr * s2 + wi * c2;
                wr = t;
            }
        }
        PhaseTables {
            k_max: k,
            stride1,
            stride2,
            re1,
            im1,
            re2,
            im2,
        }
    }

    #[inline]
    pub fn k_max(&self) -> u32 {
        self.k_max as u32
    }

    /// `(cos, sin)` of `2π k·x_i` for `k₁ ≥ 0` (the stored half); callers
    /// conjugate for `k₁ < 0`.
    #[inline]
    pub fn phase(&self, i: usize, k1: i32, k2: i32) -> (f64, f64) {
        debug_assert!((0..=self.k_max).contains(&k1) && k2.abs() <= self.k_max);
        let a = i * self.stride1 + k1 as usize;
        let b = i * self.stride2 + (k2 + self.k_max) as usize;
        let (r1, i1) = (self.re1[a], self.im1[a]);
        let (r2, i2) = (self.re2[b], self.im2[b]);
        (r1 * r2 - i1 * i2, r1 * i2 + i1 * r2)
    }

    /// `(cos, sin)` of `2π k·x_i` for arbitrary `k` within the table range.
    #[inline]
    pub fn phase_any(&self, i: usize, k: WaveIndex) -> (f64, f64) {
        if k.k1() >= 0 {
            self.phase(i, k.k1(), k.k2())
        } else {
            let (c, s) = self.phase(i, -k.k1(), -k.k2());
            (c, -s)
        }
    }
}

/// The index set `Λ_N = {k ∈ Z² \ {0} : |k| ≤ N}` in a fixed canonical
/// order (lexicographic in `(k₁, k₂)`).
#[derive(Debug, Clone)]
pub struct IndexSet {
    cutoff: u32,
    modes: Vec<WaveIndex>,
    // dense (2N+1)² lookup from (k1,k2) to position in `modes`
    lookup: Vec<u32>,
}

const NO_MODE: u32 = u32::MAX;

impl IndexSet {
    pub fn new(cutoff: u32) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::InvalidCount("index-set cutoff must be >= 1".into()));
        }
        let n = cutoff as i64;
        let side = (2 * n + 1) as usize;
        let mut modes = Vec::new();
        let mut lookup = vec![NO_MODE; side * side];
        for k1 in -n..=n {
            for k2 in -n..=n {
                let r2 = k1 * k1 + k2 * k2;
                if r2 == 0 || r2 > n * n {
                    continue;
                }
                let idx = modes.len() as u32;
                modes.push(WaveIndex {
                    k1: k1 as i32,
                    k2: k2 as i32,
                });
                lookup[((k1 + n) as usize) * side + (k2 + n) as usize] = idx;
            }
        }
        Ok(IndexSet {
            cutoff,
            modes,
            lookup,
        })
    }

    #[inline]
    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    /// Number of modes, `|Λ_N|`.
    #[inline]
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// `|Λ̂_N|`, counting the zero mode as well.
    #[inline]
    pub fn len_with_origin(&self) -> usize {
        self.modes.len() + 1
    }

    #[inline]
    pub fn modes(&self) -> &[WaveIndex] {
        &self.modes
    }

    /// Position of `k` in the canonical order, if `|k| ≤ N`.
    #[inline]
    pub fn index_of(&self, k: WaveIndex) -> Option<usize> {
        let n = self.cutoff as i64;
        let (k1, k2) = (k.k1 as i64, k.k2 as i64);
        if k1.abs() > n || k2.abs() > n {
            return None;
        }
        let side = (2 * n + 1) as usize;
        let v = self.lookup[((k1 + n) as usize) * side + (k2 + n) as usize];
        if v == NO_MODE {
            None
        } else {
            Some(v as usize)
        }
    }

    #[inline]
    pub fn contains(&self, k: WaveIndex) -> bool {
        self.index_of(k).is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_index_rejected() {
        assert!(matches!(WaveIndex::new(0, 0), Err(Error::ZeroWaveIndex)));
    }

    #[test]
    fn half_lattice_partition_is_total_and_exclusive() {
        for k1 in -7..=7 {
            for k2 in -7..=7 {
                if k1 == 0 && k2 == 0 {
                    continue;
                }
                let k = WaveIndex::new(k1, k2).unwrap();
                let a = k.half_lattice();
                let b = k.neg().half_lattice();
                assert_ne!(a, b, "k = ({k1},{k2}) and -k share a half-lattice");
            }
        }
    }

    #[test]
    fn basis_values_at_pinned_points() {
        let k = WaveIndex::new(1, 0).unwrap();
        assert_abs_diff_eq!(basis_eval(k, [0.0, 0.0]), SQRT_2, epsilon = 1e-15);

        let k = WaveIndex::new(0, 1).unwrap();
        assert_abs_diff_eq!(basis_eval(k, [0.25, 0.25]), 0.0, epsilon = 1e-15);

        let k = WaveIndex::new(-1, 0).unwrap();
        assert_abs_diff_eq!(basis_eval(k, [0.25, 0.0]), -SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn green_coefficients_match_closed_form() {
        let c = |k1, k2| green_fourier_coeff(WaveIndex::new(k1, k2).unwrap());
        assert_abs_diff_eq!(c(1, 0), -1.0 / (4.0 * PI * PI), epsilon = 1e-18);
        assert_abs_diff_eq!(c(1, 1), -1.0 / (8.0 * PI * PI), epsilon = 1e-18);
        assert_abs_diff_eq!(c(3, 4), -1.0 / (100.0 * PI * PI), epsilon = 1e-18);
    }

    #[test]
    fn index_set_counts_by_enumeration() {
        // |Λ_1| = {(±1,0),(0,±1)}
        assert_eq!(IndexSet::new(1).unwrap().len(), 4);
        // brute-force oracle over a larger square
        for n in [2u32, 5, 16] {
            let mut count = 0usize;
            let ni = n as i64;
            for k1 in -ni..=ni {
                for k2 in -ni..=ni {
                    let r2 = k1 * k1 + k2 * k2;
                    if r2 > 0 && r2 <= ni * ni {
                        count += 1;
                    }
                }
            }
            let set = IndexSet::new(n).unwrap();
            assert_eq!(set.len(), count);
            assert_eq!(set.len_with_origin(), count + 1);
        }
    }

    #[test]
    fn index_lookup_roundtrip() {
        let set = IndexSet::new(9).unwrap();
        for (i, &k) in set.modes().iter().enumerate() {
            assert_eq!(set.index_of(k), Some(i));
        }
        assert!(!set.contains(WaveIndex::new(9, 9).unwrap()));
        assert!(set.contains(WaveIndex::new(0, 9).unwrap()));
    }

    #[test]
    fn discrete_orthonormality_on_quadrature_grid() {
        // On a g² uniform grid the discrete pairing of e_k and e_m is exactly
        // δ_{k,m} as long as all frequencies stay below the Nyquist band.
        let g = 64usize;
        let set = IndexSet::new(10).unwrap();
        let pairs = [
            ((1, 0), (1, 0)),
            ((1, 0), (0, 1)),
            ((3, -2), (3, -2)),
            ((3, -2), (-3, 2)),
            ((-5, 1), (-5, 1)),
            ((2, 2), (4, 4)),
            ((0, 7), (7, 0)),
        ];
        for &((a1, a2), (b1, b2)) in &pairs {
            let ka = WaveIndex::new(a1, a2).unwrap();
            let kb = WaveIndex::new(b1, b2).unwrap();
            assert!(set.contains(ka) && set.contains(kb));
            let mut acc = 0.0;
            for i in 0..g {
                for j in 0..g {
                    let x = [i as f64 / g as f64, j as f64 / g as f64];
                    acc += basis_eval(ka, x) * basis_eval(kb, x);
                }
            }
            let expected = if ka == kb { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(acc / (g * g) as f64, expected, epsilon = 1e-12);
        }
    }
}
