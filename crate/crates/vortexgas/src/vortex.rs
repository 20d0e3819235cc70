//! Vortex configurations, the interaction Hamiltonian, and samplers for
//! the product measure and its energy-conditioned restriction.
//!
//! A configuration holds `N` unscaled intensities `ξ_i` and `N` torus
//! positions. Operations apply the scalings internally: the Hamiltonian is
//!
//! ```text
//! H_N = −(1/2N) Σ_{i≠j} ξ_i ξ_j G(x_i − x_j),
//! ```
//!
//! the logarithmic interaction energy is `Σ_{i≠j} ξ̂_i ξ̂_j ln(1/d(x_i,x_j))`
//! with minimum-image distances and a selectable intensity scaling, and
//! the empirical vorticity transform carries the `1/√N` normalization.

use crate::spectral::{EwaldGreen, GreenEvaluator, HalfLattice, IndexSet, PhaseTables};
use crate::torus::{self, Accumulator};
use crate::white_noise::SpectralField;
use crate::{Error, Result};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::SQRT_2;
use std::sync::Arc;

/// Positions closer than this are treated as coincident.
pub const COINCIDENCE_TOLERANCE: f64 = 1e-12;

/// Law of the vortex intensities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntensityLaw {
    /// iid standard Gaussian.
    StandardGaussian,
    /// Exactly half `+1` and half `−1`, randomly assigned (intensities are
    /// stored unscaled; operations divide by `√N` where a scaled
    /// convention applies).
    RademacherBalanced,
    /// Externally supplied intensities.
    Fixed,
}

impl IntensityLaw {
    pub fn name(&self) -> &'static str {
        match self {
            IntensityLaw::StandardGaussian => "gaussian",
            IntensityLaw::RademacherBalanced => "rademacher",
            IntensityLaw::Fixed => "fixed",
        }
    }
}

/// Intensity scaling applied inside [`interaction_energy`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntensityScale {
    /// Use the stored intensities as they are.
    Raw,
    /// Divide each intensity by `√N`.
    InvSqrtN,
}

/// Pairwise kernel convention for energies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelChoice {
    /// The torus Green function (the Hamiltonian convention).
    TorusGreen,
    /// `ln(1/d)` of the minimum-image distance.
    MinImageLog,
}

impl KernelChoice {
    pub fn name(&self) -> &'static str {
        match self {
            KernelChoice::TorusGreen => "torus-green",
            KernelChoice::MinImageLog => "min-image-log",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "torus-green" | "green" => Ok(KernelChoice::TorusGreen),
            "min-image-log" | "log" => Ok(KernelChoice::MinImageLog),
            other => Err(Error::Parse(format!("unknown kernel choice `{other}`"))),
        }
    }
}

/// The interval `[a, b]` defining microcanonical conditioning. Infinite
/// edges are allowed; the interval is closed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyWindow {
    a: f64,
    b: f64,
}

impl EnergyWindow {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if a.is_nan() || b.is_nan() || !(a < b) {
            return Err(Error::InvalidRange(format!(
                "energy window requires a < b, got [{a}, {b}]"
            )));
        }
        Ok(EnergyWindow { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    #[inline]
    pub fn contains(&self, v: f64) -> bool {
        self.a <= v && v <= self.b
    }
}

/// The microstate: `N` intensities and `N` canonical torus positions.
#[derive(Debug, Clone)]
pub struct VortexConfig {
    positions: Vec<[f64; 2]>,
    intensities: Vec<f64>,
    law: IntensityLaw,
}

impl VortexConfig {
    pub fn new(
        positions: Vec<[f64; 2]>,
        intensities: Vec<f64>,
        law: IntensityLaw,
    ) -> Result<Self> {
        if positions.is_empty() || positions.len() != intensities.len() {
            return Err(Error::InvalidCount(format!(
                "{} positions vs {} intensities (need equal and >= 1)",
                positions.len(),
                intensities.len()
            )));
        }
        let positions = positions.into_iter().map(torus::canonical_point).collect();
        Ok(VortexConfig {
            positions,
            intensities,
            law,
        })
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    pub fn law(&self) -> IntensityLaw {
        self.law
    }

    /// Replace positions, keeping intensities (used by the integrator).
    pub(crate) fn with_positions(&self, positions: Vec<[f64; 2]>) -> VortexConfig {
        debug_assert_eq!(positions.len(), self.positions.len());
        VortexConfig {
            positions,
            intensities: self.intensities.clone(),
            law: self.law,
        }
    }

    /// Smallest pairwise minimum-image distance, with the realizing pair.
    pub fn min_separation(&self) -> Option<(f64, usize, usize)> {
        let n = self.n();
        if n < 2 {
            return None;
        }
        let mut best = (f64::INFINITY, 0usize, 0usize);
        for i in 0..n {
            for j in (i + 1)..n {
                let d2 = torus::dist2(self.positions[i], self.positions[j]);
                if d2 < best.0 {
                    best = (d2, i, j);
                }
            }
        }
        Some((best.0.sqrt(), best.1, best.2))
    }
}

fn check_no_coincidence(c: &VortexConfig) -> Result<()> {
    if let Some((d, i, j)) = c.min_separation() {
        if d < COINCIDENCE_TOLERANCE {
            return Err(Error::CoincidentPositions {
                i,
                j,
                separation: d,
            });
        }
    }
    Ok(())
}

/// `H_N = −(1/2N) Σ_{i≠j} ξ_i ξ_j G(x_i − x_j)` via pairwise kernel
/// evaluation. The reference route; see [`hamiltonian_split`] for the
/// accelerated equivalent used by ensembles.
pub fn hamiltonian(c: &VortexConfig, g: &GreenEvaluator) -> Result<f64> {
    check_no_coincidence(c)?;
    let n = c.n();
    let mut acc = Accumulator::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = torus::delta(c.positions[i], c.positions[j]);
            acc.add(c.intensities[i] * c.intensities[j] * g.green(d)?);
        }
    }
    Ok(-acc.value() / (n as f64))
}

/// Same Hamiltonian through the Ewald two-sum split: short-range image
/// terms pairwise, long-range modes through structure factors. O(N²) in
/// the cheap part only; agrees with [`hamiltonian`] to evaluator accuracy.
pub fn hamiltonian_split(c: &VortexConfig, e: &EwaldGreen) -> Result<f64> {
    check_no_coincidence(c)?;
    let n = c.n();
    let xs = &c.positions;
    let xi = &c.intensities;
    // short-range part (includes the +s constant of the split)
    let partial: Vec<f64> = crate::exec::indexed_map(n, |i| {
        let mut acc = Accumulator::new();
        for j in (i + 1)..n {
            let d = torus::delta(xs[i], xs[j]);
            acc.add(xi[i] * xi[j] * e.short_range_fast(d));
        }
        acc.value()
    });
    let mut pair_sum = Accumulator::new();
    for p in partial {
        pair_sum.add(p);
    }
    let mut total = 2.0 * pair_sum.value();
    // long-range part: Σ_{i≠j} ξξ G_long = −Σ_half cg_m (|S_m|² − Q)
    let tables = e.phase_tables(xs);
    let sf = e.structure_factors(&tables, xi);
    let q: f64 = xi.iter().map(|v| v * v).sum();
    let mut lr = Accumulator::new();
    for (m, mode) in e.modes().iter().enumerate() {
        let s2 = sf[m][0] * sf[m][0] + sf[m][1] * sf[m][1];
        lr.add(mode.cg * (s2 - q));
    }
    total -= lr.value();
    Ok(-total / (2.0 * n as f64))
}

/// `Σ_{i≠j} ξ̂_i ξ̂_j ln(1/d(x_i, x_j))` over minimum-image distances,
/// with intensities scaled per `scale`.
pub fn interaction_energy(c: &VortexConfig, scale: IntensityScale) -> Result<f64> {
    check_no_coincidence(c)?;
    let n = c.n();
    let factor = match scale {
        IntensityScale::Raw => 1.0,
        IntensityScale::InvSqrtN => 1.0 / (n as f64),
    };
    let xs = &c.positions;
    let xi = &c.intensities;
    let partial: Vec<f64> = crate::exec::indexed_map(n, |i| {
        let mut acc = Accumulator::new();
        for j in (i + 1)..n {
            let d2 = torus::dist2(xs[i], xs[j]);
            // ln(1/d) = −ln(d) = −ln(d²)/2
            acc.add(-0.5 * xi[i] * xi[j] * d2.ln());
        }
        acc.value()
    });
    let mut acc = Accumulator::new();
    for p in partial {
        acc.add(p);
    }
    Ok(2.0 * factor * acc.value())
}

/// `⟨ω_N ⊗ ω_N, f⟩ = (1/N) Σ_{i≠j} ξ_i ξ_j f(x_i, x_j)` for a symmetric
/// kernel with vanishing diagonal.
pub fn quadratic_form<F>(c: &VortexConfig, f: F) -> f64
where
    F: Fn([f64; 2], [f64; 2]) -> f64,
{
    let n = c.n();
    let mut acc = Accumulator::new();
    for i in 0..n {
        for j in (i + 1)..n {
            acc.add(c.intensities[i] * c.intensities[j] * f(c.positions[i], c.positions[j]));
        }
    }
    2.0 * acc.value() / n as f64
}

/// Draw a configuration from the product measure: positions iid uniform,
/// intensities per the chosen law.
pub fn sample_lambda<R: Rng + ?Sized>(
    n: usize,
    law: IntensityLaw,
    rng: &mut R,
) -> Result<VortexConfig> {
    if n < 1 {
        return Err(Error::InvalidCount("need at least one vortex".into()));
    }
    let positions: Vec<[f64; 2]> = (0..n).map(|_| [rng.random(), rng.random()]).collect();
    let intensities = match law {
        IntensityLaw::StandardGaussian => {
            (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
        }
        IntensityLaw::RademacherBalanced => {
            if n % 2 != 0 {
                return Err(Error::InvalidCount(format!(
                    "balanced signs need an even count, got {n}"
                )));
            }
            let mut signs: Vec<f64> = std::iter::repeat(1.0)
                .take(n / 2)
                .chain(std::iter::repeat(-1.0).take(n / 2))
                .collect();
            signs.shuffle(rng);
            signs
        }
        IntensityLaw::Fixed => {
            return Err(Error::InvalidInput(
                "the fixed intensity law has no sampler".into(),
            ))
        }
    };
    VortexConfig::new(positions, intensities, law)
}

/// Rejection sampling from a base sampler restricted to an energy window.
/// Returns the accepted configuration and the attempt count; `1/attempts`
/// is an unbiased-in-expectation estimate of the window mass.
pub fn condition_energy<R, S, E>(
    mut sampler: S,
    window: EnergyWindow,
    energy_fn: E,
    rng: &mut R,
    max_attempts: u64,
) -> Result<(VortexConfig, u64)>
where
    R: Rng + ?Sized,
    S: FnMut(&mut R) -> Result<VortexConfig>,
    E: Fn(&VortexConfig) -> Result<f64>,
{
    if max_attempts == 0 {
        return Err(Error::InvalidCount("max_attempts must be >= 1".into()));
    }
    for attempt in 1..=max_attempts {
        let c = sampler(rng)?;
        if window.contains(energy_fn(&c)?) {
            return Ok((c, attempt));
        }
    }
    Err(Error::AcceptanceFailure {
        attempts: max_attempts,
    })
}

/// Composition of a clustered configuration: same-sign clusters of the
/// given sizes (disc-uniform members around iid uniform centers) plus
/// `n_free` uniformly placed vortices, with the overall ±1 multiset
/// balanced.
#[derive(Debug, Clone)]
pub struct ClusterSpec {
    pub cluster_sizes: Vec<usize>,
    pub n_free: usize,
    pub diameter: f64,
}

impl ClusterSpec {
    pub fn total(&self) -> usize {
        self.n_free + self.cluster_sizes.iter().sum::<usize>()
    }
}

/// Split cluster sizes into two sign groups of equal vortex count
/// (subset-sum). Returns per-cluster signs.
fn balance_cluster_signs(sizes: &[usize]) -> Option<Vec<f64>> {
    let total: usize = sizes.iter().sum();
    if total % 2 != 0 {
        return None;
    }
    let target = total / 2;
    // reachable[s] = Some(index of the last cluster used to reach sum s)
    let mut reach: Vec<Option<usize>> = vec![None; target + 1];
    let mut used: Vec<Vec<bool>> = vec![Vec::new(); target + 1];
    reach[0] = Some(usize::MAX);
    used[0] = vec![false; sizes.len()];
    for (ci, &s) in sizes.iter().enumerate() {
        if s > target {
            continue;
        }
        for sum in (0..=target - s).rev() {
            if reach[sum].is_some() && reach[sum + s].is_none() {
                reach[sum + s] = Some(ci);
                let mut u = used[sum].clone();
                u[ci] = true;
                used[sum + s] = u;
            }
        }
    }
    reach[target]?;
    let positive = &used[target];
    Some(
        sizes
            .iter()
            .enumerate()
            .map(|(i, _)| if positive[i] { 1.0 } else { -1.0 })
            .collect(),
    )
}

/// Build a clustered configuration per the composition spec.
pub fn make_clustered<R: Rng + ?Sized>(spec: &ClusterSpec, rng: &mut R) -> Result<VortexConfig> {
    if spec.cluster_sizes.is_empty() {
        return sample_lambda(spec.n_free, IntensityLaw::RademacherBalanced, rng);
    }
    if spec.diameter <= 0.0 {
        return Err(Error::InvalidRange("cluster diameter must be positive".into()));
    }
    if spec.cluster_sizes.iter().any(|&s| s == 0) {
        return Err(Error::InvalidComposition("empty cluster".into()));
    }
    let signs = balance_cluster_signs(&spec.cluster_sizes).ok_or_else(|| {
        Error::InvalidComposition(format!(
            "cluster sizes {:?} admit no equal-sum sign split",
            spec.cluster_sizes
        ))
    })?;
    if spec.n_free % 2 != 0 {
        return Err(Error::InvalidComposition(
            "free vortex count must be even to balance signs".into(),
        ));
    }
    let mut positions = Vec::with_capacity(spec.total());
    let mut intensities = Vec::with_capacity(spec.total());
    let radius = spec.diameter / 2.0;
    for (ci, &size) in spec.cluster_sizes.iter().enumerate() {
        let center = [rng.random::<f64>(), rng.random::<f64>()];
        for _ in 0..size {
            let r = radius * rng.random::<f64>().sqrt();
            let theta = rng.random::<f64>() * std::f64::consts::TAU;
            positions.push(torus::canonical_point([
                center[0] + r * theta.cos(),
                center[1] + r * theta.sin(),
            ]));
            intensities.push(signs[ci]);
        }
    }
    let mut free_signs: Vec<f64> = std::iter::repeat(1.0)
        .take(spec.n_free / 2)
        .chain(std::iter::repeat(-1.0).take(spec.n_free / 2))
        .collect();
    free_signs.shuffle(rng);
    for sign in free_signs {
        positions.push([rng.random(), rng.random()]);
        intensities.push(sign);
    }
    VortexConfig::new(positions, intensities, IntensityLaw::RademacherBalanced)
}

/// Spectral representation of the renormalized empirical vorticity
/// `(1/√N) Σ_i ξ_i δ_{x_i}` with the mean removed: real-basis coefficients
/// `⟨ω_N, e_k⟩ = (1/√N) Σ_i ξ_i e_k(x_i)` over `Λ_{n_cut}` (complex view
/// `ω̂(l) = (1/√N) Σ_i ξ_i e^{−2πi l·x_i}`, zero mode set to 0).
pub fn empirical_vorticity(c: &VortexConfig, n_cut: u32) -> Result<SpectralField> {
    let modes = Arc::new(IndexSet::new(n_cut)?);
    let tables = PhaseTables::new(c.positions(), n_cut);
    let norm = SQRT_2 / (c.n() as f64).sqrt();
    let xi = c.intensities();
    let mode_list = modes.modes();
    let coeffs: Vec<f64> = crate::exec::indexed_map(mode_list.len(), |m| {
        let k = mode_list[m];
        let mut acc = 0.0;
        match k.half_lattice() {
            HalfLattice::Positive => {
                for (i, &w) in xi.iter().enumerate() {
                    let (cv, _) = tables.phase_any(i, k);
                    acc += w * cv;
                }
            }
            HalfLattice::Negative => {
                for (i, &w) in xi.iter().enumerate() {
                    let (_, sv) = tables.phase_any(i, k);
                    acc += w * sv;
                }
            }
        }
        norm * acc
    });
    SpectralField::new(modes, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn window_validation() {
        assert!(EnergyWindow::new(0.0, 1.0).is_ok());
        assert!(EnergyWindow::new(f64::NEG_INFINITY, f64::INFINITY).is_ok());
        assert!(EnergyWindow::new(1.0, 1.0).is_err());
        assert!(EnergyWindow::new(2.0, 1.0).is_err());
        assert!(EnergyWindow::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn single_vortex_energies_vanish() {
        let c = VortexConfig::new(vec![[0.3, 0.4]], vec![1.7], IntensityLaw::Fixed).unwrap();
        let g = GreenEvaluator::ewald();
        assert_eq!(hamiltonian(&c, &g).unwrap(), 0.0);
        assert_eq!(interaction_energy(&c, IntensityScale::Raw).unwrap(), 0.0);
        assert_eq!(quadratic_form(&c, |_, _| 1.0), 0.0);
    }

    #[test]
    fn two_vortex_hamiltonian_matches_spectral_oracle() {
        // ξ = (1,1) at separation (1/2, 0): H = −G((1/2,0))/2, with the
        // expected value from the slow spectral-truncation oracle
        let c = VortexConfig::new(
            vec![[0.1, 0.2], [0.6, 0.2]],
            vec![1.0, 1.0],
            IntensityLaw::Fixed,
        )
        .unwrap();
        let oracle = GreenEvaluator::spectral(512).unwrap();
        let expect = -oracle.green([0.5, 0.0]).unwrap() / 2.0;
        let got = hamiltonian(&c, &GreenEvaluator::ewald()).unwrap();
        assert!(
            (got - expect).abs() < oracle.green_tolerance(),
            "{got} vs {expect}"
        );
    }

    #[test]
    fn hamiltonian_is_bilinear_in_intensities() {
        let mut r = rng(2);
        let base = sample_lambda(6, IntensityLaw::StandardGaussian, &mut r).unwrap();
        let g = GreenEvaluator::ewald();
        let h = hamiltonian(&base, &g).unwrap();
        let flipped = VortexConfig::new(
            base.positions().to_vec(),
            base.intensities().iter().map(|v| -v).collect(),
            IntensityLaw::Fixed,
        )
        .unwrap();
        // flipping every sign leaves each product ξᵢξⱼ unchanged
        assert_abs_diff_eq!(hamiltonian(&flipped, &g).unwrap(), h, epsilon = 1e-15);
        // flipping one sign with N=2 flips the sign of the result
        let two = VortexConfig::new(
            vec![[0.2, 0.2], [0.7, 0.5]],
            vec![1.0, 1.0],
            IntensityLaw::Fixed,
        )
        .unwrap();
        let two_flip = VortexConfig::new(
            two.positions().to_vec(),
            vec![1.0, -1.0],
            IntensityLaw::Fixed,
        )
        .unwrap();
        let a = hamiltonian(&two, &g).unwrap();
        let b = hamiltonian(&two_flip, &g).unwrap();
        assert_abs_diff_eq!(a, -b, epsilon = 1e-15);
    }

    #[test]
    fn hamiltonian_invariances() {
        let mut r = rng(3);
        let c = sample_lambda(8, IntensityLaw::StandardGaussian, &mut r).unwrap();
        let g = GreenEvaluator::ewald();
        let h = hamiltonian(&c, &g).unwrap();
        // permutation of (ξ, x) pairs
        let perm: Vec<usize> = vec![3, 1, 7, 0, 6, 2, 5, 4];
        let cp = VortexConfig::new(
            perm.iter().map(|&i| c.positions()[i]).collect(),
            perm.iter().map(|&i| c.intensities()[i]).collect(),
            IntensityLaw::Fixed,
        )
        .unwrap();
        assert_abs_diff_eq!(hamiltonian(&cp, &g).unwrap(), h, epsilon = 1e-13);
        // joint translation
        let shift = [0.37, -0.21];
        let ct = VortexConfig::new(
            c.positions()
                .iter()
                .map(|p| [p[0] + shift[0], p[1] + shift[1]])
                .collect(),
            c.intensities().to_vec(),
            IntensityLaw::Fixed,
        )
        .unwrap();
        assert_abs_diff_eq!(hamiltonian(&ct, &g).unwrap(), h, epsilon = 1e-12);
    }

    #[test]
    fn coincident_positions_are_rejected() {
        let c = VortexConfig::new(
            vec![[0.5, 0.5], [0.5, 0.5]],
            vec![1.0, -1.0],
            IntensityLaw::Fixed,
        )
        .unwrap();
        assert!(matches!(
            hamiltonian(&c, &GreenEvaluator::ewald()),
            Err(Error::CoincidentPositions { .. })
        ));
    }

    #[test]
    fn interaction_energy_pinned_values() {
        let d = (-1.0f64).exp();
        let c = VortexConfig::new(
            vec![[0.1, 0.2], [0.1 + d, 0.2]],
            vec![1.0, 1.0],
            IntensityLaw::Fixed,
        )
        .unwrap();
        assert_abs_diff_eq!(
            interaction_energy(&c, IntensityScale::Raw).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        let c2 = VortexConfig::new(
            c.positions().to_vec(),
            vec![1.0, -1.0],
            IntensityLaw::Fixed,
        )
        .unwrap();
        assert_abs_diff_eq!(
            interaction_energy(&c2, IntensityScale::Raw).unwrap(),
            -2.0,
            epsilon = 1e-12
        );
        // InvSqrtN divides each intensity by √N, i.e. the value by N
        assert_abs_diff_eq!(
            interaction_energy(&c, IntensityScale::InvSqrtN).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn hamiltonian_equals_minus_half_quadratic_form() {
        let mut r = rng(5);
        let g = GreenEvaluator::ewald();
        for n in [2usize, 7, 20] {
            let c = sample_lambda(n, IntensityLaw::StandardGaussian, &mut r).unwrap();
            let h = hamiltonian(&c, &g).unwrap();
            let qf = quadratic_form(&c, |x, y| g.green(torus::delta(x, y)).unwrap());
            let rel = (h - (-0.5 * qf)).abs() / h.abs().max(1e-30);
            assert!(rel < 1e-12, "identity residual {rel:e} at n={n}");
        }
    }

    #[test]
    fn split_hamiltonian_agrees_with_pairwise() {
        let mut r = rng(7);
        let e = EwaldGreen::new();
        let g = GreenEvaluator::Ewald(e.clone());
        for n in [2usize, 13, 40] {
            let c = sample_lambda(n, IntensityLaw::StandardGaussian, &mut r).unwrap();
            let a = hamiltonian(&c, &g).unwrap();
            let b = hamiltonian_split(&c, &e).unwrap();
            assert!((a - b).abs() < 1e-11 * a.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn gaussian_sampler_moments() {
        let mut r = rng(11);
        let draws = 100_000;
        let mut sum = 0.0;
        let mut sq = 0.0;
        for _ in 0..draws / 10 {
            let c = sample_lambda(10, IntensityLaw::StandardGaussian, &mut r).unwrap();
            for &v in c.intensities() {
                sum += v;
                sq += v * v;
            }
        }
        let n = draws as f64;
        let mean = sum / n;
        let var = sq / n - mean * mean;
        assert!(mean.abs() < 3.0 / n.sqrt());
        assert!((var - 1.0).abs() < 3.0 * (2.0f64).sqrt() / n.sqrt());
    }

    #[test]
    fn balanced_sampler_sums_to_zero_exactly() {
        let mut r = rng(13);
        let c = sample_lambda(200, IntensityLaw::RademacherBalanced, &mut r).unwrap();
        let total: f64 = c.intensities().iter().sum();
        assert_eq!(total, 0.0);
        assert!(c.intensities().iter().all(|&v| v == 1.0 || v == -1.0));
        assert!(matches!(
            sample_lambda(7, IntensityLaw::RademacherBalanced, &mut r),
            Err(Error::InvalidCount(_))
        ));
    }

    #[test]
    fn conditioning_vacuous_window_and_consistency() {
        let mut r = rng(17);
        let all = EnergyWindow::new(f64::NEG_INFINITY, f64::INFINITY).unwrap();
        let (_, attempts) = condition_energy(
            |rr: &mut ChaCha8Rng| sample_lambda(10, IntensityLaw::StandardGaussian, rr),
            all,
            |c| interaction_energy(c, IntensityScale::InvSqrtN),
            &mut r,
            5,
        )
        .unwrap();
        assert_eq!(attempts, 1);

        // acceptance rate tracks the unconditioned window mass
        let n = 20usize;
        let w = EnergyWindow::new(-0.5, 0.5).unwrap();
        let efn = |c: &VortexConfig| interaction_energy(c, IntensityScale::InvSqrtN);
        let draws = 4000;
        let mut hits = 0;
        for _ in 0..draws {
            let c = sample_lambda(n, IntensityLaw::RademacherBalanced, &mut r).unwrap();
            if w.contains(efn(&c).unwrap()) {
                hits += 1;
            }
        }
        let mass = hits as f64 / draws as f64;
        let runs = 400;
        let mut attempts_total = 0;
        for _ in 0..runs {
            let (cfg, att) = condition_energy(
                |rr: &mut ChaCha8Rng| sample_lambda(n, IntensityLaw::RademacherBalanced, rr),
                w,
                efn,
                &mut r,
                100_000,
            )
            .unwrap();
            assert!(w.contains(efn(&cfg).unwrap()));
            attempts_total += att;
        }
        let rate = runs as f64 / attempts_total as f64;
        let se = (mass * (1.0 - mass) / draws as f64).sqrt() + mass / (runs as f64).sqrt();
        assert!((rate - mass).abs() < 3.0 * se, "rate {rate} vs mass {mass}");

        // exhaustion carries the attempt count
        let narrow = EnergyWindow::new(1e8, 2e8).unwrap();
        assert!(matches!(
            condition_energy(
                |rr: &mut ChaCha8Rng| sample_lambda(4, IntensityLaw::StandardGaussian, rr),
                narrow,
                efn,
                &mut r,
                25,
            ),
            Err(Error::AcceptanceFailure { attempts: 25 })
        ));
    }

    #[test]
    fn clustered_construction_respects_geometry_and_balance() {
        let mut r = rng(19);
        let spec = ClusterSpec {
            cluster_sizes: vec![2, 4, 8, 2, 4, 8],
            n_free: 172,
            diameter: 0.01,
        };
        let c = make_clustered(&spec, &mut r).unwrap();
        assert_eq!(c.n(), 200);
        assert_eq!(c.intensities().iter().sum::<f64>(), 0.0);
        // intra-cluster pairwise distances bounded by the diameter
        let mut offset = 0;
        for &size in &spec.cluster_sizes {
            for a in offset..offset + size {
                assert_eq!(c.intensities()[a], c.intensities()[offset]);
                for b in (a + 1)..offset + size {
                    assert!(torus::dist(c.positions()[a], c.positions()[b]) <= spec.diameter);
                }
            }
            offset += size;
        }
    }

    #[test]
    fn clustered_with_no_clusters_is_the_balanced_sampler() {
        let spec = ClusterSpec {
            cluster_sizes: vec![],
            n_free: 50,
            diameter: 0.01,
        };
        // the two samplers consume randomness identically
        let a = make_clustered(&spec, &mut rng(23)).unwrap();
        let b = sample_lambda(50, IntensityLaw::RademacherBalanced, &mut rng(23)).unwrap();
        assert_eq!(a.positions(), b.positions());
        assert_eq!(a.intensities(), b.intensities());
    }

    #[test]
    fn impossible_sign_balance_is_rejected() {
        let spec = ClusterSpec {
            cluster_sizes: vec![3],
            n_free: 10,
            diameter: 0.01,
        };
        assert!(matches!(
            make_clustered(&spec, &mut rng(29)),
            Err(Error::InvalidComposition(_))
        ));
        let spec = ClusterSpec {
            cluster_sizes: vec![2, 4],
            n_free: 10,
            diameter: 0.01,
        };
        // 2 + 4 cannot split into two equal halves
        assert!(matches!(
            make_clustered(&spec, &mut rng(29)),
            Err(Error::InvalidComposition(_))
        ));
    }

    #[test]
    fn empirical_vorticity_single_vortex_and_symmetry() {
        let c = VortexConfig::new(vec![[0.0, 0.0]], vec![1.0], IntensityLaw::Fixed).unwrap();
        let f = empirical_vorticity(&c, 4).unwrap();
        for &k in f.index_set().modes() {
            let v = f.complex_coeff(k).unwrap();
            assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-12);
        }

        let mut r = rng(31);
        let c = sample_lambda(12, IntensityLaw::StandardGaussian, &mut r).unwrap();
        let f = empirical_vorticity(&c, 6).unwrap();
        for &k in f.index_set().modes() {
            let a = f.complex_coeff(k).unwrap();
            let b = f.complex_coeff(k.neg()).unwrap();
            assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-12);
            assert_abs_diff_eq!(a.im, -b.im, epsilon = 1e-12);
        }
        // cross-check one coefficient against the direct definition
        let k = crate::spectral::WaveIndex::new(2, -3).unwrap();
        let mut direct = num_complex::Complex64::default();
        for (i, &xi) in c.intensities().iter().enumerate() {
            let phase = -2.0 * std::f64::consts::PI * k.dot(c.positions()[i]);
            direct += xi * num_complex::Complex64::new(phase.cos(), phase.sin());
        }
        direct /= (c.n() as f64).sqrt();
        let got = f.complex_coeff(k).unwrap();
        assert_abs_diff_eq!(got.re, direct.re, epsilon = 1e-12);
        assert_abs_diff_eq!(got.im, direct.im, epsilon = 1e-12);
    }

    #[test]
    fn vorticity_second_moment_is_unit_under_gaussian_law() {
        let mut r = rng(37);
        let k = crate::spectral::WaveIndex::new(3, 1).unwrap();
        let draws = 10_000;
        let mut acc = 0.0;
        for _ in 0..draws {
            let c = sample_lambda(5, IntensityLaw::StandardGaussian, &mut r).unwrap();
            let f = empirical_vorticity(&c, 4).unwrap();
            acc += f.complex_coeff(k).unwrap().norm_sqr();
        }
        let mean = acc / draws as f64;
        // |ω̂|² has variance O(1); 3 SE band around 1
        assert!((mean - 1.0).abs() < 3.0 * 2.0 / (draws as f64).sqrt());
    }
}
