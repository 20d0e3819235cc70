//! Time integration of the point-vortex dynamics.
//!
//! The velocity of vortex `i` is
//!
//! ```text
//! v_i = (1/√N) Σ_{j≠i} ξ_j K(x_i − x_j),      K = ∇⊥G,
//! ```
//!
//! integrated with the Heun predictor–corrector scheme. The Ewald backend
//! splits the pair sum into a short-range image part (direct, i-major and
//! j-minor with compensated accumulation) and a long-range mode part
//! evaluated through structure factors; both reductions run in a fixed
//! order, and parallelism only splits the i-range and the mode range, so
//! serial and parallel runs are bit-identical.

use crate::error::HeunStage;
use crate::spectral::{EwaldGreen, GreenEvaluator};
use crate::torus::{self, Accumulator};
use crate::vortex::{hamiltonian, hamiltonian_split, VortexConfig};
use crate::{Error, Result};

/// Pairs closer than this abort the dynamics rather than integrating
/// through a near-singular kernel.
pub const NEAR_COLLISION_GUARD: f64 = 1e-6;

/// The triangular pair sweep is split into this many fixed i-chunks.
/// The chunk grid depends only on the vortex count, and chunk partials
/// are reduced in chunk order, so any thread count gives the same bits.
const PAIR_CHUNKS: usize = 16;

struct ChunkSweep {
    grads: Vec<[f64; 2]>,
    min_d2: f64,
    min_pair: (usize, usize),
}

/// Short-range gradient contributions of all pairs, swept triangularly
/// (each pair evaluated once, pushed onto both endpoints with opposite
/// signs). Also tracks the closest pair.
fn short_range_sweep(
    e: &EwaldGreen,
    xs: &[[f64; 2]],
    xi: &[f64],
    serial: bool,
) -> (Vec<[f64; 2]>, f64, (usize, usize)) {
    let n = xs.len();
    let range = e.image_range();
    let r2_cut = e.r2_cut();
    let inv4s = 1.0 / (4.0 * e.splitting());
    let two_pi = 2.0 * std::f64::consts::PI;
    let chunks = PAIR_CHUNKS.min(n);
    let sweep_chunk = |c: usize| -> ChunkSweep {
        let lo = c * n / chunks;
        let hi = (c + 1) * n / chunks;
        let mut out = ChunkSweep {
            grads: vec![[0.0, 0.0]; n],
            min_d2: f64::INFINITY,
            min_pair: (0, 0),
        };
        for i in lo..hi {
            for j in (i + 1)..n {
                let d = torus::delta(xs[i], xs[j]);
                let r2 = d[0] * d[0] + d[1] * d[1];
                if r2 < out.min_d2 {
                    out.min_d2 = r2;
                    out.min_pair = (i, j);
                }
                for mx in -range..=range {
                    for my in -range..=range {
                        let dx = d[0] + mx as f64;
                        let dy = d[1] + my as f64;
                        let rr = dx * dx + dy * dy;
                        if rr <= r2_cut {
                            let w = e.gauss_fast(rr * inv4s) / (two_pi * rr);
                            let (gx, gy) = (dx * w, dy * w);
                            out.grads[i][0] += xi[j] * gx;
                            out.grads[i][1] += xi[j] * gy;
                            out.grads[j][0] -= xi[i] * gx;
                            out.grads[j][1] -= xi[i] * gy;
                        }
                    }
                }
            }
        }
        out
    };
    let parts: Vec<ChunkSweep> = if serial {
        crate::exec::indexed_map_serial(chunks, sweep_chunk)
    } else {
        crate::exec::indexed_map(chunks, sweep_chunk)
    };
    let mut grads = vec![[0.0, 0.0]; n];
    let mut min_d2 = f64::INFINITY;
    let mut min_pair = (0, 0);
    for part in &parts {
        if part.min_d2 < min_d2 {
            min_d2 = part.min_d2;
            min_pair = part.min_pair;
        }
        for (g, p) in grads.iter_mut().zip(&part.grads) {
            g[0] += p[0];
            g[1] += p[1];
        }
    }
    (grads, min_d2, min_pair)
}

fn velocity_split_impl(c: &VortexConfig, e: &EwaldGreen, serial: bool) -> Result<Vec<[f64; 2]>> {
    let n = c.n();
    if n == 1 {
        // no other vortex: the velocity vanishes identically
        return Ok(vec![[0.0, 0.0]]);
    }
    let xs = c.positions();
    let xi = c.intensities();
    let inv_sqrt_n = 1.0 / (n as f64).sqrt();

    let (short_grads, min_d2, min_pair) = short_range_sweep(e, xs, xi, serial);
    if min_d2.sqrt() < NEAR_COLLISION_GUARD {
        return Err(Error::NearCollision {
            i: min_pair.0,
            j: min_pair.1,
            separation: min_d2.sqrt(),
            step: 0,
            stage: HeunStage::Predictor,
        });
    }

    // long-range: Σ_j ξ_j ∇G_long(x_i − x_j) through structure factors
    let tables = e.phase_tables(xs);
    let sf = e.structure_factors(&tables, xi);
    let modes = e.modes();
    let per_vortex = |i: usize| -> [f64; 2] {
        let mut f1 = 0.0;
        let mut f2 = 0.0;
        for (m, mode) in modes.iter().enumerate() {
            let (cv, sv) = tables.phase(i, mode.k1, mode.k2);
            let weight = sv * sf[m][0] - cv * sf[m][1];
            f1 += mode.gvec[0] * weight;
            f2 += mode.gvec[1] * weight;
        }
        let grad = [short_grads[i][0] + f1, short_grads[i][1] + f2];
        [inv_sqrt_n * grad[1], -inv_sqrt_n * grad[0]]
    };
    Ok(if serial {
        crate::exec::indexed_map_serial(n, per_vortex)
    } else {
        crate::exec::indexed_map(n, per_vortex)
    })
}

fn velocity_direct(c: &VortexConfig, g: &GreenEvaluator) -> Result<Vec<[f64; 2]>> {
    let n = c.n();
    let xs = c.positions();
    let xi = c.intensities();
    if let Some((d, i, j)) = c.min_separation() {
        if d < NEAR_COLLISION_GUARD {
            return Err(Error::NearCollision {
                i,
                j,
                separation: d,
                step: 0,
                stage: HeunStage::Predictor,
            });
        }
    }
    let inv_sqrt_n = 1.0 / (n as f64).sqrt();
    let mut velocities = Vec::with_capacity(n);
    for i in 0..n {
        let mut v1 = Accumulator::new();
        let mut v2 = Accumulator::new();
        for j in 0..n {
            if j == i {
                continue;
            }
            let k = g.biot_savart(torus::delta(xs[i], xs[j]))?;
            v1.add(xi[j] * k[0]);
            v2.add(xi[j] * k[1]);
        }
        velocities.push([inv_sqrt_n * v1.value(), inv_sqrt_n * v2.value()]);
    }
    Ok(velocities)
}

/// Velocities induced on each vortex by all the others (self-term
/// excluded). Errors if any pair is closer than [`NEAR_COLLISION_GUARD`].
pub fn velocity_field(c: &VortexConfig, g: &GreenEvaluator) -> Result<Vec<[f64; 2]>> {
    match g {
        GreenEvaluator::Ewald(e) => velocity_split_impl(c, e, false),
        GreenEvaluator::Spectral(_) => velocity_direct(c, g),
    }
}

/// Sequential reference path; bit-identical to [`velocity_field`].
pub fn velocity_field_serial(c: &VortexConfig, g: &GreenEvaluator) -> Result<Vec<[f64; 2]>> {
    match g {
        GreenEvaluator::Ewald(e) => velocity_split_impl(c, e, true),
        GreenEvaluator::Spectral(_) => velocity_direct(c, g),
    }
}

fn advance(c: &VortexConfig, v: &[[f64; 2]], h: f64) -> Vec<[f64; 2]> {
    c.positions()
        .iter()
        .zip(v)
        .map(|(p, vi)| torus::canonical_point([p[0] + h * vi[0], p[1] + h * vi[1]]))
        .collect()
}

fn stage_err(e: Error, stage: HeunStage) -> Error {
    match e {
        Error::NearCollision {
            i,
            j,
            separation,
            step,
            ..
        } => Error::NearCollision {
            i,
            j,
            separation,
            step,
            stage,
        },
        other => other,
    }
}

/// One Heun (explicit trapezoidal) step: predictor `x* = x + h v(x)`,
/// corrector `x' = x + (h/2)(v(x) + v(x*))`. Intensities are untouched and
/// positions re-canonicalized. `h = 0` returns the input unchanged.
pub fn heun_step(c: &VortexConfig, h: f64, g: &GreenEvaluator) -> Result<VortexConfig> {
    if !(h >= 0.0) || !h.is_finite() {
        return Err(Error::InvalidRange(format!("step size must be >= 0, got {h}")));
    }
    if h == 0.0 {
        return Ok(c.clone());
    }
    let v0 = velocity_field(c, g).map_err(|e| stage_err(e, HeunStage::Predictor))?;
    let predicted = c.with_positions(advance(c, &v0, h));
    let v1 = velocity_field(&predicted, g).map_err(|e| stage_err(e, HeunStage::Corrector))?;
    let avg: Vec<[f64; 2]> = v0
        .iter()
        .zip(&v1)
        .map(|(a, b)| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])])
        .collect();
    Ok(c.with_positions(advance(c, &avg, h)))
}

/// A recorded trajectory: times, positions per record, conserved-quantity
/// diagnostics. Intensities are constants of motion and stored once.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub scheme: &'static str,
    pub h: f64,
    pub intensities: Vec<f64>,
    pub times: Vec<f64>,
    pub positions: Vec<Vec<[f64; 2]>>,
    pub hamiltonian: Vec<f64>,
    /// `|H(t) − H(0)| / max(1, |H(0)|)` per record.
    pub drift: Vec<f64>,
    pub min_separation: Vec<f64>,
}

impl TrajectoryRecord {
    pub fn records(&self) -> usize {
        self.times.len()
    }

    pub fn config_at(&self, record: usize) -> VortexConfig {
        VortexConfig::new(
            self.positions[record].clone(),
            self.intensities.clone(),
            crate::vortex::IntensityLaw::Fixed,
        )
        .expect("trajectory records are well-formed")
    }

    pub fn max_drift(&self) -> f64 {
        self.drift.iter().cloned().fold(0.0, f64::max)
    }
}

fn diagnostics_energy(c: &VortexConfig, g: &GreenEvaluator) -> Result<f64> {
    match g {
        GreenEvaluator::Ewald(e) => hamiltonian_split(c, e),
        GreenEvaluator::Spectral(_) => hamiltonian(c, g),
    }
}

/// Integrate `steps` Heun steps of size `h`, recording the configuration
/// and conservation diagnostics every `record_every` steps (step 0 and the
/// final step are always recorded). Near-collisions abort with the step
/// index at which they occurred.
pub fn evolve(
    c: &VortexConfig,
    h: f64,
    steps: u64,
    g: &GreenEvaluator,
    record_every: u64,
) -> Result<TrajectoryRecord> {
    if steps < 1 {
        return Err(Error::InvalidRange("steps must be >= 1".into()));
    }
    if record_every < 1 {
        return Err(Error::InvalidRange("record_every must be >= 1".into()));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidRange(format!("step size must be > 0, got {h}")));
    }
    let mut traj = TrajectoryRecord {
        scheme: "heun",
        h,
        intensities: c.intensities().to_vec(),
        times: Vec::new(),
        positions: Vec::new(),
        hamiltonian: Vec::new(),
        drift: Vec::new(),
        min_separation: Vec::new(),
    };
    let mut record = |state: &VortexConfig, step: u64, h0: &mut Option<f64>| -> Result<()> {
        let energy = diagnostics_energy(state, g)?;
        let base = *h0.get_or_insert(energy);
        traj.times.push(step as f64 * h);
        traj.positions.push(state.positions().to_vec());
        traj.hamiltonian.push(energy);
        traj.drift.push((energy - base).abs() / base.abs().max(1.0));
        traj.min_separation
            .push(state.min_separation().map_or(f64::INFINITY, |m| m.0));
        Ok(())
    };
    let mut h0 = None;
    record(c, 0, &mut h0)?;
    let mut state = c.clone();
    for step in 1..=steps {
        state = heun_step(&state, h, g).map_err(|e| e.with_step(step))?;
        if step % record_every == 0 || step == steps {
            record(&state, step, &mut h0)?;
        }
    }
    Ok(traj)
}

/// A smooth scalar test function on the torus with its gradient.
pub trait TestFunction: Sync {
    fn value(&self, x: [f64; 2]) -> f64;
    fn grad(&self, x: [f64; 2]) -> [f64; 2];
}

/// `φ(x) = cos(2π x₁)`.
pub struct CosX1;

impl TestFunction for CosX1 {
    fn value(&self, x: [f64; 2]) -> f64 {
        (2.0 * std::f64::consts::PI * x[0]).cos()
    }
    fn grad(&self, x: [f64; 2]) -> [f64; 2] {
        [
            -2.0 * std::f64::consts::PI * (2.0 * std::f64::consts::PI * x[0]).sin(),
            0.0,
        ]
    }
}

/// A constant test function (zero gradient).
pub struct ConstantFn(pub f64);

impl TestFunction for ConstantFn {
    fn value(&self, _x: [f64; 2]) -> f64 {
        self.0
    }
    fn grad(&self, _x: [f64; 2]) -> [f64; 2] {
        [0.0, 0.0]
    }
}

/// Pairing `⟨ω, φ⟩ = (1/√N) Σ ξ_i φ(x_i)` of the empirical vorticity with
/// a test function.
pub fn vorticity_pairing(c: &VortexConfig, phi: &dyn TestFunction) -> f64 {
    let mut acc = Accumulator::new();
    for (p, xi) in c.positions().iter().zip(c.intensities()) {
        acc.add(xi * phi.value(*p));
    }
    acc.value() / (c.n() as f64).sqrt()
}

/// The symmetrized transport form
/// `⟨ω⊗ω, H_φ⟩ = (1/N) Σ_{i<j} ξ_i ξ_j K(x_i−x_j)·(∇φ(x_i) − ∇φ(x_j))`.
pub fn transport_form(c: &VortexConfig, phi: &dyn TestFunction, g: &GreenEvaluator) -> Result<f64> {
    let n = c.n();
    let xs = c.positions();
    let xi = c.intensities();
    let grads: Vec<[f64; 2]> = xs.iter().map(|&x| phi.grad(x)).collect();
    let mut acc = Accumulator::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let k = g.biot_savart(torus::delta(xs[i], xs[j]))?;
            let dg = [grads[i][0] - grads[j][0], grads[i][1] - grads[j][1]];
            acc.add(xi[i] * xi[j] * (k[0] * dg[0] + k[1] * dg[1]));
        }
    }
    Ok(acc.value() / n as f64)
}

/// Residual of the weak vorticity formulation along a recorded trajectory:
/// for each recorded time `t`,
/// `⟨ω_t, φ⟩ − ⟨ω_0, φ⟩ − ∫₀ᵗ ⟨ω_s ⊗ ω_s, H_φ⟩ ds`,
/// the time integral taken by the trapezoid rule over recorded samples.
/// Requires a recording interval of at most 10⁻² model time.
pub fn weak_form_residual(
    traj: &TrajectoryRecord,
    phi: &dyn TestFunction,
    g: &GreenEvaluator,
) -> Result<Vec<f64>> {
    if traj.times.len() < 2 {
        return Err(Error::InvalidRange(
            "need at least two recorded times".into(),
        ));
    }
    for w in traj.times.windows(2) {
        let dt = w[1] - w[0];
        if !(dt > 0.0) {
            return Err(Error::InvalidRange("recorded times must increase".into()));
        }
        if dt > 1e-2 + 1e-12 {
            return Err(Error::InvalidRange(format!(
                "recording interval {dt} too coarse for quadrature (need <= 1e-2)"
            )));
        }
    }
    let states: Vec<VortexConfig> = (0..traj.records()).map(|r| traj.config_at(r)).collect();
    let pairings: Vec<f64> = states.iter().map(|c| vorticity_pairing(c, phi)).collect();
    let forms = crate::exec::slice_map(&states, |c| transport_form(c, phi, g));
    let mut residuals = Vec::with_capacity(traj.records());
    let mut integral = 0.0;
    for r in 0..traj.records() {
        if r > 0 {
            let q0: f64 = *forms[r - 1].as_ref().map_err(|e| clone_err(e))?;
            let q1: f64 = *forms[r].as_ref().map_err(|e| clone_err(e))?;
            integral += 0.5 * (traj.times[r] - traj.times[r - 1]) * (q0 + q1);
        }
        residuals.push(pairings[r] - pairings[0] - integral);
    }
    Ok(residuals)
}

fn clone_err(e: &Error) -> Error {
    Error::InvalidInput(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vortex::{sample_lambda, IntensityLaw};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn single_vortex_does_not_move() {
        let c = crate::vortex::VortexConfig::new(
            vec![[0.3, 0.7]],
            vec![2.5],
            IntensityLaw::Fixed,
        )
        .unwrap();
        let g = GreenEvaluator::ewald();
        let v = velocity_field(&c, &g).unwrap();
        assert_eq!(v, vec![[0.0, 0.0]]);
        let stepped = heun_step(&c, 0.1, &g).unwrap();
        assert_eq!(stepped.positions(), c.positions());
    }

    #[test]
    fn weighted_velocity_sum_cancels() {
        // Σ_i ξ_i v_i = 0 by antisymmetry of the kernel
        let mut r = rng(41);
        let c = sample_lambda(14, IntensityLaw::StandardGaussian, &mut r).unwrap();
        let g = GreenEvaluator::ewald();
        let v = velocity_field(&c, &g).unwrap();
        let mut sum = [0.0, 0.0];
        for (vi, xi) in v.iter().zip(c.intensities()) {
            sum[0] += xi * vi[0];
            sum[1] += xi * vi[1];
        }
        assert!(sum[0].abs() < 1e-12 && sum[1].abs() < 1e-12, "{sum:?}");
    }

    #[test]
    fn split_velocities_match_slow_spectral_oracle() {
        let mut r = rng(43);
        let c = sample_lambda(10, IntensityLaw::StandardGaussian, &mut r).unwrap();
        let fast = velocity_field(&c, &GreenEvaluator::ewald()).unwrap();
        let oracle = GreenEvaluator::spectral(1024).unwrap();
        let slow = velocity_field(&c, &oracle).unwrap();
        let tol = oracle.biot_savart_tolerance() * (c.n() as f64).sqrt();
        for (a, b) in fast.iter().zip(&slow) {
            let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
            assert!(d < tol, "velocity mismatch {d:e} (tol {tol:e})");
        }
    }

    #[test]
    fn serial_and_parallel_velocities_are_bit_identical() {
        let mut r = rng(47);
        let c = sample_lambda(60, IntensityLaw::StandardGaussian, &mut r).unwrap();
        let g = GreenEvaluator::ewald();
        let a = velocity_field(&c, &g).unwrap();
        let b = velocity_field_serial(&c, &g).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_step_is_identity() {
        let mut r = rng(53);
        let c = sample_lambda(8, IntensityLaw::StandardGaussian, &mut r).unwrap();
        let g = GreenEvaluator::ewald();
        let s = heun_step(&c, 0.0, &g).unwrap();
        assert_eq!(s.positions(), c.positions());
        assert_eq!(s.intensities(), c.intensities());
    }

    #[test]
    fn near_collision_reports_pair_and_stage() {
        let c = crate::vortex::VortexConfig::new(
            vec![[0.5, 0.5], [0.5 + 1e-8, 0.5]],
            vec![1.0, 1.0],
            IntensityLaw::Fixed,
        )
        .unwrap();
        let g = GreenEvaluator::ewald();
        match velocity_field(&c, &g) {
            Err(Error::NearCollision { i, j, .. }) => {
                assert_eq!((i, j), (0, 1));
            }
            other => panic!("expected near-collision, got {other:?}"),
        }
        match evolve(&c, 1e-4, 5, &g, 1) {
            Err(Error::NearCollision { step, .. }) => assert_eq!(step, 1),
            other => panic!("expected near-collision, got {other:?}"),
        }
    }

    #[test]
    fn one_step_versus_two_half_steps_is_third_order() {
        let mut r = rng(59);
        let c = sample_lambda(10, IntensityLaw::StandardGaussian, &mut r).unwrap();
        let g = GreenEvaluator::ewald();
        let gap = |h: f64| -> f64 {
            let one = heun_step(&c, h, &g).unwrap();
            let half = heun_step(&heun_step(&c, h / 2.0, &g).unwrap(), h / 2.0, &g).unwrap();
            one.positions()
                .iter()
                .zip(half.positions())
                .map(|(a, b)| crate::torus::dist(*a, *b))
                .fold(0.0, f64::max)
        };
        let d1 = gap(1e-3);
        let d2 = gap(5e-4);
        let ratio = d1 / d2;
        assert!(
            (6.5..9.5).contains(&ratio),
            "expected ~8 for a third-order per-step gap, got {ratio} ({d1:e}/{d2:e})"
        );
    }

    #[test]
    fn evolve_records_and_conserves() {
        let mut r = rng(61);
        let c = sample_lambda(12, IntensityLaw::StandardGaussian, &mut r).unwrap();
        let g = GreenEvaluator::ewald();
        let traj = evolve(&c, 1e-3, 200, &g, 50).unwrap();
        assert_eq!(traj.times.first(), Some(&0.0));
        assert!((traj.times.last().unwrap() - 0.2).abs() < 1e-12);
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(traj.intensities, c.intensities());
        assert!(traj.max_drift() < 1e-3, "drift {}", traj.max_drift());
        // one step equals one heun_step
        let one = evolve(&c, 1e-3, 1, &g, 1).unwrap();
        let manual = heun_step(&c, 1e-3, &g).unwrap();
        assert_eq!(one.positions[1], manual.positions());
    }

    #[test]
    fn weighted_center_is_conserved() {
        // Σ ξ_i x_i (unwrapped) is a constant of motion
        let mut r = rng(67);
        let c = sample_lambda(10, IntensityLaw::StandardGaussian, &mut r).unwrap();
        let g = GreenEvaluator::ewald();
        let mut state = c.clone();
        let mut unwrapped: Vec<[f64; 2]> = c.positions().to_vec();
        let h = 5e-4;
        for _ in 0..200 {
            let next = heun_step(&state, h, &g).unwrap();
            for (u, (a, b)) in unwrapped
                .iter_mut()
                .zip(next.positions().iter().zip(state.positions()))
            {
                let d = crate::torus::delta(*a, *b);
                u[0] += d[0];
                u[1] += d[1];
            }
            state = next;
        }
        let center = |pos: &[[f64; 2]]| -> [f64; 2] {
            let mut s = [0.0, 0.0];
            for (p, xi) in pos.iter().zip(c.intensities()) {
                s[0] += xi * p[0];
                s[1] += xi * p[1];
            }
            s
        };
        let c0 = center(c.positions());
        let c1 = center(&unwrapped);
        assert!((c0[0] - c1[0]).abs() < 1e-10 && (c0[1] - c1[1]).abs() < 1e-10);
    }

    #[test]
    fn time_reversal_returns_to_start_at_second_order() {
        let mut r = rng(71);
        let c = sample_lambda(8, IntensityLaw::StandardGaussian, &mut r).unwrap();
        let g = GreenEvaluator::ewald();
        let run = |h: f64, steps: u64| -> f64 {
            let fwd = evolve(&c, h, steps, &g, steps).unwrap();
            // negating all intensities reverses every velocity
            let turned = crate::vortex::VortexConfig::new(
                fwd.positions.last().unwrap().clone(),
                c.intensities().iter().map(|v| -v).collect(),
                IntensityLaw::Fixed,
            )
            .unwrap();
            let back = evolve(&turned, h, steps, &g, steps).unwrap();
            back.positions
                .last()
                .unwrap()
                .iter()
                .zip(c.positions())
                .map(|(a, b)| crate::torus::dist(*a, *b))
                .fold(0.0, f64::max)
        };
        let e1 = run(2e-3, 50);
        let e2 = run(1e-3, 100);
        assert!(e1 < 1e-4, "round trip error {e1:e}");
        assert!(e2 < e1 / 1.5, "round trip error must shrink: {e1:e} -> {e2:e}");
    }

    #[test]
    fn weak_form_residual_trivial_cases() {
        let mut r = rng(73);
        let c = sample_lambda(8, IntensityLaw::StandardGaussian, &mut r).unwrap();
        let g = GreenEvaluator::ewald();
        let traj = evolve(&c, 1e-3, 50, &g, 5).unwrap();
        // residual at t = 0 is exactly zero
        let res = weak_form_residual(&traj, &CosX1, &g).unwrap();
        assert_eq!(res[0], 0.0);
        // a constant test function kills both terms identically
        let res_const = weak_form_residual(&traj, &ConstantFn(3.25), &g).unwrap();
        for v in res_const {
            assert!(v.abs() < 1e-14);
        }
        // too-coarse recording is rejected
        let coarse = evolve(&c, 1e-3, 100, &g, 50).unwrap();
        assert!(weak_form_residual(&coarse, &CosX1, &g).is_err());
    }

    #[test]
    fn weak_form_residual_shrinks_under_refinement() {
        let mut r = rng(79);
        let c = sample_lambda(10, IntensityLaw::StandardGaussian, &mut r).unwrap();
        let g = GreenEvaluator::ewald();
        let residual = |h: f64, every: u64, steps: u64| -> f64 {
            let traj = evolve(&c, h, steps, &g, every).unwrap();
            weak_form_residual(&traj, &CosX1, &g)
                .unwrap()
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()))
        };
        let r1 = residual(2e-3, 5, 100); // t = 0.2, dt = 0.01
        let r2 = residual(1e-3, 5, 200); // halve h and the record interval
        assert!(
            r2 < r1 / 3.0,
            "refinement must shrink the residual >= 3x: {r1:e} -> {r2:e}"
        );
    }
}
