//! Scripted, seeded ensemble experiments with CSV + manifest outputs.
//!
//! Every experiment derives one independent RNG stream per ensemble member
//! from the master seed (`stream = member index`), so results are
//! reproducible bit-for-bit for any thread count. A manifest is written
//! before the run starts and completed (or marked failed) afterwards.

use crate::dynamics::evolve;
use crate::io;
use crate::spectral::{EwaldGreen, GreenEvaluator, IndexSet};
use crate::spectrum::{
    energy_spectrum, energy_spectrum_log_bins, fit_slope, histogram, ks_distance, uniform_edges,
    ShellSpectrum, SlopeFit,
};
use crate::vortex::{
    condition_energy, empirical_vorticity, hamiltonian_split, interaction_energy, make_clustered,
    sample_lambda, ClusterSpec, EnergyWindow, IntensityLaw, IntensityScale, VortexConfig,
};
use crate::white_noise::{renormalized_energy, sample_truncated_wn_with};
use crate::{Error, Result};
use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

/// Independent, reproducible RNG stream for ensemble member `stream` of a
/// run with the given master seed.
pub fn member_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Execution profile: desk-scale (CI-friendly) or the full-size run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Desk,
    Full,
}

impl Profile {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Profile::Desk),
            "full" => Ok(Profile::Full),
            other => Err(Error::Parse(format!("unknown profile `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Profile::Desk => "desk",
            Profile::Full => "full",
        }
    }
}

/// Run manifest: written with `status=started` before the work, rewritten
/// with artifacts, wall clock, and final status afterwards.
pub struct RunManifest {
    id: String,
    seed: u64,
    params: Vec<(String, String)>,
    path: PathBuf,
    started: Instant,
}

impl RunManifest {
    pub fn begin(
        out_dir: &Path,
        id: &str,
        seed: u64,
        params: Vec<(String, String)>,
    ) -> Result<Self> {
        let m = RunManifest {
            id: id.to_string(),
            seed,
            params,
            path: out_dir.join("manifest.txt"),
            started: Instant::now(),
        };
        m.write("started", &[], None)?;
        Ok(m)
    }

    fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.id.as_bytes());
        hasher.update(self.seed.to_le_bytes());
        for (k, v) in &self.params {
            hasher.update(k.as_bytes());
            hasher.update(b"=");
            hasher.update(v.as_bytes());
            hasher.update(b"\n");
        }
        let digest = hasher.finalize();
        let mut hex = String::with_capacity(64);
        for byte in digest {
            let _ = write!(hex, "{byte:02x}");
        }
        hex
    }

    fn write(&self, status: &str, artifacts: &[String], wall: Option<f64>) -> Result<()> {
        let mut pairs = vec![
            ("experiment".to_string(), self.id.clone()),
            ("seed".to_string(), self.seed.to_string()),
            ("input_hash".to_string(), self.content_hash()),
        ];
        pairs.extend(self.params.iter().cloned());
        pairs.push(("status".to_string(), status.to_string()));
        if let Some(w) = wall {
            pairs.push(("wall_clock_secs".to_string(), format!("{w:.3}")));
        }
        for a in artifacts {
            pairs.push(("artifact".to_string(), a.clone()));
        }
        io::write_text(&self.path, &io::manifest_to_string(&pairs))
    }

    pub fn finish(self, artifacts: &[String]) -> Result<()> {
        let wall = self.started.elapsed().as_secs_f64();
        self.write("ok", artifacts, Some(wall))
    }

    pub fn fail(self, err: &Error) -> Result<()> {
        let wall = self.started.elapsed().as_secs_f64();
        self.write(&format!("failed: {err}"), &[], Some(wall))
    }
}

/// Interaction energy in the figure-reproduction convention: scaled
/// intensities, each unordered pair counted once, decimal logarithm —
/// i.e. the natural-log ordered-pair energy divided by `2·ln 10`.
pub fn figure_energy(c: &VortexConfig) -> Result<f64> {
    Ok(interaction_energy(c, IntensityScale::InvSqrtN)? / (2.0 * std::f64::consts::LN_10))
}

// ---------------------------------------------------------------------------
// free ensemble (interaction-energy histogram + top-sample spectrum)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct FreeEnsembleParams {
    pub samples: usize,
    pub n: usize,
    pub n_cut: u32,
    pub top: usize,
    pub hist_bins: usize,
    /// slope-fit window in log10(k)
    pub window: (f64, f64),
    pub seed: u64,
}

impl FreeEnsembleParams {
    pub fn with_profile(profile: Profile, seed: u64) -> Self {
        FreeEnsembleParams {
            samples: match profile {
                Profile::Desk => 2_000,
                Profile::Full => 10_000,
            },
            n: 200,
            n_cut: 64,
            top: 11,
            hist_bins: 60,
            window: (1.0, 3.0),
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FreeEnsembleReport {
    /// interaction energies (natural-log convention), sample order
    pub energies: Vec<f64>,
    /// same in the figure convention
    pub energies_fig: Vec<f64>,
    /// `top`-th largest figure-convention energy
    pub top_threshold_fig: f64,
    pub top_threshold: f64,
    pub slope_top: SlopeFit,
    pub mean_fig: f64,
    pub sd_fig: f64,
}

pub fn free_ensemble(params: &FreeEnsembleParams, out_dir: &Path) -> Result<FreeEnsembleReport> {
    let manifest = RunManifest::begin(
        out_dir,
        "free-ensemble",
        params.seed,
        vec![
            ("samples".into(), params.samples.to_string()),
            ("n".into(), params.n.to_string()),
            ("n_cut".into(), params.n_cut.to_string()),
            ("top".into(), params.top.to_string()),
            ("hist_bins".into(), params.hist_bins.to_string()),
            ("window".into(), format!("{},{}", params.window.0, params.window.1)),
        ],
    )?;
    match free_ensemble_inner(params, out_dir) {
        Ok((report, artifacts)) => {
            manifest.finish(&artifacts)?;
            Ok(report)
        }
        Err(e) => {
            manifest.fail(&e)?;
            Err(e)
        }
    }
}

fn free_ensemble_inner(
    params: &FreeEnsembleParams,
    out_dir: &Path,
) -> Result<(FreeEnsembleReport, Vec<String>)> {
    let member = |i: usize| -> Result<f64> {
        let mut rng = member_rng(params.seed, i as u64);
        let c = sample_lambda(params.n, IntensityLaw::RademacherBalanced, &mut rng)?;
        interaction_energy(&c, IntensityScale::InvSqrtN)
    };
    let energies: Vec<f64> = crate::exec::indexed_map(params.samples, member)
        .into_iter()
        .collect::<Result<_>>()?;
    let energies_fig: Vec<f64> = energies
        .iter()
        .map(|v| v / (2.0 * std::f64::consts::LN_10))
        .collect();

    // top-k member indices by energy
    let mut order: Vec<usize> = (0..params.samples).collect();
    order.sort_by(|&a, &b| energies[b].total_cmp(&energies[a]));
    let top = params.top.min(params.samples);
    let top_threshold = energies[order[top - 1]];
    let top_threshold_fig = energies_fig[order[top - 1]];

    // spectra of the top members (regenerated from their streams)
    let top_specs: Vec<ShellSpectrum> = crate::exec::slice_map(&order[..top], |&i| {
        let mut rng = member_rng(params.seed, i as u64);
        let c = sample_lambda(params.n, IntensityLaw::RademacherBalanced, &mut rng)
            .expect("member resample");
        let f = empirical_vorticity(&c, params.n_cut).expect("vorticity transform");
        energy_spectrum(&f, params.n_cut).expect("spectrum")
    });
    let avg = ShellSpectrum::average(&top_specs)?;
    let slope_top = fit_slope(&avg, params.window)?;

    let n = params.samples as f64;
    let mean_fig = energies_fig.iter().sum::<f64>() / n;
    let sd_fig =
        (energies_fig.iter().map(|v| (v - mean_fig).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();

    // artifacts
    let mut energy_csv = String::from("sample,energy,energy_fig\n");
    for i in 0..params.samples {
        let _ = writeln!(energy_csv, "{},{},{}", i, energies[i], energies_fig[i]);
    }
    let lo = energies_fig.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = energies_fig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let pad = ((hi - lo) * 1e-9).max(1e-12) + f64::EPSILON * hi.abs();
    let edges = uniform_edges(lo, hi + pad, params.hist_bins)?;
    let hist = histogram(&energies_fig, &edges)?;
    let artifacts = vec![
        "energies.csv".to_string(),
        "histogram.csv".to_string(),
        "spectrum_top.csv".to_string(),
        "slope_top.txt".to_string(),
    ];
    io::write_text(&out_dir.join("energies.csv"), &energy_csv)?;
    io::write_text(&out_dir.join("histogram.csv"), &io::histogram_to_csv(&hist))?;
    io::write_text(&out_dir.join("spectrum_top.csv"), &io::spectrum_to_csv(&avg))?;
    io::write_text(&out_dir.join("slope_top.txt"), &io::slope_report(&slope_top))?;

    Ok((
        FreeEnsembleReport {
            energies,
            energies_fig,
            top_threshold_fig,
            top_threshold,
            slope_top,
            mean_fig,
            sd_fig,
        },
        artifacts,
    ))
}

// ---------------------------------------------------------------------------
// clustered evolution (spectra before/after running the dynamics)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ClusteredEvolutionParams {
    pub n_samples: usize,
    /// how many `{2,4,8}` cluster triples to plant
    pub sets: usize,
    pub n_total: usize,
    pub diameter: f64,
    pub steps: u64,
    pub h: f64,
    pub record_every: u64,
    pub n_cut: u32,
    pub k_lo: f64,
    pub k_hi: f64,
    pub bins_per_decade: usize,
    /// slope-fit window in log10(k)
    pub window: (f64, f64),
    pub seed: u64,
}

impl ClusteredEvolutionParams {
    pub fn with_profile(profile: Profile, seed: u64) -> Self {
        let (steps, h, record_every) = match profile {
            Profile::Desk => (30_000, 2e-4, 500),
            Profile::Full => (120_000, 1e-4, 2_000),
        };
        ClusteredEvolutionParams {
            n_samples: 10,
            sets: 6,
            n_total: 200,
            diameter: 0.01,
            steps,
            h,
            record_every,
            n_cut: 1024,
            k_lo: 10.0,
            k_hi: 1000.0,
            bins_per_decade: 12,
            window: (1.0, 3.0),
            seed,
        }
    }

    pub fn cluster_spec(&self) -> Result<ClusterSpec> {
        let mut sizes = Vec::new();
        for _ in 0..self.sets {
            sizes.extend_from_slice(&[2, 4, 8]);
        }
        let clustered: usize = sizes.iter().sum();
        if clustered > self.n_total {
            return Err(Error::InvalidComposition(format!(
                "{} clustered vortices exceed the total {}",
                clustered, self.n_total
            )));
        }
        Ok(ClusterSpec {
            cluster_sizes: sizes,
            n_free: self.n_total - clustered,
            diameter: self.diameter,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ClusteredEvolutionReport {
    pub slope_initial: SlopeFit,
    pub slope_final: SlopeFit,
    pub slope_free: SlopeFit,
    pub excluded: usize,
    pub max_drift: Vec<f64>,
    pub mean_energy_fig: f64,
}

enum MemberRun {
    Done {
        initial: ShellSpectrum,
        final_: ShellSpectrum,
        times: Vec<f64>,
        energies: Vec<f64>,
        drifts: Vec<f64>,
        min_seps: Vec<f64>,
        energy_fig: f64,
    },
    Excluded {
        step: u64,
    },
}

pub fn clustered_evolution(
    params: &ClusteredEvolutionParams,
    out_dir: &Path,
) -> Result<ClusteredEvolutionReport> {
    let manifest = RunManifest::begin(
        out_dir,
        "clustered-evolution",
        params.seed,
        vec![
            ("n_samples".into(), params.n_samples.to_string()),
            ("sets".into(), params.sets.to_string()),
            ("n_total".into(), params.n_total.to_string()),
            ("diameter".into(), params.diameter.to_string()),
            ("steps".into(), params.steps.to_string()),
            ("h".into(), params.h.to_string()),
            ("record_every".into(), params.record_every.to_string()),
            ("n_cut".into(), params.n_cut.to_string()),
            ("bins_per_decade".into(), params.bins_per_decade.to_string()),
            ("window".into(), format!("{},{}", params.window.0, params.window.1)),
        ],
    )?;
    match clustered_evolution_inner(params, out_dir) {
        Ok((report, artifacts)) => {
            manifest.finish(&artifacts)?;
            Ok(report)
        }
        Err(e) => {
            manifest.fail(&e)?;
            Err(e)
        }
    }
}

fn clustered_evolution_inner(
    params: &ClusteredEvolutionParams,
    out_dir: &Path,
) -> Result<(ClusteredEvolutionReport, Vec<String>)> {
    let spec = params.cluster_spec()?;
    let green = GreenEvaluator::ewald();
    let spectrum_of = |c: &VortexConfig| -> Result<ShellSpectrum> {
        let f = empirical_vorticity(c, params.n_cut)?;
        energy_spectrum_log_bins(&f, params.k_lo, params.k_hi, params.bins_per_decade)
    };

    let run_member = |i: usize| -> Result<MemberRun> {
        let mut rng = member_rng(params.seed, i as u64);
        let c0 = make_clustered(&spec, &mut rng)?;
        let initial = spectrum_of(&c0)?;
        let energy_fig = figure_energy(&c0)?;
        match evolve(&c0, params.h, params.steps, &green, params.record_every) {
            Ok(traj) => {
                let final_cfg = traj.config_at(traj.records() - 1);
                let final_ = spectrum_of(&final_cfg)?;
                Ok(MemberRun::Done {
                    initial,
                    final_,
                    times: traj.times.clone(),
                    energies: traj.hamiltonian.clone(),
                    drifts: traj.drift.clone(),
                    min_seps: traj.min_separation.clone(),
                    energy_fig,
                })
            }
            Err(Error::NearCollision { step, .. }) => Ok(MemberRun::Excluded { step }),
            Err(other) => Err(other),
        }
    };
    let outcomes: Vec<MemberRun> = crate::exec::indexed_map(params.n_samples, run_member)
        .into_iter()
        .collect::<Result<_>>()?;

    let mut initial_specs = Vec::new();
    let mut final_specs = Vec::new();
    let mut excluded = 0usize;
    let mut max_drift = Vec::new();
    let mut energy_series = String::from("member,t,hamiltonian,drift,min_separation\n");
    let mut figure_energies = Vec::new();
    for (i, outcome) in outcomes.iter().enumerate() {
        match outcome {
            MemberRun::Done {
                initial,
                final_,
                times,
                energies,
                drifts,
                min_seps,
                energy_fig,
            } => {
                initial_specs.push(initial.clone());
                final_specs.push(final_.clone());
                figure_energies.push(*energy_fig);
                max_drift.push(drifts.iter().cloned().fold(0.0, f64::max));
                for r in 0..times.len() {
                    let _ = writeln!(
                        energy_series,
                        "{},{},{},{},{}",
                        i, times[r], energies[r], drifts[r], min_seps[r]
                    );
                }
            }
            MemberRun::Excluded { step } => {
                excluded += 1;
                let _ = writeln!(energy_series, "# member {i} excluded: near-collision at step {step}");
            }
        }
    }
    if initial_specs.is_empty() {
        return Err(Error::InvalidInput(
            "every clustered member collided; nothing to average".into(),
        ));
    }

    let avg_initial = ShellSpectrum::average(&initial_specs)?;
    let avg_final = ShellSpectrum::average(&final_specs)?;
    let slope_initial = fit_slope(&avg_initial, params.window)?;
    let slope_final = fit_slope(&avg_final, params.window)?;

    // free-ensemble reference spectrum under identical binning
    let free_specs: Vec<ShellSpectrum> =
        crate::exec::indexed_map(params.n_samples, |i| -> Result<ShellSpectrum> {
            let mut rng = member_rng(params.seed, 1_000_000 + i as u64);
            let c = sample_lambda(params.n_total, IntensityLaw::RademacherBalanced, &mut rng)?;
            spectrum_of(&c)
        })
        .into_iter()
        .collect::<Result<_>>()?;
    let avg_free = ShellSpectrum::average(&free_specs)?;
    let slope_free = fit_slope(&avg_free, params.window)?;

    let mean_energy_fig =
        figure_energies.iter().sum::<f64>() / figure_energies.len().max(1) as f64;

    let mut slopes = String::new();
    let _ = writeln!(slopes, "slope_initial={}", slope_initial.slope);
    let _ = writeln!(slopes, "slope_final={}", slope_final.slope);
    let _ = writeln!(slopes, "slope_free={}", slope_free.slope);
    let _ = writeln!(slopes, "excluded={excluded}");
    let _ = writeln!(slopes, "mean_energy_fig={mean_energy_fig}");

    let artifacts = vec![
        "spectrum_initial.csv".to_string(),
        "spectrum_final.csv".to_string(),
        "spectrum_free.csv".to_string(),
        "slopes.txt".to_string(),
        "energy_series.csv".to_string(),
    ];
    io::write_text(&out_dir.join("spectrum_initial.csv"), &io::spectrum_to_csv(&avg_initial))?;
    io::write_text(&out_dir.join("spectrum_final.csv"), &io::spectrum_to_csv(&avg_final))?;
    io::write_text(&out_dir.join("spectrum_free.csv"), &io::spectrum_to_csv(&avg_free))?;
    io::write_text(&out_dir.join("slopes.txt"), &slopes)?;
    io::write_text(&out_dir.join("energy_series.csv"), &energy_series)?;

    Ok((
        ClusteredEvolutionReport {
            slope_initial,
            slope_final,
            slope_free,
            excluded,
            max_drift,
            mean_energy_fig,
        },
        artifacts,
    ))
}

// ---------------------------------------------------------------------------
// Hamiltonian-law convergence toward the renormalized energy
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ConvergenceParams {
    pub n_list: Vec<usize>,
    pub samples_ks: usize,
    pub samples_mass: usize,
    pub ref_samples: usize,
    pub n_cut_ref: u32,
    pub window: EnergyWindow,
    pub seed: u64,
}

impl ConvergenceParams {
    pub fn with_profile(profile: Profile, seed: u64) -> Self {
        let scale = match profile {
            Profile::Desk => 1,
            Profile::Full => 1,
        };
        ConvergenceParams {
            n_list: vec![25, 100, 400],
            samples_ks: 10_000 * scale,
            samples_mass: 60_000,
            ref_samples: 200_000,
            n_cut_ref: 64,
            window: EnergyWindow::new(0.0, 0.5).expect("static window"),
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConvergenceRow {
    pub n: usize,
    pub ks: f64,
    pub z_n: f64,
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub z_ref: f64,
}

pub fn hamiltonian_convergence(
    params: &ConvergenceParams,
    out_dir: &Path,
) -> Result<ConvergenceReport> {
    let manifest = RunManifest::begin(
        out_dir,
        "hamiltonian-convergence",
        params.seed,
        vec![
            (
                "n_list".into(),
                params
                    .n_list
                    .iter()
                    .map(|n| n.to_string())
                    .collect::<Vec<_>>()
                    .join(" "),
            ),
            ("samples_ks".into(), params.samples_ks.to_string()),
            ("samples_mass".into(), params.samples_mass.to_string()),
            ("ref_samples".into(), params.ref_samples.to_string()),
            ("n_cut_ref".into(), params.n_cut_ref.to_string()),
            (
                "window".into(),
                format!("{},{}", params.window.a(), params.window.b()),
            ),
        ],
    )?;
    match convergence_inner(params, out_dir) {
        Ok((report, artifacts)) => {
            manifest.finish(&artifacts)?;
            Ok(report)
        }
        Err(e) => {
            manifest.fail(&e)?;
            Err(e)
        }
    }
}

fn convergence_inner(
    params: &ConvergenceParams,
    out_dir: &Path,
) -> Result<(ConvergenceReport, Vec<String>)> {
    let modes = Arc::new(IndexSet::new(params.n_cut_ref)?);
    let reference: Vec<f64> = crate::exec::indexed_map(params.ref_samples, |i| {
        let mut rng = member_rng(params.seed, (1u64 << 40) + i as u64);
        renormalized_energy(&sample_truncated_wn_with(&modes, &mut rng))
    });
    let z_ref = mass_in(&reference, params.window);

    let ewald = EwaldGreen::new();
    let samples = params.samples_ks.max(params.samples_mass);
    let mut rows = Vec::new();
    let mut csv = String::from("n,ks,z_n,z_ref,gap\n");
    for (ni, &n) in params.n_list.iter().enumerate() {
        let values: Vec<f64> = crate::exec::indexed_map(samples, |i| -> Result<f64> {
            let mut rng = member_rng(params.seed, ((ni as u64 + 1) << 32) + i as u64);
            let c = sample_lambda(n, IntensityLaw::StandardGaussian, &mut rng)?;
            hamiltonian_split(&c, &ewald)
        })
        .into_iter()
        .collect::<Result<_>>()?;
        let ks = ks_distance(&values[..params.samples_ks.min(values.len())], &reference)?;
        let z_n = mass_in(&values[..params.samples_mass.min(values.len())], params.window);
        let gap = (z_n - z_ref).abs();
        rows.push(ConvergenceRow { n, ks, z_n, gap });
        let _ = writeln!(csv, "{},{},{},{},{}", n, ks, z_n, z_ref, gap);
    }
    let artifacts = vec!["convergence.csv".to_string()];
    io::write_text(&out_dir.join("convergence.csv"), &csv)?;
    Ok((ConvergenceReport { rows, z_ref }, artifacts))
}

fn mass_in(values: &[f64], window: EnergyWindow) -> f64 {
    values.iter().filter(|&&v| window.contains(v)).count() as f64 / values.len() as f64
}

// ---------------------------------------------------------------------------
// empirical-measure triviality under conditioning
// ---------------------------------------------------------------------------

/// A bounded observable of one vortex `(ξ, x)`.
pub trait PhaseObservable: Sync {
    fn eval(&self, xi: f64, x: [f64; 2]) -> f64;
    /// Its integral against the Gaussian×uniform product measure.
    fn integral(&self) -> f64;
    /// Its variance under the same measure.
    fn variance(&self) -> f64;
}

/// `φ(ξ, x) = ξ·cos(2π x₁)`; mean 0, variance 1/2.
pub struct XiCosX1;

impl PhaseObservable for XiCosX1 {
    fn eval(&self, xi: f64, x: [f64; 2]) -> f64 {
        xi * (2.0 * std::f64::consts::PI * x[0]).cos()
    }
    fn integral(&self) -> f64 {
        0.0
    }
    fn variance(&self) -> f64 {
        0.5
    }
}

#[derive(Debug, Clone)]
pub struct TrivialityParams {
    pub n_list: Vec<usize>,
    pub window: EnergyWindow,
    pub samples: usize,
    pub max_attempts: u64,
    pub seed: u64,
}

impl TrivialityParams {
    pub fn with_profile(_profile: Profile, seed: u64) -> Self {
        TrivialityParams {
            n_list: vec![50, 200],
            window: EnergyWindow::new(0.0, 0.5).expect("static window"),
            samples: 1_000,
            max_attempts: 1_000_000,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TrivialityRow {
    pub n: usize,
    pub conditioned: f64,
    pub unconditioned: f64,
    pub iid_theory: f64,
    pub se_unconditioned: f64,
}

#[derive(Debug, Clone)]
pub struct TrivialityReport {
    pub rows: Vec<TrivialityRow>,
}

pub fn triviality<O: PhaseObservable>(
    params: &TrivialityParams,
    observable: &O,
    out_dir: &Path,
) -> Result<TrivialityReport> {
    let manifest = RunManifest::begin(
        out_dir,
        "triviality",
        params.seed,
        vec![
            (
                "n_list".into(),
                params
                    .n_list
                    .iter()
                    .map(|n| n.to_string())
                    .collect::<Vec<_>>()
                    .join(" "),
            ),
            ("samples".into(), params.samples.to_string()),
            (
                "window".into(),
                format!("{},{}", params.window.a(), params.window.b()),
            ),
        ],
    )?;
    match triviality_inner(params, observable, out_dir) {
        Ok((report, artifacts)) => {
            manifest.finish(&artifacts)?;
            Ok(report)
        }
        Err(e) => {
            manifest.fail(&e)?;
            Err(e)
        }
    }
}

fn triviality_inner<O: PhaseObservable>(
    params: &TrivialityParams,
    observable: &O,
    out_dir: &Path,
) -> Result<(TrivialityReport, Vec<String>)> {
    let ewald = EwaldGreen::new();
    let statistic = |c: &VortexConfig| -> f64 {
        let mut acc = 0.0;
        for (p, xi) in c.positions().iter().zip(c.intensities()) {
            acc += observable.eval(*xi, *p);
        }
        (acc / c.n() as f64 - observable.integral()).powi(2)
    };
    let mut rows = Vec::new();
    let mut csv = String::from("n,conditioned,unconditioned,iid_theory\n");
    for (ni, &n) in params.n_list.iter().enumerate() {
        let cond: Vec<f64> = crate::exec::indexed_map(params.samples, |i| -> Result<f64> {
            let mut rng = member_rng(params.seed, ((ni as u64 + 1) << 33) + i as u64);
            let (c, _) = condition_energy(
                |r: &mut ChaCha8Rng| sample_lambda(n, IntensityLaw::StandardGaussian, r),
                params.window,
                |c| hamiltonian_split(c, &ewald),
                &mut rng,
                params.max_attempts,
            )?;
            Ok(statistic(&c))
        })
        .into_iter()
        .collect::<Result<_>>()?;
        let uncond: Vec<f64> = crate::exec::indexed_map(params.samples, |i| -> Result<f64> {
            let mut rng = member_rng(params.seed, ((ni as u64 + 1) << 34) + i as u64);
            let c = sample_lambda(n, IntensityLaw::StandardGaussian, &mut rng)?;
            Ok(statistic(&c))
        })
        .into_iter()
        .collect::<Result<_>>()?;
        let m = params.samples as f64;
        let conditioned = cond.iter().sum::<f64>() / m;
        let unconditioned = uncond.iter().sum::<f64>() / m;
        let var_u = uncond
            .iter()
            .map(|v| (v - unconditioned).powi(2))
            .sum::<f64>()
            / (m - 1.0);
        let row = TrivialityRow {
            n,
            conditioned,
            unconditioned,
            iid_theory: observable.variance() / n as f64,
            se_unconditioned: (var_u / m).sqrt(),
        };
        rows.push(row);
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            n, row.conditioned, row.unconditioned, row.iid_theory
        );
    }
    let artifacts = vec!["triviality.csv".to_string()];
    io::write_text(&out_dir.join("triviality.csv"), &csv)?;
    Ok((TrivialityReport { rows }, artifacts))
}
