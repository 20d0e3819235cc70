use crate::config::{
    merge, parse_f64, parse_path, parse_string, parse_u64, parse_usize, parse_window, ConfigMap,
};
use clap::Args;
use std::path::PathBuf;
use vortexgas::experiments::{
    self, ClusteredEvolutionParams, ConvergenceParams, FreeEnsembleParams, Profile,
    TrivialityParams, XiCosX1,
};
use vortexgas::spectral::{EwaldGreen, GreenEvaluator, IndexSet};
use vortexgas::spectrum::{energy_spectrum, fit_slope, histogram, uniform_edges};
use vortexgas::vortex::{
    condition_energy, empirical_vorticity, hamiltonian, hamiltonian_split, interaction_energy,
    quadratic_form, sample_lambda, IntensityLaw, IntensityScale, KernelChoice,
};
use vortexgas::white_noise::{
    condition_wn, lattice_sums, quad_green_truncated, renormalized_energy, sample_truncated_wn,
    KernelTransform, MollifiedGreen,
};
use vortexgas::{io, torus, Error, Result};

fn out_dir(flag: Option<PathBuf>, cfg: Option<&ConfigMap>, sub: &str) -> Result<PathBuf> {
    if let Some(dir) = merge(flag, cfg, "out", parse_path)? {
        return Ok(dir);
    }
    match std::env::var_os("VORTEXGAS_OUT") {
        Some(root) => Ok(PathBuf::from(root).join(sub)),
        None => Err(Error::InvalidInput(
            "no --out given and VORTEXGAS_OUT is not set".into(),
        )),
    }
}

fn require<T>(v: Option<T>, what: &str) -> Result<T> {
    v.ok_or_else(|| Error::InvalidInput(format!("missing required {what}")))
}

// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct SampleArgs {
    /// What to draw: `vortex` or `wn` (truncated white noise).
    #[arg(long)]
    kind: Option<String>,
    /// Vortex count, or the mode cutoff for white noise.
    #[arg(long)]
    n: Option<usize>,
    /// Intensity law for vortices: `gaussian` or `rademacher`.
    #[arg(long)]
    law: Option<String>,
    /// Optional conditioning window `a,b` (use `-inf`/`inf` for open ends).
    #[arg(long)]
    window: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Energy convention for vortex conditioning: `green` or `log`.
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long)]
    max_attempts: Option<u64>,
}

pub fn sample(args: SampleArgs, cfg: Option<&ConfigMap>) -> Result<u8> {
    let kind = require(merge(args.kind, cfg, "kind", parse_string)?, "--kind")?;
    let n = require(merge(args.n, cfg, "n", parse_usize)?, "--n")?;
    let seed = merge(args.seed, cfg, "seed", parse_u64)?.unwrap_or(0);
    let law_name = merge(args.law, cfg, "law", parse_string)?.unwrap_or_else(|| "gaussian".into());
    let window = merge(args.window, cfg, "window", parse_string)?
        .map(|s| parse_window(&s))
        .transpose()?;
    let kernel_name =
        merge(args.kernel, cfg, "kernel", parse_string)?.unwrap_or_else(|| "green".into());
    let kernel = KernelChoice::parse(&kernel_name)?;
    let max_attempts = merge(args.max_attempts, cfg, "max_attempts", parse_u64)?.unwrap_or(1_000_000);
    let dir = out_dir(args.out, cfg, "sample")?;
    let mut rng = experiments::member_rng(seed, 0);

    let mut manifest = vec![
        ("command".to_string(), "sample".to_string()),
        ("kind".to_string(), kind.clone()),
        ("n".to_string(), n.to_string()),
        ("seed".to_string(), seed.to_string()),
    ];
    match kind.as_str() {
        "vortex" => {
            let law = match law_name.as_str() {
                "gaussian" => IntensityLaw::StandardGaussian,
                "rademacher" => IntensityLaw::RademacherBalanced,
                other => return Err(Error::Parse(format!("unknown law `{other}`"))),
            };
            manifest.push(("law".into(), law.name().into()));
            manifest.push(("kernel".into(), kernel.name().into()));
            let (config, attempts) = match window {
                None => (sample_lambda(n, law, &mut rng)?, 1),
                Some(w) => {
                    manifest.push(("window".into(), format!("{},{}", w.a(), w.b())));
                    let ewald = EwaldGreen::new();
                    let energy = move |c: &vortexgas::vortex::VortexConfig| match kernel {
                        KernelChoice::TorusGreen => hamiltonian_split(c, &ewald),
                        KernelChoice::MinImageLog => {
                            interaction_energy(c, IntensityScale::InvSqrtN)
                        }
                    };
                    condition_energy(
                        |r: &mut experiments::ChaCha8Rng| sample_lambda(n, law, r),
                        w,
                        energy,
                        &mut rng,
                        max_attempts,
                    )?
                }
            };
            manifest.push(("attempts".into(), attempts.to_string()));
            io::write_text(&dir.join("config.csv"), &io::config_to_csv(&config))?;
            io::write_text(&dir.join("manifest.txt"), &io::manifest_to_string(&manifest))?;
            println!(
                "wrote {} vortices to {} (attempts: {attempts}, acceptance ~ {:.4})",
                n,
                dir.join("config.csv").display(),
                1.0 / attempts as f64,
            );
        }
        "wn" => {
            let cutoff = n as u32;
            let (field, attempts) = match window {
                None => (sample_truncated_wn(cutoff, &mut rng)?, 1),
                Some(w) => {
                    manifest.push(("window".into(), format!("{},{}", w.a(), w.b())));
                    condition_wn(cutoff, w, &mut rng, max_attempts)?
                }
            };
            manifest.push(("attempts".into(), attempts.to_string()));
            manifest.push(("energy".into(), renormalized_energy(&field).to_string()));
            io::write_text(&dir.join("field.csv"), &io::field_to_csv(&field))?;
            io::write_text(&dir.join("manifest.txt"), &io::manifest_to_string(&manifest))?;
            println!(
                "wrote cutoff-{cutoff} field to {} (attempts: {attempts}, energy {:.6})",
                dir.join("field.csv").display(),
                renormalized_energy(&field),
            );
        }
        other => return Err(Error::Parse(format!("unknown kind `{other}`"))),
    }
    Ok(0)
}

// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct EvolveArgs {
    /// Input configuration CSV (`xi,x1,x2`).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Time step.
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    record_every: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn evolve(args: EvolveArgs, cfg: Option<&ConfigMap>) -> Result<u8> {
    let input = require(merge(args.input, cfg, "input", parse_path)?, "--input")?;
    let h = require(merge(args.h, cfg, "h", parse_f64)?, "--h")?;
    let steps = require(merge(args.steps, cfg, "steps", parse_u64)?, "--steps")?;
    let record_every = merge(args.record_every, cfg, "record_every", parse_u64)?.unwrap_or(1);
    let dir = out_dir(args.out, cfg, "evolve")?;
    if steps < 1 {
        return Err(Error::InvalidRange("--steps must be >= 1".into()));
    }
    let config = io::config_from_csv(&std::fs::read_to_string(&input)?)?;
    let green = GreenEvaluator::ewald();
    let traj = vortexgas::dynamics::evolve(&config, h, steps, &green, record_every)?;
    let manifest = vec![
        ("command".to_string(), "evolve".to_string()),
        ("input".to_string(), input.display().to_string()),
        ("h".to_string(), h.to_string()),
        ("steps".to_string(), steps.to_string()),
        ("record_every".to_string(), record_every.to_string()),
        ("scheme".to_string(), traj.scheme.to_string()),
        ("max_drift".to_string(), traj.max_drift().to_string()),
    ];
    io::write_text(&dir.join("trajectory.csv"), &io::trajectory_to_csv(&traj))?;
    io::write_text(&dir.join("diagnostics.csv"), &io::diagnostics_to_csv(&traj))?;
    io::write_text(&dir.join("manifest.txt"), &io::manifest_to_string(&manifest))?;
    println!(
        "integrated {} steps (h = {h}); max relative energy drift {:.3e}",
        steps,
        traj.max_drift()
    );
    Ok(0)
}

// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct SpectrumArgs {
    /// Field CSV (`k1,k2,coeff`) or configuration CSV (`xi,x1,x2`).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Largest shell index.
    #[arg(long)]
    kmax: Option<usize>,
    /// Vorticity-transform cutoff when the input is a configuration.
    #[arg(long)]
    cutoff: Option<usize>,
    /// Optional slope-fit window `lo,hi` in log10(k).
    #[arg(long)]
    window: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn spectrum(args: SpectrumArgs, cfg: Option<&ConfigMap>) -> Result<u8> {
    let input = require(merge(args.input, cfg, "input", parse_path)?, "--input")?;
    let dir = out_dir(args.out, cfg, "spectrum")?;
    let text = std::fs::read_to_string(&input)?;
    let header = text.lines().next().unwrap_or("").trim();
    let field = match header {
        "k1,k2,coeff" => io::field_from_csv(&text)?,
        "xi,x1,x2" => {
            let config = io::config_from_csv(&text)?;
            let cutoff = merge(args.cutoff, cfg, "cutoff", parse_usize)?.unwrap_or(64) as u32;
            empirical_vorticity(&config, cutoff)?
        }
        other => {
            return Err(Error::Parse(format!(
                "unrecognized input header `{other}`"
            )))
        }
    };
    let kmax = merge(args.kmax, cfg, "kmax", parse_usize)?.unwrap_or(field.cutoff() as usize);
    let spec = energy_spectrum(&field, kmax as u32)?;
    let mut manifest = vec![
        ("command".to_string(), "spectrum".to_string()),
        ("input".to_string(), input.display().to_string()),
        ("kmax".to_string(), kmax.to_string()),
    ];
    io::write_text(&dir.join("spectrum.csv"), &io::spectrum_to_csv(&spec))?;
    if let Some(wtext) = merge(args.window, cfg, "window", parse_string)? {
        let (lo, hi) = wtext
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("window `{wtext}` is not lo,hi")))?;
        let window = (
            lo.trim().parse::<f64>().map_err(|e| Error::Parse(e.to_string()))?,
            hi.trim().parse::<f64>().map_err(|e| Error::Parse(e.to_string()))?,
        );
        let fit = fit_slope(&spec, window)?;
        manifest.push(("slope".into(), fit.slope.to_string()));
        io::write_text(&dir.join("slope.txt"), &io::slope_report(&fit))?;
        println!("spectrum over {kmax} shells; fitted slope {:.4}", fit.slope);
    } else {
        println!("spectrum over {kmax} shells");
    }
    io::write_text(&dir.join("manifest.txt"), &io::manifest_to_string(&manifest))?;
    Ok(0)
}

// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct HistArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    /// Column name to histogram.
    #[arg(long)]
    col: Option<String>,
    #[arg(long)]
    bins: Option<usize>,
    /// Optional explicit range.
    #[arg(long)]
    lo: Option<f64>,
    #[arg(long)]
    hi: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn hist(args: HistArgs, cfg: Option<&ConfigMap>) -> Result<u8> {
    let input = require(merge(args.input, cfg, "input", parse_path)?, "--input")?;
    let col = require(merge(args.col, cfg, "col", parse_string)?, "--col")?;
    let bins = merge(args.bins, cfg, "bins", parse_usize)?.unwrap_or(60);
    let dir = out_dir(args.out, cfg, "hist")?;
    let values = io::read_column(&std::fs::read_to_string(&input)?, &col)?;
    if values.is_empty() {
        return Err(Error::InvalidInput(format!("column `{col}` is empty")));
    }
    let lo = merge(args.lo, cfg, "lo", parse_f64)?
        .unwrap_or_else(|| values.iter().cloned().fold(f64::INFINITY, f64::min));
    let hi = merge(args.hi, cfg, "hi", parse_f64)?.unwrap_or_else(|| {
        let m = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        m + (m - lo).abs() * 1e-9 + f64::MIN_POSITIVE
    });
    let edges = uniform_edges(lo, hi, bins)?;
    let h = histogram(&values, &edges)?;
    let manifest = vec![
        ("command".to_string(), "hist".to_string()),
        ("input".to_string(), input.display().to_string()),
        ("col".to_string(), col.clone()),
        ("bins".to_string(), bins.to_string()),
    ];
    io::write_text(&dir.join("histogram.csv"), &io::histogram_to_csv(&h))?;
    io::write_text(&dir.join("manifest.txt"), &io::manifest_to_string(&manifest))?;
    println!(
        "histogrammed {} values of `{col}` into {bins} bins ({} in range)",
        values.len(),
        h.total_in_range()
    );
    Ok(0)
}

// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

/// The exact-identity suite: per-sample truncated-pairing identity,
/// the Hamiltonian/quadratic-form identity, and the quadratic-form
/// variance law against a grid-quadrature oracle.
pub fn verify(args: VerifyArgs) -> Result<u8> {
    let mut failed: Option<&'static str> = None;
    let mut report = |name: &'static str, residual: f64, tol: f64| {
        let ok = residual <= tol;
        println!(
            "{} {name}: residual {residual:.3e} (tolerance {tol:.1e})",
            if ok { "PASS" } else { "FAIL" }
        );
        if !ok && failed.is_none() {
            failed = Some(name);
        }
    };

    // 1. pairing identity: quad_green = −2·energy − 2·L, per sample
    {
        let mut rng = experiments::member_rng(args.seed, 1);
        let sums = lattice_sums(16)?;
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let f = sample_truncated_wn(16, &mut rng)?;
            let lhs = quad_green_truncated(&f);
            let rhs = -2.0 * renormalized_energy(&f) - 2.0 * sums.l;
            worst = worst.max((lhs - rhs).abs() / lhs.abs().max(rhs.abs()));
        }
        report("truncated-pairing identity", worst, 1e-12);
    }

    // 2. Hamiltonian = −½·⟨ω⊗ω, G⟩
    {
        let mut rng = experiments::member_rng(args.seed, 2);
        let g = GreenEvaluator::ewald();
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let c = sample_lambda(30, IntensityLaw::StandardGaussian, &mut rng)?;
            let h = hamiltonian(&c, &g)?;
            let qf = quadratic_form(&c, |x, y| {
                g.green(torus::delta(x, y)).expect("generic points are regular")
            });
            worst = worst.max((h + 0.5 * qf).abs() / h.abs().max(1e-30));
        }
        report("hamiltonian quadratic-form identity", worst, 1e-12);
    }

    // 3. variance of ⟨ω_N⊗ω_N, f⟩ vs 2∫∫f² for a mollified Green kernel
    {
        let mut rng = experiments::member_rng(args.seed, 3);
        let g = GreenEvaluator::ewald();
        let moll = MollifiedGreen::new(2, &g)?;
        let modes = std::sync::Arc::new(IndexSet::new(16)?);
        let transform = KernelTransform::new(|x| moll.value(x), 128, &modes)?;
        let target = 2.0 * transform.square_integral;
        let draws = 2_000;
        let n = 30usize;
        let mut values = Vec::with_capacity(draws);
        for _ in 0..draws {
            let c = sample_lambda(n, IntensityLaw::StandardGaussian, &mut rng)?;
            values.push(quadratic_form(&c, |x, y| moll.value_xy(x, y)));
        }
        let m = draws as f64;
        let mean = values.iter().sum::<f64>() / m;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
        let m4 = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / m;
        let se = ((m4 - var * var).max(0.0) / m).sqrt();
        report(
            "quadratic-form variance law",
            (var - target).abs(),
            3.0 * se,
        );
    }

    match failed {
        None => Ok(0),
        Some(name) => {
            eprintln!("vortexgas: verification failed: {name}");
            Ok(5)
        }
    }
}

// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct ExperimentArgs {
    /// One of: free-ensemble, clustered-evolution, hamiltonian-convergence,
    /// triviality.
    id: Option<String>,
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the ensemble size where the experiment has one.
    #[arg(long)]
    samples: Option<usize>,
}

pub fn experiment(args: ExperimentArgs, cfg: Option<&ConfigMap>) -> Result<u8> {
    let id = require(merge(args.id, cfg, "id", parse_string)?, "experiment id")?;
    let seed = merge(args.seed, cfg, "seed", parse_u64)?.unwrap_or(0);
    let profile = Profile::parse(
        &merge(args.profile, cfg, "profile", parse_string)?.unwrap_or_else(|| "desk".into()),
    )?;
    let dir = out_dir(args.out, cfg, &format!("{id}-{seed}"))?;
    let samples = merge(args.samples, cfg, "samples", parse_usize)?;

    match id.as_str() {
        "free-ensemble" => {
            let mut params = FreeEnsembleParams::with_profile(profile, seed);
            if let Some(s) = samples {
                params.samples = s;
            }
            let report = experiments::free_ensemble(&params, &dir)?;
            println!(
                "free ensemble: {} samples, top-{} threshold {:.4} (figure units), slope {:.4}",
                params.samples, params.top, report.top_threshold_fig, report.slope_top.slope
            );
        }
        "clustered-evolution" => {
            let mut params = ClusteredEvolutionParams::with_profile(profile, seed);
            if let Some(s) = samples {
                params.n_samples = s;
            }
            let report = experiments::clustered_evolution(&params, &dir)?;
            println!(
                "clustered evolution: slopes initial {:.4} / final {:.4} / free {:.4} ({} excluded)",
                report.slope_initial.slope,
                report.slope_final.slope,
                report.slope_free.slope,
                report.excluded
            );
        }
        "hamiltonian-convergence" => {
            let mut params = ConvergenceParams::with_profile(profile, seed);
            if let Some(s) = samples {
                params.samples_ks = s;
                params.samples_mass = s;
            }
            let report = experiments::hamiltonian_convergence(&params, &dir)?;
            for row in &report.rows {
                println!(
                    "n = {:>4}: KS = {:.4}, window mass {:.4} (reference {:.4})",
                    row.n, row.ks, row.z_n, report.z_ref
                );
            }
        }
        "triviality" => {
            let mut params = TrivialityParams::with_profile(profile, seed);
            if let Some(s) = samples {
                params.samples = s;
            }
            let report = experiments::triviality(&params, &XiCosX1, &dir)?;
            for row in &report.rows {
                println!(
                    "n = {:>4}: conditioned {:.6e}, unconditioned {:.6e} (iid theory {:.6e})",
                    row.n, row.conditioned, row.unconditioned, row.iid_theory
                );
            }
        }
        other => return Err(Error::Parse(format!("unknown experiment `{other}`"))),
    }
    println!("artifacts in {}", dir.display());
    Ok(0)
}
