//! Shell-averaged energy spectra, power-law slope fits, histograms, and
//! two-sample distribution distances.
//!
//! The per-mode kinetic energy of a spectral field is `|ĉ(l)|²/(8π²|l|²)`;
//! a spectrum aggregates it over wavenumber shells. Integer shells
//! `(k−½, k+½]` are the default; geometric (log-spaced) binning with
//! per-unit-`k` density normalization is available for slope fits over
//! wide ranges, where equal-weight integer shells would drown the low-`k`
//! end of the fit.

use crate::torus::Accumulator;
use crate::white_noise::SpectralField;
use crate::{Error, Result};
use std::f64::consts::PI;

/// How bin energies are normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Plain sum of per-mode energies over the shell.
    ShellSum,
    /// Shell sum divided by the shell population.
    PerModeAverage,
    /// Shell sum divided by the bin width in `k` (a spectral density).
    Density,
}

#[derive(Debug, Clone, Copy)]
pub struct ShellBin {
    /// Representative wavenumber of the bin.
    pub k: f64,
    pub lo: f64,
    pub hi: f64,
    pub energy: f64,
    pub count: u64,
}

/// A binned energy spectrum.
#[derive(Debug, Clone)]
pub struct ShellSpectrum {
    pub bins: Vec<ShellBin>,
    pub normalization: Normalization,
}

impl ShellSpectrum {
    /// Total energy over all bins, undoing the normalization.
    pub fn total_energy(&self) -> f64 {
        let mut acc = Accumulator::new();
        for b in &self.bins {
            let raw = match self.normalization {
                Normalization::ShellSum => b.energy,
                Normalization::PerModeAverage => b.energy * b.count as f64,
                Normalization::Density => b.energy * (b.hi - b.lo),
            };
            acc.add(raw);
        }
        acc.value()
    }

    /// Average several spectra with identical binning (bin-wise mean of
    /// energies; populations must match).
    pub fn average(spectra: &[ShellSpectrum]) -> Result<ShellSpectrum> {
        let first = spectra
            .first()
            .ok_or_else(|| Error::InvalidInput("no spectra to average".into()))?;
        let mut out = first.clone();
        for s in &spectra[1..] {
            if s.bins.len() != out.bins.len() || s.normalization != out.normalization {
                return Err(Error::InvalidInput(
                    "spectra with different binning cannot be averaged".into(),
                ));
            }
            for (a, b) in out.bins.iter_mut().zip(&s.bins) {
                a.energy += b.energy;
            }
        }
        let n = spectra.len() as f64;
        for b in &mut out.bins {
            b.energy /= n;
        }
        Ok(out)
    }
}

fn spectrum_with_edges(
    field: &SpectralField,
    edges: &[f64],
    representative: &[f64],
    normalization: Normalization,
) -> ShellSpectrum {
    let nb = edges.len() - 1;
    let mut energy = vec![Accumulator::new(); nb];
    let mut count = vec![0u64; nb];
    let modes = field.index_set().modes();
    for (i, &k) in modes.iter().enumerate() {
        let r = k.norm2().sqrt();
        // bins are (lo, hi] half-open above the lower edge
        if r <= edges[0] || r > edges[nb] {
            continue;
        }
        let b = match edges[..nb].binary_search_by(|e| e.partial_cmp(&r).unwrap()) {
            Ok(pos) => pos.saturating_sub(1) as usize, // r exactly on an edge joins the bin below
            Err(pos) => pos - 1,
        };
        let c = field.coeffs()[i];
        energy[b].add(c * c / (8.0 * PI * PI * k.norm2()));
        count[b] += 1;
    }
    let bins = (0..nb)
        .map(|b| {
            let raw = energy[b].value();
            let e = match normalization {
                Normalization::ShellSum => raw,
                Normalization::PerModeAverage => {
                    if count[b] > 0 {
                        raw / count[b] as f64
                    } else {
                        0.0
                    }
                }
                Normalization::Density => raw / (edges[b + 1] - edges[b]),
            };
            ShellBin {
                k: representative[b],
                lo: edges[b],
                hi: edges[b + 1],
                energy: e,
                count: count[b],
            }
        })
        .collect();
    ShellSpectrum {
        bins,
        normalization,
    }
}

/// Integer-shell energy spectrum: shell `k` collects modes with
/// `k−½ < |l| ≤ k+½`, energies `E(k) = (1/8π²) Σ_shell |ĉ(l)|²/|l|²`.
/// (In the real basis this equals the same sum over real coefficients,
/// since shells are symmetric under `l ↦ −l`.)
pub fn energy_spectrum(field: &SpectralField, k_max: u32) -> Result<ShellSpectrum> {
    if k_max < 1 || k_max > field.cutoff() {
        return Err(Error::InvalidRange(format!(
            "k_max {} out of range for field cutoff {}",
            k_max,
            field.cutoff()
        )));
    }
    let edges: Vec<f64> = (0..=k_max).map(|k| k as f64 + 0.5).collect();
    let reps: Vec<f64> = (1..=k_max).map(|k| k as f64).collect();
    Ok(spectrum_with_edges(
        field,
        &edges,
        &reps,
        Normalization::ShellSum,
    ))
}

/// Log-binned spectral density over `[k_lo, k_hi]` with the given number
/// of bins per decade; bin energies are per unit `k`, representatives are
/// geometric bin centers.
pub fn energy_spectrum_log_bins(
    field: &SpectralField,
    k_lo: f64,
    k_hi: f64,
    bins_per_decade: usize,
) -> Result<ShellSpectrum> {
    if !(k_lo > 0.0 && k_hi > k_lo) {
        return Err(Error::InvalidRange("need 0 < k_lo < k_hi".into()));
    }
    if k_hi > field.cutoff() as f64 + 0.5 {
        return Err(Error::InvalidRange(format!(
            "k_hi {} exceeds field cutoff {}",
            k_hi,
            field.cutoff()
        )));
    }
    if bins_per_decade == 0 {
        return Err(Error::InvalidBins("need at least one bin per decade".into()));
    }
    let decades = (k_hi / k_lo).log10();
    let nb = (decades * bins_per_decade as f64).round().max(1.0) as usize;
    let ratio = (k_hi / k_lo).powf(1.0 / nb as f64);
    let edges: Vec<f64> = (0..=nb).map(|i| k_lo * ratio.powi(i as i32)).collect();
    let reps: Vec<f64> = (0..nb).map(|i| (edges[i] * edges[i + 1]).sqrt()).collect();
    Ok(spectrum_with_edges(
        field,
        &edges,
        &reps,
        Normalization::Density,
    ))
}

/// An ordinary-least-squares power-law fit of a spectrum in log-log axes.
#[derive(Debug, Clone, Copy)]
pub struct SlopeFit {
    pub slope: f64,
    /// Intercept of the fit in natural-log axes.
    pub intercept: f64,
    /// Root-mean-square residual of `ln E` around the fit line.
    pub residual: f64,
    /// The fit window, in `log10(k)`.
    pub window: (f64, f64),
    /// Number of bins entering the fit.
    pub bins_used: usize,
}

/// Fit `log E(k)` against `log k` by OLS over the bins whose
/// representative wavenumber satisfies `log10(k) ∈ [window.0, window.1]`.
/// Bins with nonpositive energy are excluded; at least 3 must remain.
pub fn fit_slope(spectrum: &ShellSpectrum, window: (f64, f64)) -> Result<SlopeFit> {
    if !(window.0 < window.1) {
        return Err(Error::FitDomain("empty fit window".into()));
    }
    let pts: Vec<(f64, f64)> = spectrum
        .bins
        .iter()
        .filter(|b| {
            let lk = b.k.log10();
            b.energy > 0.0 && lk >= window.0 && lk <= window.1
        })
        .map(|b| (b.k.ln(), b.energy.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::FitDomain(format!(
            "only {} positive bins inside the window",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    Ok(SlopeFit {
        slope,
        intercept,
        residual: (ss_res / n).sqrt(),
        window,
        bins_used: pts.len(),
    })
}

/// Histogram with left-closed bins `[e_i, e_{i+1})`; out-of-range values
/// are tallied separately.
#[derive(Debug, Clone)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
}

impl Histogram {
    pub fn total_in_range(&self) -> u64 {
        self.counts.iter().sum()
    }
}

pub fn histogram(values: &[f64], edges: &[f64]) -> Result<Histogram> {
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidBins(
            "edges must be strictly increasing with at least two entries".into(),
        ));
    }
    let nb = edges.len() - 1;
    let mut counts = vec![0u64; nb];
    let mut underflow = 0;
    let mut overflow = 0;
    for &v in values {
        if v < edges[0] {
            underflow += 1;
        } else if v >= edges[nb] {
            overflow += 1;
        } else {
            let b = match edges.binary_search_by(|e| e.partial_cmp(&v).unwrap()) {
                Ok(pos) => pos,         // exactly on a left edge: that bin
                Err(pos) => pos - 1,
            };
            counts[b] += 1;
        }
    }
    Ok(Histogram {
        edges: edges.to_vec(),
        counts,
        underflow,
        overflow,
    })
}

/// Uniform bin edges over `[lo, hi]`.
pub fn uniform_edges(lo: f64, hi: f64, bins: usize) -> Result<Vec<f64>> {
    if !(lo < hi) || bins == 0 {
        return Err(Error::InvalidBins("need lo < hi and bins >= 1".into()));
    }
    Ok((0..=bins)
        .map(|i| lo + (hi - lo) * i as f64 / bins as f64)
        .collect())
}

/// Two-sample Kolmogorov–Smirnov statistic `sup_t |F_a(t) − F_b(t)|`.
pub fn ks_distance(sample_a: &[f64], sample_b: &[f64]) -> Result<f64> {
    if sample_a.is_empty() || sample_b.is_empty() {
        return Err(Error::InvalidInput("KS needs non-empty samples".into()));
    }
    let mut a: Vec<f64> = sample_a.to_vec();
    let mut b: Vec<f64> = sample_b.to_vec();
    a.sort_by(|x, y| x.total_cmp(y));
    b.sort_by(|x, y| x.total_cmp(y));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut ia, mut ib) = (0usize, 0usize);
    let mut stat = 0.0f64;
    while ia < a.len() && ib < b.len() {
        let t = a[ia].min(b[ib]);
        while ia < a.len() && a[ia] <= t {
            ia += 1;
        }
        while ib < b.len() && b[ib] <= t {
            ib += 1;
        }
        let d = (ia as f64 / na - ib as f64 / nb).abs();
        if d > stat {
            stat = d;
        }
    }
    Ok(stat)
}
