//! Stop-concept and white-noise filters applied before the concept graph is
//! built.
//!
//! A stop concept tracks the overall posting volume: its correlation with the
//! AllTweets signal exceeds `rho`. A white-noise concept has a flat power
//! spectrum. Flatness is measured by the log ratio of the geometric to the
//! arithmetic mean of the DC-excluded periodogram, standardized against its
//! distribution under white noise (periodogram bins i.i.d. exponential):
//!
//! ```text
//! z = (mean(ln p) - ln(mean(p)) + EULER_GAMMA) / sqrt((pi^2/6 - 1) / m)
//! ```
//!
//! A peak is detected when `z < -psd_peak_z`. Signals where one interval holds
//! more than half of the total count are always kept: an isolated impulse has
//! a flat spectrum but is an event, not noise.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::signal::{ccm, AllTweetsSignal, ConceptSignal};
use crate::spectrum::SpectrumAnalyzer;

/// Shortest signal the spectral test is applied to.
pub const MIN_SPECTRAL_LEN: usize = 8;

/// Share of the total count held by one interval above which a concept is
/// treated as a burst and kept.
pub const BURST_SHARE: f64 = 0.5;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FilterConfig {
    pub rho: f64,
    pub psd_peak_z: f64,
    pub min_total_count: u64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig { rho: 0.9, psd_peak_z: 3.0, min_total_count: 0 }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(Error::Config(format!("rho must be in (0, 1], got {}", self.rho)));
        }
        if !(self.psd_peak_z > 0.0 && self.psd_peak_z.is_finite()) {
            return Err(Error::Config(format!("psd_peak_z must be positive, got {}", self.psd_peak_z)));
        }
        Ok(())
    }
}

pub fn is_stop_concept(signal: &[u64], alltweets: &[u64], rho: f64) -> Result<bool> {
    Ok(ccm(signal, alltweets)? > rho)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralVerdict {
    /// Fewer than [`MIN_SPECTRAL_LEN`] intervals; kept undecided.
    TooShort,
    /// One interval dominates the total count; kept.
    Burst,
    /// Constant signal.
    ZeroSpectrum,
    Flat,
    Peaked,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhiteNoiseAssessment {
    pub verdict: SpectralVerdict,
    /// z-score of the largest bin against the spectrum's own mean and spread.
    pub spectrum_max_z: f64,
    /// Standardized log spectral flatness; strongly negative means peaked.
    pub flatness_z: f64,
}

impl WhiteNoiseAssessment {
    pub fn is_white_noise(&self) -> bool {
        matches!(self.verdict, SpectralVerdict::Flat | SpectralVerdict::ZeroSpectrum)
    }
}

/// Standardized log spectral flatness of a periodogram. 0 for an all-zero spectrum.
pub fn flatness_z(spectrum: &[f64]) -> f64 {
    let m = spectrum.len();
    if m == 0 {
        return 0.0;
    }
    let mean = spectrum.iter().sum::<f64>() / m as f64;
    if mean <= 0.0 {
        return 0.0;
    }
    let floor = mean * 1e-12;
    let mean_log = spectrum.iter().map(|&p| libm::log(p.max(floor))).sum::<f64>() / m as f64;
    let null_sd = libm::sqrt((core::f64::consts::PI * core::f64::consts::PI / 6.0 - 1.0) / m as f64);
    (mean_log - libm::log(mean) + EULER_GAMMA) / null_sd
}

/// z-score of the largest bin. 0 when the spectrum has no spread.
pub fn max_bin_z(spectrum: &[f64]) -> f64 {
    let m = spectrum.len();
    if m == 0 {
        return 0.0;
    }
    let mean = spectrum.iter().sum::<f64>() / m as f64;
    let var = spectrum.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / m as f64;
    let max = spectrum.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if var <= 0.0 {
        0.0
    } else {
        (max - mean) / libm::sqrt(var)
    }
}

pub fn assess_white_noise(signal: &[u64], analyzer: &SpectrumAnalyzer, cfg: &FilterConfig) -> WhiteNoiseAssessment {
    let mut out = WhiteNoiseAssessment { verdict: SpectralVerdict::TooShort, spectrum_max_z: 0.0, flatness_z: 0.0 };
    if signal.len() < MIN_SPECTRAL_LEN {
        return out;
    }
    let spectrum = analyzer.power_spectrum(signal);
    out.spectrum_max_z = max_bin_z(&spectrum);
    out.flatness_z = flatness_z(&spectrum);

    let total: u64 = signal.iter().sum();
    let peak = signal.iter().copied().max().unwrap_or(0);
    out.verdict = if total > 0 && peak as f64 > BURST_SHARE * total as f64 {
        SpectralVerdict::Burst
    } else if spectrum.iter().all(|&p| p <= 1e-9) {
        SpectralVerdict::ZeroSpectrum
    } else if out.flatness_z < -cfg.psd_peak_z {
        SpectralVerdict::Peaked
    } else {
        SpectralVerdict::Flat
    };
    out
}

pub fn is_white_noise(signal: &[u64], cfg: &FilterConfig) -> bool {
    assess_white_noise(signal, &SpectrumAnalyzer::new(signal.len()), cfg).is_white_noise()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Decision {
    /// Total count below `min_total_count`.
    Sparse,
    Stop,
    WhiteNoise,
    Kept,
}

impl Decision {
    pub const fn as_str(self) -> &'static str {
        match self {
            Decision::Sparse => "sparse",
            Decision::Stop => "stop",
            Decision::WhiteNoise => "white_noise",
            Decision::Kept => "kept",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterEntry {
    pub concept_id: String,
    pub decision: Decision,
    pub ccm_with_alltweets: f64,
    pub spectrum_max_z: f64,
    pub flatness_z: f64,
    /// Spectral test skipped because the signal is too short.
    pub short_signal: bool,
    pub burst_guard: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FilterReport {
    pub entries: Vec<FilterEntry>,
    pub sparse: usize,
    pub stop: usize,
    pub white_noise: usize,
    pub kept: usize,
}

impl FilterReport {
    pub fn removed(&self) -> usize {
        self.sparse + self.stop + self.white_noise
    }
}

fn decide(
    signal: &ConceptSignal,
    alltweets: &[u64],
    analyzer: &SpectrumAnalyzer,
    cfg: &FilterConfig,
) -> Result<FilterEntry> {
    let corr = ccm(&signal.values, alltweets)?;
    let mut entry = FilterEntry {
        concept_id: signal.concept_id.clone(),
        decision: Decision::Kept,
        ccm_with_alltweets: corr,
        spectrum_max_z: 0.0,
        flatness_z: 0.0,
        short_signal: false,
        burst_guard: false,
    };
    if signal.total() < cfg.min_total_count {
        entry.decision = Decision::Sparse;
        return Ok(entry);
    }
    if corr > cfg.rho {
        entry.decision = Decision::Stop;
        return Ok(entry);
    }
    let assessment = assess_white_noise(&signal.values, analyzer, cfg);
    entry.spectrum_max_z = assessment.spectrum_max_z;
    entry.flatness_z = assessment.flatness_z;
    entry.short_signal = assessment.verdict == SpectralVerdict::TooShort;
    entry.burst_guard = assessment.verdict == SpectralVerdict::Burst;
    if assessment.is_white_noise() {
        entry.decision = Decision::WhiteNoise;
    }
    Ok(entry)
}

/// Applies the stop test, then the white-noise test to the survivors.
pub fn apply_filters(
    signals: &BTreeMap<String, ConceptSignal>,
    alltweets: &AllTweetsSignal,
    cfg: &FilterConfig,
) -> Result<(BTreeMap<String, ConceptSignal>, FilterReport)> {
    cfg.validate()?;
    let analyzer = SpectrumAnalyzer::new(alltweets.values.len());
    let all: Vec<&ConceptSignal> = signals.values().collect();

    #[cfg(feature = "std")]
    let entries: Vec<FilterEntry> = {
        use rayon::prelude::*;
        all.par_iter().map(|s| decide(s, &alltweets.values, &analyzer, cfg)).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "std"))]
    let entries: Vec<FilterEntry> =
        all.iter().map(|s| decide(s, &alltweets.values, &analyzer, cfg)).collect::<Result<_>>()?;

    let mut report = FilterReport::default();
    let mut survivors = BTreeMap::new();
    for (signal, entry) in all.iter().zip(&entries) {
        match entry.decision {
            Decision::Sparse => report.sparse += 1,
            Decision::Stop => report.stop += 1,
            Decision::WhiteNoise => report.white_noise += 1,
            Decision::Kept => {
                report.kept += 1;
                survivors.insert(signal.concept_id.clone(), (*signal).clone());
            }
        }
    }
    report.entries = entries;
    Ok((survivors, report))
}
