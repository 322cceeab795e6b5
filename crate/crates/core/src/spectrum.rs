//! One-sided power spectrum of mean-removed signals.
//!
//! Bins `1..=L/2` of `|DFT(x - mean(x))|^2`; the DC bin is excluded. With the
//! `std` feature the transform runs through `rustfft`; otherwise a direct
//! transform over a cached twiddle table is used.

use alloc::vec::Vec;

use crate::signal::Sample;

/// Reusable spectrum computation for one signal length.
pub struct SpectrumAnalyzer {
    len: usize,
    #[cfg(feature = "std")]
    fft: std::sync::Arc<dyn rustfft::Fft<f64>>,
    #[cfg(not(feature = "std"))]
    twiddles: Vec<(f64, f64)>,
}

impl core::fmt::Debug for SpectrumAnalyzer {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("SpectrumAnalyzer").field("len", &self.len).finish()
    }
}

impl SpectrumAnalyzer {
    pub fn new(len: usize) -> Self {
        #[cfg(feature = "std")]
        {
            let fft = rustfft::FftPlanner::new().plan_fft_forward(len);
            SpectrumAnalyzer { len, fft }
        }
        #[cfg(not(feature = "std"))]
        {
            SpectrumAnalyzer { len, twiddles: twiddle_table(len) }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of bins returned by [`SpectrumAnalyzer::power_spectrum`].
    pub fn bins(&self) -> usize {
        self.len / 2
    }

    /// Panics if `signal.len()` differs from the analyzer length.
    pub fn power_spectrum<S: Sample>(&self, signal: &[S]) -> Vec<f64> {
        assert_eq!(signal.len(), self.len, "signal length does not match analyzer");
        let centered = mean_removed(signal);
        #[cfg(feature = "std")]
        {
            let mut buf: Vec<rustfft::num_complex::Complex<f64>> =
                centered.iter().map(|&x| rustfft::num_complex::Complex::new(x, 0.0)).collect();
            self.fft.process(&mut buf);
            buf[1..=self.bins()].iter().map(|c| c.norm_sqr()).collect()
        }
        #[cfg(not(feature = "std"))]
        {
            direct_bins(&centered, &self.twiddles)
        }
    }
}

/// Convenience wrapper for a single signal.
pub fn power_spectrum<S: Sample>(signal: &[S]) -> Vec<f64> {
    SpectrumAnalyzer::new(signal.len()).power_spectrum(signal)
}

/// Direct O(L^2) evaluation of the same bins, independent of any FFT library.
pub fn power_spectrum_direct<S: Sample>(signal: &[S]) -> Vec<f64> {
    let centered = mean_removed(signal);
    direct_bins(&centered, &twiddle_table(signal.len()))
}

fn mean_removed<S: Sample>(signal: &[S]) -> Vec<f64> {
    if signal.is_empty() {
        return Vec::new();
    }
    let mean = signal.iter().map(|v| v.to_f64()).sum::<f64>() / signal.len() as f64;
    signal.iter().map(|v| v.to_f64() - mean).collect()
}

fn twiddle_table(len: usize) -> Vec<(f64, f64)> {
    (0..len)
        .map(|m| {
            let angle = -2.0 * core::f64::consts::PI * m as f64 / len as f64;
            (libm::cos(angle), libm::sin(angle))
        })
        .collect()
}

fn direct_bins(centered: &[f64], twiddles: &[(f64, f64)]) -> Vec<f64> {
    let len = centered.len();
    (1..=len / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (n, &x) in centered.iter().enumerate() {
                let (c, s) = twiddles[(k * n) % len];
                re += x * c;
                im += x * s;
            }
            re * re + im * im
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn tone_concentrates_in_its_bin() {
        let signal: Vec<f64> =
            (0..32).map(|n| 5.0 + 2.0 * libm::cos(2.0 * core::f64::consts::PI * 3.0 * n as f64 / 32.0)).collect();
        let spectrum = power_spectrum(&signal);
        assert_eq!(spectrum.len(), 16);
        let total: f64 = spectrum.iter().sum();
        assert!(spectrum[2] / total >= 0.99);
    }

    #[test]
    fn constant_signal_has_zero_spectrum() {
        let spectrum = power_spectrum(&[7u64; 20]);
        assert!(spectrum.iter().all(|&p| p.abs() < 1e-18));
    }

    #[test]
    fn fft_and_direct_paths_agree() {
        let signal = vec![3u64, 0, 0, 9, 1, 4, 4, 2, 0, 0, 1, 7, 5, 3, 0, 2, 8];
        let fast = power_spectrum(&signal);
        let direct = power_spectrum_direct(&signal);
        assert_eq!(fast.len(), 8);
        for (a, b) in fast.iter().zip(&direct) {
            assert!((a - b).abs() <= 1e-9 * b.max(1.0), "{a} vs {b}");
        }
    }
}
