//! Averaged-periodogram (Welch) power spectral density estimation.
//!
//! Stands in for the spectrum analyzer of the experiment: overlapping
//! segments, per-segment mean removal, window with power compensation,
//! one-sided PSD over Hz. Parseval contract: the rectangular-rule integral
//! of the PSD equals the sample variance for a rectangular window.

use super::EstimationError;
use crate::langevin::TimeTrace;
use crate::spectra::{Spectrum, SpectrumKind};
use rustfft::{num_complex::Complex64, FftPlanner};
use std::f64::consts::PI;

/// Segment taper.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    /// Hann taper: the default; controls leakage into narrow lines.
    Hann,
    /// No taper; exact Parseval behavior.
    Rect,
}

impl Window {
    fn coefficients(&self, n: usize) -> Vec<f64> {
        match self {
            Window::Rect => vec![1.0; n],
            Window::Hann => (0..n)
                .map(|i| 0.5 * (1.0 - (2.0 * PI * i as f64 / n as f64).cos()))
                .collect(),
        }
    }
}

/// Welch PSD of a displacement record: one-sided, m^2/Hz, grid `k fs / N`
/// for `k = 0 ..= N/2`.
pub fn estimate_psd(
    trace: &TimeTrace,
    segment_length: usize,
    overlap_fraction: f64,
    window: Window,
) -> Result<Spectrum, EstimationError> {
    if segment_length < 8 || segment_length > trace.samples.len() {
        return Err(EstimationError::TooShort {
            samples: trace.samples.len(),
            segment: segment_length,
        });
    }
    if !(0.0..=0.9).contains(&overlap_fraction) {
        return Err(EstimationError::BadOverlap(overlap_fraction));
    }
    let n = segment_length;
    let fs = 1.0 / trace.dt;
    let coeffs = window.coefficients(n);
    let window_power = coeffs.iter().map(|w| w * w).sum::<f64>() / n as f64;

    let step = ((n as f64) * (1.0 - overlap_fraction)).max(1.0) as usize;
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);

    let half = n / 2;
    let mut acc = vec![0.0; half + 1];
    let mut buf = vec![Complex64::default(); n];
    let mut segments = 0usize;
    let mut start = 0usize;
    while start + n <= trace.samples.len() {
        let seg = &trace.samples[start..start + n];
        let mean = seg.iter().sum::<f64>() / n as f64;
        for (b, (s, w)) in buf.iter_mut().zip(seg.iter().zip(&coeffs)) {
            *b = Complex64::new((s - mean) * w, 0.0);
        }
        fft.process(&mut buf);
        for (k, a) in acc.iter_mut().enumerate() {
            *a += buf[k].norm_sqr();
        }
        segments += 1;
        start += step;
    }
    if segments == 0 {
        return Err(EstimationError::TooShort {
            samples: trace.samples.len(),
            segment: segment_length,
        });
    }

    let scale = 1.0 / (fs * window_power * n as f64 * segments as f64);
    let values: Vec<f64> = acc
        .iter()
        .enumerate()
        .map(|(k, a)| {
            // one-sided: double interior bins, not DC or Nyquist
            let fold = if k == 0 || (n.is_multiple_of(2) && k == half) {
                1.0
            } else {
                2.0
            };
            fold * a * scale
        })
        .collect();
    let frequencies: Vec<f64> = (0..=half).map(|k| k as f64 * fs / n as f64).collect();
    Ok(Spectrum::new(
        frequencies,
        values,
        SpectrumKind::Displacement,
    )?)
}
