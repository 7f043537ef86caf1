//! Analytic displacement and readout spectra.
//!
//! One-sided power spectral densities over Hz with the area convention
//! `integral of S df = <x^2>`. The thermal Lorentzian normalization is pinned
//! by the equipartition contract
//!
//! ```text
//! <x^2> = (gamma / gamma_eff) k_B T_bath / (m omega_eff^2)
//! ```
//!
//! which fixes `S_x(f) = (8 gamma k_B T / m) / ((w^2 - w_eff^2)^2 + 4 g_eff^2 w^2)`
//! with `w = 2 pi f`. The readout (PDH) spectrum is the displacement spectrum
//! times a detuning-dependent transfer gain realized through the PDH slope.

use crate::backaction::EffectiveDynamics;
use crate::cavity::pdh_slope_ratio;
use crate::constants::BOLTZMANN;
use crate::numeric::{peak_and_fwhm, trapezoid};
use crate::params::{CavityParams, MechanicalMode};
use rustfft::num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectraError {
    #[error("dynamics unstable (gamma_eff = {0} <= 0): no stationary spectrum")]
    Unstable(f64),
    #[error("frequency grid must be strictly increasing with non-negative values")]
    InvalidGrid,
    #[error("grid too coarse: {points_across_fwhm} points across the FWHM (need >= 10)")]
    GridTooCoarse { points_across_fwhm: usize },
    #[error("no resonance peak found in spectrum")]
    NoPeak,
    #[error("adiabatic readout requires 2 kappa / omega_m > 10 (got {ratio})")]
    AdiabaticityViolation { ratio: f64 },
}

/// What a spectrum's values mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    /// m^2/Hz displacement PSD.
    Displacement,
    /// Normalized PDH readout units per Hz.
    PdhReadout,
}

/// A one-sided PSD on a strictly increasing frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    frequencies_hz: Vec<f64>,
    values: Vec<f64>,
    kind: SpectrumKind,
}

impl Spectrum {
    pub fn new(
        frequencies_hz: Vec<f64>,
        values: Vec<f64>,
        kind: SpectrumKind,
    ) -> Result<Self, SpectraError> {
        if frequencies_hz.len() != values.len() || frequencies_hz.len() < 2 {
            return Err(SpectraError::InvalidGrid);
        }
        if frequencies_hz.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SpectraError::InvalidGrid);
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(SpectraError::InvalidGrid);
        }
        Ok(Self {
            frequencies_hz,
            values,
            kind,
        })
    }

    pub fn frequencies_hz(&self) -> &[f64] {
        &self.frequencies_hz
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn kind(&self) -> SpectrumKind {
        self.kind
    }

    /// Trapezoidal area, i.e. `<x^2>` for a displacement spectrum.
    pub fn area(&self) -> f64 {
        trapezoid(&self.frequencies_hz, &self.values)
    }

    /// Numerical peak location and FWHM above the sampled baseline.
    pub fn peak_and_fwhm_hz(&self) -> Result<(f64, f64), SpectraError> {
        let baseline = self.values.iter().cloned().fold(f64::INFINITY, f64::min);
        peak_and_fwhm(&self.frequencies_hz, &self.values, baseline).ok_or(SpectraError::NoPeak)
    }

    /// Rescale all values by a positive gain, switching the declared kind.
    fn scaled(&self, gain: f64, kind: SpectrumKind) -> Spectrum {
        Spectrum {
            frequencies_hz: self.frequencies_hz.clone(),
            values: self.values.iter().map(|v| v * gain).collect(),
            kind,
        }
    }

    /// The part of the spectrum with frequencies in `[f_lo, f_hi]`.
    pub fn sliced(&self, f_lo: f64, f_hi: f64) -> Result<Spectrum, SpectraError> {
        let pairs: Vec<(f64, f64)> = self
            .frequencies_hz
            .iter()
            .zip(&self.values)
            .filter(|(f, _)| **f >= f_lo && **f <= f_hi)
            .map(|(f, v)| (*f, *v))
            .collect();
        Spectrum::new(
            pairs.iter().map(|p| p.0).collect(),
            pairs.iter().map(|p| p.1).collect(),
            self.kind,
        )
    }
}

/// Pointwise average of spectra sharing one grid (ensemble averaging).
pub fn average_spectra(spectra: &[Spectrum]) -> Result<Spectrum, SpectraError> {
    let first = spectra.first().ok_or(SpectraError::InvalidGrid)?;
    let n = first.values.len();
    let mut acc = vec![0.0; n];
    for s in spectra {
        if s.frequencies_hz != first.frequencies_hz {
            return Err(SpectraError::InvalidGrid);
        }
        for (a, v) in acc.iter_mut().zip(&s.values) {
            *a += v;
        }
    }
    let count = spectra.len() as f64;
    for a in &mut acc {
        *a /= count;
    }
    Spectrum::new(first.frequencies_hz.clone(), acc, first.kind)
}

/// Mechanical response at one angular frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SusceptibilityValue {
    /// rad/s
    pub omega: f64,
    /// m/N
    pub response: Complex64,
}

/// Mechanical susceptibility
/// `chi(W) = 1 / (M_eff (W_m^2 - W^2 - i W_m W / Q))`.
pub fn mechanical_susceptibility(omega: f64, mode: &MechanicalMode) -> SusceptibilityValue {
    let w_m = mode.omega_m();
    let denom = Complex64::new(w_m * w_m - omega * omega, -w_m * omega / mode.quality());
    SusceptibilityValue {
        omega,
        response: (mode.effective_mass() * denom).finv(),
    }
}

/// Uniform frequency grid centered on the effective resonance, spanning
/// `span_fwhm` full widths either side with `per_fwhm` points per width.
pub fn grid_around(dynamics: &EffectiveDynamics, span_fwhm: f64, per_fwhm: usize) -> Vec<f64> {
    let f0 = dynamics.frequency_hz();
    let fwhm = dynamics.fwhm_hz();
    let lo = (f0 - span_fwhm * fwhm).max(fwhm * 1e-3);
    let hi = f0 + span_fwhm * fwhm;
    let step = fwhm / per_fwhm as f64;
    let n = ((hi - lo) / step).ceil() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

/// Thermal displacement PSD with effective parameters, m^2/Hz.
///
/// The bath enters through the natural `gamma` and `T_bath` of the mode; the
/// resonance shape through `gamma_eff, omega_eff`. Peak at
/// `sqrt(omega_eff^2 - 2 gamma_eff^2)` and FWHM `2 gamma_eff` (angular) to
/// first order in `gamma_eff / omega_eff`.
pub fn analytic_psd(
    grid_hz: &[f64],
    mode: &MechanicalMode,
    dynamics: &EffectiveDynamics,
) -> Result<Spectrum, SpectraError> {
    if !dynamics.stable {
        return Err(SpectraError::Unstable(dynamics.gamma_eff));
    }
    let num = 8.0 * mode.gamma() * BOLTZMANN * mode.bath_temperature() / mode.effective_mass();
    let w_eff_sq = dynamics.omega_eff * dynamics.omega_eff;
    let g_eff = dynamics.gamma_eff;
    let values: Vec<f64> = grid_hz
        .iter()
        .map(|&f| {
            let w = 2.0 * std::f64::consts::PI * f;
            let resonant = w * w - w_eff_sq;
            num / (resonant * resonant + 4.0 * g_eff * g_eff * w * w)
        })
        .collect();
    Spectrum::new(grid_hz.to_vec(), values, SpectrumKind::Displacement)
}

/// Mean-square displacement fixed by equipartition,
/// `(gamma / gamma_eff) k_B T / (m omega_eff^2)`, m^2. This is the exact
/// area of [`analytic_psd`] over all frequencies.
pub fn expected_mean_square(mode: &MechanicalMode, dynamics: &EffectiveDynamics) -> f64 {
    mode.gamma() / dynamics.gamma_eff * BOLTZMANN * mode.bath_temperature()
        / (mode.effective_mass() * dynamics.omega_eff * dynamics.omega_eff)
}

/// Effective temperature from the area of a displacement spectrum via the
/// equipartition law, `T_eff = m omega_m^2 <x^2> / k_B`.
pub fn effective_temperature(
    spectrum: &Spectrum,
    mode: &MechanicalMode,
) -> Result<f64, SpectraError> {
    let (_, fwhm) = spectrum.peak_and_fwhm_hz()?;
    let df = spectrum
        .frequencies_hz
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let points_across = (fwhm / df) as usize;
    if points_across < 10 {
        return Err(SpectraError::GridTooCoarse {
            points_across_fwhm: points_across,
        });
    }
    let omega_m = mode.omega_m();
    Ok(mode.effective_mass() * omega_m * omega_m * spectrum.area() / BOLTZMANN)
}

/// Detuning-dependent readout gain turning a displacement spectrum into the
/// PDH readout spectrum: `gain = (slope ratio)^2 (omega_l / (L kappa))^2`,
/// maximal on resonance where the slope ratio is 1.
///
/// Valid in the adiabatic regime where the cavity field follows the mirror,
/// checked as `2 kappa / omega_m > 10`.
pub fn readout_transfer(
    delta: f64,
    cavity: &CavityParams,
    mode: &MechanicalMode,
) -> Result<f64, SpectraError> {
    let ratio = 2.0 * cavity.kappa() / mode.omega_m();
    if ratio < 10.0 {
        return Err(SpectraError::AdiabaticityViolation { ratio });
    }
    let slope = pdh_slope_ratio(delta, cavity);
    let per_meter = cavity.detuning_per_displacement() / cavity.kappa();
    Ok(slope * slope * per_meter * per_meter)
}

/// Displacement spectrum -> PDH readout spectrum at a detuning.
pub fn to_readout(
    spectrum: &Spectrum,
    delta: f64,
    cavity: &CavityParams,
    mode: &MechanicalMode,
) -> Result<Spectrum, SpectraError> {
    let gain = readout_transfer(delta, cavity, mode)?;
    Ok(spectrum.scaled(gain, SpectrumKind::PdhReadout))
}

/// PDH readout spectrum -> displacement spectrum (inverse of [`to_readout`]).
pub fn to_displacement(
    spectrum: &Spectrum,
    delta: f64,
    cavity: &CavityParams,
    mode: &MechanicalMode,
) -> Result<Spectrum, SpectraError> {
    let gain = readout_transfer(delta, cavity, mode)?;
    Ok(spectrum.scaled(1.0 / gain, SpectrumKind::Displacement))
}
