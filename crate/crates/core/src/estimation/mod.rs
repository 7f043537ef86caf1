//! The measurement side: PSD estimation from traces, Lorentzian fitting,
//! PDH-slope normalization of measured areas, effective-mass calibration,
//! and the area-versus-width heating diagnostic. These mirror how the
//! experiment extracts every reported number.

mod lorentz;
mod welch;

pub use lorentz::{fit_lorentzian, lorentzian_model, FitOptions, InitialGuess, LorentzianFit};
pub use welch::{estimate_psd, Window};

use crate::cavity::pdh_slope_ratio;
use crate::constants::BOLTZMANN;
use crate::langevin::{run_seed, SimError, SimOptions, Simulator};
use crate::numeric::mean_and_stderr;
use crate::params::CavityParams;
use crate::spectra::{average_spectra, SpectraError, Spectrum};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimationError {
    #[error("trace too short: {samples} samples for segment length {segment}")]
    TooShort { samples: usize, segment: usize },
    #[error("overlap fraction {0} outside [0, 0.9]")]
    BadOverlap(f64),
    #[error("trace sampling is not uniform")]
    NonUniform,
    #[error("no resolvable peak in spectrum")]
    NoPeak,
    #[error("fit did not converge within the iteration budget")]
    NotConverged,
    #[error("PDH slope vanishes at this detuning; area normalization undefined")]
    SlopeVanishes,
    #[error("need at least two powers with three detunings each, got {powers} powers")]
    InsufficientData { powers: usize },
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Simulation(#[from] SimError),
}

/// Divide a readout-spectrum fit's area by the squared PDH slope ratio
/// `slope(delta)^2 / slope(0)^2`, converting it to a displacement-
/// proportional area. Standard errors scale along.
pub fn normalize_by_pdh_slope(
    fit: &LorentzianFit,
    delta: f64,
    cavity: &CavityParams,
) -> Result<LorentzianFit, EstimationError> {
    let ratio = pdh_slope_ratio(delta, cavity);
    if ratio.abs() < 1e-6 {
        return Err(EstimationError::SlopeVanishes);
    }
    let gain = ratio * ratio;
    let mut out = fit.clone();
    out.area /= gain;
    out.err_area /= gain;
    out.offset /= gain;
    out.err_offset /= gain;
    Ok(out)
}

/// Equipartition calibration of the effective mass from a displacement-
/// calibrated thermal spectrum at zero detuning and low power:
/// `m_eff = k_B T_bath / (omega_m^2 * area)`.
pub fn calibrate_effective_mass(
    spectrum: &Spectrum,
    mode_frequency_hz: f64,
    bath_temperature_k: f64,
) -> Result<f64, EstimationError> {
    let (_, fwhm) = spectrum
        .peak_and_fwhm_hz()
        .map_err(|_| EstimationError::NoPeak)?;
    let df = spectrum
        .frequencies_hz()
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    if fwhm / df < 10.0 {
        return Err(EstimationError::Spectra(SpectraError::GridTooCoarse {
            points_across_fwhm: (fwhm / df) as usize,
        }));
    }
    let omega = 2.0 * std::f64::consts::PI * mode_frequency_hz;
    Ok(BOLTZMANN * bath_temperature_k / (omega * omega * spectrum.area()))
}

/// One row of the area-versus-width diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatingRow {
    pub power_w: f64,
    pub area: f64,
    pub fwhm_hz: f64,
    pub area_times_fwhm: f64,
}

/// Result of the absorption-heating check: per-power mean products with
/// standard errors, and whether any pair disagrees beyond two combined
/// standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatingDiagnostic {
    pub rows: Vec<HeatingRow>,
    /// `(power, mean product, standard error)` per power, ascending power
    pub per_power: Vec<(f64, f64, f64)>,
    pub heating_flagged: bool,
}

/// Compare area-times-width products across input powers. With no residual
/// absorption all points fall on the same line, so the per-power means must
/// agree within statistics; a significant offset flags heating.
pub fn heating_diagnostic(
    fits: &[(f64, LorentzianFit)],
) -> Result<HeatingDiagnostic, EstimationError> {
    let mut rows: Vec<HeatingRow> = fits
        .iter()
        .map(|(p, f)| HeatingRow {
            power_w: *p,
            area: f.area,
            fwhm_hz: f.fwhm_hz,
            area_times_fwhm: f.area * f.fwhm_hz,
        })
        .collect();
    rows.sort_by(|a, b| a.power_w.partial_cmp(&b.power_w).unwrap());

    let mut per_power: Vec<(f64, Vec<f64>)> = Vec::new();
    for row in &rows {
        match per_power.last_mut() {
            Some((p, v)) if *p == row.power_w => v.push(row.area_times_fwhm),
            _ => per_power.push((row.power_w, vec![row.area_times_fwhm])),
        }
    }
    if per_power.len() < 2 || per_power.iter().any(|(_, v)| v.len() < 3) {
        return Err(EstimationError::InsufficientData {
            powers: per_power.len(),
        });
    }

    let stats: Vec<(f64, f64, f64)> = per_power
        .iter()
        .map(|(p, v)| {
            let (mean, se) = mean_and_stderr(v);
            (*p, mean, se)
        })
        .collect();
    let mut heating_flagged = false;
    for i in 0..stats.len() {
        for j in (i + 1)..stats.len() {
            let (_, m1, s1) = stats[i];
            let (_, m2, s2) = stats[j];
            let combined = (s1 * s1 + s2 * s2).sqrt();
            if (m1 - m2).abs() > 2.0 * combined {
                heating_flagged = true;
            }
        }
    }
    Ok(HeatingDiagnostic {
        rows,
        per_power: stats,
        heating_flagged,
    })
}

/// Stream an ensemble of thermal runs into an averaged Welch PSD without
/// holding all traces in memory: each run is simulated, reduced to its
/// spectrum, and dropped. Deterministic in `master_seed`; run failures
/// surface as errors.
pub fn averaged_ensemble_psd(
    sim: &Simulator,
    n_runs: usize,
    master_seed: u64,
    opts: SimOptions,
    segment_length: usize,
    overlap_fraction: f64,
    window: Window,
) -> Result<Spectrum, EstimationError> {
    let spectra: Result<Vec<Spectrum>, EstimationError> = (0..n_runs)
        .into_par_iter()
        .map(|i| {
            let trace = sim.simulate_opts(opts, run_seed(master_seed, i))?;
            estimate_psd(&trace, segment_length, overlap_fraction, window)
        })
        .collect();
    Ok(average_spectra(&spectra?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backaction::EffectiveDynamics;
    use crate::params::{MechanicalMode, PhotothermalModel};
    use crate::spectra::{analytic_psd, grid_around, to_readout};

    fn reference_mode() -> MechanicalMode {
        MechanicalMode::from_frequency_hz(280e3, 8750.0, 22e-12, 300.0).unwrap()
    }

    fn reference_cavity() -> CavityParams {
        CavityParams::with_basics(0.025, 500.0, 1.064e-6, 2e-3).unwrap()
    }

    #[test]
    fn broadened_width_in_the_thirty_fold_regime() {
        // a gamma_eff = 30 gamma spectrum fits to ~960 Hz from the 32 Hz
        // natural width
        let m = reference_mode();
        let dynamics = EffectiveDynamics::from_rates(30.0 * m.gamma(), m.omega_m(), &m);
        let grid = grid_around(&dynamics, 30.0, 64);
        let psd = analytic_psd(&grid, &m, &dynamics).unwrap();
        let fit = fit_lorentzian(&psd, None, FitOptions::default()).unwrap();
        assert!(
            (fit.fwhm_hz - 960.0).abs() / 960.0 < 0.01,
            "fwhm = {}",
            fit.fwhm_hz
        );
        assert!(fit.fwhm_hz > 800.0);
    }

    #[test]
    fn fit_consistency_across_detuning_sweep() {
        let m = reference_mode();
        let c = reference_cavity();
        let pt = PhotothermalModel::disabled();
        for i in 0..20 {
            let delta = (0.1 + 0.07 * i as f64) * c.kappa();
            let dynamics = crate::backaction::effective_damping(delta, &c, &m, &pt).unwrap();
            let grid = grid_around(&dynamics, 60.0, 64);
            let psd = analytic_psd(&grid, &m, &dynamics).unwrap();
            let fit = fit_lorentzian(&psd, None, FitOptions::default()).unwrap();
            let expected_fwhm = dynamics.fwhm_hz();
            assert!((fit.fwhm_hz - expected_fwhm).abs() / expected_fwhm < 0.01);
            let t_from_area = m.effective_mass() * m.omega_m().powi(2) * fit.area / BOLTZMANN;
            let t_expected = m.bath_temperature() / dynamics.cooling_ratio_pred;
            assert!((t_from_area - t_expected).abs() / t_expected < 0.01);
        }
    }

    #[test]
    fn pdh_normalization_round_trip() {
        let m = reference_mode();
        let c = reference_cavity();
        let dynamics = EffectiveDynamics::from_rates(10.0 * m.gamma(), m.omega_m(), &m);
        let grid = grid_around(&dynamics, 40.0, 64);
        let psd = analytic_psd(&grid, &m, &dynamics).unwrap();
        let delta = 0.45 * c.kappa();
        let readout = to_readout(&psd, delta, &c, &m).unwrap();
        let fit_displacement = fit_lorentzian(&psd, None, FitOptions::default()).unwrap();
        let fit_readout = fit_lorentzian(&readout, None, FitOptions::default()).unwrap();
        let normalized = normalize_by_pdh_slope(&fit_readout, delta, &c).unwrap();
        // recovers the displacement-proportional area: fixed (omega_l/L/kappa)^2
        // scale between displacement and readout remains
        let scale = (c.detuning_per_displacement() / c.kappa()).powi(2);
        let recovered = normalized.area / scale;
        assert!(
            (recovered - fit_displacement.area).abs() / fit_displacement.area < 1e-9,
            "recovered {recovered} vs {}",
            fit_displacement.area
        );
    }

    #[test]
    fn pdh_normalization_identity_and_idempotence_on_resonance() {
        let c = reference_cavity();
        let fit = LorentzianFit {
            center_hz: 280e3,
            fwhm_hz: 32.0,
            area: 1e-22,
            offset: 0.0,
            err_center: 0.1,
            err_fwhm: 0.1,
            err_area: 1e-24,
            err_offset: 0.0,
            converged: true,
            iterations: 10,
            residual_norm: 0.0,
        };
        let once = normalize_by_pdh_slope(&fit, 0.0, &c).unwrap();
        assert_eq!(once.area, fit.area);
        let twice = normalize_by_pdh_slope(&once, 0.0, &c).unwrap();
        assert_eq!(twice.area, once.area);
    }

    #[test]
    fn pdh_normalization_fails_where_slope_vanishes() {
        let c = reference_cavity();
        let fit = LorentzianFit {
            center_hz: 280e3,
            fwhm_hz: 32.0,
            area: 1e-22,
            offset: 0.0,
            err_center: 0.1,
            err_fwhm: 0.1,
            err_area: 1e-24,
            err_offset: 0.0,
            converged: true,
            iterations: 10,
            residual_norm: 0.0,
        };
        assert!(matches!(
            normalize_by_pdh_slope(&fit, c.kappa(), &c),
            Err(EstimationError::SlopeVanishes)
        ));
    }

    #[test]
    fn mass_calibration_round_trip() {
        let m = reference_mode();
        let dynamics = EffectiveDynamics::from_rates(m.gamma(), m.omega_m(), &m);
        let grid = grid_around(&dynamics, 64.0, 64);
        let psd = analytic_psd(&grid, &m, &dynamics).unwrap();
        let mass = calibrate_effective_mass(&psd, m.frequency_hz(), 300.0).unwrap();
        assert!((mass - 22e-12).abs() / 22e-12 < 0.02, "mass = {mass}");
        // doubling the area halves the mass
        let doubled = Spectrum::new(
            psd.frequencies_hz().to_vec(),
            psd.values().iter().map(|v| 2.0 * v).collect(),
            psd.kind(),
        )
        .unwrap();
        let half = calibrate_effective_mass(&doubled, m.frequency_hz(), 300.0).unwrap();
        assert!((half - mass / 2.0).abs() / mass < 1e-9);
    }

    fn fit_with_product(product_scale: f64, seed_jitter: f64, k: u64) -> LorentzianFit {
        // synthetic fits whose area*fwhm sits at product_scale with jitter
        let fwhm = 100.0 + (k % 5) as f64 * 40.0;
        let jitter = 1.0 + seed_jitter * ((k as f64 * 0.7).sin());
        LorentzianFit {
            center_hz: 280e3,
            fwhm_hz: fwhm,
            area: product_scale * jitter / fwhm,
            offset: 0.0,
            err_center: 0.0,
            err_fwhm: 0.0,
            err_area: 0.0,
            err_offset: 0.0,
            converged: true,
            iterations: 1,
            residual_norm: 0.0,
        }
    }

    #[test]
    fn heating_diagnostic_clean_and_injected() {
        let mut fits = Vec::new();
        for k in 0..6 {
            fits.push((1e-3, fit_with_product(1e-20, 0.02, k)));
            fits.push((2e-3, fit_with_product(1e-20, 0.02, k + 6)));
        }
        let diag = heating_diagnostic(&fits).unwrap();
        assert!(!diag.heating_flagged, "per_power = {:?}", diag.per_power);
        assert_eq!(diag.rows.len(), 12);

        // scaling one power's areas by 1.5 must flag
        let mut hot = Vec::new();
        for k in 0..6 {
            hot.push((1e-3, fit_with_product(1e-20, 0.02, k)));
            hot.push((2e-3, fit_with_product(1.5e-20, 0.02, k + 6)));
        }
        let diag = heating_diagnostic(&hot).unwrap();
        assert!(diag.heating_flagged);
    }

    #[test]
    fn heating_diagnostic_needs_enough_data() {
        let fits = vec![(1e-3, fit_with_product(1e-20, 0.0, 0))];
        assert!(matches!(
            heating_diagnostic(&fits),
            Err(EstimationError::InsufficientData { .. })
        ));
    }
}
