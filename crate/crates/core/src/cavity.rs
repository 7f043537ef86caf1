//! Steady-state response of the detuned cavity: circulating power, radiation
//! force and its spatial gradient, the reflection lineshape of a length scan,
//! and the Pound-Drever-Hall error signal.
//!
//! The cavity lineshape is the single-mode Lorentzian: at finesse 500 the
//! linewidth is ~1/500 of the free spectral range and the Airy correction is
//! below 1e-4. Detuning `delta > 0` is the cooling side; mirror displacement
//! `x` maps to detuning as `delta(x) = delta - (omega_l / L) x`, which fixes
//! the sign of the force gradient so that `beta > 0` for `delta > 0`.

use crate::constants::SPEED_OF_LIGHT;
use crate::params::CavityParams;
use rustfft::num_complex::Complex64;

/// Steady-state cavity response at one detuning.
#[derive(Debug, Clone, PartialEq)]
pub struct CavityResponse {
    /// Effective detuning, rad/s (positive = cooling side).
    pub detuning: f64,
    /// W
    pub circulating_power: f64,
    /// N
    pub radiation_force: f64,
    /// N/m
    pub force_gradient_beta: f64,
}

impl CavityResponse {
    pub fn at(delta: f64, cavity: &CavityParams) -> Self {
        Self {
            detuning: delta,
            circulating_power: circulating_power(delta, cavity),
            radiation_force: radiation_force(delta, cavity),
            force_gradient_beta: force_gradient_beta(delta, cavity),
        }
    }
}

/// Circulating power `B eta P / (1 + (delta/kappa)^2)`, W.
pub fn circulating_power(delta: f64, cavity: &CavityParams) -> f64 {
    let u = delta / cavity.kappa();
    cavity.buildup_factor() * cavity.coupling_efficiency() * cavity.input_power() / (1.0 + u * u)
}

/// Radiation-pressure force on the end mirror, `2 P_circ / c`, N.
pub fn radiation_force(delta: f64, cavity: &CavityParams) -> f64 {
    2.0 * circulating_power(delta, cavity) / SPEED_OF_LIGHT
}

/// Radiation force seen by a mirror displaced by `x` from the operating
/// point, via `delta(x) = delta - (omega_l / L) x`.
pub fn radiation_force_at_displacement(x: f64, delta: f64, cavity: &CavityParams) -> f64 {
    radiation_force(delta - cavity.detuning_per_displacement() * x, cavity)
}

/// Spatial gradient of the radiation force at the operating point, N/m.
///
/// `beta(delta) = (2/c) B eta P (omega_l/L) (2 delta / kappa^2) / (1 + (delta/kappa)^2)^2`;
/// positive for positive detuning, zero on resonance, extremal at
/// `delta = kappa / sqrt(3)`.
pub fn force_gradient_beta(delta: f64, cavity: &CavityParams) -> f64 {
    let kappa = cavity.kappa();
    let u = delta / kappa;
    let lorentz = 1.0 + u * u;
    2.0 / SPEED_OF_LIGHT
        * cavity.buildup_factor()
        * cavity.coupling_efficiency()
        * cavity.input_power()
        * cavity.detuning_per_displacement()
        * (2.0 * u / kappa)
        / (lorentz * lorentz)
}

/// Detuning at which `beta` is maximal, `kappa / sqrt(3)`.
pub fn beta_optimal_detuning(cavity: &CavityParams) -> f64 {
    cavity.kappa() / 3.0f64.sqrt()
}

/// On-resonance power reflectivity from the loss budget,
/// `((T_in - l) / (T_in + l))^2` with `l` the sum of all other losses.
/// Zero (full-contrast dip) when the cavity is impedance matched.
pub fn on_resonance_reflectivity(cavity: &CavityParams) -> f64 {
    let t_in = 1.0 - cavity.input_mirror_reflectivity();
    let other = (1.0 - cavity.end_mirror_reflectivity()) + cavity.extra_loss();
    let total = t_in + other;
    if total == 0.0 {
        return 1.0;
    }
    ((t_in - other) / total).powi(2)
}

/// Reflected power (normalized to input) for a scan of the cavity length.
///
/// A length offset `dL` detunes the cavity by `(omega_l / L) dL`, so the dip
/// is a Lorentzian of FWHM `lambda / (2 F)` in mirror displacement; a scan
/// calibrated in round-trip path (double pass) reads `lambda / F`. The shape
/// is symmetric: no thermal bistability is modeled.
pub fn reflection_scan(length_offsets: &[f64], cavity: &CavityParams) -> Vec<f64> {
    let contrast = 1.0 - on_resonance_reflectivity(cavity);
    let half_width = cavity.wavelength() / (4.0 * cavity.finesse());
    length_offsets
        .iter()
        .map(|&dl| {
            let u = dl / half_width;
            1.0 - contrast / (1.0 + u * u)
        })
        .collect()
}

/// Amplitude reflection coefficient of the cavity in the single-pole
/// approximation, `r(delta) = 1 - 2 kappa_in / (kappa - i delta)`, with the
/// input coupling fraction taken from the loss budget.
fn reflection_coefficient(delta: f64, cavity: &CavityParams) -> Complex64 {
    let t_in = 1.0 - cavity.input_mirror_reflectivity();
    let other = (1.0 - cavity.end_mirror_reflectivity()) + cavity.extra_loss();
    let total = t_in + other;
    let coupling = if total > 0.0 { t_in / total } else { 0.5 };
    let kappa = cavity.kappa();
    Complex64::new(1.0, 0.0) - 2.0 * coupling * kappa / Complex64::new(kappa, -delta)
}

fn pdh_raw(delta: f64, modulation: f64, cavity: &CavityParams) -> f64 {
    let r0 = reflection_coefficient(delta, cavity);
    let rp = reflection_coefficient(delta + modulation, cavity);
    let rm = reflection_coefficient(delta - modulation, cavity);
    (r0 * rp.conj() - r0.conj() * rm).im
}

/// Pound-Drever-Hall error signal, odd in `delta` and normalized so that the
/// slope at `delta = 0` equals `1 / kappa` (unit slope per half-linewidth).
pub fn pdh_error_signal(delta: f64, modulation: f64, cavity: &CavityParams) -> f64 {
    let kappa = cavity.kappa();
    let h = 1e-6 * kappa;
    let raw_slope = (pdh_raw(h, modulation, cavity) - pdh_raw(-h, modulation, cavity)) / (2.0 * h);
    pdh_raw(delta, modulation, cavity) / (raw_slope * kappa)
}

/// Slope of the normalized PDH error signal, by central finite difference.
pub fn pdh_slope(delta: f64, modulation: f64, cavity: &CavityParams) -> f64 {
    let h = 1e-5 * cavity.kappa();
    (pdh_error_signal(delta + h, modulation, cavity)
        - pdh_error_signal(delta - h, modulation, cavity))
        / (2.0 * h)
}

/// PDH slope at `delta` relative to the on-resonance slope, in the
/// high-modulation limit where the sidebands reflect completely:
/// `(1 - u^2) / (1 + u^2)^2` with `u = delta / kappa`.
///
/// This closed form is what the readout transfer function and the
/// area-normalization of measured spectra use.
pub fn pdh_slope_ratio(delta: f64, cavity: &CavityParams) -> f64 {
    let u = delta / cavity.kappa();
    let l = 1.0 + u * u;
    (1.0 - u * u) / (l * l)
}

/// True when the modulation frequency is too low for the high-modulation
/// PDH regime (fires below `10 kappa`).
pub fn pdh_regime_warning(modulation: f64, cavity: &CavityParams) -> bool {
    modulation < 10.0 * cavity.kappa()
}

/// A sampled PDH error-signal curve.
#[derive(Debug, Clone)]
pub struct PdhCurve {
    pub modulation: f64,
    pub detunings: Vec<f64>,
    pub error_signal: Vec<f64>,
    /// Set when the modulation frequency is below the high-modulation regime.
    pub regime_warning: bool,
}

impl PdhCurve {
    pub fn sample(detunings: Vec<f64>, modulation: f64, cavity: &CavityParams) -> Self {
        let error_signal = detunings
            .iter()
            .map(|&d| pdh_error_signal(d, modulation, cavity))
            .collect();
        Self {
            modulation,
            detunings,
            error_signal,
            regime_warning: pdh_regime_warning(modulation, cavity),
        }
    }

    /// Slope of the sampled discriminant at a detuning, volts-equivalent per
    /// rad/s in the fixed arbitrary gain of the curve.
    pub fn slope_at(&self, delta: f64, cavity: &CavityParams) -> f64 {
        pdh_slope(delta, self.modulation, cavity)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{BuildupConvention, CavityParams};
    use proptest::prelude::*;

    fn reference_cavity() -> CavityParams {
        CavityParams::with_basics(0.025, 500.0, 1.064e-6, 2e-3).unwrap()
    }

    #[test]
    fn circulating_power_on_resonance() {
        let c = reference_cavity();
        let p = circulating_power(0.0, &c);
        assert!((p - 0.637).abs() / 0.637 < 1e-3);
        // half at one half-linewidth, vanishing far off resonance
        assert!((circulating_power(c.kappa(), &c) - 0.5 * p).abs() < 1e-12);
        assert!(circulating_power(1e4 * c.kappa(), &c) < 1e-8 * p);
        let f_over_pi = CavityParams::new(
            0.025,
            500.0,
            1.064e-6,
            2e-3,
            0.993,
            0.997,
            0.002,
            1.0,
            BuildupConvention::FOverPi,
        )
        .unwrap();
        assert!((circulating_power(0.0, &f_over_pi) - 0.5 * p).abs() < 1e-12);
    }

    #[test]
    fn beta_zero_on_resonance_and_peak_location() {
        let c = reference_cavity();
        assert_eq!(force_gradient_beta(0.0, &c), 0.0);
        // grid-search oracle for the argmax
        let kappa = c.kappa();
        let mut best = (0.0, f64::MIN);
        let mut u = 0.0;
        while u <= 3.0 {
            let b = force_gradient_beta(u * kappa, &c);
            if b > best.1 {
                best = (u, b);
            }
            u += 1e-4;
        }
        assert!((best.0 - 1.0 / 3.0f64.sqrt()).abs() < 2e-4);
        assert!((beta_optimal_detuning(&c) - kappa / 3.0f64.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn response_record_contract() {
        let c = reference_cavity();
        for u in [-1.5, -0.3, 0.0, 0.4, 2.0] {
            let r = CavityResponse::at(u * c.kappa(), &c);
            assert!(r.circulating_power >= 0.0);
            assert!((r.radiation_force - 2.0 * r.circulating_power / SPEED_OF_LIGHT).abs() < 1e-18);
            if u == 0.0 {
                assert_eq!(r.force_gradient_beta, 0.0);
            } else {
                assert_eq!(r.force_gradient_beta.signum(), u.signum());
            }
        }
    }

    #[test]
    fn beta_peak_magnitude() {
        let c = reference_cavity();
        let beta = force_gradient_beta(beta_optimal_detuning(&c), &c);
        assert!((beta - 5.185).abs() / 5.185 < 1e-3, "beta = {beta}");
    }

    #[test]
    fn beta_matches_numerical_force_derivative() {
        let c = reference_cavity();
        let kappa = c.kappa();
        let dx = crate::params::detuning_spatial(1e-4 * kappa, &c);
        // 100 detunings across +-3 kappa, deterministic spread
        for i in 0..100 {
            let delta = (-3.0 + 6.0 * i as f64 / 99.0) * kappa;
            let f_plus = radiation_force_at_displacement(dx, delta, &c);
            let f_minus = radiation_force_at_displacement(-dx, delta, &c);
            let numeric = (f_plus - f_minus) / (2.0 * dx);
            let analytic = force_gradient_beta(delta, &c);
            let scale = force_gradient_beta(beta_optimal_detuning(&c), &c);
            assert!(
                (numeric - analytic).abs() <= 1e-6 * scale.max(analytic.abs()),
                "delta/kappa = {}: numeric {numeric} vs analytic {analytic}",
                delta / kappa
            );
        }
    }

    #[test]
    fn reflection_scan_shape() {
        let c = reference_cavity();
        let half = c.wavelength() / (4.0 * c.finesse());
        let offsets: Vec<f64> = (-2000..=2000).map(|i| i as f64 * 1e-2 * half).collect();
        let refl = reflection_scan(&offsets, &c);
        // symmetric dip centered at zero
        let min_idx = refl
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(offsets[min_idx], 0.0);
        // FWHM in length units is lambda / (2 F): measure it off the dip
        // depth with interpolated half crossings
        let depth: Vec<f64> = refl.iter().map(|r| 1.0 - r).collect();
        let (center, fwhm) = crate::numeric::peak_and_fwhm(&offsets, &depth, 0.0).unwrap();
        assert_eq!(center, 0.0);
        let expected = c.wavelength() / (2.0 * c.finesse());
        assert!((fwhm - expected).abs() / expected < 1e-2);
        // double-pass convention reads lambda / F ~ 2 nm
        assert!((2.0 * expected - 2.128e-9).abs() / 2.128e-9 < 1e-3);
    }

    #[test]
    fn reflection_matched_cavity_full_contrast() {
        // input transmission equals end transmission with no extra loss
        let c = CavityParams::new(
            0.025,
            500.0,
            1.064e-6,
            2e-3,
            0.995,
            0.995,
            0.0,
            1.0,
            BuildupConvention::TwoFOverPi,
        )
        .unwrap();
        assert!(on_resonance_reflectivity(&c) < 1e-12);
        let refl = reflection_scan(&[0.0], &c);
        assert!(refl[0] < 1e-12);
    }

    #[test]
    fn reflection_scan_single_resonance() {
        let c = reference_cavity();
        let span = 10.0 * c.wavelength() / c.finesse();
        let offsets: Vec<f64> = (0..20001)
            .map(|i| -span / 2.0 + i as f64 * span / 20000.0)
            .collect();
        let refl = reflection_scan(&offsets, &c);
        let mut minima = 0;
        for i in 1..refl.len() - 1 {
            if refl[i] < refl[i - 1] && refl[i] < refl[i + 1] {
                minima += 1;
            }
        }
        assert_eq!(minima, 1);
    }

    #[test]
    fn pdh_zero_and_odd() {
        let c = reference_cavity();
        let modulation = 2.0 * std::f64::consts::PI * 19e6;
        assert!(pdh_error_signal(0.0, modulation, &c).abs() < 1e-9);
        for i in 1..40 {
            let d = i as f64 * 0.2 * c.kappa();
            let plus = pdh_error_signal(d, modulation, &c);
            let minus = pdh_error_signal(-d, modulation, &c);
            assert!((plus + minus).abs() < 1e-9 * plus.abs().max(1.0));
        }
    }

    #[test]
    fn pdh_normalized_slope_at_zero() {
        let c = reference_cavity();
        let modulation = 100.0 * c.kappa();
        let slope = pdh_slope(0.0, modulation, &c);
        assert!((slope * c.kappa() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn pdh_slope_ratio_matches_high_modulation_discriminant() {
        let c = reference_cavity();
        let modulation = 1000.0 * c.kappa();
        for u in [0.25, 0.5, 0.8, 1.5] {
            let delta = u * c.kappa();
            let numeric = pdh_slope(delta, modulation, &c) / pdh_slope(0.0, modulation, &c);
            let closed = pdh_slope_ratio(delta, &c);
            assert!(
                (numeric - closed).abs() < 2e-3,
                "u = {u}: finite difference {numeric} vs closed form {closed}"
            );
        }
        // at delta = kappa the asymptotic slope crosses zero
        assert!(pdh_slope_ratio(c.kappa(), &c).abs() < 1e-12);
    }

    #[test]
    fn pdh_regime_flag() {
        let c = reference_cavity();
        // 19 MHz modulation vs kappa/2pi ~ 6 MHz: marginal regime, flagged
        let lab_modulation = 2.0 * std::f64::consts::PI * 19e6;
        assert!(pdh_regime_warning(lab_modulation, &c));
        assert!(!pdh_regime_warning(20.0 * c.kappa(), &c));
        let curve = PdhCurve::sample(vec![0.0, c.kappa()], lab_modulation, &c);
        assert!(curve.regime_warning);
        assert_eq!(curve.error_signal.len(), 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn power_even_beta_odd(u in -10.0f64..10.0) {
            let c = reference_cavity();
            let d = u * c.kappa();
            prop_assert!((circulating_power(d, &c) - circulating_power(-d, &c)).abs() < 1e-12);
            prop_assert!((force_gradient_beta(d, &c) + force_gradient_beta(-d, &c)).abs() < 1e-9);
        }

        #[test]
        fn beta_linear_in_power(u in -5.0f64..5.0, p in 1e-6f64..0.1) {
            let c1 = reference_cavity().with_input_power(p).unwrap();
            let c2 = reference_cavity().with_input_power(2.0 * p).unwrap();
            let d = u * c1.kappa();
            let b1 = force_gradient_beta(d, &c1);
            let b2 = force_gradient_beta(d, &c2);
            prop_assert!((b2 - 2.0 * b1).abs() <= 1e-12 * b1.abs().max(1e-30));
        }
    }
}
