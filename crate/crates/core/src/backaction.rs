//! Dynamical back-action on the mechanical mode: effective damping, optical
//! spring, the retarded photothermal contribution, stability classification,
//! and the predicted cooling ratio.
//!
//! The cavity-filtered force responds to mirror motion through a single pole
//! at `2 kappa`; the retarded photothermal force through a pole at `1 / tau`.
//! Decomposing the filtered force gradient `beta` at the mechanical frequency
//! into quadrature and in-phase parts gives simultaneously
//!
//! ```text
//! gamma_rp  = beta / (2 m) * 2 kappa   / ((2 kappa)^2 + omega_m^2)
//! gamma_pt  = r beta / (2 m) * (1/tau) / ((1/tau)^2  + omega_m^2)
//! omega_eff^2 = omega_m^2
//!             - beta / m * [ (2 kappa)^2 / ((2 kappa)^2 + omega_m^2)
//!                          + r (1/tau)^2 / ((1/tau)^2 + omega_m^2) ]
//! ```
//!
//! with `gamma_eff = gamma + gamma_rp + gamma_pt`. Negative `gamma_eff`
//! (negative detuning) marks the self-oscillation side.

use crate::cavity::force_gradient_beta;
use crate::params::{CavityParams, MechanicalMode, PhotothermalModel};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BackactionError {
    #[error("optical spring exceeds mechanical stiffness (omega_eff^2 = {omega_eff_sq} <= 0)")]
    UnstableSpring { omega_eff_sq: f64 },
    #[error("dynamics unstable (gamma_eff = {gamma_eff} <= 0); no stationary state")]
    Unstable { gamma_eff: f64 },
}

/// Effective oscillator parameters under back-action.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveDynamics {
    /// Total amplitude damping rate, rad/s.
    pub gamma_eff: f64,
    /// Effective resonance frequency, rad/s.
    pub omega_eff: f64,
    /// Radiation-pressure part of the added damping, rad/s.
    pub gamma_rp: f64,
    /// Photothermal part of the added damping, rad/s.
    pub gamma_pt: f64,
    /// `gamma_eff > 0`.
    pub stable: bool,
    /// Predicted `T_bath / T_eff`; NaN when unstable.
    pub cooling_ratio_pred: f64,
}

impl EffectiveDynamics {
    /// Construct directly from effective parameters (no cavity model); used
    /// to drive the spectrum generators at prescribed `gamma_eff, omega_eff`.
    pub fn from_rates(gamma_eff: f64, omega_eff: f64, mode: &MechanicalMode) -> Self {
        let gamma = mode.gamma();
        let stable = gamma_eff > 0.0;
        let cooling_ratio_pred = if stable {
            (gamma_eff / gamma) * (omega_eff * omega_eff) / (mode.omega_m() * mode.omega_m())
        } else {
            f64::NAN
        };
        Self {
            gamma_eff,
            omega_eff,
            gamma_rp: gamma_eff - gamma,
            gamma_pt: 0.0,
            stable,
            cooling_ratio_pred,
        }
    }

    /// Displacement-PSD full width at half maximum in Hz, `gamma_eff / pi`.
    pub fn fwhm_hz(&self) -> f64 {
        self.gamma_eff / std::f64::consts::PI
    }

    /// Effective frequency in Hz.
    pub fn frequency_hz(&self) -> f64 {
        self.omega_eff / (2.0 * std::f64::consts::PI)
    }
}

/// Evaluate the effective dynamics at one detuning.
///
/// Fails with `UnstableSpring` when the optical spring drives
/// `omega_eff^2 <= 0`; a negative `gamma_eff` is not an error, the result
/// comes back with `stable = false`.
pub fn effective_damping(
    delta: f64,
    cavity: &CavityParams,
    mode: &MechanicalMode,
    pt: &PhotothermalModel,
) -> Result<EffectiveDynamics, BackactionError> {
    let beta = force_gradient_beta(delta, cavity);
    let m = mode.effective_mass();
    let omega_m = mode.omega_m();
    let gamma = mode.gamma();

    let two_kappa = 2.0 * cavity.kappa();
    let rp_filter = two_kappa / (two_kappa * two_kappa + omega_m * omega_m);
    let gamma_rp = beta / (2.0 * m) * rp_filter;

    let r = pt.ratio();
    let (gamma_pt, pt_spring) = if r != 0.0 {
        let pole = 1.0 / pt.tau();
        let filter = pole / (pole * pole + omega_m * omega_m);
        let spring = pole * pole / (pole * pole + omega_m * omega_m);
        (r * beta / (2.0 * m) * filter, r * spring)
    } else {
        (0.0, 0.0)
    };

    let rp_spring = two_kappa * two_kappa / (two_kappa * two_kappa + omega_m * omega_m);
    let omega_eff_sq = omega_m * omega_m - beta / m * (rp_spring + pt_spring);
    if omega_eff_sq <= 0.0 {
        return Err(BackactionError::UnstableSpring { omega_eff_sq });
    }
    let omega_eff = omega_eff_sq.sqrt();

    let gamma_eff = gamma + gamma_rp + gamma_pt;
    let stable = gamma_eff > 0.0;
    let cooling_ratio_pred = if stable {
        (gamma_eff / gamma) * omega_eff_sq / (omega_m * omega_m)
    } else {
        f64::NAN
    };

    Ok(EffectiveDynamics {
        gamma_eff,
        omega_eff,
        gamma_rp,
        gamma_pt,
        stable,
        cooling_ratio_pred,
    })
}

/// Predicted cooling ratio `T_bath / T_eff` under noiseless back-action:
/// the bath force is unchanged while damping increases, so
/// `T_bath / T_eff = (gamma_eff / gamma) (omega_eff / omega_m)^2`.
pub fn predicted_cooling_ratio(
    dynamics: &EffectiveDynamics,
    mode: &MechanicalMode,
) -> Result<f64, BackactionError> {
    if !dynamics.stable {
        return Err(BackactionError::Unstable {
            gamma_eff: dynamics.gamma_eff,
        });
    }
    let r = (dynamics.gamma_eff / mode.gamma()) * (dynamics.omega_eff / mode.omega_m()).powi(2);
    Ok(r)
}

/// One row of a detuning sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    /// rad/s
    pub delta: f64,
    pub delta_over_kappa: f64,
    pub power_w: f64,
    /// None when the optical spring made the point invalid.
    pub dynamics: Option<EffectiveDynamics>,
    pub spring_unstable: bool,
}

impl SweepRow {
    pub fn stable(&self) -> bool {
        self.dynamics.as_ref().map(|d| d.stable).unwrap_or(false)
    }

    /// Effective temperature in K for the given bath temperature; NaN when
    /// the point is unstable.
    pub fn t_eff_k(&self, mode: &MechanicalMode) -> f64 {
        match &self.dynamics {
            Some(d) if d.stable => mode.bath_temperature() / d.cooling_ratio_pred,
            _ => f64::NAN,
        }
    }
}

/// Evaluate the effective dynamics across a detuning grid. Per-point
/// failures become row flags; the sweep itself never aborts.
pub fn sweep_detuning(
    deltas: &[f64],
    cavity: &CavityParams,
    mode: &MechanicalMode,
    pt: &PhotothermalModel,
) -> Vec<SweepRow> {
    let kappa = cavity.kappa();
    deltas
        .par_iter()
        .map(|&delta| match effective_damping(delta, cavity, mode, pt) {
            Ok(dynamics) => SweepRow {
                delta,
                delta_over_kappa: delta / kappa,
                power_w: cavity.input_power(),
                dynamics: Some(dynamics),
                spring_unstable: false,
            },
            Err(_) => SweepRow {
                delta,
                delta_over_kappa: delta / kappa,
                power_w: cavity.input_power(),
                dynamics: None,
                spring_unstable: true,
            },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::BuildupConvention;
    use proptest::prelude::*;

    fn reference_cavity(power: f64) -> CavityParams {
        CavityParams::with_basics(0.025, 500.0, 1.064e-6, power).unwrap()
    }

    fn reference_mode(mass: f64) -> MechanicalMode {
        MechanicalMode::from_frequency_hz(280e3, 8750.0, mass, 300.0).unwrap()
    }

    #[test]
    fn zero_power_reduces_to_natural_damping() {
        let c = reference_cavity(0.0);
        let m = reference_mode(22e-12);
        let d = effective_damping(0.3 * c.kappa(), &c, &m, &PhotothermalModel::disabled()).unwrap();
        assert_eq!(d.gamma_eff, m.gamma());
        assert_eq!(d.omega_eff, m.omega_m());
        assert_eq!(d.cooling_ratio_pred, 1.0);
        assert!((d.fwhm_hz() - 32.0).abs() < 1e-9);
    }

    #[test]
    fn zero_detuning_reduces_to_natural_damping() {
        let c = reference_cavity(2e-3);
        let m = reference_mode(22e-12);
        let d = effective_damping(0.0, &c, &m, &PhotothermalModel::disabled()).unwrap();
        assert_eq!(d.gamma_eff, m.gamma());
        assert_eq!(d.omega_eff, m.omega_m());
        assert_eq!(d.cooling_ratio_pred, 1.0);
    }

    #[test]
    fn negative_detuning_narrows() {
        let c = reference_cavity(2e-3);
        let m = reference_mode(22e-12);
        let d =
            effective_damping(-0.5 * c.kappa(), &c, &m, &PhotothermalModel::disabled()).unwrap();
        assert!(d.gamma_rp < 0.0);
        assert!(d.gamma_eff < m.gamma());
    }

    #[test]
    fn damping_at_optimal_detuning_matches_arithmetic() {
        // single arithmetic evaluation of the damping formula at the beta
        // maximum, F = 500, L = 25 mm, P = 2 mW, m = 9 ng:
        // beta = 5.185 N/m, 2 kappa = 7.5346e7 rad/s, omega_m = 1.7593e6
        // => gamma_rp = beta/(2m) * 2k/((2k)^2 + w^2) = 3.821e3 rad/s
        let c = reference_cavity(2e-3);
        let m = reference_mode(9e-12);
        let delta = crate::cavity::beta_optimal_detuning(&c);
        let d = effective_damping(delta, &c, &m, &PhotothermalModel::disabled()).unwrap();
        assert!(
            (d.gamma_rp - 3.821e3).abs() / 3.821e3 < 1e-3,
            "gamma_rp = {}",
            d.gamma_rp
        );
    }

    #[test]
    fn cooling_ratio_closed_form() {
        let m = reference_mode(22e-12);
        let unit = EffectiveDynamics::from_rates(m.gamma(), m.omega_m(), &m);
        assert!((predicted_cooling_ratio(&unit, &m).unwrap() - 1.0).abs() < 1e-12);
        let cooled = EffectiveDynamics::from_rates(30.0 * m.gamma(), m.omega_m(), &m);
        let ratio = predicted_cooling_ratio(&cooled, &m).unwrap();
        assert!((ratio - 30.0).abs() < 1e-9);
        // 300 K / 30 = 10 K
        assert!((m.bath_temperature() / ratio - 10.0).abs() < 1e-6);
        let unstable = EffectiveDynamics::from_rates(-m.gamma(), m.omega_m(), &m);
        assert!(matches!(
            predicted_cooling_ratio(&unstable, &m),
            Err(BackactionError::Unstable { .. })
        ));
    }

    #[test]
    fn photothermal_adds_damping_with_same_sign() {
        let c = reference_cavity(2e-3);
        let m = reference_mode(22e-12);
        let pt = PhotothermalModel::new(1.0, 30e-9).unwrap();
        let delta = 0.5 * c.kappa();
        let with_pt = effective_damping(delta, &c, &m, &pt).unwrap();
        let without = effective_damping(delta, &c, &m, &PhotothermalModel::disabled()).unwrap();
        assert!(with_pt.gamma_pt > 0.0);
        assert!(with_pt.gamma_eff > without.gamma_eff);
        assert_eq!(without.gamma_pt, 0.0);
        // additivity contract
        assert!(
            (with_pt.gamma_eff - (m.gamma() + with_pt.gamma_rp + with_pt.gamma_pt)).abs() < 1e-9
        );
    }

    #[test]
    fn spring_instability_detected() {
        let c = reference_cavity(2.0); // 2 W: far beyond the spring limit
        let m = reference_mode(9e-12);
        let result = effective_damping(0.5 * c.kappa(), &c, &m, &PhotothermalModel::disabled());
        assert!(matches!(
            result,
            Err(BackactionError::UnstableSpring { .. })
        ));
    }

    #[test]
    fn damping_filter_peaks_at_matched_kappa() {
        // holding beta fixed, gamma_rp is maximal over kappa at 2 kappa = omega_m
        let m = reference_mode(22e-12);
        let omega = m.omega_m();
        let filter = |kappa: f64| 2.0 * kappa / ((2.0 * kappa) * (2.0 * kappa) + omega * omega);
        let best = crate::numeric::golden_section_max(filter, omega * 1e-3, omega * 1e3, 1e-3);
        assert!((2.0 * best - omega).abs() / omega < 1e-5);
    }

    #[test]
    fn sweep_flags_and_antisymmetry() {
        let c = reference_cavity(2e-3);
        let m = reference_mode(22e-12);
        let deltas: Vec<f64> = (-30..=30).map(|i| i as f64 * 0.05 * c.kappa()).collect();
        let rows = sweep_detuning(&deltas, &c, &m, &PhotothermalModel::disabled());
        assert_eq!(rows.len(), deltas.len());
        // gamma_rp antisymmetric about zero detuning for r = 0
        for i in 0..rows.len() {
            let j = rows.len() - 1 - i;
            if let (Some(a), Some(b)) = (&rows[i].dynamics, &rows[j].dynamics) {
                assert!((a.gamma_rp + b.gamma_rp).abs() < 1e-9 * a.gamma_rp.abs().max(1.0));
            }
        }
        // stability flips with the sign of the detuning at this power
        assert!(!rows[0].stable());
        assert!(rows[rows.len() - 1].stable());
    }

    #[test]
    fn sweep_width_maximum_at_optimal_detuning() {
        let c = reference_cavity(2e-3);
        let m = reference_mode(22e-12);
        let n = 4000;
        let deltas: Vec<f64> = (0..=n)
            .map(|i| i as f64 * 2.0 / n as f64 * c.kappa())
            .collect();
        let rows = sweep_detuning(&deltas, &c, &m, &PhotothermalModel::disabled());
        let widths: Vec<f64> = rows
            .iter()
            .map(|r| r.dynamics.as_ref().unwrap().gamma_eff)
            .collect();
        let imax = crate::numeric::argmax(&widths);
        let expected = c.kappa() / 3.0f64.sqrt();
        assert!((deltas[imax] - expected).abs() <= 2.0 * c.kappa() * 2.0 / n as f64);
    }

    #[test]
    fn sweep_survives_unstable_spring_points() {
        let c = reference_cavity(2.0);
        let m = reference_mode(9e-12);
        let deltas: Vec<f64> = (1..=20).map(|i| i as f64 * 0.1 * c.kappa()).collect();
        let rows = sweep_detuning(&deltas, &c, &m, &PhotothermalModel::disabled());
        assert!(rows.iter().any(|r| r.spring_unstable));
        assert_eq!(rows.len(), deltas.len());
    }

    #[test]
    fn continuity_under_grid_refinement() {
        let c = reference_cavity(2e-3);
        let m = reference_mode(22e-12);
        let max_step = |n: usize| -> f64 {
            let deltas: Vec<f64> = (0..=n)
                .map(|i| (-2.0 + 4.0 * i as f64 / n as f64) * c.kappa())
                .collect();
            let rows = sweep_detuning(&deltas, &c, &m, &PhotothermalModel::disabled());
            let g: Vec<f64> = rows
                .iter()
                .map(|r| r.dynamics.as_ref().unwrap().gamma_eff)
                .collect();
            g.windows(2)
                .map(|w| (w[1] - w[0]).abs())
                .fold(0.0, f64::max)
        };
        let coarse = max_step(2000);
        let fine = max_step(4000);
        // halving the grid spacing roughly halves the largest jump
        assert!(fine < 0.75 * coarse, "coarse {coarse} fine {fine}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn power_linearity_of_added_damping(u in -2.0f64..2.0, p in 1e-5f64..5e-3) {
            let m = reference_mode(22e-12);
            let pt = PhotothermalModel::new(0.4, 30e-9).unwrap();
            let c1 = reference_cavity(p);
            let c2 = reference_cavity(2.0 * p);
            let d = u * c1.kappa();
            let g1 = effective_damping(d, &c1, &m, &pt).unwrap();
            let g2 = effective_damping(d, &c2, &m, &pt).unwrap();
            let added1 = g1.gamma_eff - m.gamma();
            let added2 = g2.gamma_eff - m.gamma();
            prop_assert!((added2 - 2.0 * added1).abs() <= 1e-6 * added1.abs().max(1e-12));
        }

        #[test]
        fn buildup_convention_scales_like_power(u in 0.1f64..2.0) {
            let m = reference_mode(22e-12);
            let full = reference_cavity(2e-3);
            let half = CavityParams::new(0.025, 500.0, 1.064e-6, 2e-3, 0.993, 0.997, 0.002, 1.0, BuildupConvention::FOverPi).unwrap();
            let d = u * full.kappa();
            let g_full = effective_damping(d, &full, &m, &PhotothermalModel::disabled()).unwrap();
            let g_half = effective_damping(d, &half, &m, &PhotothermalModel::disabled()).unwrap();
            let a_full = g_full.gamma_eff - m.gamma();
            let a_half = g_half.gamma_eff - m.gamma();
            prop_assert!((a_full - 2.0 * a_half).abs() <= 1e-9 * a_full.abs().max(1e-12));
        }
    }
}
