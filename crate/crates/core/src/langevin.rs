//! Time-domain stochastic simulation of the mirror coordinate under thermal
//! noise, the cavity-filtered radiation force, and the retarded photothermal
//! force. This is the brute-force oracle for the analytic back-action model.
//!
//! Integration scheme, per step `dt`:
//!
//! - the filtered forces relax toward their instantaneous targets through
//!   exact exponential (one-pole) updates, so `dt` does not need to resolve
//!   `2 kappa` or `1/tau`; the mechanical update uses the exact time-average
//!   of the relaxation over the step, which keeps the filter phase (and with
//!   it the induced damping) accurate at `O((omega_m dt)^2)`;
//! - position and velocity advance by a semi-implicit (symplectic) stochastic
//!   Euler step: velocity first, position with the new velocity. The thermal
//!   momentum kick has variance `2 m (2 gamma) k_B T dt` per step, the
//!   fluctuation-dissipation pairing of the `-2 gamma v` friction term.
//!
//! Forces are the full nonlinear cavity Lorentzian, measured relative to the
//! static value at the operating point, so `x = 0` is the displaced
//! equilibrium and `delta` is the effective detuning there. Large excursions
//! still sample the entire lineshape, which is what saturates the
//! self-oscillation growth at negative detuning.

use crate::constants::{BOLTZMANN, HBAR};
use crate::numeric::linear_fit;
use crate::params::{CavityParams, MechanicalMode, PhotothermalModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("time step {dt} too large: need >= 50 samples per mechanical period ({max_dt})")]
    StepTooLarge { dt: f64, max_dt: f64 },
    #[error("non-finite state at t = {t}: x = {x}, v = {v}")]
    NonFinite { t: f64, x: f64, v: f64 },
    #[error("record stride must be >= 1")]
    BadStride,
}

/// Instantaneous simulation state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimState {
    /// m
    pub x: f64,
    /// m/s
    pub v: f64,
    /// cavity-filtered radiation force (relative to operating point), N
    pub f_rp: f64,
    /// retarded photothermal force, N
    pub f_pt: f64,
    /// s
    pub t: f64,
}

impl SimState {
    pub fn at_rest() -> Self {
        Self {
            x: 0.0,
            v: 0.0,
            f_rp: 0.0,
            f_pt: 0.0,
            t: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.v.is_finite() && self.f_rp.is_finite() && self.f_pt.is_finite()
    }
}

/// The four addends of the cavity-optomechanical energy: field, linear
/// coupling, mechanical oscillator, and drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub field_term: f64,
    pub coupling_term: f64,
    pub mechanical_term: f64,
    pub drive_term: f64,
}

impl EnergyBreakdown {
    pub fn total(&self) -> f64 {
        self.field_term + self.coupling_term + self.mechanical_term + self.drive_term
    }
}

/// A uniformly sampled displacement record, reproducible from `(seed, params)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeTrace {
    /// record sampling interval (integration step times the record stride), s
    pub dt: f64,
    /// mirror displacement, m
    pub samples: Vec<f64>,
    pub seed: u64,
    pub params: TraceParams,
}

/// Scalar snapshot of the physics behind a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceParams {
    pub delta: f64,
    pub finesse: f64,
    pub cavity_length_m: f64,
    pub wavelength_m: f64,
    pub power_w: f64,
    pub mode_frequency_hz: f64,
    pub mode_q: f64,
    pub effective_mass_kg: f64,
    pub bath_temperature_k: f64,
    pub photothermal_ratio: f64,
    pub photothermal_tau_s: f64,
}

impl TimeTrace {
    pub fn duration(&self) -> f64 {
        self.dt * self.samples.len() as f64
    }

    /// Sample variance of the displacement record.
    pub fn variance(&self) -> f64 {
        let n = self.samples.len() as f64;
        let mean = self.samples.iter().sum::<f64>() / n;
        self.samples
            .iter()
            .map(|x| (x - mean) * (x - mean))
            .sum::<f64>()
            / n
    }

    /// Keep every `stride`-th sample.
    pub fn decimated(&self, stride: usize) -> TimeTrace {
        TimeTrace {
            dt: self.dt * stride as f64,
            samples: self.samples.iter().step_by(stride).copied().collect(),
            seed: self.seed,
            params: self.params,
        }
    }
}

/// Integration and recording options.
#[derive(Debug, Clone, Copy)]
pub struct SimOptions {
    /// simulated time, s
    pub duration: f64,
    /// integration step, s
    pub dt: f64,
    /// record every n-th step (1 = every step)
    pub record_stride: usize,
}

impl SimOptions {
    pub fn new(duration: f64, dt: f64) -> Self {
        Self {
            duration,
            dt,
            record_stride: 1,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride;
        self
    }
}

/// SplitMix64: the documented per-run seed derivation for ensembles.
/// Run `i` of master seed `s` uses `splitmix64(s ^ ((i+1) * 0x9E3779B97F4A7C15))`.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-run seed for ensemble member `run` under `master_seed`.
pub fn run_seed(master_seed: u64, run: usize) -> u64 {
    splitmix64(master_seed ^ (0x9E37_79B9_7F4A_7C15u64.wrapping_mul(run as u64 + 1)))
}

/// Configured stochastic simulator for one operating point.
#[derive(Debug, Clone)]
pub struct Simulator {
    cavity: CavityParams,
    mode: MechanicalMode,
    pt: PhotothermalModel,
    delta: f64,
}

impl Simulator {
    pub fn new(
        cavity: CavityParams,
        mode: MechanicalMode,
        pt: PhotothermalModel,
        delta: f64,
    ) -> Self {
        Self {
            cavity,
            mode,
            pt,
            delta,
        }
    }

    pub fn cavity(&self) -> &CavityParams {
        &self.cavity
    }
    pub fn mode(&self) -> &MechanicalMode {
        &self.mode
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Largest admissible integration step: 50 samples per mechanical period.
    pub fn max_dt(&self) -> f64 {
        1.0 / (50.0 * self.mode.frequency_hz())
    }

    fn trace_params(&self) -> TraceParams {
        TraceParams {
            delta: self.delta,
            finesse: self.cavity.finesse(),
            cavity_length_m: self.cavity.length(),
            wavelength_m: self.cavity.wavelength(),
            power_w: self.cavity.input_power(),
            mode_frequency_hz: self.mode.frequency_hz(),
            mode_q: self.mode.quality(),
            effective_mass_kg: self.mode.effective_mass(),
            bath_temperature_k: self.mode.bath_temperature(),
            photothermal_ratio: self.pt.ratio(),
            photothermal_tau_s: self.pt.tau(),
        }
    }

    /// Walk the dynamics, handing every recorded state to `observer`.
    ///
    /// `thermal` switches the bath kicks on; a ring-down is the same walk
    /// with kicks off and a displaced start.
    pub fn run_with<F: FnMut(&SimState)>(
        &self,
        start: SimState,
        opts: SimOptions,
        seed: u64,
        thermal: bool,
        mut observer: F,
    ) -> Result<(), SimError> {
        let dt = opts.dt;
        let max_dt = self.max_dt();
        if !dt.is_finite() || dt <= 0.0 || dt > max_dt {
            return Err(SimError::StepTooLarge { dt, max_dt });
        }
        if opts.record_stride == 0 {
            return Err(SimError::BadStride);
        }
        let steps = (opts.duration / dt).round() as u64;

        let m = self.mode.effective_mass();
        let omega_sq = self.mode.omega_m() * self.mode.omega_m();
        let gamma = self.mode.gamma();
        let kick_std = if thermal {
            (4.0 * gamma * BOLTZMANN * self.mode.bath_temperature() * dt / m).sqrt()
        } else {
            0.0
        };

        // nonlinear cavity force relative to the operating point
        let kappa = self.cavity.kappa();
        let slope = self.cavity.detuning_per_displacement();
        let f_peak = 2.0 / crate::constants::SPEED_OF_LIGHT
            * self.cavity.buildup_factor()
            * self.cavity.coupling_efficiency()
            * self.cavity.input_power();
        let u0 = self.delta / kappa;
        let f_static = f_peak / (1.0 + u0 * u0);
        let force_at = move |x: f64| {
            let u = (self.delta - slope * x) / kappa;
            f_peak / (1.0 + u * u) - f_static
        };

        // exact one-pole relaxation factors and their step averages
        let two_kappa = 2.0 * kappa;
        let decay_rp = (-two_kappa * dt).exp();
        let avg_rp = (1.0 - decay_rp) / (two_kappa * dt);
        let r = self.pt.ratio();
        let pole_pt = 1.0 / self.pt.tau();
        let decay_pt = (-pole_pt * dt).exp();
        let avg_pt = (1.0 - decay_pt) / (pole_pt * dt);

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = StandardNormal;
        let mut s = start;
        observer(&s);
        for step in 0..steps {
            // target sampled at the step start: together with the exact
            // within-step average below this reproduces the continuous
            // one-pole phase at the mechanical frequency to O((w dt)^2)
            let target = force_at(s.x);
            let target_pt = r * target;

            let f_rp_next = target + (s.f_rp - target) * decay_rp;
            let f_rp_avg = target + (s.f_rp - target) * avg_rp;
            let f_pt_next = target_pt + (s.f_pt - target_pt) * decay_pt;
            let f_pt_avg = target_pt + (s.f_pt - target_pt) * avg_pt;

            let accel = -omega_sq * s.x - 2.0 * gamma * s.v + (f_rp_avg + f_pt_avg) / m;
            let mut v_next = s.v + accel * dt;
            if thermal {
                let xi: f64 = normal.sample(&mut rng);
                v_next += kick_std * xi;
            }
            s.x += v_next * dt;
            s.v = v_next;
            s.f_rp = f_rp_next;
            s.f_pt = f_pt_next;
            s.t = (step + 1) as f64 * dt;

            if !s.x.is_finite() || !s.v.is_finite() {
                return Err(SimError::NonFinite {
                    t: s.t,
                    x: s.x,
                    v: s.v,
                });
            }
            if (step + 1) % opts.record_stride as u64 == 0 {
                observer(&s);
            }
        }
        Ok(())
    }

    /// Thermal run from rest; deterministic for a given seed.
    pub fn simulate(&self, duration: f64, dt: f64, seed: u64) -> Result<TimeTrace, SimError> {
        self.simulate_opts(SimOptions::new(duration, dt), seed)
    }

    /// Thermal run from rest with recording options.
    pub fn simulate_opts(&self, opts: SimOptions, seed: u64) -> Result<TimeTrace, SimError> {
        let mut samples =
            Vec::with_capacity((opts.duration / opts.dt) as usize / opts.record_stride + 2);
        self.run_with(SimState::at_rest(), opts, seed, true, |s| samples.push(s.x))?;
        Ok(TimeTrace {
            dt: opts.dt * opts.record_stride as f64,
            samples,
            seed,
            params: self.trace_params(),
        })
    }

    /// Noiseless relaxation from an initial displacement (the zero-temperature
    /// limit): the decay-rate oracle for the effective damping.
    pub fn ring_down(&self, x0: f64, duration: f64, dt: f64) -> Result<TimeTrace, SimError> {
        let mut samples = Vec::with_capacity((duration / dt) as usize + 2);
        let start = SimState {
            x: x0,
            ..SimState::at_rest()
        };
        self.run_with(start, SimOptions::new(duration, dt), 0, false, |s| {
            samples.push(s.x)
        })?;
        Ok(TimeTrace {
            dt,
            samples,
            seed: 0,
            params: self.trace_params(),
        })
    }

    /// Independent thermal runs with per-run seeds split from `master_seed`
    /// by [`run_seed`]. Per-run failures are returned as entries, never a
    /// panic; results are ordered by run index regardless of scheduling.
    pub fn ensemble(
        &self,
        n_runs: usize,
        master_seed: u64,
        opts: SimOptions,
    ) -> Vec<Result<TimeTrace, SimError>> {
        (0..n_runs)
            .into_par_iter()
            .map(|i| self.simulate_opts(opts, run_seed(master_seed, i)))
            .collect()
    }
}

/// Term-by-term optomechanical energy of a state, with the cavity quadratures
/// reconstructed from the adiabatic field value at the instantaneous detuning.
pub fn total_energy(
    state: &SimState,
    cavity: &CavityParams,
    mode: &MechanicalMode,
    delta: f64,
) -> EnergyBreakdown {
    let kappa = cavity.kappa();
    let detuned = delta - cavity.detuning_per_displacement() * state.x;
    let drive = cavity.coupling_rate();
    let alpha = drive / Complex64::new(kappa, -detuned);
    let x_quad = std::f64::consts::SQRT_2 * alpha.re;
    let y_quad = std::f64::consts::SQRT_2 * alpha.im;
    let quad_sq = x_quad * x_quad + y_quad * y_quad;

    let omega_l = cavity.omega_laser();
    let omega_c = omega_l + delta;
    let m = mode.effective_mass();
    let p = m * state.v;

    EnergyBreakdown {
        field_term: HBAR * delta * quad_sq,
        coupling_term: -HBAR * omega_c / (2.0 * cavity.length()) * (quad_sq - 1.0) * state.x,
        mechanical_term: 0.5
            * (p * p / m + m * mode.omega_m() * mode.omega_m() * state.x * state.x),
        drive_term: std::f64::consts::SQRT_2 * HBAR * drive * y_quad,
    }
}

/// Exponential amplitude rate of a trace fitted on its oscillation peaks:
/// amplitude ~ exp(rate * t). Negative for a ring-down (rate = -gamma_eff),
/// positive in the self-oscillation regime. `None` without enough peaks.
pub fn amplitude_growth_rate(trace: &TimeTrace) -> Option<f64> {
    let (times, peaks) = oscillation_peaks(trace);
    if peaks.len() < 4 {
        return None;
    }
    let log_peaks: Vec<f64> = peaks.iter().map(|p| p.ln()).collect();
    let (_, slope) = linear_fit(&times, &log_peaks);
    Some(slope)
}

fn oscillation_peaks(trace: &TimeTrace) -> (Vec<f64>, Vec<f64>) {
    let s = &trace.samples;
    let max_abs = s.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let floor = 1e-6 * max_abs;
    let mut times = Vec::new();
    let mut peaks = Vec::new();
    for i in 1..s.len().saturating_sub(1) {
        if s[i] > s[i - 1] && s[i] >= s[i + 1] && s[i] > floor {
            times.push(i as f64 * trace.dt);
            peaks.push(s[i]);
        }
    }
    (times, peaks)
}

/// Growth-and-saturation summary of an unstable run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstabilityReport {
    /// exponential amplitude growth rate over the early (pre-saturation) part, 1/s
    pub growth_rate: f64,
    /// true when the amplitude has stopped growing by the end of the record
    pub saturated: bool,
    /// mean oscillation amplitude over the last quarter of the record, m
    pub saturation_amplitude: f64,
}

/// Classify an amplitude-growing trace: early exponential rate, whether the
/// growth saturated into a limit cycle, and the late-time amplitude.
pub fn instability_metrics(trace: &TimeTrace) -> Option<InstabilityReport> {
    let (times, peaks) = oscillation_peaks(trace);
    if peaks.len() < 8 {
        return None;
    }
    let max_peak = peaks.iter().cloned().fold(0.0f64, f64::max);
    // early segment: up to the first crossing of half the maximum amplitude
    let cut = peaks
        .iter()
        .position(|&p| p > 0.5 * max_peak)
        .unwrap_or(peaks.len() - 1)
        .max(4);
    let log_peaks: Vec<f64> = peaks[..cut].iter().map(|p| p.ln()).collect();
    let (_, growth_rate) = linear_fit(&times[..cut], &log_peaks);

    let tail_start = peaks.len() - peaks.len() / 4;
    let tail = &peaks[tail_start..];
    let tail_mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let saturated = tail_mean > 0.8 * max_peak;
    Some(InstabilityReport {
        growth_rate,
        saturated,
        saturation_amplitude: tail_mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backaction::effective_damping;
    use crate::constants::BOLTZMANN;

    fn cheap_mode(temperature: f64) -> MechanicalMode {
        // low Q keeps the thermal correlation time short for fast tests
        MechanicalMode::from_frequency_hz(100e3, 100.0, 50e-12, temperature).unwrap()
    }

    fn reference_cavity(power: f64) -> CavityParams {
        CavityParams::with_basics(0.025, 500.0, 1.064e-6, power).unwrap()
    }

    #[test]
    fn determinism_same_seed_identical_trace() {
        let sim = Simulator::new(
            reference_cavity(1e-3),
            cheap_mode(300.0),
            PhotothermalModel::disabled(),
            0.0,
        );
        let dt = 1.0 / (64.0 * 100e3);
        let a = sim.simulate(2e-3, dt, 42).unwrap();
        let b = sim.simulate(2e-3, dt, 42).unwrap();
        assert_eq!(a.samples, b.samples);
        let c = sim.simulate(2e-3, dt, 43).unwrap();
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn step_too_large_rejected() {
        let sim = Simulator::new(
            reference_cavity(0.0),
            cheap_mode(300.0),
            PhotothermalModel::disabled(),
            0.0,
        );
        let err = sim.simulate(1e-3, 1.0 / (10.0 * 100e3), 1);
        assert!(matches!(err, Err(SimError::StepTooLarge { .. })));
    }

    #[test]
    fn free_oscillator_equipartition() {
        let mode = cheap_mode(300.0);
        let sim = Simulator::new(
            reference_cavity(0.0),
            mode.clone(),
            PhotothermalModel::disabled(),
            0.0,
        );
        let dt = 1.0 / (64.0 * mode.frequency_hz());
        let opts = SimOptions::new(300.0 / mode.gamma(), dt);
        let traces = sim.ensemble(8, 7, opts);
        let measured = traces
            .iter()
            .map(|t| t.as_ref().unwrap().variance())
            .sum::<f64>()
            / 8.0;
        let expected =
            BOLTZMANN * 300.0 / (mode.effective_mass() * mode.omega_m() * mode.omega_m());
        assert!(
            (measured - expected).abs() / expected < 0.05,
            "variance {measured} vs equipartition {expected}"
        );
    }

    #[test]
    fn ring_down_rate_matches_analytic_damping() {
        // the central oracle: T = 0 decay rate against the closed form
        let mode = MechanicalMode::from_frequency_hz(280e3, 8750.0, 9e-12, 300.0).unwrap();
        let cavity = reference_cavity(2e-3);
        let pt = PhotothermalModel::disabled();
        for u in [0.3, 0.5773502691896258, 1.0] {
            let delta = u * cavity.kappa();
            let reference = effective_damping(delta, &cavity, &mode, &pt).unwrap();
            let sim = Simulator::new(cavity.clone(), mode.clone(), pt.clone(), delta);
            let dt = 1.0 / (256.0 * mode.frequency_hz());
            let duration = 4.0 / reference.gamma_eff;
            let trace = sim.ring_down(3e-11, duration, dt).unwrap();
            let rate = amplitude_growth_rate(&trace).unwrap();
            let measured = -rate;
            assert!(
                (measured - reference.gamma_eff).abs() / reference.gamma_eff < 0.05,
                "u = {u}: ring-down {measured} vs closed form {}",
                reference.gamma_eff
            );
        }
    }

    #[test]
    fn ring_down_linearity_in_amplitude() {
        // force-gradient linearization: decay rate independent of amplitude
        // for excursions far below the cavity linewidth in displacement
        let mode = MechanicalMode::from_frequency_hz(280e3, 8750.0, 9e-12, 300.0).unwrap();
        let cavity = reference_cavity(2e-3);
        let delta = 0.5 * cavity.kappa();
        let sim = Simulator::new(cavity, mode.clone(), PhotothermalModel::disabled(), delta);
        let dt = 1.0 / (256.0 * mode.frequency_hz());
        let gamma_eff =
            effective_damping(delta, sim.cavity(), &mode, &PhotothermalModel::disabled())
                .unwrap()
                .gamma_eff;
        let duration = 4.0 / gamma_eff;
        let r1 = -amplitude_growth_rate(&sim.ring_down(1e-11, duration, dt).unwrap()).unwrap();
        let r2 = -amplitude_growth_rate(&sim.ring_down(1e-12, duration, dt).unwrap()).unwrap();
        assert!((r1 - r2).abs() / r2 < 0.01, "r1 = {r1}, r2 = {r2}");
    }

    #[test]
    fn photothermal_changes_ring_down_rate() {
        let mode = MechanicalMode::from_frequency_hz(280e3, 8750.0, 9e-12, 300.0).unwrap();
        let cavity = reference_cavity(2e-3);
        let pt = PhotothermalModel::new(0.7, 30e-9).unwrap();
        let delta = 0.5 * cavity.kappa();
        let reference = effective_damping(delta, &cavity, &mode, &pt).unwrap();
        let sim = Simulator::new(cavity, mode.clone(), pt, delta);
        let dt = 1.0 / (256.0 * mode.frequency_hz());
        let trace = sim.ring_down(3e-11, 4.0 / reference.gamma_eff, dt).unwrap();
        let measured = -amplitude_growth_rate(&trace).unwrap();
        assert!(
            (measured - reference.gamma_eff).abs() / reference.gamma_eff < 0.05,
            "with photothermal: {measured} vs {}",
            reference.gamma_eff
        );
    }

    #[test]
    fn negative_detuning_grows_and_saturates() {
        let mode = MechanicalMode::from_frequency_hz(280e3, 2000.0, 9e-12, 300.0).unwrap();
        let cavity = reference_cavity(2e-3);
        let delta = -0.5 * cavity.kappa();
        let reference =
            effective_damping(delta, &cavity, &mode, &PhotothermalModel::disabled()).unwrap();
        assert!(!reference.stable);
        let sim = Simulator::new(
            cavity.clone(),
            mode.clone(),
            PhotothermalModel::disabled(),
            delta,
        );
        let dt = 1.0 / (128.0 * mode.frequency_hz());
        let duration = 14.0 / reference.gamma_eff.abs();
        let trace = sim.ring_down(1e-12, duration, dt).unwrap();
        let report = instability_metrics(&trace).unwrap();
        assert!(report.growth_rate > 0.0);
        assert!(
            (report.growth_rate - reference.gamma_eff.abs()).abs() / reference.gamma_eff.abs()
                < 0.05,
            "growth {} vs |gamma_eff| {}",
            report.growth_rate,
            reference.gamma_eff.abs()
        );
        // the Lorentzian force saturates the growth near the linewidth scale
        assert!(report.saturated);
        let linewidth_scale = cavity.wavelength() / (4.0 * cavity.finesse());
        assert!(report.saturation_amplitude > 0.02 * linewidth_scale);
        assert!(report.saturation_amplitude < 10.0 * linewidth_scale);
    }

    #[test]
    fn nonfinite_aborts_with_diagnostic() {
        // absurd bath temperature and mass overflow the kick immediately
        let mode = MechanicalMode::from_frequency_hz(100e3, 100.0, 1e-30, 1e308).unwrap();
        let sim = Simulator::new(
            reference_cavity(0.0),
            mode,
            PhotothermalModel::disabled(),
            0.0,
        );
        match sim.simulate(1e-3, 1.0 / (64.0 * 100e3), 3) {
            Err(SimError::NonFinite { t, .. }) => assert!(t > 0.0),
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }

    #[test]
    fn ensemble_deterministic_and_order_independent() {
        let sim = Simulator::new(
            reference_cavity(1e-3),
            cheap_mode(300.0),
            PhotothermalModel::disabled(),
            0.0,
        );
        let opts = SimOptions::new(1e-3, 1.0 / (64.0 * 100e3));
        let a = sim.ensemble(4, 99, opts);
        let b = sim.ensemble(4, 99, opts);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.as_ref().unwrap().samples, y.as_ref().unwrap().samples);
        }
        // distinct members differ
        assert_ne!(
            a[0].as_ref().unwrap().samples,
            a[1].as_ref().unwrap().samples
        );
        // per-run seeds follow the documented splitting rule
        assert_eq!(a[2].as_ref().unwrap().seed, run_seed(99, 2));
    }

    #[test]
    fn ensemble_mean_square_variance_shrinks() {
        let mode = cheap_mode(300.0);
        let sim = Simulator::new(
            reference_cavity(0.0),
            mode.clone(),
            PhotothermalModel::disabled(),
            0.0,
        );
        let opts = SimOptions::new(60.0 / mode.gamma(), 1.0 / (64.0 * mode.frequency_hz()));
        let traces = sim.ensemble(64, 2024, opts);
        let x2: Vec<f64> = traces
            .iter()
            .map(|t| t.as_ref().unwrap().variance())
            .collect();
        let (_, sd) = {
            let (m, se) = crate::numeric::mean_and_stderr(&x2);
            (m, se * (x2.len() as f64).sqrt())
        };
        let per_run_var = sd * sd;
        // variance of 8-run group means should be ~ per-run variance / 8
        let group_means: Vec<f64> = x2.chunks(8).map(|c| c.iter().sum::<f64>() / 8.0).collect();
        let gm = group_means.iter().sum::<f64>() / group_means.len() as f64;
        let group_var = group_means.iter().map(|g| (g - gm) * (g - gm)).sum::<f64>()
            / (group_means.len() as f64 - 1.0);
        let ratio = group_var / (per_run_var / 8.0);
        assert!(ratio > 0.2 && ratio < 3.5, "1/n scaling ratio = {ratio}");
    }

    #[test]
    fn stride_decimates_record() {
        let sim = Simulator::new(
            reference_cavity(0.0),
            cheap_mode(300.0),
            PhotothermalModel::disabled(),
            0.0,
        );
        let dt = 1.0 / (64.0 * 100e3);
        let full = sim.simulate_opts(SimOptions::new(1e-3, dt), 5).unwrap();
        let strided = sim
            .simulate_opts(SimOptions::new(1e-3, dt).with_stride(4), 5)
            .unwrap();
        assert_eq!(strided.dt, 4.0 * dt);
        assert!((strided.samples[1] - full.samples[4]).abs() < 1e-30);
    }

    #[test]
    fn energy_terms_zero_at_origin_without_field() {
        let cavity = reference_cavity(0.0);
        let mode = cheap_mode(300.0);
        let e = total_energy(&SimState::at_rest(), &cavity, &mode, 0.3 * cavity.kappa());
        assert_eq!(e.field_term, 0.0);
        assert_eq!(e.coupling_term, 0.0);
        assert_eq!(e.mechanical_term, 0.0);
        assert_eq!(e.drive_term, 0.0);
    }

    #[test]
    fn mechanical_term_formula() {
        let cavity = reference_cavity(1e-3);
        let mode = cheap_mode(300.0);
        let state = SimState {
            x: 2e-12,
            v: 3e-6,
            f_rp: 0.0,
            f_pt: 0.0,
            t: 0.0,
        };
        let e = total_energy(&state, &cavity, &mode, 0.0);
        let m = mode.effective_mass();
        let expected =
            0.5 * (m * state.v * state.v + m * mode.omega_m() * mode.omega_m() * state.x * state.x);
        assert!((e.mechanical_term - expected).abs() < 1e-30);
        assert!(e.mechanical_term >= 0.0);
    }

    #[test]
    fn mean_mechanical_energy_reaches_kt() {
        let mode = cheap_mode(300.0);
        let cavity = reference_cavity(0.0);
        let sim = Simulator::new(
            cavity.clone(),
            mode.clone(),
            PhotothermalModel::disabled(),
            0.0,
        );
        let opts = SimOptions::new(1000.0 / mode.gamma(), 1.0 / (64.0 * mode.frequency_hz()));
        let mut acc = 0.0;
        let mut count = 0u64;
        sim.run_with(SimState::at_rest(), opts, 11, true, |s| {
            acc += total_energy(s, &cavity, &mode, 0.0).mechanical_term;
            count += 1;
        })
        .unwrap();
        let mean = acc / count as f64;
        let expected = BOLTZMANN * 300.0;
        assert!(
            (mean - expected).abs() / expected < 0.05,
            "mean E = {mean} vs kT = {expected}"
        );
    }
}
