//! Radiation-pressure self-cooling of a micro-mirror in a detuned Fabry-Perot
//! cavity: analytic back-action model, time-domain Langevin simulation, and
//! the measurement-side analysis (PSD estimation, Lorentzian fits, effective
//! temperatures, beam-mode and effective-mass characterization).
//!
//! The crate is organized around the experiment it models:
//!
//! - [`params`] validated physical parameter records and derived rates
//! - [`cavity`] steady-state detuned-cavity response, force gradient, PDH
//! - [`backaction`] effective damping / optical spring / stability / cooling
//! - [`spectra`] analytic displacement and readout spectra, equipartition
//! - [`langevin`] stochastic time-domain simulation (the brute-force oracle)
//! - [`estimation`] Welch PSD, Lorentzian fitting, calibration, diagnostics
//! - [`modes`] beam mode shapes, tomography, effective mass, photothermal time
//! - [`config`] plain-text `key = value` run configuration
//! - [`io`] CSV and binary serialization of the value types
//! - [`acceptance`] the end-to-end check suite used by the CLI report command
//!
//! All angular frequencies are rad/s internally; external interfaces (CSV,
//! config files) use Hz and label columns accordingly.

pub mod acceptance;
pub mod backaction;
pub mod cavity;
pub mod config;
pub mod constants;
pub mod estimation;
pub mod io;
pub mod langevin;
pub mod modes;
pub mod numeric;
pub mod params;
pub mod spectra;

pub use backaction::{
    effective_damping, predicted_cooling_ratio, sweep_detuning, EffectiveDynamics, SweepRow,
};
pub use cavity::{circulating_power, force_gradient_beta, pdh_error_signal, radiation_force};
pub use config::RunConfig;
pub use estimation::{estimate_psd, fit_lorentzian, LorentzianFit};
pub use langevin::{Simulator, TimeTrace};
pub use modes::{effective_mass, mode_shape, photothermal_tau, BeamModeModel, ProbeProfile};
pub use params::{CavityParams, MechanicalMode, PhotothermalModel};
pub use spectra::{analytic_psd, effective_temperature, Spectrum};
