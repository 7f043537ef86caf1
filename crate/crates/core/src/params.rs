//! Validated physical parameter records and the rates derived from them.
//!
//! Every record is immutable after construction, so values can be shared and
//! sent across threads freely. Construction rejects out-of-range fields.
//!
//! Conventions fixed here and used everywhere else:
//!
//! - `kappa = pi c / (2 F L)` is the cavity half-linewidth (angular, rad/s).
//! - `gamma = omega_m / (2 Q)` is the amplitude damping rate, so the
//!   displacement-PSD full width at half maximum is `2 gamma` (angular),
//!   i.e. `f_m / Q` in Hz.
//! - Detuning `delta > 0` is the cooling (extra-damping) side.

use crate::constants::SPEED_OF_LIGHT;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("{field}: value {value} outside valid range ({requirement})")]
    OutOfRange {
        field: &'static str,
        value: f64,
        requirement: &'static str,
    },
    #[error("loss budget sums to zero; finesse undefined")]
    DegenerateInput,
}

fn check(
    field: &'static str,
    value: f64,
    ok: bool,
    requirement: &'static str,
) -> Result<(), ParamError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(ParamError::OutOfRange {
            field,
            value,
            requirement,
        })
    }
}

/// Intracavity power build-up convention at resonance.
///
/// The build-up factor relating circulating to input power is not uniquely
/// fixed by the public cavity parameters, so it is configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BuildupConvention {
    /// Circulating power = (2F/pi) * input power at resonance (default).
    #[default]
    TwoFOverPi,
    /// Circulating power = (F/pi) * input power at resonance.
    FOverPi,
}

impl BuildupConvention {
    pub fn factor(&self, finesse: f64) -> f64 {
        match self {
            BuildupConvention::TwoFOverPi => 2.0 * finesse / PI,
            BuildupConvention::FOverPi => finesse / PI,
        }
    }
}

/// Fabry-Perot cavity geometry, loss budget, and pump laser.
#[derive(Debug, Clone, PartialEq)]
pub struct CavityParams {
    length: f64,
    finesse: f64,
    wavelength: f64,
    input_power: f64,
    input_mirror_reflectivity: f64,
    end_mirror_reflectivity: f64,
    extra_loss: f64,
    coupling_efficiency: f64,
    buildup: BuildupConvention,
}

impl CavityParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        length: f64,
        finesse: f64,
        wavelength: f64,
        input_power: f64,
        input_mirror_reflectivity: f64,
        end_mirror_reflectivity: f64,
        extra_loss: f64,
        coupling_efficiency: f64,
        buildup: BuildupConvention,
    ) -> Result<Self, ParamError> {
        check("cavity.length_m", length, length > 0.0, "> 0")?;
        check("cavity.finesse", finesse, finesse > 1.0, "> 1")?;
        check("cavity.wavelength_m", wavelength, wavelength > 0.0, "> 0")?;
        check("laser.power_w", input_power, input_power >= 0.0, ">= 0")?;
        check(
            "cavity.input_mirror_reflectivity",
            input_mirror_reflectivity,
            (0.0..=1.0).contains(&input_mirror_reflectivity),
            "in [0, 1]",
        )?;
        check(
            "cavity.end_mirror_reflectivity",
            end_mirror_reflectivity,
            (0.0..=1.0).contains(&end_mirror_reflectivity),
            "in [0, 1]",
        )?;
        check(
            "cavity.extra_loss",
            extra_loss,
            (0.0..=1.0).contains(&extra_loss),
            "in [0, 1]",
        )?;
        check(
            "cavity.coupling_efficiency",
            coupling_efficiency,
            coupling_efficiency > 0.0 && coupling_efficiency <= 1.0,
            "in (0, 1]",
        )?;
        Ok(Self {
            length,
            finesse,
            wavelength,
            input_power,
            input_mirror_reflectivity,
            end_mirror_reflectivity,
            extra_loss,
            coupling_efficiency,
            buildup,
        })
    }

    /// Geometry/laser-only constructor with the loss budget and coupling left
    /// at the measured defaults (R_in 99.3%, R_end 99.7%, 0.2% extra loss).
    pub fn with_basics(
        length: f64,
        finesse: f64,
        wavelength: f64,
        input_power: f64,
    ) -> Result<Self, ParamError> {
        Self::new(
            length,
            finesse,
            wavelength,
            input_power,
            0.993,
            0.997,
            0.002,
            1.0,
            BuildupConvention::default(),
        )
    }

    /// Same cavity at a different input power.
    pub fn with_input_power(&self, input_power: f64) -> Result<Self, ParamError> {
        check("laser.power_w", input_power, input_power >= 0.0, ">= 0")?;
        let mut c = self.clone();
        c.input_power = input_power;
        Ok(c)
    }

    pub fn length(&self) -> f64 {
        self.length
    }
    pub fn finesse(&self) -> f64 {
        self.finesse
    }
    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }
    pub fn input_power(&self) -> f64 {
        self.input_power
    }
    pub fn input_mirror_reflectivity(&self) -> f64 {
        self.input_mirror_reflectivity
    }
    pub fn end_mirror_reflectivity(&self) -> f64 {
        self.end_mirror_reflectivity
    }
    pub fn extra_loss(&self) -> f64 {
        self.extra_loss
    }
    pub fn coupling_efficiency(&self) -> f64 {
        self.coupling_efficiency
    }
    pub fn buildup_convention(&self) -> BuildupConvention {
        self.buildup
    }

    /// Cavity decay rate (half-linewidth), `kappa = pi c / (2 F L)`, rad/s.
    pub fn kappa(&self) -> f64 {
        derive_kappa(self)
    }

    /// Laser angular frequency `2 pi c / lambda`, rad/s.
    pub fn omega_laser(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.wavelength
    }

    /// Cavity-laser coupling rate `sqrt(2 kappa P / hbar omega_l)`, 1/s.
    pub fn coupling_rate(&self) -> f64 {
        (2.0 * self.kappa() * self.input_power / (crate::constants::HBAR * self.omega_laser()))
            .sqrt()
    }

    /// Resonant intracavity build-up factor under the configured convention.
    pub fn buildup_factor(&self) -> f64 {
        self.buildup.factor(self.finesse)
    }

    /// Detuning change per unit of mirror displacement, `omega_l / L`, rad/s/m.
    pub fn detuning_per_displacement(&self) -> f64 {
        self.omega_laser() / self.length
    }
}

/// Cavity decay rate `kappa = pi c / (2 F L)`, rad/s.
pub fn derive_kappa(cavity: &CavityParams) -> f64 {
    PI * SPEED_OF_LIGHT / (2.0 * cavity.finesse() * cavity.length())
}

/// Finesse from the round-trip loss budget, `2 pi / (T_in + T_end + extra)`.
///
/// Arguments are the input/end mirror transmissions and the residual
/// round-trip loss, each in (0, 1).
pub fn finesse_from_losses(input_t: f64, end_t: f64, extra_loss: f64) -> Result<f64, ParamError> {
    check(
        "input_t",
        input_t,
        (0.0..1.0).contains(&input_t),
        "in [0, 1)",
    )?;
    check("end_t", end_t, (0.0..1.0).contains(&end_t), "in [0, 1)")?;
    check(
        "extra_loss",
        extra_loss,
        (0.0..1.0).contains(&extra_loss),
        "in [0, 1)",
    )?;
    let total = input_t + end_t + extra_loss;
    if total == 0.0 {
        return Err(ParamError::DegenerateInput);
    }
    Ok(2.0 * PI / total)
}

/// Spatial detuning `L delta / omega_l`: the mirror displacement equivalent
/// to an angular detuning `delta`, in meters.
pub fn detuning_spatial(delta: f64, cavity: &CavityParams) -> f64 {
    cavity.length() * delta / cavity.omega_laser()
}

/// One mechanical mode of the micro-mirror.
#[derive(Debug, Clone, PartialEq)]
pub struct MechanicalMode {
    omega_m: f64,
    quality: f64,
    effective_mass: f64,
    bath_temperature: f64,
}

impl MechanicalMode {
    pub fn new(
        omega_m: f64,
        quality: f64,
        effective_mass: f64,
        bath_temperature: f64,
    ) -> Result<Self, ParamError> {
        check("mode.omega_m", omega_m, omega_m > 0.0, "> 0")?;
        check("mode.q", quality, quality > 0.0, "> 0")?;
        check(
            "mode.effective_mass_kg",
            effective_mass,
            effective_mass > 0.0,
            "> 0",
        )?;
        check(
            "mode.bath_temperature_k",
            bath_temperature,
            bath_temperature >= 0.0,
            ">= 0",
        )?;
        Ok(Self {
            omega_m,
            quality,
            effective_mass,
            bath_temperature,
        })
    }

    pub fn from_frequency_hz(
        frequency_hz: f64,
        quality: f64,
        effective_mass: f64,
        bath_temperature: f64,
    ) -> Result<Self, ParamError> {
        Self::new(
            2.0 * PI * frequency_hz,
            quality,
            effective_mass,
            bath_temperature,
        )
    }

    pub fn with_bath_temperature(&self, bath_temperature: f64) -> Result<Self, ParamError> {
        Self::new(
            self.omega_m,
            self.quality,
            self.effective_mass,
            bath_temperature,
        )
    }

    pub fn omega_m(&self) -> f64 {
        self.omega_m
    }
    pub fn frequency_hz(&self) -> f64 {
        self.omega_m / (2.0 * PI)
    }
    pub fn quality(&self) -> f64 {
        self.quality
    }
    pub fn effective_mass(&self) -> f64 {
        self.effective_mass
    }
    pub fn bath_temperature(&self) -> f64 {
        self.bath_temperature
    }

    /// Natural amplitude damping rate (half-width), `omega_m / (2 Q)`, rad/s.
    pub fn gamma(&self) -> f64 {
        self.omega_m / (2.0 * self.quality)
    }

    /// Natural displacement-PSD full width at half maximum in Hz, `f_m / Q`.
    pub fn natural_fwhm_hz(&self) -> f64 {
        self.frequency_hz() / self.quality
    }
}

/// Retarded (photothermal) force model: a force with the same displacement
/// gradient shape as radiation pressure, scaled by `strength_ratio` and
/// low-pass filtered at pole `1 / tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotothermalModel {
    strength_ratio: f64,
    tau: f64,
    enabled: bool,
}

impl PhotothermalModel {
    pub fn new(strength_ratio: f64, tau: f64) -> Result<Self, ParamError> {
        check(
            "photothermal.ratio",
            strength_ratio,
            strength_ratio.is_finite(),
            "finite",
        )?;
        check("photothermal.tau_s", tau, tau > 0.0, "> 0")?;
        Ok(Self {
            strength_ratio,
            tau,
            enabled: true,
        })
    }

    /// Pure radiation pressure: no retarded force.
    pub fn disabled() -> Self {
        Self {
            strength_ratio: 0.0,
            tau: 1.0,
            enabled: false,
        }
    }

    /// Effective strength ratio: 0 when disabled.
    pub fn ratio(&self) -> f64 {
        if self.enabled {
            self.strength_ratio
        } else {
            0.0
        }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
    pub fn enabled(&self) -> bool {
        self.enabled
    }
}

/// One material entry of the Bragg-mirror coating stack.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub material: String,
    /// kg/m^3
    pub density: f64,
    /// single-layer thickness, m
    pub thickness: f64,
    pub layer_count: u32,
    pub refractive_index: f64,
    /// m^2/s
    pub thermal_diffusivity: f64,
}

impl Layer {
    pub fn validate(&self) -> Result<(), ParamError> {
        check(
            "layer.density_kg_m3",
            self.density,
            self.density > 0.0,
            "> 0",
        )?;
        check(
            "layer.thickness_m",
            self.thickness,
            self.thickness > 0.0,
            "> 0",
        )?;
        check(
            "layer.count",
            self.layer_count as f64,
            self.layer_count > 0,
            "> 0",
        )?;
        check(
            "layer.refractive_index",
            self.refractive_index,
            self.refractive_index > 0.0,
            "> 0",
        )?;
        check(
            "layer.diffusivity_m2_s",
            self.thermal_diffusivity,
            self.thermal_diffusivity > 0.0,
            "> 0",
        )?;
        Ok(())
    }
}

/// The coating stack; at least two materials.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerStack {
    layers: Vec<Layer>,
}

impl LayerStack {
    pub fn new(layers: Vec<Layer>) -> Result<Self, ParamError> {
        if layers.len() < 2 {
            return Err(ParamError::OutOfRange {
                field: "layer stack",
                value: layers.len() as f64,
                requirement: "at least two materials",
            });
        }
        for l in &layers {
            l.validate()?;
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Total surface density of the stack, kg/m^2.
    pub fn surface_density(&self) -> f64 {
        self.layers
            .iter()
            .map(|l| l.density * l.thickness * l.layer_count as f64)
            .sum()
    }
}
