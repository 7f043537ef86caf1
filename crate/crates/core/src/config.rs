//! Plain-text run configuration: line-oriented `key = value` with units in
//! the key names. Blank lines and `#` comments are ignored; unknown keys are
//! errors carrying the line number. Missing keys fall back to the built-in
//! defaults (the measured parameters of the experiment; see
//! `RunConfig::default`).

use crate::modes::{BeamModeModel, LongitudinalFamily, ProbeProfile, TransverseModel};
use crate::params::{
    BuildupConvention, CavityParams, Layer, LayerStack, MechanicalMode, ParamError,
    PhotothermalModel,
};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    BadSyntax { line: usize, text: String },
    #[error("line {line}: cannot parse `{value}` for `{key}`: {reason}")]
    BadValue {
        line: usize,
        key: String,
        value: String,
        reason: String,
    },
    #[error("invalid parameter: {0}")]
    Param(#[from] ParamError),
    #[error("invalid beam model: {0}")]
    Beam(#[from] crate::modes::ModesError),
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
}

/// Everything a run needs, with the raw text retained for manifests.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub cavity_length_m: f64,
    pub cavity_finesse: f64,
    pub wavelength_m: f64,
    pub input_mirror_reflectivity: f64,
    pub end_mirror_reflectivity: f64,
    pub extra_loss: f64,
    pub coupling_efficiency: f64,
    pub buildup_convention: BuildupConvention,
    pub laser_power_w: f64,
    pub pdh_modulation_hz: f64,
    pub mode_frequency_hz: f64,
    pub mode_q: f64,
    pub mode_effective_mass_kg: f64,
    pub bath_temperature_k: f64,
    pub photothermal_enabled: bool,
    pub photothermal_ratio: f64,
    pub photothermal_tau_s: f64,
    pub photothermal_zeta: f64,
    pub beam_length_m: f64,
    pub beam_width_m: f64,
    pub beam_mode_index: u32,
    pub beam_longitudinal: LongitudinalFamily,
    pub beam_transverse: TransverseModel,
    pub beam_dead_fraction: f64,
    pub probe_waist_m: f64,
    pub probe_x_m: Option<f64>,
    pub probe_y_m: Option<f64>,
    pub layers: Vec<Layer>,
    /// original config text (empty for built-in defaults)
    pub source_text: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            cavity_length_m: 0.025,
            cavity_finesse: 500.0,
            wavelength_m: 1.064e-6,
            input_mirror_reflectivity: 0.993,
            end_mirror_reflectivity: 0.997,
            extra_loss: 0.002,
            coupling_efficiency: 1.0,
            buildup_convention: BuildupConvention::TwoFOverPi,
            laser_power_w: 2e-3,
            pdh_modulation_hz: 19e6,
            mode_frequency_hz: 280e3,
            mode_q: 8750.0,
            mode_effective_mass_kg: 22e-12,
            bath_temperature_k: 300.0,
            photothermal_enabled: false,
            photothermal_ratio: 0.0,
            photothermal_tau_s: 3.8e-9,
            photothermal_zeta: 1.0,
            beam_length_m: 490e-6,
            beam_width_m: 110e-6,
            beam_mode_index: 1,
            beam_longitudinal: LongitudinalFamily::TensionString,
            beam_transverse: TransverseModel::OneSideClamped,
            beam_dead_fraction: 0.3,
            probe_waist_m: 10e-6,
            probe_x_m: None,
            probe_y_m: None,
            layers: vec![
                Layer {
                    material: "SiO2".into(),
                    density: 2200.0,
                    thickness: 183.45e-9,
                    layer_count: 8,
                    refractive_index: 1.45,
                    thermal_diffusivity: 0.086e-4,
                },
                Layer {
                    material: "TiO2".into(),
                    density: 4200.0,
                    thickness: 107.26e-9,
                    layer_count: 9,
                    refractive_index: 2.48,
                    thermal_diffusivity: 0.031e-4,
                },
            ],
            source_text: String::new(),
        }
    }
}

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    value.parse::<f64>().map_err(|e| ConfigError::BadValue {
        line,
        key: key.to_string(),
        value: value.to_string(),
        reason: e.to_string(),
    })
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(ConfigError::BadValue {
            line,
            key: key.to_string(),
            value: value.to_string(),
            reason: "expected true/false".to_string(),
        }),
    }
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_str_source(&text)
    }

    pub fn from_str_source(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig {
            source_text: text.to_string(),
            ..RunConfig::default()
        };
        // layer entries are collected per index and materialized afterwards
        let mut layer_fields: BTreeMap<u32, BTreeMap<String, (usize, String)>> = BTreeMap::new();
        let mut saw_layer = false;

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let stripped = raw.split('#').next().unwrap_or("").trim();
            if stripped.is_empty() {
                continue;
            }
            let Some((key, value)) = stripped.split_once('=') else {
                return Err(ConfigError::BadSyntax {
                    line,
                    text: raw.trim().to_string(),
                });
            };
            let key = key.trim();
            let value = value.trim();

            if let Some(rest) = key.strip_prefix("layer.") {
                let Some((index_text, field)) = rest.split_once('.') else {
                    return Err(ConfigError::UnknownKey {
                        line,
                        key: key.to_string(),
                    });
                };
                let index: u32 = index_text.parse().map_err(|_| ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                })?;
                if !matches!(
                    field,
                    "name"
                        | "density_kg_m3"
                        | "thickness_m"
                        | "count"
                        | "refractive_index"
                        | "diffusivity_m2_s"
                ) {
                    return Err(ConfigError::UnknownKey {
                        line,
                        key: key.to_string(),
                    });
                }
                saw_layer = true;
                layer_fields
                    .entry(index)
                    .or_default()
                    .insert(field.to_string(), (line, value.to_string()));
                continue;
            }

            match key {
                "cavity.length_m" => cfg.cavity_length_m = parse_f64(line, key, value)?,
                "cavity.finesse" => cfg.cavity_finesse = parse_f64(line, key, value)?,
                "cavity.wavelength_m" => cfg.wavelength_m = parse_f64(line, key, value)?,
                "cavity.input_mirror_reflectivity" => {
                    cfg.input_mirror_reflectivity = parse_f64(line, key, value)?
                }
                "cavity.end_mirror_reflectivity" => {
                    cfg.end_mirror_reflectivity = parse_f64(line, key, value)?
                }
                "cavity.extra_loss" => cfg.extra_loss = parse_f64(line, key, value)?,
                "cavity.coupling_efficiency" => {
                    cfg.coupling_efficiency = parse_f64(line, key, value)?
                }
                "cavity.buildup_convention" => {
                    cfg.buildup_convention = match value {
                        "two_f_over_pi" => BuildupConvention::TwoFOverPi,
                        "f_over_pi" => BuildupConvention::FOverPi,
                        _ => {
                            return Err(ConfigError::BadValue {
                                line,
                                key: key.to_string(),
                                value: value.to_string(),
                                reason: "expected two_f_over_pi or f_over_pi".to_string(),
                            })
                        }
                    }
                }
                "laser.power_w" => cfg.laser_power_w = parse_f64(line, key, value)?,
                "laser.pdh_modulation_hz" => cfg.pdh_modulation_hz = parse_f64(line, key, value)?,
                "mode.frequency_hz" => cfg.mode_frequency_hz = parse_f64(line, key, value)?,
                "mode.q" => cfg.mode_q = parse_f64(line, key, value)?,
                "mode.effective_mass_kg" => {
                    cfg.mode_effective_mass_kg = parse_f64(line, key, value)?
                }
                "mode.bath_temperature_k" => cfg.bath_temperature_k = parse_f64(line, key, value)?,
                "photothermal.enabled" => cfg.photothermal_enabled = parse_bool(line, key, value)?,
                "photothermal.ratio" => cfg.photothermal_ratio = parse_f64(line, key, value)?,
                "photothermal.tau_s" => cfg.photothermal_tau_s = parse_f64(line, key, value)?,
                "photothermal.zeta" => cfg.photothermal_zeta = parse_f64(line, key, value)?,
                "beam.length_m" => cfg.beam_length_m = parse_f64(line, key, value)?,
                "beam.width_m" => cfg.beam_width_m = parse_f64(line, key, value)?,
                "beam.mode_index" => {
                    cfg.beam_mode_index = value.parse().map_err(|_| ConfigError::BadValue {
                        line,
                        key: key.to_string(),
                        value: value.to_string(),
                        reason: "expected a positive integer".to_string(),
                    })?
                }
                "beam.longitudinal" => {
                    cfg.beam_longitudinal = match value {
                        "tension_string" => LongitudinalFamily::TensionString,
                        "clamped_beam" => LongitudinalFamily::ClampedClampedBeam,
                        _ => {
                            return Err(ConfigError::BadValue {
                                line,
                                key: key.to_string(),
                                value: value.to_string(),
                                reason: "expected tension_string or clamped_beam".to_string(),
                            })
                        }
                    }
                }
                "beam.transverse" => {
                    cfg.beam_transverse = match value {
                        "uniform" => TransverseModel::Uniform,
                        "one_side_clamped" => TransverseModel::OneSideClamped,
                        _ => {
                            return Err(ConfigError::BadValue {
                                line,
                                key: key.to_string(),
                                value: value.to_string(),
                                reason: "expected uniform or one_side_clamped".to_string(),
                            })
                        }
                    }
                }
                "beam.dead_fraction" => cfg.beam_dead_fraction = parse_f64(line, key, value)?,
                "probe.waist_m" => cfg.probe_waist_m = parse_f64(line, key, value)?,
                "probe.x_m" => cfg.probe_x_m = Some(parse_f64(line, key, value)?),
                "probe.y_m" => cfg.probe_y_m = Some(parse_f64(line, key, value)?),
                _ => {
                    return Err(ConfigError::UnknownKey {
                        line,
                        key: key.to_string(),
                    })
                }
            }
        }

        if saw_layer {
            let mut layers = Vec::new();
            for (index, fields) in layer_fields {
                let get = |field: &str| -> Result<(usize, String), ConfigError> {
                    fields
                        .get(field)
                        .cloned()
                        .ok_or_else(|| ConfigError::BadValue {
                            line: fields.values().next().map(|(l, _)| *l).unwrap_or(0),
                            key: format!("layer.{index}.{field}"),
                            value: String::new(),
                            reason: "missing field for this layer".to_string(),
                        })
                };
                let name = get("name")?.1;
                let (l, v) = get("density_kg_m3")?;
                let density = parse_f64(l, "density_kg_m3", &v)?;
                let (l, v) = get("thickness_m")?;
                let thickness = parse_f64(l, "thickness_m", &v)?;
                let (l, v) = get("count")?;
                let layer_count = v.parse::<u32>().map_err(|e| ConfigError::BadValue {
                    line: l,
                    key: format!("layer.{index}.count"),
                    value: v.clone(),
                    reason: e.to_string(),
                })?;
                let (l, v) = get("refractive_index")?;
                let refractive_index = parse_f64(l, "refractive_index", &v)?;
                let (l, v) = get("diffusivity_m2_s")?;
                let thermal_diffusivity = parse_f64(l, "diffusivity_m2_s", &v)?;
                layers.push(Layer {
                    material: name,
                    density,
                    thickness,
                    layer_count,
                    refractive_index,
                    thermal_diffusivity,
                });
            }
            cfg.layers = layers;
        }

        // validate by constructing every derived record once
        cfg.cavity()?;
        cfg.mode()?;
        cfg.photothermal()?;
        cfg.layer_stack()?;
        cfg.beam_model().validate()?;
        Ok(cfg)
    }

    pub fn cavity(&self) -> Result<CavityParams, ParamError> {
        CavityParams::new(
            self.cavity_length_m,
            self.cavity_finesse,
            self.wavelength_m,
            self.laser_power_w,
            self.input_mirror_reflectivity,
            self.end_mirror_reflectivity,
            self.extra_loss,
            self.coupling_efficiency,
            self.buildup_convention,
        )
    }

    pub fn mode(&self) -> Result<MechanicalMode, ParamError> {
        MechanicalMode::from_frequency_hz(
            self.mode_frequency_hz,
            self.mode_q,
            self.mode_effective_mass_kg,
            self.bath_temperature_k,
        )
    }

    pub fn photothermal(&self) -> Result<PhotothermalModel, ParamError> {
        if self.photothermal_enabled {
            PhotothermalModel::new(self.photothermal_ratio, self.photothermal_tau_s)
        } else {
            Ok(PhotothermalModel::disabled())
        }
    }

    pub fn layer_stack(&self) -> Result<LayerStack, ParamError> {
        LayerStack::new(self.layers.clone())
    }

    pub fn beam_model(&self) -> BeamModeModel {
        BeamModeModel {
            length: self.beam_length_m,
            width: self.beam_width_m,
            surface_density: self
                .layer_stack()
                .map(|s| s.surface_density())
                .unwrap_or(7.283e-3),
            mode_index: self.beam_mode_index,
            longitudinal: self.beam_longitudinal,
            transverse: self.beam_transverse,
            dead_fraction: self.beam_dead_fraction,
        }
    }

    /// Probe profile; defaults to the mode antinode (length midpoint, free
    /// edge of the width) when no position is configured.
    pub fn probe(&self) -> ProbeProfile {
        ProbeProfile {
            waist: self.probe_waist_m,
            x: self.probe_x_m.unwrap_or(self.beam_length_m / 2.0),
            y: self.probe_y_m.unwrap_or(self.beam_width_m),
        }
    }
}
