//! Beam mechanics and thermal-transport estimates: doubly-clamped mode
//! shapes, synthetic tomography and mode fitting, effective mass against a
//! Gaussian probe, and the photothermal thermalisation time of the coating.
//!
//! The mirror is a rectangle `[0, L] x [0, W]`. Longitudinal shapes are
//! either tension-string sinusoids (the default: the measured overtone
//! frequencies are nearly harmonic) or clamped-clamped Euler-Bernoulli
//! shapes. Across the width, a strip of `dead_fraction * W` on the `y = 0`
//! side does not vibrate, and the live region either moves uniformly or
//! follows the clamped-free (one-side-clamped) fundamental, rising from the
//! dead boundary to the free edge. Shapes are normalized to `max |u| = 1`.

use crate::numeric::golden_section_max;
use crate::params::LayerStack;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModesError {
    #[error("point ({x}, {y}) outside the mirror rectangle")]
    OutOfBounds { x: f64, y: f64 },
    #[error("probe overlaps a node: effective mass diverges")]
    NodeDivergence,
    #[error("mode indices {0} and {1} fit within 5% residual of each other")]
    Ambiguous(u32, u32),
    #[error("need at least {need} scan points, got {got}")]
    InsufficientData { need: usize, got: usize },
    #[error("invalid model: {0}")]
    InvalidModel(String),
}

/// Longitudinal mode family along the beam length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LongitudinalFamily {
    /// Tension-dominated vibration: `sin(n pi x / L)`, harmonic overtones.
    #[default]
    TensionString,
    /// Clamped-clamped Euler-Bernoulli beam shapes.
    ClampedClampedBeam,
}

/// Transverse behavior across the width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransverseModel {
    /// The live region moves as a whole.
    Uniform,
    /// Clamped at the dead-strip boundary, free at the far edge: the
    /// clamped-free beam fundamental across the live width.
    #[default]
    OneSideClamped,
}

/// Geometry and shape model of one vibrational mode.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamModeModel {
    pub length: f64,
    pub width: f64,
    /// kg/m^2
    pub surface_density: f64,
    /// 1-based longitudinal mode index
    pub mode_index: u32,
    pub longitudinal: LongitudinalFamily,
    pub transverse: TransverseModel,
    /// fraction of the width (on the y = 0 side) that does not vibrate
    pub dead_fraction: f64,
}

impl BeamModeModel {
    pub fn validate(&self) -> Result<(), ModesError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.length) || !positive(self.width) || !positive(self.surface_density) {
            return Err(ModesError::InvalidModel(
                "dimensions and surface density must be positive".into(),
            ));
        }
        if self.mode_index < 1 {
            return Err(ModesError::InvalidModel("mode index starts at 1".into()));
        }
        if !(0.0..=0.5).contains(&self.dead_fraction) {
            return Err(ModesError::InvalidModel(
                "dead fraction must lie in [0, 0.5]".into(),
            ));
        }
        Ok(())
    }

    /// Total mass of the full rectangle, kg.
    pub fn total_mass(&self) -> f64 {
        self.surface_density * self.length * self.width
    }
}

/// Roots of the clamped-clamped characteristic equation `cos k cosh k = 1`.
fn clamped_clamped_k(n: u32) -> f64 {
    match n {
        1 => 4.730040744862704,
        2 => 7.853204624095838,
        3 => 10.995607838001671,
        _ => (2 * n + 1) as f64 * std::f64::consts::FRAC_PI_2,
    }
}

/// Fundamental root of the clamped-free equation `cos k cosh k = -1`.
const CLAMPED_FREE_K1: f64 = 1.8751040687119611;

fn clamped_clamped_shape(s: f64, k: f64) -> f64 {
    let sigma = (k.cosh() - k.cos()) / (k.sinh() - k.sin());
    (k * s).cosh() - (k * s).cos() - sigma * ((k * s).sinh() - (k * s).sin())
}

fn clamped_free_shape(s: f64, k: f64) -> f64 {
    let sigma = (k.cosh() + k.cos()) / (k.sinh() + k.sin());
    (k * s).cosh() - (k * s).cos() - sigma * ((k * s).sinh() - (k * s).sin())
}

/// Frequency of longitudinal overtone `n` relative to the fundamental:
/// `n` for a string, `(k_n / k_1)^2` for a clamped-clamped beam.
pub fn frequency_ratio(family: LongitudinalFamily, n: u32) -> f64 {
    match family {
        LongitudinalFamily::TensionString => n as f64,
        LongitudinalFamily::ClampedClampedBeam => {
            let r = clamped_clamped_k(n) / clamped_clamped_k(1);
            r * r
        }
    }
}

/// Normalized shape evaluator for one model; built once, evaluated many times.
struct ShapeEvaluator {
    length: f64,
    width: f64,
    dead: f64,
    mode_index: u32,
    longitudinal: LongitudinalFamily,
    transverse: TransverseModel,
    long_norm: f64,
    trans_norm: f64,
}

impl ShapeEvaluator {
    fn new(model: &BeamModeModel) -> Self {
        let long_norm = match model.longitudinal {
            LongitudinalFamily::TensionString => 1.0,
            LongitudinalFamily::ClampedClampedBeam => {
                let k = clamped_clamped_k(model.mode_index);
                let mut max = 0.0f64;
                for i in 0..=2048 {
                    let s = i as f64 / 2048.0;
                    max = max.max(clamped_clamped_shape(s, k).abs());
                }
                max
            }
        };
        let trans_norm = match model.transverse {
            TransverseModel::Uniform => 1.0,
            // monotone on [0, 1]: the maximum is the free-end value
            TransverseModel::OneSideClamped => clamped_free_shape(1.0, CLAMPED_FREE_K1),
        };
        Self {
            length: model.length,
            width: model.width,
            dead: model.dead_fraction,
            mode_index: model.mode_index,
            longitudinal: model.longitudinal,
            transverse: model.transverse,
            long_norm,
            trans_norm,
        }
    }

    fn longitudinal_at(&self, xi: f64) -> f64 {
        match self.longitudinal {
            LongitudinalFamily::TensionString => {
                (self.mode_index as f64 * std::f64::consts::PI * xi).sin()
            }
            LongitudinalFamily::ClampedClampedBeam => {
                clamped_clamped_shape(xi, clamped_clamped_k(self.mode_index)) / self.long_norm
            }
        }
    }

    fn transverse_at(&self, eta: f64) -> f64 {
        if eta < self.dead {
            return 0.0;
        }
        let live = 1.0 - self.dead;
        let s = if live > 0.0 {
            (eta - self.dead) / live
        } else {
            0.0
        };
        match self.transverse {
            TransverseModel::Uniform => 1.0,
            TransverseModel::OneSideClamped => {
                clamped_free_shape(s, CLAMPED_FREE_K1) / self.trans_norm
            }
        }
    }

    fn at(&self, x: f64, y: f64) -> f64 {
        self.longitudinal_at(x / self.length) * self.transverse_at(y / self.width)
    }
}

/// Dimensionless mode amplitude at a point of the mirror surface.
pub fn mode_shape(model: &BeamModeModel, x: f64, y: f64) -> Result<f64, ModesError> {
    model.validate()?;
    if !(0.0..=model.length).contains(&x) || !(0.0..=model.width).contains(&y) {
        return Err(ModesError::OutOfBounds { x, y });
    }
    Ok(ShapeEvaluator::new(model).at(x, y))
}

/// Optical probe: Gaussian intensity profile of 1/e^2 radius `waist`
/// centered at `(x, y)`; `waist = 0` is an ideal point probe. The intensity
/// profile is normalized so its surface integral is one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeProfile {
    pub waist: f64,
    pub x: f64,
    pub y: f64,
}

impl ProbeProfile {
    pub fn point(x: f64, y: f64) -> Self {
        Self { waist: 0.0, x, y }
    }
}

fn mean_square_shape(eval: &ShapeEvaluator, n: usize) -> f64 {
    // trapezoid over the full rectangle; the dead strip contributes zeros
    let (lx, ly) = (eval.length, eval.width);
    let mut area = 0.0;
    for i in 0..=n {
        let wx = if i == 0 || i == n { 0.5 } else { 1.0 };
        let xi = i as f64 / n as f64;
        let ux = eval.longitudinal_at(xi);
        let mut row = 0.0;
        for j in 0..=n {
            let wy = if j == 0 || j == n { 0.5 } else { 1.0 };
            let uy = eval.transverse_at(j as f64 / n as f64);
            let u = ux * uy;
            row += wy * u * u;
        }
        area += wx * row;
    }
    area * (lx / n as f64) * (ly / n as f64)
}

/// Probe-weighted mode amplitude `<u, v^2>` for the normalized intensity
/// profile: the Gaussian-weighted mean of the shape over the surface.
fn probe_overlap(eval: &ShapeEvaluator, probe: &ProbeProfile, n: usize) -> f64 {
    if probe.waist == 0.0 {
        return eval.at(probe.x, probe.y);
    }
    let w = probe.waist;
    let x_lo = (probe.x - 6.0 * w).max(0.0);
    let x_hi = (probe.x + 6.0 * w).min(eval.length);
    let y_lo = (probe.y - 6.0 * w).max(0.0);
    let y_hi = (probe.y + 6.0 * w).min(eval.width);
    let mut norm = 0.0;
    let mut overlap = 0.0;
    for i in 0..=n {
        let wx = if i == 0 || i == n { 0.5 } else { 1.0 };
        let x = x_lo + (x_hi - x_lo) * i as f64 / n as f64;
        let dx2 = (x - probe.x) * (x - probe.x);
        for j in 0..=n {
            let wy = if j == 0 || j == n { 0.5 } else { 1.0 };
            let y = y_lo + (y_hi - y_lo) * j as f64 / n as f64;
            let dy2 = (y - probe.y) * (y - probe.y);
            let g = (-2.0 * (dx2 + dy2) / (w * w)).exp();
            norm += wx * wy * g;
            overlap += wx * wy * g * eval.at(x, y);
        }
    }
    overlap / norm
}

/// Effective mass seen by the probe, `rho_s <u^2> / <u, v^2>^2`, by 2D
/// trapezoidal quadrature at the given per-axis resolution.
pub fn effective_mass_with_resolution(
    model: &BeamModeModel,
    probe: &ProbeProfile,
    resolution: usize,
) -> Result<f64, ModesError> {
    model.validate()?;
    if !(0.0..=model.length).contains(&probe.x) || !(0.0..=model.width).contains(&probe.y) {
        return Err(ModesError::OutOfBounds {
            x: probe.x,
            y: probe.y,
        });
    }
    let n = resolution.max(64);
    let eval = ShapeEvaluator::new(model);
    let u_sq = mean_square_shape(&eval, n);
    let overlap = probe_overlap(&eval, probe, n);
    if overlap * overlap < 1e-12 * u_sq {
        return Err(ModesError::NodeDivergence);
    }
    Ok(model.surface_density * u_sq / (overlap * overlap))
}

/// [`effective_mass_with_resolution`] at the default 256 x 256 quadrature.
pub fn effective_mass(model: &BeamModeModel, probe: &ProbeProfile) -> Result<f64, ModesError> {
    effective_mass_with_resolution(model, probe, 256)
}

/// Mass magnification at the probe relative to the vibrating region:
/// `M_eff / (rho_s * A_live)`, the mean-square-to-probe localization ratio.
pub fn mass_magnification(model: &BeamModeModel, probe: &ProbeProfile) -> Result<f64, ModesError> {
    let m_eff = effective_mass(model, probe)?;
    let live_mass =
        model.surface_density * model.length * model.width * (1.0 - model.dead_fraction);
    Ok(m_eff / live_mass)
}

/// A point-by-point scan of mean-square displacement.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanDataset {
    /// `(x, y, mean square displacement)` samples
    pub points: Vec<(f64, f64, f64)>,
}

impl ScanDataset {
    pub fn new(points: Vec<(f64, f64, f64)>) -> Self {
        Self { points }
    }
}

/// Synthetic tomography: sample the squared mode shape on an `nx x ny` grid
/// of cell centers with multiplicative Gaussian noise. Deterministic per
/// seed.
pub fn synthesize_tomography(
    model: &BeamModeModel,
    nx: usize,
    ny: usize,
    noise_level: f64,
    seed: u64,
) -> Result<ScanDataset, ModesError> {
    model.validate()?;
    let eval = ShapeEvaluator::new(model);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(nx * ny);
    for i in 0..nx {
        let x = (i as f64 + 0.5) * model.length / nx as f64;
        for j in 0..ny {
            let y = (j as f64 + 0.5) * model.width / ny as f64;
            let u = eval.at(x, y);
            let xi: f64 = StandardNormal.sample(&mut rng);
            let value = (u * u * (1.0 + noise_level * xi)).max(0.0);
            points.push((x, y, value));
        }
    }
    Ok(ScanDataset::new(points))
}

/// Result of a tomography fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeFit {
    pub model: BeamModeModel,
    pub amplitude: f64,
    pub residual_norm: f64,
}

fn fit_residual(dataset: &ScanDataset, model: &BeamModeModel) -> (f64, f64) {
    let eval = ShapeEvaluator::new(model);
    let mut num = 0.0;
    let mut den = 0.0;
    for &(x, y, d) in &dataset.points {
        let u2 = eval.at(x, y).powi(2);
        num += d * u2;
        den += u2 * u2;
    }
    let amplitude = if den > 0.0 { num / den } else { 0.0 };
    let ssr: f64 = dataset
        .points
        .iter()
        .map(|&(x, y, d)| {
            let r = d - amplitude * eval.at(x, y).powi(2);
            r * r
        })
        .sum();
    (amplitude, ssr.sqrt())
}

/// Fit a mode model to a scan: exhaustive search over mode index {1, 2, 3}
/// and transverse model, with the dead fraction refined continuously and the
/// amplitude solved in closed form. Geometry and the longitudinal family are
/// taken from `base`. Fails as `Ambiguous` when two different mode indices
/// fit within 5% residual of each other.
pub fn fit_mode(dataset: &ScanDataset, base: &BeamModeModel) -> Result<ModeFit, ModesError> {
    if dataset.points.len() < 30 {
        return Err(ModesError::InsufficientData {
            need: 30,
            got: dataset.points.len(),
        });
    }
    base.validate()?;

    let mut best: Option<ModeFit> = None;
    let mut best_per_index: Vec<(u32, f64)> = Vec::new();
    for mode_index in 1..=3u32 {
        let mut index_best: Option<ModeFit> = None;
        for transverse in [TransverseModel::Uniform, TransverseModel::OneSideClamped] {
            // coarse scan then golden refinement of the dead fraction
            let candidate = |dead: f64| BeamModeModel {
                mode_index,
                transverse,
                dead_fraction: dead,
                ..base.clone()
            };
            let mut coarse_best = (0.0, f64::INFINITY);
            for k in 0..=20 {
                let dead = 0.5 * k as f64 / 20.0;
                let (_, r) = fit_residual(dataset, &candidate(dead));
                if r < coarse_best.1 {
                    coarse_best = (dead, r);
                }
            }
            let lo = (coarse_best.0 - 0.05).max(0.0);
            let hi = (coarse_best.0 + 0.05).min(0.5);
            let dead =
                golden_section_max(|d| -fit_residual(dataset, &candidate(d)).1, lo, hi, 1e-4);
            let model = candidate(dead);
            let (amplitude, residual_norm) = fit_residual(dataset, &model);
            let fit = ModeFit {
                model,
                amplitude,
                residual_norm,
            };
            if index_best
                .as_ref()
                .map(|b| fit.residual_norm < b.residual_norm)
                .unwrap_or(true)
            {
                index_best = Some(fit);
            }
        }
        let index_best = index_best.unwrap();
        best_per_index.push((mode_index, index_best.residual_norm));
        if best
            .as_ref()
            .map(|b| index_best.residual_norm < b.residual_norm)
            .unwrap_or(true)
        {
            best = Some(index_best);
        }
    }
    let best = best.unwrap();
    best_per_index.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let (n1, r1) = best_per_index[0];
    let (n2, r2) = best_per_index[1];
    if r2 <= 1.05 * r1 {
        return Err(ModesError::Ambiguous(n1, n2));
    }
    Ok(best)
}

/// Photothermal thermalisation time of the top layer of each of the first
/// two coating materials, `tau = (1/zeta)^2 (L1^2/D1 + L2^2/D2)`.
pub fn photothermal_tau(stack: &LayerStack, zeta: f64) -> f64 {
    let mut seen: Vec<&str> = Vec::new();
    let mut sum = 0.0;
    for layer in stack.layers() {
        if seen.iter().any(|m| *m == layer.material) {
            continue;
        }
        seen.push(&layer.material);
        sum += layer.thickness * layer.thickness / layer.thermal_diffusivity;
        if seen.len() == 2 {
            break;
        }
    }
    sum / (zeta * zeta)
}

/// Heat diffusion length `l_T = zeta sqrt(D tau)`.
pub fn diffusion_length(diffusivity: f64, tau: f64, zeta: f64) -> f64 {
    zeta * (diffusivity * tau).sqrt()
}
