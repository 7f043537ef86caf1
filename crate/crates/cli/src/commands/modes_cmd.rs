//! `optomech modes <shape|tomography|mass|tau>`: beam-mechanics pipelines.

use crate::error::CliError;
use crate::manifest::ManifestBuilder;
use crate::svg::{render_heatmap, render_panels, LinePlot, Series};
use optomech::config::RunConfig;
use optomech::io::write_scan_to_path;
use optomech::modes::{
    diffusion_length, effective_mass, effective_mass_with_resolution, fit_mode, mass_magnification,
    mode_shape, photothermal_tau, synthesize_tomography, BeamModeModel,
};
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModesWhat {
    Shape,
    Tomography,
    Mass,
    Tau,
}

pub struct ModesArgs {
    pub what: ModesWhat,
    pub seed: u64,
    pub noise: f64,
    pub svg: bool,
}

pub fn run(cfg: &RunConfig, args: &ModesArgs, out_dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir)?;
    let mut manifest = ManifestBuilder::new("modes", args.seed, &cfg.source_text);
    let model = cfg.beam_model();
    model.validate()?;
    match args.what {
        ModesWhat::Shape => shape(cfg, &model, args, out_dir, &mut manifest)?,
        ModesWhat::Tomography => tomography(cfg, &model, args, out_dir, &mut manifest)?,
        ModesWhat::Mass => mass(cfg, &model, out_dir, &mut manifest)?,
        ModesWhat::Tau => tau(cfg, out_dir, &mut manifest)?,
    }
    manifest.write(out_dir)?;
    Ok(())
}

fn shape(
    _cfg: &RunConfig,
    model: &BeamModeModel,
    args: &ModesArgs,
    out_dir: &Path,
    manifest: &mut ManifestBuilder,
) -> Result<(), CliError> {
    // longitudinal profiles of the first three modes along the line of
    // maximum transverse amplitude (the free edge)
    let y = model.width * (1.0 - 1e-9);
    let n_points = 241;
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); 4];
    for i in 0..n_points {
        let x = model.length * i as f64 / (n_points - 1) as f64;
        columns[0].push(x);
        for n in 1..=3u32 {
            let m = BeamModeModel {
                mode_index: n,
                ..model.clone()
            };
            columns[n as usize].push(mode_shape(&m, x, y)?);
        }
    }
    let mut f = std::fs::File::create(out_dir.join("shape.csv"))?;
    writeln!(f, "x_m,u_n1,u_n2,u_n3")?;
    for (((x, u1), u2), u3) in columns[0]
        .iter()
        .zip(&columns[1])
        .zip(&columns[2])
        .zip(&columns[3])
    {
        writeln!(f, "{x},{u1},{u2},{u3}")?;
    }
    manifest.add_output("shape.csv");

    if args.svg {
        let series: Vec<Series> = (1..=3)
            .map(|n| Series {
                label: format!("mode {n}"),
                points: columns[0]
                    .iter()
                    .zip(&columns[n])
                    .map(|(x, u)| (*x * 1e6, *u))
                    .collect(),
            })
            .collect();
        let svg = render_panels(&[LinePlot {
            title: "longitudinal mode shapes".into(),
            x_label: "position (um)".into(),
            y_label: "normalized amplitude".into(),
            series,
        }]);
        std::fs::write(out_dir.join("shape.svg"), svg)?;
        manifest.add_output("shape.svg");
    }
    println!("modes shape -> {}", out_dir.display());
    Ok(())
}

fn tomography(
    _cfg: &RunConfig,
    model: &BeamModeModel,
    args: &ModesArgs,
    out_dir: &Path,
    manifest: &mut ManifestBuilder,
) -> Result<(), CliError> {
    // the measured map used a ~15 x 10 mesh over the mirror
    let (nx, ny) = (15, 10);
    let scan = synthesize_tomography(model, nx, ny, args.noise, args.seed)?;
    write_scan_to_path(&out_dir.join("tomography.csv"), &scan)?;
    manifest.add_output("tomography.csv");

    let fit = fit_mode(&scan, model);
    let mut f = std::fs::File::create(out_dir.join("tomography_fit.txt"))?;
    match &fit {
        Ok(m) => {
            writeln!(f, "mode_index = {}", m.model.mode_index)?;
            writeln!(f, "dead_fraction = {:.4}", m.model.dead_fraction)?;
            writeln!(f, "transverse = {:?}", m.model.transverse)?;
            writeln!(f, "amplitude = {:e}", m.amplitude)?;
            writeln!(f, "residual_norm = {:e}", m.residual_norm)?;
        }
        Err(e) => writeln!(f, "fit failed: {e}")?,
    }
    manifest.add_output("tomography_fit.txt");

    if args.svg {
        // values laid out row-major in y
        let mut grid = vec![0.0; nx * ny];
        for (k, &(_, _, v)) in scan.points.iter().enumerate() {
            let (i, j) = (k / ny, k % ny);
            grid[j * nx + i] = v;
        }
        let svg = render_heatmap("mean-square displacement map", nx, ny, &grid);
        std::fs::write(out_dir.join("tomography.svg"), svg)?;
        manifest.add_output("tomography.svg");
    }
    println!(
        "modes tomography ({} points, noise {}) -> {}",
        nx * ny,
        args.noise,
        out_dir.display()
    );
    Ok(())
}

fn mass(
    cfg: &RunConfig,
    model: &BeamModeModel,
    out_dir: &Path,
    manifest: &mut ManifestBuilder,
) -> Result<(), CliError> {
    let probe = cfg.probe();
    let m = effective_mass(model, &probe)?;
    let m_fine = effective_mass_with_resolution(model, &probe, 512)?;
    let quadrature_bound = (m_fine - m).abs();
    let magnification = mass_magnification(model, &probe)?;
    let point = optomech::modes::ProbeProfile::point(probe.x, probe.y);
    let m_point = effective_mass(model, &point)?;

    let mut f = std::fs::File::create(out_dir.join("mass.txt"))?;
    writeln!(f, "effective_mass_kg = {m:e}")?;
    writeln!(f, "effective_mass_ng = {:.3}", m * 1e12)?;
    writeln!(f, "quadrature_error_bound_kg = {quadrature_bound:e}")?;
    writeln!(f, "point_probe_mass_ng = {:.3}", m_point * 1e12)?;
    writeln!(f, "mass_magnification_vs_live_region = {magnification:.4}")?;
    writeln!(f, "total_mass_ng = {:.3}", model.total_mass() * 1e12)?;
    writeln!(f, "probe_waist_m = {:e}", probe.waist)?;
    writeln!(f, "probe_x_m = {:e}", probe.x)?;
    writeln!(f, "probe_y_m = {:e}", probe.y)?;
    manifest.add_output("mass.txt");
    println!(
        "modes mass: {:.2} ng at the probe ({:.2} ng point probe), quadrature bound {:.2e} ng -> {}",
        m * 1e12,
        m_point * 1e12,
        quadrature_bound * 1e12,
        out_dir.display()
    );
    Ok(())
}

fn tau(cfg: &RunConfig, out_dir: &Path, manifest: &mut ManifestBuilder) -> Result<(), CliError> {
    let stack = cfg.layer_stack()?;
    let tau_unit = photothermal_tau(&stack, 1.0);
    let tau_cfg = photothermal_tau(&stack, cfg.photothermal_zeta);
    // geometry factor that would bring the estimate to 4 ns
    let zeta_for_4ns = (tau_unit / 4e-9).sqrt();

    let mut f = std::fs::File::create(out_dir.join("tau.txt"))?;
    writeln!(f, "tau_zeta_1_s = {tau_unit:e}")?;
    writeln!(f, "tau_zeta_1_ns = {:.3}", tau_unit * 1e9)?;
    writeln!(f, "zeta = {}", cfg.photothermal_zeta)?;
    writeln!(f, "tau_at_zeta_s = {tau_cfg:e}")?;
    writeln!(f, "zeta_for_4ns = {zeta_for_4ns:.3}")?;
    for layer in stack.layers() {
        let l_t = diffusion_length(layer.thermal_diffusivity, tau_cfg, cfg.photothermal_zeta);
        writeln!(f, "diffusion_length_{}_m = {l_t:e}", layer.material)?;
    }
    manifest.add_output("tau.txt");
    println!(
        "modes tau: {:.2} ns at zeta = 1 ({:.2} ns at zeta = {}), zeta for 4 ns = {:.2} -> {}",
        tau_unit * 1e9,
        tau_cfg * 1e9,
        cfg.photothermal_zeta,
        zeta_for_4ns,
        out_dir.display()
    );
    Ok(())
}
