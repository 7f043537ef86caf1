//! `optomech sweep`: effective damping, frequency, and cooling ratio across
//! a detuning grid, for one or more input powers.

use crate::error::CliError;
use crate::manifest::ManifestBuilder;
use crate::svg::{render_panels, LinePlot, Series};
use optomech::backaction::{sweep_detuning, SweepRow};
use optomech::config::RunConfig;
use optomech::io::write_sweep_to_path;
use std::path::Path;

pub struct SweepArgs {
    pub delta_min: f64,
    pub delta_max: f64,
    pub points: usize,
    pub powers_w: Vec<f64>,
    pub seed: u64,
    pub svg: bool,
}

pub fn run(cfg: &RunConfig, args: &SweepArgs, out_dir: &Path) -> Result<(), CliError> {
    if args.points < 2 {
        return Err(CliError::Validation("need at least 2 sweep points".into()));
    }
    if args.delta_max <= args.delta_min {
        return Err(CliError::Validation("delta range is empty".into()));
    }
    std::fs::create_dir_all(out_dir)?;
    let mut manifest = ManifestBuilder::new("sweep", args.seed, &cfg.source_text);

    let base_cavity = cfg.cavity()?;
    let mode = cfg.mode()?;
    let pt = cfg.photothermal()?;
    let kappa = base_cavity.kappa();
    let deltas: Vec<f64> = (0..args.points)
        .map(|i| {
            let u = args.delta_min
                + (args.delta_max - args.delta_min) * i as f64 / (args.points - 1) as f64;
            u * kappa
        })
        .collect();

    let powers = if args.powers_w.is_empty() {
        vec![cfg.laser_power_w]
    } else {
        args.powers_w.clone()
    };

    let mut all_rows: Vec<SweepRow> = Vec::new();
    for &p in &powers {
        let cavity = base_cavity.with_input_power(p)?;
        all_rows.extend(sweep_detuning(&deltas, &cavity, &mode, &pt));
    }

    write_sweep_to_path(&out_dir.join("sweep.csv"), &all_rows, &mode)?;
    manifest.add_output("sweep.csv");

    if args.svg {
        let mut width_series = Vec::new();
        let mut cooling_series = Vec::new();
        for &p in &powers {
            let rows: Vec<&SweepRow> = all_rows.iter().filter(|r| r.power_w == p).collect();
            width_series.push(Series {
                label: format!("{} mW", p * 1e3),
                points: rows
                    .iter()
                    .map(|r| {
                        (
                            r.delta_over_kappa,
                            r.dynamics.as_ref().map(|d| d.fwhm_hz()).unwrap_or(f64::NAN),
                        )
                    })
                    .collect(),
            });
            cooling_series.push(Series {
                label: format!("{} mW", p * 1e3),
                points: rows
                    .iter()
                    .map(|r| {
                        let ratio = r
                            .dynamics
                            .as_ref()
                            .map(|d| d.cooling_ratio_pred)
                            .unwrap_or(f64::NAN);
                        (r.delta_over_kappa, ratio)
                    })
                    .collect(),
            });
        }
        let svg = render_panels(&[
            LinePlot {
                title: "mode width vs detuning".into(),
                x_label: "detuning / kappa".into(),
                y_label: "FWHM (Hz)".into(),
                series: width_series,
            },
            LinePlot {
                title: "cooling ratio vs detuning".into(),
                x_label: "detuning / kappa".into(),
                y_label: "T_bath / T_eff".into(),
                series: cooling_series,
            },
        ]);
        std::fs::write(out_dir.join("sweep.svg"), svg)?;
        manifest.add_output("sweep.svg");
    }

    manifest.write(out_dir)?;
    let stable = all_rows.iter().filter(|r| r.stable()).count();
    println!(
        "sweep: {} points x {} powers, {} stable rows -> {}",
        deltas.len(),
        powers.len(),
        stable,
        out_dir.display()
    );
    Ok(())
}
