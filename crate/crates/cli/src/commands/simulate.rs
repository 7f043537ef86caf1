//! `optomech simulate`: a seeded ensemble of thermal runs at one detuning,
//! reduced to an averaged spectrum, a Lorentzian fit, and an effective
//! temperature. Writes the traces (binary), the averaged PSD, the fit, a
//! one-row summary, and the manifest.

use crate::error::CliError;
use crate::manifest::ManifestBuilder;
use crate::svg::{render_panels, LinePlot, Series};
use optomech::backaction::effective_damping;
use optomech::config::RunConfig;
use optomech::constants::BOLTZMANN;
use optomech::estimation::{estimate_psd, fit_lorentzian, FitOptions, Window};
use optomech::io::{write_fits_to_path, write_spectrum_to_path, write_trace_binary_to_path};
use optomech::langevin::{run_seed, SimOptions, Simulator};
use optomech::spectra::average_spectra;
use std::io::Write;
use std::path::Path;

pub struct SimulateArgs {
    pub delta_over_kappa: f64,
    pub runs: usize,
    pub duration_s: f64,
    pub samples_per_period: usize,
    pub store_decimation: usize,
    pub seed: u64,
    pub svg: bool,
}

pub fn run(cfg: &RunConfig, args: &SimulateArgs, out_dir: &Path) -> Result<(), CliError> {
    if args.runs == 0 {
        return Err(CliError::Validation("need at least one run".into()));
    }
    std::fs::create_dir_all(out_dir)?;
    let traces_dir = out_dir.join("traces");
    std::fs::create_dir_all(&traces_dir)?;
    let mut manifest = ManifestBuilder::new("simulate", args.seed, &cfg.source_text);

    let cavity = cfg.cavity()?;
    let mode = cfg.mode()?;
    let pt = cfg.photothermal()?;
    let delta = args.delta_over_kappa * cavity.kappa();
    let dynamics = effective_damping(delta, &cavity, &mode, &pt)?;

    let dt = 1.0 / (args.samples_per_period as f64 * mode.frequency_hz());
    let opts = SimOptions::new(args.duration_s, dt).with_stride(args.store_decimation.max(1));
    let sim = Simulator::new(cavity.clone(), mode.clone(), pt.clone(), delta);

    // simulate, persist every trace, and collect per-run spectra
    let fs = 1.0 / (dt * opts.record_stride as f64);
    let total = (args.duration_s / (dt * opts.record_stride as f64)) as usize;
    let segment = segment_for(dynamics.fwhm_hz().max(1.0 / args.duration_s), fs, total);
    let mut spectra = Vec::with_capacity(args.runs);
    for i in 0..args.runs {
        let trace = sim.simulate_opts(opts, run_seed(args.seed, i))?;
        let name = format!("traces/trace_{i:03}.bin");
        write_trace_binary_to_path(&out_dir.join(&name), &trace)?;
        manifest.add_output(&name);
        spectra.push(estimate_psd(&trace, segment, 0.5, Window::Hann)?);
    }
    let psd = average_spectra(&spectra)?;
    write_spectrum_to_path(
        &out_dir.join("psd.csv"),
        &psd,
        &[
            ("delta_over_kappa", format!("{}", args.delta_over_kappa)),
            ("power_w", format!("{}", cavity.input_power())),
            ("runs", format!("{}", args.runs)),
            ("duration_s", format!("{}", args.duration_s)),
            ("seed", format!("{}", args.seed)),
        ],
    )?;
    manifest.add_output("psd.csv");

    // fit a window around the predicted resonance
    let f0 = dynamics.frequency_hz();
    let span = 15.0 * dynamics.fwhm_hz();
    let windowed = psd.sliced((f0 - span).max(0.0), f0 + span)?;
    let fit = fit_lorentzian(&windowed, None, FitOptions::default())?;
    write_fits_to_path(&out_dir.join("fit.csv"), std::slice::from_ref(&fit))?;
    manifest.add_output("fit.csv");

    let t_eff = mode.effective_mass() * mode.omega_m().powi(2) * fit.area / BOLTZMANN;
    let t_pred = mode.bath_temperature() / dynamics.cooling_ratio_pred;
    {
        let mut f = std::fs::File::create(out_dir.join("summary.csv"))?;
        writeln!(
            f,
            "delta_over_kappa,power_w,fitted_center_hz,fitted_fwhm_hz,fitted_area,t_eff_k,predicted_fwhm_hz,predicted_t_eff_k"
        )?;
        writeln!(
            f,
            "{},{},{},{},{},{},{},{}",
            args.delta_over_kappa,
            cavity.input_power(),
            fit.center_hz,
            fit.fwhm_hz,
            fit.area,
            t_eff,
            dynamics.fwhm_hz(),
            t_pred
        )?;
    }
    manifest.add_output("summary.csv");

    if args.svg {
        let series = Series {
            label: format!("{} runs averaged", args.runs),
            points: windowed
                .frequencies_hz()
                .iter()
                .zip(windowed.values())
                .map(|(f, v)| (*f, *v))
                .collect(),
        };
        let svg = render_panels(&[LinePlot {
            title: format!(
                "displacement PSD at delta = {} kappa",
                args.delta_over_kappa
            ),
            x_label: "frequency (Hz)".into(),
            y_label: "PSD (m^2/Hz)".into(),
            series: vec![series],
        }]);
        std::fs::write(out_dir.join("psd.svg"), svg)?;
        manifest.add_output("psd.svg");
    }

    manifest.write(out_dir)?;
    println!(
        "simulate: {} runs, fitted FWHM {:.1} Hz (predicted {:.1} Hz), T_eff {:.1} K (predicted {:.1} K) -> {}",
        args.runs,
        fit.fwhm_hz,
        dynamics.fwhm_hz(),
        t_eff,
        t_pred,
        out_dir.display()
    );
    Ok(())
}

fn segment_for(fwhm_hz: f64, fs: f64, total_samples: usize) -> usize {
    let target = (30.0 / fwhm_hz * fs) as usize;
    let mut n = target.next_power_of_two();
    while n > total_samples / 4 && n > 1024 {
        n /= 2;
    }
    n.clamp(256, total_samples.max(256))
}
