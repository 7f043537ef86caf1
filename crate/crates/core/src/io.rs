//! CSV and binary serialization of the value types. Floats are written in
//! Rust's shortest round-trip decimal form, so identical inputs produce
//! byte-identical files.

use crate::backaction::SweepRow;
use crate::estimation::LorentzianFit;
use crate::langevin::{TimeTrace, TraceParams};
use crate::modes::ScanDataset;
use crate::params::MechanicalMode;
use crate::spectra::{Spectrum, SpectrumKind};
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o failure on {path}: {source}")]
    File { path: String, source: io::Error },
    #[error("{0}")]
    Stream(#[from] io::Error),
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("bad trace file: {0}")]
    BadTrace(String),
    #[error("trace sampling is not uniform")]
    NonUniform,
}

fn open_write(path: &Path) -> Result<BufWriter<std::fs::File>, IoError> {
    std::fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|source| IoError::File {
            path: path.display().to_string(),
            source,
        })
}

fn open_read(path: &Path) -> Result<BufReader<std::fs::File>, IoError> {
    std::fs::File::open(path)
        .map(BufReader::new)
        .map_err(|source| IoError::File {
            path: path.display().to_string(),
            source,
        })
}

/// `frequency_hz,psd` rows preceded by `# key = value` comments carrying the
/// spectrum kind and any caller-supplied parameters.
pub fn write_spectrum<W: Write>(
    out: &mut W,
    spectrum: &Spectrum,
    params: &[(&str, String)],
) -> Result<(), IoError> {
    let kind = match spectrum.kind() {
        SpectrumKind::Displacement => "displacement",
        SpectrumKind::PdhReadout => "pdh_readout",
    };
    writeln!(out, "# kind = {kind}")?;
    for (k, v) in params {
        writeln!(out, "# {k} = {v}")?;
    }
    writeln!(out, "frequency_hz,psd")?;
    for (f, v) in spectrum.frequencies_hz().iter().zip(spectrum.values()) {
        writeln!(out, "{f},{v}")?;
    }
    Ok(())
}

pub fn write_spectrum_to_path(
    path: &Path,
    spectrum: &Spectrum,
    params: &[(&str, String)],
) -> Result<(), IoError> {
    let mut w = open_write(path)?;
    write_spectrum(&mut w, spectrum, params)
}

pub fn read_spectrum<R: BufRead>(input: R) -> Result<Spectrum, IoError> {
    let mut kind = SpectrumKind::Displacement;
    let mut freqs = Vec::new();
    let mut values = Vec::new();
    let mut saw_header = false;
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let n = idx + 1;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(comment) = t.strip_prefix('#') {
            if let Some((k, v)) = comment.split_once('=') {
                if k.trim() == "kind" && v.trim() == "pdh_readout" {
                    kind = SpectrumKind::PdhReadout;
                }
            }
            continue;
        }
        if !saw_header {
            if t != "frequency_hz,psd" {
                return Err(IoError::Parse {
                    line: n,
                    reason: format!("expected header, got `{t}`"),
                });
            }
            saw_header = true;
            continue;
        }
        let Some((f, v)) = t.split_once(',') else {
            return Err(IoError::Parse {
                line: n,
                reason: "expected two columns".into(),
            });
        };
        freqs.push(f.parse::<f64>().map_err(|e| IoError::Parse {
            line: n,
            reason: e.to_string(),
        })?);
        values.push(v.parse::<f64>().map_err(|e| IoError::Parse {
            line: n,
            reason: e.to_string(),
        })?);
    }
    Spectrum::new(freqs, values, kind).map_err(|e| IoError::Parse {
        line: 0,
        reason: e.to_string(),
    })
}

pub fn read_spectrum_from_path(path: &Path) -> Result<Spectrum, IoError> {
    read_spectrum(open_read(path)?)
}

/// Sweep CSV schema:
/// `delta_over_kappa,power_w,gamma_eff_hz_fwhm,f_eff_hz,t_eff_k,cooling_ratio,stable`.
/// Unstable-spring rows carry NaN in the undefined columns.
pub fn write_sweep<W: Write>(
    out: &mut W,
    rows: &[SweepRow],
    mode: &MechanicalMode,
) -> Result<(), IoError> {
    writeln!(
        out,
        "delta_over_kappa,power_w,gamma_eff_hz_fwhm,f_eff_hz,t_eff_k,cooling_ratio,stable"
    )?;
    for row in rows {
        let (fwhm, f_eff, t_eff, ratio) = match &row.dynamics {
            Some(d) => (
                d.fwhm_hz(),
                d.frequency_hz(),
                row.t_eff_k(mode),
                d.cooling_ratio_pred,
            ),
            None => (f64::NAN, f64::NAN, f64::NAN, f64::NAN),
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.delta_over_kappa,
            row.power_w,
            fwhm,
            f_eff,
            t_eff,
            ratio,
            row.stable()
        )?;
    }
    Ok(())
}

pub fn write_sweep_to_path(
    path: &Path,
    rows: &[SweepRow],
    mode: &MechanicalMode,
) -> Result<(), IoError> {
    let mut w = open_write(path)?;
    write_sweep(&mut w, rows, mode)
}

/// Fit CSV schema:
/// `center_hz,fwhm_hz,area,offset,err_center,err_fwhm,err_area,converged`.
pub fn write_fits<W: Write>(out: &mut W, fits: &[LorentzianFit]) -> Result<(), IoError> {
    writeln!(
        out,
        "center_hz,fwhm_hz,area,offset,err_center,err_fwhm,err_area,converged"
    )?;
    for f in fits {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            f.center_hz,
            f.fwhm_hz,
            f.area,
            f.offset,
            f.err_center,
            f.err_fwhm,
            f.err_area,
            f.converged
        )?;
    }
    Ok(())
}

pub fn write_fits_to_path(path: &Path, fits: &[LorentzianFit]) -> Result<(), IoError> {
    let mut w = open_write(path)?;
    write_fits(&mut w, fits)
}

/// `time_s,x_m` rows.
pub fn write_trace_csv<W: Write>(out: &mut W, trace: &TimeTrace) -> Result<(), IoError> {
    writeln!(out, "time_s,x_m")?;
    for (i, x) in trace.samples.iter().enumerate() {
        writeln!(out, "{},{}", i as f64 * trace.dt, x)?;
    }
    Ok(())
}

/// Read a `time_s,x_m` record, checking the sampling for uniformity.
pub fn read_trace_csv<R: BufRead>(input: R, params: TraceParams) -> Result<TimeTrace, IoError> {
    let mut times = Vec::new();
    let mut samples = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let n = idx + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') || t == "time_s,x_m" {
            continue;
        }
        let Some((a, b)) = t.split_once(',') else {
            return Err(IoError::Parse {
                line: n,
                reason: "expected two columns".into(),
            });
        };
        times.push(a.parse::<f64>().map_err(|e| IoError::Parse {
            line: n,
            reason: e.to_string(),
        })?);
        samples.push(b.parse::<f64>().map_err(|e| IoError::Parse {
            line: n,
            reason: e.to_string(),
        })?);
    }
    if times.len() < 2 {
        return Err(IoError::BadTrace("need at least two samples".into()));
    }
    let dt = times[1] - times[0];
    for w in times.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.abs().max(1e-300) {
            return Err(IoError::NonUniform);
        }
    }
    Ok(TimeTrace {
        dt,
        samples,
        seed: 0,
        params,
    })
}

const TRACE_MAGIC: &[u8; 8] = b"OMTR0001";

/// Compact binary trace block, little endian:
/// 8-byte magic `OMTR0001`, `dt: f64`, `n: u64`, `seed: u64`, then `n`
/// 8-byte float samples.
pub fn write_trace_binary<W: Write>(out: &mut W, trace: &TimeTrace) -> Result<(), IoError> {
    out.write_all(TRACE_MAGIC)?;
    out.write_all(&trace.dt.to_le_bytes())?;
    out.write_all(&(trace.samples.len() as u64).to_le_bytes())?;
    out.write_all(&trace.seed.to_le_bytes())?;
    for s in &trace.samples {
        out.write_all(&s.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_trace_binary_to_path(path: &Path, trace: &TimeTrace) -> Result<(), IoError> {
    let mut w = open_write(path)?;
    write_trace_binary(&mut w, trace)
}

pub fn read_trace_binary<R: Read>(
    input: &mut R,
    params: TraceParams,
) -> Result<TimeTrace, IoError> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != TRACE_MAGIC {
        return Err(IoError::BadTrace("bad magic".into()));
    }
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf)?;
    let dt = f64::from_le_bytes(buf);
    input.read_exact(&mut buf)?;
    let n = u64::from_le_bytes(buf) as usize;
    input.read_exact(&mut buf)?;
    let seed = u64::from_le_bytes(buf);
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        input.read_exact(&mut buf)?;
        samples.push(f64::from_le_bytes(buf));
    }
    Ok(TimeTrace {
        dt,
        samples,
        seed,
        params,
    })
}

/// `x_m,y_m,mean_square_disp` rows.
pub fn write_scan<W: Write>(out: &mut W, scan: &ScanDataset) -> Result<(), IoError> {
    writeln!(out, "x_m,y_m,mean_square_disp")?;
    for (x, y, v) in &scan.points {
        writeln!(out, "{x},{y},{v}")?;
    }
    Ok(())
}

pub fn write_scan_to_path(path: &Path, scan: &ScanDataset) -> Result<(), IoError> {
    let mut w = open_write(path)?;
    write_scan(&mut w, scan)
}

pub fn read_scan<R: BufRead>(input: R) -> Result<ScanDataset, IoError> {
    let mut points = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let n = idx + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') || t == "x_m,y_m,mean_square_disp" {
            continue;
        }
        let cols: Vec<&str> = t.split(',').collect();
        if cols.len() != 3 {
            return Err(IoError::Parse {
                line: n,
                reason: "expected three columns".into(),
            });
        }
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|e| IoError::Parse {
                line: n,
                reason: e.to_string(),
            })
        };
        points.push((parse(cols[0])?, parse(cols[1])?, parse(cols[2])?));
    }
    Ok(ScanDataset::new(points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::SpectrumKind;

    fn trace_params() -> TraceParams {
        TraceParams {
            delta: 0.1,
            finesse: 500.0,
            cavity_length_m: 0.025,
            wavelength_m: 1.064e-6,
            power_w: 2e-3,
            mode_frequency_hz: 280e3,
            mode_q: 8750.0,
            effective_mass_kg: 22e-12,
            bath_temperature_k: 300.0,
            photothermal_ratio: 0.0,
            photothermal_tau_s: 1.0,
        }
    }

    #[test]
    fn spectrum_round_trip() {
        let s = Spectrum::new(
            vec![1.0, 2.0, 3.5],
            vec![0.1, 0.4, 0.2],
            SpectrumKind::PdhReadout,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_spectrum(&mut buf, &s, &[("delta_over_kappa", "0.5".to_string())]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# kind = pdh_readout\n"));
        assert!(text.contains("frequency_hz,psd\n"));
        let back = read_spectrum(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn trace_binary_round_trip() {
        let trace = TimeTrace {
            dt: 1e-7,
            samples: vec![1.5e-12, -2.25e-12, 0.0, 3.75e-13],
            seed: 77,
            params: trace_params(),
        };
        let mut buf = Vec::new();
        write_trace_binary(&mut buf, &trace).unwrap();
        assert_eq!(buf.len(), 8 + 8 + 8 + 8 + 4 * 8);
        let back = read_trace_binary(&mut std::io::Cursor::new(buf), trace_params()).unwrap();
        assert_eq!(back.samples, trace.samples);
        assert_eq!(back.dt, trace.dt);
        assert_eq!(back.seed, 77);
    }

    #[test]
    fn trace_csv_round_trip_and_uniformity() {
        let trace = TimeTrace {
            dt: 2e-6,
            samples: vec![1.0e-12, 2.0e-12, -1.0e-12],
            seed: 0,
            params: trace_params(),
        };
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &trace).unwrap();
        let back = read_trace_csv(std::io::Cursor::new(buf), trace_params()).unwrap();
        assert_eq!(back.samples, trace.samples);
        let bad = "time_s,x_m\n0,1\n1e-6,2\n3e-6,3\n";
        assert!(matches!(
            read_trace_csv(
                std::io::Cursor::new(bad.as_bytes().to_vec()),
                trace_params()
            ),
            Err(IoError::NonUniform)
        ));
    }

    #[test]
    fn scan_round_trip() {
        let scan = ScanDataset::new(vec![(1e-6, 2e-6, 0.5), (2e-6, 2e-6, 0.25)]);
        let mut buf = Vec::new();
        write_scan(&mut buf, &scan).unwrap();
        let back = read_scan(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(back, scan);
    }

    #[test]
    fn deterministic_bytes() {
        let s = Spectrum::new(
            vec![1.0, 2.0],
            vec![0.125, 0.25],
            SpectrumKind::Displacement,
        )
        .unwrap();
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_spectrum(&mut a, &s, &[]).unwrap();
        write_spectrum(&mut b, &s, &[]).unwrap();
        assert_eq!(a, b);
    }
}
