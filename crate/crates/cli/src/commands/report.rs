//! `optomech report`: run the full check suite against a configuration and
//! emit a pass/fail table. Exit code 2 when any check fails.

use crate::error::CliError;
use crate::manifest::ManifestBuilder;
use optomech::acceptance::{run_all, Effort};
use optomech::config::RunConfig;
use std::io::Write;
use std::path::Path;

pub fn run(cfg: &RunConfig, quick: bool, seed: u64, out_dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir)?;
    let mut manifest = ManifestBuilder::new("report", seed, &cfg.source_text);
    let effort = if quick {
        Effort::quick()
    } else {
        Effort::full()
    };
    let results = run_all(cfg, effort);

    let mut f = std::fs::File::create(out_dir.join("report.txt"))?;
    for r in &results {
        println!("{}", r.line());
        writeln!(f, "{}", r.line())?;
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    let summary = format!("{} checks, {} failed", results.len(), failed);
    println!("{summary}");
    writeln!(f, "{summary}")?;
    drop(f);
    manifest.add_output("report.txt");
    manifest.write(out_dir)?;

    if failed > 0 {
        return Err(CliError::Numerical(summary));
    }
    Ok(())
}
