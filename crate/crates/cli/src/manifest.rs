//! Run manifest: the completion marker written last, listing every output
//! file, the command, seed, tool version, and the config snapshot.

use crate::error::CliError;
use std::path::Path;
use std::time::Instant;

pub struct ManifestBuilder {
    command: String,
    seed: u64,
    outputs: Vec<String>,
    config_text: String,
    started: Instant,
}

impl ManifestBuilder {
    pub fn new(command: &str, seed: u64, config_text: &str) -> Self {
        Self {
            command: command.to_string(),
            seed,
            outputs: Vec::new(),
            config_text: config_text.to_string(),
            started: Instant::now(),
        }
    }

    pub fn add_output(&mut self, name: &str) {
        self.outputs.push(name.to_string());
    }

    /// Write `manifest.txt` into `dir`; call only after every other file is
    /// on disk.
    pub fn write(self, dir: &Path) -> Result<(), CliError> {
        let mut text = String::new();
        text.push_str("# optomech run manifest\n");
        text.push_str(&format!("command = {}\n", self.command));
        text.push_str(&format!("version = {}\n", env!("CARGO_PKG_VERSION")));
        text.push_str(&format!("seed = {}\n", self.seed));
        text.push_str(&format!(
            "wall_clock_s = {:.3}\n",
            self.started.elapsed().as_secs_f64()
        ));
        for o in &self.outputs {
            text.push_str(&format!("output = {o}\n"));
        }
        text.push_str("--- config ---\n");
        if self.config_text.is_empty() {
            text.push_str("# built-in defaults\n");
        } else {
            text.push_str(&self.config_text);
            if !self.config_text.ends_with('\n') {
                text.push('\n');
            }
        }
        std::fs::write(dir.join("manifest.txt"), text)?;
        Ok(())
    }
}
