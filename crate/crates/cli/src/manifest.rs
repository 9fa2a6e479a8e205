//! Run manifests: the provenance record every output directory carries.

use std::path::Path;

use serde::Serialize;

use crate::error::CliError;
use crate::output;

/// What produced the files next to it.
///
/// The manifest holds the resolved configuration, the seed, and the produced
/// file names, but deliberately no wall-clock timestamps: repeating the same
/// invocation must reproduce every output — this file included — byte for
/// byte.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    /// Binary name.
    pub tool: &'static str,
    /// Crate version at build time.
    pub version: &'static str,
    /// Subcommand that ran.
    pub command: String,
    /// Command-line arguments after the binary name.
    pub invocation: Vec<String>,
    /// Base random seed, for seeded commands.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Input files read.
    pub inputs: Vec<String>,
    /// Output files written, relative to the manifest's directory.
    pub outputs: Vec<String>,
    /// Resolved configuration snapshot.
    pub config: serde_json::Value,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        Self {
            tool: "hawkbias",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            invocation: std::env::args().skip(1).collect(),
            seed: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            config,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_input(mut self, path: impl std::fmt::Display) -> Self {
        self.inputs.push(path.to_string());
        self
    }

    /// Records an output file name and returns it for chaining into writes.
    pub fn output(&mut self, name: &str) -> &str {
        self.outputs.push(name.to_string());
        self.outputs.last().expect("just pushed")
    }

    /// Writes `manifest.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        output::write_json(dir, "manifest.json", self)
    }
}
