//! Output files and their JSON sidecars.

use std::fs;
use std::path::Path;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::CliError;

pub struct OutDir<'a> {
    dir: &'a Path,
    config: &'a RunConfig,
}

impl<'a> OutDir<'a> {
    pub fn new(dir: &'a Path, config: &'a RunConfig) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir, config })
    }

    /// Write `name` and `<stem>.json` beside it.
    pub fn emit(&mut self, name: &str, bytes: &[u8], details: Value) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes)?;
        let sidecar = json!({
            "file": name,
            "sha256": hex::encode(Sha256::digest(bytes)),
            "config": self.config.echoed(),
            "details": details,
        });
        let mut text = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
        text.push('\n');
        fs::write(path.with_extension("json"), text)?;
        println!("wrote {}", path.display());
        Ok(())
    }
}
