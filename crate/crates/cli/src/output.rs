//! Output layout and CSV preambles.
//!
//! Every produced CSV starts with `#`-prefixed preamble lines naming the
//! schema version, the config hash, the master seed and the seed-derivation
//! rule, so rows stay attributable when files are moved around. Re-running a
//! command with the same config yields byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use crate::config::{LoadedConfig, SEED_DERIVATION};
use crate::CliError;

pub struct OutputContext {
    pub dir: PathBuf,
    pub hash: String,
    pub master_seed: u64,
}

impl OutputContext {
    pub fn prepare(
        cli_out: Option<&Path>,
        loaded: &LoadedConfig,
        master_seed: u64,
    ) -> Result<Self, CliError> {
        let dir = cli_out
            .map(Path::to_path_buf)
            .or_else(|| loaded.config.output.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        fs::create_dir_all(&dir)
            .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
        // Full config echo for provenance.
        let metadata = format!(
            "# gsa run metadata\nconfig_hash = \"{}\"\nmaster_seed = {}\nseed_derivation = \"{}\"\n\n# original config follows\n{}",
            loaded.hash, master_seed, SEED_DERIVATION, loaded.raw
        );
        fs::write(dir.join("run-metadata.toml"), metadata)
            .map_err(|e| CliError::Config(format!("cannot write metadata: {e}")))?;
        Ok(Self {
            dir,
            hash: loaded.hash.clone(),
            master_seed,
        })
    }

    pub fn preamble(&self, schema: &str) -> String {
        format!(
            "# schema: {schema}\n# config_hash: {}\n# master_seed: {}\n# seed_derivation: {}\n",
            self.hash, self.master_seed, SEED_DERIVATION
        )
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        fs::write(&path, contents)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }
}
