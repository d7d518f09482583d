//! Run configuration files (TOML) and content digests.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sesa_core::{synth::GenConfig, TrainConfig};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// `[train]` and `[gen]` tables; every key is optional and unknown keys are
/// rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfigFile {
    pub train: TrainConfig,
    pub gen: GenConfig,
}

impl RunConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.train.validate()?;
        cfg.gen.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// The defaults rendered as a config file.
    pub fn defaults_toml() -> String {
        toml::to_string(&Self::default()).expect("defaults serialize")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Digest of a configuration's canonical JSON encoding.
pub fn digest_of<T: Serialize>(value: &T) -> String {
    sha256_hex(&serde_json::to_vec(value).expect("configs serialize"))
}
