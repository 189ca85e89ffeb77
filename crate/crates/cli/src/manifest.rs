//! Run manifests: every command writes one next to its primary output with
//! everything needed to reproduce the run bit for bit.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::commands::{DecArgs, EmbedArgs, PhArgs, TrainArgs};

/// Resolved arguments of one command invocation.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum ManifestArgs {
    Dec(DecArgs),
    Embed(EmbedArgs),
    Ph(PhArgs),
    Train(TrainArgs),
}

/// Manifest written alongside every output. Timestamps are deliberately
/// absent: re-running the same manifest must reproduce identical bytes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    #[serde(flatten)]
    pub args: ManifestArgs,
    /// Seed actually used, after any environment override.
    pub seed: u64,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(args: ManifestArgs, seed: u64, outputs: Vec<PathBuf>) -> Self {
        Self {
            tool: "cochain".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            args,
            seed,
            outputs,
        }
    }

    pub fn path_for(primary_output: &Path) -> PathBuf {
        let mut name = primary_output
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "output".into());
        name.push_str(".manifest.json");
        primary_output.with_file_name(name)
    }

    pub fn write(&self, primary_output: &Path) -> std::io::Result<PathBuf> {
        let path = Self::path_for(primary_output);
        let mut text = serde_json::to_string_pretty(self).expect("serializable manifest");
        text.push('\n');
        write_atomic(&path, text.as_bytes())?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read manifest {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("manifest {}: {e}", path.display()))
    }
}

/// Write-to-temporary-then-rename, so readers never observe a half-written
/// file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}
