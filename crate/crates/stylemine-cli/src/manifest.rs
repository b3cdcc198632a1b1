//! Run manifests: every subcommand writes `<output>.manifest.json` beside
//! its primary artifact, capturing the resolved config, input digests, tool
//! version, and seed, so a run can be reproduced byte for byte (modulo the
//! manifest timestamp itself).

use std::io::Read;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::CliError;

#[derive(Serialize)]
struct InputDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    timestamp: String,
    seed: u64,
    config: &'a RunConfig,
    inputs: Vec<InputDigest>,
    outputs: Vec<String>,
}

fn sha256_file(path: &Path) -> Result<String, CliError> {
    let mut file = std::fs::File::open(path)
        .map_err(|e| CliError::runtime(format!("digest {}: {e}", path.display())))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file
            .read(&mut buf)
            .map_err(|e| CliError::runtime(format!("digest {}: {e}", path.display())))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(format!("{:x}", hasher.finalize()))
}

pub fn manifest_path(primary_output: &Path) -> PathBuf {
    let mut name = primary_output
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    name.push_str(".manifest.json");
    primary_output.with_file_name(name)
}

/// Write the manifest beside `primary_output`.
pub fn write_manifest(
    command: &str,
    config: &RunConfig,
    inputs: &[&Path],
    outputs: &[&Path],
) -> Result<(), CliError> {
    let primary = outputs
        .first()
        .ok_or_else(|| CliError::runtime("manifest needs at least one output"))?;
    let digests = inputs
        .iter()
        .map(|p| {
            Ok(InputDigest {
                path: p.display().to_string(),
                sha256: sha256_file(p)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let manifest = Manifest {
        tool: "stylemine",
        version: env!("CARGO_PKG_VERSION"),
        command,
        timestamp: time::OffsetDateTime::now_utc()
            .format(&time::format_description::well_known::Rfc3339)
            .unwrap_or_else(|_| "unknown".into()),
        seed: config.seed,
        config,
        inputs: digests,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    let path = manifest_path(primary);
    let body = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CliError::runtime(format!("manifest: {e}")))?;
    std::fs::write(&path, body)
        .map_err(|e| CliError::runtime(format!("manifest {}: {e}", path.display())))
}
