//! Run manifests.
//!
//! Every subcommand writes a manifest next to its primary output: the
//! resolved configuration, a digest of each input file, and the tool
//! version. Results can be traced back to exact inputs from the manifest
//! alone, and identical runs produce identical manifests (nothing
//! time-dependent goes in).

use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
struct InputDigest {
    path: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest {
    tool: &'static str,
    version: &'static str,
    command: String,
    config: serde_json::Value,
    inputs: Vec<InputDigest>,
}

fn sha256_of(path: &Path) -> Result<String> {
    let mut file = File::open(path).with_context(|| format!("digesting {}", path.display()))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Manifest path for a given output file: `<output>.manifest.json`, or
/// `manifest.json` inside an output directory.
pub fn manifest_path(output: &Path) -> PathBuf {
    if output.is_dir() {
        output.join("manifest.json")
    } else {
        let mut name = output.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        output.with_file_name(name)
    }
}

/// Write the manifest for one command invocation.
pub fn write_manifest(
    output: &Path,
    command: &str,
    config: serde_json::Value,
    inputs: &[PathBuf],
) -> Result<()> {
    let mut digests = Vec::with_capacity(inputs.len());
    for input in inputs {
        digests.push(InputDigest {
            path: input.display().to_string(),
            sha256: sha256_of(input)?,
        });
    }
    let manifest = Manifest {
        tool: "hopqpp",
        version: env!("CARGO_PKG_VERSION"),
        command: command.to_string(),
        config,
        inputs: digests,
    };
    let path = manifest_path(output);
    let mut body = serde_json::to_string_pretty(&manifest)?;
    body.push('\n');
    std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
