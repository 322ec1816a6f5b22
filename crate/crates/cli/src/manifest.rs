//! Run manifests: which command produced an artifact, from which inputs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const TOOL_VERSION: &str = concat!("rankguard ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Construct,
    Certify,
    Extract,
    Select,
    Sweep,
    Simulate,
    Verify,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Command,
    pub inputs: Vec<InputFile>,
    pub outputs: Vec<String>,
    pub seed: Option<u64>,
    pub tool_version: String,
}

/// An artifact with the hash of the manifest that produced it.
#[derive(Serialize)]
pub struct Stamped<'a, T: Serialize> {
    #[serde(flatten)]
    pub body: &'a T,
    pub manifest_hash: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunManifest {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            inputs: Vec::new(),
            outputs: Vec::new(),
            seed: None,
            tool_version: TOOL_VERSION.to_string(),
        }
    }

    /// Reads an input file and records its digest.
    pub fn read_input(&mut self, path: &Path) -> CliResult<Vec<u8>> {
        let bytes = fs::read(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.inputs.push(InputFile {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(bytes)
    }

    pub fn read_json<T: DeserializeOwned>(&mut self, path: &Path) -> CliResult<T> {
        let bytes = self.read_input(path)?;
        serde_json::from_slice(&bytes).map_err(|source| CliError::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("manifest serializes"))
    }

    pub fn stamp<'a, T: Serialize>(&self, body: &'a T) -> Stamped<'a, T> {
        Stamped {
            body,
            manifest_hash: self.hash(),
        }
    }
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

pub fn write_file(path: &Path, contents: &[u8]) -> CliResult<()> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `text` to `out` plus its manifest sidecar, or to stdout when no
/// output path was given.
pub fn emit(manifest: &mut RunManifest, out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => {
            write_file(path, text.as_bytes())?;
            let sidecar = sidecar_path(path);
            let body = serde_json::to_string_pretty(&*manifest).expect("manifest serializes");
            write_file(&sidecar, format!("{body}\n").as_bytes())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Serializes `body` stamped with the manifest hash. The output path is
/// recorded in the manifest before hashing.
pub fn emit_json<T: Serialize>(
    manifest: &mut RunManifest,
    out: Option<&Path>,
    body: &T,
) -> CliResult<()> {
    if let Some(path) = out {
        manifest.outputs.push(path.display().to_string());
    }
    let text = serde_json::to_string_pretty(&manifest.stamp(body)).expect("artifact serializes");
    emit(manifest, out, &format!("{text}\n"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_depends_on_every_field() {
        let base = RunManifest::new(Command::Certify);
        let mut seeded = base.clone();
        seeded.seed = Some(1);
        let mut other = base.clone();
        other.command = Command::Verify;
        assert_ne!(base.hash(), seeded.hash());
        assert_ne!(base.hash(), other.hash());
        assert_eq!(base.hash(), base.clone().hash());
    }

    #[test]
    fn stamp_flattens_body() {
        #[derive(Serialize)]
        struct Body {
            x: u32,
        }
        let m = RunManifest::new(Command::Construct);
        let v = serde_json::to_value(m.stamp(&Body { x: 3 })).unwrap();
        assert_eq!(v["x"], 3);
        assert_eq!(v["manifest_hash"], m.hash());
    }

    #[test]
    fn sidecar_appends_suffix() {
        assert_eq!(sidecar_path(Path::new("a/b.csv")), PathBuf::from("a/b.csv.manifest.json"));
    }
}
