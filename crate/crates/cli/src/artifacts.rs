//! Output directories and their manifests.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ci_reduce_core::metrics::SCHEMA_VERSION;
use ci_reduce_core::oracle::Digest;
use serde::Serialize;
use serde_json::Value;

use crate::inputs::InputDigest;

/// A file to write. `stable` is the timing-free form the manifest digest is
/// taken over, when it differs from the content.
pub struct Artifact {
    pub rel: String,
    pub content: String,
    pub stable: Option<String>,
}

impl Artifact {
    pub fn plain(rel: impl Into<String>, content: impl Into<String>) -> Self {
        Artifact {
            rel: rel.into(),
            content: content.into(),
            stable: None,
        }
    }

    pub fn timed(rel: impl Into<String>, content: String, stable: String) -> Self {
        Artifact {
            rel: rel.into(),
            content,
            stable: Some(stable),
        }
    }
}

pub fn pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("artifact serializes") + "\n"
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub input: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub technique: Option<String>,
    pub error: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema_version: u32,
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: Value,
    inputs: &'a [InputDigest],
    outputs: &'a BTreeMap<String, String>,
    failures: &'a [Failure],
}

pub struct OutDir {
    root: PathBuf,
    outputs: BTreeMap<String, String>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).with_context(|| format!("cannot create {}", root.display()))?;
        Ok(OutDir {
            root: root.to_path_buf(),
            outputs: BTreeMap::new(),
        })
    }

    pub fn write(&mut self, artifact: Artifact) -> Result<()> {
        let path = self.root.join(&artifact.rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
        }
        std::fs::write(&path, &artifact.content).with_context(|| format!("cannot write {}", path.display()))?;
        let hashed = artifact.stable.as_deref().unwrap_or(&artifact.content);
        self.outputs.insert(artifact.rel, Digest::of(hashed.as_bytes()).hex());
        Ok(())
    }

    pub fn finish(self, command: &str, config: Value, inputs: &[InputDigest], failures: &[Failure]) -> Result<()> {
        let manifest = Manifest {
            schema_version: SCHEMA_VERSION,
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            inputs,
            outputs: &self.outputs,
            failures,
        };
        let path = self.root.join("manifest.json");
        std::fs::write(&path, pretty(&manifest)).with_context(|| format!("cannot write {}", path.display()))
    }
}
