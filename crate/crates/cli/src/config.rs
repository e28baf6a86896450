//! Flag groups shared by the subcommands. Every group doubles as the JSON
//! config schema: keys are the flag names in snake_case, and flags given on
//! the command line override the file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ci_reduce_core::engine::ReduceOptions;
use ci_reduce_core::metrics::Technique;
use ci_reduce_core::oracle::{OracleSpec, TokenSetMock, DEFAULT_TIMEOUT_SECS};
use clap::Args;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub const DEFAULT_MAX_CANDIDATES: usize = 100_000;
pub const DEFAULT_MOCK_LABEL: &str = "target";

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleArgs {
    /// Shell command run per candidate; `{}` becomes the candidate file path.
    #[arg(long, value_name = "TEMPLATE")]
    pub oracle_cmd: Option<String>,
    /// Per-query timeout in seconds for --oracle-cmd.
    #[arg(long, value_name = "SECS")]
    pub oracle_timeout: Option<f64>,
    /// In-process mock: predicts --mock-label when all these tokens occur.
    #[arg(long, value_name = "A,B,C", value_delimiter = ',')]
    pub mock_tokens: Vec<String>,
    /// Label the mock predicts [default: target].
    #[arg(long, value_name = "LABEL")]
    pub mock_label: Option<String>,
    /// Let the mock score text that does not parse.
    #[arg(long)]
    pub mock_lenient: bool,
    /// Oracle spec as JSON (`kind` is `command` or `token-set`).
    #[arg(long, value_name = "FILE")]
    pub oracle_spec: Option<PathBuf>,
    /// Query the oracle for every candidate, even repeated ones.
    #[arg(long)]
    pub no_cache: bool,
}

impl OracleArgs {
    /// The configured oracle, falling back to `fallback` (a fixture's own
    /// oracle) when no oracle option is set.
    pub fn spec(&self, fallback: Option<&OracleSpec>) -> Result<OracleSpec> {
        let given = [
            self.oracle_cmd.is_some(),
            !self.mock_tokens.is_empty(),
            self.oracle_spec.is_some(),
        ];
        if given.iter().filter(|g| **g).count() > 1 {
            bail!("use only one of --oracle-cmd, --mock-tokens and --oracle-spec");
        }
        let mut spec = if let Some(template) = &self.oracle_cmd {
            OracleSpec::Command {
                template: template.clone(),
                timeout_secs: self.oracle_timeout.unwrap_or(DEFAULT_TIMEOUT_SECS),
            }
        } else if !self.mock_tokens.is_empty() {
            let label = self.mock_label.as_deref().unwrap_or(DEFAULT_MOCK_LABEL);
            OracleSpec::TokenSet(TokenSetMock::new(self.mock_tokens.iter().cloned(), label))
        } else if let Some(path) = &self.oracle_spec {
            let text = read(path)?;
            serde_json::from_str(&text).with_context(|| format!("oracle spec {}", path.display()))?
        } else if let Some(spec) = fallback {
            spec.clone()
        } else {
            bail!("no oracle configured (use --oracle-cmd, --mock-tokens or --oracle-spec)");
        };
        match &mut spec {
            OracleSpec::TokenSet(mock) if self.mock_lenient => mock.strict = false,
            OracleSpec::Command { timeout_secs, .. } => {
                if let Some(t) = self.oracle_timeout {
                    *timeout_secs = t;
                }
            }
            _ => {}
        }
        spec.build().context("invalid oracle")?;
        Ok(spec)
    }
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct InputArgs {
    /// Method source file; repeatable.
    #[arg(long = "input", value_name = "FILE")]
    pub inputs: Vec<PathBuf>,
    /// Corpus or sample file written by `ci-reduce corpus`.
    #[arg(long, value_name = "JSONL")]
    pub corpus: Option<PathBuf>,
    /// Bundled fixture (explanation_main, swap, mock_corpus).
    #[arg(long, value_name = "NAME")]
    pub fixture: Option<String>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineArgs {
    /// Reject parse-invalid candidates without querying the oracle.
    #[arg(long)]
    pub require_valid: bool,
    /// Keep-evaluation budget per job.
    #[arg(long, value_name = "N")]
    pub max_candidates: Option<usize>,
    /// Label to preserve instead of the oracle's verdict on the input.
    #[arg(long, value_name = "LABEL")]
    pub target_label: Option<String>,
    /// Inputs reduced concurrently.
    #[arg(long, value_name = "N")]
    pub jobs: Option<usize>,
}

impl EngineArgs {
    /// Fills in the default budget so it shows in recorded configs.
    pub fn resolve(&mut self) {
        self.max_candidates.get_or_insert(DEFAULT_MAX_CANDIDATES);
    }

    pub fn options(&self) -> ReduceOptions {
        ReduceOptions {
            require_valid: self.require_valid,
            max_candidates: Some(self.max_candidates.unwrap_or(DEFAULT_MAX_CANDIDATES)),
            target_label: self.target_label.clone(),
        }
    }

    pub fn jobs(&self) -> usize {
        self.jobs.unwrap_or(1).max(1)
    }
}

pub fn parse_techniques(names: &[String]) -> Result<Vec<Technique>> {
    let mut out: Vec<Technique> = Vec::new();
    for n in names {
        let t: Technique = n.parse()?;
        if !out.contains(&t) {
            out.push(t);
        }
    }
    Ok(out)
}

pub fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn is_unset(v: &Value) -> bool {
    match v {
        Value::Null | Value::Bool(false) => true,
        Value::Array(a) => a.is_empty(),
        _ => false,
    }
}

/// Overlays the flags onto the config file, if any. Unknown config keys are
/// rejected.
pub fn merge<T: Serialize + DeserializeOwned>(flags: &T, file: Option<&Path>) -> Result<T> {
    let Some(path) = file else {
        return Ok(serde_json::from_value(serde_json::to_value(flags)?)?);
    };
    let mut base: Map<String, Value> = serde_json::from_str(&read(path)?)
        .with_context(|| format!("config {} is not a JSON object", path.display()))?;
    let Value::Object(over) = serde_json::to_value(flags)? else {
        unreachable!("flag groups serialize to objects")
    };
    for key in base.keys() {
        if !over.contains_key(key) {
            bail!("unknown key `{key}` in config {}", path.display());
        }
    }
    for (k, v) in over {
        if !is_unset(&v) || !base.contains_key(&k) {
            base.insert(k, v);
        }
    }
    serde_json::from_value(Value::Object(base)).with_context(|| format!("config {}", path.display()))
}

/// The resolved config as recorded in manifests, plus the oracle actually
/// used. Output locations and parallelism do not affect results, so they are
/// left out.
pub fn recorded<T: Serialize>(config: &T, oracle: Option<&OracleSpec>) -> Value {
    let mut v = serde_json::to_value(config).expect("config serializes");
    if let Value::Object(m) = &mut v {
        for k in ["out", "jobs"] {
            m.remove(k);
        }
        if let Some(spec) = oracle {
            m.insert("resolved_oracle".into(), serde_json::to_value(spec).expect("spec serializes"));
        }
    }
    v
}
