//! Query interface to the prediction model.
//!
//! An [`Oracle`] maps candidate text to a verdict. An [`OracleSession`] wraps
//! one with a content-addressed cache and counts real evaluations.

use std::collections::{BTreeSet, HashMap};
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, OnceLock};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};
use thiserror::Error;
use wait_timeout::ChildExt;

use crate::lang;

pub const OTHER_LABEL: &str = "<other>";
pub const DEFAULT_TIMEOUT_SECS: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictStatus {
    Predicted,
    EvalError,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleVerdict {
    pub status: VerdictStatus,
    /// Present iff `status` is `Predicted`; never empty.
    pub label: Option<String>,
    #[serde(with = "secs")]
    pub latency: Duration,
}

impl OracleVerdict {
    pub fn predicted(label: impl Into<String>, latency: Duration) -> Self {
        let label = label.into();
        if label.is_empty() {
            return Self::failed(VerdictStatus::EvalError, latency);
        }
        OracleVerdict {
            status: VerdictStatus::Predicted,
            label: Some(label),
            latency,
        }
    }

    pub fn failed(status: VerdictStatus, latency: Duration) -> Self {
        debug_assert_ne!(status, VerdictStatus::Predicted);
        OracleVerdict {
            status,
            label: None,
            latency,
        }
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn is_label(&self, target: &str) -> bool {
        self.status == VerdictStatus::Predicted && self.label() == Some(target)
    }
}

pub(crate) mod secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_secs_f64(f64::deserialize(d)?.max(0.0)))
    }
}

/// A prediction model. Implementations must be deterministic per input.
pub trait Oracle: Send + Sync {
    fn evaluate(&self, candidate: &str) -> OracleVerdict;
}

impl<F> Oracle for F
where
    F: Fn(&str) -> OracleVerdict + Send + Sync,
{
    fn evaluate(&self, candidate: &str) -> OracleVerdict {
        self(candidate)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockLabel {
    pub label: String,
    pub required: BTreeSet<String>,
}

/// Desk-scale stand-in for a trained model: predicts the first label whose
/// required token texts all occur in the candidate, else [`OTHER_LABEL`].
/// Candidates that do not lex (or, in strict mode, do not parse) always get
/// the other label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSetMock {
    pub labels: Vec<MockLabel>,
    #[serde(default = "default_true")]
    pub strict: bool,
}

fn default_true() -> bool {
    true
}

impl TokenSetMock {
    pub fn new<I, S>(required: I, label: impl Into<String>) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        TokenSetMock {
            labels: vec![MockLabel {
                label: label.into(),
                required: required.into_iter().map(Into::into).collect(),
            }],
            strict: true,
        }
    }

    pub fn strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    pub fn classify(&self, candidate: &str) -> &str {
        let Ok(tokens) = lang::tokenize(candidate) else {
            return OTHER_LABEL;
        };
        if self.strict && lang::parse(&tokens).is_err() {
            return OTHER_LABEL;
        }
        let present: BTreeSet<&str> = tokens.iter().map(|t| t.text.as_str()).collect();
        self.labels
            .iter()
            .find(|l| l.required.iter().all(|r| present.contains(r.as_str())))
            .map_or(OTHER_LABEL, |l| l.label.as_str())
    }

    pub fn required_for(&self, label: &str) -> Option<&BTreeSet<String>> {
        self.labels
            .iter()
            .find(|l| l.label == label)
            .map(|l| &l.required)
    }
}

impl Oracle for TokenSetMock {
    fn evaluate(&self, candidate: &str) -> OracleVerdict {
        let start = Instant::now();
        let label = self.classify(candidate).to_string();
        OracleVerdict::predicted(label, start.elapsed())
    }
}

#[derive(Debug, Error)]
pub enum OracleConfigError {
    #[error("oracle command template must contain the `{{}}` placeholder")]
    MissingPlaceholder,
    #[error("oracle timeout must be positive")]
    BadTimeout,
    #[error("mock oracle needs at least one required token")]
    EmptyMock,
}

/// Runs a user command per candidate. The candidate is written to a fresh
/// temporary file whose shell-quoted path replaces every `{}` in the template;
/// the command runs under `sh -c` and must print the label as the first
/// non-empty line of stdout and exit 0.
#[derive(Debug, Clone)]
pub struct ExternalCommand {
    template: String,
    timeout: Duration,
}

impl ExternalCommand {
    pub fn new(template: impl Into<String>, timeout: Duration) -> Result<Self, OracleConfigError> {
        let template = template.into();
        if !template.contains("{}") {
            return Err(OracleConfigError::MissingPlaceholder);
        }
        if timeout.is_zero() {
            return Err(OracleConfigError::BadTimeout);
        }
        Ok(ExternalCommand { template, timeout })
    }

    fn run(&self, candidate: &str) -> std::io::Result<Option<(bool, String)>> {
        let mut file = tempfile::Builder::new()
            .prefix("ci-reduce-")
            .suffix(".java")
            .tempfile()?;
        file.write_all(candidate.as_bytes())?;
        file.flush()?;
        let path = file.path().to_string_lossy().into_owned();
        let line = self.template.replace("{}", &shell_quote(&path));

        let mut cmd = Command::new("sh");
        cmd.arg("-c")
            .arg(line)
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::null());
        #[cfg(unix)]
        {
            use std::os::unix::process::CommandExt;
            cmd.process_group(0);
        }
        let mut child = cmd.spawn()?;
        let mut stdout = child.stdout.take().expect("stdout is piped");
        let reader = std::thread::spawn(move || {
            let mut buf = Vec::new();
            let _ = stdout.read_to_end(&mut buf);
            buf
        });
        match child.wait_timeout(self.timeout)? {
            Some(status) => {
                let out = reader.join().unwrap_or_default();
                Ok(Some((status.success(), String::from_utf8_lossy(&out).into_owned())))
            }
            None => {
                kill_tree(&mut child);
                let _ = child.wait();
                // Grandchildren may keep the pipe open; do not join the reader.
                Ok(None)
            }
        }
    }
}

fn kill_tree(child: &mut std::process::Child) {
    #[cfg(unix)]
    {
        // The child leads its own process group, so this reaches its
        // descendants too.
        unsafe {
            libc::killpg(child.id() as libc::pid_t, libc::SIGKILL);
        }
    }
    let _ = child.kill();
}

fn shell_quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', r"'\''"))
}

impl Oracle for ExternalCommand {
    fn evaluate(&self, candidate: &str) -> OracleVerdict {
        let start = Instant::now();
        let result = self.run(candidate);
        let latency = start.elapsed();
        match result {
            Ok(Some((true, out))) => match out.lines().map(str::trim).find(|l| !l.is_empty()) {
                Some(label) => OracleVerdict::predicted(label, latency),
                None => OracleVerdict::failed(VerdictStatus::EvalError, latency),
            },
            Ok(Some((false, _))) => OracleVerdict::failed(VerdictStatus::EvalError, latency),
            Ok(None) => OracleVerdict::failed(VerdictStatus::Timeout, latency),
            Err(e) => {
                log::warn!("oracle command failed to run: {e}");
                OracleVerdict::failed(VerdictStatus::EvalError, latency)
            }
        }
    }
}

/// Serializable description of an oracle, as stored in job configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OracleSpec {
    Command {
        template: String,
        #[serde(default = "default_timeout")]
        timeout_secs: f64,
    },
    TokenSet(TokenSetMock),
}

fn default_timeout() -> f64 {
    DEFAULT_TIMEOUT_SECS
}

impl OracleSpec {
    pub fn build(&self) -> Result<Arc<dyn Oracle>, OracleConfigError> {
        match self {
            OracleSpec::Command {
                template,
                timeout_secs,
            } => {
                if *timeout_secs <= 0.0 || !timeout_secs.is_finite() {
                    return Err(OracleConfigError::BadTimeout);
                }
                let timeout = Duration::from_secs_f64(*timeout_secs);
                Ok(Arc::new(ExternalCommand::new(template.clone(), timeout)?))
            }
            OracleSpec::TokenSet(mock) => {
                if mock.labels.is_empty() || mock.labels.iter().any(|l| l.required.is_empty()) {
                    return Err(OracleConfigError::EmptyMock);
                }
                Ok(Arc::new(mock.clone()))
            }
        }
    }

    /// The label a single-label mock predicts on success.
    pub fn fixed_target(&self) -> Option<&str> {
        match self {
            OracleSpec::TokenSet(m) if m.labels.len() == 1 => Some(&m.labels[0].label),
            _ => None,
        }
    }
}

/// SHA-256 of the exact candidate bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Digest(pub [u8; 32]);

impl Digest {
    pub fn of(bytes: &[u8]) -> Self {
        Digest(Sha256::digest(bytes).into())
    }

    pub fn hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl std::fmt::Display for Digest {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.hex())
    }
}

/// An oracle plus cache and query accounting. Safe to share between threads:
/// concurrent queries for the same candidate evaluate it once.
pub struct OracleSession {
    oracle: Arc<dyn Oracle>,
    target_label: Option<String>,
    cache_enabled: bool,
    cache: Mutex<HashMap<Digest, Arc<OnceLock<OracleVerdict>>>>,
    queries: AtomicUsize,
}

impl std::fmt::Debug for OracleSession {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OracleSession")
            .field("target_label", &self.target_label)
            .field("cache_enabled", &self.cache_enabled)
            .field("queries", &self.query_count())
            .finish()
    }
}

impl OracleSession {
    pub fn new(oracle: Arc<dyn Oracle>) -> Self {
        OracleSession {
            oracle,
            target_label: None,
            cache_enabled: true,
            cache: Mutex::new(HashMap::new()),
            queries: AtomicUsize::new(0),
        }
    }

    pub fn from_spec(spec: &OracleSpec) -> Result<Self, OracleConfigError> {
        let mut s = Self::new(spec.build()?);
        s.target_label = spec.fixed_target().map(str::to_string);
        Ok(s)
    }

    pub fn with_cache(mut self, enabled: bool) -> Self {
        self.cache_enabled = enabled;
        self
    }

    pub fn with_target(mut self, label: impl Into<String>) -> Self {
        self.target_label = Some(label.into());
        self
    }

    pub fn target_label(&self) -> Option<&str> {
        self.target_label.as_deref()
    }

    /// Evaluations that actually reached the oracle.
    pub fn query_count(&self) -> usize {
        self.queries.load(Ordering::SeqCst)
    }

    pub fn predict(&self, candidate: &str) -> OracleVerdict {
        self.predict_traced(candidate).0
    }

    /// Like [`predict`](Self::predict), also reporting whether the verdict came
    /// from the cache.
    pub fn predict_traced(&self, candidate: &str) -> (OracleVerdict, bool) {
        if !self.cache_enabled {
            self.queries.fetch_add(1, Ordering::SeqCst);
            return (self.oracle.evaluate(candidate), false);
        }
        let key = Digest::of(candidate.as_bytes());
        let cell = {
            let mut cache = self.cache.lock().expect("oracle cache poisoned");
            Arc::clone(cache.entry(key).or_default())
        };
        let mut fresh = false;
        let verdict = cell.get_or_init(|| {
            fresh = true;
            self.queries.fetch_add(1, Ordering::SeqCst);
            self.oracle.evaluate(candidate)
        });
        (verdict.clone(), !fresh)
    }

    pub fn preserves(&self, candidate: &str, target: &str) -> bool {
        self.predict(candidate).is_label(target)
    }
}

/// Session over a single-label strict token-set mock.
pub fn mock_token_set<I, S>(required: I, target_label: impl Into<String>) -> OracleSession
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let target_label = target_label.into();
    let mock = TokenSetMock::new(required, target_label.clone());
    OracleSession::new(Arc::new(mock)).with_target(target_label)
}
