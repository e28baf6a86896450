//! Reduction traces and the comparison measures computed from them.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracle::VerdictStatus;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Technique {
    DdToken,
    DdChar,
    Tree,
}

impl Technique {
    pub const ALL: [Technique; 3] = [Technique::DdToken, Technique::DdChar, Technique::Tree];

    pub fn name(self) -> &'static str {
        match self {
            Technique::DdToken => "dd-token",
            Technique::DdChar => "dd-char",
            Technique::Tree => "tree",
        }
    }
}

impl std::fmt::Display for Technique {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown technique `{0}` (expected dd-token, dd-char or tree)")]
pub struct UnknownTechnique(pub String);

impl std::str::FromStr for Technique {
    type Err = UnknownTechnique;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Technique::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| UnknownTechnique(s.to_string()))
    }
}

/// One keep-evaluation of a reduction job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    /// Size in the technique's units (tokens or characters).
    pub size: usize,
    pub is_valid: bool,
    pub accepted: bool,
    /// `None` when the validity gate rejected the candidate unqueried.
    pub status: Option<VerdictStatus>,
    pub cached: bool,
    pub duration_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionTrace {
    pub technique: Technique,
    pub label: String,
    pub original_token_count: usize,
    pub final_token_count: usize,
    pub wall_time_s: f64,
    pub accepted_steps: usize,
    /// Distinct candidate texts sent to the oracle by this job, cached or not.
    pub oracle_queries: usize,
    /// Worklist passes (tree) or granularity rounds (ddmin).
    pub passes: usize,
    pub candidates: Vec<CandidateRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("original program has zero tokens")]
    ZeroOriginal,
    #[error("trace has no candidates")]
    EmptyTrace,
}

impl ReductionTrace {
    pub fn valid_count(&self) -> usize {
        self.candidates.iter().filter(|c| c.is_valid).count()
    }

    /// Copy with every timing field zeroed, for reproducible digests.
    pub fn without_timings(&self) -> ReductionTrace {
        let mut t = self.clone();
        t.wall_time_s = 0.0;
        for c in &mut t.candidates {
            c.duration_s = 0.0;
        }
        t
    }
}

/// `(original - final) / original`.
pub fn token_reduction(trace: &ReductionTrace) -> Result<f64, MetricsError> {
    if trace.original_token_count == 0 {
        return Err(MetricsError::ZeroOriginal);
    }
    let removed = trace.original_token_count.saturating_sub(trace.final_token_count);
    Ok(removed as f64 / trace.original_token_count as f64)
}

pub fn valid_fraction(trace: &ReductionTrace) -> Result<f64, MetricsError> {
    if trace.candidates.is_empty() {
        return Err(MetricsError::EmptyTrace);
    }
    Ok(trace.valid_count() as f64 / trace.candidates.len() as f64)
}

/// Per-job summary written as `metrics.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobMetrics {
    pub schema_version: u32,
    pub technique: Technique,
    pub label: String,
    pub original_token_count: usize,
    pub final_token_count: usize,
    pub token_reduction: Option<f64>,
    pub candidates: usize,
    pub valid_candidates: usize,
    pub valid_fraction: Option<f64>,
    pub accepted_steps: usize,
    pub oracle_queries: usize,
    pub passes: usize,
    pub wall_time_s: f64,
}

impl JobMetrics {
    pub fn of(trace: &ReductionTrace) -> Self {
        JobMetrics {
            schema_version: SCHEMA_VERSION,
            technique: trace.technique,
            label: trace.label.clone(),
            original_token_count: trace.original_token_count,
            final_token_count: trace.final_token_count,
            token_reduction: token_reduction(trace).ok(),
            candidates: trace.candidates.len(),
            valid_candidates: trace.valid_count(),
            valid_fraction: valid_fraction(trace).ok(),
            accepted_steps: trace.accepted_steps,
            oracle_queries: trace.oracle_queries,
            passes: trace.passes,
            wall_time_s: trace.wall_time_s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaggedTrace {
    pub input_type: String,
    pub trace: ReductionTrace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub input_type: String,
    pub technique: Technique,
    pub n: usize,
    pub mean_token_reduction: f64,
    /// Mean over the group's traces that evaluated at least one candidate;
    /// 1.0 when none did.
    pub valid_fraction: f64,
    pub mean_accepted_steps: f64,
    pub mean_queries: f64,
    pub mean_wall_time_s: f64,
}

fn mean(xs: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Unweighted per-program means grouped by input type and technique, in
/// sorted group order. Traces of empty originals are skipped.
pub fn aggregate(traces: &[TaggedTrace]) -> Vec<ComparisonRow> {
    let mut groups: BTreeMap<(&str, Technique), Vec<&ReductionTrace>> = BTreeMap::new();
    for t in traces {
        if t.trace.original_token_count == 0 {
            continue;
        }
        groups
            .entry((t.input_type.as_str(), t.trace.technique))
            .or_default()
            .push(&t.trace);
    }
    groups
        .into_iter()
        .map(|((input_type, technique), ts)| ComparisonRow {
            input_type: input_type.to_string(),
            technique,
            n: ts.len(),
            mean_token_reduction: mean(ts.iter().filter_map(|t| token_reduction(t).ok()))
                .unwrap_or(0.0),
            valid_fraction: mean(ts.iter().filter_map(|t| valid_fraction(t).ok())).unwrap_or(1.0),
            mean_accepted_steps: mean(ts.iter().map(|t| t.accepted_steps as f64)).unwrap_or(0.0),
            mean_queries: mean(ts.iter().map(|t| t.oracle_queries as f64)).unwrap_or(0.0),
            mean_wall_time_s: mean(ts.iter().map(|t| t.wall_time_s)).unwrap_or(0.0),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub schema_version: u32,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    pub fn new(rows: Vec<ComparisonRow>) -> Self {
        ComparisonReport {
            schema_version: SCHEMA_VERSION,
            rows,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "input_type",
            "technique",
            "n",
            "mean_token_reduction",
            "valid_fraction",
            "mean_accepted_steps",
            "mean_queries",
            "mean_wall_time_s",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.input_type.clone(),
                r.technique.to_string(),
                r.n.to_string(),
                format!("{:.6}", r.mean_token_reduction),
                format!("{:.6}", r.valid_fraction),
                format!("{:.6}", r.mean_accepted_steps),
                format!("{:.6}", r.mean_queries),
                format!("{:.6}", r.mean_wall_time_s),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}
