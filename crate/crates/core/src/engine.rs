//! Shared job plumbing: options, results, and the candidate accept/reject
//! loop bookkeeping used by every technique.

use std::collections::HashSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::{LangError, Program};
use crate::metrics::{CandidateRecord, ReductionTrace, Technique};
use crate::oracle::{Digest, OracleSession};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReduceOptions {
    /// Reject parse-invalid candidates without asking the oracle.
    #[serde(default)]
    pub require_valid: bool,
    /// Hard cap on keep-evaluations per job.
    #[serde(default)]
    pub max_candidates: Option<usize>,
    /// Label to preserve; defaults to the oracle's verdict on the input.
    #[serde(default)]
    pub target_label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReduceError {
    #[error(transparent)]
    Lang(#[from] LangError),
    #[error("the input does not preserve the target label (oracle said {found})")]
    PredicateFailed { found: String },
    #[error("candidate budget exhausted after {evaluations} evaluations")]
    Stalled { evaluations: usize },
}

#[derive(Debug, Clone)]
pub struct ReductionResult {
    pub technique: Technique,
    pub target_label: String,
    pub final_program: Program,
    pub trace: ReductionTrace,
}

pub fn reduce(
    technique: Technique,
    program: &Program,
    session: &OracleSession,
    options: &ReduceOptions,
) -> Result<ReductionResult, ReduceError> {
    match technique {
        Technique::DdToken => crate::ddmin::dd_token(program, session, options),
        Technique::DdChar => crate::ddmin::dd_char(program, session, options),
        Technique::Tree => crate::tree_reduce::reduce_tree(program, session, options),
    }
}

/// Resolves the label to preserve and checks that the input keeps it.
pub(crate) fn precheck(
    program: &Program,
    session: &OracleSession,
    options: &ReduceOptions,
) -> Result<String, ReduceError> {
    let verdict = session.predict(program.source());
    let wanted = options
        .target_label
        .as_deref()
        .or(session.target_label());
    let describe = || match verdict.label() {
        Some(l) => format!("`{l}`"),
        None => format!("{:?}", verdict.status),
    };
    match (verdict.label(), wanted) {
        (Some(got), Some(want)) if got == want => Ok(want.to_string()),
        (Some(got), None) => Ok(got.to_string()),
        _ => Err(ReduceError::PredicateFailed { found: describe() }),
    }
}

/// Records candidates of one job and answers keep-queries.
pub(crate) struct Job<'a> {
    technique: Technique,
    session: &'a OracleSession,
    target: String,
    require_valid: bool,
    cap: Option<usize>,
    candidates: Vec<CandidateRecord>,
    queried: HashSet<Digest>,
    accepted: usize,
    pub passes: usize,
    start: Instant,
}

impl<'a> Job<'a> {
    pub fn new(
        technique: Technique,
        session: &'a OracleSession,
        target: String,
        options: &ReduceOptions,
    ) -> Self {
        Job {
            technique,
            session,
            target,
            require_valid: options.require_valid,
            cap: options.max_candidates,
            candidates: Vec::new(),
            queried: HashSet::new(),
            accepted: 0,
            passes: 0,
            start: Instant::now(),
        }
    }

    pub fn check_budget(&self) -> Result<(), ReduceError> {
        match self.cap {
            Some(cap) if self.candidates.len() >= cap => Err(ReduceError::Stalled {
                evaluations: self.candidates.len(),
            }),
            _ => Ok(()),
        }
    }

    /// Evaluates one candidate and records it.
    pub fn keep(&mut self, text: &str, size: usize, is_valid: bool) -> bool {
        let started = Instant::now();
        let (status, cached, accepted) = if self.require_valid && !is_valid {
            (None, false, false)
        } else {
            self.queried.insert(Digest::of(text.as_bytes()));
            let (verdict, cached) = self.session.predict_traced(text);
            let ok = verdict.is_label(&self.target);
            (Some(verdict.status), cached, ok)
        };
        if accepted {
            self.accepted += 1;
        }
        self.candidates.push(CandidateRecord {
            size,
            is_valid,
            accepted,
            status,
            cached,
            duration_s: started.elapsed().as_secs_f64(),
        });
        accepted
    }

    pub fn finish(self, original: &Program, final_program: Program) -> ReductionResult {
        let trace = ReductionTrace {
            technique: self.technique,
            label: self.target.clone(),
            original_token_count: original.token_count(),
            final_token_count: final_program.token_count(),
            wall_time_s: self.start.elapsed().as_secs_f64(),
            accepted_steps: self.accepted,
            oracle_queries: self.queried.len(),
            passes: self.passes,
            candidates: self.candidates,
        };
        ReductionResult {
            technique: self.technique,
            target_label: self.target,
            final_program,
            trace,
        }
    }
}
