//! Syntax-unaware delta debugging over tokens and characters.

use std::ops::Range;

use thiserror::Error;

use crate::engine::{precheck, Job, ReduceError, ReduceOptions, ReductionResult};
use crate::lang::{self, Program};
use crate::metrics::Technique;
use crate::oracle::OracleSession;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum DdError {
    #[error("the full input does not satisfy the predicate")]
    PredicateFailed,
    #[error("candidate budget exhausted after {evaluations} evaluations")]
    Stalled { evaluations: usize },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DdStats {
    pub evaluations: usize,
    /// Granularity rounds, i.e. split-and-test sweeps.
    pub rounds: usize,
}

/// `n` contiguous ranges covering `0..len`, the remainder spread over the
/// leading ranges.
pub fn chunks(len: usize, n: usize) -> Vec<Range<usize>> {
    assert!(n >= 1 && n <= len.max(1));
    let (base, rem) = (len / n, len % n);
    let mut start = 0;
    (0..n)
        .map(|i| {
            let end = start + base + usize::from(i < rem);
            let r = start..end;
            start = end;
            r
        })
        .collect()
}

/// Classic ddmin. Checks the full input first, then minimizes to a
/// 1-minimal subsequence.
pub fn ddmin<T: Clone>(
    units: &[T],
    mut keep: impl FnMut(&[T]) -> bool,
    cap: Option<usize>,
) -> Result<Vec<T>, DdError> {
    if cap == Some(0) {
        return Err(DdError::Stalled { evaluations: 0 });
    }
    if !keep(units) {
        return Err(DdError::PredicateFailed);
    }
    minimize(units, keep, cap.map(|c| c - 1))
        .map(|(out, _)| out)
        .map_err(|e| match e {
            DdError::Stalled { evaluations } => DdError::Stalled {
                evaluations: evaluations + 1,
            },
            e => e,
        })
}

/// ddmin assuming `keep(units)` already holds. `cap` bounds the number of
/// `keep` calls made here.
pub fn minimize<T: Clone>(
    units: &[T],
    mut keep: impl FnMut(&[T]) -> bool,
    cap: Option<usize>,
) -> Result<(Vec<T>, DdStats), DdError> {
    let mut stats = DdStats::default();
    let mut test = |cand: &[T], stats: &mut DdStats| {
        if cap.is_some_and(|c| stats.evaluations >= c) {
            return Err(DdError::Stalled {
                evaluations: stats.evaluations,
            });
        }
        stats.evaluations += 1;
        Ok(keep(cand))
    };

    let mut current = units.to_vec();
    let mut n = 2usize;
    loop {
        let len = current.len();
        if len == 0 {
            break;
        }
        stats.rounds += 1;
        if len == 1 {
            if test(&[], &mut stats)? {
                current.clear();
            }
            break;
        }
        n = n.min(len);
        let parts = chunks(len, n);

        let mut reduced = false;
        for r in &parts {
            let subset = &current[r.clone()];
            if test(subset, &mut stats)? {
                current = subset.to_vec();
                n = 2;
                reduced = true;
                break;
            }
        }
        // With two chunks each complement is the other chunk, already tested.
        if !reduced && n > 2 {
            for r in &parts {
                let complement: Vec<T> = current[..r.start]
                    .iter()
                    .chain(&current[r.end..])
                    .cloned()
                    .collect();
                if test(&complement, &mut stats)? {
                    current = complement;
                    n = (n - 1).max(2);
                    reduced = true;
                    break;
                }
            }
        }
        if reduced {
            continue;
        }
        if n >= len {
            break;
        }
        n = (2 * n).min(len);
    }
    Ok((current, stats))
}

fn run_dd<T: Clone>(
    technique: Technique,
    program: &Program,
    session: &OracleSession,
    options: &ReduceOptions,
    units: Vec<T>,
    render: impl Fn(&[T]) -> String,
) -> Result<ReductionResult, ReduceError> {
    let target = precheck(program, session, options)?;
    let mut job = Job::new(technique, session, target, options);
    let keep = |cand: &[T]| {
        let text = render(cand);
        let valid = lang::is_valid(&text);
        job.keep(&text, cand.len(), valid)
    };
    let (out, stats) = minimize(&units, keep, options.max_candidates).map_err(|e| match e {
        DdError::Stalled { evaluations } => ReduceError::Stalled { evaluations },
        DdError::PredicateFailed => unreachable!("minimize does not precheck"),
    })?;
    job.passes = stats.rounds;
    let final_program = if out.len() == units.len() {
        program.clone()
    } else {
        Program::new(render(&out))
    };
    Ok(job.finish(program, final_program))
}

/// ddmin over the token texts of `program`; candidates are the kept tokens
/// joined with the canonical whitespace policy.
pub fn dd_token(
    program: &Program,
    session: &OracleSession,
    options: &ReduceOptions,
) -> Result<ReductionResult, ReduceError> {
    if let Some(e @ lang::LangError::Lex(_)) = program.error() {
        return Err(e.clone().into());
    }
    let units: Vec<String> = program.tokens().iter().map(|t| t.text.clone()).collect();
    run_dd(Technique::DdToken, program, session, options, units, |c| {
        lang::join_tokens(c.iter().map(String::as_str))
    })
}

/// ddmin over the characters of the source text, with no regard for
/// token or literal boundaries.
pub fn dd_char(
    program: &Program,
    session: &OracleSession,
    options: &ReduceOptions,
) -> Result<ReductionResult, ReduceError> {
    let units: Vec<char> = program.source().chars().collect();
    run_dd(Technique::DdChar, program, session, options, units, |c| {
        c.iter().collect()
    })
}
