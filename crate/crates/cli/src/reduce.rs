//! `reduce` and `compare`.

use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use ci_reduce_core::engine::{reduce, ReduceError, ReduceOptions, ReductionResult};
use ci_reduce_core::lang::Program;
use ci_reduce_core::metrics::{aggregate, ComparisonReport, JobMetrics, TaggedTrace, Technique};
use ci_reduce_core::oracle::{Digest, OracleSession, OracleSpec};
use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::artifacts::{pretty, Artifact, Failure, OutDir};
use crate::config::{merge, parse_techniques, read, recorded, EngineArgs, InputArgs, OracleArgs};
use crate::inputs::{self, Input, InputDigest};
use crate::Status;

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ReduceCmd {
    /// dd-token, dd-char or tree; comma-separated for several.
    #[arg(long, value_name = "NAME", value_delimiter = ',', required = false)]
    pub technique: Vec<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub oracle: OracleArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub engine: EngineArgs,
    /// Output directory (created if missing).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// JSON config file; flags override its keys.
    #[arg(long, value_name = "FILE")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct CompareCmd {
    /// Techniques to compare [default: dd-token,tree].
    #[arg(long, value_name = "NAMES", value_delimiter = ',')]
    pub techniques: Vec<String>,
    /// Group name for every input in the report [default: all].
    #[arg(long, value_name = "NAME")]
    pub input_type: Option<String>,
    /// Rebuild the report from a stored traces.json instead of reducing.
    #[arg(long, value_name = "FILE")]
    pub traces: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub oracle: OracleArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub engine: EngineArgs,
    /// Output directory (created if missing).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// JSON config file; flags override its keys.
    #[arg(long, value_name = "FILE")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

type JobResult = (Technique, Result<ReductionResult, ReduceError>);

/// Runs every technique on every input. Inputs run concurrently on `jobs`
/// threads; the techniques of one input run in order and share its cache.
fn run_all(
    inputs: &[Input],
    techniques: &[Technique],
    spec: &OracleSpec,
    cache: bool,
    options: &ReduceOptions,
    jobs: usize,
) -> Result<Vec<Vec<JobResult>>> {
    let oracle = spec.build()?;
    let target = spec.fixed_target().map(str::to_string);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    Ok(pool.install(|| {
        inputs
            .par_iter()
            .map(|input| {
                let mut session = OracleSession::new(Arc::clone(&oracle)).with_cache(cache);
                if let Some(t) = &target {
                    session = session.with_target(t.clone());
                }
                let program = Program::new(input.source.as_str());
                techniques
                    .iter()
                    .map(|&t| {
                        let r = reduce(t, &program, &session, options);
                        if let Ok(r) = &r {
                            log::info!(
                                "{} [{t}]: {} -> {} tokens, {} queries",
                                input.id,
                                r.trace.original_token_count,
                                r.trace.final_token_count,
                                r.trace.oracle_queries
                            );
                        }
                        (t, r)
                    })
                    .collect()
            })
            .collect()
    }))
}

fn job_artifacts(id: &str, r: &ReductionResult) -> Vec<Artifact> {
    let dir = format!("{id}/{}", r.technique.name());
    let stable = r.trace.without_timings();
    vec![
        Artifact::plain(format!("{dir}/reduced.java"), r.final_program.source()),
        Artifact::timed(format!("{dir}/trace.json"), pretty(&r.trace), pretty(&stable)),
        Artifact::timed(
            format!("{dir}/metrics.json"),
            pretty(&JobMetrics::of(&r.trace)),
            pretty(&JobMetrics::of(&stable)),
        ),
    ]
}

struct Batch {
    spec: OracleSpec,
    inputs: Vec<Input>,
    results: Vec<Vec<JobResult>>,
}

fn run_batch(
    input: &InputArgs,
    oracle: &OracleArgs,
    engine: &EngineArgs,
    techniques: &[Technique],
) -> Result<Batch> {
    let inputs = inputs::load(input)?;
    let spec = oracle.spec(inputs.fixture_oracle.as_ref())?;
    let results = run_all(
        &inputs.items,
        techniques,
        &spec,
        !oracle.no_cache,
        &engine.options(),
        engine.jobs(),
    )?;
    Ok(Batch {
        spec,
        inputs: inputs.items,
        results,
    })
}

/// Writes per-job artifacts in input order and collects failures.
fn write_jobs(out: &mut OutDir, batch: &Batch) -> Result<Vec<Failure>> {
    let mut failures = Vec::new();
    for (input, results) in batch.inputs.iter().zip(&batch.results) {
        for (t, r) in results {
            match r {
                Ok(r) => {
                    for a in job_artifacts(&input.id, r) {
                        out.write(a)?;
                    }
                }
                Err(e) => {
                    eprintln!("error: {} [{t}]: {e}", input.id);
                    failures.push(Failure {
                        input: input.id.clone(),
                        technique: Some(t.name().to_string()),
                        error: e.to_string(),
                    });
                }
            }
        }
    }
    Ok(failures)
}

fn digests(inputs: &[Input]) -> Vec<InputDigest> {
    inputs.iter().map(Input::digest).collect()
}

fn status(failures: &[Failure]) -> Status {
    if failures.is_empty() {
        Status::Ok
    } else {
        Status::Partial
    }
}

pub fn cmd_reduce(flags: &ReduceCmd) -> Result<Status> {
    let mut cfg = merge(flags, flags.config.as_deref())?;
    cfg.engine.resolve();
    if cfg.technique.is_empty() {
        bail!("--technique is required (dd-token, dd-char or tree)");
    }
    let techniques = parse_techniques(&cfg.technique)?;
    let out_dir = cfg.out.clone().context("--out is required")?;
    let batch = run_batch(&cfg.input, &cfg.oracle, &cfg.engine, &techniques)?;
    let mut out = OutDir::create(&out_dir)?;
    let failures = write_jobs(&mut out, &batch)?;
    out.finish("reduce", recorded(&cfg, Some(&batch.spec)), &digests(&batch.inputs), &failures)?;
    Ok(status(&failures))
}

pub fn cmd_compare(flags: &CompareCmd) -> Result<Status> {
    let mut cfg = merge(flags, flags.config.as_deref())?;
    cfg.engine.resolve();
    if cfg.techniques.is_empty() {
        cfg.techniques = vec![Technique::DdToken.name().into(), Technique::Tree.name().into()];
    }
    let input_type = cfg.input_type.get_or_insert_with(|| "all".into()).clone();
    let techniques = parse_techniques(&cfg.techniques)?;
    let out_dir = cfg.out.clone().context("--out is required")?;

    let (traces, inputs, failures, spec, mut out) = if let Some(path) = &cfg.traces {
        let text = read(path)?;
        let traces: Vec<TaggedTrace> =
            serde_json::from_str(&text).with_context(|| format!("traces file {}", path.display()))?;
        let digest = InputDigest {
            id: "traces".into(),
            origin: path.display().to_string(),
            sha256: Digest::of(text.as_bytes()).hex(),
        };
        (traces, vec![digest], Vec::new(), None, OutDir::create(&out_dir)?)
    } else {
        let batch = run_batch(&cfg.input, &cfg.oracle, &cfg.engine, &techniques)?;
        let mut out = OutDir::create(&out_dir)?;
        let failures = write_jobs(&mut out, &batch)?;
        let traces: Vec<TaggedTrace> = batch
            .results
            .iter()
            .flatten()
            .filter_map(|(_, r)| r.as_ref().ok())
            .map(|r| TaggedTrace {
                input_type: input_type.clone(),
                trace: r.trace.clone(),
            })
            .collect();
        let stable: Vec<TaggedTrace> = traces
            .iter()
            .map(|t| TaggedTrace {
                input_type: t.input_type.clone(),
                trace: t.trace.without_timings(),
            })
            .collect();
        out.write(Artifact::timed("traces.json", pretty(&traces), pretty(&stable)))?;
        (traces, digests(&batch.inputs), failures, Some(batch.spec), out)
    };

    let report = ComparisonReport::new(aggregate(&traces));
    let mut stable = report.clone();
    for row in &mut stable.rows {
        row.mean_wall_time_s = 0.0;
    }
    out.write(Artifact::timed("comparison.json", report.to_json(), stable.to_json()))?;
    out.write(Artifact::timed("comparison.csv", report.to_csv(), stable.to_csv()))?;
    out.finish("compare", recorded(&cfg, spec.as_ref()), &inputs, &failures)?;
    Ok(status(&failures))
}
