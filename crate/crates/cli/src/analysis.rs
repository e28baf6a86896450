//! `features` and `adversarial`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ci_reduce_core::adversarial::{build_set, AdversarialReport, AdversarialSet, CollisionPolicy, Origin, SetKind};
use ci_reduce_core::features::{extract_features, FeatureReport, DEFAULT_THRESHOLD};
use ci_reduce_core::lang::Program;
use ci_reduce_core::metrics::{ReductionTrace, Technique};
use ci_reduce_core::oracle::OracleSession;
use clap::Args;
use serde::{Deserialize, Serialize};

use crate::artifacts::{pretty, Artifact, Failure, OutDir};
use crate::config::{merge, read, recorded, InputArgs, OracleArgs};
use crate::inputs::{self, Input};
use crate::Status;

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct FeaturesCmd {
    /// Directory of reduced programs, e.g. the output of `reduce`.
    #[arg(long, value_name = "DIR")]
    pub reduced_dir: Option<PathBuf>,
    /// Label whose reduced programs are analysed.
    #[arg(long, value_name = "NAME")]
    pub label: Option<String>,
    /// Minimum document-frequency share of a key feature [default: 0.5].
    #[arg(long, value_name = "X")]
    pub threshold: Option<f64>,
    /// Only use programs reduced by this technique.
    #[arg(long, value_name = "NAME")]
    pub technique: Option<String>,
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
pub struct AdversarialCmd {
    /// actual, key or reduced.
    #[arg(long, value_name = "SET")]
    pub set: Option<String>,
    /// Reduced programs to rename in (required for `--set reduced`).
    #[arg(long, value_name = "DIR")]
    pub reduced_dir: Option<PathBuf>,
    /// Only use reduced programs of this technique.
    #[arg(long, value_name = "NAME")]
    pub technique: Option<String>,
    /// Only keep origins the oracle assigns this label.
    #[arg(long, value_name = "NAME")]
    pub label: Option<String>,
    /// features.json of a label (repeatable; required for `--set key`).
    #[arg(long = "features-file", value_name = "FILE")]
    pub features_files: Vec<PathBuf>,
    /// What to do when `var` is already declared: skip or suffix [default: skip].
    #[arg(long, value_name = "POLICY")]
    pub collision: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub oracle: OracleArgs,
    /// Output directory (created if missing).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// JSON config file; flags override its keys.
    #[arg(long, value_name = "FILE")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

/// A reduced program found on disk, with the label and technique of the
/// trace stored next to it when there is one.
struct Reduced {
    input: Input,
    label: Option<String>,
    technique: Option<Technique>,
}

fn load_reduced(dir: &Path, technique: Option<Technique>) -> Result<Vec<Reduced>> {
    if !dir.is_dir() {
        bail!("{} is not a directory", dir.display());
    }
    let mut out = Vec::new();
    for entry in walkdir::WalkDir::new(dir).sort_by_file_name() {
        let entry = entry?;
        let path = entry.path();
        if !entry.file_type().is_file() || path.extension().is_none_or(|e| e != "java") {
            continue;
        }
        let trace_path = path.with_file_name("trace.json");
        let trace: Option<ReductionTrace> = if trace_path.is_file() {
            Some(serde_json::from_str(&read(&trace_path)?).with_context(|| format!("{}", trace_path.display()))?)
        } else {
            None
        };
        let rel = path.strip_prefix(dir).unwrap_or(path).to_string_lossy().replace('\\', "/");
        out.push(Reduced {
            input: Input {
                id: rel.clone(),
                source: read(path)?,
                origin: rel,
            },
            label: trace.as_ref().map(|t| t.label.clone()),
            technique: trace.as_ref().map(|t| t.technique),
        });
    }
    if let Some(t) = technique {
        out.retain(|r| r.technique.is_none_or(|x| x == t));
    } else {
        let seen: BTreeSet<Technique> = out.iter().filter_map(|r| r.technique).collect();
        if seen.len() > 1 {
            let names: Vec<&str> = seen.iter().map(|t| t.name()).collect();
            bail!("{} mixes techniques ({}); pick one with --technique", dir.display(), names.join(", "));
        }
    }
    Ok(out)
}

fn technique_of(name: &Option<String>) -> Result<Option<Technique>> {
    Ok(match name {
        Some(n) => Some(n.parse()?),
        None => None,
    })
}

pub fn cmd_features(flags: &FeaturesCmd) -> Result<Status> {
    let mut cfg = merge(flags, flags.config.as_deref())?;
    let threshold = *cfg.threshold.get_or_insert(DEFAULT_THRESHOLD);
    let dir = cfg.reduced_dir.clone().context("--reduced-dir is required")?;
    let label = cfg.label.clone().context("--label is required")?;
    let out_dir = cfg.out.clone().context("--out is required")?;

    let mut reduced = load_reduced(&dir, technique_of(&cfg.technique)?)?;
    reduced.retain(|r| r.label.as_deref().is_none_or(|l| l == label));
    let programs: Vec<Program> = reduced.iter().map(|r| Program::new(r.input.source.as_str())).collect();
    let report = extract_features(&programs, &label, threshold)?;
    log::info!("{label}: {} programs, {} key tokens", report.n, report.key_tokens().len());

    let mut out = OutDir::create(&out_dir)?;
    out.write(Artifact::plain("features.json", report.to_json()))?;
    out.write(Artifact::plain("features.csv", report.to_csv()))?;
    let digests: Vec<_> = reduced.iter().map(|r| r.input.digest()).collect();
    out.finish("features", recorded(&cfg, None), &digests, &[])?;
    Ok(Status::Ok)
}

fn key_sets(paths: &[PathBuf]) -> Result<BTreeMap<String, BTreeSet<String>>> {
    let mut keys = BTreeMap::new();
    for path in paths {
        let report: FeatureReport =
            serde_json::from_str(&read(path)?).with_context(|| format!("features file {}", path.display()))?;
        keys.insert(report.label.clone(), report.key_tokens());
    }
    Ok(keys)
}

fn merge_sets(kind: SetKind, parts: Vec<AdversarialSet>) -> AdversarialSet {
    let mut all = AdversarialSet {
        kind,
        initial: 0,
        transformed: Vec::new(),
        skipped: 0,
    };
    for p in parts {
        all.initial += p.initial;
        all.skipped += p.skipped;
        all.transformed.extend(p.transformed);
    }
    all
}

pub fn cmd_adversarial(flags: &AdversarialCmd) -> Result<Status> {
    let mut cfg = merge(flags, flags.config.as_deref())?;
    let kind: SetKind = cfg
        .set
        .as_deref()
        .context("--set is required (actual, key or reduced)")?
        .parse()
        .map_err(anyhow::Error::msg)?;
    let policy: CollisionPolicy = cfg
        .collision
        .get_or_insert_with(|| "skip".into())
        .parse()
        .map_err(anyhow::Error::msg)?;
    if kind == SetKind::Key && cfg.features_files.is_empty() {
        bail!("--set key needs --features-file");
    }
    let out_dir = cfg.out.clone().context("--out is required")?;

    let (items, fallback) = if kind == SetKind::Reduced {
        let dir = cfg.reduced_dir.clone().context("--set reduced needs --reduced-dir")?;
        let reduced = load_reduced(&dir, technique_of(&cfg.technique)?)?;
        (reduced.into_iter().map(|r| r.input).collect::<Vec<_>>(), None)
    } else {
        let ins = inputs::load(&cfg.input)?;
        (ins.items, ins.fixture_oracle)
    };
    let spec = cfg.oracle.spec(fallback.as_ref())?;
    let session = OracleSession::new(spec.build()?).with_cache(!cfg.oracle.no_cache);

    let mut failures = Vec::new();
    let mut origins = Vec::new();
    for item in &items {
        let program = Program::new(item.source.as_str());
        let verdict = session.predict(program.source());
        let Some(label) = verdict.label() else {
            eprintln!("error: {}: oracle gave no label ({:?})", item.id, verdict.status);
            failures.push(Failure {
                input: item.id.clone(),
                technique: None,
                error: format!("oracle gave no label ({:?})", verdict.status),
            });
            continue;
        };
        if cfg.label.as_deref().is_some_and(|l| l != label) {
            continue;
        }
        origins.push(Origin {
            id: item.id.clone(),
            program,
            label: label.to_string(),
        });
    }

    let set = if kind == SetKind::Key {
        let keys = key_sets(&cfg.features_files)?;
        let mut groups: BTreeMap<String, Vec<Origin>> = BTreeMap::new();
        for o in origins {
            groups.entry(o.label.clone()).or_default().push(o);
        }
        let mut parts = Vec::new();
        for (label, group) in groups {
            match keys.get(&label) {
                Some(k) => parts.push(build_set(kind, &group, Some(k), &session, policy)?),
                None => log::warn!("no features file for label `{label}`; {} origins left out", group.len()),
            }
        }
        merge_sets(kind, parts)
    } else {
        build_set(kind, &origins, None, &session, policy)?
    };
    let report = AdversarialReport::of(&set);
    log::info!(
        "{} set: {} transformed, {} mispredicted ({}%)",
        kind.name(),
        report.transformed,
        report.mispredictions,
        report.rate
    );

    let mut csv = Vec::new();
    AdversarialReport::write_csv(std::slice::from_ref(&report), &mut csv)?;
    let mut out = OutDir::create(&out_dir)?;
    out.write(Artifact::plain("adversarial.json", report.to_json()))?;
    out.write(Artifact::plain("adversarial.csv", String::from_utf8(csv)?))?;
    out.write(Artifact::plain("transformed.json", pretty(&set)))?;
    let digests: Vec<_> = items.iter().map(Input::digest).collect();
    out.finish("adversarial", recorded(&cfg, Some(&spec)), &digests, &failures)?;
    Ok(if failures.is_empty() { Status::Ok } else { Status::Partial })
}
