//! `corpus`: ingest, categorize and sample.

use std::collections::BTreeSet;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use ci_reduce_core::corpus::{
    categorize, ingest, sample, write_jsonl, CategorizeOptions, MethodRecord, Tag, DEFAULT_LARGE_BAND,
    DEFAULT_SMALL_LOC,
};
use ci_reduce_core::oracle::Digest;
use clap::Args;
use serde::{Deserialize, Serialize};

use crate::artifacts::{Artifact, OutDir};
use crate::config::{merge, read, recorded};
use crate::inputs::InputDigest;
use crate::Status;

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusCmd {
    /// Directory scanned recursively for `.java` files.
    #[arg(long, value_name = "DIR")]
    pub root: Option<PathBuf>,
    /// Sample `N` methods of an input type, as `TYPE:N` (repeatable).
    #[arg(long = "sample", value_name = "TYPE:N")]
    pub samples: Vec<String>,
    /// Seed of all sampling [default: 0].
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Distinct names counted as frequent [default: 10].
    #[arg(long, value_name = "K")]
    pub frequent_k: Option<usize>,
    /// Distinct names counted as rare [default: 10].
    #[arg(long, value_name = "K")]
    pub rare_k: Option<usize>,
    /// Methods under this many lines are small [default: 10].
    #[arg(long, value_name = "LOC")]
    pub small_loc: Option<usize>,
    /// Smallest LOC of a large method [default: 90].
    #[arg(long, value_name = "LOC")]
    pub large_min: Option<usize>,
    /// Largest LOC of a large method [default: 110].
    #[arg(long, value_name = "LOC")]
    pub large_max: Option<usize>,
    /// Keep method names instead of replacing them with `f`.
    #[arg(long)]
    pub keep_names: bool,
    /// Output directory (created if missing).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// JSON config file; flags override its keys.
    #[arg(long, value_name = "FILE")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

fn parse_sample(s: &str) -> Result<(Tag, usize)> {
    let (tag, n) = s.split_once(':').with_context(|| format!("sample `{s}` is not TYPE:N"))?;
    let tag: Tag = tag.parse().map_err(anyhow::Error::msg)?;
    let n = n.parse().with_context(|| format!("sample size in `{s}`"))?;
    Ok((tag, n))
}

fn jsonl(records: &[MethodRecord]) -> String {
    let mut buf = Vec::new();
    write_jsonl(records, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("records are utf-8")
}

pub fn cmd_corpus(flags: &CorpusCmd) -> Result<Status> {
    let mut cfg = merge(flags, flags.config.as_deref())?;
    let seed = *cfg.seed.get_or_insert(0);
    let opts = CategorizeOptions {
        frequent_k: *cfg.frequent_k.get_or_insert(10),
        rare_k: *cfg.rare_k.get_or_insert(10),
        small_loc: *cfg.small_loc.get_or_insert(DEFAULT_SMALL_LOC),
        large_band: (
            *cfg.large_min.get_or_insert(DEFAULT_LARGE_BAND.0),
            *cfg.large_max.get_or_insert(DEFAULT_LARGE_BAND.1),
        ),
    };
    if opts.large_band.0 > opts.large_band.1 {
        bail!("--large-min exceeds --large-max");
    }
    let samples = cfg.samples.iter().map(|s| parse_sample(s)).collect::<Result<Vec<_>>>()?;
    let tags: BTreeSet<Tag> = samples.iter().map(|(t, _)| *t).collect();
    if tags.len() != samples.len() {
        bail!("each input type may be sampled once");
    }
    let root = cfg.root.clone().context("--root is required")?;
    let out_dir = cfg.out.clone().context("--out is required")?;

    let report = ingest(&root, !cfg.keep_names)?;
    log::info!(
        "{} methods from {} files ({} unparseable, {} unreadable files)",
        report.records.len(),
        report.files,
        report.unparseable,
        report.unreadable_files
    );
    let mut records = report.records;
    categorize(&mut records, &opts);

    let mut out = OutDir::create(&out_dir)?;
    out.write(Artifact::plain("corpus.jsonl", jsonl(&records)))?;
    for (tag, n) in &samples {
        let picked = sample(&records, *tag, *n, seed);
        out.write(Artifact::plain(format!("sample-{tag}.jsonl"), jsonl(&picked)))?;
    }

    let paths: BTreeSet<&str> = records.iter().map(|r| r.path.as_str()).collect();
    let mut digests = Vec::new();
    for p in paths {
        let text = read(&root.join(p))?;
        digests.push(InputDigest {
            id: p.to_string(),
            origin: p.to_string(),
            sha256: Digest::of(text.as_bytes()).hex(),
        });
    }
    out.finish("corpus", recorded(&cfg, None), &digests, &[])?;
    Ok(Status::Ok)
}
