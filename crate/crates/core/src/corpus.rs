//! Method extraction from source trees, input-type tags and sampling.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::{self, Program, Token, TokenKind, MODIFIERS, PRIMITIVES};
use crate::metrics::SCHEMA_VERSION;
use crate::oracle::Digest;

pub const DEFAULT_SMALL_LOC: usize = 10;
pub const DEFAULT_LARGE_BAND: (usize, usize) = (90, 110);
pub const NORMALIZED_NAME: &str = "f";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tag {
    Frequent,
    Rare,
    Small,
    Large,
}

impl Tag {
    pub const ALL: [Tag; 4] = [Tag::Frequent, Tag::Rare, Tag::Small, Tag::Large];

    pub fn name(self) -> &'static str {
        match self {
            Tag::Frequent => "frequent",
            Tag::Rare => "rare",
            Tag::Small => "small",
            Tag::Large => "large",
        }
    }
}

impl std::fmt::Display for Tag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Tag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Tag::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown input type `{s}` (expected frequent, rare, small or large)"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodRecord {
    pub id: String,
    /// Path relative to the ingest root, `/`-separated.
    pub path: String,
    pub offset: usize,
    pub original_name: String,
    pub loc: usize,
    pub source: String,
    #[serde(default)]
    pub tags: BTreeSet<Tag>,
}

impl MethodRecord {
    pub fn program(&self) -> Program {
        Program::new(self.source.clone())
    }

    pub fn has(&self, tag: Tag) -> bool {
        self.tags.contains(&tag)
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line} of corpus file: {source}")]
    BadLine {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub records: Vec<MethodRecord>,
    pub files: usize,
    /// Method headers whose text did not parse under the subset grammar.
    pub unparseable: usize,
    pub unreadable_files: usize,
}

/// A method found by the header scanner: byte range and name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodSpan {
    pub start: usize,
    pub end: usize,
    pub name: String,
}

fn type_ending(t: &Token) -> bool {
    t.kind == TokenKind::Identifier
        || t.is("]")
        || t.is(">")
        || t.is("void")
        || PRIMITIVES.contains(&t.text.as_str())
}

fn matching(tokens: &[Token], open_at: usize, open: &str, close: &str) -> Option<usize> {
    let mut depth = 0usize;
    for (i, t) in tokens.iter().enumerate().skip(open_at) {
        if t.is(open) {
            depth += 1;
        } else if t.is(close) {
            depth -= 1;
            if depth == 0 {
                return Some(i);
            }
        }
    }
    None
}

fn matching_back(tokens: &[Token], close_at: usize, open: &str, close: &str) -> Option<usize> {
    let mut depth = 0usize;
    for i in (0..=close_at).rev() {
        if tokens[i].is(close) {
            depth += 1;
        } else if tokens[i].is(open) {
            depth -= 1;
            if depth == 0 {
                return Some(i);
            }
        }
    }
    None
}

/// Walks back from the last token of a return type to the first token of the
/// declaration (type, modifiers, annotations).
fn declaration_start(tokens: &[Token], type_end: usize) -> Option<usize> {
    let mut i = type_end;
    while tokens[i].is("]") || tokens[i].is(">") {
        i = if tokens[i].is("]") {
            matching_back(tokens, i, "[", "]")?
        } else {
            matching_back(tokens, i, "<", ">")?
        };
        i = i.checked_sub(1)?;
    }
    while i >= 2 && tokens[i - 1].is(".") && tokens[i - 2].is_identifier() {
        i -= 2;
    }
    let mut start = i;
    while let Some(prev) = start.checked_sub(1) {
        let p = &tokens[prev];
        if MODIFIERS.contains(&p.text.as_str()) {
            start = prev;
        } else if p.is(">") {
            // type parameters such as `<T>`
            start = matching_back(tokens, prev, "<", ">")?;
        } else if p.is(")") {
            // annotation arguments: `@Name(...)`
            let open = matching_back(tokens, prev, "(", ")")?;
            match annotation_head(tokens, open.checked_sub(1)?) {
                Some(at) => start = at,
                None => break,
            }
        } else if p.is_identifier() {
            match annotation_head(tokens, prev) {
                Some(at) => start = at,
                None => break,
            }
        } else {
            break;
        }
    }
    Some(start)
}

/// If `name_end` ends `@A.B.C`, the index of the `@`.
fn annotation_head(tokens: &[Token], name_end: usize) -> Option<usize> {
    let mut i = name_end;
    if !tokens[i].is_identifier() {
        return None;
    }
    while i >= 2 && tokens[i - 1].is(".") && tokens[i - 2].is_identifier() {
        i -= 2;
    }
    let at = i.checked_sub(1)?;
    tokens[at].is("@").then_some(at)
}

/// Finds method declarations with bodies in a whole source file.
pub fn scan_methods(source: &str) -> Vec<MethodSpan> {
    let tokens = lang::tokenize_lenient(source);
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < tokens.len() {
        let is_header = tokens[i].is_identifier()
            && tokens[i + 1].is("(")
            && type_ending(&tokens[i - 1])
            && !(i >= 2 && tokens[i - 2].is("new"));
        if !is_header {
            i += 1;
            continue;
        }
        let Some(close) = matching(&tokens, i + 1, "(", ")") else { break };
        // Skip an optional throws clause up to the body or a terminator.
        let mut j = close + 1;
        while j < tokens.len() && !tokens[j].is("{") && !tokens[j].is(";") && !tokens[j].is("}") {
            j += 1;
        }
        if j >= tokens.len() || !tokens[j].is("{") {
            i = j.max(i + 1);
            continue;
        }
        let Some(end) = matching(&tokens, j, "{", "}") else { break };
        if let Some(start) = declaration_start(&tokens, i - 1) {
            out.push(MethodSpan {
                start: tokens[start].span.offset,
                end: tokens[end].span.end(),
                name: tokens[i].text.clone(),
            });
        }
        i = end + 1;
    }
    out
}

fn record_id(path: &str, offset: usize) -> String {
    Digest::of(format!("{path}:{offset}").as_bytes()).hex()[..16].to_string()
}

/// Methods of one file. Returns the records and the number of scanned
/// methods that failed to parse.
pub fn methods_of_file(rel_path: &str, text: &str, normalize: bool) -> (Vec<MethodRecord>, usize) {
    let mut records = Vec::new();
    let mut unparseable = 0;
    for m in scan_methods(text) {
        let body = &text[m.start..m.end];
        let program = match Program::parse(body) {
            Ok(p) => p,
            Err(e) => {
                log::debug!("{rel_path}@{}: {} skipped: {e}", m.start, m.name);
                unparseable += 1;
                continue;
            }
        };
        let source = if normalize {
            program
                .with_method_name(NORMALIZED_NAME)
                .map(|p| p.source().to_string())
                .unwrap_or_else(|| body.to_string())
        } else {
            body.to_string()
        };
        records.push(MethodRecord {
            id: record_id(rel_path, m.start),
            path: rel_path.to_string(),
            offset: m.start,
            original_name: m.name,
            loc: program.loc(),
            source,
            tags: BTreeSet::new(),
        });
    }
    (records, unparseable)
}

/// Scans every `.java` file under `root`. Unreadable files are logged and
/// counted; only an unreadable root is an error.
pub fn ingest(root: &Path, normalize: bool) -> Result<IngestReport, CorpusError> {
    std::fs::read_dir(root).map_err(|source| CorpusError::Io {
        path: root.to_path_buf(),
        source,
    })?;
    let files: Vec<PathBuf> = walkdir::WalkDir::new(root)
        .sort_by_file_name()
        .into_iter()
        .filter_map(|e| match e {
            Ok(e) => Some(e),
            Err(err) => {
                log::warn!("{err}");
                None
            }
        })
        .filter(|e| e.file_type().is_file() && e.path().extension().is_some_and(|x| x == "java"))
        .map(|e| e.into_path())
        .collect();

    let per_file: Vec<Option<(Vec<MethodRecord>, usize)>> = files
        .par_iter()
        .map(|path| {
            let rel = path
                .strip_prefix(root)
                .unwrap_or(path)
                .components()
                .map(|c| c.as_os_str().to_string_lossy())
                .collect::<Vec<_>>()
                .join("/");
            match std::fs::read_to_string(path) {
                Ok(text) => Some(methods_of_file(&rel, &text, normalize)),
                Err(e) => {
                    log::warn!("cannot read {}: {e}", path.display());
                    None
                }
            }
        })
        .collect();

    let mut report = IngestReport {
        files: files.len(),
        ..Default::default()
    };
    for r in per_file {
        match r {
            Some((records, bad)) => {
                report.records.extend(records);
                report.unparseable += bad;
            }
            None => report.unreadable_files += 1,
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategorizeOptions {
    pub frequent_k: usize,
    pub rare_k: usize,
    pub small_loc: usize,
    pub large_band: (usize, usize),
}

impl Default for CategorizeOptions {
    fn default() -> Self {
        CategorizeOptions {
            frequent_k: 10,
            rare_k: 10,
            small_loc: DEFAULT_SMALL_LOC,
            large_band: DEFAULT_LARGE_BAND,
        }
    }
}

/// Method names ordered by descending count, ties alphabetical.
pub fn name_ranking(records: &[MethodRecord]) -> Vec<(String, usize)> {
    let mut hist: BTreeMap<&str, usize> = BTreeMap::new();
    for r in records {
        *hist.entry(r.original_name.as_str()).or_default() += 1;
    }
    let mut ranked: Vec<(String, usize)> = hist.into_iter().map(|(n, c)| (n.to_string(), c)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked
}

/// Replaces every record's tags. Frequent and rare are the first and last
/// `k` names of [`name_ranking`].
pub fn categorize(records: &mut [MethodRecord], opts: &CategorizeOptions) {
    let ranked = name_ranking(records);
    let frequent: BTreeSet<&str> = ranked.iter().take(opts.frequent_k).map(|(n, _)| n.as_str()).collect();
    let rare: BTreeSet<&str> = ranked
        .iter()
        .skip(ranked.len().saturating_sub(opts.rare_k))
        .map(|(n, _)| n.as_str())
        .collect();
    let (lo, hi) = opts.large_band;
    for r in records.iter_mut() {
        let mut tags = BTreeSet::new();
        if frequent.contains(r.original_name.as_str()) {
            tags.insert(Tag::Frequent);
        }
        if rare.contains(r.original_name.as_str()) {
            tags.insert(Tag::Rare);
        }
        if r.loc < opts.small_loc {
            tags.insert(Tag::Small);
        }
        if (lo..=hi).contains(&r.loc) {
            tags.insert(Tag::Large);
        }
        r.tags = tags;
    }
}

/// Seeded sample without replacement of records bearing `tag`.
pub fn sample(records: &[MethodRecord], tag: Tag, n: usize, seed: u64) -> Vec<MethodRecord> {
    let mut pool: Vec<&MethodRecord> = records.iter().filter(|r| r.has(tag)).collect();
    pool.sort_by(|a, b| a.id.cmp(&b.id));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pool.shuffle(&mut rng);
    if pool.len() < n {
        log::warn!("only {} `{tag}` records available, {n} requested", pool.len());
    }
    pool.into_iter().take(n).cloned().collect()
}

#[derive(Serialize, Deserialize)]
struct Line<R> {
    schema_version: u32,
    #[serde(flatten)]
    record: R,
}

pub fn write_jsonl<W: Write>(records: &[MethodRecord], mut out: W) -> std::io::Result<()> {
    for record in records {
        let line = Line {
            schema_version: SCHEMA_VERSION,
            record,
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<MethodRecord>, CorpusError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|source| CorpusError::Io {
            path: PathBuf::from("<corpus>"),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: Line<MethodRecord> =
            serde_json::from_str(&line).map_err(|source| CorpusError::BadLine { line: i + 1, source })?;
        out.push(parsed.record);
    }
    Ok(out)
}
