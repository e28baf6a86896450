//! Key and sparse input features of a label's reduced programs.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::{Program, Rule, Token};
use crate::metrics::SCHEMA_VERSION;

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureKind {
    Token,
    NodeType,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Key,
    Sparse,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureEntry {
    pub feature: String,
    pub kind: FeatureKind,
    pub df: usize,
    pub classification: Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureReport {
    pub schema_version: u32,
    pub label: String,
    pub n: usize,
    pub threshold: f64,
    pub entries: Vec<FeatureEntry>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeatureError {
    #[error("no reduced programs for label `{0}`")]
    EmptySet(String),
    #[error("threshold must be in (0, 1], got {0}")]
    InvalidThreshold(f64),
}

/// Index of the header name token. Falls back to a scan for the first
/// identifier followed by `(` ahead of the body when the text does not parse.
fn header_name_index(program: &Program) -> Option<usize> {
    if let Some(i) = program.method_name_index() {
        return Some(i);
    }
    let toks: &[Token] = program.tokens();
    let body = toks.iter().position(|t| t.is("{")).unwrap_or(toks.len());
    (0..body.min(toks.len().saturating_sub(1)))
        .find(|&i| toks[i].is_identifier() && toks[i + 1].is("("))
}

/// Distinct token texts (minus the header name) and node-type names of one
/// program.
pub fn program_features(program: &Program) -> BTreeSet<(FeatureKind, String)> {
    let skip = header_name_index(program);
    let mut out: BTreeSet<(FeatureKind, String)> = program
        .tokens()
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != skip)
        .map(|(_, t)| (FeatureKind::Token, t.text.clone()))
        .collect();
    if let Some(tree) = program.tree() {
        tree.walk(&mut |_, n| {
            if n.rule != Rule::Token {
                out.insert((FeatureKind::NodeType, n.rule.name().to_string()));
            }
        });
    }
    out
}

pub fn extract_features(
    reduced: &[Program],
    label: &str,
    threshold: f64,
) -> Result<FeatureReport, FeatureError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(FeatureError::InvalidThreshold(threshold));
    }
    if reduced.is_empty() {
        return Err(FeatureError::EmptySet(label.to_string()));
    }
    let n = reduced.len();
    let mut df: BTreeMap<(FeatureKind, String), usize> = BTreeMap::new();
    for p in reduced {
        for f in program_features(p) {
            *df.entry(f).or_default() += 1;
        }
    }
    let mut entries: Vec<FeatureEntry> = df
        .into_iter()
        .map(|((kind, feature), df)| FeatureEntry {
            classification: if df as f64 / n as f64 >= threshold {
                Classification::Key
            } else {
                Classification::Sparse
            },
            feature,
            kind,
            df,
        })
        .collect();
    entries.sort_by(|a, b| {
        b.df.cmp(&a.df)
            .then_with(|| a.feature.cmp(&b.feature))
            .then_with(|| a.kind.cmp(&b.kind))
    });
    Ok(FeatureReport {
        schema_version: SCHEMA_VERSION,
        label: label.to_string(),
        n,
        threshold,
        entries,
    })
}

impl FeatureReport {
    /// Number of distinct token features.
    pub fn candidate_count(&self) -> usize {
        self.entries.iter().filter(|e| e.kind == FeatureKind::Token).count()
    }

    pub fn key_features(&self, kind: FeatureKind) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|e| e.kind == kind && e.classification == Classification::Key)
            .map(|e| e.feature.as_str())
            .collect()
    }

    pub fn key_tokens(&self) -> BTreeSet<String> {
        self.key_features(FeatureKind::Token)
            .into_iter()
            .map(str::to_string)
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["feature", "kind", "df", "n", "classification"])?;
        for e in &self.entries {
            w.write_record([
                e.feature.clone(),
                kind_name(e.kind).to_string(),
                e.df.to_string(),
                self.n.to_string(),
                match e.classification {
                    Classification::Key => "key",
                    Classification::Sparse => "sparse",
                }
                .to_string(),
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

fn kind_name(kind: FeatureKind) -> &'static str {
    match kind {
        FeatureKind::Token => "token",
        FeatureKind::NodeType => "node-type",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn programs(srcs: &[&str]) -> Vec<Program> {
        srcs.iter().map(|s| Program::new(*s)).collect()
    }

    fn entry<'a>(r: &'a FeatureReport, f: &str) -> &'a FeatureEntry {
        r.entries
            .iter()
            .find(|e| e.kind == FeatureKind::Token && e.feature == f)
            .unwrap()
    }

    #[test]
    fn threshold_is_inclusive() {
        let mut srcs = Vec::new();
        for i in 0..10 {
            let mut body = String::new();
            if i < 5 {
                body.push_str("five();");
            }
            if i < 4 {
                body.push_str("int temp;");
            }
            srcs.push(format!("void f(){{{body}}}"));
        }
        let ps: Vec<Program> = srcs.iter().map(|s| Program::new(s.as_str())).collect();
        let r = extract_features(&ps, "x", 0.5).unwrap();
        assert_eq!(entry(&r, "void").classification, Classification::Key);
        assert_eq!(entry(&r, "void").df, 10);
        assert_eq!(entry(&r, "five").classification, Classification::Key);
        assert_eq!(entry(&r, "temp").classification, Classification::Sparse);
        assert_eq!(entry(&r, "temp").df, 4);
    }

    #[test]
    fn method_name_is_excluded_but_body_uses_kept() {
        let r = extract_features(&programs(&["void setUp(){super.setUp();}"]), "setUp", 0.5).unwrap();
        assert_eq!(entry(&r, "setUp").df, 1);
        let r = extract_features(&programs(&["void f(){}"]), "x", 0.5).unwrap();
        assert_eq!(r.candidate_count(), 5);
        assert!(r.entries.iter().all(|e| e.feature != "f"));
    }

    #[test]
    fn unparsed_programs_use_the_header_scan() {
        let r = extract_features(&programs(&["void f(String[]args){(\"\");(args);}"]), "main", 0.5).unwrap();
        assert!(r.entries.iter().all(|e| e.feature != "f"));
        assert!(r.entries.iter().all(|e| e.kind == FeatureKind::Token));
    }

    #[test]
    fn node_types_are_reported_separately() {
        let r = extract_features(&programs(&["void f(int a){a = 1;}"]), "x", 0.5).unwrap();
        let nodes = r.key_features(FeatureKind::NodeType);
        assert!(nodes.contains(&"AssignExpr"));
        assert!(!nodes.contains(&"Token"));
        assert_eq!(r.candidate_count(), 10);
    }

    #[test]
    fn guards() {
        assert_eq!(
            extract_features(&[], "x", 0.5),
            Err(FeatureError::EmptySet("x".into()))
        );
        assert!(extract_features(&programs(&["void f(){}"]), "x", 0.0).is_err());
        assert!(extract_features(&programs(&["void f(){}"]), "x", 1.5).is_err());
    }

    #[test]
    fn csv_layout() {
        let r = extract_features(&programs(&["void f(){}"]), "x", 0.5).unwrap();
        let csv = r.to_csv();
        assert!(csv.starts_with("feature,kind,df,n,classification\n"));
        assert!(csv.contains("void,token,1,1,key\n"));
        assert!(csv.contains("Block,node-type,1,1,key\n"));
    }
}
