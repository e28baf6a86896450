//! Bundled desk-scale fixtures.
//!
//! Entries flagged `documentation_only` record outputs of real models and
//! are not reproducible with the bundled mocks.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus;
use crate::metrics::Technique;
use crate::oracle::OracleSpec;

pub const NAMES: [&str; 3] = ["explanation_main", "swap", "mock_corpus"];

const EXPLANATION_MAIN: &str = include_str!("../fixtures/explanation_main.json");
const SWAP: &str = include_str!("../fixtures/swap.json");
const REFERENCE_TABLES: &str = include_str!("../fixtures/reference_tables.json");
const MOCK_ORACLE: &str = include_str!("../fixtures/mock_corpus/oracle.json");
const MOCK_FILES: [(&str, &str); 4] = [
    ("Mains.java", include_str!("../fixtures/mock_corpus/Mains.java")),
    ("Equalities.java", include_str!("../fixtures/mock_corpus/Equalities.java")),
    ("Printers.java", include_str!("../fixtures/mock_corpus/Printers.java")),
    ("Fixtures.java", include_str!("../fixtures/mock_corpus/Fixtures.java")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureProgram {
    pub id: String,
    pub label: String,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expected {
    pub program: String,
    pub technique: Technique,
    pub output: String,
    pub documentation_only: bool,
    #[serde(default)]
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub name: String,
    pub description: String,
    pub documentation_only: bool,
    pub oracle: Option<OracleSpec>,
    pub programs: Vec<FixtureProgram>,
    pub expected: Vec<Expected>,
}

impl Fixture {
    /// Expectations reproducible with the bundled oracle.
    pub fn executable(&self) -> impl Iterator<Item = &Expected> {
        self.expected.iter().filter(|e| !e.documentation_only)
    }

    pub fn program(&self, id: &str) -> Option<&FixtureProgram> {
        self.programs.iter().find(|p| p.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FixtureError {
    #[error("no fixture named `{0}` (available: explanation_main, swap, mock_corpus)")]
    NotFound(String),
}

pub fn load_fixture(name: &str) -> Result<Fixture, FixtureError> {
    let parse = |text: &str| -> Fixture { serde_json::from_str(text).expect("bundled fixture is valid JSON") };
    match name {
        "explanation_main" => Ok(parse(EXPLANATION_MAIN)),
        "swap" => Ok(parse(SWAP)),
        "mock_corpus" => Ok(mock_corpus()),
        _ => Err(FixtureError::NotFound(name.to_string())),
    }
}

fn mock_corpus() -> Fixture {
    let mut programs = Vec::new();
    for (file, text) in MOCK_FILES {
        let (records, bad) = corpus::methods_of_file(file, text, true);
        assert_eq!(bad, 0, "bundled mock corpus parses");
        for (i, r) in records.into_iter().enumerate() {
            programs.push(FixtureProgram {
                id: format!("{}-{}", r.original_name, i + 1),
                label: r.original_name,
                source: r.source,
            });
        }
    }
    Fixture {
        name: "mock_corpus".into(),
        description: "Twenty methods over four labels with one token-set oracle.".into(),
        documentation_only: false,
        oracle: Some(mock_oracle()),
        programs,
        expected: Vec::new(),
    }
}

/// The multi-label token-set oracle of the mock corpus.
pub fn mock_oracle() -> OracleSpec {
    serde_json::from_str(MOCK_ORACLE).expect("bundled oracle spec is valid JSON")
}

/// The mock corpus source files as `(file name, text)`.
pub fn mock_corpus_files() -> &'static [(&'static str, &'static str)] {
    &MOCK_FILES
}

/// On-disk location of the bundled fixtures (source checkouts only).
pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversarialRow {
    pub reduction: String,
    pub model: String,
    pub set: String,
    pub initial: u64,
    pub transformed: u64,
    pub mispredictions: u64,
    /// Printed percentage, kept as text so no float rounding creeps in.
    pub percent: String,
}

impl AdversarialRow {
    /// The printed percentage in hundredths.
    pub fn hundredths(&self) -> u64 {
        let (int, frac) = self.percent.split_once('.').unwrap_or((&self.percent, "0"));
        let frac = format!("{frac:0<2}");
        int.parse::<u64>().expect("integer part") * 100 + frac[..2].parse::<u64>().expect("fraction")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: String,
    pub model: String,
    pub dd_candidate: u64,
    pub dd_key: u64,
    pub perses_candidate: u64,
    pub perses_key: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTotals {
    pub dd_candidate: u64,
    pub dd_key: u64,
    pub perses_candidate: u64,
    pub perses_key: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSummary {
    pub rows: Vec<SummaryRow>,
    pub top10_both: SummaryTotals,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyFeatureRow {
    pub method: String,
    pub model: String,
    pub reduction: String,
    pub features: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceTables {
    pub documentation_only: bool,
    pub adversarial: Vec<AdversarialRow>,
    pub feature_summary: FeatureSummary,
    pub key_features: Vec<KeyFeatureRow>,
}

pub fn reference_tables() -> ReferenceTables {
    serde_json::from_str(REFERENCE_TABLES).expect("bundled tables are valid JSON")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_fixtures_load() {
        let f = load_fixture("explanation_main").unwrap();
        assert_eq!(f.programs.len(), 1);
        assert_eq!(f.expected.len(), 4);
        assert_eq!(f.executable().count(), 1);
        assert!(load_fixture("swap").is_ok());
        assert_eq!(
            load_fixture("nope"),
            Err(FixtureError::NotFound("nope".into()))
        );
    }

    #[test]
    fn mock_corpus_has_twenty_methods_over_four_labels() {
        let f = load_fixture("mock_corpus").unwrap();
        assert_eq!(f.programs.len(), 20);
        let labels: std::collections::BTreeSet<_> = f.programs.iter().map(|p| p.label.as_str()).collect();
        assert_eq!(labels.into_iter().collect::<Vec<_>>(), ["equals", "main", "setUp", "toString"]);
        assert!(f.programs.iter().all(|p| p.source.contains(" f(")));
    }

    #[test]
    fn tables_shape() {
        let t = reference_tables();
        assert_eq!(t.adversarial.len(), 12);
        assert_eq!(t.adversarial[0].hundredths(), 1176);
        assert_eq!(t.adversarial[11].hundredths(), 6500);
        assert_eq!(t.feature_summary.rows.len(), 30);
        assert_eq!(t.key_features.len(), 40);
    }
}
