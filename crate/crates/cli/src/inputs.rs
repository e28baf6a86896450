use std::collections::BTreeSet;
use std::io::BufReader;

use anyhow::{bail, Context, Result};
use ci_reduce_core::corpus::read_jsonl;
use ci_reduce_core::fixtures::load_fixture;
use ci_reduce_core::oracle::{Digest, OracleSpec};
use serde::Serialize;

use crate::config::{read, InputArgs};

#[derive(Debug, Clone)]
pub struct Input {
    /// Unique, path-safe name used for the job directory.
    pub id: String,
    pub source: String,
    pub origin: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub id: String,
    pub origin: String,
    pub sha256: String,
}

impl Input {
    pub fn digest(&self) -> InputDigest {
        InputDigest {
            id: self.id.clone(),
            origin: self.origin.clone(),
            sha256: Digest::of(self.source.as_bytes()).hex(),
        }
    }
}

pub struct Inputs {
    pub items: Vec<Input>,
    /// Oracle bundled with a fixture, used when no oracle flag is given.
    pub fixture_oracle: Option<OracleSpec>,
}

fn path_safe(s: &str) -> String {
    let cleaned: String = s
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect();
    if cleaned.is_empty() || cleaned.starts_with('.') {
        format!("input{cleaned}")
    } else {
        cleaned
    }
}

pub fn load(args: &InputArgs) -> Result<Inputs> {
    let mut raw: Vec<(String, String, String)> = Vec::new();
    let mut fixture_oracle = None;

    for path in &args.inputs {
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        raw.push((stem, read(path)?, path.display().to_string()));
    }
    if let Some(path) = &args.corpus {
        let file = std::fs::File::open(path).with_context(|| format!("cannot read {}", path.display()))?;
        for r in read_jsonl(BufReader::new(file))? {
            let origin = format!("{}#{}", path.display(), r.id);
            raw.push((r.id, r.source, origin));
        }
    }
    if let Some(name) = &args.fixture {
        let f = load_fixture(name)?;
        for p in f.programs {
            raw.push((p.id.clone(), p.source, format!("fixture:{name}/{}", p.id)));
        }
        fixture_oracle = f.oracle;
    }
    if raw.is_empty() {
        bail!("no inputs (use --input, --corpus or --fixture)");
    }

    let mut seen = BTreeSet::new();
    let items = raw
        .into_iter()
        .enumerate()
        .map(|(i, (name, source, origin))| {
            let mut id = path_safe(&name);
            if !seen.insert(id.clone()) {
                id = format!("{id}-{}", i + 1);
                seen.insert(id.clone());
            }
            Input { id, source, origin }
        })
        .collect();
    Ok(Inputs { items, fixture_oracle })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_unique_and_path_safe() {
        assert_eq!(path_safe("a b/c"), "a_b_c");
        assert_eq!(path_safe(".."), "input..");
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("x.java"), dir.path().join("sub"));
        std::fs::create_dir(&b).unwrap();
        let b = b.join("x.java");
        std::fs::write(&a, "void f(){}").unwrap();
        std::fs::write(&b, "void g(){}").unwrap();
        let ins = load(&InputArgs {
            inputs: vec![a, b],
            ..Default::default()
        })
        .unwrap();
        let ids: Vec<_> = ins.items.iter().map(|i| i.id.as_str()).collect();
        assert_eq!(ids, ["x", "x-2"]);
    }

    #[test]
    fn fixtures_carry_their_oracle() {
        let ins = load(&InputArgs {
            fixture: Some("swap".into()),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(ins.items.len(), 1);
        assert!(ins.fixture_oracle.is_some());
        assert!(load(&InputArgs::default()).is_err());
    }
}
