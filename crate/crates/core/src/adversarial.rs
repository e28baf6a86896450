//! Variable-renaming adversarial sets and misprediction rates.

use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::{LangError, ParseNode, Program, Rule, Span};
use crate::metrics::SCHEMA_VERSION;
use crate::oracle::{OracleSession, VerdictStatus};

pub const RENAME_TARGET: &str = "var";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetKind {
    Actual,
    Key,
    Reduced,
}

impl SetKind {
    pub fn name(self) -> &'static str {
        match self {
            SetKind::Actual => "actual",
            SetKind::Key => "key",
            SetKind::Reduced => "reduced",
        }
    }
}

impl std::str::FromStr for SetKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [SetKind::Actual, SetKind::Key, SetKind::Reduced]
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown adversarial set `{s}` (expected actual, key or reduced)"))
    }
}

/// What to do when `var` is already a declared variable.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CollisionPolicy {
    #[default]
    Skip,
    Suffix,
}

impl CollisionPolicy {
    pub fn name(self) -> &'static str {
        match self {
            CollisionPolicy::Skip => "skip",
            CollisionPolicy::Suffix => "suffix",
        }
    }
}

impl std::str::FromStr for CollisionPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [CollisionPolicy::Skip, CollisionPolicy::Suffix]
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown collision policy `{s}` (expected skip or suffix)"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdversarialError {
    #[error(transparent)]
    Lang(#[from] LangError),
    #[error("`{0}` is not a declared variable")]
    NameNotFound(String),
    #[error("`{0}` is already a declared variable")]
    Collision(String),
    #[error("the key set needs a key-feature list")]
    MissingKeyFeatures,
}

fn tree_of(program: &Program) -> Result<&ParseNode, AdversarialError> {
    program.tree().ok_or_else(|| {
        AdversarialError::Lang(program.error().cloned().expect("unparsed program has an error"))
    })
}

fn collect_leaves<'a>(node: &'a ParseNode, rules: &[Rule], out: &mut Vec<&'a ParseNode>) {
    node.walk(&mut |_, n| {
        if rules.contains(&n.rule) {
            out.extend(n.children.iter().filter(|c| c.is_leaf()));
        }
    });
}

/// Parameter and local names in declaration order, deduplicated.
pub fn list_variables(program: &Program) -> Result<Vec<String>, AdversarialError> {
    let mut leaves = Vec::new();
    collect_leaves(tree_of(program)?, &[Rule::VarName], &mut leaves);
    let mut seen = BTreeSet::new();
    Ok(leaves
        .into_iter()
        .filter_map(|l| l.leaf_text())
        .filter(|t| seen.insert(*t))
        .map(str::to_string)
        .collect())
}

/// Spans of every declaration or plain-name use of `name`. Type names,
/// method names and member names after `.` are never `NameExpr`/`VarName`
/// leaves, so they are left alone.
fn occurrences(tree: &ParseNode, name: &str) -> Vec<Span> {
    let mut leaves = Vec::new();
    collect_leaves(tree, &[Rule::VarName, Rule::NameExpr], &mut leaves);
    leaves
        .into_iter()
        .filter_map(|l| l.token.as_ref())
        .filter(|t| t.is(name))
        .map(|t| t.span)
        .collect()
}

/// Renames every occurrence of variable `name` to `var`, returning the new
/// program and the name actually used.
pub fn rename_variable(
    program: &Program,
    name: &str,
    policy: CollisionPolicy,
) -> Result<(Program, String), AdversarialError> {
    let vars = list_variables(program)?;
    if !vars.iter().any(|v| v == name) {
        return Err(AdversarialError::NameNotFound(name.to_string()));
    }
    let taken = |n: &str| vars.iter().any(|v| v == n);
    let new_name = if !taken(RENAME_TARGET) {
        RENAME_TARGET.to_string()
    } else if policy == CollisionPolicy::Skip {
        return Err(AdversarialError::Collision(RENAME_TARGET.to_string()));
    } else {
        let used: BTreeSet<&str> = program.tokens().iter().map(|t| t.text.as_str()).collect();
        (1..)
            .map(|i| format!("{RENAME_TARGET}_{i}"))
            .find(|n| !used.contains(n.as_str()))
            .expect("some suffix is free")
    };
    let mut source = program.source().to_string();
    for span in occurrences(tree_of(program)?, name).iter().rev() {
        source.replace_range(span.offset..span.end(), &new_name);
    }
    Ok((Program::new(source), new_name))
}

#[derive(Debug, Clone)]
pub struct Origin {
    pub id: String,
    pub program: Program,
    /// The origin's predicted label.
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transformed {
    pub origin_id: String,
    pub variable: String,
    pub new_name: String,
    pub source: String,
    pub status: VerdictStatus,
    pub predicted: Option<String>,
    pub mispredicted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversarialSet {
    pub kind: SetKind,
    pub initial: usize,
    pub transformed: Vec<Transformed>,
    /// Variables skipped because of a name collision.
    pub skipped: usize,
}

/// One transformed program per (origin, eligible variable). Origins that do
/// not parse contribute no variables.
pub fn build_set(
    kind: SetKind,
    origins: &[Origin],
    key_features: Option<&BTreeSet<String>>,
    session: &OracleSession,
    policy: CollisionPolicy,
) -> Result<AdversarialSet, AdversarialError> {
    if kind == SetKind::Key && key_features.is_none() {
        return Err(AdversarialError::MissingKeyFeatures);
    }
    let mut set = AdversarialSet {
        kind,
        initial: origins.len(),
        transformed: Vec::new(),
        skipped: 0,
    };
    for origin in origins {
        let vars = match list_variables(&origin.program) {
            Ok(v) => v,
            Err(e) => {
                log::warn!("{}: {e}", origin.id);
                continue;
            }
        };
        for var in vars {
            if kind == SetKind::Key && !key_features.is_some_and(|k| k.contains(&var)) {
                continue;
            }
            let (program, new_name) = match rename_variable(&origin.program, &var, policy) {
                Ok(r) => r,
                Err(AdversarialError::Collision(_)) => {
                    set.skipped += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let verdict = session.predict(program.source());
            let mispredicted = verdict
                .label()
                .is_some_and(|l| l != origin.label);
            set.transformed.push(Transformed {
                origin_id: origin.id.clone(),
                variable: var,
                new_name,
                source: program.source().to_string(),
                status: verdict.status,
                predicted: verdict.label,
                mispredicted,
            });
        }
    }
    Ok(set)
}

/// A misprediction percentage rounded half-up to two decimals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub percent: f64,
    /// Percentage in hundredths of a percent (1176 means 11.76%).
    pub hundredths: u64,
    /// Set when there was nothing to divide by; the rate then reads 0.
    pub undefined: bool,
}

impl std::fmt::Display for Rate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}.{:02}", self.hundredths / 100, self.hundredths % 100)
    }
}

pub fn rate(transformed: u64, mispredictions: u64) -> Rate {
    if transformed == 0 {
        log::warn!("misprediction rate is undefined for an empty set; reporting 0");
        return Rate {
            percent: 0.0,
            hundredths: 0,
            undefined: true,
        };
    }
    // round(10000 * m / t) with halves going up, in exact integer arithmetic
    let hundredths = (20_000 * mispredictions + transformed) / (2 * transformed);
    Rate {
        percent: hundredths as f64 / 100.0,
        hundredths,
        undefined: false,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversarialReport {
    pub schema_version: u32,
    pub kind: SetKind,
    pub initial: usize,
    pub transformed: usize,
    pub mispredictions: usize,
    pub errors: usize,
    pub skipped: usize,
    pub rate: Rate,
}

impl AdversarialReport {
    pub fn of(set: &AdversarialSet) -> Self {
        let mispredictions = set.transformed.iter().filter(|t| t.mispredicted).count();
        let errors = set
            .transformed
            .iter()
            .filter(|t| t.status != VerdictStatus::Predicted)
            .count();
        AdversarialReport {
            schema_version: SCHEMA_VERSION,
            kind: set.kind,
            initial: set.initial,
            transformed: set.transformed.len(),
            mispredictions,
            errors,
            skipped: set.skipped,
            rate: rate(set.transformed.len() as u64, mispredictions as u64),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn write_csv<W: Write>(reports: &[AdversarialReport], out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "set",
            "initial",
            "transformed",
            "mispredictions",
            "rate_percent",
            "errors",
            "skipped",
            "rate_undefined",
        ])?;
        for r in reports {
            w.write_record([
                r.kind.name().to_string(),
                r.initial.to_string(),
                r.transformed.to_string(),
                r.mispredictions.to_string(),
                r.rate.to_string(),
                r.errors.to_string(),
                r.skipped.to_string(),
                r.rate.undefined.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::mock_token_set;

    const SWAP: &str = "void f(int a, int b){int temp=a; a=b; b=temp;}";
    const MAIN: &str = "public static void f(String[] args) {\n    System.setProperty(\n        Constants.DUBBO_PROPERTIES_KEY, \n        \"conf/dubbo.properties\");\n    Main.main(args);\n}";

    fn p(s: &str) -> Program {
        Program::parse(s).unwrap()
    }

    #[test]
    fn variables() {
        assert_eq!(list_variables(&p(SWAP)).unwrap(), ["a", "b", "temp"]);
        assert!(list_variables(&p("void f(){}")).unwrap().is_empty());
        assert_eq!(list_variables(&p(MAIN)).unwrap(), ["args"]);
        assert_eq!(
            list_variables(&p("void f(){ for (String s : xs) {} try {} catch (E e) {} }")).unwrap(),
            ["s", "e"]
        );
    }

    #[test]
    fn renaming() {
        let (r, n) = rename_variable(&p(SWAP), "temp", CollisionPolicy::Skip).unwrap();
        assert_eq!(n, "var");
        assert_eq!(r.source(), "void f(int a, int b){int var=a; a=b; b=var;}");

        let (r, _) = rename_variable(&p("void f(){int a; a = a + 1;}"), "a", CollisionPolicy::Skip).unwrap();
        assert_eq!(r.source(), "void f(){int var; var = var + 1;}");

        let (r, _) = rename_variable(&p(MAIN), "args", CollisionPolicy::Skip).unwrap();
        assert!(r.source().contains("Main.main(var)"));
        assert!(r.source().contains("String[] var"));
        assert_eq!(r.token_count(), p(MAIN).token_count());
    }

    #[test]
    fn members_and_types_are_untouched() {
        let src = "void f(int size){ size = this.size + size(); List size2; }";
        let (r, _) = rename_variable(&p(src), "size", CollisionPolicy::Skip).unwrap();
        assert_eq!(r.source(), "void f(int var){ var = this.size + size(); List size2; }");
    }

    #[test]
    fn collisions() {
        let src = "void f(int var, int x, int var_1){ x = var; }";
        assert!(matches!(
            rename_variable(&p(src), "x", CollisionPolicy::Skip),
            Err(AdversarialError::Collision(n)) if n == "var"
        ));
        let (r, n) = rename_variable(&p(src), "x", CollisionPolicy::Suffix).unwrap();
        assert_eq!(n, "var_2");
        assert_eq!(r.source(), "void f(int var, int var_2, int var_1){ var_2 = var; }");
        assert!(matches!(
            rename_variable(&p(src), "y", CollisionPolicy::Skip),
            Err(AdversarialError::NameNotFound(n)) if n == "y"
        ));
    }

    #[test]
    fn rate_rounding() {
        assert_eq!(rate(1148, 135).to_string(), "11.76");
        assert_eq!(rate(267, 134).to_string(), "50.19");
        assert_eq!(rate(10, 0).to_string(), "0.00");
        assert_eq!(rate(8, 1).to_string(), "12.50");
        // exact half of a hundredth rounds up
        assert_eq!(rate(320, 58).to_string(), "18.13");
        let r = rate(0, 0);
        assert!(r.undefined);
        assert_eq!(r.percent, 0.0);
    }

    #[test]
    fn required_variable_flips_the_mock() {
        let s = mock_token_set(["void", "args"], "main");
        let origin = Origin {
            id: "m".into(),
            program: p(MAIN),
            label: "main".into(),
        };
        let set = build_set(SetKind::Actual, &[origin], None, &s, CollisionPolicy::Skip).unwrap();
        let rep = AdversarialReport::of(&set);
        assert_eq!((rep.transformed, rep.mispredictions), (1, 1));
        assert_eq!(rep.rate.to_string(), "100.00");
    }

    #[test]
    fn empty_and_key_sets() {
        let s = mock_token_set(["void"], "t");
        let origin = Origin {
            id: "e".into(),
            program: p("void f(){}"),
            label: "t".into(),
        };
        let set = build_set(SetKind::Actual, std::slice::from_ref(&origin), None, &s, CollisionPolicy::Skip).unwrap();
        let rep = AdversarialReport::of(&set);
        assert_eq!(rep.transformed, 0);
        assert!(rep.rate.undefined);
        assert_eq!(
            build_set(SetKind::Key, &[origin], None, &s, CollisionPolicy::Skip),
            Err(AdversarialError::MissingKeyFeatures)
        );
    }
}
