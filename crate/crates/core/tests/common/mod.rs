#![allow(dead_code)]

use proptest::prelude::*;

const NAMES: &[&str] = &["a", "b", "count", "temp", "name", "items"];
const TYPES: &[&str] = &["int", "String", "boolean", "Object", "long", "T"];
const CALLEES: &[&str] = &["g", "run", "process"];

fn pick(xs: &'static [&'static str]) -> impl Strategy<Value = String> {
    prop::sample::select(xs).prop_map(str::to_string)
}

pub fn expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        pick(NAMES),
        (0u32..100).prop_map(|n| n.to_string()),
        "[a-z ]{0,6}".prop_map(|s| format!("\"{s}\"")),
        Just("null".to_string()),
        Just("true".to_string()),
        Just("this.size".to_string()),
    ];
    leaf.prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            (
                inner.clone(),
                prop::sample::select(&["+", "-", "*", "==", "<", "&&", "!="][..]),
                inner.clone()
            )
                .prop_map(|(l, op, r)| format!("{l} {op} {r}")),
            (pick(CALLEES), prop::collection::vec(inner.clone(), 0..3))
                .prop_map(|(f, args)| format!("{f}({})", args.join(", "))),
            (pick(NAMES), pick(CALLEES), prop::collection::vec(inner.clone(), 0..2))
                .prop_map(|(r, m, args)| format!("{r}.{m}({})", args.join(", "))),
            inner.clone().prop_map(|e| format!("({e})")),
            inner.clone().prop_map(|e| format!("!{e}")),
            prop::collection::vec(inner, 0..3).prop_map(|a| format!("new Box({})", a.join(", "))),
        ]
    })
}

pub fn stmt() -> impl Strategy<Value = String> {
    let simple = prop_oneof![
        (pick(TYPES), pick(NAMES), prop::option::of(expr())).prop_map(|(t, n, e)| match e {
            Some(e) => format!("{t} {n} = {e};"),
            None => format!("{t} {n};"),
        }),
        (pick(NAMES), expr()).prop_map(|(n, e)| format!("{n} = {e};")),
        (pick(CALLEES), prop::collection::vec(expr(), 0..3))
            .prop_map(|(f, a)| format!("{f}({});", a.join(", "))),
        pick(NAMES).prop_map(|n| format!("{n}++;")),
        prop::option::of(expr()).prop_map(|e| match e {
            Some(e) => format!("return {e};"),
            None => "return;".to_string(),
        }),
        expr().prop_map(|e| format!("throw new Error({e});")),
        Just("super.setUp();".to_string()),
    ];
    simple.prop_recursive(2, 12, 3, |inner| {
        let block = prop::collection::vec(inner, 0..3).prop_map(|s| format!("{{ {} }}", s.join(" ")));
        prop_oneof![
            (expr(), block.clone(), prop::option::of(block.clone())).prop_map(|(c, t, e)| match e {
                Some(e) => format!("if ({c}) {t} else {e}"),
                None => format!("if ({c}) {t}"),
            }),
            (expr(), block.clone()).prop_map(|(c, b)| format!("while ({c}) {b}")),
            (pick(NAMES), block.clone()).prop_map(|(n, b)| format!("for (int i = 0; i < {n}; i++) {b}")),
            (pick(TYPES), pick(NAMES), block.clone()).prop_map(|(t, n, b)| format!("for ({t} x : {n}) {b}")),
            (block.clone(), block.clone(), prop::option::of(block)).prop_map(|(t, c, f)| match f {
                Some(f) => format!("try {t} catch (Exception e) {c} finally {f}"),
                None => format!("try {t} catch (Exception e) {c}"),
            }),
        ]
    })
}

/// Well-formed methods drawn from the supported grammar subset.
pub fn method() -> impl Strategy<Value = String> {
    (
        any::<bool>(),
        prop::sample::subsequence(vec!["public", "static", "final"], 0..=2),
        prop::sample::select(&["void", "int", "String", "boolean", "String[]"][..]),
        prop::sample::subsequence(
            vec![("int", "a"), ("String[]", "args"), ("Object", "o"), ("long", "b")],
            0..=3,
        ),
        any::<bool>(),
        prop::collection::vec(stmt(), 0..6),
    )
        .prop_map(|(annotated, mods, ret, params, throws, body)| {
            let mut s = String::new();
            if annotated {
                s.push_str("@Override\n");
            }
            for m in mods {
                s.push_str(m);
                s.push(' ');
            }
            let params: Vec<String> = params.iter().map(|(t, n)| format!("{t} {n}")).collect();
            s.push_str(&format!("{ret} f({})", params.join(", ")));
            if throws {
                s.push_str(" throws Exception, IOException");
            }
            s.push_str(" {\n");
            for st in body {
                s.push_str("    ");
                s.push_str(&st);
                s.push('\n');
            }
            s.push('}');
            s
        })
}

/// The twenty bundled corpus methods.
pub fn corpus_sources() -> Vec<String> {
    ci_reduce_core::fixtures::load_fixture("mock_corpus")
        .unwrap()
        .programs
        .into_iter()
        .map(|p| p.source)
        .collect()
}
