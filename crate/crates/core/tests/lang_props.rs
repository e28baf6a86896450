mod common;

use ci_reduce_core::lang::{join_tokens, render, tokenize, Program};
use ci_reduce_core::tree_reduce::{candidate_without, list_deletable};
use proptest::prelude::*;

fn texts(p: &Program) -> Vec<String> {
    p.tokens().iter().map(|t| t.text.clone()).collect()
}

fn check_program(src: &str) -> Result<(), TestCaseError> {
    let p = Program::parse(src).map_err(|e| TestCaseError::fail(format!("{e}: {src}")))?;
    let tree = p.tree().unwrap();

    // The frontier is the token stream.
    let frontier: Vec<String> = tree.frontier().iter().map(|t| t.text.clone()).collect();
    prop_assert_eq!(frontier, texts(&p));

    // Rendering re-lexes to the same tokens and re-parses to the same shape.
    let rendered = render(tree);
    let again = Program::parse(rendered.as_str()).unwrap();
    prop_assert_eq!(texts(&again), texts(&p));
    prop_assert!(again.tree().unwrap().same_shape(tree));

    // Removing any single deletable node leaves a valid program.
    for (path, node) in list_deletable(tree) {
        let cand = candidate_without(tree, &path);
        prop_assert!(
            Program::new(cand.as_str()).is_valid(),
            "deleting {} at {:?} broke {:?}",
            node.rule,
            path,
            cand
        );
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn generated_methods_round_trip(src in common::method()) {
        check_program(&src)?;
    }

    #[test]
    fn joined_tokens_relex_identically(src in common::method()) {
        let toks = tokenize(&src).unwrap();
        let joined = join_tokens(toks.iter().map(|t| t.text.as_str()));
        let again = tokenize(&joined).unwrap();
        let a: Vec<_> = toks.iter().map(|t| (t.kind, t.text.as_str())).collect();
        let b: Vec<_> = again.iter().map(|t| (t.kind, t.text.as_str())).collect();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn spans_slice_the_source(src in common::method()) {
        for t in tokenize(&src).unwrap() {
            prop_assert_eq!(&src[t.span.offset..t.span.end()], t.text.as_str());
        }
    }

    #[test]
    fn arbitrary_text_never_panics(src in "[ -~\n]{0,80}") {
        let p = Program::new(src.as_str());
        prop_assert_eq!(p.is_valid(), p.error().is_none());
    }
}

#[test]
fn corpus_methods_round_trip() {
    for src in common::corpus_sources() {
        check_program(&src).unwrap();
    }
}
