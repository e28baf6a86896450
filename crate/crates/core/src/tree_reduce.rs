//! Syntax-guided reduction by pruning deletable parse-tree nodes.

use crate::engine::{precheck, Job, ReduceError, ReduceOptions, ReductionResult};
use crate::lang::{render, ParseNode, Program};
use crate::metrics::Technique;
use crate::oracle::OracleSession;

/// A deletable node and its child-index path from the root.
#[derive(Debug, Clone, Copy)]
pub struct Deletable<'a> {
    pub path: &'a [usize],
    pub node: &'a ParseNode,
}

/// Paths of every `optional` or `list-element` node, largest token range
/// first, ties broken by earlier start (then pre-order).
pub fn list_deletable(root: &ParseNode) -> Vec<(Vec<usize>, &ParseNode)> {
    let mut out = Vec::new();
    root.walk(&mut |path, node| {
        if node.deletability.is_deletable() {
            out.push((path.to_vec(), node));
        }
    });
    out.sort_by_key(|(_, n)| (std::cmp::Reverse(n.token_len()), n.tokens.start));
    out
}

/// Text of the candidate obtained by pruning the node at `path`.
pub fn candidate_without(root: &ParseNode, path: &[usize]) -> String {
    render(&root.without(path))
}

/// Prunes deletable nodes while the oracle keeps the label, passing over the
/// worklist until a full pass commits nothing. The worklist is rebuilt after
/// every commit and the scan resumes at the same position.
pub fn reduce_tree(
    program: &Program,
    session: &OracleSession,
    options: &ReduceOptions,
) -> Result<ReductionResult, ReduceError> {
    if program.tree().is_none() {
        let err = program.error().cloned().expect("unparsed program has an error");
        return Err(err.into());
    }
    let target = precheck(program, session, options)?;
    let mut job = Job::new(Technique::Tree, session, target, options);
    let mut current = program.clone();
    let mut changed = false;

    loop {
        job.passes += 1;
        let mut commits = 0;
        let mut index = 0;
        let mut worklist = paths(&current);
        while index < worklist.len() {
            job.check_budget()?;
            let tree = current.tree().expect("committed candidates parse");
            let text = candidate_without(tree, &worklist[index]);
            let candidate = Program::new(text);
            let valid = candidate.is_valid();
            let kept = job.keep(candidate.source(), candidate.token_count(), valid);
            if kept && valid {
                current = candidate;
                commits += 1;
                changed = true;
                worklist = paths(&current);
            } else {
                index += 1;
            }
        }
        if commits == 0 {
            break;
        }
    }
    let final_program = if changed { current } else { program.clone() };
    Ok(job.finish(program, final_program))
}

fn paths(program: &Program) -> Vec<Vec<usize>> {
    program
        .tree()
        .map(|t| list_deletable(t).into_iter().map(|(p, _)| p).collect())
        .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{self, Rule};
    use crate::oracle::mock_token_set;

    const SWAP: &str = "void f(int a, int b){int temp=a; a=b; b=temp;}";

    fn tree(src: &str) -> ParseNode {
        lang::parse(&lang::tokenize(src).unwrap()).unwrap()
    }

    #[test]
    fn deletable_lists() {
        assert!(list_deletable(&tree("void f(){}")).is_empty());

        let t = tree(SWAP);
        let d = list_deletable(&t);
        let rules: Vec<_> = d.iter().map(|(_, n)| (n.rule, n.token_len())).collect();
        assert_eq!(
            rules,
            [
                (Rule::LocalVarDecl, 5),
                (Rule::ExprStmt, 4),
                (Rule::ExprStmt, 4),
                (Rule::Param, 2),
                (Rule::Param, 2),
                // `=a` of `int temp=a` is an optional initializer.
                (Rule::Initializer, 2),
            ]
        );
        let t2 = tree("void f(){int x;}");
        assert_eq!(list_deletable(&t2).len(), 1);

        let t3 = tree("void f() throws Exception { }");
        let d3 = list_deletable(&t3);
        assert_eq!(d3.len(), 1);
        assert_eq!(d3[0].1.rule, Rule::ThrowsClause);
    }

    #[test]
    fn swap_reduces_to_header() {
        let p = Program::parse(SWAP).unwrap();
        let s = mock_token_set(["void", "f"], "swap");
        let r = reduce_tree(&p, &s, &ReduceOptions::default()).unwrap();
        assert_eq!(r.final_program.source(), "void f () { }");
        assert!(r.trace.candidates.iter().all(|c| c.is_valid));
        assert_eq!(r.trace.accepted_steps, 5);
    }

    #[test]
    fn minimal_input_is_untouched() {
        let p = Program::parse("void f(){}").unwrap();
        let s = mock_token_set(["void", "f", "(", ")", "{", "}"], "t");
        let r = reduce_tree(&p, &s, &ReduceOptions::default()).unwrap();
        assert_eq!(r.final_program.source(), "void f(){}");
        assert_eq!(r.trace.accepted_steps, 0);
        assert_eq!(r.trace.passes, 1);
        assert!(r.trace.candidates.is_empty());
    }

    #[test]
    fn errors() {
        let s = mock_token_set(["void"], "t");
        let bad = Program::new("void f(){");
        assert!(matches!(
            reduce_tree(&bad, &s, &ReduceOptions::default()),
            Err(ReduceError::Lang(_))
        ));
        let other = Program::parse("int f(){}").unwrap();
        assert!(matches!(
            reduce_tree(&other, &s, &ReduceOptions::default()),
            Err(ReduceError::PredicateFailed { .. })
        ));
    }
}
