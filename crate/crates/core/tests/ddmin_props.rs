use std::collections::BTreeSet;

use ci_reduce_core::ddmin::{chunks, ddmin, DdError};
use proptest::prelude::*;

/// Every subsequence of `units` that passes `keep` and has no passing
/// one-shorter subsequence, by exhaustive enumeration.
fn one_minimal_passing<T: Clone + Ord>(units: &[T], keep: &dyn Fn(&[T]) -> bool) -> BTreeSet<Vec<T>> {
    let n = units.len();
    let pick = |mask: u32| -> Vec<T> { (0..n).filter(|i| mask & (1 << i) != 0).map(|i| units[i].clone()).collect() };
    (0..1u32 << n)
        .filter(|&m| keep(&pick(m)))
        .filter(|&m| (0..n).filter(|i| m & (1 << i) != 0).all(|i| !keep(&pick(m & !(1 << i)))))
        .map(pick)
        .collect()
}

fn contains_all(required: &BTreeSet<u8>) -> impl Fn(&[u8]) -> bool + '_ {
    move |c: &[u8]| required.iter().all(|r| c.contains(r))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn chunks_partition_the_range(len in 1usize..200, n in 1usize..200) {
        let n = n.min(len);
        let parts = chunks(len, n);
        prop_assert_eq!(parts.len(), n);
        prop_assert_eq!(parts[0].start, 0);
        prop_assert_eq!(parts[n - 1].end, len);
        for w in parts.windows(2) {
            prop_assert_eq!(w[0].end, w[1].start);
            prop_assert!(w[0].len() >= w[1].len() && w[0].len() - w[1].len() <= 1);
        }
    }

    #[test]
    fn result_is_one_minimal_for_monotone_predicates(
        units in prop::collection::vec(0u8..6, 0..11),
        required in prop::collection::btree_set(0u8..6, 0..4),
    ) {
        let keep = contains_all(&required);
        match ddmin(&units, &keep, None) {
            Err(DdError::PredicateFailed) => prop_assert!(!keep(&units)),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
            Ok(out) => {
                prop_assert!(keep(&out));
                for i in 0..out.len() {
                    let mut smaller = out.clone();
                    smaller.remove(i);
                    prop_assert!(!keep(&smaller));
                }
                prop_assert!(one_minimal_passing(&units, &keep).contains(&out));
            }
        }
    }

    #[test]
    fn result_is_one_minimal_for_arbitrary_predicates(
        units in prop::collection::vec(0u8..4, 1..9),
        table in prop::collection::vec(any::<bool>(), 64),
    ) {
        // A non-monotone predicate: a hash of the candidate into a random table,
        // forced true on the full input.
        let full = units.clone();
        let keep = move |c: &[u8]| {
            c == full.as_slice() || table[c.iter().fold(c.len(), |h, &x| h * 7 + x as usize) % 64]
        };
        let out = ddmin(&units, &keep, None).unwrap();
        prop_assert!(keep(&out));
        for i in 0..out.len() {
            let mut smaller = out.clone();
            smaller.remove(i);
            prop_assert!(!keep(&smaller), "{:?} minus index {} still passes", out, i);
        }
    }

    #[test]
    fn cap_bounds_evaluations(
        units in prop::collection::vec(any::<u8>(), 0..40),
        cap in 0usize..30,
    ) {
        let mut calls = 0usize;
        let r = ddmin(&units, |c| { calls += 1; c.len() * 2 >= units.len() }, Some(cap));
        prop_assert!(calls <= cap);
        if let Err(DdError::Stalled { evaluations }) = r {
            prop_assert_eq!(evaluations, calls);
        }
    }
}

#[test]
fn distinct_sequences_reduce_to_the_required_subsequence() {
    let units: Vec<u8> = (0..10).collect();
    for required in [vec![], vec![4], vec![0, 9], vec![2, 5, 7]] {
        let req: BTreeSet<u8> = required.iter().copied().collect();
        assert_eq!(ddmin(&units, contains_all(&req), None).unwrap(), required);
    }
}
