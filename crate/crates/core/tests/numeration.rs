use num_bigint::BigUint;
use proptest::prelude::*;
use zb_core::{is_valid, NumerationSystem, PrincipalBlock};

/// Membership read literally off the recursive definition.
fn member_literal(eps: &[u32], l: &[u32]) -> bool {
    let theta = |k: usize| l[(k - 1) % l.len()];
    let mut s = 0;
    while s < eps.len() && eps[s] == theta(s + 1) {
        s += 1;
    }
    s == eps.len() || (eps[s] < theta(s + 1) && member_literal(&eps[s + 1..], l))
}

fn count_members(len: usize, l: &[u32], prefix: &mut Vec<u32>) -> u64 {
    if prefix.len() == len {
        return member_literal(prefix, l) as u64;
    }
    let top = *l.iter().max().unwrap();
    let first = if prefix.is_empty() { 1 } else { 0 };
    let mut total = 0;
    for d in first..=top {
        prefix.push(d);
        // prune on the prefix: a non-member prefix has no member extension
        if member_literal(prefix, l) {
            total += count_members(len, l, prefix);
        }
        prefix.pop();
    }
    total
}

#[test]
fn fundamental_sequence_counts_shorter_members() {
    // H_n = 1 + #{members of length < n}
    for l in [&[1u32, 0][..], &[1, 1], &[2, 1], &[3, 2, 1], &[2, 0, 2], &[1, 0, 0, 1]] {
        let system = NumerationSystem::from_entries(l).unwrap();
        let h = system.fundamental_sequence(9);
        let mut shorter = 0u64;
        for n in 1..=9 {
            assert_eq!(h[n - 1], BigUint::from(1 + shorter), "L = {l:?}, n = {n}");
            shorter += count_members(n, l, &mut Vec::new());
        }
    }
}

#[test]
fn prefix_closure_holds_for_the_literal_predicate() {
    // the pruning above relies on it; check on all short tuples
    let l = [2u32, 0, 1];
    let mut stack = vec![vec![]];
    while let Some(t) = stack.pop() {
        if t.len() == 6 {
            continue;
        }
        for d in 0..=3 {
            let mut u = t.clone();
            u.push(d);
            if member_literal(&u, &l) {
                assert!(member_literal(&t, &l), "{u:?}");
            }
            stack.push(u);
        }
    }
}

#[test]
fn expansions_are_lexicographically_ordered() {
    let system = NumerationSystem::from_entries(&[2, 1]).unwrap();
    let mut prev = system.expand(&BigUint::from(1u32)).unwrap();
    for n in 2u32..20_000 {
        let e = system.expand(&BigUint::from(n)).unwrap();
        assert!(e.len() > prev.len() || (e.len() == prev.len() && e.digits() > prev.digits()));
        prev = e;
    }
}

fn block_strategy() -> impl Strategy<Value = Vec<u32>> {
    (2usize..5).prop_flat_map(|n| {
        prop::collection::vec(0u32..5, n).prop_map(|mut v| {
            if v[0] == 0 {
                v[0] = 1;
            }
            v
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn expand_round_trips(l in block_strategy(), n in 1u64..u64::MAX) {
        let system = NumerationSystem::from_entries(&l).unwrap();
        let n = BigUint::from(n);
        let e = system.expand(&n).unwrap();
        prop_assert!(member_literal(e.digits(), &l));
        prop_assert_eq!(system.evaluate_conv(e.digits()), n);
    }

    #[test]
    fn expand_round_trips_for_huge_values(l in block_strategy(), words in prop::collection::vec(any::<u32>(), 1..24)) {
        let system = NumerationSystem::from_entries(&l).unwrap();
        let n = BigUint::new(words) + 1u32;
        let e = system.expand(&n).unwrap();
        prop_assert!(member_literal(e.digits(), &l));
        prop_assert_eq!(system.evaluate_conv(e.digits()), n);
    }

    #[test]
    fn automaton_matches_literal_predicate(l in block_strategy(), t in prop::collection::vec(0u32..6, 0..14)) {
        let block = PrincipalBlock::new(l.clone()).unwrap();
        let want = !t.is_empty() && t[0] > 0 && member_literal(&t, &l);
        prop_assert_eq!(is_valid(&t, &block), want);
    }

    #[test]
    fn members_evaluate_into_their_length_window(l in block_strategy(), t in prop::collection::vec(0u32..6, 1..14)) {
        let block = PrincipalBlock::new(l.clone()).unwrap();
        prop_assume!(is_valid(&t, &block));
        let system = NumerationSystem::new(block).unwrap();
        let v = system.evaluate_conv(&t);
        prop_assert!(system.h(t.len()) <= v && v < system.h(t.len() + 1));
        let e = system.expand(&v).unwrap();
        prop_assert_eq!(e.digits(), &t[..]);
    }
}
