//! Property tests for the set-model invariants: cover nesting, endpoint
//! soundness, interval-union algebra laws, gap-order stability, and the
//! gap/chunk thickness cross-oracle.

use proptest::prelude::*;

use thicket::descriptor::{gap_records, SetDescriptor};
use thicket::interval::{Interval, IntervalUnion};
use thicket::rational::Q;
use thicket::thickness::{thickness, thickness_chunk, thickness_gap};

fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

fn small_q() -> impl Strategy<Value = Q> {
    (-24i64..=24, 1i64..=12).prop_map(|(n, d)| Q::new(n, d))
}

fn interval() -> impl Strategy<Value = Interval> {
    (small_q(), small_q()).prop_map(|(a, b)| Interval::spanning(a, b))
}

fn union() -> impl Strategy<Value = IntervalUnion> {
    prop::collection::vec(interval(), 0..6).prop_map(IntervalUnion::from_intervals)
}

/// Random valid descriptor: middle-ε or a two/three-map IFS spanning [0,1].
fn descriptor() -> impl Strategy<Value = SetDescriptor> {
    prop_oneof![
        (1i64..=9).prop_map(|n| {
            SetDescriptor::middle_epsilon(Q::new(n, 10)).expect("ε in (0,1)")
        }),
        (1i64..=5, 1i64..=5).prop_map(|(a, b)| {
            // children [0, a/12] and [1 − b/12, 1]
            let r1 = Q::new(a, 12);
            let r2 = Q::new(b, 12);
            SetDescriptor::ifs(
                Interval::unit(),
                vec![r1, r2.clone()],
                vec![Q::zero(), Q::one() - r2],
            )
            .expect("disjoint children")
        }),
        (1i64..=3, 1i64..=3, 1i64..=3).prop_map(|(a, b, c)| {
            let r1 = Q::new(a, 12);
            let r2 = Q::new(b, 12);
            let r3 = Q::new(c, 12);
            let o2 = &r1 + &Q::new(1, 11);
            let o3 = Q::one() - &r3;
            SetDescriptor::ifs(Interval::unit(), vec![r1, r2, r3], vec![Q::zero(), o2, o3])
                .expect("disjoint children")
        }),
    ]
}

/// Random explicit gap structure with deliberately duplicated gap lengths:
/// up to 8 gaps placed in distinct slots of width 1/10.
fn explicit_gaps_with_ties() -> impl Strategy<Value = SetDescriptor> {
    prop::collection::btree_map(0u8..8, 0u8..3, 1..8).prop_map(|slots| {
        let lengths = [q(1, 100), q(1, 200), q(1, 100)]; // duplicates on purpose
        let gaps: Vec<Interval> = slots
            .into_iter()
            .map(|(slot, li)| {
                let lo = q(slot as i64, 10) + q(1, 50);
                let hi = &lo + &lengths[li as usize];
                Interval::new(lo, hi).expect("ordered")
            })
            .collect();
        SetDescriptor::explicit_gaps(Interval::unit(), gaps).expect("disjoint gaps")
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn covers_are_nested(d in descriptor(), n in 0u32..4) {
        let outer = d.refine(n);
        let inner = d.refine(n + 1);
        prop_assert!(outer.contains_union(&inner));
    }

    #[test]
    fn endpoints_survive_all_depths(d in descriptor(), n in 0u32..3, extra in 0u32..3) {
        let pts = d.endpoints(n);
        let deeper = d.refine(n + extra);
        for p in &pts {
            prop_assert!(deeper.contains(p), "endpoint {p} escaped");
        }
    }

    #[test]
    fn membership_consistent_with_covers(d in descriptor(), num in 0i64..=60) {
        let x = Q::new(num, 60);
        match d.membership(&x, 24) {
            thicket::descriptor::Membership::InSet { .. } => {
                for n in 0..5 {
                    prop_assert!(d.refine(n).contains(&x));
                }
            }
            thicket::descriptor::Membership::NotInSet { depth } => {
                prop_assert!(!d.refine(depth).contains(&x));
            }
            thicket::descriptor::Membership::Undecided { .. } => {}
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn intersect_commutative_associative_idempotent(
        a in union(), b in union(), c in union()
    ) {
        prop_assert_eq!(a.intersect(&b), b.intersect(&a));
        prop_assert_eq!(a.intersect(&b).intersect(&c), a.intersect(&b.intersect(&c)));
        prop_assert_eq!(a.intersect(&a), a);
    }

    #[test]
    fn translate_round_trip(u in union(), t in small_q()) {
        prop_assert_eq!(u.translate(&t).translate(&(-&t)), u);
    }

    #[test]
    fn minkowski_sum_length_sanity(a in union(), b in union()) {
        let sum = a.minkowski_sum(&b);
        if a.is_empty() || b.is_empty() {
            prop_assert!(sum.is_empty());
        } else {
            // Each pairwise interval sum has length |a_i| + |b_j|; the union
            // cannot exceed the total over pairs.
            let pair_total: Q = a
                .parts()
                .iter()
                .flat_map(|ai| {
                    b.parts().iter().map(move |bj| ai.length() + bj.length())
                })
                .sum();
            prop_assert!(sum.total_length() <= pair_total);
            // And it is exact on single intervals.
            if a.component_count() == 1 && b.component_count() == 1 {
                prop_assert_eq!(
                    sum.total_length(),
                    a.total_length() + b.total_length()
                );
            }
        }
    }

    #[test]
    fn gap_order_among_ties_does_not_change_thickness(
        d in explicit_gaps_with_ties(),
        seed in 0u64..1000
    ) {
        // Reverse equal-length runs (a nontrivial permutation within ties)
        // and also rotate them by the seed; the thickness value must match.
        let canonical = d.gaps(64);
        let value = thickness_gap(&canonical).unwrap();

        let mut gaps: Vec<Interval> = canonical.iter().map(|r| r.gap.clone()).collect();
        let mut i = 0;
        while i < gaps.len() {
            let mut j = i + 1;
            while j < gaps.len() && gaps[j].length() == gaps[i].length() {
                j += 1;
            }
            gaps[i..j].reverse();
            if j - i > 1 {
                gaps[i..j].rotate_left((seed as usize) % (j - i));
            }
            i = j;
        }
        let permuted = gap_records(d.hull(), &gaps);
        let permuted_value = thickness_gap(&permuted).unwrap();
        prop_assert_eq!(value, permuted_value);
    }

    #[test]
    fn chunk_oracle_matches_gap_oracle(d in explicit_gaps_with_ties()) {
        let g = thickness(&d, 64).unwrap();
        let c = thickness_chunk(&d, 64).unwrap();
        prop_assert_eq!(g.value, c.value);
    }

    #[test]
    fn union_scale_round_trip(u in union(), n in 1i64..8) {
        let s = Q::new(n, 3);
        let back = u.scale(&s).scale(&s.recip());
        prop_assert_eq!(back, u);
    }
}
