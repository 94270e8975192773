use proptest::prelude::*;

use stretchperc::env::{stretched_probability, Environment, GapSequence};
use stretchperc::oracle;
use stretchperc::oriented::{
    oriented_reachable, sample_oriented, Confinement, OrientedGeometry, OrientedRegion,
};
use stretchperc::perc::{remainder, sample_configuration, Rectangle};
use stretchperc::renorm::{combine, compute_labels, ScaleParams};
use stretchperc::sites::SiteSet;

fn gaps(len: usize) -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(prop_oneof![4 => Just(0u64), 2 => 1u64..3, 1 => 3u64..12], len)
}

/// `(L, first block index, gaps)` over a whole number of scale-2 blocks.
fn labelled_window() -> impl Strategy<Value = (u64, i64, Vec<u64>)> {
    (2u64..6, 1usize..4, -2i64..2)
        .prop_flat_map(|(l, blocks, lo)| (Just(l), Just(lo), gaps(blocks * (l * l) as usize)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn labels_match_definition((l, lo_block, values) in labelled_window()) {
        let sp = ScaleParams::new(l, 2).unwrap();
        let xi = GapSequence::new(lo_block * sp.len(2), values).unwrap();
        let table = compute_labels(&xi, sp).unwrap();
        prop_assert_eq!(oracle::check_labels(&xi, &table).unwrap(), None);
        prop_assert_eq!(oracle::structural_violations(&table).unwrap().violations(), 0);
    }

    #[test]
    fn combine_rules(h in prop::collection::vec(prop_oneof![3 => Just(0u64), 1 => 1u64..6], 2..6), k in 0u32..5) {
        let b: Vec<u32> = h.iter().map(|&x| if x > 0 { k.min(2) } else { 0 }).collect();
        let bad: Vec<usize> = (0..h.len()).filter(|&t| h[t] > 0).collect();
        let (hp, bp) = combine(&h, &b, k);
        match bad.len() {
            0 => prop_assert_eq!((hp, bp), (0, 0)),
            1 => {
                let t = bad[0];
                let want = if h[t] == 1 { (0, 0) } else { (h[t] - 1, b[t]) };
                prop_assert_eq!((hp, bp), want);
            }
            _ => prop_assert_eq!((hp, bp), (1 + h.iter().sum::<u64>(), k + 1)),
        }
    }

    #[test]
    fn stretched_probability_is_monotone(p in 0.0f64..=1.0, xi in 0u64..50) {
        let a = stretched_probability(p, xi);
        let b = stretched_probability(p, xi + 1);
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b <= a);
    }

    #[test]
    fn configurations_are_coupled_in_p(xs in gaps(6), ys in gaps(5), p in 0.0f64..1.0, dp in 0.0f64..0.5, seed in any::<u64>()) {
        let env = Environment::from_parts(
            GapSequence::new(0, xs).unwrap(),
            GapSequence::new(0, ys).unwrap(),
            0,
        );
        let rect = Rectangle::new(0, 5, 0, 4).unwrap();
        let lo = sample_configuration(&env, p, rect, seed).unwrap();
        let hi = sample_configuration(&env, (p + dp).min(1.0), rect, seed).unwrap();
        for (a, b) in lo.states().iter().zip(hi.states()) {
            prop_assert!(!a || *b);
        }
    }

    #[test]
    fn remainder_is_monotone(xs in gaps(6), ys in gaps(6), p in 0.3f64..0.9, seed in any::<u64>(),
                             s1 in prop::collection::btree_set(0i64..6, 0..4), s2 in prop::collection::btree_set(0i64..6, 0..4)) {
        let env = Environment::from_parts(
            GapSequence::new(0, xs).unwrap(),
            GapSequence::new(0, ys).unwrap(),
            0,
        );
        let rect = Rectangle::new(0, 5, 0, 5).unwrap();
        let sample = sample_configuration(&env, p, rect, seed).unwrap();
        let small: SiteSet = s1.iter().copied().collect();
        let big: SiteSet = s1.union(&s2).copied().collect();
        let r_small = remainder(&sample, &small, rect).unwrap();
        let r_big = remainder(&sample, &big, rect).unwrap();
        prop_assert!(r_small.is_subset(&r_big));
        prop_assert_eq!(r_small, oracle::remainder_bfs(&sample, &small, rect).unwrap());
        let denser = sample_configuration(&env, (p + 0.1).min(1.0), rect, seed).unwrap();
        prop_assert!(r_big.is_subset(&remainder(&denser, &big, rect).unwrap()));
    }

    #[test]
    fn oriented_dominance(cols in gaps(12), p in 0.3f64..0.9, dp in 0.0f64..0.2, seed in any::<u64>(),
                          s1 in prop::collection::btree_set(-3i64..4, 0..4)) {
        let xi = GapSequence::new(0, cols).unwrap();
        let g = OrientedGeometry::new(4, 2, 1).unwrap();
        let r = OrientedRegion::new(0, 12, -8, 8).unwrap();
        let s: SiteSet = s1.into_iter().map(|y| 2 * y).collect();
        let lo = sample_oriented(&xi, p, r, seed).unwrap();
        let hi = sample_oriented(&xi, (p + dp).min(1.0), r, seed).unwrap();
        let a = oriented_reachable(&lo, &s, Confinement::Region(r), &g).unwrap();
        let b = oriented_reachable(&hi, &s, Confinement::Region(r), &g).unwrap();
        prop_assert!(a.is_subset(&b));
        let narrow = OrientedRegion::new(0, 12, -4, 4).unwrap();
        let inner: SiteSet = s.iter().filter(|&y| narrow.contains(0, y)).collect();
        let c = oriented_reachable(&lo, &inner, Confinement::Region(narrow), &g).unwrap();
        prop_assert!(c.is_subset(&a));
    }
}
