use std::sync::{Arc, OnceLock};

use lowt_core::algebra::{canonicalize, series_mul, FormalSeries, MonoKey, PhiIndex, UIndex, UKey};
use lowt_core::engine::{Expansion, ExpansionConfig};
use lowt_core::green::{build_table, GreenTable};
use lowt_core::lattice::{Direction, Site};
use lowt_core::mc::stats::blocking;
use lowt_core::wick::{
    connected_by_pairings, connected_by_partitions, connected_correlation, gaussian_moment, gaussian_moment_by_pairings,
    Block, Leg,
};
use num_rational::BigRational;
use proptest::prelude::*;

const CAP: usize = 10_000_000;

fn table() -> Arc<GreenTable> {
    static T: OnceLock<Arc<GreenTable>> = OnceLock::new();
    T.get_or_init(|| Arc::new(build_table(3, 0.0, 8, 1e-12).unwrap())).clone()
}

fn site(r: i32) -> impl Strategy<Value = Site> {
    prop::array::uniform3(-r..=r).prop_map(|c| Site::new(&c))
}

fn leg() -> impl Strategy<Value = Leg> {
    (site(2), prop::option::of(0usize..3)).prop_map(|(x, e)| match e {
        Some(e) => Leg::Bond(x, Direction::new(e)),
        None => Leg::Site(x),
    })
}

fn blocks() -> impl Strategy<Value = Vec<Block>> {
    prop::collection::vec(prop::collection::vec(leg(), 1..4), 1..=4)
        .prop_filter("even leg count", |bs| bs.iter().map(Vec::len).sum::<usize>() % 2 == 0)
        .prop_map(|bs| bs.into_iter().map(Block::new).collect())
}

fn mono_key() -> impl Strategy<Value = MonoKey> {
    (
        prop::collection::vec((site(2), 1u32..3), 0..3),
        prop::collection::vec((site(2), 1u8..4, 1u32..3), 0..3),
    )
        .prop_map(|(p, u)| MonoKey {
            p: PhiIndex::from_pairs(p),
            u: UIndex::from_pairs(u.into_iter().map(|(site, comp, k)| (UKey { site, comp }, k))),
            ..MonoKey::default()
        })
}

fn series(max_order: usize) -> impl Strategy<Value = FormalSeries> {
    prop::collection::vec((0..=max_order, mono_key(), -5i64..=5, 1i64..4), 0..4).prop_map(move |terms| {
        let mut s = FormalSeries::zero(max_order);
        for (order, key, num, den) in terms {
            s.add_term(order, key, BigRational::new(num.into(), den.into()));
        }
        s
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn connected_formulas_agree(bs in blocks()) {
        let t = table();
        let a = connected_by_pairings(&t, &bs, CAP).unwrap();
        let b = connected_by_partitions(&t, &bs, CAP).unwrap();
        let c = connected_correlation(&t, &bs).unwrap();
        let scale = a.abs().max(1e-6);
        prop_assert!((a - b).abs() <= 1e-12 * scale, "{a} vs {b}");
        prop_assert!((a - c).abs() <= 1e-12 * scale, "{a} vs {c}");
    }

    #[test]
    fn grouped_moment_matches_pairing_enumeration(legs in prop::collection::vec(leg(), 1..7)) {
        let t = table();
        let grouped = gaussian_moment(&t, &legs).unwrap();
        let direct = gaussian_moment_by_pairings(&t, &legs, CAP).unwrap();
        prop_assert!((grouped - direct).abs() <= 1e-13 * grouped.abs().max(1e-6));
        if legs.len() % 2 == 1 {
            prop_assert_eq!(grouped, 0.0);
        }
    }

    #[test]
    fn moments_are_translation_invariant(legs in prop::collection::vec(leg(), 2..7), shift in site(2)) {
        let t = table();
        let moved: Vec<Leg> = legs.iter().map(|l| l.translate(&shift)).collect();
        let a = gaussian_moment(&t, &legs).unwrap();
        let b = gaussian_moment(&t, &moved).unwrap();
        prop_assert!((a - b).abs() <= 1e-13 * a.abs().max(1e-6));
    }

    #[test]
    fn series_product_is_commutative_and_associative(a in series(2), b in series(2), c in series(2)) {
        prop_assert_eq!(series_mul(&a, &b, 2), series_mul(&b, &a, 2));
        let left = series_mul(&series_mul(&a, &b, 2), &c, 2);
        let right = series_mul(&a, &series_mul(&b, &c, 2), 2);
        prop_assert_eq!(left, right);
        prop_assert_eq!(series_mul(&a, &FormalSeries::one(2), 2), a);
    }

    #[test]
    fn canonical_key_ignores_translation_and_relabelling(key in mono_key(), shift in site(3), swap in any::<bool>()) {
        let (base, _) = canonicalize(&key);
        let (moved, _) = canonicalize(&key.translate(&shift));
        prop_assert_eq!(&base, &moved);
        if swap {
            let map = [0u8, 2, 1, 3];
            let relabelled = MonoKey { u: key.u.relabel(&map), ..key.clone() };
            prop_assert_eq!(&base, &canonicalize(&relabelled).0);
        }
        prop_assert_eq!(canonicalize(&base.0).0, base);
    }

    #[test]
    fn green_values_have_lattice_symmetry(x in site(6), flip in prop::array::uniform3(any::<bool>()), perm in 0usize..6) {
        let t = table();
        let orders = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let c = x.coords();
        let o = orders[perm];
        let y: Vec<i32> = (0..3).map(|k| if flip[k] { -c[o[k]] } else { c[o[k]] }).collect();
        prop_assert_eq!(t.get(&x).unwrap(), t.get(&Site::new(&y)).unwrap());
    }

    #[test]
    fn blocking_error_is_non_negative_and_mean_exact(xs in prop::collection::vec(-10.0f64..10.0, 32..200)) {
        let (mean, err, bins) = blocking(&xs);
        let direct = xs.iter().sum::<f64>() / xs.len() as f64;
        prop_assert!((mean - direct).abs() <= 1e-12);
        prop_assert!(err >= 0.0);
        prop_assert!(bins >= 16);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn engine_expectations_are_translation_invariant(x in site(1), shift in site(2)) {
        let ex = Expansion::new(table(), ExpansionConfig::new(3, 1, 2)).unwrap();
        let o = Site::origin(3);
        let p = PhiIndex::from_pairs([(o, 1), (x, 1)]);
        let u = UIndex::from_pairs([(UKey { site: o, comp: 1 }, 2)]);
        let a = ex.expect_monomial(&p, &u, 1).unwrap().values();
        let b = ex.expect_monomial(&p.translate(&shift), &u.translate(&shift), 1).unwrap().values();
        prop_assert_eq!(a, b);
    }
}
