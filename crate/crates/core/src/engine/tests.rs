use std::sync::{Arc, OnceLock};

use super::*;
use crate::algebra::{compile_spin_observable, Observable, UKey};
use crate::wick::{gaussian_moment, Leg};
use crate::green::build_table;

fn table() -> Arc<GreenTable> {
    static T: OnceLock<Arc<GreenTable>> = OnceLock::new();
    T.get_or_init(|| Arc::new(build_table(3, 0.0, 14, 1e-12).unwrap())).clone()
}

fn o() -> Site {
    Site::origin(3)
}

fn phi(k: u32) -> PhiIndex {
    PhiIndex::single(o(), k)
}

fn tilde_norm_power(n_components: usize, j: u32) -> Vec<(UIndex, f64)> {
    crate::algebra::norm_power(o(), j, n_components - 2)
        .into_iter()
        .map(|(u, c)| (u, c.to_f64().unwrap()))
        .collect()
}

fn expansion(n_components: usize, order: usize, radius: i32) -> Expansion {
    Expansion::new(table(), ExpansionConfig::new(n_components, order, radius)).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn unit_expectation() {
    let ex = expansion(3, 3, 4);
    let r = ex.expect_monomial(&PhiIndex::new(), &UIndex::new(), 3).unwrap();
    assert_eq!(r.values(), vec![1.0, 0.0, 0.0, 0.0]);
}

#[test]
fn odd_monomials_vanish() {
    let ex = expansion(3, 1, 4);
    let r = ex.expect_monomial(&phi(3), &UIndex::new(), 1).unwrap();
    assert_eq!(r.values(), vec![0.0, 0.0]);
}

#[test]
fn golden_chain_order_zero() {
    let g0 = table().origin_value();
    for n_comp in [2usize, 3, 4] {
        let ex = expansion(n_comp, 0, 4);
        let v = ex.expect_monomial(&phi(4), &UIndex::new(), 0).unwrap().values()[0];
        assert!(rel(v, 3.0 * g0 * g0) < 1e-13);
        let nt = (n_comp - 2) as f64;
        let mut mixed = 0.0;
        for (u, c) in tilde_norm_power(n_comp, 1) {
            mixed += c * ex.expect_monomial(&phi(2), &u, 0).unwrap().values()[0];
        }
        assert!((mixed - nt * g0 * g0).abs() < 1e-13, "N={n_comp}: {mixed}");
        let mut quartic = 0.0;
        for (u, c) in tilde_norm_power(n_comp, 2) {
            quartic += c * ex.expect_monomial(&PhiIndex::new(), &u, 0).unwrap().values()[0];
        }
        let want = nt * (n_comp as f64) * g0 * g0;
        assert!((quartic - want).abs() < 1e-12, "N={n_comp}: {quartic} vs {want}");
    }
}

#[test]
fn phi_squared_first_order_matches_box_sum() {
    let t = table();
    for n_comp in [2usize, 3, 4] {
        let ex = expansion(n_comp, 1, 12);
        let r = ex.expect_monomial(&phi(2), &UIndex::new(), 1).unwrap();
        assert_eq!(r.coefficients[0].value, t.origin_value());
        let sum = second_order_sum(&t, n_comp, 12).unwrap();
        assert!(rel(r.coefficients[1].value, sum) < 1e-10, "N={n_comp}");
    }
}

#[test]
fn magnetization_matches_closed_form() {
    let t = table();
    for n_comp in [2usize, 3] {
        let ex = expansion(n_comp, 2, 12);
        let obs = compile_spin_observable(&Observable::magnetization(3, n_comp), 2, n_comp, 3).unwrap();
        let r = ex.evaluate_series(&obs, 2).unwrap();
        let cf = closed_form_second_order(&t, n_comp, 12).unwrap();
        for i in 0..3 {
            let (a, b) = (r.coefficients[i], cf.coefficients[i]);
            assert!((a.value - b.value).abs() <= a.uncertainty + b.uncertainty + 1e-14);
            assert!(rel(a.value, b.value) < 1e-8, "N={n_comp} i={i}: {a:?} {b:?}");
        }
        let g0 = t.origin_value();
        assert!(rel(r.coefficients[1].value, -(n_comp as f64 - 1.0) / 2.0 * g0) < 1e-12);
    }
}

#[test]
fn closed_form_specialises_for_two_components() {
    let t = table();
    let g0 = t.origin_value();
    let cf = closed_form_second_order(&t, 2, 6).unwrap();
    let grad_sum: f64 = {
        let mut acc = 0.0;
        for x in Site::box_sites(3, 6) {
            for e in Direction::all(3) {
                let g = t.grad_green(&x, e).unwrap();
                acc += g * g;
            }
        }
        acc
    };
    let g1 = t.get(&Site::new(&[1, 0, 0])).unwrap();
    let want = 0.5 * (0.25 * g0 * g0 - grad_sum * (g0 - g1));
    assert!(rel(cf.coefficients[2].value, want) < 1e-12);
    assert_eq!(cf.coefficients[1].value, -0.5 * g0);
}

#[test]
fn closed_form_truncation_shrinks() {
    let t = table();
    let mut last = f64::INFINITY;
    for r in [2, 4, 8, 12] {
        let u = closed_form_second_order(&t, 3, r).unwrap().coefficients[2].uncertainty;
        assert!(u < last);
        last = u;
    }
}

#[test]
fn translation_and_permutation_invariance() {
    let ex = expansion(4, 1, 3);
    let x = Site::new(&[1, 0, 0]);
    let y = Site::new(&[0, 2, -1]);
    let mono = |shift: &Site, comps: (u8, u8)| {
        let p = PhiIndex::from_pairs([(o().add(shift), 1), (x.add(shift), 1)]);
        let u = UIndex::from_pairs([
            (UKey { site: o().add(shift), comp: comps.0 }, 2),
            (UKey { site: x.add(shift), comp: comps.1 }, 2),
        ]);
        ex.expect_monomial(&p, &u, 1).unwrap().values()
    };
    let base = mono(&o(), (1, 2));
    assert_eq!(base, mono(&y, (1, 2)));
    assert_eq!(base, mono(&o(), (2, 1)));
    assert_eq!(base, mono(&y, (2, 1)));
}

#[test]
fn cold_and_warm_cache_agree_bitwise() {
    let obs = compile_spin_observable(&Observable::magnetization(3, 3), 2, 3, 3).unwrap();
    let ex = expansion(3, 2, 6);
    let cold = ex.evaluate_series(&obs, 2).unwrap();
    let warm = ex.evaluate_series(&obs, 2).unwrap();
    assert_eq!(cold, warm);
    ex.engine().memo().clear();
    let again = ex.evaluate_series(&obs, 2).unwrap();
    assert_eq!(cold, again);
    let fresh = expansion(3, 2, 6).evaluate_series(&obs, 2).unwrap();
    assert_eq!(cold, fresh);
}

#[test]
fn parallel_matches_single_threaded() {
    let obs = compile_spin_observable(&Observable::magnetization(3, 3), 2, 3, 3).unwrap();
    let serial = expansion(3, 2, 6).evaluate_series(&obs, 2).unwrap();
    let mut cfg = ExpansionConfig::new(3, 2, 6);
    cfg.parallel = true;
    let par = Expansion::new(table(), cfg).unwrap().evaluate_series(&obs, 2).unwrap();
    for (a, b) in serial.coefficients.iter().zip(&par.coefficients) {
        assert!((a.value - b.value).abs() <= 1e-12 * a.value.abs());
    }
}

#[test]
fn gaussian_collapse_at_order_zero() {
    let ex = expansion(4, 0, 2);
    let p = PhiIndex::from_pairs([(o(), 2), (Site::new(&[1, 1, 0]), 1), (Site::new(&[0, 0, 2]), 1)]);
    let mixed = UIndex::from_pairs([
        (UKey { site: o(), comp: 1 }, 2),
        (UKey { site: Site::new(&[1, 0, 0]), comp: 2 }, 2),
    ]);
    let report = ex.gff_limit_check(&p, &mixed).unwrap();
    assert!(report.pass, "{report:?}");
    let legs = [Leg::Site(o()), Leg::Site(Site::new(&[2, 0, 0]))];
    let two = ex
        .expect_monomial(&PhiIndex::from_pairs([(o(), 1), (Site::new(&[2, 0, 0]), 1)]), &UIndex::new(), 0)
        .unwrap();
    assert_eq!(two.values()[0], gaussian_moment(&table(), &legs).unwrap());
}

#[test]
fn rejects_oversized_schedule() {
    let err = Expansion::new(table(), ExpansionConfig::new(3, 1, 14));
    assert!(matches!(err, Err(EngineError::InvalidConfig(_))));
    let ex = expansion(3, 1, 12);
    let far = PhiIndex::from_pairs([(o(), 1), (Site::new(&[3, 0, 0]), 1)]);
    assert!(ex.expect_monomial(&far, &UIndex::new(), 1).is_err());
}

#[test]
fn two_point_function_decays() {
    let big = Arc::new(build_table(3, 0.0, 22, 1e-10).unwrap());
    let ex = Expansion::new(big, ExpansionConfig::new(3, 1, 4)).unwrap();
    let mut vals = Vec::new();
    for r in [2, 4, 8, 16] {
        let p = PhiIndex::from_pairs([(o(), 1), (Site::new(&[r, 0, 0]), 1)]);
        let v = ex.expect_monomial(&p, &UIndex::new(), 1).unwrap().values();
        vals.push((r as f64, v[0].abs() + v[1].abs()));
    }
    let eps = 0.25;
    let c = vals[0].1 * (1.0 + vals[0].0).powf(1.0 - eps);
    for (r, v) in vals {
        assert!(v <= c * 1.05 / (1.0 + r).powf(1.0 - eps), "r={r}: {v}");
    }
}

#[test]
fn squared_components_sum_to_one() {
    for n_comp in [2usize, 3, 4] {
        let ex = expansion(n_comp, 2, 6);
        let mut total = vec![0.0; 3];
        for c in 1..=n_comp {
            let obs = Observable {
                terms: vec![crate::algebra::ObservableTerm { site: vec![0, 0, 0], component: c, power: 2 }],
            };
            let series = compile_spin_observable(&obs, 2, n_comp, 3).unwrap();
            let v = ex.evaluate_series(&series, 2).unwrap().values();
            if c < n_comp {
                assert!(rel(v[1], table().origin_value()) < 1e-12, "N={n_comp} c={c}: {v:?}");
            }
            for (t, x) in total.iter_mut().zip(v) {
                *t += x;
            }
        }
        assert!((total[0] - 1.0).abs() < 1e-14);
        assert!(total[1].abs() < 1e-14 && total[2].abs() < 1e-12, "N={n_comp}: {total:?}");
    }
}
