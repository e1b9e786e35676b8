//! Spin observables `Π_x Π_k (S_x^k)^{α_x^k}` in the `(ũ, φ)` coordinates,
//! and the auxiliary series used by the expansion operator.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::coeffs::{binom, multinomial, univariate_pow, CoefficientTables};
use super::index::{MonoKey, PhiIndex, UIndex, UKey};
use super::series::{series_mul, FormalSeries};
use super::AlgebraError;
use crate::lattice::{Direction, Site};

/// One factor `(S_site^component)^power`, components numbered `1..=N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableTerm {
    pub site: Vec<i32>,
    pub component: usize,
    pub power: u32,
}

/// A product of spin components, as read from the observable JSON format.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Observable {
    pub terms: Vec<ObservableTerm>,
}

impl Observable {
    /// `S_0^N`, the magnetization along the field direction.
    pub fn magnetization(dim: usize, n_components: usize) -> Self {
        Observable {
            terms: vec![ObservableTerm {
                site: vec![0; dim],
                component: n_components,
                power: 1,
            }],
        }
    }

    pub fn from_json(text: &str) -> Result<Self, AlgebraError> {
        serde_json::from_str(text).map_err(|e| AlgebraError::Json(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("observable serialises")
    }
}

/// Multinomial expansion of `‖ũ_x‖^{2j}` over `n_tilde = N-2` components.
pub fn norm_power(x: Site, j: u32, n_tilde: usize) -> Vec<(UIndex, BigInt)> {
    if j == 0 {
        return vec![(UIndex::new(), BigInt::one())];
    }
    if n_tilde == 0 {
        return Vec::new();
    }
    fn rec(x: Site, left: u32, comp: usize, n: usize, parts: &mut Vec<u32>, out: &mut Vec<(UIndex, BigInt)>) {
        if comp == n {
            if left == 0 {
                let idx = UIndex::from_pairs(parts.iter().enumerate().map(|(k, &v)| {
                    (
                        UKey {
                            site: x,
                            comp: k as u8 + 1,
                        },
                        2 * v,
                    )
                }));
                out.push((idx, multinomial(parts)));
            }
            return;
        }
        let range = if comp + 1 == n { left..=left } else { 0..=left };
        for v in range {
            parts.push(v);
            rec(x, left - v, comp + 1, n, parts, out);
            parts.pop();
        }
    }
    let mut out = Vec::new();
    rec(x, j, 0, n_tilde, &mut Vec::new(), &mut out);
    out
}

/// Series of `sinc(√T φ_x)^a cos(√T φ_x)^c ρ_x^b` with `ρ_x = √(1 - T‖ũ_x‖²)`,
/// through order `n`.
fn site_factor(x: Site, a: u32, c: u32, b: u32, n_tilde: usize, n: usize) -> FormalSeries {
    let sinc: Vec<BigRational> = (0..=n as u32).map(CoefficientTables::sinc).collect();
    let cos: Vec<BigRational> = (0..=n as u32).map(CoefficientTables::cos).collect();
    let trig = {
        let s = univariate_pow(&sinc, a, n);
        let k = univariate_pow(&cos, c, n);
        let mut out = vec![BigRational::zero(); n + 1];
        for (i, si) in s.iter().enumerate() {
            for (j, kj) in k.iter().enumerate().take(n + 1 - i) {
                out[i + j] += si * kj;
            }
        }
        out
    };
    let half_b = BigRational::new(BigInt::from(b), BigInt::from(2));
    let rho: Vec<BigRational> = (0..=n as u32)
        .map(|j| {
            let v = binom(&half_b, j);
            if j % 2 == 0 {
                v
            } else {
                -v
            }
        })
        .collect();
    let mut out = FormalSeries::zero(n);
    for (i, ti) in trig.iter().enumerate() {
        if ti.is_zero() {
            continue;
        }
        let phi = MonoKey::phi(PhiIndex::single(x, 2 * i as u32));
        for (j, rj) in rho.iter().enumerate().take(n + 1 - i) {
            if rj.is_zero() {
                continue;
            }
            for (u, m) in norm_power(x, j as u32, n_tilde) {
                let key = MonoKey { u, ..phi.clone() };
                out.add_term(i + j, key, ti * rj * BigRational::from_integer(m));
            }
        }
    }
    out
}

/// Taylor coefficients through order `n` of the spin observable `α`,
/// expressed through `S = (√T ũ, ρ sin(√T φ), ρ cos(√T φ))`.
pub fn compile_spin_observable(
    obs: &Observable,
    n: usize,
    n_components: usize,
    dim: usize,
) -> Result<FormalSeries, AlgebraError> {
    if n_components < 2 {
        return Err(AlgebraError::InvalidN(n_components));
    }
    let n_tilde = n_components - 2;
    // per site: powers of components 1..=N
    let mut alpha: BTreeMap<Site, Vec<u32>> = BTreeMap::new();
    let mut totals = vec![0u32; n_components + 1];
    for t in &obs.terms {
        if t.site.len() != dim {
            return Err(AlgebraError::DimensionMismatch {
                expected: dim,
                found: t.site.len(),
            });
        }
        if t.component == 0 || t.component > n_components {
            return Err(AlgebraError::InvalidComponent {
                component: t.component,
                n_components,
            });
        }
        alpha
            .entry(Site::new(&t.site))
            .or_insert_with(|| vec![0; n_components + 1])[t.component] += t.power;
        totals[t.component] += t.power;
    }
    for (k, &total) in totals.iter().enumerate().take(n_components).skip(1) {
        if total % 2 == 1 {
            return Err(AlgebraError::Parity { component: k, degree: total });
        }
    }
    let half_power: u32 = totals[1..n_components].iter().sum::<u32>() / 2;
    let shift = half_power as usize;
    if shift > n {
        return Ok(FormalSeries::zero(n));
    }
    let mut prefactor = MonoKey::unit();
    let mut product = FormalSeries::one(n - shift);
    for (x, a) in &alpha {
        let sin_power = a[n_components - 1];
        let cos_power = a[n_components];
        let u = UIndex::from_pairs((1..=n_tilde).map(|k| {
            (
                UKey {
                    site: *x,
                    comp: k as u8,
                },
                a[k],
            )
        }));
        prefactor = prefactor.mul(&MonoKey {
            p: PhiIndex::single(*x, sin_power),
            u,
            ..MonoKey::unit()
        });
        if sin_power + cos_power > 0 {
            let f = site_factor(*x, sin_power, cos_power, sin_power + cos_power, n_tilde, n - shift);
            product = series_mul(&product, &f, n - shift);
        }
    }
    let mut out = FormalSeries::zero(n);
    for s in 0..=n - shift {
        for (key, c) in product.order(s) {
            out.add_term(s + shift, key.mul(&prefactor), c.clone());
        }
    }
    Ok(out)
}

/// Replacement series for `(ũ^1)^{p̃¹}`: `φ^{p̃¹} Π_x (ρ_x sinc(√T φ_x))^{p̃¹_x}`
/// through order `n`, where `‖ũ_x‖` runs over all `N-2` components.
pub fn f_tilde_series(p1: &PhiIndex, n: usize, n_components: usize) -> FormalSeries {
    let n_tilde = n_components.saturating_sub(2);
    let mut product = FormalSeries::one(n);
    for (x, power) in p1.iter() {
        let f = site_factor(*x, power, 0, power, n_tilde, n);
        product = series_mul(&product, &f, n);
    }
    product.times_monomial(&MonoKey::phi(p1.clone()), 0)
}

/// `𝒢^{p'}_{x,e} = Σ_{l+m=p'} c̃_l c̃_m ‖ũ_x‖^{2l} ‖ũ_{x+e}‖^{2m}`, expanded
/// into component monomials.
pub fn g_polynomial(p_prime: u32, x: Site, e: Direction, n_components: usize) -> BTreeMap<UIndex, BigRational> {
    let n_tilde = n_components.saturating_sub(2);
    let y = x.step(e);
    let mut out: BTreeMap<UIndex, BigRational> = BTreeMap::new();
    for l in 0..=p_prime {
        let m = p_prime - l;
        let c = CoefficientTables::c_tilde(l) * CoefficientTables::c_tilde(m);
        for (ux, kx) in norm_power(x, l, n_tilde) {
            for (uy, ky) in norm_power(y, m, n_tilde) {
                let coeff = &c * BigRational::from_integer(&kx * &ky);
                let entry = out.entry(ux.merge(&uy)).or_insert_with(BigRational::zero);
                *entry += coeff;
            }
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::coeffs::rat;

    fn o() -> Site {
        Site::origin(3)
    }

    fn u(comp: u8, power: u32) -> (UKey, u32) {
        (UKey { site: o(), comp }, power)
    }

    #[test]
    fn magnetization_to_second_order() {
        let s = compile_spin_observable(&Observable::magnetization(3, 3), 2, 3, 3).unwrap();
        let phi = |k| MonoKey::phi(PhiIndex::single(o(), k));
        let tilde = |k| MonoKey::tilde(UIndex::from_pairs([u(1, k)]));
        assert_eq!(s.coefficient(0, &MonoKey::unit()), rat(1, 1));
        assert_eq!(s.coefficient(1, &phi(2)), rat(-1, 2));
        assert_eq!(s.coefficient(1, &tilde(2)), rat(-1, 2));
        assert_eq!(s.coefficient(2, &phi(4)), rat(1, 24));
        assert_eq!(s.coefficient(2, &tilde(4)), rat(-1, 8));
        assert_eq!(s.coefficient(2, &phi(2).mul(&tilde(2))), rat(1, 4));
        assert_eq!(s.term_count(), 6);
    }

    #[test]
    fn magnetization_with_two_transverse_components() {
        let s = compile_spin_observable(&Observable::magnetization(3, 4), 2, 4, 3).unwrap();
        // -1/8 ‖ũ‖^4 = -1/8 (u1^4 + 2 u1^2 u2^2 + u2^4)
        let mixed = MonoKey::tilde(UIndex::from_pairs([u(1, 2), u(2, 2)]));
        assert_eq!(s.coefficient(2, &mixed), rat(-1, 4));
    }

    #[test]
    fn constant_and_transverse_observables() {
        let one = compile_spin_observable(&Observable::default(), 3, 3, 3).unwrap();
        assert_eq!(one, FormalSeries::one(3));
        let obs = Observable {
            terms: vec![ObservableTerm {
                site: vec![0, 0, 0],
                component: 1,
                power: 2,
            }],
        };
        let s = compile_spin_observable(&obs, 3, 4, 3).unwrap();
        assert_eq!(s.term_count(), 1);
        assert_eq!(s.coefficient(1, &MonoKey::tilde(UIndex::from_pairs([u(1, 2)]))), rat(1, 1));
    }

    #[test]
    fn shifted_observables_keep_higher_orders() {
        let obs = Observable {
            terms: vec![ObservableTerm {
                site: vec![0, 0, 0],
                component: 2,
                power: 2,
            }],
        };
        // ρ² sin²(√T φ) = T φ² - T² (φ⁴/3 + ũ² φ²) + O(T³)
        let s = compile_spin_observable(&obs, 2, 3, 3).unwrap();
        let phi = |k| MonoKey::phi(PhiIndex::single(o(), k));
        let tilde = MonoKey::tilde(UIndex::from_pairs([u(1, 2)]));
        assert_eq!(s.coefficient(1, &phi(2)), rat(1, 1));
        assert_eq!(s.coefficient(2, &phi(4)), rat(-1, 3));
        assert_eq!(s.coefficient(2, &phi(2).mul(&tilde)), rat(-1, 1));
        assert_eq!(s.term_count(), 3);
    }

    #[test]
    fn parity_and_range_errors() {
        let obs = Observable {
            terms: vec![ObservableTerm {
                site: vec![0, 0, 0],
                component: 2,
                power: 1,
            }],
        };
        assert!(matches!(
            compile_spin_observable(&obs, 2, 3, 3),
            Err(AlgebraError::Parity { component: 2, degree: 1 })
        ));
        let bad = Observable {
            terms: vec![ObservableTerm {
                site: vec![0, 0, 0],
                component: 4,
                power: 2,
            }],
        };
        assert!(compile_spin_observable(&bad, 2, 3, 3).is_err());
    }

    #[test]
    fn f_tilde_first_orders() {
        let single = PhiIndex::single(o(), 1);
        assert_eq!(f_tilde_series(&single, 0, 3), FormalSeries::monomial(0, 0, MonoKey::phi(single.clone()), rat(1, 1)));
        let s = f_tilde_series(&single, 1, 3);
        assert_eq!(s.coefficient(1, &MonoKey::phi(PhiIndex::single(o(), 3))), rat(-1, 6));
        let mixed = MonoKey {
            p: single.clone(),
            u: UIndex::from_pairs([u(1, 2)]),
            ..MonoKey::unit()
        };
        assert_eq!(s.coefficient(1, &mixed), rat(-1, 2));
        let sq = f_tilde_series(&PhiIndex::single(o(), 2), 1, 3);
        assert_eq!(sq.coefficient(0, &MonoKey::phi(PhiIndex::single(o(), 2))), rat(1, 1));
        assert_eq!(sq.coefficient(1, &MonoKey::phi(PhiIndex::single(o(), 4))), rat(-1, 3));
        let mixed2 = MonoKey {
            p: PhiIndex::single(o(), 2),
            u: UIndex::from_pairs([u(1, 2)]),
            ..MonoKey::unit()
        };
        assert_eq!(sq.coefficient(1, &mixed2), rat(-1, 1));
    }

    #[test]
    fn g_polynomials() {
        let e = Direction::new(0);
        let g0 = g_polynomial(0, o(), e, 3);
        assert_eq!(g0.len(), 1);
        assert_eq!(g0[&UIndex::new()], rat(1, 1));
        let g1 = g_polynomial(1, o(), e, 3);
        assert_eq!(g1[&UIndex::from_pairs([u(1, 2)])], rat(-1, 2));
        let y = UKey { site: o().step(e), comp: 1 };
        assert_eq!(g1[&UIndex::from_pairs([(y, 2)])], rat(-1, 2));
        let g2 = g_polynomial(2, o(), e, 3);
        assert_eq!(g2[&UIndex::from_pairs([u(1, 4)])], rat(-1, 8));
        assert_eq!(g2[&UIndex::from_pairs([u(1, 2), (y, 2)])], rat(1, 4));
        // no transverse components: only the constant survives
        assert!(g_polynomial(1, o(), e, 2).is_empty());
    }

    #[test]
    fn observable_json() {
        let text = r#"[{"site": [0, 0, 0], "component": 3, "power": 1}]"#;
        assert_eq!(Observable::from_json(text).unwrap(), Observable::magnetization(3, 3));
        assert!(Observable::from_json(r#"[{"site": [0], "component": 1, "power": 1, "x": 2}]"#).is_err());
    }
}
