//! Order-graded formal power series in `T` with monomial coefficients.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use super::index::{GradIndex, MonoKey, PhiIndex, UIndex};

/// A monomial `coeff · φ^p ũ^p̃ (∇φ)^q`.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub coeff: BigRational,
    pub p: PhiIndex,
    pub u: UIndex,
    pub q: GradIndex,
}

impl Monomial {
    pub fn key(&self) -> MonoKey {
        MonoKey {
            p: self.p.clone(),
            u: self.u.clone(),
            q: self.q.clone(),
        }
    }
}

/// `Σ_{s ≤ max_order} T^s Σ_m a_{s,m} m`, with exact coefficients and
/// distinct keys within each order.
#[derive(Clone, Debug, PartialEq)]
pub struct FormalSeries {
    terms: Vec<BTreeMap<MonoKey, BigRational>>,
}

impl FormalSeries {
    pub fn zero(max_order: usize) -> Self {
        FormalSeries {
            terms: vec![BTreeMap::new(); max_order + 1],
        }
    }

    /// The constant series `1`.
    pub fn one(max_order: usize) -> Self {
        Self::monomial(max_order, 0, MonoKey::unit(), BigRational::from_integer(1.into()))
    }

    /// `coeff · T^order · key`, zero if `order > max_order`.
    pub fn monomial(max_order: usize, order: usize, key: MonoKey, coeff: BigRational) -> Self {
        let mut s = Self::zero(max_order);
        s.add_term(order, key, coeff);
        s
    }

    pub fn max_order(&self) -> usize {
        self.terms.len() - 1
    }

    /// Add `coeff · T^order · key`; terms beyond `max_order` are dropped and
    /// cancelled keys are removed.
    pub fn add_term(&mut self, order: usize, key: MonoKey, coeff: BigRational) {
        if order > self.max_order() || coeff.is_zero() {
            return;
        }
        let slot = self.terms[order].entry(key);
        match slot {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&mut self, other: &FormalSeries) {
        for (s, terms) in other.terms.iter().enumerate() {
            for (k, c) in terms {
                self.add_term(s, k.clone(), c.clone());
            }
        }
    }

    pub fn scale(&self, factor: &BigRational) -> FormalSeries {
        let mut out = Self::zero(self.max_order());
        for (s, terms) in self.terms.iter().enumerate() {
            for (k, c) in terms {
                out.add_term(s, k.clone(), c * factor);
            }
        }
        out
    }

    /// Multiply every monomial by `key` and shift orders up by `shift`;
    /// terms pushed past `max_order` are dropped.
    pub fn times_monomial(&self, key: &MonoKey, shift: usize) -> FormalSeries {
        let mut out = Self::zero(self.max_order());
        for (s, terms) in self.terms.iter().enumerate() {
            for (k, c) in terms {
                out.add_term(s + shift, k.mul(key), c.clone());
            }
        }
        out
    }

    /// Terms of order `s`.
    pub fn order(&self, s: usize) -> impl Iterator<Item = (&MonoKey, &BigRational)> {
        self.terms.get(s).into_iter().flat_map(|m| m.iter())
    }

    pub fn monomials(&self, s: usize) -> impl Iterator<Item = Monomial> + '_ {
        self.order(s).map(|(k, c)| Monomial {
            coeff: c.clone(),
            p: k.p.clone(),
            u: k.u.clone(),
            q: k.q.clone(),
        })
    }

    pub fn term_count(&self) -> usize {
        self.terms.iter().map(|m| m.len()).sum()
    }

    pub fn coefficient(&self, s: usize, key: &MonoKey) -> BigRational {
        self.terms
            .get(s)
            .and_then(|m| m.get(key))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn to_json(&self) -> SeriesJson {
        SeriesJson {
            max_order: self.max_order(),
            orders: self
                .terms
                .iter()
                .enumerate()
                .map(|(s, terms)| OrderJson {
                    order: s,
                    terms: terms
                        .iter()
                        .map(|(k, c)| TermJson {
                            coeff_num: c.numer().to_string(),
                            coeff_den: c.denom().to_string(),
                            p: k.p.iter().map(|(x, v)| (x.coords().to_vec(), v)).collect(),
                            p_tilde: k.u.iter().map(|(x, v)| (x.site.coords().to_vec(), x.comp, v)).collect(),
                            q: k
                                .q
                                .iter()
                                .map(|(x, v)| (x.site.coords().to_vec(), x.dir.axis() + 1, v))
                                .collect(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

/// Cauchy product of `a` and `b` truncated at order `n`.
pub fn series_mul(a: &FormalSeries, b: &FormalSeries, n: usize) -> FormalSeries {
    let mut out = FormalSeries::zero(n);
    for i in 0..=n.min(a.max_order()) {
        for (ka, ca) in a.order(i) {
            for j in 0..=(n - i).min(b.max_order()) {
                for (kb, cb) in b.order(j) {
                    out.add_term(i + j, ka.mul(kb), ca * cb);
                }
            }
        }
    }
    out
}

#[derive(Debug, Serialize)]
pub struct SeriesJson {
    pub max_order: usize,
    pub orders: Vec<OrderJson>,
}

#[derive(Debug, Serialize)]
pub struct OrderJson {
    pub order: usize,
    pub terms: Vec<TermJson>,
}

/// One monomial: `p` as `[site, power]`, `p̃` as `[site, component, power]`,
/// `q` as `[site, axis, power]` (axes 1-based).
#[derive(Debug, Serialize)]
pub struct TermJson {
    pub coeff_num: String,
    pub coeff_den: String,
    pub p: Vec<(Vec<i32>, u32)>,
    pub p_tilde: Vec<(Vec<i32>, u8, u32)>,
    pub q: Vec<(Vec<i32>, usize, u32)>,
}
