//! Sparse multi-indices `p`, `p̃`, `q` and their canonical forms.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::lattice::{Direction, Site};

/// A key of a multi-index that is attached to a lattice site.
pub trait SiteKeyed: Copy + Ord {
    fn site(&self) -> Site;
    fn with_site(&self, site: Site) -> Self;
}

impl SiteKeyed for Site {
    fn site(&self) -> Site {
        *self
    }
    fn with_site(&self, site: Site) -> Self {
        site
    }
}

/// Key of `p̃`: a site and a transverse component `1..=N-2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UKey {
    pub site: Site,
    pub comp: u8,
}

impl SiteKeyed for UKey {
    fn site(&self) -> Site {
        self.site
    }
    fn with_site(&self, site: Site) -> Self {
        UKey { site, comp: self.comp }
    }
}

/// Key of `q`: a positive edge `(x, x+e)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GKey {
    pub site: Site,
    pub dir: Direction,
}

impl SiteKeyed for GKey {
    fn site(&self) -> Site {
        self.site
    }
    fn with_site(&self, site: Site) -> Self {
        GKey { site, dir: self.dir }
    }
}

/// A finitely supported map `K -> positive integer`, stored sorted by key
/// with no zero entries.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SparseIndex<K: Ord> {
    entries: Vec<(K, u32)>,
}

pub type PhiIndex = SparseIndex<Site>;
pub type UIndex = SparseIndex<UKey>;
pub type GradIndex = SparseIndex<GKey>;

impl<K: SiteKeyed> Default for SparseIndex<K> {
    fn default() -> Self {
        SparseIndex { entries: Vec::new() }
    }
}

impl<K: SiteKeyed> SparseIndex<K> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build from arbitrary pairs, merging repeated keys and dropping zeros.
    pub fn from_pairs<I: IntoIterator<Item = (K, u32)>>(pairs: I) -> Self {
        let mut entries: Vec<(K, u32)> = pairs.into_iter().filter(|(_, v)| *v > 0).collect();
        entries.sort_by_key(|a| a.0);
        let mut merged: Vec<(K, u32)> = Vec::with_capacity(entries.len());
        for (k, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == k => last.1 += v,
                _ => merged.push((k, v)),
            }
        }
        SparseIndex { entries: merged }
    }

    pub fn single(key: K, power: u32) -> Self {
        Self::from_pairs([(key, power)])
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, u32)> + '_ {
        self.entries.iter().map(|(k, v)| (k, *v))
    }

    pub fn get(&self, key: &K) -> u32 {
        self.entries
            .binary_search_by(|(k, _)| k.cmp(key))
            .map(|i| self.entries[i].1)
            .unwrap_or(0)
    }

    /// `‖·‖_1`.
    pub fn degree(&self) -> u32 {
        self.entries.iter().map(|(_, v)| v).sum()
    }

    /// Exponent-wise sum, i.e. the index of the product monomial.
    pub fn merge(&self, other: &Self) -> Self {
        let (a, b) = (&self.entries, &other.entries);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        SparseIndex { entries: out }
    }

    pub fn translate(&self, by: &Site) -> Self {
        // translation preserves the site order, but keys with equal sites
        // keep their relative order as well, so no re-sort is needed
        SparseIndex {
            entries: self
                .entries
                .iter()
                .map(|(k, v)| (k.with_site(k.site().add(by)), *v))
                .collect(),
        }
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        self.entries.iter().map(|(k, _)| k.site())
    }
}

impl SparseIndex<UKey> {
    /// Largest component label present.
    pub fn max_component(&self) -> u8 {
        self.entries.iter().map(|(k, _)| k.comp).max().unwrap_or(0)
    }

    /// Marginal `p̃^k` as a site index.
    pub fn component(&self, comp: u8) -> PhiIndex {
        PhiIndex::from_pairs(
            self.entries
                .iter()
                .filter(|(k, _)| k.comp == comp)
                .map(|(k, v)| (k.site, *v)),
        )
    }

    /// Entries of all components other than `comp`.
    pub fn without_component(&self, comp: u8) -> UIndex {
        SparseIndex {
            entries: self.entries.iter().filter(|(k, _)| k.comp != comp).copied().collect(),
        }
    }

    /// Relabel components through `map[old] = new`.
    pub fn relabel(&self, map: &[u8]) -> UIndex {
        UIndex::from_pairs(self.entries.iter().map(|(k, v)| {
            (
                UKey {
                    site: k.site,
                    comp: map[k.comp as usize],
                },
                *v,
            )
        }))
    }

    /// Each component marginal has even total degree.
    pub fn is_even(&self) -> bool {
        let top = self.max_component() as usize;
        let mut totals = vec![0u32; top + 1];
        for (k, v) in &self.entries {
            totals[k.comp as usize] += v;
        }
        totals.iter().all(|t| t % 2 == 0)
    }
}

impl SparseIndex<GKey> {
    /// `supp_q`: both endpoints of every edge.
    pub fn support(&self) -> Vec<Site> {
        let mut out: Vec<Site> = self
            .entries
            .iter()
            .flat_map(|(k, _)| [k.site, k.site.step(k.dir)])
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

impl<K: Ord + fmt::Debug> fmt::Debug for SparseIndex<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.entries.iter().map(|(k, v)| (k, v))).finish()
    }
}

/// The index triple `(p, p̃, q)` of a monomial `φ^p ũ^p̃ (∇φ)^q`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MonoKey {
    pub p: PhiIndex,
    pub u: UIndex,
    pub q: GradIndex,
}

impl MonoKey {
    pub fn unit() -> Self {
        Self::default()
    }

    pub fn is_unit(&self) -> bool {
        self.p.is_empty() && self.u.is_empty() && self.q.is_empty()
    }

    pub fn phi(p: PhiIndex) -> Self {
        MonoKey { p, ..Self::default() }
    }

    pub fn tilde(u: UIndex) -> Self {
        MonoKey { u, ..Self::default() }
    }

    pub fn mul(&self, other: &MonoKey) -> MonoKey {
        MonoKey {
            p: self.p.merge(&other.p),
            u: self.u.merge(&other.u),
            q: self.q.merge(&other.q),
        }
    }

    /// Total field degree `‖p‖_1 + ‖p̃‖_1 + ‖q‖_1`.
    pub fn degree(&self) -> u32 {
        self.p.degree() + self.u.degree() + self.q.degree()
    }

    /// Union of the supports of `p`, `p̃` and `q`, sorted.
    pub fn support(&self) -> Vec<Site> {
        let mut s: Vec<Site> = self.p.sites().chain(self.u.sites()).chain(self.q.support()).collect();
        s.sort();
        s.dedup();
        s
    }

    pub fn translate(&self, by: &Site) -> MonoKey {
        MonoKey {
            p: self.p.translate(by),
            u: self.u.translate(by),
            q: self.q.translate(by),
        }
    }
}

/// Translation- and component-permutation-normalised monomial key.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CanonicalKey(pub MonoKey);

/// Normalise `key`: translate the lexicographically smallest support site to
/// the origin, then relabel the `ũ` components in order of decreasing total
/// degree, ties broken by decreasing site profile. Returns the key and the
/// translation that was applied.
pub fn canonicalize(key: &MonoKey) -> (CanonicalKey, Option<Site>) {
    let support = key.support();
    let Some(min) = support.first() else {
        return (CanonicalKey(MonoKey::unit()), None);
    };
    let shift = min.neg();
    let moved = key.translate(&shift);
    let top = moved.u.max_component();
    if top <= 1 {
        return (CanonicalKey(moved), Some(shift));
    }
    let mut profiles: Vec<(u32, PhiIndex, u8)> = (1..=top)
        .map(|c| {
            let m = moved.u.component(c);
            (m.degree(), m, c)
        })
        .collect();
    profiles.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| b.1.cmp(&a.1)));
    let mut map = vec![0u8; top as usize + 1];
    for (new, (_, _, old)) in profiles.iter().enumerate() {
        map[*old as usize] = new as u8 + 1;
    }
    let u = moved.u.relabel(&map);
    (
        CanonicalKey(MonoKey {
            p: moved.p,
            u,
            q: moved.q,
        }),
        Some(shift),
    )
}
