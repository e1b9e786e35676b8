//! The truncated expectation operator `⟨·⟩^(n)`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use num_traits::ToPrimitive;
use parking_lot::RwLock;
use rayon::prelude::*;

use super::{EngineError, MemoCache};
use crate::algebra::{canonicalize, f_tilde_series, g_polynomial, CoefficientTables, MonoKey, UIndex};
use crate::green::{GreenError, GreenTable};
use crate::lattice::{Direction, Site};
use crate::numeric::NeumaierSum;
use crate::wick::{connected_correlation_capped, gaussian_moment_capped, Block, Leg, WickError};

/// Guard against runaway recursion; the order strictly decreases, so this
/// only fires on a logic error.
const MAX_DEPTH: usize = 256;

/// Evaluator of `⟨φ^p ũ^p̃⟩^(n)` for one Green table and one radius schedule.
pub struct Engine {
    table: Arc<GreenTable>,
    n_components: usize,
    schedule: Vec<i32>,
    prune_tol: f64,
    parallel: bool,
    leg_cap: usize,
    memo: MemoCache,
    /// `c_r` as floating point, indexed by `r`
    c_table: Vec<f64>,
    g_cache: RwLock<HashMap<(u32, Direction), GPolynomial>>,
}

type Coeffs = Vec<f64>;

/// `𝒢^{p'}` at the origin with floating-point coefficients.
type GPolynomial = Arc<Vec<(UIndex, f64)>>;

fn wick_err(e: WickError) -> EngineError {
    match e {
        WickError::Green(GreenError::OutOfTable { site, radius }) => EngineError::TableTooSmall { site, radius },
        other => EngineError::Wick(other),
    }
}

impl Engine {
    pub fn new(
        table: Arc<GreenTable>,
        n_components: usize,
        schedule: Vec<i32>,
        prune_tol: f64,
        parallel: bool,
    ) -> Result<Self, EngineError> {
        if n_components < 2 {
            return Err(EngineError::InvalidConfig(format!("N must be >= 2, got {n_components}")));
        }
        if schedule.is_empty() || schedule.iter().any(|&r| r < 0) {
            return Err(EngineError::InvalidConfig("radius schedule must be non-empty and non-negative".into()));
        }
        if schedule.windows(2).any(|w| w[1] > w[0]) {
            return Err(EngineError::InvalidConfig("radius schedule must be non-increasing".into()));
        }
        if prune_tol.is_nan() || prune_tol < 0.0 {
            return Err(EngineError::InvalidConfig("prune_tol must be >= 0".into()));
        }
        Ok(Engine {
            table,
            n_components,
            schedule,
            prune_tol,
            parallel,
            leg_cap: crate::wick::DEFAULT_LEG_CAP,
            memo: MemoCache::new(),
            c_table: (0..=64)
                .map(|r| CoefficientTables::c(r).to_f64().expect("finite rational"))
                .collect(),
            g_cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn table(&self) -> &GreenTable {
        &self.table
    }

    pub fn n_components(&self) -> usize {
        self.n_components
    }

    pub fn schedule(&self) -> &[i32] {
        &self.schedule
    }

    pub fn memo(&self) -> &MemoCache {
        &self.memo
    }

    fn dim(&self) -> usize {
        self.table.dim()
    }

    fn radius(&self, level: usize) -> i32 {
        self.schedule[level.min(self.schedule.len() - 1)]
    }

    /// Coefficients `[c_0, …, c_n]` of `⟨φ^p ũ^p̃⟩^(n) = Σ_s c_s T^s` for the
    /// monomial `key` (which must carry no gradient factors).
    pub fn expect_monomial(&self, key: &MonoKey, n: usize) -> Result<Coeffs, EngineError> {
        if !key.q.is_empty() {
            return Err(EngineError::InvalidConfig("gradient factors are not accepted at top level".into()));
        }
        if key.u.max_component() as usize > self.n_components.saturating_sub(2) {
            return Err(EngineError::InvalidConfig(format!(
                "transverse component {} out of range for N = {}",
                key.u.max_component(),
                self.n_components
            )));
        }
        Ok(self.expect(key, n, 0)?.to_vec())
    }

    pub(crate) fn expect(&self, key: &MonoKey, n: usize, depth: usize) -> Result<Arc<[f64]>, EngineError> {
        if depth > MAX_DEPTH {
            return Err(EngineError::Depth(MAX_DEPTH));
        }
        if key.p.degree() % 2 == 1 || !key.u.is_even() {
            return Ok(vec![0.0; n + 1].into());
        }
        if key.is_unit() {
            let mut v = vec![0.0; n + 1];
            v[0] = 1.0;
            return Ok(v.into());
        }
        if n == 0 {
            return Ok(vec![self.order_zero(key)?].into());
        }
        let (canon, _) = canonicalize(key);
        if let Some(hit) = self.memo.get(&canon, n) {
            return Ok(hit);
        }
        let value: Arc<[f64]> = if canon.0.p.is_empty() {
            self.substitute(&canon.0, n, depth)?
        } else {
            self.extract(&canon.0, n, depth)?
        }
        .into();
        self.memo.insert(canon, n, value.clone());
        Ok(value)
    }

    /// At order zero every field is an independent Gaussian with covariance
    /// `G`, so the expectation factorizes over `φ` and the `ũ` components.
    fn order_zero(&self, key: &MonoKey) -> Result<f64, EngineError> {
        let mut value = gaussian_moment_capped(&self.table, &Self::phi_legs(key), self.leg_cap).map_err(wick_err)?;
        for c in 1..=key.u.max_component() {
            if value == 0.0 {
                break;
            }
            let legs: Vec<Leg> = key
                .u
                .component(c)
                .iter()
                .flat_map(|(x, k)| std::iter::repeat_n(Leg::Site(*x), k as usize))
                .collect();
            if !legs.is_empty() {
                value *= gaussian_moment_capped(&self.table, &legs, self.leg_cap).map_err(wick_err)?;
            }
        }
        Ok(value)
    }

    /// Pure-`ũ` monomial: replace `(ũ^1)^{p̃¹}` by the `φ` series.
    fn substitute(&self, key: &MonoKey, n: usize, depth: usize) -> Result<Coeffs, EngineError> {
        let p1 = key.u.component(1);
        let rest = MonoKey::tilde(key.u.without_component(1));
        let f = f_tilde_series(&p1, n, self.n_components);
        let mut acc: Vec<NeumaierSum> = vec![NeumaierSum::new(); n + 1];
        for s in 0..=n {
            for (m, c) in f.order(s) {
                let c = c.to_f64().expect("finite rational");
                let inner = self.expect(&m.mul(&rest), n - s, depth + 1)?;
                for (j, v) in inner.iter().enumerate() {
                    acc[s + j].add(c * v);
                }
            }
        }
        Ok(acc.iter().map(|a| a.value()).collect())
    }

    fn phi_legs(key: &MonoKey) -> Vec<Leg> {
        key.p
            .iter()
            .flat_map(|(x, k)| std::iter::repeat_n(Leg::Site(*x), k as usize))
            .collect()
    }

    /// Extraction formula for `‖p‖_1 > 0`.
    fn extract(&self, key: &MonoKey, n: usize, depth: usize) -> Result<Coeffs, EngineError> {
        let legs = Self::phi_legs(key);
        let phi_p = gaussian_moment_capped(&self.table, &legs, self.leg_cap).map_err(wick_err)?;
        let u_only = MonoKey::tilde(key.u.clone());
        let lead = self.expect(&u_only, n, depth + 1)?;
        let mut acc: Vec<NeumaierSum> = vec![NeumaierSum::new(); n + 1];
        for (j, v) in lead.iter().enumerate() {
            acc[j].add(phi_p * v);
        }
        if n >= 1 {
            let anchors: Vec<Site> = key.p.sites().collect();
            let block = Block::new(legs);
            for k in 1..=n {
                let part = self.vertex_sum(&block, &anchors, &key.u, n, k, depth)?;
                for (j, v) in part.iter().enumerate() {
                    acc[j].add(*v);
                }
            }
        }
        Ok(acc.iter().map(|a| a.value()).collect())
    }

    /// Sites within sup distance `radius` of any anchor, ordered by distance
    /// to the anchor set and then lexicographically.
    fn domain(&self, anchors: &[Site], radius: i32) -> Vec<Site> {
        let dim = self.dim();
        let offsets = Site::box_sites(dim, radius);
        if anchors.len() == 1 {
            return offsets.iter().map(|o| anchors[0].add(o)).collect();
        }
        let mut seen: HashSet<Site> = HashSet::new();
        let mut out: Vec<(i32, Site)> = Vec::new();
        for a in anchors {
            for o in &offsets {
                let x = a.add(o);
                if seen.insert(x) {
                    let dist = anchors.iter().map(|b| x.sub(b).sup_norm()).min().unwrap_or(0);
                    out.push((dist, x));
                }
            }
        }
        out.sort();
        out.into_iter().map(|(_, x)| x).collect()
    }

    fn pruned(&self, anchors: &[Site], x: &Site, e: Direction) -> Result<bool, EngineError> {
        if self.prune_tol == 0.0 {
            return Ok(false);
        }
        let mut bound: f64 = 0.0;
        for a in anchors {
            let r = x.sub(a);
            if !self.table.contains(&r) || !self.table.contains(&r.step(e)) {
                continue;
            }
            bound = bound.max(self.table.grad_green(&r, e)?.abs());
        }
        Ok(bound < self.prune_tol)
    }

    /// `𝒢^{p'}_{0,e}` with floating coefficients, cached.
    fn g_at_origin(&self, p_prime: u32, e: Direction) -> GPolynomial {
        if let Some(v) = self.g_cache.read().get(&(p_prime, e)) {
            return v.clone();
        }
        let poly = g_polynomial(p_prime, Site::origin(self.dim()), e, self.n_components);
        let v: GPolynomial = Arc::new(
            poly.into_iter()
                .map(|(u, c)| (u, c.to_f64().expect("finite rational")))
                .collect(),
        );
        self.g_cache.write().entry((p_prime, e)).or_insert(v).clone()
    }

    /// `Σ_m coeff_m ⟨ũ^{p̃} ũ^m⟩^(order)` for `Π_l 𝒢^{p'_l}_{x_l,e_l}`.
    fn g_expectation(
        &self,
        u: &UIndex,
        vertices: &[(Site, Direction)],
        p_primes: &[u32],
        order: usize,
        depth: usize,
    ) -> Result<Coeffs, EngineError> {
        let mut poly: BTreeMap<UIndex, f64> = BTreeMap::new();
        poly.insert(u.clone(), 1.0);
        for (&(x, e), &pp) in vertices.iter().zip(p_primes) {
            if pp == 0 {
                continue;
            }
            let g = self.g_at_origin(pp, e);
            let mut next: BTreeMap<UIndex, f64> = BTreeMap::new();
            for (a, ca) in &poly {
                for (b, cb) in g.iter() {
                    *next.entry(a.merge(&b.translate(&x))).or_insert(0.0) += ca * cb;
                }
            }
            poly = next;
        }
        let mut acc = vec![NeumaierSum::new(); order + 1];
        for (m, c) in &poly {
            if *c == 0.0 {
                continue;
            }
            let inner = self.expect(&MonoKey::tilde(m.clone()), order, depth + 1)?;
            for (j, v) in inner.iter().enumerate() {
                acc[j].add(c * v);
            }
        }
        Ok(acc.iter().map(|a| a.value()).collect())
    }

    /// Contribution of `k` interaction vertices:
    /// `(1/k!) Σ_{s ≤ n} T^s Σ_{x_l,e_l} Σ_{r_l+p'_l=s_l≥1} Π c_{r_l}
    ///  Φ(φ^p; (∇φ)^{2r_1+2}; …) ⟨ũ^p̃ Π 𝒢^{p'_l}⟩^(n-s)`.
    fn vertex_sum(
        &self,
        block: &Block,
        anchors: &[Site],
        u: &UIndex,
        n: usize,
        k: usize,
        depth: usize,
    ) -> Result<Coeffs, EngineError> {
        let dim = self.dim();
        let first: Vec<(Site, Direction)> = self
            .domain(anchors, self.radius(0))
            .into_iter()
            .flat_map(|x| Direction::all(dim).map(move |e| (x, e)))
            .collect();
        let per_vertex = |&(x, e): &(Site, Direction)| -> Result<Coeffs, EngineError> {
            if self.pruned(anchors, &x, e)? {
                return Ok(vec![0.0; n + 1]);
            }
            let mut placed = vec![(x, e)];
            let mut acc = vec![NeumaierSum::new(); n + 1];
            self.place(block, anchors, u, n, k, &mut placed, &mut acc, depth)?;
            Ok(acc.iter().map(|a| a.value()).collect())
        };
        let parts: Vec<Coeffs> = if self.parallel {
            first.par_iter().map(per_vertex).collect::<Result<_, _>>()?
        } else {
            first.iter().map(per_vertex).collect::<Result<_, _>>()?
        };
        let mut acc = vec![NeumaierSum::new(); n + 1];
        for part in &parts {
            for (j, v) in part.iter().enumerate() {
                acc[j].add(*v);
            }
        }
        let k_fact: f64 = (1..=k).map(|i| i as f64).product();
        Ok(acc.iter().map(|a| a.value() / k_fact).collect())
    }

    #[allow(clippy::too_many_arguments)]
    fn place(
        &self,
        block: &Block,
        anchors: &[Site],
        u: &UIndex,
        n: usize,
        k: usize,
        placed: &mut Vec<(Site, Direction)>,
        acc: &mut [NeumaierSum],
        depth: usize,
    ) -> Result<(), EngineError> {
        if placed.len() == k {
            return self.leaf(block, u, n, placed, acc, depth);
        }
        let mut near: Vec<Site> = anchors.to_vec();
        for (x, e) in placed.iter() {
            near.push(*x);
            near.push(x.step(*e));
        }
        near.sort();
        near.dedup();
        let level = placed.len();
        for x in self.domain(&near, self.radius(level)) {
            for e in Direction::all(self.dim()) {
                if self.pruned(&near, &x, e)? {
                    continue;
                }
                placed.push((x, e));
                let r = self.place(block, anchors, u, n, k, placed, acc, depth);
                placed.pop();
                r?;
            }
        }
        Ok(())
    }

    /// All vertex labellings `(r_l, p'_l)` for fixed positions.
    fn leaf(
        &self,
        block: &Block,
        u: &UIndex,
        n: usize,
        placed: &[(Site, Direction)],
        acc: &mut [NeumaierSum],
        depth: usize,
    ) -> Result<(), EngineError> {
        let k = placed.len();
        let mut phi_cache: HashMap<Vec<u32>, f64> = HashMap::new();
        let mut g_cache: HashMap<(Vec<u32>, usize), Coeffs> = HashMap::new();
        let mut s_parts = vec![0u32; k];
        // enumerate s_l >= 1 with Σ s_l <= n, then the splits r_l + p'_l = s_l
        fn compositions(k: usize, budget: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            let remaining_slots = (k - cur.len() - 1) as u32;
            let used: u32 = cur.iter().sum();
            for s in 1..=budget.saturating_sub(used + remaining_slots) {
                cur.push(s);
                compositions(k, budget, cur, out);
                cur.pop();
            }
        }
        let mut all = Vec::new();
        compositions(k, n as u32, &mut Vec::new(), &mut all);
        for comp in all {
            s_parts.copy_from_slice(&comp);
            let s: u32 = comp.iter().sum();
            let mut r = vec![0u32; k];
            loop {
                let p_prime: Vec<u32> = (0..k).map(|l| s_parts[l] - r[l]).collect();
                let phi = match phi_cache.get(&r) {
                    Some(v) => *v,
                    None => {
                        let mut blocks = Vec::with_capacity(k + 1);
                        blocks.push(block.clone());
                        for (l, (x, e)) in placed.iter().enumerate() {
                            blocks.push(Block::bond_power(*x, *e, 2 * r[l] as usize + 2));
                        }
                        let v = connected_correlation_capped(&self.table, &blocks, self.leg_cap).map_err(wick_err)?;
                        phi_cache.insert(r.clone(), v);
                        v
                    }
                };
                if phi != 0.0 {
                    let c: f64 = r.iter().map(|&ri| self.c_table[ri as usize]).product();
                    let order = n - s as usize;
                    let gkey = (p_prime.clone(), order);
                    if !g_cache.contains_key(&gkey) {
                        let v = self.g_expectation(u, placed, &p_prime, order, depth)?;
                        g_cache.insert(gkey.clone(), v);
                    }
                    let g = &g_cache[&gkey];
                    for (j, v) in g.iter().enumerate() {
                        acc[s as usize + j].add(c * phi * v);
                    }
                }
                // next split
                let mut l = 0;
                loop {
                    if l == k {
                        break;
                    }
                    if r[l] < s_parts[l] {
                        r[l] += 1;
                        break;
                    }
                    r[l] = 0;
                    l += 1;
                }
                if l == k {
                    break;
                }
            }
        }
        Ok(())
    }
}
