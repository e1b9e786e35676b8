//! Gaussian moments and connected correlations of site fields `φ_x` and bond
//! gradients `∇^e_x φ` for the free field with covariance from a
//! [`GreenTable`].

mod decay;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::green::{GreenError, GreenTable};
use crate::lattice::{Direction, Site};
use crate::numeric::{DoubleDouble, NeumaierSum};

pub use decay::{connected_decays, DecayReport};

/// Default cap on the number of legs of a single Wick sum.
pub const DEFAULT_LEG_CAP: usize = 16;

#[derive(Debug, Error)]
pub enum WickError {
    #[error("{legs} legs exceed the cap of {cap}")]
    TooManyLegs { legs: usize, cap: usize },
    #[error("a connected correlation needs at least one block")]
    NoBlocks,
    #[error(transparent)]
    Green(#[from] GreenError),
}

/// A field insertion: either `φ_x` or the bond gradient
/// `∇^e_x φ = φ_{x+e} - φ_x` on the positive edge `(x, x+e)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Leg {
    Site(Site),
    Bond(Site, Direction),
}

impl Leg {
    pub fn anchor(&self) -> Site {
        match self {
            Leg::Site(x) | Leg::Bond(x, _) => *x,
        }
    }

    pub fn translate(&self, by: &Site) -> Leg {
        match self {
            Leg::Site(x) => Leg::Site(x.add(by)),
            Leg::Bond(x, e) => Leg::Bond(x.add(by), *e),
        }
    }
}

/// A multiset of legs whose product forms one factor of a truncated
/// expectation.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub legs: Vec<Leg>,
}

impl Block {
    pub fn new(legs: Vec<Leg>) -> Self {
        Block { legs }
    }

    /// `φ_x^power`.
    pub fn site_power(x: Site, power: usize) -> Self {
        Block {
            legs: vec![Leg::Site(x); power],
        }
    }

    /// `(∇^e_x φ)^power`.
    pub fn bond_power(x: Site, e: Direction, power: usize) -> Self {
        Block {
            legs: vec![Leg::Bond(x, e); power],
        }
    }

    pub fn len(&self) -> usize {
        self.legs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.legs.is_empty()
    }
}

/// A perfect matching of leg indices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pairing {
    pub pairs: Vec<(usize, usize)>,
}

/// Covariance `E[a b]` of two legs under the free field.
pub fn pair_covariance(table: &GreenTable, a: &Leg, b: &Leg) -> Result<f64, GreenError> {
    match (a, b) {
        (Leg::Site(x), Leg::Site(y)) => table.pair(x, y),
        (Leg::Site(x), Leg::Bond(y, e)) | (Leg::Bond(y, e), Leg::Site(x)) => {
            table.grad_green(&y.sub(x), *e)
        }
        (Leg::Bond(x, e), Leg::Bond(y, e2)) => table.grad_grad_green(x, y, *e, *e2),
    }
}

fn check_cap(legs: usize, cap: usize) -> Result<(), WickError> {
    if legs > cap {
        Err(WickError::TooManyLegs { legs, cap })
    } else {
        Ok(())
    }
}

/// All perfect matchings of `n` legs, in the order produced by always pairing
/// the lowest unpaired leg first.
pub fn enumerate_pairings(n: usize, cap: usize) -> Result<Vec<Pairing>, WickError> {
    check_cap(n, cap)?;
    let mut out = Vec::new();
    if n % 2 == 1 {
        return Ok(out);
    }
    fn rec(used: &mut [bool], cur: &mut Vec<(usize, usize)>, out: &mut Vec<Pairing>) {
        let Some(i) = used.iter().position(|u| !u) else {
            out.push(Pairing { pairs: cur.clone() });
            return;
        };
        used[i] = true;
        for j in i + 1..used.len() {
            if !used[j] {
                used[j] = true;
                cur.push((i, j));
                rec(used, cur, out);
                cur.pop();
                used[j] = false;
            }
        }
        used[i] = false;
    }
    rec(&mut vec![false; n], &mut Vec::new(), &mut out);
    Ok(out)
}

/// Dense symmetric covariance matrix of a leg list.
fn covariance_matrix(table: &GreenTable, legs: &[Leg]) -> Result<Vec<f64>, GreenError> {
    let n = legs.len();
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = if j > i && legs[j] == legs[j - 1] && i != j - 1 {
                c[i * n + j - 1]
            } else {
                pair_covariance(table, &legs[i], &legs[j])?
            };
            c[i * n + j] = v;
            c[j * n + i] = v;
        }
    }
    Ok(c)
}

/// Distinct `(block, leg)` types with their multiplicities, in order of
/// first appearance.
fn leg_types(legs: &[Leg], block_of: &[usize]) -> (Vec<Leg>, Vec<usize>, Vec<u32>) {
    let mut kinds: Vec<Leg> = Vec::new();
    let mut blocks: Vec<usize> = Vec::new();
    let mut mult: Vec<u32> = Vec::new();
    for (leg, &b) in legs.iter().zip(block_of) {
        match kinds.iter().zip(&blocks).position(|(k, kb)| k == leg && *kb == b) {
            Some(i) => mult[i] += 1,
            None => {
                kinds.push(*leg);
                blocks.push(b);
                mult.push(1);
            }
        }
    }
    (kinds, blocks, mult)
}

/// Sum over pairings grouped by the symmetric matrix `n_st` of pair counts
/// between leg types. Each matrix stands for
/// `Π_s m_s! / (Π_{s<t} n_st! Π_s n_ss! 2^{n_ss})` identical pairings.
struct Grouped<'a> {
    c: &'a [f64],
    blocks: &'a [usize],
    nblocks: usize,
    connected: bool,
    rem: Vec<u32>,
    /// block adjacency as bit masks
    adj: Vec<u64>,
    inv_fact: Vec<f64>,
    acc: NeumaierSum,
}

impl Grouped<'_> {
    fn types(&self) -> usize {
        self.rem.len()
    }

    fn spans_all_blocks(&self) -> bool {
        let mut seen: u64 = 1;
        let mut frontier: u64 = 1;
        while frontier != 0 {
            let mut next = 0;
            for b in 0..self.nblocks {
                if frontier >> b & 1 == 1 {
                    next |= self.adj[b];
                }
            }
            frontier = next & !seen;
            seen |= next;
        }
        seen.count_ones() as usize == self.nblocks
    }

    fn row(&mut self, s: usize, w: f64) {
        if s == self.types() {
            if !self.connected || self.spans_all_blocks() {
                self.acc.add(w);
            }
            return;
        }
        let r = self.rem[s];
        let css = self.c[s * self.types() + s];
        let mut ws = w;
        for k in 0..=r / 2 {
            self.rem[s] = r - 2 * k;
            self.col(s, s + 1, ws * self.inv_fact[k as usize]);
            ws *= css * 0.5;
        }
        self.rem[s] = r;
    }

    fn col(&mut self, s: usize, t: usize, w: f64) {
        if self.rem[s] == 0 {
            self.row(s + 1, w);
            return;
        }
        let nt = self.types();
        if t == nt {
            return;
        }
        let (rs, rt) = (self.rem[s], self.rem[t]);
        let cst = self.c[s * nt + t];
        let (bs, bt) = (self.blocks[s], self.blocks[t]);
        let (adj_s, adj_t) = (self.adj[bs], self.adj[bt]);
        let lo = if t + 1 == nt { rs } else { 0 };
        let mut wk = w * cst.powi(lo as i32);
        for k in lo..=rs.min(rt) {
            self.rem[s] = rs - k;
            self.rem[t] = rt - k;
            if k > 0 && bs != bt {
                self.adj[bs] |= 1 << bt;
                self.adj[bt] |= 1 << bs;
            }
            self.col(s, t + 1, wk * self.inv_fact[k as usize]);
            self.adj[bs] = adj_s;
            self.adj[bt] = adj_t;
            wk *= cst;
        }
        self.rem[s] = rs;
        self.rem[t] = rt;
    }
}

fn grouped_sum(table: &GreenTable, legs: &[Leg], block_of: &[usize], nblocks: usize, connected: bool) -> Result<f64, WickError> {
    let (kinds, blocks, mult) = leg_types(legs, block_of);
    let nt = kinds.len();
    let mut c = vec![0.0; nt * nt];
    for i in 0..nt {
        for j in i..nt {
            let v = pair_covariance(table, &kinds[i], &kinds[j])?;
            c[i * nt + j] = v;
            c[j * nt + i] = v;
        }
    }
    let mut inv_fact = vec![1.0f64; legs.len() + 1];
    let mut fact = 1.0f64;
    for (k, slot) in inv_fact.iter_mut().enumerate().skip(1) {
        fact *= k as f64;
        *slot = 1.0 / fact;
    }
    let prefactor: f64 = mult
        .iter()
        .map(|&m| (1..=m).map(|v| v as f64).product::<f64>())
        .product();
    let mut g = Grouped {
        c: &c,
        blocks: &blocks,
        nblocks,
        connected,
        rem: mult,
        adj: vec![0; nblocks],
        inv_fact,
        acc: NeumaierSum::new(),
    };
    g.row(0, prefactor);
    Ok(g.acc.value())
}

/// Wick sum over pairings of `legs` with at most `cap` legs.
pub fn gaussian_moment_capped(table: &GreenTable, legs: &[Leg], cap: usize) -> Result<f64, WickError> {
    check_cap(legs.len(), cap)?;
    if legs.len() % 2 == 1 {
        return Ok(0.0);
    }
    if legs.is_empty() {
        return Ok(1.0);
    }
    grouped_sum(table, legs, &vec![0; legs.len()], 1, false)
}

/// Wick sum visiting every perfect matching of `legs` individually.
pub fn gaussian_moment_by_pairings(table: &GreenTable, legs: &[Leg], cap: usize) -> Result<f64, WickError> {
    check_cap(legs.len(), cap)?;
    if legs.len() % 2 == 1 {
        return Ok(0.0);
    }
    if legs.is_empty() {
        return Ok(1.0);
    }
    let c = covariance_matrix(table, legs)?;
    let n = legs.len();
    let mut acc = NeumaierSum::new();
    fn rec(c: &[f64], n: usize, used: &mut [bool], prod: f64, acc: &mut NeumaierSum) {
        let Some(i) = used.iter().position(|u| !u) else {
            acc.add(prod);
            return;
        };
        used[i] = true;
        for j in i + 1..n {
            if !used[j] {
                used[j] = true;
                rec(c, n, used, prod * c[i * n + j], acc);
                used[j] = false;
            }
        }
        used[i] = false;
    }
    rec(&c, n, &mut vec![false; n], 1.0, &mut acc);
    Ok(acc.value())
}

/// `E[Π legs]` under the free field; zero for an odd number of legs.
pub fn gaussian_moment(table: &GreenTable, legs: &[Leg]) -> Result<f64, WickError> {
    gaussian_moment_capped(table, legs, DEFAULT_LEG_CAP)
}

struct ConnectedSearch<'a> {
    c: &'a [f64],
    n: usize,
    block_of: &'a [usize],
    nblocks: usize,
    used: Vec<bool>,
    /// component label of each block
    comp: Vec<usize>,
    /// unpaired legs per component label
    open: Vec<usize>,
    /// number of blocks per component label
    size: Vec<usize>,
    acc: NeumaierSum,
}

impl ConnectedSearch<'_> {
    fn rec(&mut self, prod: f64) {
        let Some(i) = self.used.iter().position(|u| !u) else {
            if self.size[self.comp[0]] == self.nblocks {
                self.acc.add(prod);
            }
            return;
        };
        self.used[i] = true;
        for j in i + 1..self.n {
            if self.used[j] {
                continue;
            }
            let w = self.c[i * self.n + j];
            if w == 0.0 {
                continue;
            }
            self.used[j] = true;
            let (ci, cj) = (self.comp[self.block_of[i]], self.comp[self.block_of[j]]);
            if ci == cj {
                self.open[ci] -= 2;
                let closed = self.open[ci] == 0 && self.size[ci] < self.nblocks;
                if !closed {
                    self.rec(prod * w);
                }
                self.open[ci] += 2;
            } else {
                // merge cj into ci, remembering which blocks moved
                let mut moved: u64 = 0;
                for (b, c) in self.comp.iter_mut().enumerate() {
                    if *c == cj {
                        *c = ci;
                        moved |= 1 << b;
                    }
                }
                let (open_i, open_j) = (self.open[ci], self.open[cj]);
                let (size_i, size_j) = (self.size[ci], self.size[cj]);
                self.open[ci] = open_i + open_j - 2;
                self.size[ci] = size_i + size_j;
                let closed = self.open[ci] == 0 && self.size[ci] < self.nblocks;
                if !closed {
                    self.rec(prod * w);
                }
                for (b, c) in self.comp.iter_mut().enumerate() {
                    if moved & (1 << b) != 0 {
                        *c = cj;
                    }
                }
                self.open[ci] = open_i;
                self.open[cj] = open_j;
                self.size[ci] = size_i;
                self.size[cj] = size_j;
            }
            self.used[j] = false;
        }
        self.used[i] = false;
    }
}

fn flatten(blocks: &[Block]) -> (Vec<Leg>, Vec<usize>) {
    let mut legs = Vec::new();
    let mut block_of = Vec::new();
    for (b, block) in blocks.iter().enumerate() {
        for leg in &block.legs {
            legs.push(*leg);
            block_of.push(b);
        }
    }
    (legs, block_of)
}

/// Truncated expectation `Φ(A_1; …; A_k)` as the sum over pairings whose
/// block graph is connected.
pub fn connected_correlation_capped(
    table: &GreenTable,
    blocks: &[Block],
    cap: usize,
) -> Result<f64, WickError> {
    if blocks.is_empty() {
        return Err(WickError::NoBlocks);
    }
    let (legs, block_of) = flatten(blocks);
    check_cap(legs.len(), cap)?;
    if legs.len() % 2 == 1 || blocks.iter().any(|b| b.is_empty()) {
        return Ok(0.0);
    }
    if blocks.len() > 64 {
        return Err(WickError::TooManyLegs { legs: legs.len(), cap: 64 });
    }
    grouped_sum(table, &legs, &block_of, blocks.len(), true)
}

/// Same as [`connected_correlation_capped`], visiting every connected
/// perfect matching individually.
pub fn connected_by_pairings(
    table: &GreenTable,
    blocks: &[Block],
    cap: usize,
) -> Result<f64, WickError> {
    if blocks.is_empty() {
        return Err(WickError::NoBlocks);
    }
    let (legs, block_of) = flatten(blocks);
    check_cap(legs.len(), cap)?;
    if blocks.len() == 1 {
        return gaussian_moment_by_pairings(table, &legs, cap);
    }
    if legs.len() % 2 == 1 || blocks.iter().any(|b| b.is_empty()) {
        return Ok(0.0);
    }
    let nblocks = blocks.len();
    if nblocks > 64 {
        return Err(WickError::TooManyLegs { legs: legs.len(), cap: 64 });
    }
    let c = covariance_matrix(table, &legs)?;
    let mut search = ConnectedSearch {
        c: &c,
        n: legs.len(),
        block_of: &block_of,
        nblocks,
        used: vec![false; legs.len()],
        comp: (0..nblocks).collect(),
        open: blocks.iter().map(|b| b.len()).collect(),
        size: vec![1; nblocks],
        acc: NeumaierSum::new(),
    };
    search.rec(1.0);
    Ok(search.acc.value())
}

pub fn connected_correlation(table: &GreenTable, blocks: &[Block]) -> Result<f64, WickError> {
    connected_correlation_capped(table, blocks, DEFAULT_LEG_CAP)
}

/// All set partitions of `0..k`, each as a list of blocks (bit masks).
fn set_partitions(k: usize) -> Vec<Vec<u32>> {
    fn rec(i: usize, k: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == k {
            out.push(cur.clone());
            return;
        }
        for b in 0..cur.len() {
            cur[b] |= 1 << i;
            rec(i + 1, k, cur, out);
            cur[b] &= !(1 << i);
        }
        cur.push(1 << i);
        rec(i + 1, k, cur, out);
        cur.pop();
    }
    let mut out = Vec::new();
    rec(0, k, &mut Vec::new(), &mut out);
    out
}

fn moment_dd(c: &[f64], n: usize, idx: &[usize]) -> DoubleDouble {
    fn rec(c: &[f64], n: usize, idx: &[usize], used: &mut [bool], prod: DoubleDouble, acc: &mut DoubleDouble) {
        let Some(a) = used.iter().position(|u| !u) else {
            *acc = *acc + prod;
            return;
        };
        used[a] = true;
        for b in a + 1..idx.len() {
            if !used[b] {
                used[b] = true;
                let w = DoubleDouble::from(c[idx[a] * n + idx[b]]);
                rec(c, n, idx, used, prod * w, acc);
                used[b] = false;
            }
        }
        used[a] = false;
    }
    if idx.len() % 2 == 1 {
        return DoubleDouble::ZERO;
    }
    let mut acc = DoubleDouble::ZERO;
    rec(c, n, idx, &mut vec![false; idx.len()], DoubleDouble::ONE, &mut acc);
    acc
}

/// Truncated expectation from the partition (Möbius) formula
/// `Σ_π (|π|-1)! (-1)^{|π|-1} Π_{Y∈π} Φ(A_Y)`, accumulated in double-double
/// so that the cancellations between partitions do not limit its accuracy.
pub fn connected_by_partitions(table: &GreenTable, blocks: &[Block], cap: usize) -> Result<f64, WickError> {
    if blocks.is_empty() {
        return Err(WickError::NoBlocks);
    }
    let (legs, block_of) = flatten(blocks);
    check_cap(legs.len(), cap)?;
    let c = covariance_matrix(table, &legs)?;
    let n = legs.len();
    let k = blocks.len();
    let mut moments = vec![DoubleDouble::ZERO; 1 << k];
    for (mask, slot) in moments.iter_mut().enumerate() {
        let idx: Vec<usize> = (0..n).filter(|&i| mask >> block_of[i] & 1 == 1).collect();
        *slot = moment_dd(&c, n, &idx);
    }
    let mut total = DoubleDouble::ZERO;
    for partition in set_partitions(k) {
        let parts = partition.len();
        let weight: f64 = (1..parts).map(|v| v as f64).product::<f64>()
            * if parts % 2 == 1 { 1.0 } else { -1.0 };
        let mut prod = DoubleDouble::from(weight);
        for mask in partition {
            prod = prod * moments[mask as usize];
        }
        total = total + prod;
    }
    Ok(total.to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::green::build_table;

    fn table() -> GreenTable {
        build_table(3, 0.0, 6, 1e-10).unwrap()
    }

    #[test]
    fn pairing_counts_are_double_factorials() {
        let mut df = 1usize;
        for n in 1..=6usize {
            df *= 2 * n - 1;
            assert_eq!(enumerate_pairings(2 * n, 16).unwrap().len(), df);
        }
        assert!(enumerate_pairings(3, 16).unwrap().is_empty());
        assert!(enumerate_pairings(18, 16).is_err());
    }

    #[test]
    fn simple_moments() {
        let t = table();
        let o = Site::origin(3);
        let g = t.origin_value();
        let two = gaussian_moment(&t, &[Leg::Site(o); 2]).unwrap();
        assert_eq!(two, g);
        let four = gaussian_moment(&t, &[Leg::Site(o); 4]).unwrap();
        assert!((four - 3.0 * g * g).abs() < 1e-15);
        assert_eq!(gaussian_moment(&t, &[Leg::Site(o); 3]).unwrap(), 0.0);
        assert!(gaussian_moment(&t, &[Leg::Site(o); 18]).is_err());
    }

    #[test]
    fn covariance_kinds() {
        let t = table();
        let o = Site::origin(3);
        let x = Site::new(&[2, -1, 1]);
        let e = Direction::new(1);
        assert_eq!(pair_covariance(&t, &Leg::Site(o), &Leg::Site(x)).unwrap(), t.get(&x).unwrap());
        assert_eq!(
            pair_covariance(&t, &Leg::Site(o), &Leg::Bond(x, e)).unwrap(),
            t.grad_green(&x, e).unwrap()
        );
        let bb = pair_covariance(&t, &Leg::Bond(o, e), &Leg::Bond(o, e)).unwrap();
        assert!((bb - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn connected_two_point_and_square() {
        let t = table();
        let o = Site::origin(3);
        let x = Site::new(&[1, 2, 0]);
        let gx = t.get(&x).unwrap();
        let c = connected_correlation(&t, &[Block::site_power(o, 1), Block::site_power(x, 1)]).unwrap();
        assert_eq!(c, gx);
        let c2 = connected_correlation(&t, &[Block::site_power(o, 2), Block::site_power(x, 2)]).unwrap();
        let oracle = gaussian_moment(&t, &[Leg::Site(o), Leg::Site(o), Leg::Site(x), Leg::Site(x)]).unwrap()
            - t.origin_value() * t.origin_value();
        assert!((c2 - 2.0 * gx * gx).abs() < 1e-15);
        assert!((c2 - oracle).abs() < 1e-14);
    }

    #[test]
    fn single_block_is_the_moment_and_empty_blocks_vanish() {
        let t = table();
        let o = Site::origin(3);
        let b = Block::new(vec![Leg::Site(o), Leg::Bond(o, Direction::new(0)), Leg::Site(o), Leg::Site(o)]);
        assert_eq!(
            connected_correlation(&t, std::slice::from_ref(&b)).unwrap(),
            gaussian_moment(&t, &b.legs).unwrap()
        );
        assert_eq!(connected_correlation(&t, &[b, Block::default()]).unwrap(), 0.0);
        assert!(connected_correlation(&t, &[]).is_err());
    }

    #[test]
    fn partitions_agree_on_a_mixed_instance() {
        let t = table();
        let o = Site::origin(3);
        let e1 = Direction::new(0);
        let e2 = Direction::new(1);
        let blocks = vec![
            Block::site_power(o, 2),
            Block::bond_power(Site::new(&[1, 1, 0]), e1, 2),
            Block::new(vec![Leg::Bond(Site::new(&[-1, 0, 2]), e2), Leg::Site(Site::new(&[2, 0, 0]))]),
        ];
        let a = connected_correlation(&t, &blocks).unwrap();
        let b = connected_by_partitions(&t, &blocks, 16).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.abs(), "{a} vs {b}");
    }

    #[test]
    fn translation_invariance() {
        let t = table();
        let blocks = vec![
            Block::site_power(Site::origin(3), 2),
            Block::bond_power(Site::new(&[1, 0, 0]), Direction::new(2), 2),
        ];
        let shift = Site::new(&[-2, 1, 1]);
        let moved: Vec<Block> = blocks
            .iter()
            .map(|b| Block::new(b.legs.iter().map(|l| l.translate(&shift)).collect()))
            .collect();
        assert_eq!(
            connected_correlation(&t, &blocks).unwrap(),
            connected_correlation(&t, &moved).unwrap()
        );
    }

    #[test]
    fn grouped_sums_match_per_pairing_enumeration() {
        let t = table();
        let o = Site::origin(3);
        let x = Site::new(&[1, 0, -1]);
        let e = Direction::new(0);
        let f = Direction::new(2);
        let cases = vec![
            vec![Block::site_power(o, 2), Block::bond_power(x, e, 4), Block::bond_power(o, f, 2)],
            vec![Block::site_power(o, 4), Block::bond_power(o, e, 2)],
            vec![Block::new(vec![Leg::Site(o), Leg::Site(x), Leg::Bond(x, f)]), Block::new(vec![Leg::Site(x)])],
            vec![Block::site_power(x, 3), Block::site_power(o, 1), Block::bond_power(o, e, 2), Block::site_power(x, 2)],
        ];
        for blocks in cases {
            let grouped = connected_correlation(&t, &blocks).unwrap();
            let single = connected_by_pairings(&t, &blocks, 16).unwrap();
            assert!((grouped - single).abs() <= 1e-13 * single.abs().max(1e-300), "{grouped} vs {single}");
            let legs: Vec<Leg> = blocks.iter().flat_map(|b| b.legs.clone()).collect();
            let m1 = gaussian_moment(&t, &legs).unwrap();
            let m2 = gaussian_moment_by_pairings(&t, &legs, 16).unwrap();
            assert!((m1 - m2).abs() <= 1e-13 * m2.abs().max(1e-300), "{m1} vs {m2}");
        }
    }
}
