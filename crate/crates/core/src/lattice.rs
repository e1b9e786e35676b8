//! Sites and directions of the hypercubic lattice `Z^d`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Largest lattice dimension supported by the fixed-width [`Site`] storage.
pub const MAX_DIM: usize = 6;

/// A site of `Z^d`. Coordinates beyond `dim` are always zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Site {
    coords: [i32; MAX_DIM],
    dim: u8,
}

impl Site {
    pub fn origin(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} out of range");
        Site {
            coords: [0; MAX_DIM],
            dim: dim as u8,
        }
    }

    pub fn new(coords: &[i32]) -> Self {
        let mut s = Site::origin(coords.len());
        s.coords[..coords.len()].copy_from_slice(coords);
        s
    }

    /// Site `r * e_axis`.
    pub fn on_axis(dim: usize, axis: usize, r: i32) -> Self {
        let mut s = Site::origin(dim);
        s.coords[axis] = r;
        s
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn coords(&self) -> &[i32] {
        &self.coords[..self.dim as usize]
    }

    #[inline]
    pub fn coord(&self, axis: usize) -> i32 {
        self.coords[axis]
    }

    pub fn is_origin(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    #[inline]
    pub fn add(&self, other: &Site) -> Site {
        debug_assert_eq!(self.dim, other.dim);
        let mut out = *self;
        for k in 0..MAX_DIM {
            out.coords[k] += other.coords[k];
        }
        out
    }

    #[inline]
    pub fn sub(&self, other: &Site) -> Site {
        debug_assert_eq!(self.dim, other.dim);
        let mut out = *self;
        for k in 0..MAX_DIM {
            out.coords[k] -= other.coords[k];
        }
        out
    }

    #[inline]
    pub fn neg(&self) -> Site {
        let mut out = *self;
        for c in out.coords.iter_mut() {
            *c = -*c;
        }
        out
    }

    /// `self + e` for a positive unit direction.
    #[inline]
    pub fn step(&self, e: Direction) -> Site {
        let mut out = *self;
        out.coords[e.axis()] += 1;
        out
    }

    /// `self - e` for a positive unit direction.
    #[inline]
    pub fn step_back(&self, e: Direction) -> Site {
        let mut out = *self;
        out.coords[e.axis()] -= 1;
        out
    }

    /// Sup norm `|x|_inf`.
    #[inline]
    pub fn sup_norm(&self) -> i32 {
        self.coords().iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn l1_norm(&self) -> i32 {
        self.coords().iter().map(|c| c.abs()).sum()
    }

    pub fn euclid_norm(&self) -> f64 {
        self.coords()
            .iter()
            .map(|&c| (c as f64) * (c as f64))
            .sum::<f64>()
            .sqrt()
    }

    /// Representative of the hyperoctahedral orbit: absolute values sorted
    /// in descending order.
    #[inline]
    pub fn orbit_representative(&self) -> Site {
        let d = self.dim();
        let mut out = *self;
        for c in out.coords[..d].iter_mut() {
            *c = c.abs();
        }
        out.coords[..d].sort_unstable_by(|a, b| b.cmp(a));
        out
    }

    /// All sites of the box `|x|_inf <= radius`, ordered by increasing sup
    /// norm and then lexicographically.
    pub fn box_sites(dim: usize, radius: i32) -> Vec<Site> {
        let mut out = Vec::new();
        let side = (2 * radius + 1) as usize;
        let total = side.pow(dim as u32);
        out.reserve(total);
        let mut idx = vec![-radius; dim];
        for _ in 0..total {
            out.push(Site::new(&idx));
            for k in (0..dim).rev() {
                idx[k] += 1;
                if idx[k] <= radius {
                    break;
                }
                idx[k] = -radius;
            }
        }
        out.sort_by(|a, b| a.sup_norm().cmp(&b.sup_norm()).then_with(|| a.cmp(b)));
        out
    }
}

impl PartialOrd for Site {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Site {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dim
            .cmp(&other.dim)
            .then_with(|| self.coords.cmp(&other.coords))
    }
}

impl fmt::Debug for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords())
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for Site {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.coords().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Site {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v: Vec<i32> = Vec::deserialize(deserializer)?;
        if v.is_empty() || v.len() > MAX_DIM {
            return Err(serde::de::Error::custom(format!(
                "site must have between 1 and {MAX_DIM} coordinates"
            )));
        }
        Ok(Site::new(&v))
    }
}

/// A positive unit direction `e_k` (stored 0-based, displayed 1-based).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Direction(u8);

impl Direction {
    pub fn new(axis: usize) -> Self {
        assert!(axis < MAX_DIM, "axis {axis} out of range");
        Direction(axis as u8)
    }

    #[inline]
    pub fn axis(self) -> usize {
        self.0 as usize
    }

    /// The positive basis `B_+` of `Z^d`.
    pub fn all(dim: usize) -> impl Iterator<Item = Direction> {
        (0..dim).map(Direction::new)
    }

    pub fn unit(self, dim: usize) -> Site {
        Site::on_axis(dim, self.axis(), 1)
    }
}

impl fmt::Debug for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0 + 1)
    }
}

/// Number of orbit representatives (sorted non-negative tuples) in the box
/// `|x|_inf <= radius`: multisets of size `dim` drawn from `radius + 1` values.
pub fn orbit_count(dim: usize, radius: u32) -> u64 {
    let n = radius as u64 + dim as u64;
    let mut c: u64 = 1;
    for i in 0..dim as u64 {
        c = c * (n - i) / (i + 1);
    }
    c
}

/// All orbit representatives of the box, in lexicographic order of the
/// descending-sorted coordinate tuple.
pub fn orbit_representatives(dim: usize, radius: u32) -> Vec<Site> {
    fn rec(dim: usize, max: i32, prefix: &mut Vec<i32>, out: &mut Vec<Site>) {
        if prefix.len() == dim {
            out.push(Site::new(prefix));
            return;
        }
        for v in 0..=max {
            prefix.push(v);
            rec(dim, v, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::with_capacity(orbit_count(dim, radius) as usize);
    rec(dim, radius as i32, &mut Vec::with_capacity(dim), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn orbit_count_matches_brute_force_canonicalization() {
        for (dim, r) in [(3usize, 0u32), (3, 1), (3, 4), (3, 10), (4, 3)] {
            let reps: HashSet<Site> = Site::box_sites(dim, r as i32)
                .into_iter()
                .map(|s| s.orbit_representative())
                .collect();
            assert_eq!(reps.len() as u64, orbit_count(dim, r));
            assert_eq!(orbit_representatives(dim, r).len(), reps.len());
        }
        assert_eq!(orbit_count(3, 10), 286);
    }

    #[test]
    fn representative_is_idempotent_and_symmetric() {
        let x = Site::new(&[-3, 1, 2]);
        let r = x.orbit_representative();
        assert_eq!(r, Site::new(&[3, 2, 1]));
        assert_eq!(r.orbit_representative(), r);
        assert_eq!(Site::new(&[2, -1, 3]).orbit_representative(), r);
    }

    #[test]
    fn box_sites_sorted_by_sup_norm() {
        let sites = Site::box_sites(3, 2);
        assert_eq!(sites.len(), 125);
        assert!(sites[0].is_origin());
        assert!(sites.windows(2).all(|w| w[0].sup_norm() <= w[1].sup_norm()));
    }
}
