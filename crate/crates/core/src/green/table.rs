use std::collections::HashMap;

use rayon::prelude::*;

use super::{check_inputs, green_at, GreenError};
use crate::lattice::{orbit_count, orbit_representatives, Direction, Site};
use crate::numeric::NeumaierSum;

/// Default resource guard on the number of orbit representatives.
pub const DEFAULT_ORBIT_CAP: u64 = 500_000;

/// Beyond this many cells the orthant lookup falls back to a hash map.
const DENSE_LIMIT: usize = 1 << 24;

/// Symmetry-reduced table of `G^m(0,x)` on the box `|x|_inf <= radius`.
///
/// Only orbit representatives (sorted absolute coordinates) are stored; any
/// site of the box is answered through its representative.
#[derive(Clone, Debug)]
pub struct GreenTable {
    dim: usize,
    mass: f64,
    radius: u32,
    precision_target: f64,
    reps: Vec<Site>,
    values: Vec<f64>,
    lookup: Lookup,
}

#[derive(Clone, Debug)]
enum Lookup {
    /// Values on the non-negative orthant `[0, R]^d`, row-major.
    Dense(Vec<f64>),
    Sparse(HashMap<Site, usize>),
}

impl GreenTable {
    /// Assemble a table from explicit orbit values. Every representative of
    /// the box must appear exactly once.
    pub fn from_orbits(
        dim: usize,
        mass: f64,
        radius: u32,
        precision_target: f64,
        orbits: Vec<(Site, f64)>,
    ) -> Result<Self, GreenError> {
        let expected = orbit_count(dim, radius);
        if orbits.len() as u64 != expected {
            return Err(GreenError::Format(format!(
                "expected {expected} orbit records, found {}",
                orbits.len()
            )));
        }
        let mut pairs = orbits;
        for (s, v) in &pairs {
            if s.dim() != dim || s.orbit_representative() != *s || s.sup_norm() > radius as i32 {
                return Err(GreenError::Format(format!("{s} is not a representative of the box")));
            }
            if !v.is_finite() {
                return Err(GreenError::Format(format!("non-finite value at {s}")));
            }
        }
        pairs.sort_by_key(|a| a.0);
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(GreenError::Format("duplicate orbit record".into()));
        }
        let (reps, values): (Vec<Site>, Vec<f64>) = pairs.into_iter().unzip();
        let lookup = build_lookup(dim, radius, &reps, &values);
        Ok(GreenTable {
            dim,
            mass,
            radius,
            precision_target,
            reps,
            values,
            lookup,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn precision_target(&self) -> f64 {
        self.precision_target
    }

    pub fn orbit_len(&self) -> usize {
        self.reps.len()
    }

    /// Orbit representatives and their values, in canonical order.
    pub fn orbits(&self) -> impl Iterator<Item = (&Site, f64)> {
        self.reps.iter().zip(self.values.iter().copied())
    }

    /// `G(0,0)`.
    pub fn origin_value(&self) -> f64 {
        self.values[0]
    }

    /// Whether `x` lies inside the table box.
    #[inline]
    pub fn contains(&self, x: &Site) -> bool {
        x.sup_norm() <= self.radius as i32
    }

    /// `G(0, x)`.
    #[inline]
    pub fn get(&self, x: &Site) -> Result<f64, GreenError> {
        if !self.contains(x) {
            return Err(GreenError::OutOfTable {
                site: *x,
                radius: self.radius,
            });
        }
        Ok(match &self.lookup {
            Lookup::Dense(v) => {
                let side = self.radius as usize + 1;
                let mut idx = 0usize;
                for &c in x.coords() {
                    idx = idx * side + c.unsigned_abs() as usize;
                }
                v[idx]
            }
            Lookup::Sparse(map) => self.values[map[&x.orbit_representative()]],
        })
    }

    /// `G(x, y) = G(0, y - x)`.
    #[inline]
    pub fn pair(&self, x: &Site, y: &Site) -> Result<f64, GreenError> {
        self.get(&y.sub(x))
    }

    /// `∇^e_x G(0, ·) = G(0, x+e) - G(0, x)`.
    pub fn grad_green(&self, x: &Site, e: Direction) -> Result<f64, GreenError> {
        Ok(self.get(&x.step(e))? - self.get(x)?)
    }

    /// Double difference
    /// `G(x+e, y+e') - G(x, y+e') - G(x+e, y) + G(x, y)`.
    pub fn grad_grad_green(
        &self,
        x: &Site,
        y: &Site,
        e: Direction,
        e2: Direction,
    ) -> Result<f64, GreenError> {
        let r = y.sub(x);
        let a = self.get(&r.step(e2).step_back(e))?;
        let b = self.get(&r.step(e2))?;
        let c = self.get(&r.step_back(e))?;
        let d = self.get(&r)?;
        Ok(a - b - c + d)
    }

    /// Largest residual of `(2d + m²) G(x) - Σ_{e∈B} G(x+e) - 1{x=0}` over
    /// all interior sites `|x|_inf < R`, evaluated on orbit representatives.
    pub fn resolvent_residual(&self) -> f64 {
        let diag = 2.0 * self.dim as f64 + self.mass * self.mass;
        let mut worst: f64 = 0.0;
        for (x, gx) in self.orbits() {
            if x.sup_norm() >= self.radius as i32 {
                continue;
            }
            let mut acc = NeumaierSum::new();
            acc.add(diag * gx);
            for e in Direction::all(self.dim) {
                acc.add(-self.get(&x.step(e)).expect("interior neighbour"));
                acc.add(-self.get(&x.step_back(e)).expect("interior neighbour"));
            }
            if x.is_origin() {
                acc.add(-1.0);
            }
            worst = worst.max(acc.value().abs());
        }
        worst
    }

    /// `Σ_{|x|_inf <= R} G(0, x)` over the full box, each orbit weighted by
    /// its size.
    pub fn full_box_sum(&self) -> f64 {
        let mut terms: Vec<(f64, f64)> = self
            .orbits()
            .map(|(x, v)| (orbit_size(x) as f64, v))
            .collect();
        // small terms first
        terms.sort_by(|a, b| (a.0 * a.1).total_cmp(&(b.0 * b.1)));
        terms.into_iter().map(|(w, v)| w * v).collect::<NeumaierSum>().value()
    }
}

/// Number of distinct signed permutations of a representative.
pub(crate) fn orbit_size(rep: &Site) -> u64 {
    let c = rep.coords();
    let nonzero = c.iter().filter(|&&v| v != 0).count() as u32;
    let mut perms: u64 = (1..=c.len() as u64).product();
    let mut i = 0;
    while i < c.len() {
        let mut j = i;
        while j < c.len() && c[j] == c[i] {
            j += 1;
        }
        perms /= (1..=(j - i) as u64).product::<u64>();
        i = j;
    }
    perms << nonzero
}

fn build_lookup(dim: usize, radius: u32, reps: &[Site], values: &[f64]) -> Lookup {
    let side = radius as usize + 1;
    let cells = side.checked_pow(dim as u32).filter(|&c| c <= DENSE_LIMIT);
    match cells {
        Some(cells) => {
            let index: HashMap<Site, usize> =
                reps.iter().enumerate().map(|(i, s)| (*s, i)).collect();
            let mut dense = vec![0.0; cells];
            let mut coords = vec![0i32; dim];
            for (flat, slot) in dense.iter_mut().enumerate() {
                let mut rest = flat;
                for k in (0..dim).rev() {
                    coords[k] = (rest % side) as i32;
                    rest /= side;
                }
                *slot = values[index[&Site::new(&coords).orbit_representative()]];
            }
            Lookup::Dense(dense)
        }
        None => Lookup::Sparse(reps.iter().enumerate().map(|(i, s)| (*s, i)).collect()),
    }
}

/// Fill the orbit-reduced table of `G^m` on `|x|_inf <= radius`, each entry
/// to absolute accuracy `tol`.
pub fn build_table(dim: usize, mass: f64, radius: u32, tol: f64) -> Result<GreenTable, GreenError> {
    build_table_with_cap(dim, mass, radius, tol, DEFAULT_ORBIT_CAP)
}

pub fn build_table_with_cap(
    dim: usize,
    mass: f64,
    radius: u32,
    tol: f64,
    cap: u64,
) -> Result<GreenTable, GreenError> {
    check_inputs(dim, mass, tol)?;
    let count = orbit_count(dim, radius);
    if count > cap {
        return Err(GreenError::TooManyOrbits { count, cap });
    }
    let reps = orbit_representatives(dim, radius);
    let values: Vec<f64> = reps
        .par_iter()
        .map(|x| green_at(dim, mass, x, tol))
        .collect::<Result<_, _>>()?;
    GreenTable::from_orbits(dim, mass, radius, tol, reps.into_iter().zip(values).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orbit_sizes_cover_the_box() {
        for (dim, r) in [(3usize, 4u32), (4, 2)] {
            let total: u64 = orbit_representatives(dim, r).iter().map(orbit_size).sum();
            assert_eq!(total, (2 * r as u64 + 1).pow(dim as u32));
        }
    }

    #[test]
    fn radius_zero_table_holds_only_the_origin() {
        let t = build_table(3, 0.0, 0, 1e-10).unwrap();
        assert_eq!(t.orbit_len(), 1);
        assert!((t.origin_value() - 0.252_731_009_858_663).abs() < 1e-10);
        assert!(t.get(&Site::new(&[1, 0, 0])).is_err());
    }

    #[test]
    fn small_table_invariants() {
        let t = build_table(3, 0.0, 4, 1e-10).unwrap();
        assert_eq!(t.orbit_len(), 35);
        assert!(t.resolvent_residual() < 1e-9);
        let e1 = Direction::new(0);
        let g = t.grad_green(&Site::origin(3), e1).unwrap();
        assert!((g + 1.0 / 6.0).abs() < 1e-9);
        let gg = t
            .grad_grad_green(&Site::origin(3), &Site::origin(3), e1, e1)
            .unwrap();
        assert!((gg - 1.0 / 3.0).abs() < 1e-9);
        for x in Site::box_sites(3, 4) {
            assert!(t.get(&x).unwrap() >= 0.0);
            assert_eq!(t.get(&x).unwrap(), t.get(&x.neg()).unwrap());
        }
    }

    #[test]
    fn out_of_table_is_an_error() {
        let t = build_table(3, 0.0, 2, 1e-9).unwrap();
        assert!(matches!(
            t.grad_green(&Site::new(&[2, 0, 0]), Direction::new(0)),
            Err(GreenError::OutOfTable { .. })
        ));
    }

    #[test]
    fn orbit_cap_guard() {
        assert!(matches!(
            build_table_with_cap(3, 0.0, 10, 1e-9, 100),
            Err(GreenError::TooManyOrbits { count: 286, cap: 100 })
        ));
    }
}

