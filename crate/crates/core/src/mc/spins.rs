//! Spin storage and single-site updates.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// `L^d` unit `N`-vectors on a periodic torus, stored contiguously.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinConfig {
    dim: usize,
    n: usize,
    l: usize,
    spins: Vec<f64>,
    /// `2d` neighbour indices per site: `+e_1, -e_1, +e_2, …`
    neighbours: Vec<u32>,
}

impl SpinConfig {
    /// Every spin equal to the unit vector along component `N`.
    pub fn cold(dim: usize, n: usize, l: usize) -> Self {
        let volume = l.pow(dim as u32);
        let mut spins = vec![0.0; volume * n];
        for x in 0..volume {
            spins[x * n + n - 1] = 1.0;
        }
        SpinConfig {
            dim,
            n,
            l,
            spins,
            neighbours: neighbour_table(dim, l),
        }
    }

    /// Independent uniform spins.
    pub fn hot<R: Rng>(dim: usize, n: usize, l: usize, rng: &mut R) -> Self {
        let mut cfg = SpinConfig::cold(dim, n, l);
        for x in 0..cfg.volume() {
            let s = random_unit(n, rng);
            cfg.spin_mut(x).copy_from_slice(&s);
        }
        cfg
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> usize {
        self.n
    }

    pub fn side(&self) -> usize {
        self.l
    }

    pub fn volume(&self) -> usize {
        self.spins.len() / self.n
    }

    #[inline]
    pub fn spin(&self, x: usize) -> &[f64] {
        &self.spins[x * self.n..(x + 1) * self.n]
    }

    #[inline]
    fn spin_mut(&mut self, x: usize) -> &mut [f64] {
        &mut self.spins[x * self.n..(x + 1) * self.n]
    }

    pub fn set_spin(&mut self, x: usize, s: &[f64]) {
        self.spin_mut(x).copy_from_slice(s);
    }

    /// Neighbour of `x` one step along `+e_axis`.
    #[inline]
    pub fn forward(&self, x: usize, axis: usize) -> usize {
        self.neighbours[x * 2 * self.dim + 2 * axis] as usize
    }

    /// Site index of `x + r e_axis`.
    pub fn shifted(&self, x: usize, axis: usize, r: usize) -> usize {
        let stride = self.l.pow(axis as u32);
        let coord = (x / stride) % self.l;
        let moved = (coord + r) % self.l;
        x + moved * stride - coord * stride
    }

    /// `β Σ_{y~x} S_y + h e_N`.
    pub fn local_field(&self, x: usize, beta: f64, h: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let base = x * 2 * self.dim;
        for &y in &self.neighbours[base..base + 2 * self.dim] {
            let s = self.spin(y as usize);
            for (o, v) in out.iter_mut().zip(s) {
                *o += v;
            }
        }
        for o in out.iter_mut() {
            *o *= beta;
        }
        out[self.n - 1] += h;
    }

    /// `Σ_{x,e} S_x · S_{x+e}` over every bond once.
    pub fn bond_sum(&self) -> f64 {
        let mut acc = 0.0;
        for x in 0..self.volume() {
            let s = self.spin(x);
            for axis in 0..self.dim {
                let t = self.spin(self.forward(x, axis));
                acc += dot(s, t);
            }
        }
        acc
    }

    /// `-β Σ S_x·S_{x+e} - h Σ S^N_x`.
    pub fn energy(&self, beta: f64, h: f64) -> f64 {
        let field: f64 = (0..self.volume()).map(|x| self.spin(x)[self.n - 1]).sum();
        -beta * self.bond_sum() - h * field
    }

    pub fn magnetization(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.n];
        for x in 0..self.volume() {
            for (mk, s) in m.iter_mut().zip(self.spin(x)) {
                *mk += s;
            }
        }
        let v = self.volume() as f64;
        m.iter_mut().for_each(|mk| *mk /= v);
        m
    }

    pub fn renormalize(&mut self) {
        for x in 0..self.volume() {
            let s = self.spin_mut(x);
            let norm = dot(s, s).sqrt();
            s.iter_mut().for_each(|v| *v /= norm);
        }
    }

    /// Largest `|‖S_x‖ - 1|`.
    pub fn max_norm_error(&self) -> f64 {
        (0..self.volume())
            .map(|x| (dot(self.spin(x), self.spin(x)).sqrt() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Exact resampling of `S_x` from `e^{H·S}` on the 2-sphere.
    pub fn heatbath_site<R: Rng>(&mut self, x: usize, beta: f64, h: f64, field: &mut [f64], rng: &mut R) {
        debug_assert_eq!(self.n, 3);
        self.local_field(x, beta, h, field);
        let kappa = dot(field, field).sqrt();
        let c = sample_cos_theta(kappa, rng);
        let sin = (1.0 - c * c).max(0.0).sqrt();
        let phi = rng.gen::<f64>() * std::f64::consts::TAU;
        let axis: [f64; 3] = if kappa > 0.0 {
            [field[0] / kappa, field[1] / kappa, field[2] / kappa]
        } else {
            [0.0, 0.0, 1.0]
        };
        let (a, b) = orthonormal_pair(&axis);
        let (sp, cp) = phi.sin_cos();
        let s = self.spin_mut(x);
        for k in 0..3 {
            s[k] = c * axis[k] + sin * (cp * a[k] + sp * b[k]);
        }
    }

    /// Metropolis step with the symmetric proposal `(S + δ g)/‖S + δ g‖`.
    /// Returns whether the move was accepted.
    #[allow(clippy::too_many_arguments)]
    pub fn metropolis_site<R: Rng>(
        &mut self,
        x: usize,
        beta: f64,
        h: f64,
        step: f64,
        field: &mut [f64],
        proposal: &mut [f64],
        rng: &mut R,
    ) -> bool {
        self.local_field(x, beta, h, field);
        let s = self.spin(x);
        for (p, v) in proposal.iter_mut().zip(s) {
            let g: f64 = StandardNormal.sample(rng);
            *p = v + step * g;
        }
        let norm = dot(proposal, proposal).sqrt();
        if norm == 0.0 {
            return false;
        }
        proposal.iter_mut().for_each(|p| *p /= norm);
        let delta = dot(field, proposal) - dot(field, s);
        if delta >= 0.0 || rng.gen::<f64>() < delta.exp() {
            self.spin_mut(x).copy_from_slice(proposal);
            true
        } else {
            false
        }
    }

    /// Reflection of `S_x` about its local field, which leaves the energy
    /// unchanged.
    pub fn overrelax_site(&mut self, x: usize, beta: f64, h: f64, field: &mut [f64]) {
        self.local_field(x, beta, h, field);
        let f2 = dot(field, field);
        if f2 == 0.0 {
            return;
        }
        let proj = 2.0 * dot(field, self.spin(x)) / f2;
        let s = self.spin_mut(x);
        for (v, f) in s.iter_mut().zip(field.iter()) {
            *v = proj * f - *v;
        }
    }
}

fn neighbour_table(dim: usize, l: usize) -> Vec<u32> {
    let volume = l.pow(dim as u32);
    let mut out = Vec::with_capacity(volume * 2 * dim);
    for x in 0..volume {
        let mut stride = 1;
        for _ in 0..dim {
            let coord = (x / stride) % l;
            let up = x - coord * stride + ((coord + 1) % l) * stride;
            let down = x - coord * stride + ((coord + l - 1) % l) * stride;
            out.push(up as u32);
            out.push(down as u32);
            stride *= l;
        }
    }
    out
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn random_unit<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn orthonormal_pair(axis: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    // start from the coordinate axis least aligned with `axis`
    let k = (0..3)
        .min_by(|&i, &j| axis[i].abs().total_cmp(&axis[j].abs()))
        .unwrap_or(0);
    let mut a = [0.0; 3];
    a[k] = 1.0;
    let p = a[0] * axis[0] + a[1] * axis[1] + a[2] * axis[2];
    for i in 0..3 {
        a[i] -= p * axis[i];
    }
    let na = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    a.iter_mut().for_each(|v| *v /= na);
    let b = [
        axis[1] * a[2] - axis[2] * a[1],
        axis[2] * a[0] - axis[0] * a[2],
        axis[0] * a[1] - axis[1] * a[0],
    ];
    (a, b)
}

/// Draw `cos θ` from the density `∝ e^{κ cos θ}` on `[-1, 1]` by inverting
/// its distribution function.
pub fn sample_cos_theta<R: Rng>(kappa: f64, rng: &mut R) -> f64 {
    let u = 1.0 - rng.gen::<f64>();
    if kappa < 1e-8 {
        return 2.0 * u - 1.0;
    }
    let c = 1.0 + (u + (1.0 - u) * (-2.0 * kappa).exp()).ln() / kappa;
    c.clamp(-1.0, 1.0)
}
