use serde::Serialize;

use super::{connected_correlation, Block, WickError};
use crate::green::GreenTable;
use crate::lattice::{Direction, Site};

/// Empirical decay of `Φ(φ_0^p; X_x)` along the first axis, where `X_x` is
/// `φ_x^{p'}` or, with `gradient`, `(∇^{e_1}_x φ)^{p'}`.
#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    pub distances: Vec<i32>,
    pub values: Vec<f64>,
    /// Local exponents `-Δ ln|Φ| / Δ ln(1 + r)` between consecutive distances.
    pub local_exponents: Vec<f64>,
    pub required_exponent: f64,
    /// True when the correlation vanishes identically by parity.
    pub vanishes: bool,
    pub pass: bool,
}

/// Check that the connected correlation decays at least like
/// `(1 + r)^{-(d - 2 - eps)}`, or `(1 + r)^{-(d - 1 - eps)}` with a gradient
/// block, over the sampled distances.
pub fn connected_decays(
    table: &GreenTable,
    p: usize,
    p_prime: usize,
    gradient: bool,
    distances: &[i32],
    eps: f64,
) -> Result<DecayReport, WickError> {
    let dim = table.dim();
    let required = dim as f64 - 2.0 + if gradient { 1.0 } else { 0.0 } - eps;
    let origin = Site::origin(dim);
    let mut values = Vec::with_capacity(distances.len());
    for &r in distances {
        let x = Site::on_axis(dim, 0, r);
        let right = if gradient {
            Block::bond_power(x, Direction::new(0), p_prime)
        } else {
            Block::site_power(x, p_prime)
        };
        values.push(connected_correlation(table, &[Block::site_power(origin, p), right])?);
    }
    let vanishes = (p + p_prime) % 2 == 1;
    let local_exponents: Vec<f64> = distances
        .windows(2)
        .zip(values.windows(2))
        .map(|(r, v)| {
            -(v[1].abs().ln() - v[0].abs().ln()) / ((1.0 + r[1] as f64).ln() - (1.0 + r[0] as f64).ln())
        })
        .collect();
    let pass = vanishes || local_exponents.iter().all(|&a| a >= required);
    Ok(DecayReport {
        distances: distances.to_vec(),
        values,
        local_exponents,
        required_exponent: required,
        vanishes,
        pass,
    })
}
