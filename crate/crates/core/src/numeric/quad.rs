//! Adaptive Gauss–Kronrod quadrature and Gauss–Legendre rules.

use std::collections::BinaryHeap;
use std::cmp::Ordering;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("quadrature did not reach tolerance {tol:e} after {intervals} subintervals (estimate {estimate:e})")]
    NotConverged {
        tol: f64,
        intervals: usize,
        estimate: f64,
    },
    #[error("integrand returned a non-finite value at {at}")]
    NonFinite { at: f64 },
}

// 15-point Kronrod nodes (positive half) and weights, with the embedded
// 7-point Gauss weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Globally adaptive G7/K15 integrator.
#[derive(Clone, Copy, Debug)]
pub struct GaussKronrod {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl GaussKronrod {
    pub fn new(abs_tol: f64) -> Self {
        GaussKronrod {
            abs_tol,
            rel_tol: 0.0,
            max_intervals: 2000,
        }
    }

    fn rule<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Segment, QuadError> {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let fc = f(c);
        if !fc.is_finite() {
            return Err(QuadError::NonFinite { at: c });
        }
        let mut resk = fc * WGK[7];
        let mut resg = fc * WG[3];
        for j in 0..7 {
            let dx = h * XGK[j];
            let f1 = f(c - dx);
            let f2 = f(c + dx);
            if !f1.is_finite() {
                return Err(QuadError::NonFinite { at: c - dx });
            }
            if !f2.is_finite() {
                return Err(QuadError::NonFinite { at: c + dx });
            }
            resk += WGK[j] * (f1 + f2);
            if j % 2 == 1 {
                resg += WG[j / 2] * (f1 + f2);
            }
        }
        let value = resk * h;
        let error = ((resk - resg) * h).abs();
        Ok(Segment { a, b, value, error })
    }

    /// Integrate `f` over `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<f64, QuadError> {
        let first = Self::rule(&f, a, b)?;
        let mut heap = BinaryHeap::new();
        heap.push(first);
        let mut total_err = first.error;
        let mut total = first.value;
        loop {
            let tol = self.abs_tol.max(self.rel_tol * total.abs());
            if total_err <= tol {
                break;
            }
            if heap.len() >= self.max_intervals {
                return Err(QuadError::NotConverged {
                    tol,
                    intervals: heap.len(),
                    estimate: total,
                });
            }
            let worst = heap.pop().expect("heap is never empty");
            let mid = 0.5 * (worst.a + worst.b);
            let left = Self::rule(&f, worst.a, mid)?;
            let right = Self::rule(&f, mid, worst.b)?;
            total_err += left.error + right.error - worst.error;
            total += left.value + right.value - worst.value;
            heap.push(left);
            heap.push(right);
        }
        // Re-add in a fixed order to drop the running-update rounding.
        let mut segs: Vec<Segment> = heap.into_vec();
        segs.sort_by(|x, y| x.a.total_cmp(&y.a));
        Ok(super::sum::pairwise_sum(
            &segs.iter().map(|s| s.value).collect::<Vec<_>>(),
        ))
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_integrates_smooth_functions() {
        let gk = GaussKronrod::new(1e-13);
        let v = gk.integrate(|x: f64| x.exp(), 0.0, 1.0).unwrap();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-13);
        let v = gk.integrate(|x: f64| 1.0 / (1.0 + x * x), -50.0, 50.0).unwrap();
        assert!((v - 2.0 * 50f64.atan()).abs() < 1e-12);
    }

    #[test]
    fn kronrod_reports_non_finite() {
        let gk = GaussKronrod::new(1e-10);
        assert!(matches!(
            gk.integrate(|_| f64::NAN, 0.0, 1.0),
            Err(QuadError::NonFinite { .. })
        ));
    }

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(7);
        // exact for degree 13
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((v - 2.0 / 13.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }
}
