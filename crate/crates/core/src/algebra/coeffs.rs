//! Exact rational coefficients of the low-temperature expansion.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Generalised binomial `binom(a, j)` for rational `a`.
pub fn binom(a: &BigRational, j: u32) -> BigRational {
    let mut out = BigRational::one();
    for i in 0..j {
        out = out * (a - BigRational::from_integer(BigInt::from(i))) / BigRational::from_integer(BigInt::from(i + 1));
    }
    out
}

/// Multinomial coefficient `j! / Π k_i!`.
pub fn multinomial(parts: &[u32]) -> BigInt {
    let total: u32 = parts.iter().sum();
    parts.iter().fold(factorial(total), |acc, &k| acc / factorial(k))
}

/// The coefficient families `c_r`, `c'_r` and `c̃_p`.
#[derive(Clone, Copy, Debug, Default)]
pub struct CoefficientTables;

impl CoefficientTables {
    /// `c_r = (-1)^{r+1} / (2r+2)!`.
    pub fn c(r: u32) -> BigRational {
        let sign = if r.is_multiple_of(2) { -1 } else { 1 };
        BigRational::new(BigInt::from(sign), factorial(2 * r + 2))
    }

    /// `c'_r = (-1)^{r+1} / (2r+1)!`.
    pub fn c_prime(r: u32) -> BigRational {
        let sign = if r.is_multiple_of(2) { -1 } else { 1 };
        BigRational::new(BigInt::from(sign), factorial(2 * r + 1))
    }

    /// `c̃_p = (-1)^p binom(1/2, p)`, the Taylor coefficients of `√(1-x)`.
    pub fn c_tilde(p: u32) -> BigRational {
        let b = binom(&rat(1, 2), p);
        if p.is_multiple_of(2) {
            b
        } else {
            -b
        }
    }

    /// Taylor coefficients of `sin(√x)/√x`: `(-1)^i / (2i+1)!`.
    pub fn sinc(i: u32) -> BigRational {
        let sign = if i.is_multiple_of(2) { 1 } else { -1 };
        BigRational::new(BigInt::from(sign), factorial(2 * i + 1))
    }

    /// Taylor coefficients of `cos(√x)`: `(-1)^i / (2i)!`.
    pub fn cos(i: u32) -> BigRational {
        let sign = if i.is_multiple_of(2) { 1 } else { -1 };
        BigRational::new(BigInt::from(sign), factorial(2 * i))
    }
}

/// Coefficients `0..=n` of a univariate power series raised to the integer
/// power `k` (truncated).
pub fn univariate_pow(coeffs: &[BigRational], k: u32, n: usize) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); n + 1];
    out[0] = BigRational::one();
    for _ in 0..k {
        let mut next = vec![BigRational::zero(); n + 1];
        for (i, a) in out.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in coeffs.iter().enumerate().take(n + 1 - i) {
                next[i + j] += a * b;
            }
        }
        out = next;
    }
    out
}
