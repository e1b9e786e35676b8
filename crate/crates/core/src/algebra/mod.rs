//! Exact formal power series in `T` over monomials `φ^p ũ^p̃ (∇φ)^q`.

pub mod coeffs;
pub mod index;
pub mod observable;
pub mod series;

use thiserror::Error;

pub use coeffs::CoefficientTables;
pub use index::{canonicalize, CanonicalKey, GKey, GradIndex, MonoKey, PhiIndex, SparseIndex, UIndex, UKey};
pub use observable::{
    compile_spin_observable, f_tilde_series, g_polynomial, norm_power, Observable, ObservableTerm,
};
pub use series::{series_mul, FormalSeries, Monomial, SeriesJson};

#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error("component {component} has odd total degree {degree}; the correlation vanishes by the residual O(N-1) symmetry")]
    Parity { component: usize, degree: u32 },
    #[error("component {component} outside 1..={n_components}")]
    InvalidComponent { component: usize, n_components: usize },
    #[error("site has {found} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("number of spin components must be at least 2, got {0}")]
    InvalidN(usize),
    #[error("malformed observable JSON: {0}")]
    Json(String),
}
