//! Numerical building blocks shared by the Green-function and expansion code.

pub mod bessel;
pub mod dd;
pub mod quad;
pub mod sum;

pub use bessel::{bessel_ie, bessel_ie_orders};
pub use dd::DoubleDouble;
pub use quad::{gauss_legendre, GaussKronrod, QuadError};
pub use sum::{pairwise_sum, NeumaierSum};
