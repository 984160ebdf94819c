//! Special functions and quadrature used by the reservoir kernels.

mod bessel;
pub mod quadrature;
mod struve;

pub use bessel::{bessel_j, bessel_y, Y_DIVERGENCE_CUTOFF};
pub use quadrature::{gauss_kronrod, principal_value, PvIntegrand, QuadEstimate};
pub use struve::struve_h;
