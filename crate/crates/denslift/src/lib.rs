//! Exact symbolic calculus of linear differential operators acting on the
//! algebra of densities of all weights.

// Tensor code indexes several arrays by the same axis.
#![allow(clippy::needless_range_loop)]

pub mod equivariance;
pub mod error;
pub mod jet;
pub mod lift;
pub mod linalg;
pub mod operator;
pub mod poly;
pub mod proj;
pub mod scalar;
pub mod syntax;
pub mod weight;

pub use error::{Error, Result};
pub use jet::{DiffPolynomial, JetSymbol, Monomial};
pub use operator::{ad_vf, lie_operator, Density, DensityOperator, MultiIndex, VectorField};
pub use poly::Param;
pub use scalar::Scalar;
