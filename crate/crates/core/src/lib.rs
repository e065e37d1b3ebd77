//! Finite combinatorics of directed topology: cubical and simplicial sets,
//! edgewise and cubical subdivision, triangulation and its right adjoint,
//! the extension functor, directed homotopy classes, and approximation of
//! piecewise-linear maps.

pub mod approx;
pub mod error;
pub mod extension;
pub mod generate;
pub mod homotopy;
pub mod io;
pub mod order;
pub mod presheaf;
pub mod site;
pub mod subdivision;
pub mod triangulation;
pub mod verify;

pub use error::{Error, Result};

/// Exact scalars for PL map files.
pub type Rational = num_rational::Ratio<i64>;

/// Points of simplices in double precision, single precision and exact
/// rational arithmetic.
pub type Point64 = approx::GeomPoint<f64>;
pub type Point32 = approx::GeomPoint<f32>;
pub type ExactPoint = approx::GeomPoint<Rational>;
