//! Cosparse analysis and sparse synthesis signal models on undirected graphs.
//!
//! The analysis operator is the graph Laplacian `L`; the synthesis dictionary
//! is its Moore-Penrose pseudoinverse `L†`. On circulant graphs both models
//! factor through the simple cycle, `L = P L_C` and `L† = P⁻¹ L_C†`, which
//! is what [`circulant`] computes exactly.
//!
//! Everything is generic over the scalar type. Construction and polynomial
//! algebra accept any [`scalar::Ring`] (`i64`, [`Rational`], `f32`, `f64`);
//! spectral routines need a [`scalar::Real`]. The aliases below fix the
//! common choices.
//!
//! ```
//! use graph_cosparse::{Graph64, Pinv};
//!
//! let g = Graph64::cycle(4).unwrap();
//! let lp = graph_cosparse::pinv(&g.laplacian()).unwrap();
//! assert!((lp[(0, 0)] - 0.3125).abs() < 1e-12);
//! # let _: Pinv = lp;
//! ```

pub mod analysis;
pub mod circulant;
pub mod error;
pub mod figure;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod scalar;
pub mod synthesis;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Rational;

pub type Matrix64 = nalgebra::DMatrix<f64>;
pub type Vector64 = nalgebra::DVector<f64>;
pub type Pinv = Matrix64;

pub type Graph64 = graph::Graph<f64>;
pub type Graph32 = graph::Graph<f32>;
pub type ExactGraph = graph::Graph<Rational>;

pub type Circulant64 = graph::CirculantSpec<f64>;
pub type IntCirculant = graph::CirculantSpec<i64>;
pub type ExactCirculant = graph::CirculantSpec<Rational>;

pub type Representer64 = circulant::RepresenterPolynomial<f64>;
pub type IntRepresenter = circulant::RepresenterPolynomial<i64>;
pub type ExactRepresenter = circulant::RepresenterPolynomial<Rational>;

pub type NullspaceBasis64 = analysis::NullspaceBasis<f64>;

/// `A†` with the default zero threshold.
pub fn pinv(a: &Matrix64) -> Result<Matrix64> {
    linalg::pseudoinverse(a, linalg::TolPolicy::Standard)
}
