//! Averages of ratios of characteristic polynomials in random matrix
//! ensembles with complex eigenvalues.
//!
//! For a positive planar weight `w` the crate builds the monic orthogonal
//! polynomials `π_k` and their Cauchy transforms `h_k`, the polynomials of
//! the deformed weights `w ∏(μ − z)/∏(ε̄ − z̄)`, and the determinant formula
//! for `⟨ ∏ D_N[μ_j] / ∏ D_N†[ε̄_k] ⟩`. The [`oracle`] module integrates the
//! same averages directly over the eigenvalues for verification.

pub mod cauchy;
pub mod deformed;
pub mod error;
pub mod linalg;
pub mod oracle;
pub mod orthopoly;
pub mod poly;
pub mod quadrature;
pub mod ratios;
pub mod weight;

pub use cauchy::{CauchyEvaluator, CauchyMethod};
pub use deformed::{Deformation, MuGroup};
pub use error::{Error, Result};
pub use oracle::{OracleConfig, OracleEstimate, OracleMethod};
pub use orthopoly::{MonicPoly, OrthoSystem, Poly};
pub use ratios::{EvalResult, RatioQuery};
pub use weight::{DomainSpec, Family, WeightSpec};
