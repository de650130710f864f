//! Exact computational algebra over small finite fields, aimed at one job:
//! measuring how often a hypersurface section of a variety stays irreducible,
//! and checking the measured densities against closed-form values.
//!
//! The layers, bottom up:
//!
//! - [`gf`] — arithmetic in `F_{p^k}` with canonical subfield embeddings;
//! - [`upoly`] — univariate polynomials and complete factorization;
//! - [`forms`] — homogeneous multivariate polynomials, parsing, resultants;
//! - [`factor2`] — bivariate/ternary factorization and absolute (geometric)
//!   component counts of plane curves;
//! - [`geom`] — projective point enumeration, closed points, and component
//!   counts of space curves via generic projection;
//! - [`density`] — exhaustive and Monte-Carlo density measurements of
//!   statistic-defined subsets of the space of degree-`d` forms;
//! - [`antibertini`] — constructive searches: a surface whose rational plane
//!   sections are all reducible, and irreducible sections through a
//!   prescribed set of closed points.
//!
//! Everything is deterministic given the seeds threaded through the public
//! entry points; reruns produce byte-identical reports.

pub mod antibertini;
pub mod config;
pub mod density;
pub mod error;
pub mod factor2;
pub mod forms;
pub mod geom;
pub mod gf;
pub mod upoly;

pub use config::Config;
pub use error::{Error, Result};
