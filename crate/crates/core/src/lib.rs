//! Adaptive mixed finite elements for the top-degree Hodge-Laplace problem
//! (`k = n = 2`) on planar polygonal domains of arbitrary topology.
//!
//! The crate is organised bottom-up:
//!
//! - [`mesh`]: conforming triangulations with newest-vertex bisection.
//! - [`complex`]: the lowest-order discrete de Rham complex (P1, RT0, P0).
//! - [`solver`]: the mixed saddle-point solve for `(sigma_h, u_h)`.
//! - [`estimator`]: element indicators and data oscillation.
//! - [`hodge`]: discrete Hodge decomposition, harmonic forms, subspace gaps.
//! - [`adapt`]: Dörfler marking, the adaptive loop, data approximation and
//!   the numerical audits of the convergence theory.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::type_complexity)]

pub mod adapt;
pub mod complex;
pub mod data;
pub mod error;
pub mod estimator;
pub mod hodge;
pub mod ldl;
pub mod mesh;
pub mod quadrature;
pub mod solver;

pub use complex::{DeRhamComplex, Degree, FeFunction};
pub use data::{DataFunction, ScalarField, VectorField};
pub use error::{Error, Result};
pub use estimator::ErrorIndicators;
pub use mesh::{Mesh, MarkedSet};
pub use solver::MixedSolution;

/// A point in the plane.
pub type Point = [f64; 2];
