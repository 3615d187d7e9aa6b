//! poisson-coh: an exact engine for weight-graded Poisson cohomology of
//! weighted-homogeneous polynomial Poisson structures, and for first-order
//! Poisson deformations over the dual numbers.
//!
//! Everything is computed over exact rationals; there is no floating point
//! anywhere.  All values are immutable after construction and every
//! operation is a pure function, so structures can be shared freely across
//! threads.

pub mod cartan;
pub mod cli;
pub mod deform;
pub mod exactlinalg;
pub mod gradedpoly;
pub mod harrison;
pub mod lp_cohomology;
pub mod poisson;

pub use cartan::{DifferentialForm, MusicalMap, Polyvector};
pub use exactlinalg::RationalMatrix;
pub use gradedpoly::{monomial_basis, parse_polynomial, Polynomial, QuotientPresentation, WeightedContext};
pub use poisson::PoissonStructure;
