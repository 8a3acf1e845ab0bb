//! Packing ℓ^{q,p} cohomology of finite metric spaces.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure function of
//! its inputs: distance tables and simplicial data go in, exact rational cochains and
//! reports come out. File formats, generators of scenario files, and the command line
//! live in the `packcoh-cli` crate.
//!
//! Module map:
//!
//! - [`metric`]: finite metric spaces, closed balls, packings, greedy colorings, coarse maps.
//! - [`simplicial`]: complexes, Rips complexes and ball nerves, cochains, coboundary,
//!   cup products and the prism operator.
//! - [`norms`]: ℓ^p, graded, counting and packing norms.
//! - [`cohomology`]: exact ranks, Betti numbers, uniform vanishing, primitives and
//!   discrete Poincaré constants.
//! - [`leray`]: nested ball coverings, the partition-of-unity operator and the
//!   double-complex staircase between a complex and the nerve of its ball covering.
//! - [`coarse`]: pullbacks along coarse maps and the prism chain homotopy.
//! - [`generators`]: shortest-path metrics of standard graph families.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod coarse;
pub mod cohomology;
mod error;
pub mod generators;
pub mod leray;
pub mod linalg;
pub mod lp;
pub mod metric;
pub mod norms;
pub mod rational;
pub mod simplicial;

pub use error::{Error, Result};
pub use rational::Rational;
pub use metric::FiniteMetricSpace;
pub use simplicial::{Cochain, SimplicialComplex};
