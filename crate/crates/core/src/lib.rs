//! Verification library for groupoid convolution algebras and their
//! Poisson-geometric counterparts.
//!
//! The crate has two halves sharing one error type and report format:
//!
//! * a **discrete** half — finite groupoids, bibundles between them,
//!   the convolution *-algebra with its regular representation, and the
//!   equivalence bimodule whose axioms certify Morita equivalence;
//! * a **smooth** half — coordinate Lie groupoids given by chart
//!   evaluators, the linear Poisson structure on the dual of their Lie
//!   algebroid, momentum maps of groupoid actions, and the cotangent
//!   groupoid acting on cotangent bundles, all checked by seeded
//!   finite-difference sampling.

pub mod algebra;
pub mod bibundle;
pub mod bimodule;
pub mod error;
pub mod groupoid;
pub mod linalg;
pub mod parallel;
pub mod poisson;
pub mod report;

pub use error::{Error, Result};
