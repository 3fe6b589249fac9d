//! Numerical verification of linear Poisson structures on dual Lie
//! algebroids, momentum maps of Lie groupoid actions, and the cotangent
//! groupoid acting on cotangent bundles.
//!
//! Everything is evaluated pointwise in user-supplied global charts;
//! derivatives are central finite differences, kernels and lifts come
//! from singular-value decompositions, and every check samples seeded
//! points from declared chart boxes.

pub mod algebroid;
pub mod bracket;
pub mod chart;
pub mod cotangent;
pub mod expr;
pub mod fd;
pub mod manifest;
pub mod momentum;
pub mod registry;

pub use algebroid::{algebroid_from_groupoid, DualPoint, LieAlgebroidChart};
pub use bracket::{canonical_bracket, lie_poisson_bracket, ScalarField};
pub use chart::{ChartBox, CotangentPoint, CoordinateGroupoid, Side, SmoothAction, SmoothBibundle};
pub use cotangent::{
    act_on_covector, check_action_axioms, check_compose_associativity, check_lagrangian_graph,
    check_symplectic_orthogonality, compose_covectors, cotangent_source, cotangent_target,
};
pub use fd::FdConfig;
pub use momentum::{check_anti_poisson, check_commuting_pullbacks, momentum_left, momentum_right};
pub use registry::{lookup_example, PoissonExample};
