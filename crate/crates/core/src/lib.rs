//! Numerical Cartan-connection curvature invariants for path structures on
//! 3-manifolds: torsion, the point-equivalence curvatures Q1 and Q2, and the
//! global transgression invariant mu, with two independent computation
//! routes for every headline quantity.
//!
//! The torus model `theta^2 = d alpha - F theta^1` is the main pipeline
//! ([`ode`]); closed-form homogeneous families live in [`families`]; the
//! slope-chart invariants and the chart conversion in [`charts`]. See the
//! crate examples for runnable walk-throughs of each capability.

pub mod app;
pub mod charts;
pub mod coframe;
pub mod config;
pub mod expr;
pub mod families;
pub mod field;
pub mod jet;
pub mod ode;
pub mod oracle;
pub mod report;
