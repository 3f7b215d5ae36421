//! 2D navigation library and deterministic simulation harness.
//!
//! The stack has two levels: a heuristic tangent-arc planner produces a
//! reference trajectory around perceived obstacles, and a tube-based MPC
//! tracker follows it under bounded disturbances, requesting a replan when
//! its constrained problem becomes infeasible. Baseline controllers
//! (horizon-limited RRT* and artificial potential fields) plug into the same
//! harness for comparison runs.
//!
//! Math-core modules ([`geometry`], [`integrate`], [`kinematics`], [`tube`],
//! [`optim`]) are generic over the floating-point scalar via [`scalar::Scalar`];
//! the simulation and control layers use the crate-level [`Real`] alias.

pub mod baselines;
pub mod geometry;
pub mod integrate;
pub mod kinematics;
pub mod optim;
pub mod planner;
pub mod scalar;
pub mod tmpc;
pub mod world;
pub mod tube;

/// Concrete scalar used by the simulation, planner, tracker, and harness.
pub type Real = f64;

/// Position/displacement vector over the concrete scalar.
pub type Point = geometry::Vec2<Real>;
