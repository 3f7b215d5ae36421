//! Comparison controllers: a horizon-limited RRT* and a reactive potential
//! field. Both consume the same perception snapshot as the tracking
//! controller and produce a single input per decision, so the harness can
//! swap controllers without touching the simulation loop.

mod apf;
mod hlrrt;

pub use apf::{apf_force, apf_step, ApfParams};
pub use hlrrt::{hlrrt_plan, pursue, HlrrtParams, HlrrtRequest, RrtNode, RrtTree};
