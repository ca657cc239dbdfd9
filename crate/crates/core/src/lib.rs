//! Rotation theory toolkit: degree-one circle lifts, rotation sets, chain-of-circles
//! map families, unwrapped disk dynamics, and attractor/basin approximation with
//! Wada diagnostics.

pub mod attract;
pub mod chart;
pub mod families;
pub mod lift;
pub mod rotation;
