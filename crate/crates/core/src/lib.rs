//! Model-bounded monitoring of sampled logs against linear hybrid automata.

// Errors carry exact rationals for their messages and are never on a hot path.
#![allow(clippy::result_large_err)]

pub mod numeric;
pub mod geometry;
pub mod model;
pub mod log;
pub mod monitor;
pub mod translate;
pub mod method;
pub mod bench;
