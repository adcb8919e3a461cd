//! Path planning for wheeled robots on 2.5D height grids.
//!
//! Cells that differ in height by a small amount are driven over directly,
//! moderate steps can be climbed at a time cost, and tall steps are walls.
//! Plans are tracked with a dynamic-window local controller in a small
//! simulator, and a benchmark harness compares search strategies.

pub mod costmodel;
pub mod dwa;
pub mod error;
pub mod gridmap;
pub mod harness;
pub mod mmp;
pub mod planner;

pub use error::{Error, Result};
