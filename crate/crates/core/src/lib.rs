//! Pressures of subsets and of measures for subshifts of finite type.

pub mod document;
pub mod engine;
pub mod error;
pub mod estimate;
pub mod generic;
pub mod measures;
pub mod numeric;
pub mod oracles;
pub mod pressures;
pub mod report;
pub mod symbolic;
pub mod verify;

pub use error::{Error, Result};
