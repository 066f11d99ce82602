//! Classification engine for Steiner triple systems with a Fano
//! subsystem: core design types, a canonical labeler, exact-cover search
//! kernels, configuration generation, the extension pipeline, and the
//! validation and estimation routines around it.

pub mod analysis;
pub mod canon;
pub mod configgen;
pub mod design;
pub mod error;
pub mod factor;
pub mod graph;
pub mod group;
pub mod kernels;
pub mod orderly;
pub mod perm;
pub mod pipeline;
pub mod subsys;

pub use error::{Error, Result};
