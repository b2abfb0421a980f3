//! Finite-depth tools for Bratteli diagrams: tail equivalence relations,
//! telescoping, label splitting of étale subrelations, absorption, and an
//! exact checker for the resulting certificates.

pub mod absorption;
pub mod counts;
pub mod diagram;
pub mod dot;
pub mod error;
pub mod fixtures;
pub mod lp;
pub mod oracle;
pub mod partition;
pub mod paths;
pub mod splitting;
pub mod telescope;

pub use diagram::{BratteliDiagram, Edge, Subdiagram};
pub use error::{Error, Result};
pub use partition::Partition;
pub use paths::PathSpace;
