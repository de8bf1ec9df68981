//! Critical Galton-Watson trees conditioned on their size, and the machinery
//! to measure them exactly.
//!
//! The crate has three legs that check each other:
//!
//! * samplers ([`trees`]) drawing the conditioned tree `T_n` by the cycle
//!   lemma and the unconditioned tree by breadth-first growth,
//! * per-tree statistics ([`stats`], [`labels`]): level profiles, pair
//!   counts at each distance, ancestor-split counts, root-path counts and
//!   vertical profiles of randomly labelled trees,
//! * an exact engine ([`series`]) built on truncated power series for the
//!   generating functions `F`, `G`, `H`, giving closed-route values of the
//!   same mean statistics, gated by an exhaustive enumeration [`oracle`].
//!
//! [`verify`] bundles the named check suites behind the `gwt verify` CLI.

pub mod error;
pub mod labels;
pub mod mc;
pub mod offspring;
pub mod oracle;
pub mod report;
pub mod series;
pub mod stats;
pub mod trees;
pub mod verify;

pub use error::{Error, Result};
pub use labels::DisplacementDist;
pub use offspring::OffspringDist;
pub use trees::Tree;
