//! Exact memory-rate analysis and executable verification for coded caching
//! schemes that interpolate between uncoded prefetching (binary XOR delivery)
//! and coded prefetching (rank-metric cache parities).
//!
//! The crate is organised bottom-up:
//!
//! * [`combinatorics`] enumerates demand classes, transmission types and
//!   decomposition pattern sets.
//! * [`tradeoff`] evaluates the integer rate/memory cost of every pattern and
//!   the closed-form curves of the known schemes.
//! * [`region`] solves the per-demand linear programs exactly over the
//!   rationals and extracts lower boundaries and convex closures.
//! * [`field`] and [`rank_metric`] provide `GF(2^m)` arithmetic and the
//!   systematic linearized-polynomial code used for cache placement.
//! * [`scheme`] runs placement, delivery and two independent decoders
//!   symbol-for-symbol.
//! * [`cli`] wires everything into the `coded-cache` command.

pub mod cli;
pub mod combinatorics;
pub mod error;
pub mod field;
pub mod rank_metric;
pub mod rational;
pub mod region;
pub mod scheme;
pub mod tradeoff;

pub use error::{Error, Result};
