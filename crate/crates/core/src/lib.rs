//! Optimal open-pit outlines above a potential underground mine.
//!
//! The pit outline, the crown pillar and the remaining underground envelope
//! are decided together by one exact optimization: the block model becomes a
//! weighted digraph whose maximum-weight closed vertex set *is* the answer.
//! Slope arcs keep the pit walls safe, linkage arcs charge the pit for every
//! stope it sterilizes (offset downward to carve out a crown pillar), and
//! per-level cycle arcs force the crown to take a practical shape.
//!
//! See the `book/` guide for a walk-through, or start with
//! [`scenario::run_optimize`] for the end-to-end pipeline behind the
//! `pittrans` command-line tool.

pub mod block_model;
pub mod economics;
pub mod interpret;
pub mod error;
pub mod money;
pub mod precedence;
pub mod render;
pub mod scenario;
pub mod solver;
pub mod synthetic;

pub use error::{Error, Result};
pub use money::Money;
