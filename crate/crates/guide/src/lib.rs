//! Compiled companion to the guide in `book/`.
//!
//! mdbook renders the chapters; this crate makes them honest. Every Rust
//! code fence in the book becomes a doctest of the matching module below, so
//! `cargo test --doc -p pittrans-guide` fails the moment the book drifts
//! from the library it documents.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/block-models.md")]
pub mod block_models {}

#[doc = include_str!("../../../book/src/closure.md")]
pub mod closure {}

#[doc = include_str!("../../../book/src/slopes.md")]
pub mod slopes {}

#[doc = include_str!("../../../book/src/transition.md")]
pub mod transition {}

#[doc = include_str!("../../../book/src/scenarios.md")]
pub mod scenarios {}
