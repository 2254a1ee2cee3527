//! Simulator for the congested clique with limited range, `rcast(n, r, b)`,
//! and connectivity and spanning-forest algorithms that run on it.
//!
//! [`engine`] runs one [`engine::NodeProgram`] per node and enforces the
//! model. [`primitives`] has local and global broadcast. The algorithms are
//! in [`bcc`] (range 1), [`detmsf`] and [`randcc`] (range 2), all reachable
//! through [`algo::run_algorithm`].

pub mod algo;
pub mod bcc;
pub mod bits;
pub mod codec;
pub mod detmsf;
pub mod dsu;
pub mod engine;
pub mod graph;
pub mod math;
pub mod primitives;
pub mod randcc;
pub mod sketch;

// The book's snippets, compiled and run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/primitives.md")]
    mod primitives {}
    #[doc = include_str!("../../../book/src/broadcast_cc.md")]
    mod broadcast_cc {}
    #[doc = include_str!("../../../book/src/msf.md")]
    mod msf {}
    #[doc = include_str!("../../../book/src/sketches.md")]
    mod sketches {}
    #[doc = include_str!("../../../book/src/randomized_cc.md")]
    mod randomized_cc {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
