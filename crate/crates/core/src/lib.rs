// comparisons are negated so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gauss;
pub mod geometry;
pub mod grid;
pub mod harness;
pub mod mapping;
pub mod planner;
pub mod semantics;
pub mod world;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/worlds.md")]
    struct Worlds;
    #[doc = include_str!("../../../book/src/geometry.md")]
    struct Geometry;
    #[doc = include_str!("../../../book/src/mapping.md")]
    struct Mapping;
    #[doc = include_str!("../../../book/src/semantics.md")]
    struct Semantics;
    #[doc = include_str!("../../../book/src/planning.md")]
    struct Planning;
    #[doc = include_str!("../../../book/src/episodes.md")]
    struct Episodes;
    #[doc = include_str!("../../../book/src/benchmarks.md")]
    struct Benchmarks;
}
