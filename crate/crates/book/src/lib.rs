//! The guide's chapters as doc modules, so `cargo test` runs every listing.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/model.md")]
pub mod model {}
#[doc = include_str!("../../../book/src/geo.md")]
pub mod geo {}
#[doc = include_str!("../../../book/src/dbscan.md")]
pub mod dbscan {}
#[doc = include_str!("../../../book/src/clustering.md")]
pub mod clustering {}
#[doc = include_str!("../../../book/src/solver.md")]
pub mod solver {}
#[doc = include_str!("../../../book/src/pipeline.md")]
pub mod pipeline {}
#[doc = include_str!("../../../book/src/bench.md")]
pub mod bench {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
