//! Guide chapters, compiled as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/lattice.md")]
pub mod lattice {}

#[doc = include_str!("../../../book/src/constraints.md")]
pub mod constraints {}

#[doc = include_str!("../../../book/src/interactions.md")]
pub mod interactions {}

#[doc = include_str!("../../../book/src/gibbs.md")]
pub mod gibbs {}

#[doc = include_str!("../../../book/src/transfer.md")]
pub mod transfer {}

#[doc = include_str!("../../../book/src/models.md")]
pub mod models {}

#[doc = include_str!("../../../book/src/pressure.md")]
pub mod pressure {}

#[doc = include_str!("../../../book/src/random_cluster.md")]
pub mod random_cluster {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
