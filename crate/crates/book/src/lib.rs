//! Guide chapters, compiled so that their snippets run as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/spaces.md")]
pub mod spaces {}
#[doc = include_str!("../../../book/src/metrics.md")]
pub mod metrics {}
#[doc = include_str!("../../../book/src/hyperbolicity.md")]
pub mod hyperbolicity {}
#[doc = include_str!("../../../book/src/boundary.md")]
pub mod boundary {}
#[doc = include_str!("../../../book/src/distortion.md")]
pub mod distortion {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../README.md")]
pub mod readme {}
