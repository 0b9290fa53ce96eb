//! The guide's chapters, included so that `cargo test` runs every listing.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/lorentz.md")]
pub mod lorentz {}
#[doc = include_str!("../../../book/src/stable.md")]
pub mod stable {}
#[doc = include_str!("../../../book/src/porosity.md")]
pub mod porosity {}
#[doc = include_str!("../../../book/src/fup.md")]
pub mod fup {}
#[doc = include_str!("../../../book/src/words.md")]
pub mod words {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
