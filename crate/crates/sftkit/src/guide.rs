//! The narrative guide, embedded chapter by chapter so that `cargo test
//! --doc` compiles and runs every code block in the book.  Rendered output
//! comes from `mdbook build book/`; these modules exist to keep the book and
//! the API in lockstep.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/orbits.md")]
pub mod orbits {}

#[doc = include_str!("../../../book/src/spectrum.md")]
pub mod spectrum {}

#[doc = include_str!("../../../book/src/curves.md")]
pub mod curves {}

#[doc = include_str!("../../../book/src/buildings.md")]
pub mod buildings {}

#[doc = include_str!("../../../book/src/ellipsoid.md")]
pub mod ellipsoid {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
