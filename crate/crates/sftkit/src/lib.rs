//! Invariant calculus for punctured holomorphic curves in 4-dimensional
//! symplectic cobordisms.
//!
//! The crate has three layers:
//!
//! * closed-form combinatorics: Conley-Zehnder indices of orbit covers,
//!   Fredholm indices, normal Chern numbers, the Siefring self-intersection
//!   and the local adjunction formula for breaking annuli
//!   ([`orbits`], [`curves`], [`buildings`]);
//! * an exhaustive enumerator of admissible degeneration types for
//!   holomorphic buildings ([`buildings`]);
//! * two independent numerical oracles that cross-check the closed forms:
//!   a Fourier-Galerkin eigensolver for asymptotic operators ([`spectrum`])
//!   and the Reeb flow on irrational ellipsoids ([`reeb`]).
//!
//! A batch CLI front end lives in [`cli`]; the narrative guide (rendered by
//! mdbook from `book/`) is embedded as doc-tested chapters in [`guide`].

pub mod buildings;
pub mod cli;
pub mod curves;
pub mod guide;
pub mod orbits;
pub mod parallel;
pub mod reeb;
pub mod spectrum;
