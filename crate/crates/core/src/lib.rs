//! Computational toolkit for small-doubling sets in finite abelian groups.
//!
//! The crate covers set algebra over dense bitsets ([`group`], [`setops`]),
//! exact additive energies ([`energy`]), Fourier bias ([`fourier`]),
//! arithmetic-progression covers and rectification ([`structure`]), and a
//! campaign harness that checks every identity and inequality over
//! exhaustive and seeded-random corpora ([`harness`]).

pub mod energy;
pub mod error;
pub mod exact;
pub mod fourier;
pub mod group;
pub mod harness;
pub mod setops;
pub mod structure;
pub mod verdict;

pub use error::{Error, Result};
pub use group::{affine_map, make_group, parse_set_literal, Elem, GSet, Group};
pub use setops::{Kind, Method};
pub use verdict::{Outcome, Verdict};

/// Default relative tolerance for comparisons involving floating point.
pub const DEFAULT_TOL: f64 = 1e-9;
