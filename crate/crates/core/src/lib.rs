//! Exact mod-2 Kato-Milne cohomology over rational function fields.
//!
//! The field is F2(t1,...,tK)(x). Classes of H2^(m+1) are represented by
//! m-forms written in the dlog basis dt/t of {t1,...,tK,x}. The crate
//! computes, with exact rational arithmetic and explicit witnesses:
//!
//! * local normal forms and residues at finite places and at 1/x,
//! * Scharlau-style transfers, both through closed formulas on the
//!   cohomology side and through Gram matrices on the quadratic-form side,
//! * the sum-of-residues reciprocity check,
//! * a three-valued vanishing decision (ZERO / NONZERO / UNKNOWN) by
//!   residue obstructions plus constructive descent to the ground field.

pub mod cohomology;
pub mod error;
pub mod forms;
pub mod gf2k;
pub mod ground;
pub mod index;
pub mod local;
pub mod parse;
pub mod poly;
pub mod residue;
pub mod session;
pub mod transfer;
pub mod witt;

pub use error::Error;
pub type Result<T> = std::result::Result<T, Error>;
