//! Milnor-Witt K-theory and Grothendieck-Witt arithmetic over finite fields
//! and `F_q(t)`, together with the relative Rost-Schmid complex of the
//! projective line and the relative Picard group it is compared against.
//!
//! Everything is exact: field elements are table-driven residues, groups
//! are integer-matrix cokernels reduced to Smith normal form.

pub mod abgrp;
pub mod cli;
pub mod error;
pub mod fields;
pub mod mwk;
pub mod p1geom;
pub mod quadform;
pub mod rscurve;
pub mod svpic;

pub use error::{Error, Result};
