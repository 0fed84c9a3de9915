//! Finite fields, polynomials over them, places of the projective line and
//! factored rational functions.

pub mod finite;
pub mod function;
pub mod place;
pub mod poly;
pub mod residue;

pub use finite::{field, field_of_order, Fe, FiniteField};
pub use function::{factor_divisor, residue_field_reduce, RationalFunction};
pub use place::{finite_places_of_degree, places_up_to, Divisor, Place};
pub use poly::Poly;
pub use residue::ResidueField;

/// `is_square` for a nonzero element of `F_{q^d}`.
pub fn is_square(f: &FiniteField, a: Fe) -> crate::Result<bool> {
    f.is_square(a)
}
