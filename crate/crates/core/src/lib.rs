//! Both sides of the mod `p^n` Lefschetz trace formula for Frobenius-twisted
//! correspondences on curves over finite fields.

pub mod field;
pub mod table;
pub mod zpn;
pub mod witt;
pub mod galois;
pub mod semilinear;
pub mod properties;
pub mod curve;
pub mod correspondence;
pub mod trace_formula;
