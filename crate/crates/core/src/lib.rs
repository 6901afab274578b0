//! Lie point symmetries of differential-difference equations on fixed,
//! non-transforming lattices.

pub mod expr;
pub mod jet;
pub mod vfield;
pub mod det;
pub mod linalg;
pub mod solve;
pub mod numverify;
