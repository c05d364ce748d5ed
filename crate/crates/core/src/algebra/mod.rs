//! Exact arithmetic on a finite Grassmann algebra.

mod number;
pub mod random;
mod space;

pub use number::{GrassmannNumber, Parity};
pub use space::{
    bits, permutation_sign, product_sign, Family, Generator, GeneratorSpace, MAX_GENERATORS,
};
