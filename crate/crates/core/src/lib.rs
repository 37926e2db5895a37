pub mod bijection;
pub mod complex;
pub mod field;
pub mod geometry;
pub mod presentation;
pub mod shift;

pub use shift::CountMatrix;

/// Word counts that fit in machine integers.
pub type CountMatrixU64 = CountMatrix<u64>;
/// Word counts without overflow.
pub type CountMatrixBig = CountMatrix<num_bigint::BigUint>;
