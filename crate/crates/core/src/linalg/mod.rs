//! Exact integer and rational matrix algebra.

mod gram;
mod json;
mod lattice;
mod matrix;
mod normal_form;

pub use gram::{
    adjugate, adjugate_inverse, inf_norm_reciprocal, is_positive_definite, is_positive_definite_rat,
    lower_bound_f64, rational_min_eigen_lower_bound, GramForm,
};
pub use json::{int_matrix_from_json, ExactScalar};
pub use lattice::{box_representatives, index_of, integral_preimage};
pub use matrix::{IntMatrix, Matrix, RatMatrix, Ring};
pub use normal_form::{elementary_divisors, hnf, hnf_rank, int_kernel, lattice_basis, snf};

use num_bigint::BigInt;
use num_rational::BigRational;

/// Shorthand for an exact rational.
pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}
