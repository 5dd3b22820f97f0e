//! Integral quadratic forms: short vectors, Gram roots, isometry and classes.

mod classes;
mod isometry;
mod roots;
mod search;
mod vectors;

pub use classes::{canonical_form, enumerate_classes, form_key, successive_minima, ClassConstraints};
pub use isometry::isometric;
pub use roots::{canonical_root, det_is_square, find_gram_roots, GramDecomposition, GramRootSearch};
pub use search::{det_columns, det_i128, GramSearch};
pub use vectors::{enumerate_vectors, representation_counts, vectors_up_to, Ellipsoid};
