//! Exact arithmetic for Siegel theta series and integral quadratic forms.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`]: big-integer / rational matrices, Hermite and Smith forms, Gram forms.
//! * [`quadform`]: short vectors, Gram roots `S = A'A`, isometry, class enumeration.
//! * [`isotropy`]: the residue module `Zʳ/(qZʳ+SZʳ)` and its isotropic subgroups.
//! * [`theta`]: certified numerical evaluation of theta series.
//! * [`relations`]: Mumford's relation, its specialisations and the multiplier `ε_S`.
//! * [`dims`]: closed-form dimension formulas.
//! * [`span`]: exact Fourier-coefficient ranks of theta-nullwert products.

pub mod dims;
pub mod error;
pub mod isotropy;
pub mod linalg;
pub mod quadform;
pub mod relations;
pub mod span;
pub mod theta;

pub use error::{Error, Result};
