use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::matrix::{IntMatrix, RatMatrix};
use crate::error::{Error, Result};

/// Adjugate by cofactor expansion. Intended for the small dimensions used here.
pub fn adjugate(m: &IntMatrix) -> IntMatrix {
    assert!(m.is_square());
    let n = m.rows();
    if n == 1 {
        return IntMatrix::identity(1);
    }
    IntMatrix::from_fn(n, n, |i, j| {
        let minor = m.select_rows((0..n).filter(|&r| r != j)).select_columns((0..n).filter(|&c| c != i));
        let d = minor.det();
        if (i + j) % 2 == 0 {
            d
        } else {
            -d
        }
    })
}

/// Exact inverse and determinant of a square integer matrix.
pub fn adjugate_inverse(m: &IntMatrix) -> Result<(RatMatrix, BigInt)> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("adjugate of a non-square matrix".into()));
    }
    let det = m.det();
    if det.is_zero() {
        return Err(Error::Singular);
    }
    let adj = adjugate(m);
    let inv = adj.map(|x| BigRational::new(x.clone(), det.clone()));
    Ok((inv, det))
}

/// Positive definiteness by leading principal minors.
pub fn is_positive_definite(m: &IntMatrix) -> Result<bool> {
    if !m.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    Ok((1..=m.rows()).all(|k| m.select_rows(0..k).select_columns(0..k).det().is_positive()))
}

/// Same test for rational symmetric matrices.
pub fn is_positive_definite_rat(m: &RatMatrix) -> Result<bool> {
    if !m.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    Ok((1..=m.rows()).all(|k| m.select_rows(0..k).select_columns(0..k).det().is_positive()))
}

/// A symmetric positive definite integral Gram matrix with cached determinant,
/// adjugate and inverse.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GramForm {
    matrix: IntMatrix,
    det: BigInt,
    adjugate: IntMatrix,
    inverse: RatMatrix,
}

impl GramForm {
    pub fn new(matrix: IntMatrix) -> Result<Self> {
        if !is_positive_definite(&matrix)? {
            return Err(Error::NotPositiveDefinite);
        }
        let (inverse, det) = adjugate_inverse(&matrix)?;
        let adjugate = adjugate(&matrix);
        Ok(Self { matrix, det, adjugate, inverse })
    }

    pub fn from_rows(rows: &[&[i64]]) -> Result<Self> {
        Self::new(IntMatrix::from_rows(rows))
    }

    pub fn identity(r: usize) -> Self {
        Self::new(IntMatrix::identity(r)).expect("identity is positive definite")
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn det(&self) -> &BigInt {
        &self.det
    }

    pub fn inverse(&self) -> &RatMatrix {
        &self.inverse
    }

    pub fn adjugate(&self) -> &IntMatrix {
        &self.adjugate
    }

    /// Whether `c·S⁻¹` is integral, i.e. `det | c·adj(S)`.
    pub fn scaled_inverse_is_integral(&self, c: &BigInt) -> bool {
        self.adjugate.data().iter().all(|x| (c * x).is_multiple_of(&self.det))
    }

    /// `c·S⁻¹` as a Gram form; fails unless it is integral.
    pub fn scaled_dual(&self, c: &BigInt) -> Result<GramForm> {
        let m = self
            .inverse
            .scale(&BigRational::from_integer(c.clone()))
            .to_integral()
            .ok_or_else(|| Error::Integrality(format!("{c}·S⁻¹ is not integral")))?;
        GramForm::new(m)
    }

    pub fn rational(&self) -> RatMatrix {
        self.matrix.to_rational()
    }

    /// Entries as machine integers, when they fit.
    pub fn entries_i64(&self) -> Option<Vec<i64>> {
        self.matrix.to_i64()
    }

    /// `S[x]` for an integer vector.
    pub fn value(&self, x: &[i64]) -> BigInt {
        let n = self.dim();
        let mut acc = BigInt::zero();
        for i in 0..n {
            for j in 0..n {
                acc += &self.matrix[(i, j)] * x[i] * x[j];
            }
        }
        acc
    }

    /// Rigorous lower bound for the smallest eigenvalue: `1/‖S⁻¹‖_∞`.
    pub fn min_eigen_lower_bound(&self) -> BigRational {
        inf_norm_reciprocal(&self.inverse)
    }

    pub fn is_unimodular(&self) -> bool {
        self.det.is_one()
    }
}

/// `1 / max_i Σ_j |m_ij|`, a lower bound for `1/λ_max(m)`.
pub fn inf_norm_reciprocal(m: &RatMatrix) -> BigRational {
    let norm = (0..m.rows())
        .map(|i| m.row(i).iter().fold(BigRational::zero(), |acc, x| acc + x.abs()))
        .max()
        .unwrap_or_else(BigRational::one);
    norm.recip()
}

/// Lower bound of the smallest eigenvalue of a positive definite rational matrix.
pub fn rational_min_eigen_lower_bound(m: &RatMatrix) -> Result<BigRational> {
    Ok(inf_norm_reciprocal(&m.inverse()?))
}

/// `f64` view of a lower bound, rounded down slightly.
pub fn lower_bound_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(0.0) * (1.0 - 1e-12)
}
