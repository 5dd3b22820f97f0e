use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::search::{det_columns, GramSearch};
use super::vectors::enumerate_vectors;
use crate::error::{Error, Result};
use crate::isotropy::is_isotropic;
use crate::linalg::{adjugate, GramForm, IntMatrix};

/// An integral factorisation `S = A'A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GramDecomposition {
    form: GramForm,
    root: IntMatrix,
}

impl GramDecomposition {
    pub fn new(form: GramForm, root: IntMatrix) -> Result<Self> {
        if root.transpose().checked_mul(&root)? != *form.matrix() {
            return Err(Error::Precondition("A'A differs from S".into()));
        }
        Ok(Self { form, root })
    }

    pub fn form(&self) -> &GramForm {
        &self.form
    }

    pub fn root(&self) -> &IntMatrix {
        &self.root
    }

    /// `q·A⁻¹` integral.
    pub fn scaled_inverse_integral(&self, q: u64) -> bool {
        scaled_inverse_integral(&self.root, q)
    }

    /// `A'⁻¹·V` integral.
    pub fn transports(&self, v: &IntMatrix) -> bool {
        transpose_inverse_integral(&self.root, v)
    }
}

fn scaled_inverse_integral(a: &IntMatrix, q: u64) -> bool {
    let det = a.det();
    let q = BigInt::from(q);
    !det.is_zero() && adjugate(a).data().iter().all(|x| (&q * x).is_multiple_of(&det))
}

fn transpose_inverse_integral(a: &IntMatrix, v: &IntMatrix) -> bool {
    let det = a.det();
    if det.is_zero() {
        return false;
    }
    let prod = &adjugate(&a.transpose()) * v;
    prod.data().iter().all(|x| x.is_multiple_of(&det))
}

/// Orbit representative under `A ↦ P·A` for signed permutations `P`
/// (the automorphisms of the standard lattice). Those moves preserve
/// `A'A`, `q·A⁻¹` integrality and `A'⁻¹V` integrality.
pub fn canonical_root(a: &IntMatrix) -> IntMatrix {
    let mut rows: Vec<Vec<BigInt>> = (0..a.rows())
        .map(|i| {
            let row = a.row(i).to_vec();
            match row.iter().find(|x| !x.is_zero()) {
                Some(x) if x.is_negative() => row.into_iter().map(|x| -x).collect(),
                _ => row,
            }
        })
        .collect();
    rows.sort_by(|x, y| y.cmp(x));
    IntMatrix::from_fn(a.rows(), a.cols(), |i, j| rows[i][j].clone())
}

/// All integral roots `A'A = S` with `q·A⁻¹` integral, computed once per form.
#[derive(Clone, Debug)]
pub struct GramRootSearch {
    form: GramForm,
    level: u64,
    dedup: bool,
    roots: Vec<IntMatrix>,
}

impl GramRootSearch {
    pub fn new(form: &GramForm, level: u64, dedup: bool) -> Result<Self> {
        if level == 0 {
            return Err(Error::Precondition("level must be positive".into()));
        }
        let r = form.dim();
        let entries = form
            .entries_i64()
            .ok_or_else(|| Error::ScaleGuard("form entries exceed 64 bits".into()))?;
        let e = GramForm::identity(r);
        let mut candidates = (0..r)
            .map(|j| {
                let norm = entries[j * r + j];
                enumerate_vectors(&e, norm as u64)
            })
            .collect::<Result<Vec<_>>>()?;
        if dedup {
            // every orbit has a member whose first column is nonnegative and nonincreasing
            candidates[0].retain(|u| u.iter().all(|&x| x >= 0) && u.windows(2).all(|w| w[0] >= w[1]));
        }
        let identity: Vec<i64> = (0..r * r).map(|i| (i % (r + 1) == 0) as i64).collect();
        let mut roots = Vec::new();
        GramSearch::new(r, &identity, &entries, &candidates).run(|cols| {
            if det_columns(cols) != 0 {
                let a = IntMatrix::from_fn(r, r, |i, j| BigInt::from(cols[j][i]));
                if scaled_inverse_integral(&a, level) {
                    roots.push(if dedup { canonical_root(&a) } else { a });
                }
            }
            true
        });
        roots.sort();
        roots.dedup();
        Ok(Self { form: form.clone(), level, dedup, roots })
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn is_deduplicated(&self) -> bool {
        self.dedup
    }

    pub fn roots(&self) -> &[IntMatrix] {
        &self.roots
    }

    /// Roots that additionally make `A'⁻¹V` integral.
    pub fn roots_for(&self, v: &IntMatrix) -> Vec<GramDecomposition> {
        self.roots
            .iter()
            .filter(|a| transpose_inverse_integral(a, v))
            .map(|a| GramDecomposition { form: self.form.clone(), root: a.clone() })
            .collect()
    }

    pub fn has_root_for(&self, v: &IntMatrix) -> bool {
        self.roots.iter().any(|a| transpose_inverse_integral(a, v))
    }
}

/// All integral `A` with `A'A = S`, `q·A⁻¹` integral and `A'⁻¹V` integral.
///
/// With `dedup`, one representative per orbit under left multiplication by
/// signed permutations is returned.
pub fn find_gram_roots(s: &GramForm, v: &IntMatrix, q: u64, dedup: bool) -> Result<Vec<GramDecomposition>> {
    let q2 = BigInt::from(q) * BigInt::from(q);
    if !s.scaled_inverse_is_integral(&q2) {
        return Err(Error::Integrality("q²·S⁻¹ is not integral".into()));
    }
    if v.rows() != s.dim() {
        return Err(Error::DimensionMismatch("V must have r rows".into()));
    }
    if !is_isotropic(s, q, v)? {
        return Err(Error::NotIsotropic);
    }
    Ok(GramRootSearch::new(s, q, dedup)?.roots_for(v))
}

/// Whether `det S` is a perfect square, which every Gram root forces.
pub fn det_is_square(s: &GramForm) -> bool {
    let d = s.det();
    let r = d.sqrt();
    &(&r * &r) == d
}
