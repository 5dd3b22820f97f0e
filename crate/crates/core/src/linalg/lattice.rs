//! Small lattice utilities on top of the normal forms.

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::matrix::{IntMatrix, RatMatrix};
use super::normal_form::{int_kernel, lattice_basis};
use crate::error::{Error, Result};

/// Canonical basis of `{k ∈ Zⁿ : M·k ∈ Zᵐ}` for a rational `m×n` matrix `M`.
pub fn integral_preimage(m: &RatMatrix) -> IntMatrix {
    let (num, den) = m.split_denominator();
    let rows = num.rows();
    let stacked = num
        .hstack(&IntMatrix::identity(rows).scale(&den))
        .expect("row counts agree");
    let kernel = int_kernel(&stacked);
    lattice_basis(&kernel.select_rows(0..num.cols()))
}

/// Complete residue system of `Zⁿ / H·Zⁿ` for a full-rank lower-triangular
/// Hermite basis `H`: the box `0 ≤ kᵢ < hᵢᵢ`, in lexicographic order.
pub fn box_representatives(h: &IntMatrix) -> Result<Vec<Vec<i64>>> {
    let n = h.rows();
    if h.cols() != n {
        return Err(Error::Precondition("box representatives need a full-rank basis".into()));
    }
    let diag: Vec<i64> = (0..n)
        .map(|i| h[(i, i)].to_i64().filter(|&d| d > 0))
        .collect::<Option<_>>()
        .ok_or_else(|| Error::Precondition("basis is not a full-rank triangular form".into()))?;
    let total: i64 = diag.iter().product();
    if total > 1 << 24 {
        return Err(Error::ScaleGuard(format!("{total} coset representatives")));
    }
    let mut out = Vec::with_capacity(total as usize);
    let mut cur = vec![0i64; n];
    loop {
        out.push(cur.clone());
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < diag[i] {
                break;
            }
            cur[i] = 0;
        }
    }
}

/// Index `[Zⁿ : H·Zⁿ]` of a full-rank Hermite basis.
pub fn index_of(h: &IntMatrix) -> BigInt {
    (0..h.rows()).map(|i| h[(i, i)].clone()).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preimage_of_half_identity() {
        let half = RatMatrix::from_fractions(2, 2, &[(1, 2), (0, 1), (0, 1), (1, 2)]).unwrap();
        let h = integral_preimage(&half);
        assert_eq!(h, IntMatrix::from_rows(&[&[2, 0], &[0, 2]]));
        assert_eq!(box_representatives(&h).unwrap().len(), 4);
    }

    #[test]
    fn preimage_matches_brute_force() {
        let m = RatMatrix::from_fractions(2, 2, &[(1, 4), (1, 2), (3, 4), (0, 1)]).unwrap();
        let h = integral_preimage(&m);
        let idx = index_of(&h).to_i64().unwrap();
        // count residues k mod 4 with m·k integral; the lattice contains 4Z²
        let mut hits = 0;
        for a in 0..4 {
            for b in 0..4 {
                let ok = (a + 2 * b) % 4 == 0 && (3 * a) % 4 == 0;
                hits += ok as i64;
            }
        }
        assert_eq!(idx, 16 / hits);
    }
}
