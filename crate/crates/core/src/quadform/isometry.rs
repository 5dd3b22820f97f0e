use num_bigint::BigInt;

use super::search::{det_columns, GramSearch};
use super::vectors::{representation_counts, vectors_up_to};
use crate::error::{Error, Result};
use crate::linalg::{GramForm, IntMatrix};

fn small_entries(s: &GramForm) -> Result<Vec<i64>> {
    s.entries_i64().ok_or_else(|| Error::ScaleGuard("form entries exceed 64 bits".into()))
}

/// A unimodular `U` with `S1[U] = S2`, if one exists.
///
/// Columns are chosen from the `S1`-norm fibres in lexicographic order, so
/// the witness is the least one in column-by-column backtracking order.
pub fn isometric(s1: &GramForm, s2: &GramForm) -> Result<Option<IntMatrix>> {
    if s1.dim() != s2.dim() || s1.det() != s2.det() {
        return Ok(None);
    }
    let n = s1.dim();
    let a = small_entries(s1)?;
    let b = small_entries(s2)?;
    let diag: Vec<u64> = (0..n).map(|j| b[j * n + j] as u64).collect();
    let top = diag.iter().copied().max().unwrap_or(0);
    if representation_counts(s1, top)? != representation_counts(s2, top)? {
        return Ok(None);
    }
    let pool = vectors_up_to(s1, top)?;
    let candidates: Vec<Vec<Vec<i64>>> = diag
        .iter()
        .map(|&m| {
            let mut c: Vec<Vec<i64>> =
                pool.iter().filter(|(norm, _)| *norm == m).map(|(_, x)| x.clone()).collect();
            c.sort();
            c
        })
        .collect();
    let mut witness = None;
    GramSearch::new(n, &a, &b, &candidates).run(|cols| {
        // equal determinants make any solution unimodular
        debug_assert_eq!(det_columns(cols).abs(), 1);
        witness = Some(IntMatrix::from_fn(n, n, |i, j| BigInt::from(cols[j][i])));
        false
    });
    Ok(witness)
}
