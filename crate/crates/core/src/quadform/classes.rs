//! Unimodular classes of positive definite integral forms with `c·S⁻¹` integral.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::isometry::isometric;
use super::search::{det_columns, det_i128, GramSearch};
use super::vectors::{representation_counts, vectors_up_to};
use crate::error::{Error, Result};
use crate::linalg::{GramForm, IntMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassConstraints {
    pub dim: usize,
    /// `c` with `c·S⁻¹` required integral
    pub scale: u64,
    /// keep only forms whose determinant is a perfect square
    pub det_square: bool,
}

impl ClassConstraints {
    pub fn new(dim: usize, scale: u64, det_square: bool) -> Self {
        Self { dim, scale, det_square }
    }

    /// Determinants allowed by the constraints: divisors of `c^r`, optionally squares.
    pub fn determinants(&self) -> Vec<u64> {
        let top = self.scale.pow(self.dim as u32);
        (1..=top)
            .filter(|d| top.is_multiple_of(*d))
            .filter(|&d| !self.det_square || d.sqrt() * d.sqrt() == d)
            .collect()
    }
}

fn small_entries(s: &GramForm) -> Result<Vec<i64>> {
    s.entries_i64().ok_or_else(|| Error::ScaleGuard("form entries exceed 64 bits".into()))
}

fn rank_of(vectors: &[&[i64]], n: usize) -> usize {
    let k = vectors.len();
    // rank of the k×n matrix via its Gram determinant would overflow; eliminate instead
    let mut rows: Vec<Vec<i128>> = vectors.iter().map(|v| v.iter().map(|&x| x as i128).collect()).collect();
    let mut rank = 0;
    for col in 0..n {
        let Some(p) = (rank..k).find(|&i| rows[i][col] != 0) else { continue };
        rows.swap(rank, p);
        for i in rank + 1..k {
            let (a, b) = (rows[rank][col], rows[i][col]);
            if b != 0 {
                let g = a.gcd(&b);
                for j in 0..n {
                    rows[i][j] = rows[i][j] * (a / g) - rows[rank][j] * (b / g);
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Successive minima `m₁ ≤ … ≤ m_r` of `S`.
pub fn successive_minima(s: &GramForm) -> Result<Vec<u64>> {
    let n = s.dim();
    let entries = small_entries(s)?;
    let bound = (0..n).map(|i| entries[i * n + i] as u64).max().unwrap_or(0);
    let mut chosen: Vec<Vec<i64>> = Vec::new();
    let mut minima = Vec::new();
    for (norm, x) in vectors_up_to(s, bound)? {
        if norm == 0 {
            continue;
        }
        chosen.push(x);
        let refs: Vec<&[i64]> = chosen.iter().map(|v| v.as_slice()).collect();
        if rank_of(&refs, n) == chosen.len() {
            minima.push(norm);
            if minima.len() == n {
                break;
            }
        } else {
            chosen.pop();
        }
    }
    Ok(minima)
}

/// Ordering key of a form: the diagonal, then the strict upper triangle column by column.
pub fn form_key(s: &GramForm) -> Vec<BigInt> {
    let n = s.dim();
    let m = s.matrix();
    let mut key: Vec<BigInt> = (0..n).map(|i| m[(i, i)].clone()).collect();
    for j in 0..n {
        for i in 0..j {
            key.push(m[(i, j)].clone());
        }
    }
    key
}

/// The canonical representative of the class of `S` (for `r ≤ 4`).
///
/// Its diagonal is the list of successive minima, every off-diagonal entry
/// satisfies `2|sᵢⱼ| ≤ sᵢᵢ`, and among all bases of that shape the one with
/// the least [`form_key`] is taken.
pub fn canonical_form(s: &GramForm) -> Result<GramForm> {
    let n = s.dim();
    if n > 4 {
        return Err(Error::Precondition("canonical forms are implemented for r ≤ 4".into()));
    }
    let entries = small_entries(s)?;
    let minima = successive_minima(s)?;
    let pool = vectors_up_to(s, *minima.last().unwrap_or(&0))?;
    let candidates: Vec<Vec<Vec<i64>>> = minima
        .iter()
        .map(|&m| pool.iter().filter(|(norm, _)| *norm == m).map(|(_, x)| x.clone()).collect())
        .collect();
    let bounds: Vec<i64> = minima.iter().map(|&m| m as i64 / 2).collect();
    let target = vec![0i64; n * n];
    let mut best: Option<Vec<i64>> = None;
    GramSearch::new(n, &entries, &target, &candidates)
        .with_offdiagonal_bounds(&bounds)
        .run(|cols| {
            if det_columns(cols).abs() != 1 {
                return true;
            }
            let ip = |i: usize, j: usize| -> i64 {
                (0..n).map(|a| (0..n).map(|b| entries[a * n + b] * cols[i][a] * cols[j][b]).sum::<i64>()).sum()
            };
            let mut key = Vec::with_capacity(n * (n - 1) / 2);
            for j in 0..n {
                for i in 0..j {
                    key.push(ip(i, j));
                }
            }
            if best.as_ref().is_none_or(|b| key < *b) {
                best = Some(key);
            }
            true
        });
    let off = best.ok_or_else(|| Error::Inconclusive("no basis realises the successive minima".into()))?;
    let mut m = IntMatrix::zeros(n, n);
    let mut it = off.iter();
    for j in 0..n {
        m[(j, j)] = BigInt::from(minima[j]);
        for i in 0..j {
            let v = BigInt::from(*it.next().expect("key length"));
            m[(i, j)] = v.clone();
            m[(j, i)] = v;
        }
    }
    GramForm::new(m)
}

/// Visits every symmetric integer matrix of reduced shape (sorted diagonal,
/// `2|sᵢⱼ| ≤ sᵢᵢ`, first row nonnegative) with determinant in `dets`,
/// product of the diagonal at most `2^{r(r−1)/2}·det` and
/// `s₁₁^r ≤ (4/3)^{r(r−1)/2}·det`.
struct ShapeScan<'a> {
    r: usize,
    dets: &'a [u64],
    product_cap: i128,
    s: Vec<i64>,
}

impl ShapeScan<'_> {
    fn pairs(&self) -> u32 {
        (self.r * (self.r - 1) / 2) as u32
    }

    fn leading_det(&self, k: usize) -> i128 {
        let r = self.r;
        let m: Vec<i128> = (0..k * k).map(|idx| self.s[(idx / k) * r + idx % k] as i128).collect();
        det_i128(&m, k)
    }

    fn set(&mut self, i: usize, j: usize, v: i64) {
        let r = self.r;
        self.s[i * r + j] = v;
        self.s[j * r + i] = v;
    }

    fn diag_product(&self, k: usize) -> i128 {
        (0..k).map(|i| self.s[i * self.r + i] as i128).product()
    }

    fn column(&mut self, j: usize, i: usize, visit: &mut impl FnMut(&[i64], u64)) {
        let r = self.r;
        if i < j {
            let half = self.s[i * r + i] / 2;
            let lo = if i == 0 { 0 } else { -half };
            for v in lo..=half {
                self.set(i, j, v);
                self.column(j, i + 1, visit);
            }
            self.set(i, j, 0);
            return;
        }
        if j + 1 == r {
            self.last_diagonal(visit);
            return;
        }
        let prev = if j == 0 { 1 } else { self.s[(j - 1) * r + j - 1] };
        let before = self.diag_product(j);
        let mut v = prev;
        loop {
            // the remaining diagonal entries are at least v
            let low = before * (v as i128).pow((r - j) as u32);
            if low > self.product_cap {
                break;
            }
            if j == 0 {
                let dmax = *self.dets.last().unwrap() as f64;
                if (v as f64).powi(r as i32) > (4.0f64 / 3.0).powi(self.pairs() as i32) * dmax + 1e-9 {
                    break;
                }
            }
            self.s[j * r + j] = v;
            if self.leading_det(j + 1) > 0 {
                self.column(j + 1, 0, visit);
            }
            v += 1;
        }
        self.s[j * r + j] = 0;
    }

    fn last_diagonal(&mut self, visit: &mut impl FnMut(&[i64], u64)) {
        let r = self.r;
        let last = r - 1;
        let minor = if r == 1 { 1 } else { self.leading_det(r - 1) };
        self.s[last * r + last] = 0;
        let base = self.leading_det(r);
        let prev = if r == 1 { 1 } else { self.s[(r - 2) * r + r - 2] } as i128;
        let before = self.diag_product(r - 1);
        let first = self.s[0] as f64;
        for &d in self.dets {
            let num = d as i128 - base;
            if num % minor != 0 {
                continue;
            }
            let v = num / minor;
            if v < prev || before * v > (1i128 << self.pairs()) * d as i128 {
                continue;
            }
            if r > 1 && first.powi(r as i32) > (4.0f64 / 3.0).powi(self.pairs() as i32) * d as f64 + 1e-9 {
                continue;
            }
            self.s[last * r + last] = v as i64;
            visit(&self.s, d);
        }
        self.s[last * r + last] = 0;
    }
}

fn scaled_inverse_integral_i128(s: &[i64], r: usize, det: i128, c: i128) -> bool {
    for i in 0..r {
        for j in 0..=i {
            let minor: Vec<i128> = (0..r)
                .filter(|&a| a != i)
                .flat_map(|a| (0..r).filter(move |&b| b != j).map(move |b| (a, b)))
                .map(|(a, b)| s[a * r + b] as i128)
                .collect();
            let cof = det_i128(&minor, r - 1);
            if (c * cof) % det != 0 {
                return false;
            }
        }
    }
    true
}

fn scan_shapes(r: usize, c: u64, dets: &[u64]) -> Result<Vec<GramForm>> {
    if dets.is_empty() {
        return Ok(Vec::new());
    }
    let dmax = *dets.last().unwrap() as i128;
    let mut scan = ShapeScan { r, dets, product_cap: (1i128 << (r * (r - 1) / 2)) * dmax, s: vec![0; r * r] };
    let mut out = Vec::new();
    let mut failure = None;
    scan.column(0, 0, &mut |s, d| {
        if !scaled_inverse_integral_i128(s, r, d as i128, c as i128) {
            return;
        }
        match IntMatrix::from_i64(r, r, s).and_then(GramForm::new) {
            Ok(f) => out.push(f),
            Err(e) => failure = Some(e),
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Groups forms into unimodular classes; returns one canonical form per class.
fn classes_of(forms: Vec<GramForm>) -> Result<Vec<GramForm>> {
    // class invariants: determinant, successive minima, vector counts up to the last minimum
    type Invariant = (BigInt, Vec<u64>, Vec<u64>);
    let mut buckets: BTreeMap<Invariant, Vec<GramForm>> = BTreeMap::new();
    for f in forms {
        let minima = successive_minima(&f)?;
        let counts = representation_counts(&f, *minima.last().unwrap_or(&0))?;
        let reps = buckets.entry((f.det().clone(), minima, counts)).or_default();
        let mut known = false;
        for rep in reps.iter() {
            if isometric(rep, &f)?.is_some() {
                known = true;
                break;
            }
        }
        if !known {
            reps.push(f);
        }
    }
    buckets.into_values().flatten().map(|f| canonical_form(&f)).collect()
}

fn sort_classes(classes: &mut [GramForm]) {
    classes.sort_by(|a, b| a.det().cmp(b.det()).then_with(|| form_key(a).cmp(&form_key(b))));
}

/// One canonical representative per unimodular class of positive definite
/// integral `r×r` forms `S` with `c·S⁻¹` integral (and square determinant
/// when requested), sorted by determinant and then by [`form_key`].
///
/// Forms with `det S > c^{r/2}` are obtained as the duals `c·S⁻¹` of the
/// classes with determinant `c^r / det S`, which keeps the direct scan small.
pub fn enumerate_classes(constraints: &ClassConstraints) -> Result<Vec<GramForm>> {
    let r = constraints.dim;
    let c = constraints.scale;
    if r == 0 || r > 4 {
        return Err(Error::Precondition("class enumeration is implemented for 1 ≤ r ≤ 4".into()));
    }
    if !(1..=64).contains(&c) {
        return Err(Error::ScaleGuard(format!("scale {c} outside 1..=64")));
    }
    let top = (c as u128).pow(r as u32);
    let dets = constraints.determinants();
    let (low, high): (Vec<u64>, Vec<u64>) = dets.iter().partition(|&&d| (d as u128) * (d as u128) <= top);
    let mut classes = classes_of(scan_shapes(r, c, &low)?)?;
    let scale = BigInt::from(c);
    let mut duals = Vec::new();
    for f in &classes {
        let d = f.det().to_u64().expect("determinant fits");
        if high.contains(&(top as u64 / d)) {
            duals.push(canonical_form(&f.scaled_dual(&scale)?)?);
        }
    }
    classes.extend(duals);
    sort_classes(&mut classes);
    Ok(classes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn form(rows: &[&[i64]]) -> GramForm {
        GramForm::from_rows(rows).unwrap()
    }

    #[test]
    fn minima_of_small_forms() {
        assert_eq!(successive_minima(&GramForm::identity(4)).unwrap(), vec![1, 1, 1, 1]);
        let d4 = form(&[&[2, 0, 1, 1], &[0, 2, 1, -1], &[1, 1, 2, 0], &[1, -1, 0, 2]]);
        assert_eq!(successive_minima(&d4).unwrap(), vec![2, 2, 2, 2]);
        assert_eq!(successive_minima(&form(&[&[5, 2], &[2, 1]])).unwrap(), vec![1, 1]);
    }

    #[test]
    fn canonical_form_is_a_class_invariant() {
        let s = form(&[&[2, 1], &[1, 3]]);
        let t = GramForm::new(s.matrix().quad_sub(&IntMatrix::from_rows(&[&[1, 3], &[1, 4]])).unwrap()).unwrap();
        assert_eq!(canonical_form(&s).unwrap(), canonical_form(&t).unwrap());
        assert_eq!(canonical_form(&t).unwrap(), form(&[&[2, -1], &[-1, 3]]));
    }

    #[test]
    fn binary_unimodular_forms() {
        // every positive definite unimodular binary form is E₂
        let classes = enumerate_classes(&ClassConstraints::new(2, 1, false)).unwrap();
        assert_eq!(classes, vec![GramForm::identity(2)]);
    }

    #[test]
    fn binary_forms_with_two_dual() {
        // det ∈ {1,2,4}: E₂, diag(1,2), diag(2,2); diag(1,4) fails 2S⁻¹ integral
        let classes = enumerate_classes(&ClassConstraints::new(2, 2, false)).unwrap();
        let expected = vec![GramForm::identity(2), form(&[&[1, 0], &[0, 2]]), form(&[&[2, 0], &[0, 2]])];
        assert_eq!(classes, expected);
    }
}
