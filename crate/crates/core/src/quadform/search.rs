//! Column-by-column backtracking for matrices with a prescribed Gram matrix.

/// Finds integer matrices `U = (u₁ … u_k)` with `uᵢ' B uⱼ = target[i][j]`,
/// where each `uⱼ` is drawn from `candidates[j]`.
///
/// Candidates are tried in the given order, so solutions are visited in
/// lexicographic order of their candidate indices. The visitor returns
/// `false` to stop the search.
pub struct GramSearch<'a> {
    n: usize,
    form: &'a [i64],
    target: &'a [i64],
    k: usize,
    candidates: &'a [Vec<Vec<i64>>],
    /// pairwise bound instead of equality for the off-diagonal (|value| ≤ bound)
    relaxed: Option<&'a [i64]>,
}

impl<'a> GramSearch<'a> {
    /// `form` is the `n×n` inner product, `target` the `k×k` Gram matrix to hit.
    pub fn new(n: usize, form: &'a [i64], target: &'a [i64], candidates: &'a [Vec<Vec<i64>>]) -> Self {
        let k = candidates.len();
        assert_eq!(form.len(), n * n);
        assert_eq!(target.len(), k * k);
        Self { n, form, target, k, candidates, relaxed: None }
    }

    /// Replaces the off-diagonal equalities by `|uᵢ'Buⱼ| ≤ bounds[i]` (i < j).
    pub fn with_offdiagonal_bounds(mut self, bounds: &'a [i64]) -> Self {
        self.relaxed = Some(bounds);
        self
    }

    pub fn run(&self, mut visit: impl FnMut(&[&[i64]]) -> bool) {
        let n = self.n;
        // B·u for every candidate
        let images: Vec<Vec<Vec<i64>>> = self
            .candidates
            .iter()
            .map(|cands| {
                cands
                    .iter()
                    .map(|u| {
                        (0..n).map(|i| (0..n).map(|j| self.form[i * n + j] * u[j]).sum()).collect()
                    })
                    .collect()
            })
            .collect();
        let mut chosen = vec![0usize; self.k];
        self.descend(0, &mut chosen, &images, &mut visit);
    }

    fn descend(
        &self,
        level: usize,
        chosen: &mut Vec<usize>,
        images: &[Vec<Vec<i64>>],
        visit: &mut impl FnMut(&[&[i64]]) -> bool,
    ) -> bool {
        if level == self.k {
            let cols: Vec<&[i64]> =
                (0..self.k).map(|j| self.candidates[j][chosen[j]].as_slice()).collect();
            return visit(&cols);
        }
        'cand: for (idx, u) in self.candidates[level].iter().enumerate() {
            for i in 0..level {
                let bu = &images[i][chosen[i]];
                let ip: i64 = bu.iter().zip(u).map(|(a, b)| a * b).sum();
                let ok = match self.relaxed {
                    Some(bounds) => ip.abs() <= bounds[i],
                    None => ip == self.target[i * self.k + level],
                };
                if !ok {
                    continue 'cand;
                }
            }
            chosen[level] = idx;
            if !self.descend(level + 1, chosen, images, visit) {
                return false;
            }
        }
        true
    }
}

/// Determinant of a small integer matrix given by columns.
pub fn det_columns(cols: &[&[i64]]) -> i128 {
    let n = cols.len();
    let m: Vec<i128> = (0..n * n).map(|idx| cols[idx % n][idx / n] as i128).collect();
    det_i128(&m, n)
}

/// Bareiss determinant on `i128` (row-major).
pub fn det_i128(m: &[i128], n: usize) -> i128 {
    if n == 0 {
        return 1;
    }
    let mut a = m.to_vec();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k * n + k] == 0 {
            let Some(p) = (k + 1..n).find(|&i| a[i * n + k] != 0) else {
                return 0;
            };
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i * n + j] = (a[i * n + j] * a[k * n + k] - a[i * n + k] * a[k * n + j]) / prev;
            }
        }
        prev = a[k * n + k];
    }
    sign * a[n * n - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_determinants() {
        assert_eq!(det_i128(&[2, 1, 1, 2], 2), 3);
        assert_eq!(det_i128(&[0, 1, 1, 0], 2), -1);
        assert_eq!(det_columns(&[&[1, 0, 0], &[0, 0, 1], &[0, 1, 0]]), -1);
    }

    #[test]
    fn finds_orthonormal_frames() {
        // signed permutation matrices in dimension 2: 8 of them
        let e = [1, 0, 0, 1];
        let units = vec![vec![-1, 0], vec![0, -1], vec![0, 1], vec![1, 0]];
        let cands = vec![units.clone(), units];
        let mut count = 0;
        GramSearch::new(2, &e, &e, &cands).run(|_| {
            count += 1;
            true
        });
        assert_eq!(count, 8);
    }
}
