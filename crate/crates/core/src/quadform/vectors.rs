//! Fincke–Pohst enumeration of lattice points in ellipsoids.

use crate::error::{Error, Result};
use crate::linalg::GramForm;

/// Quadratic-form coefficients in the shape `Q(y) = Σᵢ dᵢ (yᵢ + Σ_{j>i} μᵢⱼ yⱼ)²`.
#[derive(Clone, Debug)]
pub struct Ellipsoid {
    n: usize,
    /// row-major: diagonal holds dᵢ, strict upper triangle holds μᵢⱼ
    coef: Vec<f64>,
}

impl Ellipsoid {
    /// Decomposes a symmetric positive definite matrix (row-major, `n×n`).
    pub fn new(q: &[f64], n: usize) -> Result<Self> {
        assert_eq!(q.len(), n * n);
        let mut c = q.to_vec();
        for i in 0..n {
            let d = c[i * n + i];
            if d.is_nan() || d <= 0.0 || !d.is_finite() {
                return Err(Error::NotPositiveDefinite);
            }
            for j in i + 1..n {
                c[j * n + i] = c[i * n + j];
                c[i * n + j] /= d;
            }
            for k in i + 1..n {
                for l in k..n {
                    c[k * n + l] -= c[k * n + i] * c[i * n + l];
                }
            }
        }
        Ok(Self { n, coef: c })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Product of the pivots, i.e. the determinant of the form.
    pub fn det(&self) -> f64 {
        (0..self.n).map(|i| self.coef[i * self.n + i]).product()
    }

    /// Calls `f(x, Q(x + shift))` for every integer `x` with `Q(x + shift) ≤ bound`.
    ///
    /// The search interval of each coordinate is widened by a relative slack
    /// of `1e-9`, so points on the boundary are never lost to rounding; the
    /// caller re-checks exact membership where it matters.
    pub fn for_each(&self, shift: &[f64], bound: f64, mut f: impl FnMut(&[i64], f64)) {
        self.try_for_each(shift, bound, |x, v| {
            f(x, v);
            true
        });
    }

    /// Like [`Ellipsoid::for_each`], stopping as soon as `f` returns `false`.
    /// Returns whether the enumeration ran to completion.
    pub fn try_for_each(&self, shift: &[f64], bound: f64, mut f: impl FnMut(&[i64], f64) -> bool) -> bool {
        let n = self.n;
        if n == 0 {
            return f(&[], 0.0);
        }
        assert_eq!(shift.len(), n);
        let slack = 1e-9 * (1.0 + bound.abs());
        let d = |i: usize| self.coef[i * n + i];
        let mu = |i: usize, j: usize| self.coef[i * n + j];

        let mut x = vec![0i64; n];
        let mut hi = vec![0i64; n];
        let mut center = vec![0.0f64; n];
        let mut remaining = vec![0.0f64; n + 1];
        remaining[n] = bound;

        // sets up level i given coordinates above it; returns false if empty
        let setup = |i: usize,
                     x: &mut [i64],
                     hi: &mut [i64],
                     center: &mut [f64],
                     remaining: &[f64]|
         -> bool {
            let mut c = 0.0;
            for j in i + 1..n {
                c -= mu(i, j) * (x[j] as f64 + shift[j]);
            }
            center[i] = c;
            let t = remaining[i + 1];
            if t < -slack {
                return false;
            }
            let w = (t.max(0.0) / d(i)).sqrt();
            let lo = (c - shift[i] - w - slack).ceil();
            let up = (c - shift[i] + w + slack).floor();
            if lo > up {
                return false;
            }
            x[i] = lo as i64;
            hi[i] = up as i64;
            true
        };

        let mut i = n - 1;
        if !setup(i, &mut x, &mut hi, &mut center, &remaining) {
            return true;
        }
        loop {
            let y = x[i] as f64 + shift[i] - center[i];
            remaining[i] = remaining[i + 1] - d(i) * y * y;
            if i == 0 {
                if !f(&x, bound - remaining[0]) {
                    return false;
                }
            } else if setup(i - 1, &mut x, &mut hi, &mut center, &remaining) {
                i -= 1;
                continue;
            }
            // advance, climbing up when a level is exhausted
            loop {
                if x[i] < hi[i] {
                    x[i] += 1;
                    break;
                }
                i += 1;
                if i == n {
                    return true;
                }
            }
        }
    }
}

fn form_ellipsoid(s: &GramForm) -> Result<(Ellipsoid, Vec<i64>)> {
    let entries = s
        .entries_i64()
        .ok_or_else(|| Error::ScaleGuard("form entries exceed 64 bits".into()))?;
    let q: Vec<f64> = entries.iter().map(|&v| v as f64).collect();
    Ok((Ellipsoid::new(&q, s.dim())?, entries))
}

fn exact_value(entries: &[i64], n: usize, x: &[i64]) -> i128 {
    let mut acc = 0i128;
    for i in 0..n {
        let mut row = 0i128;
        for j in 0..n {
            row += entries[i * n + j] as i128 * x[j] as i128;
        }
        acc += row * x[i] as i128;
    }
    acc
}

/// All `x ∈ Zʳ` with `S[x] = m`, sorted lexicographically.
pub fn enumerate_vectors(s: &GramForm, m: u64) -> Result<Vec<Vec<i64>>> {
    let mut out = vectors_up_to(s, m)?
        .into_iter()
        .filter(|(norm, _)| *norm == m)
        .map(|(_, x)| x)
        .collect::<Vec<_>>();
    out.sort();
    Ok(out)
}

/// All `(S[x], x)` with `S[x] ≤ m`, sorted by norm and then lexicographically.
pub fn vectors_up_to(s: &GramForm, m: u64) -> Result<Vec<(u64, Vec<i64>)>> {
    let (ell, entries) = form_ellipsoid(s)?;
    let n = s.dim();
    let zero = vec![0.0; n];
    let mut out = Vec::new();
    ell.for_each(&zero, m as f64, |x, _| {
        let v = exact_value(&entries, n, x);
        if v <= m as i128 {
            out.push((v as u64, x.to_vec()));
        }
    });
    out.sort();
    Ok(out)
}

/// Number of vectors of each norm `0..=m` (the truncated theta series of `S`).
pub fn representation_counts(s: &GramForm, m: u64) -> Result<Vec<u64>> {
    let (ell, entries) = form_ellipsoid(s)?;
    let n = s.dim();
    let mut counts = vec![0u64; m as usize + 1];
    ell.for_each(&vec![0.0; n], m as f64, |x, _| {
        let v = exact_value(&entries, n, x);
        if v <= m as i128 {
            counts[v as usize] += 1;
        }
    });
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> GramForm {
        GramForm::from_rows(&[&[2, 0, 1, 1], &[0, 2, 1, -1], &[1, 1, 2, 0], &[1, -1, 0, 2]]).unwrap()
    }

    fn box_scan(s: &GramForm, m: u64, radius: i64) -> Vec<Vec<i64>> {
        let n = s.dim();
        let mut out = Vec::new();
        let mut x = vec![-radius; n];
        loop {
            if s.value(&x) == m.into() {
                out.push(x.clone());
            }
            let mut i = n;
            loop {
                if i == 0 {
                    out.sort();
                    return out;
                }
                i -= 1;
                if x[i] < radius {
                    x[i] += 1;
                    break;
                }
                x[i] = -radius;
            }
        }
    }

    #[test]
    fn unit_vectors_of_identity() {
        let e4 = GramForm::identity(4);
        let v = enumerate_vectors(&e4, 1).unwrap();
        assert_eq!(v.len(), 8);
        assert_eq!(v[0], vec![-1, 0, 0, 0]);
        assert_eq!(enumerate_vectors(&e4, 0).unwrap(), vec![vec![0; 4]]);
    }

    #[test]
    fn example_norm_two_matches_box_scan() {
        // xᵢ² ≤ m·(S⁻¹)ᵢᵢ = 2, so the box |xᵢ| ≤ 2 is more than enough.
        let s = example();
        let fast = enumerate_vectors(&s, 2).unwrap();
        let slow = box_scan(&s, 2, 2);
        assert_eq!(fast, slow);
    }

    #[test]
    fn shifted_ellipsoid_counts() {
        // points of Z + 1/2 with y² ≤ 2.25: ±1/2, ±3/2
        let ell = Ellipsoid::new(&[1.0], 1).unwrap();
        let mut n = 0;
        ell.for_each(&[0.5], 2.25, |_, _| n += 1);
        assert_eq!(n, 4);
    }

    #[test]
    fn theta_of_e4_counts() {
        // r₄(n) = 8σ(n) - 32σ(n/4)
        let c = representation_counts(&GramForm::identity(4), 5).unwrap();
        assert_eq!(c, vec![1, 8, 24, 32, 24, 48]);
    }
}
