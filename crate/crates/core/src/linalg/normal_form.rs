//! Hermite and Smith normal forms over the integers.
//!
//! The Hermite form here is the lower-triangular *column* form: `H = M·U`
//! with `U` unimodular, pivots on a strictly increasing sequence of rows,
//! positive pivots, and every entry left of a pivot reduced into
//! `[0, pivot)`. Trailing columns of `H` are zero. This form is unique for
//! the column lattice of `M`, so two generator sets span the same lattice
//! exactly when their forms compare equal.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::matrix::IntMatrix;

fn col_axpy(m: &mut IntMatrix, dst: usize, src: usize, q: &BigInt) {
    for i in 0..m.rows() {
        let v = &m[(i, dst)] - q * &m[(i, src)];
        m[(i, dst)] = v;
    }
}

fn row_axpy(m: &mut IntMatrix, dst: usize, src: usize, q: &BigInt) {
    for j in 0..m.cols() {
        let v = &m[(dst, j)] - q * &m[(src, j)];
        m[(dst, j)] = v;
    }
}

fn negate_col(m: &mut IntMatrix, j: usize) {
    for i in 0..m.rows() {
        let v = -&m[(i, j)];
        m[(i, j)] = v;
    }
}

fn negate_row(m: &mut IntMatrix, i: usize) {
    for j in 0..m.cols() {
        let v = -&m[(i, j)];
        m[(i, j)] = v;
    }
}

/// Column Hermite normal form: returns `(H, U)` with `H = M·U`.
pub fn hnf(m: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let (rows, cols) = (m.rows(), m.cols());
    let mut h = m.clone();
    let mut u = IntMatrix::identity(cols);
    let mut pc = 0;
    for i in 0..rows {
        if pc >= cols {
            break;
        }
        loop {
            let best = (pc..cols)
                .filter(|&j| !h[(i, j)].is_zero())
                .min_by(|&a, &b| h[(i, a)].abs().cmp(&h[(i, b)].abs()));
            let Some(best) = best else { break };
            h.swap_cols(pc, best);
            u.swap_cols(pc, best);
            let mut done = true;
            for j in pc + 1..cols {
                if h[(i, j)].is_zero() {
                    continue;
                }
                let q = h[(i, j)].div_floor(&h[(i, pc)]);
                col_axpy(&mut h, j, pc, &q);
                col_axpy(&mut u, j, pc, &q);
                if !h[(i, j)].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h[(i, pc)].is_zero() {
            continue;
        }
        if h[(i, pc)].is_negative() {
            negate_col(&mut h, pc);
            negate_col(&mut u, pc);
        }
        for j in 0..pc {
            let q = h[(i, j)].div_floor(&h[(i, pc)]);
            if !q.is_zero() {
                col_axpy(&mut h, j, pc, &q);
                col_axpy(&mut u, j, pc, &q);
            }
        }
        pc += 1;
    }
    (h, u)
}

/// Number of nonzero columns of a column Hermite form.
pub fn hnf_rank(h: &IntMatrix) -> usize {
    (0..h.cols()).take_while(|&j| (0..h.rows()).any(|i| !h[(i, j)].is_zero())).count()
}

/// Canonical basis (the nonzero HNF columns) of the lattice spanned by the columns of `m`.
pub fn lattice_basis(m: &IntMatrix) -> IntMatrix {
    let (h, _) = hnf(m);
    let rank = hnf_rank(&h);
    h.select_columns(0..rank)
}

/// Basis of the integer kernel `{x : M x = 0}` as columns.
pub fn int_kernel(m: &IntMatrix) -> IntMatrix {
    let (h, u) = hnf(m);
    let rank = hnf_rank(&h);
    let kernel = u.select_columns(rank..m.cols());
    if kernel.cols() == 0 {
        return kernel;
    }
    lattice_basis(&kernel)
}

/// Smith normal form: returns `(D, U, V)` with `U·M·V = D`, `D` diagonal,
/// nonnegative, and `d₁ | d₂ | …`.
pub fn snf(m: &IntMatrix) -> (IntMatrix, IntMatrix, IntMatrix) {
    let (rows, cols) = (m.rows(), m.cols());
    let mut d = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);
    for t in 0..rows.min(cols) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if d[(i, j)].is_zero() {
                        continue;
                    }
                    if best.is_none_or(|(bi, bj)| d[(i, j)].abs() < d[(bi, bj)].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else {
                return (d, u, v);
            };
            d.swap_rows(t, bi);
            u.swap_rows(t, bi);
            d.swap_cols(t, bj);
            v.swap_cols(t, bj);

            let mut clean = true;
            for i in t + 1..rows {
                if d[(i, t)].is_zero() {
                    continue;
                }
                let q = d[(i, t)].div_floor(&d[(t, t)]);
                row_axpy(&mut d, i, t, &q);
                row_axpy(&mut u, i, t, &q);
                clean &= d[(i, t)].is_zero();
            }
            for j in t + 1..cols {
                if d[(t, j)].is_zero() {
                    continue;
                }
                let q = d[(t, j)].div_floor(&d[(t, t)]);
                col_axpy(&mut d, j, t, &q);
                col_axpy(&mut v, j, t, &q);
                clean &= d[(t, j)].is_zero();
            }
            if !clean {
                continue;
            }
            // divisibility: fold an offending row into row t and retry
            let pivot = d[(t, t)].clone();
            let offending = (t + 1..rows)
                .find(|&i| (t + 1..cols).any(|j| !d[(i, j)].is_multiple_of(&pivot)));
            match offending {
                Some(i) => {
                    let minus_one = -BigInt::one();
                    row_axpy(&mut d, t, i, &minus_one);
                    row_axpy(&mut u, t, i, &minus_one);
                }
                None => break,
            }
        }
        if d[(t, t)].is_negative() {
            negate_row(&mut d, t);
            negate_row(&mut u, t);
        }
    }
    (d, u, v)
}

/// Elementary divisors (the diagonal of the Smith form, padded with zeros to `min(rows, cols)`).
pub fn elementary_divisors(m: &IntMatrix) -> Vec<BigInt> {
    let (d, _, _) = snf(m);
    (0..m.rows().min(m.cols())).map(|i| d[(i, i)].clone()).collect()
}
