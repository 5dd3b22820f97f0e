//! Exact Fourier expansions of theta nullwert monomials and the rank of their span.
//!
//! Exponents are stored as integers `n` meaning `exp(2πi·tr(Tτ))` with `T = n/8`
//! (upper triangle of `T` for genus 2). Half-integral characteristics give
//! `T ∈ (1/8)Z` in both the nullwert and the second-kind normalisation.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Common denominator of all stored exponents.
pub const SCALE: i64 = 8;

/// Exact elimination is run when there are at most this many monomials.
const EXACT_COLUMN_LIMIT: usize = 64;

/// A Gaussian integer with machine-size parts.
pub type GaussCoeff = (i128, i128);

/// `Σ c_T exp(2πi tr(Tτ))` truncated at `8·tr T ≤ cutoff`.
pub type SparseSeries = BTreeMap<Vec<i64>, GaussCoeff>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// products of even nullwerte `ϑ[a;b]`
    Nullwerte,
    /// only the fourth powers `ϑ[a;b]⁴`
    FourthPowers,
    /// products of `f_a(τ) = ϑ[a/2;0](2τ)`
    SecondKind,
}

fn check_genus(g: usize) -> Result<()> {
    if g == 0 || g > 2 {
        return Err(Error::Precondition(format!("Fourier tables are implemented for genus 1 and 2, not {g}")));
    }
    Ok(())
}

fn key_of(u: &[i64], factor: i64) -> Vec<i64> {
    match u {
        [x] => vec![factor * x * x],
        [x, y] => vec![factor * x * x, factor * x * y, factor * y * y],
        _ => unreachable!("genus checked"),
    }
}

fn trace(key: &[i64]) -> i64 {
    match key {
        [n] => *n,
        [a, _, c] => a + c,
        _ => 0,
    }
}

/// All `u ∈ Z^g` with `u ≡ a mod 2` and `factor·|u|² ≤ cutoff`.
fn lattice_points(g: usize, a: &[u8], factor: i64, cutoff: i64) -> Vec<Vec<i64>> {
    let bound = ((cutoff / factor) as f64).sqrt() as i64 + 1;
    let range = |ai: u8| (-bound..=bound).filter(move |u| u.rem_euclid(2) == ai as i64);
    let mut out = Vec::new();
    match g {
        1 => out.extend(range(a[0]).map(|u| vec![u])),
        _ => {
            for x in range(a[0]) {
                out.extend(range(a[1]).map(|y| vec![x, y]));
            }
        }
    }
    out.retain(|u| factor * u.iter().map(|x| x * x).sum::<i64>() <= cutoff);
    out
}

fn add_to(series: &mut SparseSeries, key: Vec<i64>, c: GaussCoeff) {
    let e = series.entry(key).or_insert((0, 0));
    e.0 += c.0;
    e.1 += c.1;
}

const I_POWERS: [GaussCoeff; 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

/// Expansion of `ϑ[a/2; b/2](τ) = Σ_p exp(πiτ[p+a/2] + 2πi(p+a/2)'b/2)` for `a, b ∈ {0,1}^g`.
pub fn nullwert_fourier(a: &[u8], b: &[u8], cutoff: i64) -> Result<SparseSeries> {
    let g = a.len();
    check_genus(g)?;
    if b.len() != g || a.iter().chain(b).any(|&x| x > 1) {
        return Err(Error::Precondition("characteristic entries must be 0 or 1 (halves)".into()));
    }
    let mut out = SparseSeries::new();
    // u = 2p + a, exponent u u'/8 and phase exp(2πi u'b/4)
    for u in lattice_points(g, a, 1, cutoff) {
        let turns: i64 = u.iter().zip(b).map(|(x, &y)| x * y as i64).sum();
        add_to(&mut out, key_of(&u, 1), I_POWERS[turns.rem_euclid(4) as usize]);
    }
    out.retain(|_, c| *c != (0, 0));
    Ok(out)
}

/// Expansion of `f_a(τ) = Σ_p exp(2πi τ[p + a/2])` for `a ∈ {0,1}^g`.
pub fn second_kind_fourier(a: &[u8], cutoff: i64) -> Result<SparseSeries> {
    let g = a.len();
    check_genus(g)?;
    if a.iter().any(|&x| x > 1) {
        return Err(Error::Precondition("characteristic entries must be 0 or 1 (halves)".into()));
    }
    let mut out = SparseSeries::new();
    for u in lattice_points(g, a, 2, cutoff) {
        add_to(&mut out, key_of(&u, 2), (1, 0));
    }
    Ok(out)
}

fn multiply(x: &SparseSeries, y: &SparseSeries, cutoff: i64) -> SparseSeries {
    let mut out = SparseSeries::new();
    for (kx, cx) in x {
        for (ky, cy) in y {
            let key: Vec<i64> = kx.iter().zip(ky).map(|(a, b)| a + b).collect();
            if trace(&key) > cutoff {
                continue;
            }
            let c = (cx.0 * cy.0 - cx.1 * cy.1, cx.0 * cy.1 + cx.1 * cy.0);
            let e = out.entry(key).or_insert((0, 0));
            e.0 += c.0;
            e.1 += c.1;
        }
    }
    out.retain(|_, c| *c != (0, 0));
    out
}

fn bits(mut x: usize, g: usize) -> Vec<u8> {
    let mut v = vec![0; g];
    for k in (0..g).rev() {
        v[k] = (x & 1) as u8;
        x >>= 1;
    }
    v
}

/// The even characteristics `(a, b) ∈ {0,1}^{2g}` with `a'b` even, in lexicographic order.
pub fn even_characteristics(g: usize) -> Vec<(Vec<u8>, Vec<u8>)> {
    let n = 1 << g;
    let mut out = Vec::new();
    for ai in 0..n {
        for bi in 0..n {
            let (a, b) = (bits(ai, g), bits(bi, g));
            if a.iter().zip(&b).map(|(x, y)| x * y).sum::<u8>() % 2 == 0 {
                out.push((a, b));
            }
        }
    }
    out
}

/// All multisets of size `degree` from `0..n`, as sorted index lists.
fn multisets(n: usize, degree: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i, n, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, degree, &mut Vec::new(), &mut out);
    out
}

/// Fourier coefficients of every monomial of one family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FourierTable {
    pub genus: usize,
    pub scale: i64,
    pub cutoff: i64,
    pub family: Family,
    pub degree: usize,
    /// labels of the generating series
    pub factors: Vec<String>,
    /// each monomial as indices into `factors`
    pub monomials: Vec<Vec<usize>>,
    pub columns: Vec<SparseSeries>,
}

fn half_label(x: &[u8]) -> String {
    x.iter().map(|&v| if v == 0 { "0" } else { "1/2" }).collect::<Vec<_>>().join(",")
}

impl FourierTable {
    pub fn new(family: Family, genus: usize, degree: usize, cutoff: i64) -> Result<Self> {
        check_genus(genus)?;
        if cutoff < 0 {
            return Err(Error::Precondition("cutoff must be nonnegative".into()));
        }
        let (factors, series): (Vec<String>, Vec<SparseSeries>) = match family {
            Family::Nullwerte | Family::FourthPowers => even_characteristics(genus)
                .into_iter()
                .map(|(a, b)| Ok((format!("theta[{};{}]", half_label(&a), half_label(&b)), nullwert_fourier(&a, &b, cutoff)?)))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .unzip(),
            Family::SecondKind => (0..1usize << genus)
                .map(|x| {
                    let a = bits(x, genus);
                    Ok((format!("f[{}]", half_label(&a)), second_kind_fourier(&a, cutoff)?))
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .unzip(),
        };
        let monomials: Vec<Vec<usize>> = match family {
            Family::FourthPowers => (0..factors.len()).map(|i| vec![i; degree]).collect(),
            _ => multisets(factors.len(), degree),
        };
        let one: SparseSeries = [(vec![0; if genus == 1 { 1 } else { 3 }], (1, 0))].into_iter().collect();
        let columns = monomials
            .iter()
            .map(|m| m.iter().fold(one.clone(), |acc, &i| multiply(&acc, &series[i], cutoff)))
            .collect();
        Ok(Self { genus, scale: SCALE, cutoff, family, degree, factors, monomials, columns })
    }

    /// Sorted union of exponents over all columns.
    pub fn exponents(&self) -> Vec<Vec<i64>> {
        let mut keys: Vec<Vec<i64>> = self.columns.iter().flat_map(|c| c.keys().cloned()).collect();
        keys.sort();
        keys.dedup();
        keys
    }

    /// Monomial `j` summed at a genus-1 point `τ`.
    pub fn column_value(&self, j: usize, tau: Complex64) -> Result<Complex64> {
        if self.genus != 1 {
            return Err(Error::Precondition("numeric summation of a table is for genus 1".into()));
        }
        let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        Ok(self.columns[j]
            .iter()
            .map(|(k, c)| Complex64::new(c.0 as f64, c.1 as f64) * (two_pi_i * tau * (k[0] as f64 / self.scale as f64)).exp())
            .sum())
    }

    /// `Σ vⱼ·columnⱼ`, exactly.
    pub fn combine(&self, v: &[GaussCoeff]) -> SparseSeries {
        let mut out = SparseSeries::new();
        for (col, c) in self.columns.iter().zip(v) {
            for (k, x) in col {
                let e = out.entry(k.clone()).or_insert((0, 0));
                e.0 += c.0 * x.0 - c.1 * x.1;
                e.1 += c.0 * x.1 + c.1 * x.0;
            }
        }
        out.retain(|_, c| *c != (0, 0));
        out
    }
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = ((acc as u128 * b as u128) % m as u128) as u64;
        }
        b = ((b as u128 * b as u128) % m as u128) as u64;
        e >>= 1;
    }
    acc
}

/// The least prime `p ≡ 1 mod 4` above `2^20`, with a square root of `−1` mod `p`.
pub fn screening_prime() -> (u64, u64) {
    let p = ((1u64 << 20) + 1..).step_by(4).find(|&p| is_prime(p)).expect("primes ≡ 1 mod 4 are infinite");
    let c = (2..p).find(|&c| pow_mod(c, (p - 1) / 2, p) == p - 1).expect("a non-residue exists");
    (p, pow_mod(c, (p - 1) / 4, p))
}

fn rank_mod_p(rows: &[Vec<GaussCoeff>], p: u64, iota: u64) -> usize {
    let to_fp = |c: &GaussCoeff| {
        let re = c.0.rem_euclid(p as i128) as u64;
        let im = c.1.rem_euclid(p as i128) as u64;
        (re + ((im as u128 * iota as u128) % p as u128) as u64) % p
    };
    let mut m: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(to_fp).collect()).collect();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..m.len()).find(|&i| m[i][c] != 0) else { continue };
        m.swap(rank, piv);
        let inv = pow_mod(m[rank][c], p - 2, p);
        for i in rank + 1..m.len() {
            if m[i][c] == 0 {
                continue;
            }
            let f = ((m[i][c] as u128 * inv as u128) % p as u128) as u64;
            for j in c..cols {
                let sub = ((f as u128 * m[rank][j] as u128) % p as u128) as u64;
                m[i][j] = (m[i][j] + p - sub) % p;
            }
        }
        rank += 1;
    }
    rank
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Gauss {
    re: BigInt,
    im: BigInt,
}

impl Gauss {
    fn from_coeff(c: &GaussCoeff) -> Self {
        Self { re: BigInt::from(c.0), im: BigInt::from(c.1) }
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn mul(&self, o: &Self) -> Self {
        Self { re: &self.re * &o.re - &self.im * &o.im, im: &self.re * &o.im + &self.im * &o.re }
    }

    fn sub(&self, o: &Self) -> Self {
        Self { re: &self.re - &o.re, im: &self.im - &o.im }
    }

    /// Exact quotient; panics if `o` does not divide `self`.
    fn div_exact(&self, o: &Self) -> Self {
        let norm = &o.re * &o.re + &o.im * &o.im;
        let num = self.mul(&Self { re: o.re.clone(), im: -&o.im });
        let (re, r1) = num.re.div_rem(&norm);
        let (im, r2) = num.im.div_rem(&norm);
        assert!(r1.is_zero() && r2.is_zero(), "fraction-free elimination lost exactness");
        Self { re, im }
    }
}

/// Rank over `Q(i)` by fraction-free (Bareiss) elimination in `Z[i]`.
fn rank_exact(rows: &[Vec<GaussCoeff>]) -> usize {
    let mut m: Vec<Vec<Gauss>> = rows.iter().map(|r| r.iter().map(Gauss::from_coeff).collect()).collect();
    let cols = m.first().map_or(0, |r| r.len());
    let mut prev = Gauss { re: BigInt::from(1), im: BigInt::zero() };
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(rank, piv);
        for i in rank + 1..m.len() {
            for j in c + 1..cols {
                let t = m[rank][c].mul(&m[i][j]).sub(&m[i][c].mul(&m[rank][j]));
                m[i][j] = t.div_exact(&prev);
            }
            m[i][c] = Gauss { re: BigInt::zero(), im: BigInt::zero() };
        }
        prev = m[rank][c].clone();
        rank += 1;
    }
    rank
}

/// Ranks of a table: the mod-`p` screen and, for small tables, the exact rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRank {
    pub mod_p: usize,
    pub exact: Option<usize>,
}

impl TableRank {
    pub fn value(&self) -> usize {
        self.exact.unwrap_or(self.mod_p)
    }
}

pub fn table_rank(table: &FourierTable) -> TableRank {
    // one row per monomial, one column per exponent
    let exps = table.exponents();
    let rows: Vec<Vec<GaussCoeff>> =
        table.columns.iter().map(|c| exps.iter().map(|k| c.get(k).copied().unwrap_or((0, 0))).collect()).collect();
    let (p, iota) = screening_prime();
    let mod_p = rank_mod_p(&rows, p, iota);
    let exact = (rows.len() <= EXACT_COLUMN_LIMIT).then(|| rank_exact(&rows));
    if let Some(r) = exact {
        debug_assert!(r >= mod_p);
    }
    TableRank { mod_p, exact }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanRank {
    pub genus: usize,
    pub degree: usize,
    pub family: Family,
    pub monomials: usize,
    pub rank: usize,
    pub rank_at_double: usize,
    pub cutoff: i64,
    pub scale: i64,
    pub stabilized: bool,
    /// both ranks confirmed by exact elimination
    pub exact: bool,
}

/// Rank of the span of one family at cutoff `N`, certified by recomputing at `2N`.
pub fn span_rank(family: Family, genus: usize, degree: usize, cutoff: i64) -> Result<SpanRank> {
    let at = |n: i64| -> Result<(usize, TableRank)> {
        let t = FourierTable::new(family, genus, degree, n)?;
        Ok((t.monomials.len(), table_rank(&t)))
    };
    let (monomials, r1) = at(cutoff)?;
    let (_, r2) = at(2 * cutoff)?;
    if r1.value() != r2.value() {
        return Err(Error::Inconclusive(format!(
            "rank not stabilized: {} at cutoff {cutoff}, {} at {}",
            r1.value(),
            r2.value(),
            2 * cutoff
        )));
    }
    Ok(SpanRank {
        genus,
        degree,
        family,
        monomials,
        rank: r1.value(),
        rank_at_double: r2.value(),
        cutoff,
        scale: SCALE,
        stabilized: true,
        exact: r1.exact.is_some() && r2.exact.is_some(),
    })
}

/// Degree-`d` monomials in the even nullwerte.
pub fn product_rank(genus: usize, degree: usize, cutoff: i64) -> Result<SpanRank> {
    span_rank(Family::Nullwerte, genus, degree, cutoff)
}

pub fn fourth_powers_rank(genus: usize, cutoff: i64) -> Result<SpanRank> {
    span_rank(Family::FourthPowers, genus, 4, cutoff)
}

pub fn second_kind_rank(genus: usize, degree: usize, cutoff: i64) -> Result<SpanRank> {
    span_rank(Family::SecondKind, genus, degree, cutoff)
}

/// The vector `ϑ[0;0]⁴ − ϑ[0;½]⁴ − ϑ[½;0]⁴` on the genus-1 degree-4 monomials.
pub fn jacobi_kernel_vector(table: &FourierTable) -> Result<Vec<GaussCoeff>> {
    if table.genus != 1 || table.family != Family::Nullwerte || table.degree != 4 {
        return Err(Error::Precondition("the quartic identity lives on genus-1 degree-4 nullwert monomials".into()));
    }
    Ok(table
        .monomials
        .iter()
        .map(|m| match m.as_slice() {
            [0, 0, 0, 0] => (1, 0),
            [1, 1, 1, 1] | [2, 2, 2, 2] => (-1, 0),
            _ => (0, 0),
        })
        .collect())
}

/// Largest absolute coefficient, as a sanity bound for tables.
pub fn max_coefficient(table: &FourierTable) -> BigInt {
    table
        .columns
        .iter()
        .flat_map(|c| c.values())
        .map(|c| BigInt::from(c.0.abs().max(c.1.abs())))
        .max()
        .unwrap_or_default()
        .abs()
}

/// Numeric sanity of [`max_coefficient`] in `f64`.
pub fn max_coefficient_f64(table: &FourierTable) -> f64 {
    max_coefficient(table).to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nullwert_leading_coefficients() {
        let t00 = nullwert_fourier(&[0], &[0], 16).unwrap();
        assert_eq!(t00[&vec![0]], (1, 0));
        // exponent 1/2 is n = 4 at scale 8
        assert_eq!(t00[&vec![4]], (2, 0));
        let t01 = nullwert_fourier(&[0], &[1], 16).unwrap();
        assert_eq!(t01[&vec![4]], (-2, 0));
        assert!(nullwert_fourier(&[1], &[1], 64).unwrap().is_empty());
    }

    #[test]
    fn even_characteristic_count() {
        assert_eq!(even_characteristics(1).len(), 3);
        assert_eq!(even_characteristics(2).len(), 10);
    }

    #[test]
    fn screening_prime_has_a_fourth_root_of_unity() {
        let (p, iota) = screening_prime();
        assert_eq!(p % 4, 1);
        assert!(p > 1 << 20);
        assert_eq!(pow_mod(iota, 2, p), p - 1);
    }

    #[test]
    fn exact_rank_of_small_gaussian_matrix() {
        let rows = vec![vec![(1, 1), (2, 0)], vec![(0, 2), (2, 2)], vec![(1, 0), (0, 0)]];
        // second row is (1+i)·first
        assert_eq!(rank_exact(&rows[..2]), 1);
        assert_eq!(rank_exact(&rows), 2);
    }

    #[test]
    fn genus_one_ranks() {
        assert_eq!(product_rank(1, 4, 32).unwrap().rank, 14);
        assert_eq!(product_rank(1, 1, 32).unwrap().rank, 3);
        assert_eq!(product_rank(1, 0, 8).unwrap().rank, 1);
        assert_eq!(fourth_powers_rank(1, 32).unwrap().rank, 2);
        assert_eq!(second_kind_rank(1, 4, 32).unwrap().rank, 5);
        assert_eq!(second_kind_rank(1, 2, 32).unwrap().rank, 3);
    }

    #[test]
    fn quartic_identity_is_a_kernel_vector() {
        let table = FourierTable::new(Family::Nullwerte, 1, 4, 64).unwrap();
        let v = jacobi_kernel_vector(&table).unwrap();
        assert!(table.combine(&v).is_empty());
    }
}
