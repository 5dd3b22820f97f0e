//! The residue module `Zʳ/(qZʳ+SZʳ)` and its isotropic subgroups.
//!
//! A matrix `V` is isotropic for `(S, q)` when `S⁻¹[V]` and `q·S⁻¹V` are
//! integral. Both conditions only depend on the columns of `V` modulo
//! `qZʳ+SZʳ`, and the group generated by pairwise compatible isotropic
//! elements is again isotropic.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::{lattice_basis, snf, GramForm, IntMatrix, RatMatrix};

/// Largest module enumerated element by element.
pub const MAX_MODULE_ORDER: u64 = 1 << 12;

/// Whether `S⁻¹[V]` and `q·S⁻¹V` are integral.
pub fn is_isotropic(s: &GramForm, q: u64, v: &IntMatrix) -> Result<bool> {
    if v.rows() != s.dim() {
        return Err(Error::DimensionMismatch(format!("V has {} rows, S is {}×{}", v.rows(), s.dim(), s.dim())));
    }
    let det = s.det();
    let adj_v = s.adjugate() * v;
    let q = BigInt::from(q);
    if !adj_v.data().iter().all(|x| (&q * x).is_multiple_of(det)) {
        return Ok(false);
    }
    let gram = &v.transpose() * &adj_v;
    Ok(gram.data().iter().all(|x| x.is_multiple_of(det)))
}

/// Reduces `x` modulo the column lattice of a full-rank lower-triangular Hermite basis.
fn reduce_mod_hnf(x: &mut [BigInt], h: &IntMatrix) {
    for i in 0..h.cols() {
        let t = x[i].div_floor(&h[(i, i)]);
        if !t.is_zero() {
            for (k, xk) in x.iter_mut().enumerate().skip(i) {
                *xk -= &t * &h[(k, i)];
            }
        }
    }
}

/// Smith presentation of `Zʳ/(qZʳ+SZʳ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueModule {
    form: GramForm,
    level: u64,
    divisors: Vec<BigInt>,
    to_canonical: IntMatrix,
    from_canonical: IntMatrix,
    relations: IntMatrix,
}

/// Builds the residue module; requires `q²S⁻¹` integral.
pub fn residue_module(s: &GramForm, q: u64) -> Result<ResidueModule> {
    if q == 0 {
        return Err(Error::Precondition("level must be positive".into()));
    }
    let q2 = BigInt::from(q) * BigInt::from(q);
    if !s.scaled_inverse_is_integral(&q2) {
        return Err(Error::Integrality("q²·S⁻¹ is not integral".into()));
    }
    let r = s.dim();
    let block = IntMatrix::identity(r).scale(&BigInt::from(q)).hstack(s.matrix())?;
    let (d, u, _) = snf(&block);
    let divisors = (0..r).map(|i| d[(i, i)].clone()).collect();
    let from_canonical = u
        .to_rational()
        .inverse()?
        .to_integral()
        .ok_or_else(|| Error::Precondition("Smith transform is not unimodular".into()))?;
    Ok(ResidueModule {
        form: s.clone(),
        level: q,
        divisors,
        to_canonical: u,
        from_canonical,
        relations: lattice_basis(&block),
    })
}

impl ResidueModule {
    pub fn form(&self) -> &GramForm {
        &self.form
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    /// Elementary divisors `d₁ | … | d_r` (ones included).
    pub fn divisors(&self) -> &[BigInt] {
        &self.divisors
    }

    /// `U` with `x ↦ U·x mod dᵢ` the isomorphism onto `⊕ Z/dᵢ`.
    pub fn to_canonical(&self) -> &IntMatrix {
        &self.to_canonical
    }

    pub fn from_canonical(&self) -> &IntMatrix {
        &self.from_canonical
    }

    /// Hermite basis of `qZʳ+SZʳ`.
    pub fn relations(&self) -> &IntMatrix {
        &self.relations
    }

    pub fn order(&self) -> BigInt {
        self.divisors.iter().product()
    }

    /// Smith coordinates of `x`, reduced into `0 ≤ cᵢ < dᵢ`.
    pub fn coordinates(&self, x: &[BigInt]) -> Vec<BigInt> {
        let col = IntMatrix::column_matrix(x);
        let y = &self.to_canonical * &col;
        (0..y.rows()).map(|i| y[(i, 0)].mod_floor(&self.divisors[i])).collect()
    }

    /// The lift of Smith coordinates, reduced into the Hermite box of the relations.
    pub fn lift(&self, coords: &[BigInt]) -> Vec<BigInt> {
        let col = IntMatrix::column_matrix(coords);
        let x = &self.from_canonical * &col;
        let mut x = x.column(0);
        reduce_mod_hnf(&mut x, &self.relations);
        x
    }

    /// Whether `x ∈ qZʳ+SZʳ`.
    pub fn is_relation(&self, x: &[BigInt]) -> bool {
        self.coordinates(x).iter().all(Zero::is_zero)
    }
}

/// A subgroup of a residue module spanned by the columns of an isotropic matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsotropicGroup {
    module: ResidueModule,
    generators: IntMatrix,
    canonical: IntMatrix,
    order: BigInt,
}

impl IsotropicGroup {
    /// The group generated by the columns of `v`, which must be isotropic.
    pub fn generated_by(module: &ResidueModule, v: &IntMatrix) -> Result<Self> {
        if !is_isotropic(&module.form, module.level, v)? {
            return Err(Error::NotIsotropic);
        }
        let canonical = lattice_basis(&v.hstack(&module.relations)?);
        let order = lattice_index(&module.relations) / lattice_index(&canonical);
        Ok(Self { module: module.clone(), generators: v.clone(), canonical, order })
    }

    pub fn trivial(module: &ResidueModule) -> Self {
        Self::generated_by(module, &IntMatrix::zeros(module.form.dim(), 0)).expect("zero columns are isotropic")
    }

    pub fn module(&self) -> &ResidueModule {
        &self.module
    }

    /// Lifts of a generating set (columns).
    pub fn generators(&self) -> &IntMatrix {
        &self.generators
    }

    /// Hermite basis of the lift lattice `V·Zᵏ + qZʳ + SZʳ`.
    pub fn canonical(&self) -> &IntMatrix {
        &self.canonical
    }

    pub fn order(&self) -> &BigInt {
        &self.order
    }

    /// Whether the class of `x` lies in the group.
    pub fn contains(&self, x: &[BigInt]) -> bool {
        let mut y = x.to_vec();
        reduce_mod_hnf(&mut y, &self.canonical);
        y.iter().all(Zero::is_zero)
    }

    /// Whether every column of `v` lies in the group.
    pub fn contains_columns(&self, v: &IntMatrix) -> bool {
        (0..v.cols()).all(|j| self.contains(&v.column(j)))
    }
}

fn lattice_index(h: &IntMatrix) -> BigInt {
    (0..h.cols()).map(|i| h[(i, i)].clone()).product()
}

/// Element-level view of a small module: Smith coordinates in mixed radix.
struct Elements {
    radices: Vec<u64>,
    count: usize,
    lifts: Vec<Vec<BigInt>>,
}

impl Elements {
    fn new(module: &ResidueModule) -> Result<Self> {
        let order = module.order();
        if order > BigInt::from(MAX_MODULE_ORDER) {
            return Err(Error::ScaleGuard(format!("module order {order} exceeds {MAX_MODULE_ORDER}")));
        }
        let positions: Vec<usize> = (0..module.divisors.len()).filter(|&i| !module.divisors[i].is_one()).collect();
        let radices: Vec<u64> = positions.iter().map(|&i| module.divisors[i].to_u64().expect("small divisor")).collect();
        let count = order.to_usize().expect("small order");
        let r = module.divisors.len();
        let lifts = (0..count)
            .map(|idx| {
                let mut coords = vec![BigInt::zero(); r];
                let mut rest = idx as u64;
                for (k, &p) in positions.iter().enumerate().rev() {
                    coords[p] = BigInt::from(rest % radices[k]);
                    rest /= radices[k];
                }
                module.lift(&coords)
            })
            .collect();
        Ok(Self { radices, count, lifts })
    }

    fn digits(&self, idx: usize) -> Vec<u64> {
        let mut out = vec![0; self.radices.len()];
        let mut rest = idx as u64;
        for k in (0..self.radices.len()).rev() {
            out[k] = rest % self.radices[k];
            rest /= self.radices[k];
        }
        out
    }

    fn add(&self, a: usize, b: usize) -> usize {
        let (da, db) = (self.digits(a), self.digits(b));
        let mut idx = 0u64;
        for k in 0..self.radices.len() {
            idx = idx * self.radices[k] + (da[k] + db[k]) % self.radices[k];
        }
        idx as usize
    }
}

type Bits = Vec<u64>;

fn bit(bits: &Bits, i: usize) -> bool {
    bits[i / 64] >> (i % 64) & 1 == 1
}

fn set_bit(bits: &mut Bits, i: usize) {
    bits[i / 64] |= 1 << (i % 64);
}

/// Members of `⟨members, g⟩`.
fn adjoin(elems: &Elements, members: &[usize], g: usize) -> Vec<usize> {
    let mut bits: Bits = vec![0; elems.count.div_ceil(64)];
    for &m in members {
        set_bit(&mut bits, m);
    }
    let mut out = members.to_vec();
    let mut shift = g;
    while !bit(&bits, shift) {
        let coset: Vec<usize> = members.iter().map(|&m| elems.add(m, shift)).collect();
        for &c in &coset {
            set_bit(&mut bits, c);
        }
        out.extend(coset);
        shift = elems.add(shift, g);
    }
    out.sort_unstable();
    out
}

/// All isotropic subgroups of `Zʳ/(qZʳ+SZʳ)` that are maximal under inclusion,
/// sorted by their canonical Hermite bases.
pub fn maximal_isotropic_groups(s: &GramForm, q: u64) -> Result<Vec<IsotropicGroup>> {
    let module = residue_module(s, q)?;
    let elems = Elements::new(&module)?;
    let det = s.det();
    let adj = s.adjugate();
    let qb = BigInt::from(q);
    let n = elems.count;
    let images: Vec<Vec<BigInt>> = elems
        .lifts
        .iter()
        .map(|x| (&*adj * &IntMatrix::column_matrix(x)).column(0))
        .collect();
    let pair = |a: usize, b: usize| -> bool {
        let v: BigInt = elems.lifts[a].iter().zip(&images[b]).map(|(x, y)| x * y).sum();
        v.is_multiple_of(det)
    };
    let isotropic: Vec<bool> = (0..n)
        .map(|a| images[a].iter().all(|y| (&qb * y).is_multiple_of(det)) && pair(a, a))
        .collect();

    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut frontier: Vec<(Vec<usize>, Vec<usize>)> = vec![(vec![0], vec![])];
    seen.insert(vec![0]);
    let mut maximal = Vec::new();
    while let Some((members, gens)) = frontier.pop() {
        let mut extended = false;
        for e in 0..n {
            if !isotropic[e] || members.binary_search(&e).is_ok() || !gens.iter().all(|&g| pair(g, e)) {
                continue;
            }
            extended = true;
            let next = adjoin(&elems, &members, e);
            if seen.insert(next.clone()) {
                let mut next_gens = gens.clone();
                next_gens.push(e);
                frontier.push((next, next_gens));
            }
        }
        if !extended {
            maximal.push(gens);
        }
    }
    let r = s.dim();
    let mut groups = maximal
        .into_iter()
        .map(|gens| {
            let cols: Vec<Vec<BigInt>> = gens.iter().map(|&g| elems.lifts[g].clone()).collect();
            IsotropicGroup::generated_by(&module, &IntMatrix::from_columns(r, &cols))
        })
        .collect::<Result<Vec<_>>>()?;
    groups.sort_by(|a, b| a.canonical.cmp(&b.canonical));
    Ok(groups)
}

/// The isotropic `r×g` matrices with columns in a group `L`: exactly the
/// products `V·G`, `G` integral `k×g`, modulo `(qZʳ+SZʳ)^g`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsotropicMatrices {
    generators: IntMatrix,
    genus: usize,
    group: IsotropicGroup,
}

impl IsotropicMatrices {
    /// `V` (`r×k`).
    pub fn generators(&self) -> &IntMatrix {
        &self.generators
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    /// `V·G` for an integral `k×g` coefficient matrix.
    pub fn member(&self, coefficients: &IntMatrix) -> Result<IntMatrix> {
        if coefficients.cols() != self.genus {
            return Err(Error::DimensionMismatch(format!("expected {} columns", self.genus)));
        }
        self.generators.checked_mul(coefficients)
    }

    /// Whether `W` is one of the described matrices.
    pub fn contains(&self, w: &IntMatrix) -> bool {
        w.rows() == self.generators.rows() && w.cols() == self.genus && self.group.contains_columns(w)
    }
}

pub fn isotropic_matrices_of(l: &IsotropicGroup, g: usize) -> IsotropicMatrices {
    IsotropicMatrices { generators: l.generators.clone(), genus: g, group: l.clone() }
}

/// The kernel `A·Zʳ` of `Zʳ → (Zʳ/(qZʳ+SZʳ))/L` and `S̃ = S⁻¹[A]`.
///
/// `A` is the canonical Hermite basis of the lift lattice of `L`. The
/// returned form satisfies `q·S̃⁻¹` integral.
pub fn quotient_kernel(s: &GramForm, q: u64, l: &IsotropicGroup) -> Result<(IntMatrix, GramForm)> {
    if l.module.form != *s || l.module.level != q {
        return Err(Error::Precondition("group belongs to a different module".into()));
    }
    let a = l.canonical.clone();
    let tilde: RatMatrix = s.inverse().quad_sub(&a.to_rational())?;
    let tilde = tilde
        .to_integral()
        .ok_or_else(|| Error::Integrality("S⁻¹[A] is not integral".into()))?;
    let tilde = GramForm::new(tilde)?;
    if !tilde.scaled_inverse_is_integral(&BigInt::from(q)) {
        return Err(Error::Integrality("q·S̃⁻¹ is not integral".into()));
    }
    Ok((a, tilde))
}
