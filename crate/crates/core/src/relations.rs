//! Mumford's theta relation and its specialisations, and the multiplier `ε_S`.
//!
//! For rational positive definite `T`, invertible rational `A`, `S = T[A]`
//! and rational `r×g` matrices `P`, `Q`:
//!
//! ```text
//! ϑ^S[A⁻¹P; A'Q] = (1/#K₂) Σ_{X∈K₁, Y∈K₂} e^{−2πi tr(P'Y)} ϑ^T[P+X; Q+Y]
//! K₁ = A·Z^{r×g} / (A·Z^{r×g} ∩ Z^{r×g}),  K₂ = A'⁻¹Z^{r×g} / (A'⁻¹Z^{r×g} ∩ Z^{r×g})
//! ```
//!
//! Representatives of `K₁` are taken as exact elements `A·k` of `A·Z^{r×g}`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isotropy::{is_isotropic, quotient_kernel, IsotropicGroup};
use crate::linalg::{
    box_representatives, integral_preimage, is_positive_definite_rat, lower_bound_f64, rational_min_eigen_lower_bound, GramForm,
    IntMatrix, RatMatrix,
};
use crate::theta::{nullwert_product, theta_general, theta_sv, CertifiedValue, Characteristic, SiegelPoint, ThetaConfig};

/// Data of one instance of the relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MumfordInstance {
    t: RatMatrix,
    a: RatMatrix,
    p: RatMatrix,
    q: RatMatrix,
    s: RatMatrix,
}

impl MumfordInstance {
    pub fn new(t: RatMatrix, a: RatMatrix, p: RatMatrix, q: RatMatrix) -> Result<Self> {
        let r = t.rows();
        if !t.is_square() || a.rows() != r || a.cols() != r || p.rows() != r || q.rows() != r || p.cols() != q.cols() {
            return Err(Error::DimensionMismatch("T, A must be r×r and P, Q r×g".into()));
        }
        if !is_positive_definite_rat(&t)? {
            return Err(Error::NotPositiveDefinite);
        }
        if a.det().is_zero() {
            return Err(Error::Singular);
        }
        let s = t.quad_sub(&a)?;
        Ok(Self { t, a, p, q, s })
    }

    pub fn t(&self) -> &RatMatrix {
        &self.t
    }

    pub fn a(&self) -> &RatMatrix {
        &self.a
    }

    pub fn p(&self) -> &RatMatrix {
        &self.p
    }

    pub fn q(&self) -> &RatMatrix {
        &self.q
    }

    /// `S = T[A]`.
    pub fn s(&self) -> &RatMatrix {
        &self.s
    }

    pub fn genus(&self) -> usize {
        self.p.cols()
    }

    /// `(A⁻¹P, A'Q)`, the characteristic on the left-hand side.
    pub fn lhs_characteristic(&self) -> Result<Characteristic> {
        let a_inv = self.a.inverse()?;
        Characteristic::new(&a_inv * &self.p, &self.a.transpose() * &self.q)
    }

    pub fn cosets(&self) -> Result<CosetSystem> {
        let g = self.genus();
        Ok(CosetSystem { k1: cosets(&self.a, g)?, k2: cosets(&self.a.transpose().inverse()?, g)? })
    }
}

/// Coset representatives of `M·Z^{r×g} / (M·Z^{r×g} ∩ Z^{r×g})`.
pub fn cosets(m: &RatMatrix, g: usize) -> Result<Vec<RatMatrix>> {
    let r = m.rows();
    let lattice = integral_preimage(m);
    let columns: Vec<RatMatrix> = box_representatives(&lattice)?
        .into_iter()
        .map(|k| {
            let k = IntMatrix::column_matrix(&k.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>());
            m * &k.to_rational()
        })
        .collect();
    let count = columns.len();
    let total = count.checked_pow(g as u32).filter(|&t| t <= 1 << 20).ok_or_else(|| Error::ScaleGuard("coset system too large".into()))?;
    let mut out = Vec::with_capacity(total);
    for idx in 0..total {
        let mut rest = idx;
        let mut pick = vec![0; g];
        for k in (0..g).rev() {
            pick[k] = rest % count;
            rest /= count;
        }
        out.push(RatMatrix::from_fn(r, g, |i, k| columns[pick[k]][(i, 0)].clone()));
    }
    Ok(out)
}

/// `K₁` and `K₂` with representatives in the canonical box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetSystem {
    pub k1: Vec<RatMatrix>,
    pub k2: Vec<RatMatrix>,
}

fn frac(x: &BigRational) -> BigRational {
    x - x.floor()
}

/// `tr(P'Y)` reduced into `[0, 1)`.
fn trace_turns(p: &RatMatrix, y: &RatMatrix) -> BigRational {
    let t = p.data().iter().zip(y.data()).fold(BigRational::zero(), |acc, (a, b)| acc + a * b);
    frac(&t)
}

fn turns_to_unit(t: &BigRational) -> Complex64 {
    let x = t.to_f64().unwrap_or(0.0);
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * x)
}

/// One summand `coefficient · ϑ^T[P+X; Q+Y]` of the right-hand side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MumfordTerm {
    /// coefficient `e^{2πi·turns}/#K₂`, turns in `[0,1)`
    pub turns: BigRational,
    pub weight: BigRational,
    pub characteristic: Characteristic,
}

/// The right-hand side as an exact list of terms.
pub fn mumford_terms(inst: &MumfordInstance) -> Result<Vec<MumfordTerm>> {
    let cs = inst.cosets()?;
    let weight = BigRational::new(BigInt::one(), BigInt::from(cs.k2.len()));
    let mut out = Vec::with_capacity(cs.k1.len() * cs.k2.len());
    for x in &cs.k1 {
        for y in &cs.k2 {
            out.push(MumfordTerm {
                turns: frac(&-trace_turns(&inst.p, y)),
                weight: weight.clone(),
                characteristic: Characteristic::new(&inst.p + x, &inst.q + y)?,
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationCheck {
    pub lhs: CertifiedValue,
    pub rhs: CertifiedValue,
    pub residual: f64,
    pub k1: usize,
    pub k2: usize,
}

/// Evaluates both sides of the relation at `tau`.
pub fn mumford_relation(inst: &MumfordInstance, tau: &SiegelPoint, cfg: &ThetaConfig) -> Result<RelationCheck> {
    if inst.genus() != tau.genus() {
        return Err(Error::DimensionMismatch("genus of P, Q and τ differ".into()));
    }
    let lhs = theta_general(&inst.s, &inst.lhs_characteristic()?, tau, cfg)?;
    let cs = inst.cosets()?;
    let mut value = Complex64::zero();
    let mut bound = 0.0;
    for term in mumford_terms(inst)? {
        let v = theta_general(&inst.t, &term.characteristic, tau, cfg)?;
        let w = term.weight.to_f64().unwrap_or(0.0);
        value += turns_to_unit(&term.turns) * v.value * w;
        bound += v.bound * w;
    }
    let rhs = CertifiedValue { value, bound };
    Ok(RelationCheck { lhs, rhs, residual: (lhs.value - rhs.value).norm(), k1: cs.k1.len(), k2: cs.k2.len() })
}

/// Limits for [`sample_instance`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleLimits {
    pub max_rank: usize,
    pub max_genus: usize,
    pub max_denominator: i64,
    pub min_imag: f64,
    /// upper bound on `#K₁·#K₂`
    pub max_terms: usize,
    /// lower bound on the smallest eigenvalue of `T` and of `S`
    pub min_eigen: f64,
}

impl Default for SampleLimits {
    fn default() -> Self {
        Self { max_rank: 2, max_genus: 2, max_denominator: 4, min_imag: 0.3, max_terms: 64, min_eigen: 0.25 }
    }
}

fn random_rational(rng: &mut impl Rng, num: i64, max_den: i64) -> BigRational {
    BigRational::new(BigInt::from(rng.gen_range(-num..=num)), BigInt::from(rng.gen_range(1..=max_den)))
}

fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, num: i64, max_den: i64) -> RatMatrix {
    RatMatrix::from_fn(rows, cols, |_, _| random_rational(rng, num, max_den))
}

/// A random relation instance and a point `τ` with `Im τ ≥ min_imag·E`, by rejection sampling.
pub fn sample_instance(rng: &mut impl Rng, limits: &SampleLimits) -> Result<(MumfordInstance, SiegelPoint)> {
    let eigen_ok = |m: &RatMatrix| -> Result<bool> {
        Ok(is_positive_definite_rat(m)? && lower_bound_f64(&rational_min_eigen_lower_bound(m)?) >= limits.min_eigen)
    };
    for _ in 0..100_000 {
        let r = rng.gen_range(1..=limits.max_rank);
        let g = rng.gen_range(1..=limits.max_genus);
        let d = limits.max_denominator;
        let b = random_matrix(rng, r, r, 2, d);
        let shift = BigRational::new(BigInt::one(), BigInt::from(rng.gen_range(1..=d)));
        let t = &(&b.transpose() * &b) + &RatMatrix::identity(r).scale(&shift);
        let a = random_matrix(rng, r, r, 3, d);
        if a.det().is_zero() || !t.is_symmetric() || !eigen_ok(&t)? {
            continue;
        }
        let inst = MumfordInstance::new(t, a, random_matrix(rng, r, g, 3, d), random_matrix(rng, r, g, 3, d))?;
        if !eigen_ok(inst.s())? {
            continue;
        }
        let cs = match inst.cosets() {
            Ok(cs) => cs,
            Err(Error::ScaleGuard(_)) => continue,
            Err(e) => return Err(e),
        };
        if cs.k1.len() * cs.k2.len() > limits.max_terms {
            continue;
        }
        let tau = random_point(rng, g, limits.min_imag)?;
        return Ok((inst, tau));
    }
    Err(Error::Inconclusive("no admissible instance within the sampling budget".into()))
}

/// `X + iY` with `X` uniform in `[−½, ½]` and `Y = min_imag·E + W'W/4`, `W` uniform in `[−1, 1]`.
pub fn random_point(rng: &mut impl Rng, g: usize, min_imag: f64) -> Result<SiegelPoint> {
    let w: Vec<f64> = (0..g * g).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut re = vec![0.0; g * g];
    let mut im = vec![0.0; g * g];
    for i in 0..g {
        for j in i..g {
            let x = rng.gen_range(-0.5..0.5);
            let y: f64 = (0..g).map(|k| w[k * g + i] * w[k * g + j]).sum::<f64>() / 4.0 + if i == j { min_imag } else { 0.0 };
            re[i * g + j] = x;
            re[j * g + i] = x;
            im[i * g + j] = y;
            im[j * g + i] = y;
        }
    }
    SiegelPoint::from_parts(g, &re, &im)
}

/// A nullwert characteristic `(a, b)` with `a, b ∈ ½Zᵍ`.
pub type NullwertChar = (Vec<BigRational>, Vec<BigRational>);

/// The series a [`LinearCombination`] is built from.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum SeriesId {
    /// `∏ ϑ[aᵢ; bᵢ]`
    NullwertProduct(Vec<NullwertChar>),
    /// `ϑ_{S,V}` at level `q`
    ThetaSv { form: IntMatrix, level: u64, v: IntMatrix },
}

/// `Σ magnitude · e^{2πi·turns} · series`, coefficients exact.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearCombination {
    pub terms: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub turns: BigRational,
    pub magnitude: BigRational,
    pub series: SeriesId,
}

/// Brings `ϑ[a;b]` to `a, b ∈ {0, ½}ᵍ`; returns the extra turns from
/// `ϑ[a; b+h] = e^{2πi a'h} ϑ[a; b]`.
fn normalize_nullwert(a: &[BigRational], b: &[BigRational]) -> (NullwertChar, BigRational) {
    let a_red: Vec<BigRational> = a.iter().map(frac).collect();
    let mut turns = BigRational::zero();
    let b_red: Vec<BigRational> = b
        .iter()
        .zip(&a_red)
        .map(|(x, ai)| {
            let h = x.floor();
            turns += ai * &h;
            x - h
        })
        .collect();
    ((a_red, b_red), frac(&turns))
}

fn is_odd(c: &NullwertChar) -> bool {
    crate::theta::is_odd_characteristic(&c.0, &c.1)
}

impl LinearCombination {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Normalises nullwert characteristics, drops vanishing products and
    /// merges equal series whose phases agree up to a sign.
    pub fn simplify(&self) -> Self {
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let mut merged: BTreeMap<(SeriesId, BigRational), BigRational> = BTreeMap::new();
        'terms: for t in &self.terms {
            let mut turns = t.turns.clone();
            let series = match &t.series {
                SeriesId::NullwertProduct(chars) => {
                    let mut norm = Vec::with_capacity(chars.len());
                    for (a, b) in chars {
                        let (c, extra) = normalize_nullwert(a, b);
                        if is_odd(&c) {
                            continue 'terms;
                        }
                        turns += extra;
                        norm.push(c);
                    }
                    norm.sort();
                    SeriesId::NullwertProduct(norm)
                }
                other => other.clone(),
            };
            let mut turns = frac(&turns);
            let mut magnitude = t.magnitude.clone();
            if turns >= half {
                turns -= &half;
                magnitude = -magnitude;
            }
            *merged.entry((series, turns)).or_insert_with(BigRational::zero) += magnitude;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, m)| !m.is_zero())
            .map(|((series, turns), magnitude)| Term { turns, magnitude, series })
            .collect();
        Self { terms }
    }

    /// Numerical value at `tau` with the accumulated truncation bound.
    pub fn evaluate(&self, tau: &SiegelPoint, cfg: &ThetaConfig) -> Result<CertifiedValue> {
        let mut value = Complex64::zero();
        let mut bound = 0.0;
        for t in &self.terms {
            let v = match &t.series {
                SeriesId::NullwertProduct(chars) => nullwert_product(chars, tau, cfg)?,
                SeriesId::ThetaSv { form, level, v } => theta_sv(&GramForm::new(form.clone())?, *level, v, tau, cfg)?,
            };
            let m = t.magnitude.to_f64().unwrap_or(f64::NAN);
            value += turns_to_unit(&t.turns) * v.value * m;
            bound += v.bound * m.abs();
        }
        Ok(CertifiedValue { value, bound })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let vec_json = |v: &[BigRational]| -> Vec<String> { v.iter().map(|x| x.to_string()).collect() };
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|t| {
                let series = match &t.series {
                    SeriesId::NullwertProduct(chars) => serde_json::json!({
                        "nullwert_product": chars.iter().map(|(a, b)| serde_json::json!({"a": vec_json(a), "b": vec_json(b)})).collect::<Vec<_>>()
                    }),
                    SeriesId::ThetaSv { form, level, v } => serde_json::json!({
                        "theta_sv": {"form": form.to_json(), "level": level, "v": v.to_json()}
                    }),
                };
                serde_json::json!({"turns": t.turns.to_string(), "magnitude": t.magnitude.to_string(), "series": series})
            })
            .collect();
        serde_json::json!({ "terms": terms })
    }
}

fn rows_of(m: &RatMatrix) -> Vec<Vec<BigRational>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

/// `ϑ^{E_r}[C; D] = ∏ᵢ ϑ[cᵢ; dᵢ]` over the rows of `C`, `D` (half-integral entries).
fn as_nullwert_product(ch: &Characteristic) -> Result<SeriesId> {
    let half_integral = |m: &RatMatrix| m.scale(&BigRational::from_integer(BigInt::from(2))).is_integral();
    if !half_integral(&ch.a) || !half_integral(&ch.b) {
        return Err(Error::Precondition("characteristic is not half-integral".into()));
    }
    Ok(SeriesId::NullwertProduct(rows_of(&ch.a).into_iter().zip(rows_of(&ch.b)).collect()))
}

fn combination_from_terms(terms: Vec<MumfordTerm>, mut series: impl FnMut(&Characteristic) -> Result<SeriesId>) -> Result<LinearCombination> {
    let terms = terms
        .into_iter()
        .map(|t| Ok(Term { turns: t.turns, magnitude: t.weight, series: series(&t.characteristic)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(LinearCombination { terms })
}

fn rat_identity_scaled(r: usize, n: i64, d: i64) -> RatMatrix {
    RatMatrix::identity(r).scale(&BigRational::new(BigInt::from(n), BigInt::from(d)))
}

/// `ϑ_{E,V}` (level 4) as a combination of products of `r` nullwerte.
///
/// Uses the relation with `T = E`, `A = E/2`, `P = 0`, `Q = V/2`, for which
/// `K₂` is trivial: `ϑ_{E,V} = Σ_{X ∈ {0,½}^{r×g}} ϑ^E[X; V/2]`.
pub fn expand_to_nullwerte(v: &IntMatrix) -> Result<LinearCombination> {
    let (r, g) = (v.rows(), v.cols());
    let inst = MumfordInstance::new(
        RatMatrix::identity(r),
        rat_identity_scaled(r, 1, 2),
        RatMatrix::zeros(r, g),
        v.to_rational().scale(&BigRational::new(BigInt::one(), BigInt::from(2))),
    )?;
    combination_from_terms(mumford_terms(&inst)?, as_nullwert_product)
}

/// A product of nullwerte `∏ϑ[aᵢ;bᵢ]` as a combination of level-4 series `ϑ_{E,W}`.
///
/// Uses `E = (E/4)[2E]`: with `α = 2C`, `β = D/2` (rows of `C`, `D` the `aᵢ'`, `bᵢ'`)
/// the product is `2^{−rg} Σ_{Y ∈ {0,½}^{r×g}} e^{−2πi tr(α'Y)} ϑ_{E, 4(β+Y)}`.
pub fn nullwert_product_to_level_four(chars: &[NullwertChar]) -> Result<LinearCombination> {
    let r = chars.len();
    let g = chars.first().map(|c| c.0.len()).ok_or_else(|| Error::Precondition("empty product".into()))?;
    let c = RatMatrix::from_fn(r, g, |i, k| chars[i].0[k].clone());
    let d = RatMatrix::from_fn(r, g, |i, k| chars[i].1[k].clone());
    as_nullwert_product(&Characteristic::new(c.clone(), d.clone())?)?;
    let two = BigRational::from_integer(BigInt::from(2));
    let inst = MumfordInstance::new(
        rat_identity_scaled(r, 1, 4),
        rat_identity_scaled(r, 2, 1),
        c.scale(&two),
        d.scale(&BigRational::new(BigInt::one(), BigInt::from(2))),
    )?;
    let four = BigRational::from_integer(BigInt::from(4));
    combination_from_terms(mumford_terms(&inst)?, |ch| {
        // the first half of the characteristic is integral and drops out
        debug_assert!(ch.a.is_integral());
        let w = ch.b.scale(&four).to_integral().expect("4(β+Y) is integral");
        Ok(SeriesId::ThetaSv { form: IntMatrix::identity(r), level: 4, v: w })
    })
}

fn check_root(s: &GramForm, v: &IntMatrix, a: &IntMatrix) -> Result<()> {
    if a.transpose().checked_mul(a)? != *s.matrix() {
        return Err(Error::Precondition("A'A differs from S".into()));
    }
    let inv = a.to_rational().inverse()?;
    if !inv.scale(&BigRational::from_integer(BigInt::from(4))).is_integral() {
        return Err(Error::Precondition("4A⁻¹ is not integral".into()));
    }
    if !(&inv.transpose() * &v.to_rational()).is_integral() {
        return Err(Error::Precondition("A'⁻¹V is not integral".into()));
    }
    Ok(())
}

/// `ϑ_{S,V}` (level 4) as a combination of products of `r` nullwerte, given a
/// Gram root `S = A'A` with `4A⁻¹` and `A'⁻¹V` integral.
///
/// Uses the relation with `T = E`, `A/2` in place of `A`, `P = 0` and `Q = A'⁻¹V/2`.
pub fn reduce_via_gram_root(s: &GramForm, v: &IntMatrix, a: &IntMatrix) -> Result<LinearCombination> {
    check_root(s, v, a)?;
    let r = s.dim();
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let a_half = a.to_rational().scale(&half);
    let q = (&a.to_rational().transpose().inverse()? * &v.to_rational()).scale(&half);
    let inst = MumfordInstance::new(RatMatrix::identity(r), a_half, RatMatrix::zeros(r, v.cols()), q)?;
    combination_from_terms(mumford_terms(&inst)?, as_nullwert_product)
}

/// Result of the inclusion `Θ_L(S,g,q) ⊂ Θ_{L̃}(S̃,g,q)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inclusion {
    pub kernel: IntMatrix,
    pub s_tilde: GramForm,
    /// `(V, ϑ_{S,V} as a combination of ϑ_{S̃,W})`
    pub images: Vec<(IntMatrix, LinearCombination)>,
}

/// `ϑ_{S,V} = (1/#K₂) Σ_{Y∈K₂} ϑ_{S̃, A'S⁻¹V + qY}` with `K₂` built from `A'S⁻¹`,
/// for `V` with columns in `L`. Every target `W` is checked to be isotropic for `(S̃, q)`.
pub fn inclusion_image(s: &GramForm, q: u64, l: &IsotropicGroup, v: &IntMatrix) -> Result<(IntMatrix, GramForm, LinearCombination)> {
    if !l.contains_columns(v) {
        return Err(Error::Precondition("V has columns outside L".into()));
    }
    let (a, s_tilde) = quotient_kernel(s, q, l)?;
    let r = s.dim();
    let qr = BigRational::from_integer(BigInt::from(q));
    let inv_q = qr.recip();
    let a_mat = &a.to_rational().inverse()? * &s.rational();
    let inst = MumfordInstance::new(
        s_tilde.rational().scale(&inv_q),
        a_mat.clone(),
        RatMatrix::zeros(r, v.cols()),
        (&(&a.to_rational().transpose() * s.inverse()) * &v.to_rational()).scale(&inv_q),
    )?;
    debug_assert_eq!(inst.s(), &s.rational().scale(&inv_q));
    let lc = combination_from_terms(mumford_terms(&inst)?, |ch| {
        let w = ch
            .b
            .scale(&qr)
            .to_integral()
            .ok_or_else(|| Error::Integrality("A'S⁻¹V + qY is not integral".into()))?;
        if !is_isotropic(&s_tilde, q, &w)? {
            return Err(Error::NotIsotropic);
        }
        Ok(SeriesId::ThetaSv { form: s_tilde.matrix().clone(), level: q, v: w })
    })?;
    Ok((a, s_tilde, lc))
}

/// Images of the genus-1 series `ϑ_{S,v}` for every generator column `v` of `L`.
pub fn theta_inclusion(s: &GramForm, q: u64, l: &IsotropicGroup) -> Result<Inclusion> {
    let (kernel, s_tilde) = quotient_kernel(s, q, l)?;
    let gens = l.generators();
    let mut images = Vec::new();
    let columns: Vec<IntMatrix> = if gens.cols() == 0 {
        vec![IntMatrix::zeros(s.dim(), 1)]
    } else {
        (0..gens.cols()).map(|j| gens.select_columns([j])).collect()
    };
    for v in columns {
        let (_, _, lc) = inclusion_image(s, q, l, &v)?;
        images.push((v, lc));
    }
    Ok(Inclusion { kernel, s_tilde, images })
}

/// Kronecker symbol `(a/n)`.
pub fn kronecker(a: i64, n: i64) -> i32 {
    let (mut a, mut n) = (a as i128, n as i128);
    if n == 0 {
        return (a.abs() == 1) as i32;
    }
    let mut result = 1;
    if n < 0 {
        n = -n;
        if a < 0 {
            result = -result;
        }
    }
    let twos = n.trailing_zeros();
    if twos > 0 {
        if a % 2 == 0 {
            return 0;
        }
        n >>= twos;
        if twos % 2 == 1 && matches!(a.rem_euclid(8), 3 | 5) {
            result = -result;
        }
    }
    // Jacobi symbol for odd n > 0
    a = a.rem_euclid(n);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

fn symplectic_blocks(m: &IntMatrix) -> Option<[IntMatrix; 4]> {
    if m.rows() != m.cols() || !m.rows().is_multiple_of(2) || m.rows() == 0 {
        return None;
    }
    let g = m.rows() / 2;
    Some([
        m.select_rows(0..g).select_columns(0..g),
        m.select_rows(0..g).select_columns(g..2 * g),
        m.select_rows(g..2 * g).select_columns(0..g),
        m.select_rows(g..2 * g).select_columns(g..2 * g),
    ])
}

pub fn is_symplectic(m: &IntMatrix) -> bool {
    let Some(_) = symplectic_blocks(m) else { return false };
    let g = m.rows() / 2;
    let j = IntMatrix::from_fn(2 * g, 2 * g, |i, k| {
        if k == i + g {
            BigInt::one()
        } else if i == k + g {
            -BigInt::one()
        } else {
            BigInt::zero()
        }
    });
    j.quad_sub(m).map(|x| x == j).unwrap_or(false)
}

/// Membership in `Γ_g[q, 2q]`: symplectic, `≡ E mod q`, and the diagonals of
/// `AB'` and `CD'` divisible by `2q`.
pub fn is_in_igusa_group(m: &IntMatrix, q: u64) -> bool {
    let Some([a, b, c, d]) = symplectic_blocks(m) else { return false };
    if !is_symplectic(m) {
        return false;
    }
    let qb = BigInt::from(q);
    let id = IntMatrix::identity(m.rows());
    if !(m - &id).data().iter().all(|x| x.is_multiple_of(&qb)) {
        return false;
    }
    let two_q = BigInt::from(2 * q);
    let diag_ok = |x: &IntMatrix| (0..x.rows()).all(|i| x[(i, i)].is_multiple_of(&two_q));
    diag_ok(&(&a * &b.transpose())) && diag_ok(&(&c * &d.transpose()))
}

/// `ε_S(M) = (det S / |det D|)` for `M ∈ Γ_g[4,8]` with `det D` odd.
pub fn epsilon_s(s: &GramForm, m: &IntMatrix) -> Result<i32> {
    if !is_in_igusa_group(m, 4) {
        return Err(Error::Precondition("M is not in Γ_g[4,8]".into()));
    }
    let [_, _, _, d] = symplectic_blocks(m).expect("checked above");
    let det_d = d.det();
    if det_d.is_even() {
        return Err(Error::Precondition("det D is even".into()));
    }
    let num = s.det().to_i64().ok_or_else(|| Error::ScaleGuard("det S exceeds 64 bits".into()))?;
    let den = det_d.abs().to_i64().ok_or_else(|| Error::ScaleGuard("det D exceeds 64 bits".into()))?;
    Ok(kronecker(num, den))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformCheck {
    pub epsilon: i32,
    /// `ϑ_{S,0}(Mτ)`
    pub lhs: CertifiedValue,
    /// `ε·det(Cτ+D)²·ϑ_{S,0}(τ)`
    pub rhs: CertifiedValue,
    pub residual: f64,
    /// `ϑ_{S,0}(Mτ) / (det(Cτ+D)²·ϑ_{S,0}(τ))`
    pub ratio: Complex64,
}

/// Compares `ϑ_{S,0}(Mτ)` with `ε_S(M)·det(Cτ+D)²·ϑ_{S,0}(τ)` at level 4, `r = 4`.
pub fn check_transformation(s: &GramForm, m: &IntMatrix, tau: &SiegelPoint, cfg: &ThetaConfig) -> Result<TransformCheck> {
    if s.dim() != 4 {
        return Err(Error::Precondition("the weight-2 check needs r = 4".into()));
    }
    let epsilon = epsilon_s(s, m)?;
    let g = tau.genus();
    let zero = IntMatrix::zeros(4, g);
    let image = tau.act(m)?;
    let lhs = theta_sv(s, 4, &zero, &image, cfg)?;
    let base = theta_sv(s, 4, &zero, tau, cfg)?;
    let j = tau.automorphy_factor(m)?;
    let j2 = j * j;
    let rhs = CertifiedValue { value: base.value * j2 * epsilon as f64, bound: base.bound * j2.norm() };
    Ok(TransformCheck {
        epsilon,
        lhs,
        rhs,
        residual: (lhs.value - rhs.value).norm(),
        ratio: lhs.value / (base.value * j2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;

    #[test]
    fn kronecker_values() {
        assert_eq!(kronecker(2, 5), -1);
        assert_eq!(kronecker(4, 5), 1);
        assert_eq!(kronecker(1, 1), 1);
        assert_eq!(kronecker(3, 7), -1);
        assert_eq!(kronecker(2, 7), 1);
        assert_eq!(kronecker(5, 15), 0);
        assert_eq!(kronecker(-1, 3), -1);
        assert_eq!(kronecker(3, 8), -1);
        assert_eq!(kronecker(-3, -1), -1);
    }

    #[test]
    fn witness_matrix_is_in_the_igusa_group() {
        let m = IntMatrix::from_rows(&[&[13, 8], &[8, 5]]);
        assert!(is_in_igusa_group(&m, 4));
        assert!(is_in_igusa_group(&IntMatrix::identity(4), 4));
        assert!(!is_in_igusa_group(&IntMatrix::from_rows(&[&[1, 1], &[0, 1]]), 4));
        let s2 = GramForm::from_rows(&[&[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 2]]).unwrap();
        assert_eq!(epsilon_s(&s2, &m).unwrap(), -1);
        assert_eq!(epsilon_s(&GramForm::identity(4), &m).unwrap(), 1);
        let odd_b = IntMatrix::from_rows(&[&[1, 1], &[0, 1]]);
        assert!(epsilon_s(&s2, &odd_b).is_err());
    }

    #[test]
    fn coset_counts() {
        let half = RatMatrix::identity(2).scale(&rat(1, 2));
        assert_eq!(cosets(&half, 1).unwrap().len(), 4);
        assert_eq!(cosets(&half, 2).unwrap().len(), 16);
        assert_eq!(cosets(&RatMatrix::identity(2).scale(&rat(2, 1)), 2).unwrap().len(), 1);
    }

    #[test]
    fn nullwert_normalisation() {
        // ϑ[½; ½+1] = e^{2πi·½}ϑ[½;½]
        let (c, turns) = normalize_nullwert(&[rat(3, 2)], &[rat(3, 2)]);
        assert_eq!(c, (vec![rat(1, 2)], vec![rat(1, 2)]));
        assert_eq!(turns, rat(1, 2));
    }

    #[test]
    fn identity_relation_is_exact() {
        let inst = MumfordInstance::new(
            RatMatrix::identity(2),
            RatMatrix::identity(2),
            RatMatrix::from_fractions(2, 1, &[(1, 2), (0, 1)]).unwrap(),
            RatMatrix::from_fractions(2, 1, &[(1, 4), (1, 2)]).unwrap(),
        )
        .unwrap();
        let tau = SiegelPoint::scalar_imaginary(1, 1.0).unwrap();
        let res = mumford_relation(&inst, &tau, &ThetaConfig::with_eps(1e-12)).unwrap();
        assert_eq!((res.k1, res.k2), (1, 1));
        assert!(res.residual <= 1e-12);
    }

    #[test]
    fn first_instance_at_i() {
        // S = E/4, T = E, A = E/2 with integral V
        let v = IntMatrix::from_rows(&[&[1], &[3]]);
        let tau = SiegelPoint::scalar_imaginary(1, 1.0).unwrap();
        let cfg = ThetaConfig::with_eps(1e-12);
        let lc = expand_to_nullwerte(&v).unwrap();
        let lhs = theta_sv(&GramForm::identity(2), 4, &v, &tau, &cfg).unwrap();
        let rhs = lc.evaluate(&tau, &cfg).unwrap();
        assert!((lhs.value - rhs.value).norm() < 1e-9);
        let simplified = lc.simplify();
        assert!(simplified.len() <= lc.len());
        assert!((simplified.evaluate(&tau, &cfg).unwrap().value - lhs.value).norm() < 1e-9);
    }
}
