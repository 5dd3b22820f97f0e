//! Certified numerical evaluation of theta series
//!
//! `ϑ^S[A;B](τ) = Σ_G exp πi tr(S[G+A]τ + 2(G+A)'B)`, summed over integral
//! `r×g` matrices `G`.
//!
//! Writing `N = G + A` and `Y = Im τ`, the term has absolute value
//! `exp(−π·vec(N)'(Y⊗S)vec(N))`. All `N` with `vec(N)'(Y⊗S)vec(N) ≤ R²` are
//! summed. With `Λ` a lower bound for `λ_min(Y)·λ_min(S)` and any
//! `0 < δ < 1`, the omitted tail is at most
//!
//! ```text
//! exp(−π(1−δ)R²) · (2 + 1/√(δΛ))^{rg}
//! ```
//!
//! because `Σ_{m∈Z} exp(−πt(m+a)²) ≤ 2 + 1/√t` for every shift `a`. The
//! radius is the smallest one for which some `δ` on a fixed grid brings
//! this below `eps/2`.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isotropy::is_isotropic;
use crate::linalg::{lower_bound_f64, rational_min_eigen_lower_bound, GramForm, IntMatrix, RatMatrix};
use crate::quadform::Ellipsoid;

/// A point of the Siegel half plane.
#[derive(Clone, Debug, PartialEq)]
pub struct SiegelPoint {
    genus: usize,
    tau: Vec<Complex64>,
}

impl SiegelPoint {
    /// `tau` row-major `g×g`; must be symmetric with positive definite imaginary part.
    pub fn new(genus: usize, tau: Vec<Complex64>) -> Result<Self> {
        if genus == 0 || tau.len() != genus * genus {
            return Err(Error::DimensionMismatch(format!("expected {} entries", genus * genus)));
        }
        if tau.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("non-finite entry".into()));
        }
        let scale = tau.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for i in 0..genus {
            for j in 0..i {
                if (tau[i * genus + j] - tau[j * genus + i]).norm() > 1e-14 * scale {
                    return Err(Error::NotSymmetric);
                }
            }
        }
        let p = Self { genus, tau };
        let y = DMatrix::from_row_slice(genus, genus, &p.imag());
        if Cholesky::new(y).is_none() || p.min_imag_eigenvalue() <= 0.0 {
            return Err(Error::Domain("imaginary part is not positive definite".into()));
        }
        Ok(p)
    }

    /// `y·i·E_g`.
    pub fn scalar_imaginary(genus: usize, y: f64) -> Result<Self> {
        Self::new(genus, (0..genus * genus).map(|k| if k % (genus + 1) == 0 { Complex64::new(0.0, y) } else { Complex64::zero() }).collect())
    }

    pub fn from_parts(genus: usize, re: &[f64], im: &[f64]) -> Result<Self> {
        if re.len() != genus * genus || im.len() != genus * genus {
            return Err(Error::DimensionMismatch(format!("expected {} entries", genus * genus)));
        }
        Self::new(genus, re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect())
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.tau
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.tau[i * self.genus + j]
    }

    pub fn real(&self) -> Vec<f64> {
        self.tau.iter().map(|z| z.re).collect()
    }

    pub fn imag(&self) -> Vec<f64> {
        self.tau.iter().map(|z| z.im).collect()
    }

    /// Smallest eigenvalue of `Im τ` reduced by a rounding margin.
    pub fn min_imag_eigenvalue(&self) -> f64 {
        let g = self.genus;
        let y = DMatrix::from_row_slice(g, g, &self.imag());
        let norm = y.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let eig = SymmetricEigen::new(y).eigenvalues;
        eig.iter().copied().fold(f64::INFINITY, f64::min) - 1e-12 * norm.max(1.0)
    }

    /// `c·τ` for a real `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.genus, self.tau.iter().map(|z| z * c).collect())
    }

    fn complex_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.genus, self.genus, &self.tau)
    }

    fn blocks(&self, m: &IntMatrix) -> Result<[DMatrix<Complex64>; 4]> {
        let g = self.genus;
        if m.rows() != 2 * g || m.cols() != 2 * g {
            return Err(Error::DimensionMismatch(format!("expected a {}×{} matrix", 2 * g, 2 * g)));
        }
        let block = |r0: usize, c0: usize| {
            DMatrix::from_fn(g, g, |i, j| Complex64::new(m[(r0 + i, c0 + j)].to_f64().unwrap_or(f64::NAN), 0.0))
        };
        Ok([block(0, 0), block(0, g), block(g, 0), block(g, g)])
    }

    /// `Mτ = (Aτ+B)(Cτ+D)⁻¹`.
    pub fn act(&self, m: &IntMatrix) -> Result<Self> {
        let [a, b, c, d] = self.blocks(m)?;
        let t = self.complex_matrix();
        let num = &a * &t + &b;
        let den = (&c * &t + &d).try_inverse().ok_or(Error::Singular)?;
        let img = num * den;
        let g = self.genus;
        // symmetrise away rounding
        let entries = (0..g * g).map(|k| (img[(k / g, k % g)] + img[(k % g, k / g)]) * 0.5).collect();
        Self::new(g, entries)
    }

    /// `det(Cτ+D)`.
    pub fn automorphy_factor(&self, m: &IntMatrix) -> Result<Complex64> {
        let [_, _, c, d] = self.blocks(m)?;
        Ok((&c * self.complex_matrix() + &d).determinant())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let g = self.genus;
        let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..g).map(|i| (0..g).map(|j| f(&self.tau[i * g + j])).collect()).collect()
        };
        serde_json::json!({"genus": g, "re": rows(|z| z.re), "im": rows(|z| z.im)})
    }

    /// Parses `{"genus": g, "re": [[…]], "im": [[…]]}`; a missing `re` means zero.
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        #[derive(Deserialize)]
        struct Wire {
            genus: usize,
            #[serde(default)]
            re: Option<Vec<Vec<f64>>>,
            im: Vec<Vec<f64>>,
        }
        let w: Wire = serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        let g = w.genus;
        let re = w.re.unwrap_or_else(|| vec![vec![0.0; g]; g]);
        let flat = |m: Vec<Vec<f64>>| -> Result<Vec<f64>> {
            if m.len() != g || m.iter().any(|r| r.len() != g) {
                return Err(Error::Parse(format!("expected {g}×{g} rows")));
            }
            Ok(m.into_iter().flatten().collect())
        };
        Self::from_parts(g, &flat(re)?, &flat(w.im)?)
    }
}

/// A pair of rational `r×g` matrices `(A, B)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Characteristic {
    pub a: RatMatrix,
    pub b: RatMatrix,
}

impl Characteristic {
    pub fn new(a: RatMatrix, b: RatMatrix) -> Result<Self> {
        if a.rows() != b.rows() || a.cols() != b.cols() {
            return Err(Error::DimensionMismatch("A and B must have the same shape".into()));
        }
        Ok(Self { a, b })
    }

    pub fn zero(r: usize, g: usize) -> Self {
        Self { a: RatMatrix::zeros(r, g), b: RatMatrix::zeros(r, g) }
    }

    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    pub fn genus(&self) -> usize {
        self.a.cols()
    }
}

/// A value with a rigorous bound for the omitted tail of the series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifiedValue {
    pub value: Complex64,
    pub bound: f64,
}

/// Accuracy target and runtime guards.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaConfig {
    /// requested truncation bound, at least `1e-12`
    pub eps: f64,
    /// smallest admissible eigenvalue of `Im τ`
    pub min_imag: f64,
    /// largest admissible number of summed lattice points
    pub max_points: u64,
}

impl Default for ThetaConfig {
    fn default() -> Self {
        Self { eps: 1e-10, min_imag: 0.05, max_points: 400_000_000 }
    }
}

impl ThetaConfig {
    pub fn with_eps(eps: f64) -> Self {
        Self { eps, ..Self::default() }
    }
}

/// Smallest `R²` (and its tail bound) with `exp(−π(1−δ)R²)(2+1/√(δΛ))ⁿ ≤ target`.
pub fn truncation_radius(lambda: f64, n: usize, target: f64) -> (f64, f64) {
    let mut best = (f64::INFINITY, f64::INFINITY);
    for k in 1..100 {
        let delta = k as f64 / 100.0;
        let log_factor = n as f64 * (2.0 + 1.0 / (delta * lambda).sqrt()).ln();
        let r2 = ((log_factor - target.ln()) / (std::f64::consts::PI * (1.0 - delta))).max(0.0);
        if r2 < best.0 {
            let tail = (-std::f64::consts::PI * (1.0 - delta) * r2 + log_factor).exp();
            best = (r2, tail);
        }
    }
    best
}

fn unit_ball_volume(n: usize) -> f64 {
    // V₀ = 1, V₁ = 2, V_n = V_{n−2}·2π/n
    let mut v = [1.0, 2.0];
    for k in 2..=n {
        v[k % 2] *= 2.0 * std::f64::consts::PI / k as f64;
    }
    v[n % 2]
}

fn lcm_denominator<'a>(entries: impl Iterator<Item = &'a BigRational>) -> BigInt {
    entries.fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// `ϑ^S[A;B](τ)` for a positive definite rational `S`.
pub fn theta_general(s: &RatMatrix, ch: &Characteristic, tau: &SiegelPoint, cfg: &ThetaConfig) -> Result<CertifiedValue> {
    let r = s.rows();
    let g = tau.genus();
    if !s.is_square() || ch.rows() != r || ch.genus() != g {
        return Err(Error::DimensionMismatch(format!("S is {}×{}, characteristic {}×{}, genus {g}", s.rows(), s.cols(), ch.rows(), ch.genus())));
    }
    if cfg.eps.is_nan() || cfg.eps < 1e-12 {
        return Err(Error::Precondition(format!("eps = {} is below 1e-12", cfg.eps)));
    }
    let min_y = tau.min_imag_eigenvalue();
    if min_y < cfg.min_imag {
        return Err(Error::Domain(format!("smallest eigenvalue of Im τ is {min_y:.4e}, below {}", cfg.min_imag)));
    }
    let lambda_s = lower_bound_f64(&rational_min_eigen_lower_bound(s)?);
    let n = r * g;
    let lambda = min_y * lambda_s;
    let (r2, tail) = truncation_radius(lambda, n, cfg.eps / 2.0);

    let sf = s.to_f64();
    let (yv, xv) = (tau.imag(), tau.real());
    // (Y⊗S) and (X⊗S) in the vec(N) ordering k·r + i
    let kron = |t: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; n * n];
        for k in 0..g {
            for l in 0..g {
                for i in 0..r {
                    for j in 0..r {
                        out[(k * r + i) * n + l * r + j] = t[k * g + l] * sf[i * r + j];
                    }
                }
            }
        }
        out
    };
    let qy = kron(&yv);
    let qx = kron(&xv);
    let ell = Ellipsoid::new(&qy, n)?;

    let estimate = unit_ball_volume(n) * r2.powf(n as f64 / 2.0) / ell.det().sqrt() + 1.0;
    if estimate > cfg.max_points as f64 {
        return Err(Error::Budget(format!("about {estimate:.3e} lattice points needed")));
    }

    // exact linear phase: 2tr(N'B) = 2·Σ (D·g + a)·b / D²
    let den = lcm_denominator(ch.a.data().iter().chain(ch.b.data()));
    let den_i = den.to_i128().filter(|&d| d <= 1 << 20).ok_or_else(|| Error::ScaleGuard("characteristic denominators too large".into()))?;
    let as_num = |m: &RatMatrix| -> Vec<i128> {
        // vec ordering k·r + i
        (0..n)
            .map(|idx| {
                let (k, i) = (idx / r, idx % r);
                let x = &m[(i, k)];
                (x.numer() * (&den / x.denom())).to_i128().expect("small numerator")
            })
            .collect()
    };
    let a_num = as_num(&ch.a);
    let b_num = as_num(&ch.b);
    let modulus = den_i * den_i;
    let shift: Vec<f64> = a_num.iter().map(|&a| a as f64 / den_i as f64).collect();

    let table: Option<Vec<Complex64>> = (modulus <= 1 << 16).then(|| {
        (0..modulus).map(|t| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * t as f64 / modulus as f64)).collect()
    });
    let phase = |t: i128| -> Complex64 {
        let t = t.rem_euclid(modulus);
        match &table {
            Some(tab) => tab[t as usize],
            None => Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * t as f64 / modulus as f64),
        }
    };

    let cap = cfg.max_points.saturating_mul(2);
    let mut count = 0u64;
    let mut sum = Complex64::zero();
    let mut v = vec![0.0; n];
    let completed = ell.try_for_each(&shift, r2, |x, qval| {
        count += 1;
        if count > cap {
            return false;
        }
        let mut t = 0i128;
        for idx in 0..n {
            v[idx] = x[idx] as f64 + shift[idx];
            t += (den_i * x[idx] as i128 + a_num[idx]) * b_num[idx];
        }
        let mut re_quad = 0.0;
        for a in 0..n {
            let mut row = 0.0;
            for b in 0..n {
                row += qx[a * n + b] * v[b];
            }
            re_quad += row * v[a];
        }
        let mag = (-std::f64::consts::PI * qval).exp();
        let ang = std::f64::consts::PI * re_quad;
        sum += phase(t) * Complex64::from_polar(mag, ang);
        true
    });
    if !completed {
        return Err(Error::Budget(format!("more than {cap} lattice points")));
    }
    Ok(CertifiedValue { value: sum, bound: tail })
}

fn half_integral(v: &[BigRational]) -> bool {
    v.iter().all(|x| (x * BigInt::from(2)).is_integer())
}

/// `ϑ[a;b](τ) = ϑ^{(1)}[a';b'](τ)` for `a, b ∈ ½Zᵍ`.
pub fn theta_nullwert(a: &[BigRational], b: &[BigRational], tau: &SiegelPoint, cfg: &ThetaConfig) -> Result<CertifiedValue> {
    let g = tau.genus();
    if a.len() != g || b.len() != g {
        return Err(Error::DimensionMismatch(format!("characteristic length must be {g}")));
    }
    if !half_integral(a) || !half_integral(b) {
        return Err(Error::Precondition("nullwert characteristics must lie in ½Zᵍ".into()));
    }
    let ch = Characteristic::new(RatMatrix::new(1, g, a.to_vec())?, RatMatrix::new(1, g, b.to_vec())?)?;
    theta_general(&RatMatrix::identity(1), &ch, tau, cfg)
}

/// Whether `ϑ[a;b]` vanishes identically, i.e. `4a'b` is odd.
pub fn is_odd_characteristic(a: &[BigRational], b: &[BigRational]) -> bool {
    let s: BigRational = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let four = s * BigInt::from(4);
    four.is_integer() && four.to_integer().is_odd()
}

/// `ϑ_{S,V}(τ) = Σ_G exp (πi/q) tr(S[G]τ + 2G'V) = ϑ^{S/q}[0; V/q](τ)`.
pub fn theta_sv(s: &GramForm, q: u64, v: &IntMatrix, tau: &SiegelPoint, cfg: &ThetaConfig) -> Result<CertifiedValue> {
    if q == 0 {
        return Err(Error::Precondition("level must be positive".into()));
    }
    let q2 = BigInt::from(q) * BigInt::from(q);
    if !s.scaled_inverse_is_integral(&q2) {
        return Err(Error::Integrality("q²·S⁻¹ is not integral".into()));
    }
    if v.cols() != tau.genus() {
        return Err(Error::DimensionMismatch(format!("V must have {} columns", tau.genus())));
    }
    if !is_isotropic(s, q, v)? {
        return Err(Error::NotIsotropic);
    }
    let inv_q = BigRational::new(BigInt::one(), BigInt::from(q));
    let ch = Characteristic::new(RatMatrix::zeros(v.rows(), v.cols()), v.to_rational().scale(&inv_q))?;
    theta_general(&s.rational().scale(&inv_q), &ch, tau, cfg)
}

/// `f_a(τ) = ϑ[a/2; 0](2τ)`.
pub fn theta_second_kind(a: &[i64], tau: &SiegelPoint, cfg: &ThetaConfig) -> Result<CertifiedValue> {
    let half: Vec<BigRational> = a.iter().map(|&x| BigRational::new(BigInt::from(x), BigInt::from(2))).collect();
    let zero = vec![BigRational::zero(); a.len()];
    theta_nullwert(&half, &zero, &tau.scaled(2.0)?, cfg)
}

/// Both sides of `∏ϑ[aᵢ;bᵢ] = ϑ^{E_r}[C;D]`, where the rows of `C`, `D` are the `aᵢ'`, `bᵢ'`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductCheck {
    pub lhs: CertifiedValue,
    pub rhs: CertifiedValue,
    pub residual: f64,
}

/// Bound on `|∏ xᵢ − ∏ x̃ᵢ|` given `|xᵢ − x̃ᵢ| ≤ eᵢ`.
fn product_error(values: &[CertifiedValue]) -> f64 {
    let exact: f64 = values.iter().map(|v| v.value.norm() + v.bound).product();
    let approx: f64 = values.iter().map(|v| v.value.norm()).product();
    exact - approx
}

pub fn product_formula_check(
    chars: &[(Vec<BigRational>, Vec<BigRational>)],
    tau: &SiegelPoint,
    cfg: &ThetaConfig,
) -> Result<ProductCheck> {
    let g = tau.genus();
    let r = chars.len();
    if r == 0 {
        return Err(Error::Precondition("at least one characteristic is needed".into()));
    }
    let factors = chars.iter().map(|(a, b)| theta_nullwert(a, b, tau, cfg)).collect::<Result<Vec<_>>>()?;
    let value = factors.iter().fold(Complex64::new(1.0, 0.0), |acc, f| acc * f.value);
    let lhs = CertifiedValue { value, bound: product_error(&factors) };
    let c = RatMatrix::from_fn(r, g, |i, k| chars[i].0[k].clone());
    let d = RatMatrix::from_fn(r, g, |i, k| chars[i].1[k].clone());
    let rhs = theta_general(&RatMatrix::identity(r), &Characteristic::new(c, d)?, tau, cfg)?;
    Ok(ProductCheck { lhs, rhs, residual: (lhs.value - rhs.value).norm() })
}

/// Product of nullwerte `∏ϑ[aᵢ;bᵢ](τ)` with a combined truncation bound.
pub fn nullwert_product(chars: &[(Vec<BigRational>, Vec<BigRational>)], tau: &SiegelPoint, cfg: &ThetaConfig) -> Result<CertifiedValue> {
    let factors = chars.iter().map(|(a, b)| theta_nullwert(a, b, tau, cfg)).collect::<Result<Vec<_>>>()?;
    let value = factors.iter().fold(Complex64::new(1.0, 0.0), |acc, f| acc * f.value);
    Ok(CertifiedValue { value, bound: product_error(&factors) })
}
