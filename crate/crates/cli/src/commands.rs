//! One function per subcommand; each returns a serializable result.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use siegel_theta::dims::{dim, DimFormula, DimReport};
use siegel_theta::isotropy::{is_isotropic, maximal_isotropic_groups, residue_module};
use siegel_theta::linalg::{ExactScalar, GramForm, IntMatrix, RatMatrix};
use siegel_theta::quadform::{enumerate_classes, find_gram_roots, ClassConstraints, GramDecomposition};
use siegel_theta::relations::{check_transformation, epsilon_s, mumford_relation, MumfordInstance, RelationCheck, TransformCheck};
use siegel_theta::span::{span_rank, Family, SpanRank};
use siegel_theta::theta::{
    theta_general, theta_nullwert, theta_second_kind, theta_sv, CertifiedValue, Characteristic, SiegelPoint, ThetaConfig,
};

use crate::error::{CliError, CliResult, Context};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassesOutput {
    pub constraints: ClassConstraints,
    pub count: usize,
    pub classes: Vec<IntMatrix>,
}

pub fn classes(constraints: ClassConstraints) -> CliResult<ClassesOutput> {
    let found = enumerate_classes(&constraints).context("class enumeration")?;
    Ok(ClassesOutput { constraints, count: found.len(), classes: found.into_iter().map(|s| s.matrix().clone()).collect() })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupOutput {
    pub generators: IntMatrix,
    pub canonical: IntMatrix,
    pub order: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaximalGroupsOutput {
    pub level: u64,
    pub module_order: String,
    pub divisors: Vec<String>,
    pub count: usize,
    pub groups: Vec<GroupOutput>,
}

pub fn maximal_groups(s: &GramForm, q: u64) -> CliResult<MaximalGroupsOutput> {
    let module = residue_module(s, q).context("residue module")?;
    let groups = maximal_isotropic_groups(s, q).context("maximal isotropic groups")?;
    Ok(MaximalGroupsOutput {
        level: q,
        module_order: module.order().to_string(),
        divisors: module.divisors().iter().map(BigInt::to_string).collect(),
        count: groups.len(),
        groups: groups
            .iter()
            .map(|l| GroupOutput { generators: l.generators().clone(), canonical: l.canonical().clone(), order: l.order().to_string() })
            .collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsotropyTestOutput {
    pub level: u64,
    pub isotropic: bool,
}

pub fn isotropy_test(s: &GramForm, q: u64, v: &IntMatrix) -> CliResult<IsotropyTestOutput> {
    Ok(IsotropyTestOutput { level: q, isotropic: is_isotropic(s, q, v).context("isotropy test")? })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GramRootOutput {
    pub level: u64,
    pub count: usize,
    pub roots: Vec<IntMatrix>,
}

pub fn gram_roots(s: &GramForm, v: &IntMatrix, q: u64, dedup: bool) -> CliResult<GramRootOutput> {
    let found = find_gram_roots(s, v, q, dedup).context("Gram root search")?;
    Ok(GramRootOutput { level: q, count: found.len(), roots: found.iter().map(|d| d.root().clone()).collect() })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootVerification {
    pub gram: bool,
    pub scaled_inverse_integral: bool,
    pub transports: bool,
    pub valid: bool,
}

/// Checks `A'A = S`, `qA⁻¹` integral and `A'⁻¹V` integral.
pub fn verify_root(s: &GramForm, v: &IntMatrix, q: u64, a: &IntMatrix) -> RootVerification {
    let gram = a.rows() == s.dim() && a.transpose().checked_mul(a).map(|x| &x == s.matrix()).unwrap_or(false);
    let (scaled, transports) = match GramDecomposition::new(s.clone(), a.clone()) {
        Ok(d) => (d.scaled_inverse_integral(q), d.transports(v)),
        Err(_) => (false, false),
    };
    RootVerification { gram, scaled_inverse_integral: scaled, transports, valid: gram && scaled && transports }
}

/// What `theta eval` evaluates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ThetaSpec {
    /// `ϑ^S[A;B]`
    General { s: RatMatrix, a: RatMatrix, b: RatMatrix },
    /// `ϑ[a;b]`, entries as rationals
    Nullwert { a: Vec<Value>, b: Vec<Value> },
    /// `ϑ_{S,V}` at level `q`
    Sv { form: IntMatrix, level: u64, v: IntMatrix },
    /// `f_a`
    SecondKind { a: Vec<i64> },
}

fn rationals(v: &[Value]) -> CliResult<Vec<BigRational>> {
    v.iter().map(|x| BigRational::decode(x).context("characteristic entry")).collect()
}

pub fn theta_eval(spec: &ThetaSpec, tau: &SiegelPoint, cfg: &ThetaConfig) -> CliResult<CertifiedValue> {
    match spec {
        ThetaSpec::General { s, a, b } => {
            let ch = Characteristic::new(a.clone(), b.clone()).context("characteristic")?;
            theta_general(s, &ch, tau, cfg).context("theta evaluation")
        }
        ThetaSpec::Nullwert { a, b } => theta_nullwert(&rationals(a)?, &rationals(b)?, tau, cfg).context("theta evaluation"),
        ThetaSpec::Sv { form, level, v } => {
            let s = GramForm::new(form.clone()).context("form")?;
            theta_sv(&s, *level, v, tau, cfg).context("theta evaluation")
        }
        ThetaSpec::SecondKind { a } => theta_second_kind(a, tau, cfg).context("theta evaluation"),
    }
}

/// `T`, `A`, `P`, `Q` of one relation instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub t: RatMatrix,
    pub a: RatMatrix,
    pub p: RatMatrix,
    pub q: RatMatrix,
}

impl InstanceSpec {
    pub fn from_instance(inst: &MumfordInstance) -> Self {
        Self { t: inst.t().clone(), a: inst.a().clone(), p: inst.p().clone(), q: inst.q().clone() }
    }

    pub fn build(&self) -> CliResult<MumfordInstance> {
        MumfordInstance::new(self.t.clone(), self.a.clone(), self.p.clone(), self.q.clone()).context("relation instance")
    }
}

pub fn mumford(spec: &InstanceSpec, tau: &SiegelPoint, cfg: &ThetaConfig) -> CliResult<RelationCheck> {
    mumford_relation(&spec.build()?, tau, cfg).context("relation check")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpsilonOutput {
    pub epsilon: i32,
    pub det_s: String,
    pub det_d: String,
}

pub fn epsilon(s: &GramForm, m: &IntMatrix) -> CliResult<EpsilonOutput> {
    let e = epsilon_s(s, m).context("multiplier")?;
    let g = m.rows() / 2;
    let d = m.select_rows(g..2 * g).select_columns(g..2 * g);
    Ok(EpsilonOutput { epsilon: e, det_s: s.det().to_string(), det_d: d.det().to_string() })
}

/// Domain guard used by `transform-check`: `Im Mτ` is small for the witness matrices.
pub const TRANSFORM_MIN_IMAG: f64 = 0.005;

pub fn transform_check(s: &GramForm, m: &IntMatrix, tau: &SiegelPoint, cfg: &ThetaConfig) -> CliResult<TransformCheck> {
    check_transformation(s, m, tau, cfg).context("transformation check")
}

pub fn dims(which: DimFormula, g: u32) -> CliResult<DimReport> {
    dim(which, g).context("dimension formula")
}

pub fn span(genus: usize, degree: usize, cutoff: i64, family: Family) -> CliResult<SpanRank> {
    if family == Family::FourthPowers && degree != 4 {
        return Err(CliError::Usage("--fourth-powers needs --degree 4".into()));
    }
    span_rank(family, genus, degree, cutoff).context("span rank")
}
