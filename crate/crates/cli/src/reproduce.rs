//! Ordered reproduction checks, one per acceptance item.

use std::time::Instant;

use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use siegel_theta::dims::{dim_2, dim_2_4, dim_4_8};
use siegel_theta::isotropy::{maximal_isotropic_groups, residue_module, IsotropicGroup};
use siegel_theta::linalg::{rat, GramForm, IntMatrix, RatMatrix};
use siegel_theta::quadform::{enumerate_classes, find_gram_roots, isometric, ClassConstraints, GramRootSearch};
use siegel_theta::relations::{
    check_transformation, kronecker, mumford_relation, random_point, sample_instance, MumfordInstance, SampleLimits,
};
use siegel_theta::span::{fourth_powers_rank, jacobi_kernel_vector, product_rank, second_kind_rank, Family, FourierTable};
use siegel_theta::theta::{
    product_formula_check, theta_general, theta_nullwert, theta_sv, Characteristic, SiegelPoint, ThetaConfig,
};

use crate::commands::{verify_root, InstanceSpec, TRANSFORM_MIN_IMAG};

pub const DEFAULT_SEED: u64 = 20_240_601;

/// Item names in execution order, with their acceptance numbers.
pub const ITEMS: [(&str, u8); 8] = [
    ("classes", 1),
    ("worked-example", 2),
    ("square-det", 3),
    ("mumford", 4),
    ("multiplier", 5),
    ("dims", 6),
    ("ranks", 7),
    ("identities", 8),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub criterion: u8,
    pub name: String,
    pub pass: bool,
    pub seconds: f64,
    pub detail: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub seed: u64,
    pub passed: bool,
    pub items: Vec<CheckOutcome>,
}

type Check = Result<(bool, Value), String>;

fn fail(detail: Value) -> Check {
    Ok((false, detail))
}

/// Runs the selected items (all when `only` is empty) in their fixed order.
pub fn run(only: &[String], seed: u64) -> Result<Report, String> {
    for name in only {
        if !ITEMS.iter().any(|(n, _)| n == name) {
            let known: Vec<&str> = ITEMS.iter().map(|(n, _)| *n).collect();
            return Err(format!("unknown item {name:?}; known items: {}", known.join(", ")));
        }
    }
    let items: Vec<CheckOutcome> = ITEMS
        .iter()
        .filter(|(name, _)| only.is_empty() || only.iter().any(|o| o == name))
        .map(|&(name, criterion)| run_one(name, criterion, seed))
        .collect();
    Ok(Report { seed, passed: items.iter().all(|i| i.pass), items })
}

pub fn run_one(name: &str, criterion: u8, seed: u64) -> CheckOutcome {
    let start = Instant::now();
    let result = match name {
        "classes" => classes(),
        "worked-example" => worked_example(),
        "square-det" => square_det(),
        "mumford" => mumford(seed),
        "multiplier" => multiplier(),
        "dims" => dims(),
        "ranks" => ranks(),
        "identities" => identities(seed),
        other => Err(format!("unknown item {other:?}")),
    };
    let (pass, detail) = result.unwrap_or_else(|e| (false, json!({ "error": e })));
    CheckOutcome { criterion, name: name.to_string(), pass, seconds: start.elapsed().as_secs_f64(), detail }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// The Gram matrix of the worked example (a copy of `D₄`).
pub fn example_form() -> GramForm {
    GramForm::from_rows(&[&[2, 0, 1, 1], &[0, 2, 1, -1], &[1, 1, 2, 0], &[1, -1, 0, 2]]).expect("positive definite")
}

pub fn example_generators() -> [IntMatrix; 3] {
    [
        IntMatrix::from_rows(&[&[0, 0, 0, 1], &[0, 0, 1, 0], &[0, 1, 0, 0], &[2, 1, 0, 0]]),
        IntMatrix::from_rows(&[&[0, 0, 0, 1], &[0, 0, 1, 0], &[0, 1, 0, 0], &[2, 1, 1, 1]]),
        IntMatrix::from_rows(&[&[0, 0, 0, 1], &[0, 0, 2, 1], &[0, 1, 0, 0], &[1, 0, 0, 0]]),
    ]
}

pub fn example_roots() -> [IntMatrix; 3] {
    [
        IntMatrix::from_rows(&[&[0, 1, 0, 0], &[0, 1, 1, -1], &[1, 0, 0, 0], &[1, 0, 1, 1]]),
        IntMatrix::from_rows(&[&[0, 1, 0, -1], &[0, 1, 1, 0], &[1, 0, 0, 1], &[1, 0, 1, 0]]),
        IntMatrix::from_rows(&[&[0, 0, 0, 1], &[0, 0, 1, 0], &[1, 1, 1, 0], &[1, -1, 0, 1]]),
    ]
}

fn classes() -> Check {
    let mut counts = Vec::new();
    for (scale, square, expected) in [(16, true, 138), (4, true, 16), (2, false, 6)] {
        let found = enumerate_classes(&ClassConstraints::new(4, scale, square)).map_err(err)?;
        if found.len() != expected {
            return fail(json!({ "scale": scale, "det_square": square, "expected": expected, "found": found.len() }));
        }
        for (i, a) in found.iter().enumerate() {
            for b in &found[i + 1..] {
                if let Some(u) = isometric(a, b).map_err(err)? {
                    return fail(json!({ "counterexample": { "s1": a.matrix(), "s2": b.matrix(), "u": u } }));
                }
            }
        }
        counts.push(json!({ "scale": scale, "det_square": square, "count": found.len() }));
    }
    Ok((true, json!({ "counts": counts, "pairwise_non_isometric": true })))
}

fn worked_example() -> Check {
    let s = example_form();
    let groups = maximal_isotropic_groups(&s, 4).map_err(err)?;
    if groups.len() != 3 {
        return fail(json!({ "expected_groups": 3, "found": groups.len() }));
    }
    let module = residue_module(&s, 4).map_err(err)?;
    let mut found: Vec<IntMatrix> = groups.iter().map(|l| l.canonical().clone()).collect();
    let mut expected = Vec::new();
    for v in example_generators() {
        expected.push(IsotropicGroup::generated_by(&module, &v).map_err(err)?.canonical().clone());
    }
    found.sort();
    expected.sort();
    if found != expected {
        return fail(json!({ "counterexample": { "found": found, "expected": expected } }));
    }
    let mut roots_found = Vec::new();
    for (i, (v, a)) in example_generators().iter().zip(example_roots()).enumerate() {
        let roots = find_gram_roots(&s, v, 4, false).map_err(err)?;
        let bad = roots.iter().find(|d| !verify_root(&s, v, 4, d.root()).valid);
        if roots.is_empty() || bad.is_some() {
            return fail(json!({ "counterexample": { "v": v, "roots": roots.len(), "bad": bad.map(|d| d.root().clone()) } }));
        }
        let printed_ok = verify_root(&s, v, 4, &a);
        if !printed_ok.valid {
            return fail(json!({ "counterexample": { "printed_root": i + 1, "verification": printed_ok } }));
        }
        roots_found.push(roots.len());
    }
    Ok((true, json!({ "groups": 3, "roots_per_generator": roots_found, "printed_roots_valid": true })))
}

fn square_det() -> Check {
    let classes = enumerate_classes(&ClassConstraints::new(4, 4, true)).map_err(err)?;
    let mut pairs = 0;
    for s in &classes {
        let search = GramRootSearch::new(s, 4, false).map_err(err)?;
        for l in maximal_isotropic_groups(s, 4).map_err(err)? {
            if !search.has_root_for(l.generators()) {
                return fail(json!({ "counterexample": { "s": s.matrix(), "l": l.generators() } }));
            }
            pairs += 1;
        }
    }
    Ok((true, json!({ "classes": classes.len(), "maximal_groups": pairs })))
}

fn mumford(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = ThetaConfig::default();
    let mut worst_residual: f64 = 0.0;
    let mut worst_bound: f64 = 0.0;
    for k in 0..50 {
        let (inst, tau) = sample_instance(&mut rng, &SampleLimits::default()).map_err(err)?;
        let res = mumford_relation(&inst, &tau, &cfg).map_err(err)?;
        let bound = res.lhs.bound + res.rhs.bound;
        if res.residual > bound || bound > 1e-8 {
            return fail(json!({ "counterexample": {
                "index": k, "instance": InstanceSpec::from_instance(&inst), "tau": tau.to_json(), "check": res
            } }));
        }
        worst_residual = worst_residual.max(res.residual);
        worst_bound = worst_bound.max(bound);
    }
    let tight = ThetaConfig::with_eps(1e-12);
    let mut identity_residual: f64 = 0.0;
    for _ in 0..5 {
        let (inst, tau) = sample_instance(&mut rng, &SampleLimits::default()).map_err(err)?;
        let r = inst.t().rows();
        let same = MumfordInstance::new(inst.t().clone(), RatMatrix::identity(r), inst.p().clone(), inst.q().clone()).map_err(err)?;
        let res = mumford_relation(&same, &tau, &tight).map_err(err)?;
        if res.residual > 1e-12 {
            return fail(json!({ "counterexample": { "identity_case": InstanceSpec::from_instance(&same), "tau": tau.to_json(), "check": res } }));
        }
        identity_residual = identity_residual.max(res.residual);
    }
    Ok((true, json!({ "instances": 50, "worst_residual": worst_residual, "worst_bound": worst_bound, "identity_residual": identity_residual })))
}

/// Elements of `Γ₁[4,8]` with a point where `Im Mτ` stays above `0.1`.
pub fn multiplier_samples() -> Vec<(IntMatrix, SiegelPoint)> {
    let at = |x: f64, y: f64| SiegelPoint::from_parts(1, &[x], &[y]).expect("positive imaginary part");
    vec![
        (IntMatrix::from_rows(&[&[13, 8], &[8, 5]]), at(-0.625, 0.15)),
        (IntMatrix::from_rows(&[&[5, -8], &[-8, 13]]), at(1.625, 0.15)),
        (IntMatrix::from_rows(&[&[1, 0], &[8, 1]]), at(-0.125, 0.15)),
        (IntMatrix::from_rows(&[&[1, 8], &[0, 1]]), at(0.3, 0.5)),
    ]
}

fn multiplier() -> Check {
    let cfg = ThetaConfig { min_imag: TRANSFORM_MIN_IMAG, ..ThetaConfig::with_eps(1e-9) };
    let s = GramForm::from_rows(&[&[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 2]]).map_err(err)?;
    let m = IntMatrix::from_rows(&[&[13, 8], &[8, 5]]);
    let tau = SiegelPoint::scalar_imaginary(1, 1.0).map_err(err)?;
    let res = check_transformation(&s, &m, &tau, &cfg).map_err(err)?;
    let minus_one = Complex64::new(-1.0, 0.0);
    if res.epsilon != -1 || kronecker(2, 5) != -1 || (res.ratio - minus_one).norm() > 1e-6 {
        return fail(json!({ "counterexample": { "s": s.matrix(), "check": res } }));
    }
    let samples = multiplier_samples();
    let mut worst: f64 = 0.0;
    let classes = enumerate_classes(&ClassConstraints::new(4, 4, true)).map_err(err)?;
    for (i, form) in classes.iter().enumerate() {
        let (m, tau) = &samples[i % samples.len()];
        let r = check_transformation(form, m, tau, &cfg).map_err(err)?;
        let dev = (r.ratio - Complex64::new(1.0, 0.0)).norm();
        if r.epsilon != 1 || dev > 1e-6 {
            return fail(json!({ "counterexample": { "s": form.matrix(), "m": m, "tau": tau.to_json(), "check": r } }));
        }
        worst = worst.max(dev);
    }
    Ok((true, json!({ "det2_ratio": [res.ratio.re, res.ratio.im], "square_classes": classes.len(), "worst_deviation": worst })))
}

fn dims() -> Check {
    let d2: Vec<String> = (1..=3).map(|g| dim_2(g).map(|r| r.value.to_string())).collect::<Result<_, _>>().map_err(err)?;
    let d24 = dim_2_4(1).map_err(err)?;
    let d48 = [dim_4_8(1).map_err(err)?, dim_4_8(2).map_err(err)?];
    let ok = d2 == ["2", "5", "15"]
        && d24.value == 5.into()
        && d48[0].value == 14.into()
        && d48[1].value == 695.into()
        && d48.iter().all(|r| r.paths_agree())
        && d24.paths_agree();
    let detail = json!({ "dim_2": d2, "dim_2_4": [d24], "dim_4_8": d48 });
    Ok((ok, detail))
}

fn ranks() -> Check {
    let cutoff = 32;
    let p = product_rank(1, 4, cutoff).map_err(err)?;
    let f = second_kind_rank(1, 4, cutoff).map_err(err)?;
    let q = fourth_powers_rank(1, cutoff).map_err(err)?;
    let table = FourierTable::new(Family::Nullwerte, 1, 4, 2 * cutoff).map_err(err)?;
    let witness = table.combine(&jacobi_kernel_vector(&table).map_err(err)?).is_empty();
    let expected = [
        (p.rank, dim_4_8(1).map_err(err)?.value),
        (f.rank, dim_2_4(1).map_err(err)?.value),
        (q.rank, dim_2(1).map_err(err)?.value),
    ];
    let ok = expected.iter().all(|(r, d)| num_bigint::BigInt::from(*r) == *d)
        && [&p, &f, &q].iter().all(|r| r.stabilized && r.exact && r.rank == r.rank_at_double)
        && p.monomials == 15
        && witness;
    Ok((ok, json!({ "products": p, "second_kind": f, "fourth_powers": q, "quartic_kernel_witness": witness })))
}

fn halves(v: &[i64]) -> Vec<BigRational> {
    v.iter().map(|&x| rat(x, 2)).collect()
}

fn identities(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7e7a);
    let cfg = ThetaConfig::default();
    let odd = [([1, 0], [1, 0]), ([1, 0], [1, 1]), ([0, 1], [0, 1]), ([0, 1], [1, 1]), ([1, 1], [1, 0]), ([1, 1], [0, 1])];
    for k in 0..10 {
        let tau = random_point(&mut rng, 2, 0.5).map_err(err)?;
        let (a, b) = odd[k % odd.len()];
        let v = theta_nullwert(&halves(&a), &halves(&b), &tau, &cfg).map_err(err)?;
        if v.value.norm() > v.bound {
            return fail(json!({ "counterexample": { "odd": [a, b], "tau": tau.to_json(), "value": v } }));
        }
    }
    for _ in 0..3 {
        let tau = random_point(&mut rng, 1, 0.5).map_err(err)?;
        let t = |a, b| theta_nullwert(&halves(&[a]), &halves(&[b]), &tau, &cfg).map(|v| v.value.powu(4));
        let residual = (t(0, 0).map_err(err)? - t(0, 1).map_err(err)? - t(1, 0).map_err(err)?).norm();
        if residual > 1e-9 {
            return fail(json!({ "counterexample": { "jacobi": residual, "tau": tau.to_json() } }));
        }
    }
    // shift laws for a rational S and characteristic
    let s = RatMatrix::from_fractions(2, 2, &[(3, 2), (1, 4), (1, 4), (1, 1)]).map_err(err)?;
    let a = RatMatrix::from_fractions(2, 1, &[(1, 3), (-1, 4)]).map_err(err)?;
    let b = RatMatrix::from_fractions(2, 1, &[(1, 2), (1, 4)]).map_err(err)?;
    let n = RatMatrix::from_fractions(2, 1, &[(1, 1), (-2, 1)]).map_err(err)?;
    let tau = random_point(&mut rng, 1, 0.5).map_err(err)?;
    let base = theta_general(&s, &Characteristic::new(a.clone(), b.clone()).map_err(err)?, &tau, &cfg).map_err(err)?;
    let shifted_a = theta_general(&s, &Characteristic::new(&a + &n, b.clone()).map_err(err)?, &tau, &cfg).map_err(err)?;
    let shifted_b = theta_general(&s, &Characteristic::new(a.clone(), &b + &n).map_err(err)?, &tau, &cfg).map_err(err)?;
    // e^{2πi A'N} with A'N = 1/3 + 1/2
    let phase = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (1.0 / 3.0 + 0.5));
    let shift = (shifted_a.value - base.value).norm().max((shifted_b.value - phase * base.value).norm());
    if shift > 1e-10 {
        return fail(json!({ "counterexample": { "shift_residual": shift, "tau": tau.to_json() } }));
    }
    let zero = IntMatrix::zeros(4, 1);
    let mut scaling: f64 = 0.0;
    for form in [GramForm::identity(4), example_form()] {
        let s4 = GramForm::new(form.matrix().scale(&4.into())).map_err(err)?;
        let x = theta_sv(&form, 4, &zero, &tau, &cfg).map_err(err)?;
        let y = theta_sv(&s4, 4, &zero, &tau.scaled(0.25).map_err(err)?, &cfg).map_err(err)?;
        scaling = scaling.max((x.value - y.value).norm());
    }
    if scaling > 1e-10 {
        return fail(json!({ "counterexample": { "scaling_residual": scaling, "tau": tau.to_json() } }));
    }
    let chars: Vec<(Vec<BigRational>, Vec<BigRational>)> =
        (0..4).map(|_| (halves(&[rng.gen_range(0..2)]), halves(&[rng.gen_range(0..2)]))).collect();
    let product = product_formula_check(&chars, &tau, &cfg).map_err(err)?;
    if product.residual > 1e-9 {
        return fail(json!({ "counterexample": { "product": product, "tau": tau.to_json() } }));
    }
    Ok((true, json!({ "odd_points": 10, "jacobi_points": 3, "shift_residual": shift, "scaling_residual": scaling, "product_residual": product.residual })))
}
