//! End-to-end gate suite: one test per headline guarantee of the library,
//! each with a wall-clock budget pinned in code.
//!
//! The gates cover, in order: the closed form of the twisted zeta of the
//! projective line; agreement of the symbolic Euler product with the literal
//! product over closed points; the two flagship section-counting families
//! (rational functions and polynomials) end to end; the projective-space
//! families with their convergence certificates and weight-decay staircases;
//! genus-one correction classes and their weight ceilings; Poisson summation
//! over the rational function field; the certificate algebra itself; and five
//! randomized invariant suites of 200 cases each.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use proptest::strategy::BoxedStrategy;
use proptest::test_runner::{Config as PropConfig, TestRunner};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use fqoracle::euler::{euler_coeff_bruteforce, PlacePosition};
use fqoracle::sb::poisson_check;
use motivic::convergence::{
    combine_product_certs, negligible_bound, ConvergenceError, LinearConvCert,
};
use motivic::curvezeta::{euler_product_over_curve, zeta_series, CurveData};
use motivic::heightzeta::{Instance, LimitValue, Pipeline};
use motivic::motive::{MotiveElt, SymbolDecl, SymbolTable, Weight};
use motivic::mvseries::{graded_indices, DegreeForm, MSeries, MultiIndex, VarSet};
use motivic_cli::{
    euler_factor_agrees, load_instance, random_poisson_problem, random_tame_factor,
    sections_cross_check, structured_poisson_problems,
};

/// Wall-clock budget for one gate; `done` asserts the gate stayed inside it.
struct Budget {
    label: &'static str,
    cap: Duration,
    started: Instant,
}

impl Budget {
    fn start(label: &'static str, secs: u64) -> Self {
        Budget {
            label,
            cap: Duration::from_secs(secs),
            started: Instant::now(),
        }
    }

    fn done(self) {
        let elapsed = self.started.elapsed();
        println!(
            "{}: pass in {:.2?} (budget {:?})",
            self.label, elapsed, self.cap
        );
        assert!(
            elapsed <= self.cap,
            "{} exceeded its {:?} budget: took {:.2?}",
            self.label,
            self.cap,
            elapsed
        );
    }
}

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn pipeline(name: &str) -> Pipeline {
    let inst: Instance = load_instance(&config_path(name), None).expect("config loads");
    Pipeline::new(inst).expect("pipeline assembles")
}

fn idx(entries: &[u32]) -> MultiIndex {
    MultiIndex(entries.to_vec())
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn int_rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `1 - L^e` as a motive class.
fn one_minus_lef(e: i64) -> MotiveElt {
    MotiveElt::one().sub(&MotiveElt::lefschetz(e))
}

/// Coefficient of the twisted projective-line zeta at degree `m`, times
/// `1 - L^{-1}`, must close to `(1 - L^{-m-1}) L^{rho m}` for every height
/// weight `rho`.
#[test]
fn gate_1_projective_line_zeta_matches_closed_form() {
    let budget = Budget::start("gate 1 (projective-line zeta closed form)", 1);
    let curve = CurveData::projective_line();
    let vars = VarSet::plain(&["t".to_owned()]);
    let form = DegreeForm::new(vec![1]).unwrap();
    let delta = MultiIndex::unit(1, 0);
    let shift = one_minus_lef(-1);
    for rho in 2i64..=4 {
        let z = zeta_series(&curve, &vars, &form, 30, rho - 1, &delta).unwrap();
        for m in 0u32..=30 {
            let c = z.coefficient(&idx(&[m])).unwrap();
            let lhs = c.mul(&shift);
            let rhs = one_minus_lef(-(m as i64) - 1).mul_lefschetz(rho * m as i64);
            assert_eq!(lhs, rhs, "closed form fails at degree {m}, weight {rho}");
        }
    }
    budget.done();
}

/// Twenty seeded random local factors, expanded symbolically over the
/// projective line, must agree coefficient-by-coefficient with the literal
/// product over closed points after specializing at q = 2 and q = 3.
#[test]
fn gate_2_euler_products_agree_with_point_count_oracle() {
    let budget = Budget::start("gate 2 (Euler product vs. point-count oracle)", 60);
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut checked = 0;
    for trial in 0..20 {
        let f = random_tame_factor(&mut rng, 5).unwrap();
        assert!(
            euler_factor_agrees(&f, &[2, 3], 5).unwrap(),
            "trial {trial} disagrees with the literal product"
        );
        checked += 1;
    }
    assert_eq!(checked, 20);
    budget.done();
}

/// The rational-function family: closed-form moduli classes, the exact
/// stable value `L - L^{-1}`, and literal section counts over small fields.
#[test]
fn gate_3_rational_function_family_end_to_end() {
    let budget = Budget::start("gate 3 (rational-function family)", 30);
    let pipe = pipeline("flagshipA.json");

    assert_eq!(
        pipe.moduli_class(&idx(&[0])).unwrap(),
        MotiveElt::lefschetz(1)
    );
    for d in 1u32..=10 {
        let e = 2 * d as i64;
        let expect = MotiveElt::lefschetz(e + 1).sub(&MotiveElt::lefschetz(e - 1));
        assert_eq!(pipe.moduli_class(&idx(&[d])).unwrap(), expect, "degree {d}");
    }

    let stable = MotiveElt::lefschetz(1).sub(&MotiveElt::lefschetz(-1));
    let limit = pipe.predicted_limit().unwrap();
    match &limit.value {
        LimitValue::Exact(v) => assert_eq!(v, &stable),
        other => panic!("expected an exact stable value, got {other:?}"),
    }
    for d in 1u32..=10 {
        assert_eq!(
            pipe.normalized_class(&idx(&[d])).unwrap(),
            stable,
            "normalized class at degree {d}"
        );
    }
    let diff = pipe.difference_series(&limit.value).unwrap();
    for (m, c) in diff.support() {
        assert!(m.is_zero(), "difference persists at {m:?}: {c:?}");
    }
    let conv = pipe.convergence_report().unwrap();
    assert_eq!(conv.exact_from, Some(1));
    assert!(conv.rate_ok);

    for (q, max_d, expect) in [(2u64, 3u32, vec![2i64, 6, 24, 96]), (3, 2, vec![])] {
        let rows = sections_cross_check(&pipe, q, max_d).unwrap();
        assert_eq!(rows.len(), max_d as usize + 1);
        for row in &rows {
            assert_eq!(row.agree, Some(true), "q={q}, degree {}", row.height);
        }
        for (row, want) in rows.iter().zip(expect) {
            assert_eq!(
                row.literal.as_ref(),
                Some(&BigInt::from(want)),
                "literal count at q={q}, degree {}",
                row.height
            );
        }
    }
    budget.done();
}

/// The polynomial family: moduli `(L-1) L^m`, the exact stable value
/// `L - 1` attained at every degree, and literal counts `(q-1) q^m`.
#[test]
fn gate_4_polynomial_family_end_to_end() {
    let budget = Budget::start("gate 4 (polynomial family)", 30);
    let pipe = pipeline("flagshipB.json");

    let stable = MotiveElt::lefschetz(1).sub(&MotiveElt::one());
    for m in 0u32..=10 {
        let expect = stable.mul_lefschetz(m as i64);
        assert_eq!(pipe.moduli_class(&idx(&[m])).unwrap(), expect, "degree {m}");
        assert_eq!(
            pipe.normalized_class(&idx(&[m])).unwrap(),
            stable,
            "normalized class at degree {m}"
        );
    }
    let limit = pipe.predicted_limit().unwrap();
    match &limit.value {
        LimitValue::Exact(v) => assert_eq!(v, &stable),
        other => panic!("expected an exact stable value, got {other:?}"),
    }
    let diff = pipe.difference_series(&limit.value).unwrap();
    assert_eq!(diff.num_nonzero(), 0, "stable value attained everywhere");
    let conv = pipe.convergence_report().unwrap();
    assert_eq!(conv.exact_from, Some(0));
    assert!(conv.rate_ok);

    for q in [2u64, 3] {
        let rows = sections_cross_check(&pipe, q, 6).unwrap();
        assert_eq!(rows.len(), 7);
        for row in &rows {
            assert_eq!(row.agree, Some(true), "q={q}, degree {}", row.height);
            let want = BigInt::from(q - 1) * BigInt::from(q).pow(row.height);
            assert_eq!(
                row.literal.as_ref(),
                Some(&want),
                "literal count at q={q}, degree {}",
                row.height
            );
        }
    }
    budget.done();
}

/// Projective-space families: the local factor certifies at the standard
/// rates `delta = 1/(2(N+1))`, `delta' = 1/(N+1)`, the observed weight decay
/// of the difference to the stable value staircases at least that fast at
/// every computed degree, and literal section counts match for N = 2.
#[test]
fn gate_5_projective_space_certificates_and_decay() {
    let budget = Budget::start("gate 5 (projective-space certificates)", 180);
    let pinned_rows: [&[(u64, i64)]; 2] = [&[(3, 0), (6, -2), (9, -4), (12, -6)], &[(4, 2), (8, 0), (12, -2)]];
    for (which, (name, n)) in [("p2.json", 2i64), ("p3.json", 3)].into_iter().enumerate() {
        let pipe = pipeline(name);
        let conv = pipe.convergence_report().unwrap();

        assert_eq!(conv.local_cert.delta(), &rat(1, 2 * (n + 1)), "{name}");
        assert_eq!(conv.local_cert.delta_prime(), &rat(1, n + 1), "{name}");
        assert!(conv.place_certs.is_empty(), "{name} has no special places");
        assert!(conv.rate_ok, "{name} staircase at the combined rate");

        let rows: Vec<(u64, i64)> = conv
            .decay
            .rows
            .iter()
            .filter_map(|r| r.observed.map(|w| (r.degree, w)))
            .collect();
        assert_eq!(rows, pinned_rows[which], "{name} observed decay rows");

        // Staircase at the certified per-factor rate: between any two
        // computed degrees the observed weight must drop by at least
        // delta' per unit of height degree.
        let dprime = conv.local_cert.delta_prime().clone();
        for i in 0..rows.len() {
            for j in (i + 1)..rows.len() {
                let (di, wi) = rows[i];
                let (dj, wj) = rows[j];
                let ceiling = int_rat(wi) - dprime.clone() * int_rat((dj - di) as i64);
                assert!(
                    int_rat(wj) <= ceiling,
                    "{name}: weight at degree {dj} is {wj}, above {ceiling} from degree {di}"
                );
            }
        }
    }

    let p2 = pipeline("p2.json");
    let rows = sections_cross_check(&p2, 2, 2).unwrap();
    let expect = [4i64, 36, 312];
    assert_eq!(rows.len(), 3);
    for (row, want) in rows.iter().zip(expect) {
        assert_eq!(row.agree, Some(true), "plane sections at degree {}", row.height);
        assert_eq!(row.literal.as_ref(), Some(&BigInt::from(want)));
    }
    budget.done();
}

/// Genus one: correction classes vanish beyond degree `2g - 2 = 0`, and the
/// weight of every computed coefficient of the correction component stays
/// under the certified ceiling.
#[test]
fn gate_6_genus_one_corrections_and_weight_bounds() {
    let budget = Budget::start("gate 6 (genus-one corrections)", 10);
    let pipe = pipeline("genus1.json");

    for m in 1u64..=12 {
        assert!(
            pipe.instance.curve.kapranov_correction(m).is_zero(),
            "correction class persists at degree {m}"
        );
    }
    let h = pipe.h_component_report().unwrap();
    assert!(h.support_ok, "correction support exceeds 2g - 2");
    assert_eq!(h.max_correction_degree, Some(0));
    assert!(!h.rows.is_empty(), "no computed coefficients to bound");
    for row in &h.rows {
        assert!(
            row.ok,
            "weight ceiling fails at {:?}: observed {:?}, allowed {}",
            row.index, row.observed, row.allowed
        );
    }
    assert!(h.bounds_hold);
    budget.done();
}

/// Poisson summation over the rational function field: the literal sum of a
/// product test function over the global points equals its dual sum, as an
/// exact cyclotomic identity, on a structured battery and on seeded random
/// products in dimensions one and two.
#[test]
fn gate_7_poisson_summation_structured_and_random() {
    let budget = Budget::start("gate 7 (Poisson summation)", 60);
    for q in [2u64, 3] {
        let structured = structured_poisson_problems(q);
        assert!(structured.len() >= 10);
        for (i, problem) in structured.iter().enumerate() {
            let report = poisson_check(problem).unwrap();
            assert!(report.equal, "structured problem {i} at q={q}");
        }
        let mut rng = StdRng::seed_from_u64(0x5eed ^ q);
        for i in 0..20 {
            let dim = rng.gen_range(1..=2);
            let problem = random_poisson_problem(&mut rng, q, dim);
            let report = poisson_check(&problem).unwrap();
            assert!(report.equal, "random problem {i} at q={q}, dim {dim}");
        }
    }
    budget.done();
}

/// The certificate algebra itself: the rate formulas on a grid where no
/// clamping applies, the cut-free normal form, the effect of the tail slack,
/// rejection of nonpositive rates, the half-rate product rule, and the
/// max-rule convolution bound against exhaustively computed weights.
#[test]
fn gate_8_certificate_algebra_and_convolution_bounds() {
    let budget = Budget::start("gate 8 (certificate algebra)", 5);

    // Rate formula with a cut: delta = min(eps / M, 1 - alpha) whenever
    // eps <= M/2, and delta' = 2 delta at ambient weight 2 with no slack.
    for m_cut in [1u64, 2, 3, 4, 6] {
        let m = m_cut as i64;
        for eps in [rat(1, 4), rat(1, 2), rat(m, 4), rat(m, 2)] {
            for alpha in [rat(0, 1), rat(1, 2), rat(3, 4)] {
                let cert = LinearConvCert::new(
                    2,
                    m_cut,
                    eps.clone(),
                    alpha.clone(),
                    BigRational::zero(),
                )
                .unwrap();
                let expect = (eps.clone() / int_rat(m)).min(BigRational::one() - alpha.clone());
                assert_eq!(cert.delta(), &expect, "M={m_cut}, eps={eps}, alpha={alpha}");
                assert_eq!(cert.delta_prime(), &(rat(2, 1) * expect));
            }
        }
    }

    // Cut-free normal form: delta = 1 - max(alpha, 1/2).
    for (alpha, want) in [
        (rat(0, 1), rat(1, 2)),
        (rat(1, 2), rat(1, 2)),
        (rat(3, 4), rat(1, 4)),
    ] {
        let cert = LinearConvCert::new(2, 0, rat(1, 2), alpha, BigRational::zero()).unwrap();
        assert_eq!(cert.delta(), &want);
        assert_eq!(cert.delta_prime(), &(rat(2, 1) * want));
    }

    // Tail slack beta lowers the geometric rate by 2 beta / (M + 1).
    let cert = LinearConvCert::new(2, 2, rat(1, 2), rat(3, 4), rat(1, 3)).unwrap();
    assert_eq!(cert.delta(), &rat(1, 4));
    assert_eq!(cert.delta_prime(), &rat(5, 18));

    // A slack large enough to kill the rate is rejected outright.
    assert!(matches!(
        LinearConvCert::new(2, 6, rat(1, 4), rat(1, 2), rat(1, 3)),
        Err(ConvergenceError::NonPositiveRate(_))
    ));

    // Product rule: half the slowest factor rate, in cut-free form.
    let c2 = LinearConvCert::standard(2).unwrap();
    let c3 = LinearConvCert::standard(3).unwrap();
    assert_eq!(c2.delta(), &rat(1, 4));
    assert_eq!(c3.delta(), &rat(1, 6));
    let combined = combine_product_certs(&[c2, c3]).unwrap();
    assert_eq!(combined.m_cut(), 0);
    assert_eq!(combined.delta(), &rat(1, 12));
    assert_eq!(combined.delta_prime(), &rat(1, 6));
    let c1 = LinearConvCert::standard(1).unwrap();
    let c4 = LinearConvCert::standard(4).unwrap();
    let wide = combine_product_certs(&[c1, c4]).unwrap();
    assert_eq!(wide.delta(), &rat(1, 16));

    // Convolution bound: multiply a series of known coefficient weights by a
    // kernel losing 2<eps, k> of weight at offset k, then compare every
    // literal product weight to the max-rule bound, through degree 20.
    let mut table = SymbolTable::new();
    let w = table
        .declare(SymbolDecl {
            name: "W".to_owned(),
            weight: 1,
            effective: true,
            counts: BTreeMap::new(),
        })
        .unwrap();
    let vars = VarSet::plain(&["x".to_owned(), "y".to_owned()]);
    let form = DegreeForm::new(vec![1, 1]).unwrap();

    let mut profile: BTreeMap<MultiIndex, i64> = BTreeMap::new();
    let mut a = MSeries::zero(Arc::clone(&vars), form.clone(), 20).unwrap();
    for i in 1u32..=6 {
        for j in 0u32..=(6 - i) {
            let lexp = 3 - 2 * i as i64 + j as i64;
            let coeff = if (i + j) % 2 == 1 {
                MotiveElt::symbol(&w).mul_lefschetz(lexp)
            } else {
                MotiveElt::lefschetz(lexp)
            };
            profile.insert(idx(&[i, j]), 2 * lexp + ((i + j) % 2) as i64);
            a.set_coeff(idx(&[i, j]), coeff).unwrap();
        }
    }
    let mut kernel = MSeries::zero(Arc::clone(&vars), form.clone(), 20).unwrap();
    for g in graded_indices(2, &form, 20) {
        let (g0, g1) = (g.0[0] as i64, g.0[1] as i64);
        let drop = (3 * g0 + 2 * g1 + 5).div_euclid(6);
        kernel.set_coeff(g, MotiveElt::lefschetz(-drop)).unwrap();
    }
    let product = a.series_mul(&kernel).unwrap();
    let eps = vec![rat(1, 2), rat(1, 3)];
    for m in graded_indices(2, &form, 20) {
        let bound = negligible_bound(&profile, &eps, &m).unwrap();
        let observed = product.coefficient(&m).unwrap().weight();
        match (observed, bound) {
            (Weight::NegInf, _) => {}
            (Weight::Finite(wv), Some(ceiling)) => assert!(
                int_rat(wv) <= ceiling,
                "weight {wv} above ceiling {ceiling} at {m:?}"
            ),
            (Weight::Finite(wv), None) => {
                panic!("weight {wv} at {m:?} where the bound says nothing reaches")
            }
        }
    }
    // The bound is attained where a single term contributes.
    assert_eq!(
        product.coefficient(&idx(&[1, 0])).unwrap().weight(),
        Weight::Finite(3)
    );
    assert_eq!(
        negligible_bound(&profile, &eps, &idx(&[1, 0])).unwrap(),
        Some(rat(3, 1))
    );
    // Indices under every supported one are certified unreachable.
    assert_eq!(negligible_bound(&profile, &eps, &idx(&[0, 7])).unwrap(), None);
    assert_eq!(
        product.coefficient(&idx(&[0, 7])).unwrap().weight(),
        Weight::NegInf
    );
    budget.done();
}

fn prop_cfg() -> PropConfig {
    PropConfig {
        cases: 200,
        failure_persistence: None,
        ..PropConfig::default()
    }
}

/// Random motive classes: short signed sums of `L^e W^a P^b`.
fn motive_strategy(table: &SymbolTable) -> BoxedStrategy<MotiveElt> {
    let w = table.get("W").unwrap();
    let p = table.get("P").unwrap();
    proptest::collection::vec((-4i64..=4i64, -3i64..=3i64, 0u32..3u32, 0u32..3u32), 0..5)
        .prop_map(move |terms| {
            let mut acc = MotiveElt::zero();
            for (c, e, wp, pp) in terms {
                if c == 0 {
                    continue;
                }
                let mut syms = Vec::new();
                if wp > 0 {
                    syms.push((w.clone(), wp));
                }
                if pp > 0 {
                    syms.push((p.clone(), pp));
                }
                acc = acc.add(&MotiveElt::term(BigInt::from(c), e, &syms));
            }
            acc
        })
        .boxed()
}

/// Random Laurent-in-`L` classes (no symbols), for local factors.
fn laurent_strategy() -> BoxedStrategy<MotiveElt> {
    proptest::collection::vec((-2i64..=2i64, -2i64..=2i64), 0..3)
        .prop_map(|terms| {
            let mut acc = MotiveElt::zero();
            for (c, e) in terms {
                if c == 0 {
                    continue;
                }
                acc = acc.add(&MotiveElt::lefschetz(e).scale(&BigInt::from(c)));
            }
            acc
        })
        .boxed()
}

/// Random truncated series over the given variables, coefficients drawn
/// from `coeffs`, support inside the graded bound.
fn series_strategy(
    vars: &Arc<VarSet>,
    form: &DegreeForm,
    bound: u64,
    coeffs: BoxedStrategy<MotiveElt>,
) -> BoxedStrategy<MSeries> {
    let indices = graded_indices(vars.len(), form, bound);
    let vars = Arc::clone(vars);
    let form = form.clone();
    proptest::collection::vec((0..indices.len(), coeffs), 0..6)
        .prop_map(move |entries| {
            let mut s = MSeries::zero(Arc::clone(&vars), form.clone(), bound).unwrap();
            for (i, c) in entries {
                if !c.is_zero() {
                    s.set_coeff(indices[i].clone(), c).unwrap();
                }
            }
            s
        })
        .boxed()
}

/// Random local factors: constant term 1, Laurent coefficients above.
fn factor_strategy(bound: u64) -> BoxedStrategy<MSeries> {
    let vars = VarSet::plain(&["a".to_owned()]);
    let form = DegreeForm::new(vec![1]).unwrap();
    proptest::collection::vec(laurent_strategy(), bound as usize)
        .prop_map(move |coeffs| {
            let mut f = MSeries::one(Arc::clone(&vars), form.clone(), bound).unwrap();
            for (m, c) in coeffs.into_iter().enumerate() {
                if !c.is_zero() {
                    f.set_coeff(idx(&[m as u32 + 1]), c).unwrap();
                }
            }
            f
        })
        .boxed()
}

/// Rebuilds a series at a lower graded bound, dropping what falls outside.
fn truncate(s: &MSeries, bound: u64) -> MSeries {
    let mut out = MSeries::zero(Arc::clone(s.vars()), s.form().clone(), bound).unwrap();
    for (m, c) in s.support() {
        if s.form().degree(m) <= bound {
            out.set_coeff(m.clone(), c.clone()).unwrap();
        }
    }
    out
}

/// Coefficient-wise equality through the graded bound.
fn series_eq(x: &MSeries, y: &MSeries, bound: u64) -> bool {
    graded_indices(x.vars().len(), x.form(), bound)
        .into_iter()
        .all(|m| x.coefficient(&m).unwrap() == y.coefficient(&m).unwrap())
}

fn weight_max(x: Weight, y: Weight) -> Weight {
    match (x, y) {
        (Weight::NegInf, w) | (w, Weight::NegInf) => w,
        (Weight::Finite(a), Weight::Finite(b)) => Weight::Finite(a.max(b)),
    }
}

fn weight_sum(x: Weight, y: Weight) -> Weight {
    match (x, y) {
        (Weight::Finite(a), Weight::Finite(b)) => Weight::Finite(a + b),
        _ => Weight::NegInf,
    }
}

fn weight_le(x: Weight, y: Weight) -> bool {
    match (x, y) {
        (Weight::NegInf, _) => true,
        (Weight::Finite(_), Weight::NegInf) => false,
        (Weight::Finite(a), Weight::Finite(b)) => a <= b,
    }
}

/// Five randomized invariant suites, 200 cases each: ring axioms, weight
/// behavior under sum and product, truncation coherence of multiplication,
/// multiplicativity of the Euler product in the generic factor, and
/// invariance of the literal product under cutting out one place.
#[test]
fn gate_9_randomized_invariant_suites() {
    let budget = Budget::start("gate 9 (randomized invariant suites)", 60);

    let mut table = SymbolTable::new();
    table
        .declare(SymbolDecl {
            name: "W".to_owned(),
            weight: 1,
            effective: true,
            counts: BTreeMap::new(),
        })
        .unwrap();
    table
        .declare(SymbolDecl {
            name: "P".to_owned(),
            weight: 3,
            effective: true,
            counts: BTreeMap::new(),
        })
        .unwrap();
    let pic0 = table
        .declare(SymbolDecl {
            name: "Pic0".to_owned(),
            weight: 2,
            effective: true,
            counts: BTreeMap::new(),
        })
        .unwrap();
    let elt = motive_strategy(&table);

    // Commutative ring axioms.
    let mut runner = TestRunner::new(prop_cfg());
    runner
        .run(&(elt.clone(), elt.clone(), elt.clone()), |(a, b, c)| {
            prop_assert_eq!(a.add(&b), b.add(&a));
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            prop_assert_eq!(a.mul(&MotiveElt::one()), a.clone());
            prop_assert_eq!(a.add(&MotiveElt::zero()), a.clone());
            prop_assert_eq!(a.sub(&a), MotiveElt::zero());
            Ok(())
        })
        .unwrap();

    // Weight: subadditive under sum with equality at distinct weights,
    // additive under product of nonzero classes.
    let mut runner = TestRunner::new(prop_cfg());
    runner
        .run(&(elt.clone(), elt.clone()), |(a, b)| {
            let (wa, wb) = (a.weight(), b.weight());
            prop_assert!(weight_le(a.add(&b).weight(), weight_max(wa, wb)));
            if wa != wb {
                prop_assert_eq!(a.add(&b).weight(), weight_max(wa, wb));
            }
            prop_assert_eq!(a.mul(&b).weight(), weight_sum(wa, wb));
            Ok(())
        })
        .unwrap();

    // Truncation coherence: multiplying then truncating equals truncating
    // then multiplying, at every lower bound.
    let vars2 = VarSet::plain(&["x".to_owned(), "y".to_owned()]);
    let form2 = DegreeForm::new(vec![1, 2]).unwrap();
    let series = series_strategy(&vars2, &form2, 8, motive_strategy(&table));
    let mut runner = TestRunner::new(prop_cfg());
    runner
        .run(&(series.clone(), series.clone(), 0u64..=8), |(f, g, cut)| {
            let full = f.series_mul(&g).unwrap();
            let lhs = truncate(&full, cut);
            let rhs = truncate(&f, cut).series_mul(&truncate(&g, cut)).unwrap();
            prop_assert!(series_eq(&lhs, &rhs, cut));
            Ok(())
        })
        .unwrap();

    // Euler-product multiplicativity in the generic factor, over a genus-0
    // and a genus-1 base.
    let curves = [
        CurveData::projective_line(),
        CurveData::new(1, MotiveElt::symbol(&pic0), vec![]).unwrap(),
    ];
    let factors = factor_strategy(4);
    let mut runner = TestRunner::new(prop_cfg());
    runner
        .run(
            &(factors.clone(), factors.clone(), 0usize..2),
            |(f, g, which)| {
                let curve = &curves[which];
                let sf = euler_product_over_curve(&f, &[], curve).unwrap();
                let sg = euler_product_over_curve(&g, &[], curve).unwrap();
                let fg = f.series_mul(&g).unwrap();
                let sfg = euler_product_over_curve(&fg, &[], curve).unwrap();
                prop_assert!(series_eq(&sfg, &sf.series_mul(&sg).unwrap(), 4));
                Ok(())
            },
        )
        .unwrap();

    // Place cutting: overriding a place with its own generic copy changes
    // nothing, and overriding it with 1 divides out exactly that place's
    // local factor from the literal product.
    let vars1 = VarSet::plain(&["a".to_owned()]);
    let form1 = DegreeForm::new(vec![1]).unwrap();
    let ones = MSeries::one(Arc::clone(&vars1), form1.clone(), 3).unwrap();
    let cuts = [
        (PlacePosition::Finite(0), 2u64),
        (PlacePosition::Infinity, 2),
        (PlacePosition::Finite(1), 3),
        (PlacePosition::Infinity, 3),
    ];
    let factors3 = factor_strategy(3);
    let mut runner = TestRunner::new(prop_cfg());
    runner
        .run(&(factors3.clone(), 0usize..4), |(f, pick)| {
            let (v, q) = cuts[pick];
            for m in 0u32..=3 {
                let full = euler_coeff_bruteforce(&f, &[], q, &idx(&[m])).unwrap();
                let same =
                    euler_coeff_bruteforce(&f, &[(v, f.clone())], q, &idx(&[m])).unwrap();
                prop_assert_eq!(&full, &same);
                let mut convolved = BigRational::zero();
                for j in 0u32..=m {
                    let local = f
                        .coefficient(&idx(&[j]))
                        .unwrap()
                        .specialize_count(q, 1)
                        .unwrap();
                    let rest =
                        euler_coeff_bruteforce(&f, &[(v, ones.clone())], q, &idx(&[m - j]))
                            .unwrap();
                    convolved += local * rest;
                }
                prop_assert_eq!(full, convolved);
            }
            Ok(())
        })
        .unwrap();

    budget.done();
}
