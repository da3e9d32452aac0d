//! Shared driver logic for the `motivic` binary and its test gate: config
//! loading, symbolic-versus-literal cross-checks of section counts and Euler
//! products, and the structured / randomized batteries fed to the
//! finite-field oracles. Everything here is deterministic given a seed.

use std::path::Path;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::rngs::StdRng;
use rand::Rng;
use thiserror::Error;

use fqoracle::euler::{euler_coeff_bruteforce, OracleError};
use fqoracle::sb::{HarnessPlace, PoissonProblem, SBFunction, SbError};
use fqoracle::sections::{count_sections, SectionError, SectionModel};
use motivic::curvezeta::{euler_product_over_curve, CurveData, CurveError};
use motivic::heightzeta::{HeightZetaError, Instance, Pipeline, SectionSpec};
use motivic::motive::{MotiveElt, MotiveError};
use motivic::mvseries::{graded_indices, DegreeForm, MSeries, MultiIndex, SeriesError, VarSet};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Pipeline(#[from] HeightZetaError),
    #[error(transparent)]
    Motive(#[from] MotiveError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Euler(#[from] OracleError),
    #[error(transparent)]
    Sections(#[from] SectionError),
    #[error(transparent)]
    Poisson(#[from] SbError),
    #[error("{0}")]
    Other(String),
}

/// Loads an instance from a config file, optionally overriding its height
/// bound.
pub fn load_instance(path: &Path, bound: Option<u64>) -> Result<Instance, CliError> {
    let text = std::fs::read_to_string(path)?;
    let mut instance = Instance::from_json(&text)?;
    if let Some(b) = bound {
        instance.bound = b;
    }
    Ok(instance)
}

/// Maps a config's declared section model onto the literal counter.
pub fn section_model_of(spec: &SectionSpec) -> Result<SectionModel, CliError> {
    match spec.model.as_str() {
        "rational-functions" => Ok(SectionModel::RationalFunctions),
        "polynomials" => Ok(SectionModel::PolynomialsExactDegree),
        "projective-space" => {
            let n = spec
                .n
                .ok_or_else(|| CliError::Other("projective-space model needs `n`".into()))?;
            Ok(SectionModel::ProjectiveSpace { n })
        }
        other => Err(CliError::Other(format!("unknown section model `{other}`"))),
    }
}

/// One height of a section-count cross-check. `literal` is `None` when the
/// enumeration would blow the budget; `agree` is `None` in the same case.
#[derive(Debug, Clone)]
pub struct SectionRow {
    pub height: u32,
    pub symbolic: BigRational,
    pub literal: Option<BigInt>,
    pub agree: Option<bool>,
}

/// Specializes the moduli classes of a one-variable pipeline at `L = q` and
/// compares them to the literal section counts of the declared model.
pub fn sections_cross_check(
    pipe: &Pipeline,
    q: u64,
    max_height: u32,
) -> Result<Vec<SectionRow>, CliError> {
    if pipe.assembly.plain_vars.len() != 1 {
        return Err(CliError::Other(
            "section cross-checks need a single height variable".into(),
        ));
    }
    let spec = pipe
        .instance
        .sections
        .as_ref()
        .ok_or_else(|| CliError::Other("config declares no section model".into()))?;
    let model = section_model_of(spec)?;
    let rho = pipe.assembly.plain_form.coeffs()[0];
    let top = (pipe.instance.bound / rho) as u32;
    let mut rows = Vec::new();
    for d in 0..=max_height.min(top) {
        let symbolic = pipe
            .moduli_class(&MultiIndex(vec![d]))?
            .specialize_count(q, 1)?;
        let literal = match count_sections(model, q, d) {
            Ok(c) => Some(c),
            Err(SectionError::TooLarge { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        let agree = literal
            .as_ref()
            .map(|c| BigRational::from_integer(c.clone()) == symbolic);
        rows.push(SectionRow {
            height: d,
            symbolic,
            literal,
            agree,
        });
    }
    Ok(rows)
}

/// A random local factor with constant term 1, support in degrees up to
/// `max_degree`, and coefficients that are short Laurent polynomials in `L`
/// with exponents in `[-2, 2]`.
pub fn random_tame_factor(rng: &mut StdRng, max_degree: u64) -> Result<MSeries, CliError> {
    let vars = VarSet::plain(&["a".to_owned()]);
    let form = DegreeForm::new(vec![1])?;
    let mut f = MSeries::one(Arc::clone(&vars), form, max_degree)?;
    for m in 1..=max_degree {
        if !rng.gen_bool(0.7) {
            continue;
        }
        let terms = rng.gen_range(1..=2);
        let mut c = MotiveElt::zero();
        for _ in 0..terms {
            let coeff = loop {
                let v: i64 = rng.gen_range(-2..=2);
                if v != 0 {
                    break v;
                }
            };
            let lexp: i64 = rng.gen_range(-2..=2);
            c = c.add(&MotiveElt::lefschetz(lexp).scale(&BigInt::from(coeff)));
        }
        if !c.is_zero() {
            f.set_coeff(MultiIndex(vec![m as u32]), c)?;
        }
    }
    Ok(f)
}

/// Expands the factor's product over the projective line symbolically and
/// checks every coefficient up to `max_degree` against the literal product
/// over closed points, specialized at each given prime.
pub fn euler_factor_agrees(
    factor: &MSeries,
    qs: &[u64],
    max_degree: u64,
) -> Result<bool, CliError> {
    let symbolic = euler_product_over_curve(factor, &[], &CurveData::projective_line())?;
    for idx in graded_indices(factor.vars().len(), factor.form(), max_degree) {
        let sym = symbolic.coefficient(&idx)?;
        for &q in qs {
            let expect = sym.specialize_count(q, 1)?;
            let got = euler_coeff_bruteforce(factor, &[], q, &idx)?;
            if got != expect {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// A fixed battery of product test functions exercising finite and infinite
/// places, shifted balls, asymmetric level windows, and dimension two.
pub fn structured_poisson_problems(q: u64) -> Vec<PoissonProblem> {
    let f = |s: i64, i: i64, shift: Vec<(i64, u64)>| {
        SBFunction::new(s, i, shift).expect("structured battery levels are valid")
    };
    let inf = HarnessPlace::Infinity;
    let p0 = HarnessPlace::Finite(0);
    let p1 = HarnessPlace::Finite(1 % q);
    let prob = |dim: usize, places: Vec<(HarnessPlace, Vec<SBFunction>)>| PoissonProblem {
        p: q,
        dim,
        places,
    };
    vec![
        prob(1, vec![]),
        prob(1, vec![(p0, vec![f(0, 2, vec![])])]),
        prob(1, vec![(p0, vec![f(-2, 0, vec![])])]),
        prob(1, vec![(p0, vec![f(-1, 2, vec![])])]),
        prob(1, vec![(inf, vec![f(-2, 1, vec![])])]),
        prob(1, vec![(p0, vec![f(-1, 1, vec![(-1, 1)])])]),
        prob(
            1,
            vec![(p0, vec![f(-1, 1, vec![])]), (p1, vec![f(0, 1, vec![])])],
        ),
        prob(
            1,
            vec![(p0, vec![f(-1, 0, vec![])]), (inf, vec![f(0, 2, vec![])])],
        ),
        prob(1, vec![(inf, vec![f(0, 2, vec![(1, 1)])])]),
        prob(
            1,
            vec![
                (p0, vec![f(0, 1, vec![])]),
                (p1, vec![f(-1, 0, vec![])]),
                (inf, vec![f(1, 2, vec![])]),
            ],
        ),
        prob(2, vec![(p0, vec![f(-1, 1, vec![]), f(0, 2, vec![])])]),
        prob(
            2,
            vec![
                (p0, vec![f(0, 1, vec![]), f(-1, 0, vec![])]),
                (inf, vec![f(1, 2, vec![]), f(-1, 1, vec![(-1, 1)])]),
            ],
        ),
    ]
}

/// Draws a random product test function: one or two distinct places, level
/// windows within `[-2, 2]`, and an optional one-term shift per coordinate.
pub fn random_poisson_problem(rng: &mut StdRng, q: u64, dim: usize) -> PoissonProblem {
    let candidates = [
        HarnessPlace::Finite(0),
        HarnessPlace::Finite(1 % q),
        HarnessPlace::Infinity,
    ];
    let nplaces = rng.gen_range(1..=2);
    let mut picked: Vec<HarnessPlace> = Vec::new();
    while picked.len() < nplaces {
        let c = candidates[rng.gen_range(0..candidates.len())];
        if !picked.contains(&c) {
            picked.push(c);
        }
    }
    let mut places = Vec::new();
    for pl in picked {
        let mut locals = Vec::new();
        for _ in 0..dim {
            let support = rng.gen_range(-2..=1i64);
            let invariance = rng.gen_range(support..=2);
            let shift = if support < invariance && rng.gen_bool(0.5) {
                let exp = rng.gen_range(support..invariance);
                let val = rng.gen_range(1..q);
                vec![(exp, val)]
            } else {
                Vec::new()
            };
            locals.push(SBFunction::new(support, invariance, shift).expect("window checked"));
        }
        places.push((pl, locals));
    }
    PoissonProblem {
        p: q,
        dim,
        places,
    }
}
