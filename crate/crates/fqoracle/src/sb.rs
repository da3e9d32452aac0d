//! Simple Schwartz–Bruhat functions on the adeles of the rational function
//! field, their Fourier transforms, and a literal Poisson summation check.
//!
//! Everything is specialized to `F_p(t)` (genus zero) with the standard
//! differential `dt`, whose conductor exponent is `ν = 0` at finite places
//! and `ν = 2` at infinity. A local building block is the indicator of a
//! shifted ball `c + π^N O` with a declared level `(M, N)`: support inside
//! `π^M O`, invariance under `π^N O`. Its Fourier transform is
//! `q^{-N} ψ(c·y)` on the ball `π^{ν-N} O` — level `(ν-N, ν-M)` — and the
//! global check sums both sides over the actual lattice of global functions,
//! comparing exactly in `Q(ζ_p)`.

use num_rational::BigRational;
use thiserror::Error;

use crate::cyclo::Cyclo;
use crate::gf::Prime;
use crate::laurent::LocalSeries;

#[derive(Debug, Error)]
pub enum SbError {
    #[error("q = {0} is not prime")]
    NotPrime(u64),
    #[error("level must satisfy support <= invariance")]
    BadLevel,
    #[error("shift exponent {exp} outside the level window [{support}, {invariance})")]
    ShiftOutsideWindow {
        exp: i64,
        support: i64,
        invariance: i64,
    },
    #[error("finite place {0} is not an element of the field")]
    BadPlace(u64),
    #[error("place listed more than once")]
    DuplicatePlace,
    #[error("need one local function per coordinate ({dim}), got {got}")]
    DimMismatch { dim: usize, got: usize },
    #[error("enumeration size {size} exceeds the budget {budget}")]
    TooLarge { size: u128, budget: u128 },
}

/// A degree-one place of the projective line over `F_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HarnessPlace {
    /// The finite place `t - a`.
    Finite(u64),
    /// The place at infinity, uniformizer `1/t`.
    Infinity,
}

impl HarnessPlace {
    /// Conductor exponent of `dt` at this place.
    pub fn nu(self) -> i64 {
        match self {
            HarnessPlace::Finite(_) => 0,
            HarnessPlace::Infinity => 2,
        }
    }

    /// Exponent `e` with `ψ(x) = ζ^e`: the residue of `x·dt`, read off the
    /// local expansion. At a finite place this is the coefficient of
    /// `π^{-1}`; at infinity `dt = -π^{-2} dπ` flips sign and shifts.
    fn character_exponent(self, x: &LocalSeries, p: Prime) -> u64 {
        match self {
            HarnessPlace::Finite(_) => x.coeff(-1),
            HarnessPlace::Infinity => p.neg(x.coeff(1)),
        }
    }
}

/// The indicator of `c + π^N O` with declared level `(M, N)`: support in
/// `π^M O`, invariance under `π^N O`. The shift `c` is a finite tail of
/// `π`-coefficients in the window `[M, N)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SBFunction {
    pub support: i64,
    pub invariance: i64,
    pub shift: Vec<(i64, u64)>,
}

impl SBFunction {
    pub fn new(support: i64, invariance: i64, shift: Vec<(i64, u64)>) -> Result<Self, SbError> {
        if support > invariance {
            return Err(SbError::BadLevel);
        }
        for &(exp, _) in &shift {
            if exp < support || exp >= invariance {
                return Err(SbError::ShiftOutsideWindow {
                    exp,
                    support,
                    invariance,
                });
            }
        }
        Ok(SBFunction {
            support,
            invariance,
            shift,
        })
    }

    /// The unit of the unramified theory: the indicator of `O`.
    pub fn standard() -> Self {
        SBFunction {
            support: 0,
            invariance: 0,
            shift: vec![],
        }
    }

    fn shift_series(&self, prec: i64, p: Prime) -> LocalSeries {
        let mut acc = LocalSeries::zero_to(prec);
        for &(e, c) in &self.shift {
            acc = acc.add(&LocalSeries::monomial(c, e, prec, p), p);
        }
        acc
    }
}

/// The closed-form Fourier transform of an [`SBFunction`]:
/// `q^{scale_exponent} ψ(phase·y)` times the indicator of the ball
/// `π^{support} O`, with declared level `(support, invariance)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SBTransform {
    pub support: i64,
    pub invariance: i64,
    pub scale_exponent: i64,
    pub phase: Vec<(i64, u64)>,
}

/// Level map of the Fourier transform at a place with conductor exponent
/// `ν`: `(M, N) ↦ (ν - N, ν - M)`, with normalization `q^{-N}` and the
/// original center reappearing as a character phase.
pub fn sb_fourier(f: &SBFunction, place: HarnessPlace) -> SBTransform {
    let nu = place.nu();
    SBTransform {
        support: nu - f.invariance,
        invariance: nu - f.support,
        scale_exponent: -f.invariance,
        phase: f.shift.clone(),
    }
}

/// Evaluates the transform of `f` at `y` by a literal Riemann sum over ball
/// representatives (used to validate [`sb_fourier`], and nothing else).
pub fn literal_transform_value(
    f: &SBFunction,
    place: HarnessPlace,
    y: &LocalSeries,
    p: Prime,
) -> Cyclo {
    let q = p.get();
    // Representatives x = c + Σ_{j=N}^{K-1} a_j π^j cover the ball to depth
    // K; the sum stabilizes once K - N exceeds the character's reach.
    let depth = 6;
    let k = f.invariance + depth;
    let prec = k + 4;
    let c = f.shift_series(prec, p);
    let mut acc = Cyclo::zero(q);
    let reps = q.pow(depth as u32);
    for mut idx in 0..reps {
        let mut x = c.clone();
        for j in 0..depth {
            let a = idx % q;
            idx /= q;
            x = x.add(
                &LocalSeries::monomial(a, f.invariance + j, prec, p),
                p,
            );
        }
        let e = place.character_exponent(&x.mul(y, p), p);
        acc = acc.add(&Cyclo::root_power(q, e as i64));
    }
    acc.scale(&pow_q(q, -k))
}

/// A product Schwartz–Bruhat function on `F_p(t)^dim`: one local function
/// per coordinate at each listed place, the standard function elsewhere.
#[derive(Debug, Clone)]
pub struct PoissonProblem {
    pub p: u64,
    pub dim: usize,
    pub places: Vec<(HarnessPlace, Vec<SBFunction>)>,
}

/// Outcome of the literal two-sided Poisson summation check.
#[derive(Debug, Clone)]
pub struct PoissonReport {
    /// Number of lattice points where the function is 1 (the direct side).
    pub lhs: BigRational,
    /// The dual-side sum Σ Fφ over the lattice, before the `q^{(1-g)·dim}`
    /// factor, as an exact cyclotomic number.
    pub dual_sum: Cyclo,
    /// Whether `lhs = q^{dim} · dual_sum` exactly.
    pub equal: bool,
}

const ENUM_BUDGET: u128 = 50_000_000;

/// Runs Poisson summation literally: enumerates the global functions in the
/// support lattice on each side, evaluates the function (or its closed-form
/// transform) exactly, and compares in `Q(ζ_p)`.
pub fn poisson_check(problem: &PoissonProblem) -> Result<PoissonReport, SbError> {
    let p = Prime::new(problem.p).ok_or(SbError::NotPrime(problem.p))?;
    let q = p.get();
    for (i, (place, locals)) in problem.places.iter().enumerate() {
        if let HarnessPlace::Finite(a) = place {
            if *a >= q {
                return Err(SbError::BadPlace(*a));
            }
        }
        if problem.places[..i].iter().any(|(other, _)| other == place) {
            return Err(SbError::DuplicatePlace);
        }
        if locals.len() != problem.dim {
            return Err(SbError::DimMismatch {
                dim: problem.dim,
                got: locals.len(),
            });
        }
    }

    let mut lhs = BigRational::from_integer(1.into());
    let mut dual = Cyclo::one(q);
    for coord in 0..problem.dim {
        // Direct side: γ with v(γ - c_v) >= N_v at each constrained place.
        let direct: Vec<BallConstraint> = effective_places(problem, coord)
            .into_iter()
            .map(|(place, f)| {
                let center_floor = f
                    .shift
                    .iter()
                    .map(|&(e, _)| e)
                    .min()
                    .unwrap_or(f.invariance);
                BallConstraint {
                    place,
                    radius: f.invariance,
                    pole_bound: (-center_floor.min(f.invariance)).max(0),
                    phase: None,
                    center: f.shift.clone(),
                }
            })
            .collect();
        let mut count = 0u64;
        sum_lattice(p, &direct, |_, _| count += 1)?;
        lhs *= BigRational::from_integer(count.into());

        // Dual side: γ' with v(γ') >= ν - N_v, weighted by
        // q^{-N_v} ψ(c_v γ').
        let mut scale = BigRational::from_integer(1.into());
        let dual_constraints: Vec<BallConstraint> = effective_places(problem, coord)
            .into_iter()
            .map(|(place, f)| {
                let tr = sb_fourier(&f, place);
                scale *= pow_q(q, tr.scale_exponent);
                BallConstraint {
                    place,
                    radius: tr.support,
                    pole_bound: (-tr.support).max(0),
                    phase: if tr.phase.is_empty() {
                        None
                    } else {
                        Some(tr.phase.clone())
                    },
                    center: vec![],
                }
            })
            .collect();
        let mut coord_sum = Cyclo::zero(q);
        sum_lattice(p, &dual_constraints, |constraints, expansions| {
            let mut exponent: i64 = 0;
            for (ball, series) in constraints.iter().zip(expansions) {
                if let Some(phase) = &ball.phase {
                    let mut c = LocalSeries::zero_to(series.prec());
                    for &(e, v) in phase {
                        c = c.add(&LocalSeries::monomial(v, e, series.prec(), p), p);
                    }
                    let x = c.mul(series, p);
                    exponent += ball.place.character_exponent(&x, p) as i64;
                }
            }
            coord_sum = coord_sum.add(&Cyclo::root_power(q, exponent));
        })?;
        dual = dual.mul(&coord_sum.scale(&scale));
    }

    let factor = pow_q(q, problem.dim as i64);
    let rhs = dual.scale(&factor);
    let equal = rhs.as_rational().map(|r| r == lhs).unwrap_or(false);
    Ok(PoissonReport {
        lhs,
        dual_sum: dual,
        equal,
    })
}

fn pow_q(q: u64, e: i64) -> BigRational {
    let base = num_bigint::BigInt::from(q);
    if e >= 0 {
        BigRational::from_integer(base.pow(e as u32))
    } else {
        BigRational::new(1.into(), base.pow((-e) as u32))
    }
}

/// The constraint list for one coordinate: every listed place with its
/// local function, plus infinity with the standard function if unlisted.
/// (Unlisted finite places impose integrality, which the lattice basis
/// already encodes.)
fn effective_places(problem: &PoissonProblem, coord: usize) -> Vec<(HarnessPlace, SBFunction)> {
    let mut out: Vec<(HarnessPlace, SBFunction)> = problem
        .places
        .iter()
        .map(|(pl, locals)| (*pl, locals[coord].clone()))
        .collect();
    if !out
        .iter()
        .any(|(pl, _)| matches!(pl, HarnessPlace::Infinity))
    {
        out.push((HarnessPlace::Infinity, SBFunction::standard()));
    }
    out
}

struct BallConstraint {
    place: HarnessPlace,
    /// Accept γ with v(γ - center) >= radius at this place.
    radius: i64,
    /// Poles of order up to this bound are allowed here in the ambient
    /// lattice.
    pole_bound: i64,
    /// Dual-side character data `ψ(phase · γ)`, if any.
    phase: Option<Vec<(i64, u64)>>,
    center: Vec<(i64, u64)>,
}

/// Basis element of the ambient space of global functions with bounded
/// poles: a power of `t` or a pure pole at a finite place.
#[derive(Debug, Clone)]
enum BasisElem {
    TPow(u32),
    InvPole { a: u64, k: u32 },
}

fn expand_basis(elem: &BasisElem, place: HarnessPlace, prec: i64, p: Prime) -> LocalSeries {
    match place {
        HarnessPlace::Finite(at) => match elem {
            BasisElem::TPow(j) => {
                // t = a + π.
                let t = LocalSeries::monomial(at, 0, prec, p)
                    .add(&LocalSeries::monomial(1, 1, prec, p), p);
                t.pow(*j, prec, p)
            }
            BasisElem::InvPole { a, k } => {
                // 1/(t - a) at the place t - at: ((at - a) + π)^{-1}.
                let base = LocalSeries::monomial(p.sub(at, *a), 0, prec, p)
                    .add(&LocalSeries::monomial(1, 1, prec, p), p);
                base.inverse(p).pow(*k, prec, p)
            }
        },
        HarnessPlace::Infinity => match elem {
            BasisElem::TPow(j) => LocalSeries::monomial(1, -(*j as i64), prec, p),
            BasisElem::InvPole { a, k } => {
                // 1/(t - a) = π/(1 - aπ) in π = 1/t.
                let denom = LocalSeries::monomial(1, 0, prec, p)
                    .add(&LocalSeries::monomial(p.neg(*a), 0, prec, p).mul(
                        &LocalSeries::monomial(1, 1, prec, p),
                        p,
                    ), p);
                LocalSeries::monomial(1, 1, prec, p)
                    .mul(&denom.inverse(p), p)
                    .pow(*k, prec, p)
            }
        },
    }
}

/// Enumerates the ambient lattice cut out by the pole bounds, filters by
/// the ball constraints, and feeds each member's local expansions to the
/// visitor.
fn sum_lattice<F: FnMut(&[BallConstraint], &[LocalSeries])>(
    p: Prime,
    constraints: &[BallConstraint],
    mut visit: F,
) -> Result<(), SbError> {
    let q = p.get();
    let mut basis = vec![BasisElem::TPow(0)];
    for c in constraints {
        match c.place {
            HarnessPlace::Finite(a) => {
                for k in 1..=c.pole_bound {
                    basis.push(BasisElem::InvPole { a, k: k as u32 });
                }
            }
            HarnessPlace::Infinity => {
                for j in 1..=c.pole_bound {
                    basis.push(BasisElem::TPow(j as u32));
                }
            }
        }
    }
    let size = (q as u128).pow(basis.len() as u32);
    if size > ENUM_BUDGET {
        return Err(SbError::TooLarge {
            size,
            budget: ENUM_BUDGET,
        });
    }

    // Precompute each basis element's expansion at each constraint place.
    let margin = 8;
    let precs: Vec<i64> = constraints
        .iter()
        .map(|c| {
            let center_floor = c.center.iter().map(|&(e, _)| e).min().unwrap_or(0);
            let phase_floor = c
                .phase
                .as_ref()
                .and_then(|ph| ph.iter().map(|&(e, _)| e).min())
                .unwrap_or(0);
            c.radius.max(2) + margin - center_floor.min(0) - phase_floor.min(0)
        })
        .collect();
    let tables: Vec<Vec<LocalSeries>> = constraints
        .iter()
        .zip(&precs)
        .map(|(c, &prec)| {
            basis
                .iter()
                .map(|b| expand_basis(b, c.place, prec, p))
                .collect()
        })
        .collect();

    let mut expansions: Vec<LocalSeries> = Vec::with_capacity(constraints.len());
    'outer: for mut idx in 0..size {
        let coeffs: Vec<u64> = (0..basis.len())
            .map(|_| {
                let a = (idx % q as u128) as u64;
                idx /= q as u128;
                a
            })
            .collect();
        expansions.clear();
        for (ci, c) in constraints.iter().enumerate() {
            let mut acc = LocalSeries::zero_to(precs[ci]);
            for (bi, &lambda) in coeffs.iter().enumerate() {
                if lambda != 0 {
                    acc = acc.add(&tables[ci][bi].scale(lambda, p), p);
                }
            }
            // Ball membership: v(γ - center) >= radius.
            let mut diff = acc.clone();
            for &(e, v) in &c.center {
                diff = diff.add(&LocalSeries::monomial(p.neg(v), e, precs[ci], p), p);
            }
            match diff.valuation() {
                Some(v) if v < c.radius => continue 'outer,
                _ => {}
            }
            expansions.push(acc);
        }
        visit(constraints, &expansions);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn transform_law_matches_literal_integral() {
        let p = Prime::new(3).unwrap();
        for place in [HarnessPlace::Finite(1), HarnessPlace::Infinity] {
            for f in [
                SBFunction::standard(),
                SBFunction::new(-1, 1, vec![(-1, 2)]).unwrap(),
                SBFunction::new(0, 2, vec![(1, 1)]).unwrap(),
            ] {
                let tr = sb_fourier(&f, place);
                for e in -3..=3i64 {
                    let y = LocalSeries::monomial(1, e, e + 12, p);
                    let literal = literal_transform_value(&f, place, &y, p);
                    // Closed form: q^{-N} ψ(c·y) on the ball, else 0.
                    let expected = if e >= tr.support {
                        let prec = 8;
                        let mut c = LocalSeries::zero_to(prec);
                        for &(exp, v) in &tr.phase {
                            c = c.add(&LocalSeries::monomial(v, exp, prec, p), p);
                        }
                        let exponent = place.character_exponent(&c.mul(&y, p), p);
                        Cyclo::root_power(3, exponent as i64)
                            .scale(&pow_q(3, tr.scale_exponent))
                    } else {
                        Cyclo::zero(3)
                    };
                    assert_eq!(literal, expected, "place {place:?}, f {f:?}, e {e}");
                }
            }
        }
    }

    #[test]
    fn unramified_function_balances() {
        // All places standard: LHS counts the constants.
        let problem = PoissonProblem {
            p: 2,
            dim: 1,
            places: vec![],
        };
        let report = poisson_check(&problem).unwrap();
        assert_eq!(report.lhs, rat(2, 1));
        assert!(report.equal);
    }

    #[test]
    fn polynomial_ball_balances() {
        // Allow poles of order 2 at infinity: LHS counts polys of degree <= 2.
        let problem = PoissonProblem {
            p: 3,
            dim: 1,
            places: vec![(
                HarnessPlace::Infinity,
                vec![SBFunction::new(-2, -2, vec![]).unwrap()],
            )],
        };
        let report = poisson_check(&problem).unwrap();
        assert_eq!(report.lhs, rat(27, 1));
        assert!(report.equal);
    }

    #[test]
    fn consistent_congruences_balance_with_phases() {
        // γ(0) = 1 and γ(1) = 1 among constants: one solution; the dual
        // side needs the two-pole lattice with explicit character values.
        let problem = PoissonProblem {
            p: 2,
            dim: 1,
            places: vec![
                (
                    HarnessPlace::Finite(0),
                    vec![SBFunction::new(0, 1, vec![(0, 1)]).unwrap()],
                ),
                (
                    HarnessPlace::Finite(1),
                    vec![SBFunction::new(0, 1, vec![(0, 1)]).unwrap()],
                ),
            ],
        };
        let report = poisson_check(&problem).unwrap();
        assert_eq!(report.lhs, rat(1, 1));
        assert!(report.equal);
    }

    #[test]
    fn inconsistent_congruences_cancel_to_zero() {
        // γ(0) = 1 and γ(1) = 0 among constants: no solution; the dual side
        // must cancel through genuine sign interference.
        let problem = PoissonProblem {
            p: 2,
            dim: 1,
            places: vec![
                (
                    HarnessPlace::Finite(0),
                    vec![SBFunction::new(0, 1, vec![(0, 1)]).unwrap()],
                ),
                (
                    HarnessPlace::Finite(1),
                    vec![SBFunction::new(0, 1, vec![]).unwrap()],
                ),
            ],
        };
        let report = poisson_check(&problem).unwrap();
        assert_eq!(report.lhs, rat(0, 1));
        assert!(report.dual_sum.is_zero());
        assert!(report.equal);
    }

    #[test]
    fn cube_root_cancellation_over_f3() {
        // γ ≡ 1 at t and γ ≡ 2 at t - 1 among constants: impossible, and
        // the dual sum is 1 + ζ + ζ^2 = 0 up to scale.
        let problem = PoissonProblem {
            p: 3,
            dim: 1,
            places: vec![
                (
                    HarnessPlace::Finite(0),
                    vec![SBFunction::new(0, 1, vec![(0, 1)]).unwrap()],
                ),
                (
                    HarnessPlace::Finite(1),
                    vec![SBFunction::new(0, 1, vec![(0, 2)]).unwrap()],
                ),
            ],
        };
        let report = poisson_check(&problem).unwrap();
        assert_eq!(report.lhs, rat(0, 1));
        assert!(report.equal);
    }

    #[test]
    fn two_dimensional_product_balances() {
        let problem = PoissonProblem {
            p: 2,
            dim: 2,
            places: vec![(
                HarnessPlace::Infinity,
                vec![
                    SBFunction::new(-1, -1, vec![]).unwrap(),
                    SBFunction::standard(),
                ],
            )],
        };
        let report = poisson_check(&problem).unwrap();
        // Coordinate 1: polys of degree <= 1 over F_2 (4); coordinate 2:
        // constants (2).
        assert_eq!(report.lhs, rat(8, 1));
        assert!(report.equal);
    }
}
