//! Brute-force Euler product coefficients over the projective line.
//!
//! Given a local factor as a truncated series with motive coefficients, this
//! oracle specializes it at every closed point `v` (Lefschetz class to
//! `q^{deg v}`, symbols to their point counts over the residue field, each
//! series variable `T` to `T^{deg v}`) and literally multiplies the
//! truncated rational-coefficient series over all points of bounded degree.
//! No plethystic or zeta machinery is involved; agreement with the symbolic
//! route is evidence, not circularity.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use motivic::mvseries::{MSeries, MultiIndex};

use crate::gf::{Poly, Prime};
use crate::points::{closed_points, ClosedPoint};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("q = {0} is not prime")]
    NotPrime(u64),
    #[error("local factors for the Euler oracle must use plain variables")]
    RefinedVars,
    #[error("target exponent has {target} entries but the factor has {vars} variables")]
    TargetLen { target: usize, vars: usize },
    #[error("override place appears more than once")]
    DuplicateOverride,
    #[error("series bound {bound} is too small for target degree {needed}")]
    BoundTooSmall { bound: u64, needed: u64 },
    #[error(transparent)]
    Motive(#[from] motivic::motive::MotiveError),
    #[error(transparent)]
    Series(#[from] motivic::mvseries::SeriesError),
}

/// Where an overriding local factor sits on the projective line. Only
/// degree-one places can be overridden.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlacePosition {
    /// The finite place `t - a`.
    Finite(u64),
    /// The place at infinity.
    Infinity,
}

impl PlacePosition {
    fn matches(self, pt: &ClosedPoint, p: Prime) -> bool {
        match (self, pt) {
            (PlacePosition::Infinity, ClosedPoint::Infinity) => true,
            (PlacePosition::Finite(a), ClosedPoint::Finite(f)) => {
                f.degree() == Some(1) && *f == Poly::from_coeffs(vec![p.neg(a), 1])
            }
            _ => false,
        }
    }
}

/// Truncated multivariate series with rational coefficients, bounded
/// componentwise by a target exponent.
#[derive(Debug, Clone)]
struct RatSeries {
    cap: Vec<u32>,
    coeffs: BTreeMap<Vec<u32>, BigRational>,
}

impl RatSeries {
    fn one(cap: Vec<u32>) -> RatSeries {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(vec![0; cap.len()], BigRational::one());
        RatSeries { cap, coeffs }
    }

    fn mul(&self, other: &RatSeries) -> RatSeries {
        let mut coeffs: BTreeMap<Vec<u32>, BigRational> = BTreeMap::new();
        for (ma, ca) in &self.coeffs {
            for (mb, cb) in &other.coeffs {
                let m: Vec<u32> = ma.iter().zip(mb).map(|(a, b)| a + b).collect();
                if m.iter().zip(&self.cap).any(|(e, c)| e > c) {
                    continue;
                }
                let p = ca * cb;
                *coeffs.entry(m).or_insert_with(BigRational::zero) += p;
            }
        }
        coeffs.retain(|_, c| !c.is_zero());
        RatSeries {
            cap: self.cap.clone(),
            coeffs,
        }
    }
}

/// Specializes a motive-coefficient local factor at a closed point of degree
/// `d`: `L ↦ q^d`, symbols to counts over `F_{q^d}`, `T_i ↦ T_i^d`,
/// truncated componentwise by `cap`.
fn specialize_factor(
    factor: &MSeries,
    q: u64,
    d: u32,
    cap: &[u32],
) -> Result<RatSeries, OracleError> {
    let mut coeffs = BTreeMap::new();
    for (m, c) in factor.support() {
        let scaled: Vec<u32> = m.0.iter().map(|e| e * d).collect();
        if scaled.iter().zip(cap).any(|(e, b)| e > b) {
            continue;
        }
        let value = c.specialize_count(q, d)?;
        if !value.is_zero() {
            *coeffs
                .entry(scaled)
                .or_insert_with(BigRational::zero) += value;
        }
    }
    Ok(RatSeries {
        cap: cap.to_vec(),
        coeffs,
    })
}

/// The coefficient of `T^target` in the Euler product of `generic` over all
/// closed points of `P^1` over `F_q`, with per-place overrides at degree-one
/// places (an override replaces the generic factor there). Exact rational
/// arithmetic throughout.
pub fn euler_coeff_bruteforce(
    generic: &MSeries,
    overrides: &[(PlacePosition, MSeries)],
    q: u64,
    target: &MultiIndex,
) -> Result<BigRational, OracleError> {
    let p = Prime::new(q).ok_or(OracleError::NotPrime(q))?;
    if generic.vars().is_refined() {
        return Err(OracleError::RefinedVars);
    }
    if target.0.len() != generic.vars().len() {
        return Err(OracleError::TargetLen {
            target: target.0.len(),
            vars: generic.vars().len(),
        });
    }
    let needed = generic.form().degree(target);
    if needed > generic.bound() {
        return Err(OracleError::BoundTooSmall {
            bound: generic.bound(),
            needed,
        });
    }
    for (i, (pos, _)) in overrides.iter().enumerate() {
        if overrides[..i].iter().any(|(other, _)| other == pos) {
            return Err(OracleError::DuplicateOverride);
        }
    }

    let cap = target.0.clone();
    // Points of degree beyond the largest target exponent cannot contribute.
    let max_deg = cap.iter().copied().max().unwrap_or(0) as usize;
    let mut product = RatSeries::one(cap.clone());
    if max_deg > 0 {
        // Specialize every point's factor (parallel), then fold the product.
        let pts = closed_points(p, max_deg);
        let factors = motivic::exec::map_collect(pts, |pt| {
            let over = overrides
                .iter()
                .find(|(pos, _)| pos.matches(&pt, p))
                .map(|(_, f)| f);
            specialize_factor(over.unwrap_or(generic), q, pt.degree() as u32, &cap)
        });
        for f in factors {
            product = product.mul(&f?);
        }
    }
    Ok(product
        .coeffs
        .get(&target.0)
        .cloned()
        .unwrap_or_else(BigRational::zero))
}

#[cfg(test)]
mod tests {
    use super::*;
    use motivic::motive::SymbolTable;
    use motivic::mvseries::{DegreeForm, VarSet};
    use num_bigint::BigInt;

    fn univariate(texts: &[(u32, &str)], bound: u64) -> MSeries {
        let t = SymbolTable::new();
        let vars = VarSet::plain(&["T".into()]);
        let form = DegreeForm::new(vec![1]).unwrap();
        let mut s = MSeries::zero(vars, form, bound).unwrap();
        for (m, text) in texts {
            s.set_coeff(MultiIndex(vec![*m]), t.parse(text).unwrap())
                .unwrap();
        }
        s
    }

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn trivial_factor_gives_trivial_product() {
        let f = univariate(&[(0, "1")], 4);
        for q in [2u64, 3] {
            assert_eq!(
                euler_coeff_bruteforce(&f, &[], q, &MultiIndex(vec![0])).unwrap(),
                rat(1)
            );
            assert_eq!(
                euler_coeff_bruteforce(&f, &[], q, &MultiIndex(vec![3])).unwrap(),
                rat(0)
            );
        }
    }

    #[test]
    fn product_of_one_plus_t_counts_squarefree_configurations() {
        // Π_v (1 + T^{deg v}): the T^2 coefficient counts unordered pairs of
        // distinct degree-1 points plus degree-2 points:
        // C(q+1, 2) + (q^2 - q)/2 = q^2 at every q.
        let f = univariate(&[(0, "1"), (1, "1")], 6);
        assert_eq!(
            euler_coeff_bruteforce(&f, &[], 2, &MultiIndex(vec![2])).unwrap(),
            rat(4)
        );
        assert_eq!(
            euler_coeff_bruteforce(&f, &[], 3, &MultiIndex(vec![2])).unwrap(),
            rat(9)
        );
        // T^1: the q + 1 degree-one points.
        assert_eq!(
            euler_coeff_bruteforce(&f, &[], 3, &MultiIndex(vec![1])).unwrap(),
            rat(4)
        );
    }

    #[test]
    fn geometric_factor_recovers_effective_divisors() {
        // Π_v (1 - T^{deg v})^{-1} counts effective divisors of degree m,
        // i.e. #Sym^m P^1(F_q) = 1 + q + ... + q^m. The local factor is fed
        // in expanded form Σ_m T^m.
        let geo = univariate(
            &[(0, "1"), (1, "1"), (2, "1"), (3, "1"), (4, "1"), (5, "1"), (6, "1")],
            6,
        );
        assert_eq!(
            euler_coeff_bruteforce(&geo, &[], 2, &MultiIndex(vec![3])).unwrap(),
            rat(15)
        );
        assert_eq!(
            euler_coeff_bruteforce(&geo, &[], 3, &MultiIndex(vec![2])).unwrap(),
            rat(13)
        );
    }

    #[test]
    fn overrides_replace_single_places() {
        // Kill the factor at infinity: Π_{v finite} (1 + T^{deg v}) at T^1
        // counts only the q finite degree-one points.
        let f = univariate(&[(0, "1"), (1, "1")], 4);
        let one = univariate(&[(0, "1")], 4);
        assert_eq!(
            euler_coeff_bruteforce(
                &f,
                &[(PlacePosition::Infinity, one.clone())],
                3,
                &MultiIndex(vec![1])
            )
            .unwrap(),
            rat(3)
        );
        // Also kill t - 0: q - 1 remain.
        assert_eq!(
            euler_coeff_bruteforce(
                &f,
                &[
                    (PlacePosition::Infinity, one.clone()),
                    (PlacePosition::Finite(0), one)
                ],
                3,
                &MultiIndex(vec![1])
            )
            .unwrap(),
            rat(2)
        );
    }

    #[test]
    fn lefschetz_coefficients_specialize_per_residue_field() {
        // Π_v (1 + L T)|_v = Π_v (1 + q^{deg v} T^{deg v}): at T^2 over F_2
        // the contributions are 2·2·(pairs of distinct deg-1 points)
        // ... i.e. Σ_{v<w deg 1} q^2 + Σ_{deg 2} q^2 = (3 + 1)·4 = 16.
        let f = univariate(&[(0, "1"), (1, "L")], 4);
        assert_eq!(
            euler_coeff_bruteforce(&f, &[], 2, &MultiIndex(vec![2])).unwrap(),
            rat(16)
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        let f = univariate(&[(0, "1")], 2);
        assert!(matches!(
            euler_coeff_bruteforce(&f, &[], 4, &MultiIndex(vec![0])),
            Err(OracleError::NotPrime(4))
        ));
        assert!(matches!(
            euler_coeff_bruteforce(&f, &[], 2, &MultiIndex(vec![0, 0])),
            Err(OracleError::TargetLen { .. })
        ));
        assert!(matches!(
            euler_coeff_bruteforce(&f, &[], 2, &MultiIndex(vec![3])),
            Err(OracleError::BoundTooSmall { .. })
        ));
    }
}
