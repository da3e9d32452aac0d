//! Convergence certificates for series with motive coefficients.
//!
//! A coefficient series converges in the weight topology when its terms,
//! normalized by the expected growth, lose weight at a linear rate. The
//! certificate here pins that down: coefficients up to a cut degree `M`
//! must satisfy a strict weight bound, coefficients beyond must sit under
//! an affine line, and from those hypotheses two explicit rational rates
//! fall out. Checking a certificate against a series is exact integer and
//! rational arithmetic; the only floating point in this module is the
//! least-squares slope of a decay report, which is diagnostic and never
//! feeds back into a certified statement.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::motive::Weight;
use crate::mvseries::{DegreeForm, MSeries, MultiIndex};

#[derive(Debug, Error)]
pub enum ConvergenceError {
    #[error("certificate parameters out of range: {0}")]
    BadParameters(String),
    #[error("derived decay rate {0} is not positive")]
    NonPositiveRate(BigRational),
    #[error(
        "coefficient at {index:?} (degree {degree}) has weight {found:?}, above the allowed {allowed}"
    )]
    CriterionViolated {
        index: MultiIndex,
        degree: u64,
        found: Weight,
        allowed: BigRational,
    },
    #[error("direction vector must have a strictly positive entry")]
    EmptyDirection,
    #[error("cannot combine an empty list of certificates")]
    NoCertificates,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// A weight-linear convergence certificate. The hypotheses on a series
/// with coefficients `c_m`, written with `d = <rho, m>`:
///
/// - for `1 <= d <= m_cut`:  `w(c_m) <= (d - 1/2 - eps) * weight_x`;
/// - for `d > m_cut`:        `w(c_m) <= (alpha*d + beta - 1/2) * weight_x`.
///
/// From these follow the primary rate `delta` (weight loss per degree of
/// the normalized coefficients) and the secondary rate `delta_prime`
/// governing the tail after evaluation. Rates are computed from clamped
/// parameters so that `delta` always lands in `(0, 1/2]`; the hypotheses
/// are still checked against the declared values.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConvCert {
    weight_x: i64,
    m_cut: u64,
    eps: BigRational,
    alpha: BigRational,
    beta: BigRational,
    delta: BigRational,
    delta_prime: BigRational,
}

impl LinearConvCert {
    pub fn new(
        weight_x: i64,
        m_cut: u64,
        eps: BigRational,
        alpha: BigRational,
        beta: BigRational,
    ) -> Result<Self, ConvergenceError> {
        if weight_x < 1 {
            return Err(ConvergenceError::BadParameters(format!(
                "ambient weight {weight_x} must be at least 1"
            )));
        }
        if !eps.is_positive() {
            return Err(ConvergenceError::BadParameters(format!(
                "eps = {eps} must be positive"
            )));
        }
        if alpha >= BigRational::one() {
            return Err(ConvergenceError::BadParameters(format!(
                "alpha = {alpha} must be below 1"
            )));
        }
        if beta.is_negative() {
            return Err(ConvergenceError::BadParameters(format!(
                "beta = {beta} must be nonnegative"
            )));
        }
        let delta = if m_cut >= 1 {
            let m = BigRational::from_integer(BigInt::from(m_cut));
            let eps_eff = eps.clone().min(m.clone() * rat(1, 2));
            (eps_eff / m).min(BigRational::one() - alpha.clone())
        } else {
            BigRational::one() - alpha.clone().max(rat(1, 2))
        };
        debug_assert!(delta.is_positive() && delta <= rat(1, 2));
        let wx = BigRational::from_integer(BigInt::from(weight_x));
        let m1 = BigRational::from_integer(BigInt::from(m_cut + 1));
        let delta_prime =
            rat(2, 1) - wx * (BigRational::one() - delta.clone() + beta.clone() / m1);
        if !delta_prime.is_positive() {
            return Err(ConvergenceError::NonPositiveRate(delta_prime));
        }
        Ok(LinearConvCert {
            weight_x,
            m_cut,
            eps,
            alpha,
            beta,
            delta,
            delta_prime,
        })
    }

    /// The certificate for a polynomial local factor over a curve base:
    /// `eps = 1/2`, `beta = 0`, and the line beyond the cut chosen flat
    /// enough that the low-range rate is the binding one. The low-range
    /// hypothesis then reads `w(c_m) <= 2(d - 1)`.
    pub fn standard(m_cut: u64) -> Result<Self, ConvergenceError> {
        let alpha = if m_cut >= 1 {
            BigRational::one() - rat(1, 2 * m_cut as i64)
        } else {
            rat(1, 2)
        };
        Self::new(2, m_cut, rat(1, 2), alpha, BigRational::zero())
    }

    pub fn weight_x(&self) -> i64 {
        self.weight_x
    }

    pub fn m_cut(&self) -> u64 {
        self.m_cut
    }

    pub fn delta(&self) -> &BigRational {
        &self.delta
    }

    pub fn delta_prime(&self) -> &BigRational {
        &self.delta_prime
    }

    /// The weight ceiling the hypotheses place on a coefficient of degree
    /// `d >= 1`.
    pub fn allowed_weight(&self, d: u64) -> BigRational {
        let d = BigRational::from_integer(BigInt::from(d));
        let wx = BigRational::from_integer(BigInt::from(self.weight_x));
        if d <= BigRational::from_integer(BigInt::from(self.m_cut)) {
            (d - rat(1, 2) - self.eps.clone()) * wx
        } else {
            (self.alpha.clone() * d + self.beta.clone() - rat(1, 2)) * wx
        }
    }
}

/// Checks every nonconstant coefficient of `series` against the
/// certificate's weight ceiling, with degrees taken along `rho`.
pub fn check_series(
    cert: &LinearConvCert,
    series: &MSeries,
    rho: &DegreeForm,
) -> Result<(), ConvergenceError> {
    for (m, c) in series.support() {
        if m.is_zero() {
            continue;
        }
        let d = rho.degree(m);
        let allowed = cert.allowed_weight(d);
        match c.weight() {
            Weight::NegInf => {}
            Weight::Finite(w) => {
                if BigRational::from_integer(BigInt::from(w)) > allowed {
                    return Err(ConvergenceError::CriterionViolated {
                        index: m.clone(),
                        degree: d,
                        found: Weight::Finite(w),
                        allowed,
                    });
                }
            }
        }
    }
    Ok(())
}

/// Certifies a local factor wholesale: the cut is the top degree of its
/// support, and the standard parameters must hold everywhere. Returns the
/// certificate with its derived rates.
pub fn certify_polynomial_factor(
    series: &MSeries,
    rho: &DegreeForm,
) -> Result<LinearConvCert, ConvergenceError> {
    let m_cut = series
        .support()
        .filter(|(m, _)| !m.is_zero())
        .map(|(m, _)| rho.degree(m))
        .max()
        .unwrap_or(0);
    let cert = LinearConvCert::standard(m_cut)?;
    check_series(&cert, series, rho)?;
    Ok(cert)
}

/// Combines certificates of factors in a product: the product converges at
/// half the slowest rate, recorded in the cut-free normal form.
pub fn combine_product_certs(
    certs: &[LinearConvCert],
) -> Result<LinearConvCert, ConvergenceError> {
    let slowest = certs
        .iter()
        .map(|c| c.delta.clone())
        .min()
        .ok_or(ConvergenceError::NoCertificates)?;
    let weight_x = certs.iter().map(|c| c.weight_x).max().unwrap();
    let delta = slowest * rat(1, 2);
    LinearConvCert::new(
        weight_x,
        0,
        rat(1, 2),
        BigRational::one() - delta,
        BigRational::zero(),
    )
}

/// Exact max-rule weight bound for a product against a decaying family:
/// terms at `m'` with weight at most `profile[m']`, multiplied by factors
/// losing `2<eps, k>` of weight at offset `k`, contribute at most
/// `max_{m' <= m} (profile[m'] - 2<eps, m - m'>)` at `m`. `None` means no
/// contribution reaches `m` at all.
pub fn negligible_bound(
    profile: &BTreeMap<MultiIndex, i64>,
    epsvec: &[BigRational],
    m: &MultiIndex,
) -> Result<Option<BigRational>, ConvergenceError> {
    if epsvec.len() != m.0.len() {
        return Err(ConvergenceError::BadParameters(format!(
            "direction vector has {} entries for {} variables",
            epsvec.len(),
            m.0.len()
        )));
    }
    if epsvec.iter().any(|e| e.is_negative()) || epsvec.iter().all(|e| e.is_zero()) {
        return Err(ConvergenceError::EmptyDirection);
    }
    let mut best: Option<BigRational> = None;
    for (mp, &w) in profile {
        let Some(gap) = m.sub(mp) else { continue };
        let mut loss = BigRational::zero();
        for (i, g) in gap.0.iter().enumerate() {
            loss += epsvec[i].clone() * BigRational::from_integer(BigInt::from(*g));
        }
        let bound = BigRational::from_integer(BigInt::from(w)) - rat(2, 1) * loss;
        best = Some(match best {
            Some(b) => b.max(bound),
            None => bound,
        });
    }
    Ok(best)
}

/// One line of a decay report: the largest coefficient weight observed at
/// a degree, next to the certified ceiling.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayRow {
    pub degree: u64,
    pub observed: Option<i64>,
    pub certified: BigRational,
}

/// Observed weights by degree with the certified line, plus a least-squares
/// slope of the observed weights. The slope is a floating-point diagnostic:
/// useful for eyeballing the decay, never part of a certified claim.
#[derive(Debug, Clone)]
pub struct DecayReport {
    pub rows: Vec<DecayRow>,
    pub slope: Option<f64>,
}

pub fn weight_decay_report(
    series: &MSeries,
    rho: &DegreeForm,
    cert: &LinearConvCert,
) -> DecayReport {
    let mut by_degree: BTreeMap<u64, Option<i64>> = BTreeMap::new();
    let mut max_degree = 0;
    for (m, c) in series.support() {
        if m.is_zero() {
            continue;
        }
        let d = rho.degree(m);
        max_degree = max_degree.max(d);
        let entry = by_degree.entry(d).or_insert(None);
        if let Weight::Finite(w) = c.weight() {
            *entry = Some(entry.map_or(w, |prev| prev.max(w)));
        }
    }
    let mut rows = Vec::new();
    for d in 1..=max_degree {
        rows.push(DecayRow {
            degree: d,
            observed: by_degree.get(&d).copied().flatten(),
            certified: cert.allowed_weight(d),
        });
    }
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.observed.map(|w| (r.degree as f64, w as f64)))
        .collect();
    let slope = if points.len() >= 2 {
        let n = points.len() as f64;
        let sx: f64 = points.iter().map(|p| p.0).sum();
        let sy: f64 = points.iter().map(|p| p.1).sum();
        let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
        let denom = n * sxx - sx * sx;
        (denom.abs() > f64::EPSILON).then(|| (n * sxy - sx * sy) / denom)
    } else {
        None
    };
    DecayReport { rows, slope }
}
