//! Zeta functions of smooth projective curves and Euler products over their
//! closed points.
//!
//! The zeta series of a curve packages the classes of its symmetric powers;
//! for a curve of genus `g` these are governed by the Picard variety from
//! degree `2g-1` on, so the whole series is rational with an explicit
//! numerator of degree `2g`. On top of it sits the product machinery: a
//! local factor with constant term 1 and integer Laurent coefficients can be
//! factored — uniquely and triangularly — into binomials `(1 - L^j T^m)`,
//! and its product over all closed points of the curve is then read off by
//! replacing each binomial with the corresponding zeta value. Finitely many
//! places may carry replacement factors, spliced in at degree one.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use thiserror::Error;

use crate::motive::{MotiveElt, Weight};
use crate::mvseries::{DegreeForm, MSeries, MultiIndex, SeriesError, VarSet};

#[derive(Debug, Error)]
pub enum CurveError {
    #[error("genus-{genus} curve needs {expected} low symmetric-power classes, got {got}")]
    LowSymCount {
        genus: u32,
        expected: usize,
        got: usize,
    },
    #[error("class for Sym^{m} has weight {got:?}, expected {expected}")]
    WeightMismatch { m: u64, got: Weight, expected: i64 },
    #[error("zeta value at L^{exponent} is a pole")]
    PoleAtEvaluation { exponent: i64 },
    #[error("series substitution needs a nonzero exponent vector")]
    ZeroIndex,
    #[error("coefficient at {0:?} involves curve symbols and cannot be factored")]
    NonLaurentCoefficient(String),
    #[error("factor exponent {0} does not fit in a machine integer")]
    ExponentOverflow(BigInt),
    #[error("local factor must have constant term 1")]
    NotNormalized,
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Returns `1 + L + ... + L^{k-1}` (the class of projective space of
/// dimension `k-1`), or zero when `k <= 0`.
pub fn geom_unit(k: i64) -> MotiveElt {
    let mut acc = MotiveElt::zero();
    for i in 0..k.max(0) {
        acc = acc.add(&MotiveElt::lefschetz(i));
    }
    acc
}

/// A smooth projective curve presented through the classes that its zeta
/// series needs: the degree-zero Picard class and, for genus at least two,
/// the symmetric-power classes below the projective-bundle range.
#[derive(Debug, Clone)]
pub struct CurveData {
    genus: u32,
    pic0: MotiveElt,
    low_syms: Vec<MotiveElt>,
}

impl CurveData {
    /// The projective line: trivial Picard group, everything geometric.
    pub fn projective_line() -> CurveData {
        CurveData {
            genus: 0,
            pic0: MotiveElt::one(),
            low_syms: Vec::new(),
        }
    }

    /// Builds curve data, checking that the supplied classes have the
    /// weights forced by their geometry: `Sym^m` has weight `2m` and the
    /// Picard class has weight `2g`.
    pub fn new(genus: u32, pic0: MotiveElt, low_syms: Vec<MotiveElt>) -> Result<Self, CurveError> {
        let expected = if genus >= 2 { (2 * genus - 2) as usize } else { 0 };
        if low_syms.len() != expected {
            return Err(CurveError::LowSymCount {
                genus,
                expected,
                got: low_syms.len(),
            });
        }
        let wpic = pic0.weight();
        if wpic != Weight::Finite(2 * genus as i64) {
            return Err(CurveError::WeightMismatch {
                m: 0,
                got: wpic,
                expected: 2 * genus as i64,
            });
        }
        for (i, s) in low_syms.iter().enumerate() {
            let m = (i + 1) as u64;
            let w = s.weight();
            if w != Weight::Finite(2 * m as i64) {
                return Err(CurveError::WeightMismatch {
                    m,
                    got: w,
                    expected: 2 * m as i64,
                });
            }
        }
        Ok(CurveData {
            genus,
            pic0,
            low_syms,
        })
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn pic0(&self) -> &MotiveElt {
        &self.pic0
    }

    /// The class of the `m`-th symmetric power. From degree `2g-1` on this
    /// is a projective bundle over the Picard variety; below, it is the
    /// declared class (and the point in degree zero).
    pub fn sym_class(&self, m: u64) -> MotiveElt {
        let g = self.genus as i64;
        if (m as i64) < 2 * g - 1 {
            if m == 0 {
                MotiveElt::one()
            } else {
                self.low_syms[(m - 1) as usize].clone()
            }
        } else {
            self.pic0.mul(&geom_unit(m as i64 - g + 1))
        }
    }

    /// How far `Sym^m` deviates from the stabilized bundle formula. Zero
    /// from degree `2g-1` on, and identically zero in genus zero, which is
    /// what lets one code path serve every genus.
    pub fn kapranov_correction(&self, m: u64) -> MotiveElt {
        let g = self.genus as i64;
        self.sym_class(m)
            .sub(&self.pic0.mul(&geom_unit(m as i64 - g + 1)))
    }

    /// Coefficients of the zeta numerator `P` with
    /// `Z(T) = P(T) / ((1-T)(1-LT))`; a polynomial of degree `2g`.
    pub fn zeta_numerator(&self) -> Vec<MotiveElt> {
        let g = self.genus as u64;
        let one_plus_l = MotiveElt::one().add(&MotiveElt::lefschetz(1));
        let mut out = Vec::with_capacity(2 * g as usize + 1);
        for m in 0..=2 * g {
            // p_m = s_m - (1+L) s_{m-1} + L s_{m-2}.
            let mut p = self.sym_class(m);
            if m >= 1 {
                p = p.sub(&self.sym_class(m - 1).mul(&one_plus_l));
            }
            if m >= 2 {
                p = p.add(&self.sym_class(m - 2).mul_lefschetz(1));
            }
            out.push(p);
        }
        out
    }

    /// The zeta series evaluated at `L^e`, kept as an exact fraction
    /// `num / ((1-L^e)(1-L^{e+1}))`. Exponents 0 and -1 hit the poles.
    pub fn zeta_value(&self, e: i64) -> Result<ZetaValue, CurveError> {
        if e == 0 || e == -1 {
            return Err(CurveError::PoleAtEvaluation { exponent: e });
        }
        let mut num = MotiveElt::zero();
        for (m, p) in self.zeta_numerator().into_iter().enumerate() {
            num = num.add(&p.mul_lefschetz(e * m as i64));
        }
        Ok(ZetaValue {
            num,
            denom_exps: vec![e, e + 1],
        })
    }
}

/// An exact zeta evaluation `num / prod_i (1 - L^{e_i})`, left unreduced so
/// downstream products can cancel numerators against denominators.
#[derive(Debug, Clone)]
pub struct ZetaValue {
    pub num: MotiveElt,
    pub denom_exps: Vec<i64>,
}

/// The truncated series `Z_C(L^j T^delta)`: coefficient `[Sym^k C]·L^{jk}`
/// at index `k·delta`, for every `k` within the degree bound.
pub fn zeta_series(
    curve: &CurveData,
    vars: &Arc<VarSet>,
    form: &DegreeForm,
    bound: u64,
    j: i64,
    delta: &MultiIndex,
) -> Result<MSeries, CurveError> {
    if delta.is_zero() {
        return Err(CurveError::ZeroIndex);
    }
    let mut out = MSeries::zero(Arc::clone(vars), form.clone(), bound)?;
    let mut k = 0u64;
    loop {
        let idx = delta.scale(k as u32);
        if form.degree(&idx) > bound {
            break;
        }
        out.set_coeff(idx, curve.sym_class(k).mul_lefschetz(j * k as i64))?;
        k += 1;
    }
    Ok(out)
}

/// One binomial layer of a factorization: at exponent vector `index`, the
/// product over `j` of `(1 - L^j T^index)^{e_j}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorLayer {
    pub index: MultiIndex,
    /// Pairs `(j, e_j)` with nonzero integer exponents.
    pub exponents: Vec<(i64, i64)>,
}

/// A triangular factorization of a local factor into Lefschetz-twisted
/// binomials, valid up to the carried degree bound.
#[derive(Debug, Clone)]
pub struct Factorization {
    pub layers: Vec<FactorLayer>,
}

/// Factors `f = prod (1 - L^j T^m)^{e_{m,j}}` by clearing coefficients in
/// graded-lexicographic order. Requires constant term exactly 1 and pure
/// Laurent coefficients; both failures are reported, never repaired.
pub fn plethystic_factorization(f: &MSeries) -> Result<Factorization, CurveError> {
    let zero_idx = MultiIndex::zeros(f.vars().len());
    if !f.coefficient(&zero_idx)?.is_one() {
        return Err(CurveError::NotNormalized);
    }
    let mut residual = f.clone();
    let mut layers = Vec::new();
    loop {
        // Smallest nonzero index in graded-lex order, skipping the constant.
        let next = residual
            .support()
            .filter(|(m, c)| !m.is_zero() && !c.is_zero())
            .map(|(m, _)| m.clone())
            .next();
        let Some(m) = next else { break };
        let b = residual.coefficient(&m)?;
        let laurent = b
            .as_laurent()
            .ok_or_else(|| CurveError::NonLaurentCoefficient(format!("{m:?}")))?;
        let mut exponents = Vec::new();
        for (j, c) in laurent {
            let e = (-&c)
                .to_i64()
                .ok_or_else(|| CurveError::ExponentOverflow(c.abs()))?;
            if e != 0 {
                exponents.push((j, e));
            }
        }
        let layer = FactorLayer {
            index: m.clone(),
            exponents,
        };
        // Divide the residual by this layer, clearing the coefficient at m.
        let inv = layer_series(&layer, &residual, true)?;
        residual = residual.series_mul(&inv)?;
        debug_assert!(residual.coefficient(&m).unwrap().is_zero());
        layers.push(layer);
    }
    Ok(Factorization { layers })
}

/// Expands one layer (or its inverse) as a truncated series in the shape of
/// `like`.
fn layer_series(layer: &FactorLayer, like: &MSeries, invert: bool) -> Result<MSeries, CurveError> {
    let mut acc = MSeries::one(Arc::clone(like.vars()), like.form().clone(), like.bound())?;
    for &(j, e) in &layer.exponents {
        let mut binom = MSeries::one(Arc::clone(like.vars()), like.form().clone(), like.bound())?;
        if like.form().degree(&layer.index) <= like.bound() {
            binom.set_coeff(layer.index.clone(), MotiveElt::lefschetz(j).neg())?;
        }
        let e = if invert { -e } else { e };
        acc = acc.series_mul(&series_pow(&binom, e)?)?;
    }
    Ok(acc)
}

/// Multiplies the factorization back out, for checking it against the
/// series it came from.
pub fn re_expand(fac: &Factorization, like: &MSeries) -> Result<MSeries, CurveError> {
    let mut acc = MSeries::one(Arc::clone(like.vars()), like.form().clone(), like.bound())?;
    for layer in &fac.layers {
        acc = acc.series_mul(&layer_series(layer, &acc, false)?)?;
    }
    Ok(acc)
}

/// The product of a factored local factor over all closed points of the
/// curve: each binomial `(1 - L^j T^m)^e` contributes `Z_C(L^j T^m)^{-e}`.
pub fn sigma_expand(
    fac: &Factorization,
    curve: &CurveData,
    like: &MSeries,
) -> Result<MSeries, CurveError> {
    let mut acc = MSeries::one(Arc::clone(like.vars()), like.form().clone(), like.bound())?;
    for layer in &fac.layers {
        for &(j, e) in &layer.exponents {
            let z = zeta_series(
                curve,
                like.vars(),
                like.form(),
                like.bound(),
                j,
                &layer.index,
            )?;
            acc = acc.series_mul(&series_pow(&z, -e)?)?;
        }
    }
    Ok(acc)
}

/// Raises a unit series to an integer power, inverting first for negative
/// exponents.
pub fn series_pow(s: &MSeries, e: i64) -> Result<MSeries, CurveError> {
    let base = if e < 0 { s.invert_unit()? } else { s.clone() };
    let mut n = e.unsigned_abs();
    let mut acc = MSeries::one(Arc::clone(s.vars()), s.form().clone(), s.bound())?;
    let mut sq = base;
    while n > 0 {
        if n & 1 == 1 {
            acc = acc.series_mul(&sq)?;
        }
        n >>= 1;
        if n > 0 {
            sq = sq.series_mul(&sq)?;
        }
    }
    Ok(acc)
}

/// The motivic Euler product over the curve of a uniform local factor, with
/// optional replacement factors at finitely many degree-one places: the
/// uniform factor is factored and summed over all points, then each listed
/// place swaps its copy of the uniform factor for its own.
pub fn euler_product_over_curve(
    generic: &MSeries,
    overrides: &[MSeries],
    curve: &CurveData,
) -> Result<MSeries, CurveError> {
    let fac = plethystic_factorization(generic)?;
    let mut acc = sigma_expand(&fac, curve, generic)?;
    if !overrides.is_empty() {
        let inv_generic = generic.invert_unit()?;
        for special in overrides {
            acc = acc.series_mul(special)?.series_mul(&inv_generic)?;
        }
    }
    Ok(acc)
}
