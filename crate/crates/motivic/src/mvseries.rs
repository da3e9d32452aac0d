//! Multivariate power series over the motive ring, truncated along a
//! positive linear degree form.
//!
//! A series lives on a fixed ordered variable set ([`VarSet`]) with a degree
//! form assigning each variable a positive weight; only coefficients of total
//! form-degree up to a bound are stored. Variable sets come in two flavours:
//! plain (one variable per name) and refined (an extra block of variables per
//! distinguished place, used when coefficients are tracked per place).
//! Multiplication truncates; inversion requires constant term `1`; partial
//! sums with a Lefschetz normalization feed the convergence analysis.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec;
use crate::motive::{MotiveElt, MotiveError, SymbolTable};

/// Errors from series construction and arithmetic.
#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("degree form coefficients must be >= 1")]
    BadForm,
    #[error("degree form has {form} coefficients but the variable set has {vars}")]
    FormLenMismatch { form: usize, vars: usize },
    #[error("multi-index has {index} entries but the variable set has {vars}")]
    IndexLenMismatch { index: usize, vars: usize },
    #[error("series shapes differ (variables, form, or bound)")]
    ShapeMismatch,
    #[error("coefficient at degree {degree} lies beyond the stored bound {bound}")]
    BeyondBound { degree: u64, bound: u64 },
    #[error("inversion requires constant term 1")]
    NonUnit,
    #[error("unknown variable `{0}`")]
    UnknownVar(String),
    #[error("malformed series JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Motive(#[from] MotiveError),
}

/// A series variable: a component name, optionally pinned to a distinguished
/// place (refined sets only).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Var {
    pub alpha: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub place: Option<String>,
}

impl Var {
    pub fn plain(alpha: &str) -> Self {
        Var {
            alpha: alpha.to_owned(),
            place: None,
        }
    }

    pub fn at_place(alpha: &str, place: &str) -> Self {
        Var {
            alpha: alpha.to_owned(),
            place: Some(place.to_owned()),
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.place {
            None => write!(f, "{}", self.alpha),
            Some(p) => write!(f, "{}@{}", self.alpha, p),
        }
    }
}

/// An ordered set of series variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarSet {
    vars: Vec<Var>,
    refined: bool,
}

impl VarSet {
    /// One variable per component name.
    pub fn plain(alphas: &[String]) -> Arc<Self> {
        Arc::new(VarSet {
            vars: alphas.iter().map(|a| Var::plain(a)).collect(),
            refined: false,
        })
    }

    /// A block of place-free variables followed by one block per
    /// distinguished place, in the given order.
    pub fn refined(alphas: &[String], places: &[String]) -> Arc<Self> {
        let mut vars: Vec<Var> = alphas.iter().map(|a| Var::plain(a)).collect();
        for s in places {
            for a in alphas {
                vars.push(Var::at_place(a, s));
            }
        }
        Arc::new(VarSet {
            vars,
            refined: true,
        })
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn is_refined(&self) -> bool {
        self.refined
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn index_of(&self, v: &Var) -> Option<usize> {
        self.vars.iter().position(|w| w == v)
    }
}

/// An exponent vector aligned with a [`VarSet`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zeros(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        MultiIndex(v)
    }

    pub fn add(&self, other: &Self) -> Self {
        MultiIndex(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// Componentwise `<=`.
    pub fn leq(&self, other: &Self) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn sub(&self, other: &Self) -> Option<Self> {
        if !other.leq(self) {
            return None;
        }
        Some(MultiIndex(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn scale(&self, n: u32) -> Self {
        MultiIndex(self.0.iter().map(|a| a * n).collect())
    }
}

/// A positive linear degree form on a variable set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeForm {
    coeffs: Vec<u64>,
}

impl DegreeForm {
    pub fn new(coeffs: Vec<u64>) -> Result<Self, SeriesError> {
        if coeffs.iter().any(|&c| c == 0) {
            return Err(SeriesError::BadForm);
        }
        Ok(DegreeForm { coeffs })
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn degree(&self, m: &MultiIndex) -> u64 {
        self.coeffs
            .iter()
            .zip(&m.0)
            .map(|(c, e)| c * *e as u64)
            .sum()
    }
}

/// All exponent vectors of form-degree at most `bound`, in graded order
/// (degree, then lexicographic).
pub fn graded_indices(nvars: usize, form: &DegreeForm, bound: u64) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; nvars];
    fill(&mut out, &mut cur, 0, 0, form, bound);
    out.sort_by_key(|m| (form.degree(m), m.0.clone()));
    return out;

    fn fill(
        out: &mut Vec<MultiIndex>,
        cur: &mut Vec<u32>,
        pos: usize,
        used: u64,
        form: &DegreeForm,
        bound: u64,
    ) {
        if pos == cur.len() {
            out.push(MultiIndex(cur.clone()));
            return;
        }
        let step = form.coeffs()[pos];
        let mut e = 0u32;
        while used + step * e as u64 <= bound {
            cur[pos] = e;
            fill(out, cur, pos + 1, used + step * e as u64, form, bound);
            e += 1;
        }
        cur[pos] = 0;
    }
}

/// A power series truncated to form-degree `<= bound`; only nonzero
/// coefficients are stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MSeries {
    vars: Arc<VarSet>,
    form: DegreeForm,
    bound: u64,
    coeffs: BTreeMap<MultiIndex, MotiveElt>,
}

impl MSeries {
    pub fn zero(vars: Arc<VarSet>, form: DegreeForm, bound: u64) -> Result<Self, SeriesError> {
        if form.coeffs().len() != vars.len() {
            return Err(SeriesError::FormLenMismatch {
                form: form.coeffs().len(),
                vars: vars.len(),
            });
        }
        Ok(MSeries {
            vars,
            form,
            bound,
            coeffs: BTreeMap::new(),
        })
    }

    pub fn one(vars: Arc<VarSet>, form: DegreeForm, bound: u64) -> Result<Self, SeriesError> {
        let mut s = Self::zero(vars, form, bound)?;
        let z = MultiIndex::zeros(s.vars.len());
        s.coeffs.insert(z, MotiveElt::one());
        Ok(s)
    }

    pub fn vars(&self) -> &Arc<VarSet> {
        &self.vars
    }
    pub fn form(&self) -> &DegreeForm {
        &self.form
    }
    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.vars == other.vars && self.form == other.form && self.bound == other.bound
    }

    /// Nonzero coefficients in index order.
    pub fn support(&self) -> impl Iterator<Item = (&MultiIndex, &MotiveElt)> {
        self.coeffs.iter()
    }

    pub fn num_nonzero(&self) -> usize {
        self.coeffs.len()
    }

    /// Adds `c` to the coefficient at `m`; errors beyond the bound.
    pub fn add_to_coeff(&mut self, m: MultiIndex, c: MotiveElt) -> Result<(), SeriesError> {
        self.check_index(&m)?;
        match self.coeffs.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                if !c.is_zero() {
                    e.insert(c);
                }
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().add(&c);
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
        Ok(())
    }

    pub fn set_coeff(&mut self, m: MultiIndex, c: MotiveElt) -> Result<(), SeriesError> {
        self.check_index(&m)?;
        if c.is_zero() {
            self.coeffs.remove(&m);
        } else {
            self.coeffs.insert(m, c);
        }
        Ok(())
    }

    fn check_index(&self, m: &MultiIndex) -> Result<(), SeriesError> {
        if m.0.len() != self.vars.len() {
            return Err(SeriesError::IndexLenMismatch {
                index: m.0.len(),
                vars: self.vars.len(),
            });
        }
        let degree = self.form.degree(m);
        if degree > self.bound {
            return Err(SeriesError::BeyondBound {
                degree,
                bound: self.bound,
            });
        }
        Ok(())
    }

    /// The coefficient at `m` (zero if absent); errors beyond the stored
    /// bound rather than returning a misleading zero.
    pub fn coefficient(&self, m: &MultiIndex) -> Result<MotiveElt, SeriesError> {
        self.check_index(m)?;
        Ok(self.coeffs.get(m).cloned().unwrap_or_else(MotiveElt::zero))
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        if !self.same_shape(other) {
            return Err(SeriesError::ShapeMismatch);
        }
        let mut out = self.clone();
        for (m, c) in &other.coeffs {
            out.add_to_coeff(m.clone(), c.clone())?;
        }
        Ok(out)
    }

    pub fn scale(&self, c: &MotiveElt) -> Self {
        let mut out = MSeries {
            vars: self.vars.clone(),
            form: self.form.clone(),
            bound: self.bound,
            coeffs: BTreeMap::new(),
        };
        for (m, v) in &self.coeffs {
            let p = v.mul(c);
            if !p.is_zero() {
                out.coeffs.insert(m.clone(), p);
            }
        }
        out
    }

    /// Truncated product. Runs on the parallel core when enabled.
    pub fn series_mul(&self, other: &Self) -> Result<Self, SeriesError> {
        if !self.same_shape(other) {
            return Err(SeriesError::ShapeMismatch);
        }
        let lhs: Vec<(&MultiIndex, &MotiveElt)> = self.coeffs.iter().collect();
        let partials = exec::map_collect(lhs, |(ma, ca)| {
            let mut local: BTreeMap<MultiIndex, MotiveElt> = BTreeMap::new();
            let da = self.form.degree(ma);
            for (mb, cb) in &other.coeffs {
                if da + other.form.degree(mb) > self.bound {
                    continue;
                }
                let m = ma.add(mb);
                let p = ca.mul(cb);
                if p.is_zero() {
                    continue;
                }
                match local.entry(m) {
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(p);
                    }
                    std::collections::btree_map::Entry::Occupied(mut e) => {
                        let s = e.get().add(&p);
                        if s.is_zero() {
                            e.remove();
                        } else {
                            *e.get_mut() = s;
                        }
                    }
                }
            }
            local
        });
        let mut coeffs: BTreeMap<MultiIndex, MotiveElt> = BTreeMap::new();
        for part in partials {
            for (m, c) in part {
                match coeffs.entry(m) {
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(c);
                    }
                    std::collections::btree_map::Entry::Occupied(mut e) => {
                        let s = e.get().add(&c);
                        if s.is_zero() {
                            e.remove();
                        } else {
                            *e.get_mut() = s;
                        }
                    }
                }
            }
        }
        Ok(MSeries {
            vars: self.vars.clone(),
            form: self.form.clone(),
            bound: self.bound,
            coeffs,
        })
    }

    /// Inverse of a series with constant term `1`, by degree induction.
    pub fn invert_unit(&self) -> Result<Self, SeriesError> {
        let zero_idx = MultiIndex::zeros(self.vars.len());
        match self.coeffs.get(&zero_idx) {
            Some(c) if c.is_one() => {}
            _ => return Err(SeriesError::NonUnit),
        }
        let mut inv: BTreeMap<MultiIndex, MotiveElt> = BTreeMap::new();
        inv.insert(zero_idx.clone(), MotiveElt::one());
        for m in graded_indices(self.vars.len(), &self.form, self.bound) {
            if m.is_zero() {
                continue;
            }
            // g_m = -Σ_{0 < m' <= m} f_{m'} g_{m-m'}
            let mut acc = MotiveElt::zero();
            for (mp, fc) in &self.coeffs {
                if mp.is_zero() || !mp.leq(&m) {
                    continue;
                }
                let rest = m.sub(mp).unwrap();
                if let Some(g) = inv.get(&rest) {
                    acc = acc.add(&fc.mul(g));
                }
            }
            if !acc.is_zero() {
                inv.insert(m, acc.neg());
            }
        }
        Ok(MSeries {
            vars: self.vars.clone(),
            form: self.form.clone(),
            bound: self.bound,
            coeffs: inv,
        })
    }

    /// Partial sums with Lefschetz normalization along `norm`:
    /// the output coefficient at `m` is `Σ_{m' <= m} c_{m'} L^{-<norm, m'>}`,
    /// the quantity whose large-degree behaviour the convergence
    /// certificates control.
    pub fn normalized_partial_sums(&self, norm: &DegreeForm) -> Result<Self, SeriesError> {
        if norm.coeffs().len() != self.vars.len() {
            return Err(SeriesError::FormLenMismatch {
                form: norm.coeffs().len(),
                vars: self.vars.len(),
            });
        }
        let normalized: Vec<(MultiIndex, MotiveElt)> = self
            .coeffs
            .iter()
            .map(|(m, c)| (m.clone(), c.mul_lefschetz(-(norm.degree(m) as i64))))
            .collect();
        let indices = graded_indices(self.vars.len(), &self.form, self.bound);
        let cells = exec::map_collect(indices, |m| {
            let mut acc = MotiveElt::zero();
            for (mp, c) in &normalized {
                if mp.leq(&m) {
                    acc = acc.add(c);
                }
            }
            (m, acc)
        });
        let mut coeffs = BTreeMap::new();
        for (m, c) in cells {
            if !c.is_zero() {
                coeffs.insert(m, c);
            }
        }
        Ok(MSeries {
            vars: self.vars.clone(),
            form: self.form.clone(),
            bound: self.bound,
            coeffs,
        })
    }

    /// Serializes to a JSON value with coefficients ordered by form-degree,
    /// then lexicographically.
    pub fn to_json_value(&self) -> serde_json::Value {
        let mut entries: Vec<(&MultiIndex, &MotiveElt)> = self.coeffs.iter().collect();
        entries.sort_by_key(|(m, _)| (self.form.degree(m), m.0.clone()));
        let json = SeriesJson {
            vars: self.vars.vars().to_vec(),
            refined: self.vars.is_refined(),
            form: self.form.coeffs().to_vec(),
            bound: self.bound,
            coeffs: entries
                .into_iter()
                .map(|(m, c)| (m.0.clone(), c.to_string()))
                .collect(),
        };
        serde_json::to_value(json).expect("series serialization cannot fail")
    }

    /// Rebuilds a series from [`MSeries::to_json_value`] output; element
    /// strings are parsed against `table`.
    pub fn from_json_value(
        v: &serde_json::Value,
        table: &SymbolTable,
    ) -> Result<Self, SeriesError> {
        let json: SeriesJson =
            serde_json::from_value(v.clone()).map_err(|e| SeriesError::Json(e.to_string()))?;
        let vars = Arc::new(VarSet {
            vars: json.vars,
            refined: json.refined,
        });
        let form = DegreeForm::new(json.form)?;
        let mut s = MSeries::zero(vars, form, json.bound)?;
        for (exps, text) in json.coeffs {
            let elt = table.parse(&text)?;
            s.set_coeff(MultiIndex(exps), elt)?;
        }
        Ok(s)
    }
}

#[derive(Serialize, Deserialize)]
struct SeriesJson {
    vars: Vec<Var>,
    refined: bool,
    form: Vec<u64>,
    bound: u64,
    coeffs: Vec<(Vec<u32>, String)>,
}
