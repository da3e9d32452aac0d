//! Assembly of the height-graded counting series for sections of a family
//! over a curve whose boundary is a union of marked divisor components.
//!
//! The inputs are the stratum classes of the boundary, per-component height
//! weights, and — at finitely many distinguished places — the fibre data of
//! an integral model together with a chosen branch and boundary face. The
//! generic local density is a polynomial factor which is transferred to a
//! product over all points of the base curve through its triangular
//! factorization; distinguished places swap in their own face factor and
//! local polynomial. The collapsed series yields the class of the space of
//! sections in each height, a predicted stable value of the normalized
//! classes as an explicit fraction, weight-decay certificates for the
//! convergence toward that value, and a separate check on the genus
//! correction terms of the curve.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::convergence::{
    certify_polynomial_factor, combine_product_certs, weight_decay_report, ConvergenceError,
    DecayReport, DecayRow, LinearConvCert,
};
use crate::curvezeta::{
    euler_product_over_curve, plethystic_factorization, zeta_series, CurveData, CurveError,
    Factorization,
};
use crate::motive::{MotiveElt, MotiveError, SymbolDecl, SymbolTable, Weight};
use crate::mvseries::{graded_indices, DegreeForm, MSeries, MultiIndex, SeriesError, Var, VarSet};

#[derive(Debug, Error)]
pub enum HeightZetaError {
    #[error("boundary component `{0}` is declared twice")]
    DuplicateComponent(String),
    #[error("`{0}` is not a declared boundary component")]
    UnknownComponent(String),
    #[error("{0} boundary components exceed the supported maximum of 16")]
    TooManyComponents(usize),
    #[error("height weight of `{name}` is {rho}; it must be at least {min}")]
    BadHeightWeight { name: String, rho: u64, min: u64 },
    #[error("the open-stratum class must be exactly L^{expected}, found `{found}`")]
    BadOpenStratum { expected: u32, found: String },
    #[error("stratum class at {key:?} has weight {found}, above the ceiling {allowed}")]
    StratumWeight {
        key: Vec<String>,
        found: Weight,
        allowed: i64,
    },
    #[error("distinguished place `{0}` is declared twice")]
    DuplicatePlace(String),
    #[error("place `{place}` has no branch `{branch}`")]
    UnknownBranch { place: String, branch: String },
    #[error("the chosen face {face:?} is not declared at place `{place}`")]
    UnknownFace { face: Vec<String>, place: String },
    #[error("no declared face of place `{place}` contains the component set {subset:?}")]
    NoFaceFor { place: String, subset: Vec<String> },
    #[error("face {face:?} has {size} vertices; only single-vertex faces admit a stable value here")]
    UnsupportedFace { face: Vec<String>, size: usize },
    #[error("cannot reduce the stable value: `{0}` has no invertible leading term")]
    NotReducible(String),
    #[error("this report needs exactly one free component and no distinguished places")]
    UnsupportedShape,
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Motive(#[from] MotiveError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Convergence(#[from] ConvergenceError),
}

/// Boundary of the generic fibre: named divisor components with height
/// weights, the subset carrying the integrality condition, and the classes
/// of the locally closed strata cut out by subsets of components.
#[derive(Debug, Clone)]
pub struct BoundaryData {
    alphabet: Vec<String>,
    rho: Vec<u64>,
    integral: BTreeSet<String>,
    n: u32,
    strata: BTreeMap<BTreeSet<String>, MotiveElt>,
}

impl BoundaryData {
    pub fn new(
        alphabet: Vec<String>,
        rho: Vec<u64>,
        integral: BTreeSet<String>,
        n: u32,
        strata: BTreeMap<BTreeSet<String>, MotiveElt>,
    ) -> Result<Self, HeightZetaError> {
        if alphabet.is_empty() {
            return Err(HeightZetaError::Config(
                "the boundary needs at least one component".into(),
            ));
        }
        if alphabet.len() > 16 {
            return Err(HeightZetaError::TooManyComponents(alphabet.len()));
        }
        let mut seen = BTreeSet::new();
        for a in &alphabet {
            if !seen.insert(a.clone()) {
                return Err(HeightZetaError::DuplicateComponent(a.clone()));
            }
        }
        if rho.len() != alphabet.len() {
            return Err(HeightZetaError::Config(format!(
                "{} height weights for {} components",
                rho.len(),
                alphabet.len()
            )));
        }
        for a in &integral {
            if !seen.contains(a) {
                return Err(HeightZetaError::UnknownComponent(a.clone()));
            }
        }
        for (a, &r) in alphabet.iter().zip(&rho) {
            // Integral components lose one from their height weight in the
            // integral model, so they must start at 2 to stay positive.
            let min = if integral.contains(a) { 2 } else { 1 };
            if r < min {
                return Err(HeightZetaError::BadHeightWeight {
                    name: a.clone(),
                    rho: r,
                    min,
                });
            }
        }
        for key in strata.keys() {
            for a in key {
                if !seen.contains(a) {
                    return Err(HeightZetaError::UnknownComponent(a.clone()));
                }
            }
        }
        let open = strata
            .get(&BTreeSet::new())
            .cloned()
            .unwrap_or_else(MotiveElt::zero);
        if open != MotiveElt::lefschetz(n as i64) {
            return Err(HeightZetaError::BadOpenStratum {
                expected: n,
                found: open.to_string(),
            });
        }
        for (key, class) in &strata {
            let allowed = 2 * (n as i64 - key.len() as i64);
            if let Weight::Finite(w) = class.weight() {
                if w > allowed {
                    return Err(HeightZetaError::StratumWeight {
                        key: key.iter().cloned().collect(),
                        found: class.weight(),
                        allowed,
                    });
                }
            }
        }
        Ok(BoundaryData {
            alphabet,
            rho,
            integral,
            n,
            strata,
        })
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn dim(&self) -> u32 {
        self.n
    }

    /// Height weight of a component.
    pub fn rho_of(&self, alpha: &str) -> u64 {
        let i = self.alphabet.iter().position(|a| a == alpha).unwrap();
        self.rho[i]
    }

    /// Height weight in the integral model: one less on the components that
    /// carry the integrality condition.
    pub fn rho_prime_of(&self, alpha: &str) -> u64 {
        self.rho_of(alpha) - u64::from(self.integral.contains(alpha))
    }

    /// Components the sections may cross away from the distinguished places.
    pub fn free_components(&self) -> Vec<String> {
        self.alphabet
            .iter()
            .filter(|a| !self.integral.contains(*a))
            .cloned()
            .collect()
    }

    pub fn integral_components(&self) -> &BTreeSet<String> {
        &self.integral
    }

    /// Class of the stratum lying on exactly the given components; zero when
    /// undeclared (an empty stratum).
    pub fn stratum(&self, key: &BTreeSet<String>) -> MotiveElt {
        self.strata
            .get(key)
            .cloned()
            .unwrap_or_else(MotiveElt::zero)
    }

    /// The grading form assigning each variable its component's height
    /// weight.
    pub fn rho_form(&self, vars: &VarSet) -> Result<DegreeForm, HeightZetaError> {
        Ok(DegreeForm::new(
            vars.vars().iter().map(|v| self.rho_of(&v.alpha)).collect(),
        )?)
    }

    /// Same, with the integral-model weights.
    pub fn rho_prime_form(&self, vars: &VarSet) -> Result<DegreeForm, HeightZetaError> {
        Ok(DegreeForm::new(
            vars.vars()
                .iter()
                .map(|v| self.rho_prime_of(&v.alpha))
                .collect(),
        )?)
    }
}

/// One branch of the fibre of the integral model at a distinguished place:
/// its stratum classes, a Lefschetz prefactor, and a height twist.
#[derive(Debug, Clone)]
pub struct SpecialBranch {
    pub id: String,
    pub lefschetz_shift: i64,
    pub twist: BTreeMap<String, u32>,
    pub strata: BTreeMap<BTreeSet<String>, MotiveElt>,
}

/// A distinguished place of the base curve: the branches of the fibre there
/// and the declared boundary faces (each a set of integral components with
/// common points); earlier faces take priority when assigning a face to a
/// component set.
#[derive(Debug, Clone)]
pub struct SpecialPlaceData {
    pub id: String,
    pub position: String,
    pub branches: Vec<SpecialBranch>,
    pub faces: Vec<BTreeSet<String>>,
}

/// The branch and face singled out for the assembly, applied at every
/// distinguished place.
#[derive(Debug, Clone)]
pub struct PlaceChoice {
    pub branch: String,
    pub face: BTreeSet<String>,
}

/// Which literal section counter realizes this family, for oracle runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectionSpec {
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
}

/// A fully validated problem instance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    pub table: SymbolTable,
    pub curve: CurveData,
    pub curve_counts: BTreeMap<u64, Vec<BigInt>>,
    pub boundary: BoundaryData,
    pub places: Vec<SpecialPlaceData>,
    pub choice: Option<PlaceChoice>,
    pub bound: u64,
    pub sections: Option<SectionSpec>,
}

// ---------------------------------------------------------------------------
// Config file loading.

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    name: String,
    bound: u64,
    curve: CurveConfig,
    #[serde(default)]
    symbols: Vec<SymbolConfig>,
    boundary: BoundaryConfig,
    #[serde(default)]
    places: Vec<PlaceConfig>,
    #[serde(default)]
    choice: Option<ChoiceConfig>,
    #[serde(default)]
    sections: Option<SectionSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveConfig {
    genus: u32,
    counts: BTreeMap<String, Vec<i64>>,
    #[serde(default)]
    pic0: Option<String>,
    #[serde(default)]
    low_sym_classes: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SymbolConfig {
    name: String,
    weight: i64,
    #[serde(default)]
    effective: Option<bool>,
    counts: BTreeMap<String, Vec<i64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundaryConfig {
    components: Vec<String>,
    height_weights: Vec<u64>,
    #[serde(default)]
    integral: Vec<String>,
    dim: u32,
    strata: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlaceConfig {
    id: String,
    position: String,
    branches: Vec<BranchConfig>,
    faces: Vec<FaceConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BranchConfig {
    id: String,
    #[serde(default)]
    shift: i64,
    #[serde(default)]
    twist: BTreeMap<String, u32>,
    strata: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FaceConfig {
    vertices: Vec<String>,
    #[serde(default)]
    class: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChoiceConfig {
    branch: String,
    face: Vec<String>,
}

fn cfg_err(msg: impl Into<String>) -> HeightZetaError {
    HeightZetaError::Config(msg.into())
}

fn parse_counts(
    raw: &BTreeMap<String, Vec<i64>>,
) -> Result<BTreeMap<u64, Vec<BigInt>>, HeightZetaError> {
    let mut out = BTreeMap::new();
    for (k, v) in raw {
        let q: u64 = k
            .parse()
            .map_err(|_| cfg_err(format!("count key `{k}` is not a prime power base")))?;
        out.insert(q, v.iter().map(|&c| BigInt::from(c)).collect());
    }
    Ok(out)
}

fn parse_strata(
    raw: &BTreeMap<String, String>,
    table: &SymbolTable,
) -> Result<BTreeMap<BTreeSet<String>, MotiveElt>, HeightZetaError> {
    let mut out = BTreeMap::new();
    for (key, text) in raw {
        let set: BTreeSet<String> = if key.is_empty() {
            BTreeSet::new()
        } else {
            key.split(',').map(|s| s.trim().to_owned()).collect()
        };
        out.insert(set, table.parse(text)?);
    }
    Ok(out)
}

impl Instance {
    /// Loads and validates an instance from its JSON description.
    pub fn from_json(text: &str) -> Result<Self, HeightZetaError> {
        let cfg: ConfigFile = serde_json::from_str(text).map_err(|e| cfg_err(e.to_string()))?;
        if cfg.bound == 0 {
            return Err(cfg_err("the height bound must be positive"));
        }
        let mut table = SymbolTable::new();
        for s in &cfg.symbols {
            table.declare(SymbolDecl {
                name: s.name.clone(),
                weight: s.weight,
                effective: s.effective.unwrap_or(true),
                counts: parse_counts(&s.counts)?,
            })?;
        }
        let curve_counts = parse_counts(&cfg.curve.counts)?;
        let curve = if cfg.curve.genus == 0 {
            if cfg.curve.pic0.is_some() || cfg.curve.low_sym_classes.is_some() {
                return Err(cfg_err("a genus-zero base carries no extra curve data"));
            }
            for (&q, row) in &curve_counts {
                for (k, c) in row.iter().enumerate() {
                    let expect = BigInt::from(q).pow(k as u32 + 1) + 1;
                    if *c != expect {
                        return Err(cfg_err(format!(
                            "genus-zero point count over q={q}, extension {}: got {c}, expected {expect}",
                            k + 1
                        )));
                    }
                }
            }
            CurveData::projective_line()
        } else {
            let pic0_text = cfg
                .curve
                .pic0
                .as_ref()
                .ok_or_else(|| cfg_err("a positive-genus base needs a degree-zero class"))?;
            let pic0 = table.parse(pic0_text)?;
            let low = cfg
                .curve
                .low_sym_classes
                .as_deref()
                .unwrap_or(&[])
                .iter()
                .map(|t| table.parse(t))
                .collect::<Result<Vec<_>, _>>()?;
            let curve = CurveData::new(cfg.curve.genus, pic0.clone(), low)?;
            if cfg.curve.genus == 1 {
                // An elliptic base is its own degree-zero part, so the point
                // counts of the curve and of pic0 must agree.
                for (&q, row) in &curve_counts {
                    for (k, c) in row.iter().enumerate() {
                        let got = pic0.specialize_count(q, k as u32 + 1)?;
                        if got != BigRational::from_integer(c.clone()) {
                            return Err(cfg_err(format!(
                                "genus-one point count over q={q}, extension {}: curve says {c}, degree-zero class says {got}",
                                k + 1
                            )));
                        }
                    }
                }
            }
            curve
        };
        let boundary = BoundaryData::new(
            cfg.boundary.components.clone(),
            cfg.boundary.height_weights.clone(),
            cfg.boundary.integral.iter().cloned().collect(),
            cfg.boundary.dim,
            parse_strata(&cfg.boundary.strata, &table)?,
        )?;
        let mut place_ids = BTreeSet::new();
        let mut places = Vec::new();
        for p in &cfg.places {
            if !place_ids.insert(p.id.clone()) {
                return Err(HeightZetaError::DuplicatePlace(p.id.clone()));
            }
            if p.position != "inf" && p.position.parse::<u64>().is_err() {
                return Err(cfg_err(format!(
                    "place `{}` position `{}` is neither `inf` nor an integer",
                    p.id, p.position
                )));
            }
            let mut branches = Vec::new();
            for b in &p.branches {
                for alpha in b.twist.keys() {
                    if !boundary.alphabet.contains(alpha) {
                        return Err(HeightZetaError::UnknownComponent(alpha.clone()));
                    }
                }
                branches.push(SpecialBranch {
                    id: b.id.clone(),
                    lefschetz_shift: b.shift,
                    twist: b.twist.clone(),
                    strata: parse_strata(&b.strata, &table)?,
                });
            }
            let mut faces = Vec::new();
            for f in &p.faces {
                let set: BTreeSet<String> = f.vertices.iter().cloned().collect();
                if set.is_empty() {
                    return Err(cfg_err(format!("place `{}` declares an empty face", p.id)));
                }
                for a in &set {
                    if !boundary.integral.contains(a) {
                        return Err(HeightZetaError::UnknownComponent(a.clone()));
                    }
                }
                if let Some(class_text) = &f.class {
                    // A declared face class is a consistency datum: it must
                    // match the branch stratum it names, wherever declared.
                    let class = table.parse(class_text)?;
                    for b in &branches {
                        if let Some(s) = b.strata.get(&set) {
                            if *s != class {
                                return Err(cfg_err(format!(
                                    "face {:?} class disagrees with branch `{}`",
                                    f.vertices, b.id
                                )));
                            }
                        }
                    }
                }
                faces.push(set);
            }
            places.push(SpecialPlaceData {
                id: p.id.clone(),
                position: p.position.clone(),
                branches,
                faces,
            });
        }
        let choice = cfg.choice.map(|c| PlaceChoice {
            branch: c.branch,
            face: c.face.into_iter().collect(),
        });
        if !places.is_empty() && choice.is_none() {
            return Err(cfg_err(
                "distinguished places need a chosen branch and face",
            ));
        }
        Ok(Instance {
            name: cfg.name,
            table,
            curve,
            curve_counts,
            boundary,
            places,
            choice,
            bound: cfg.bound,
            sections: cfg.sections,
        })
    }
}

// ---------------------------------------------------------------------------
// Series assembly.

/// `1 - L^lexp * T_v` as a truncated series.
fn binomial_factor(
    vars: &Arc<VarSet>,
    form: &DegreeForm,
    bound: u64,
    pos: usize,
    lexp: i64,
) -> Result<MSeries, HeightZetaError> {
    let mut s = MSeries::one(Arc::clone(vars), form.clone(), bound)?;
    let idx = MultiIndex::unit(vars.len(), pos);
    if form.degree(&idx) <= bound {
        s.set_coeff(idx, MotiveElt::lefschetz(lexp).neg())?;
    }
    Ok(s)
}

/// `(1 - L^lexp * T_v)^{-1}` as a truncated geometric series.
fn geometric_factor(
    vars: &Arc<VarSet>,
    form: &DegreeForm,
    bound: u64,
    pos: usize,
    lexp: i64,
) -> Result<MSeries, HeightZetaError> {
    let mut s = MSeries::zero(Arc::clone(vars), form.clone(), bound)?;
    let unit = MultiIndex::unit(vars.len(), pos);
    let mut k = 0u32;
    loop {
        let idx = unit.scale(k);
        if form.degree(&idx) > bound {
            break;
        }
        s.set_coeff(idx, MotiveElt::lefschetz(lexp * k as i64))?;
        k += 1;
    }
    Ok(s)
}

/// The local density of sections at a generic place, as a polynomial in the
/// free-component variables: each subset of crossed components contributes
/// its stratum class with the measure and height twist of the crossing.
fn local_factor(
    boundary: &BoundaryData,
    vars: &Arc<VarSet>,
    form: &DegreeForm,
    bound: u64,
) -> Result<MSeries, HeightZetaError> {
    let free = boundary.free_components();
    let one_minus_linv = MotiveElt::one().sub(&MotiveElt::lefschetz(-1));
    let mut acc = MSeries::zero(Arc::clone(vars), form.clone(), bound)?;
    for mask in 0u32..(1u32 << free.len()) {
        let subset: BTreeSet<String> = free
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, a)| a.clone())
            .collect();
        let class = boundary.stratum(&subset);
        if class.is_zero() {
            continue;
        }
        let mut scalar = class
            .mul_lefschetz(subset.len() as i64 - boundary.n as i64)
            .mul(&one_minus_linv.pow(subset.len() as u32));
        let mut idx = MultiIndex::zeros(vars.len());
        for alpha in &subset {
            let pos = vars
                .index_of(&Var::plain(alpha))
                .expect("free components are generic variables");
            idx.0[pos] += 1;
            scalar = scalar.mul_lefschetz(boundary.rho_of(alpha) as i64 - 1);
        }
        if form.degree(&idx) > bound {
            continue;
        }
        let mut term = MSeries::zero(Arc::clone(vars), form.clone(), bound)?;
        term.set_coeff(idx, scalar)?;
        for alpha in free.iter().filter(|a| !subset.contains(*a)) {
            let pos = vars.index_of(&Var::plain(alpha)).unwrap();
            term = term.series_mul(&binomial_factor(
                vars,
                form,
                bound,
                pos,
                boundary.rho_of(alpha) as i64 - 1,
            )?)?;
        }
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

/// The local polynomial of a distinguished place for the chosen branch,
/// restricted to the component sets assigned to the chosen face, in that
/// place's block of variables.
fn special_face_polynomial(
    boundary: &BoundaryData,
    place: &SpecialPlaceData,
    branch: &SpecialBranch,
    face: &BTreeSet<String>,
    vars: &Arc<VarSet>,
    form: &DegreeForm,
    bound: u64,
) -> Result<MSeries, HeightZetaError> {
    let alphabet = boundary.alphabet();
    let free: BTreeSet<String> = boundary.free_components().into_iter().collect();
    let one_minus_linv = MotiveElt::one().sub(&MotiveElt::lefschetz(-1));
    let place_pos = |alpha: &str| {
        vars.index_of(&Var::at_place(alpha, &place.id))
            .expect("place variables exist in the refined set")
    };
    let mut acc = MSeries::zero(Arc::clone(vars), form.clone(), bound)?;
    for mask in 0u32..(1u32 << alphabet.len()) {
        let subset: BTreeSet<String> = alphabet
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, a)| a.clone())
            .collect();
        let class = branch
            .strata
            .get(&subset)
            .cloned()
            .unwrap_or_else(MotiveElt::zero);
        if class.is_zero() {
            continue;
        }
        let inter: BTreeSet<String> = subset.intersection(&boundary.integral).cloned().collect();
        let assigned = place
            .faces
            .iter()
            .find(|f| inter.is_subset(f))
            .ok_or_else(|| HeightZetaError::NoFaceFor {
                place: place.id.clone(),
                subset: inter.iter().cloned().collect(),
            })?;
        if assigned != face {
            continue;
        }
        let mut scalar = class
            .mul_lefschetz(branch.lefschetz_shift + subset.len() as i64 - boundary.n as i64)
            .mul(&one_minus_linv.pow(subset.len() as u32));
        let mut idx = MultiIndex::zeros(vars.len());
        for alpha in &subset {
            idx.0[place_pos(alpha)] += 1;
            scalar = scalar.mul_lefschetz(boundary.rho_of(alpha) as i64 - 1);
        }
        for (alpha, &t) in &branch.twist {
            idx.0[place_pos(alpha)] += t;
        }
        if form.degree(&idx) > bound {
            continue;
        }
        let mut term = MSeries::zero(Arc::clone(vars), form.clone(), bound)?;
        term.set_coeff(idx, scalar)?;
        let complement: BTreeSet<&String> = free
            .iter()
            .filter(|a| !subset.contains(*a))
            .chain(face.iter().filter(|a| !subset.contains(*a)))
            .collect();
        for alpha in complement {
            term = term.series_mul(&binomial_factor(
                vars,
                form,
                bound,
                place_pos(alpha),
                boundary.rho_of(alpha) as i64 - 1,
            )?)?;
        }
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

/// The assembled series with its building blocks kept alongside.
#[derive(Debug, Clone)]
pub struct ZetaAssembly {
    pub refined_vars: Arc<VarSet>,
    pub refined_form: DegreeForm,
    pub refined_rho_prime: DegreeForm,
    pub plain_vars: Arc<VarSet>,
    pub plain_form: DegreeForm,
    pub plain_rho_prime: DegreeForm,
    pub local_factor: MSeries,
    pub factorization: Factorization,
    pub special_polys: Vec<(String, MSeries)>,
    pub chosen_faces: Vec<BTreeSet<String>>,
    pub refined: MSeries,
    pub plain: MSeries,
}

fn assemble(instance: &Instance) -> Result<ZetaAssembly, HeightZetaError> {
    let b = &instance.boundary;
    let bound = instance.bound;
    let place_ids: Vec<String> = instance.places.iter().map(|p| p.id.clone()).collect();
    let refined_vars = VarSet::refined(b.alphabet(), &place_ids);
    let refined_form = b.rho_form(&refined_vars)?;
    let refined_rho_prime = b.rho_prime_form(&refined_vars)?;

    let mut resolved: Vec<(&SpecialPlaceData, &SpecialBranch, &BTreeSet<String>)> = Vec::new();
    if !instance.places.is_empty() {
        let choice = instance
            .choice
            .as_ref()
            .ok_or_else(|| cfg_err("distinguished places need a chosen branch and face"))?;
        for place in &instance.places {
            let branch = place
                .branches
                .iter()
                .find(|br| br.id == choice.branch)
                .ok_or_else(|| HeightZetaError::UnknownBranch {
                    place: place.id.clone(),
                    branch: choice.branch.clone(),
                })?;
            if !place.faces.iter().any(|f| f == &choice.face) {
                return Err(HeightZetaError::UnknownFace {
                    face: choice.face.iter().cloned().collect(),
                    place: place.id.clone(),
                });
            }
            resolved.push((place, branch, &choice.face));
        }
    }

    let f = local_factor(b, &refined_vars, &refined_form, bound)?;
    let factorization = plethystic_factorization(&f)?;
    // The product over the curve minus the distinguished places: each place
    // overrides its copy of the generic factor with the trivial one.
    let ones = vec![
        MSeries::one(Arc::clone(&refined_vars), refined_form.clone(), bound)?;
        instance.places.len()
    ];
    let mut zeta = euler_product_over_curve(&f, &ones, &instance.curve)?;
    for alpha in b.free_components() {
        let pos = refined_vars.index_of(&Var::plain(&alpha)).unwrap();
        let z = zeta_series(
            &instance.curve,
            &refined_vars,
            &refined_form,
            bound,
            b.rho_prime_of(&alpha) as i64 - 1,
            &MultiIndex::unit(refined_vars.len(), pos),
        )?;
        zeta = zeta.series_mul(&z)?;
    }
    let mut special_polys = Vec::new();
    let mut chosen_faces = Vec::new();
    for (place, branch, face) in &resolved {
        for alpha in face.iter() {
            let pos = refined_vars
                .index_of(&Var::at_place(alpha, &place.id))
                .unwrap();
            let g = geometric_factor(
                &refined_vars,
                &refined_form,
                bound,
                pos,
                b.rho_prime_of(alpha) as i64,
            )?;
            zeta = zeta.series_mul(&g)?;
        }
        let p = special_face_polynomial(b, place, branch, face, &refined_vars, &refined_form, bound)?;
        zeta = zeta.series_mul(&p)?;
        special_polys.push((place.id.clone(), p));
        chosen_faces.push((*face).clone());
    }

    let plain_vars = VarSet::plain(b.alphabet());
    let plain_form = b.rho_form(&plain_vars)?;
    let plain_rho_prime = b.rho_prime_form(&plain_vars)?;
    let target: Vec<usize> = refined_vars
        .vars()
        .iter()
        .map(|v| plain_vars.index_of(&Var::plain(&v.alpha)).unwrap())
        .collect();
    let mut plain = MSeries::zero(Arc::clone(&plain_vars), plain_form.clone(), bound)?;
    for (idx, c) in zeta.support() {
        let mut pidx = MultiIndex::zeros(plain_vars.len());
        for (i, &e) in idx.0.iter().enumerate() {
            pidx.0[target[i]] += e;
        }
        plain.add_to_coeff(pidx, c.clone())?;
    }

    Ok(ZetaAssembly {
        refined_vars,
        refined_form,
        refined_rho_prime,
        plain_vars,
        plain_form,
        plain_rho_prime,
        local_factor: f,
        factorization,
        special_polys,
        chosen_faces,
        refined: zeta,
        plain,
    })
}

// ---------------------------------------------------------------------------
// Stable value of the normalized classes.

/// A product-form fraction of ring elements, kept factored so exact
/// divisions can cancel numerators against denominators.
#[derive(Debug, Clone)]
pub struct MotiveFraction {
    pub num: Vec<MotiveElt>,
    pub den: Vec<MotiveElt>,
}

/// The reduced stable value: exact when every denominator divides out,
/// otherwise expanded geometrically and truncated below a recorded weight.
#[derive(Debug, Clone)]
pub enum LimitValue {
    Exact(MotiveElt),
    Truncated { value: MotiveElt, weight_floor: i64 },
}

impl LimitValue {
    pub fn value(&self) -> &MotiveElt {
        match self {
            LimitValue::Exact(v) => v,
            LimitValue::Truncated { value, .. } => value,
        }
    }

    pub fn weight_floor(&self) -> Option<i64> {
        match self {
            LimitValue::Exact(_) => None,
            LimitValue::Truncated { weight_floor, .. } => Some(*weight_floor),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LimitAssembly {
    pub fraction: MotiveFraction,
    pub value: LimitValue,
}

/// Keeps only the monomials of weight at least `floor`.
pub fn filter_weight_floor(elt: &MotiveElt, floor: i64) -> MotiveElt {
    let mut acc = MotiveElt::zero();
    for (mono, c) in elt.terms() {
        if mono.weight() >= floor {
            acc = acc.add(&MotiveElt::term(c.clone(), mono.lexp(), mono.symbol_part()));
        }
    }
    acc
}

/// The top-weight monomial when it is unique and a plain `±L^k`.
fn leading_unit(elt: &MotiveElt) -> Option<(BigInt, i64)> {
    let w = elt.weight().finite()?;
    let mut tops = elt.terms().filter(|(m, _)| m.weight() == w);
    let (mono, coeff) = tops.next()?;
    if tops.next().is_some() || !mono.symbol_part().is_empty() || coeff.abs() != BigInt::one() {
        return None;
    }
    Some((coeff.clone(), mono.lexp()))
}

fn reduce_fraction(fr: &MotiveFraction, floor: i64) -> Result<LimitValue, HeightZetaError> {
    let mut value = MotiveElt::one();
    for f in &fr.num {
        value = value.mul(f);
    }
    let mut remaining = fr.den.clone();
    loop {
        if remaining.is_empty() {
            return Ok(LimitValue::Exact(value));
        }
        let mut progressed = false;
        for i in 0..remaining.len() {
            if let Some(q) = value.checked_div_exact(&remaining[i]) {
                value = q;
                remaining.remove(i);
                progressed = true;
                break;
            }
        }
        if !progressed {
            break;
        }
    }
    if value.is_zero() {
        return Ok(LimitValue::Exact(value));
    }
    let mut dtot = MotiveElt::one();
    for d in &remaining {
        dtot = dtot.mul(d);
    }
    let Some((sign, lexp)) = leading_unit(&dtot) else {
        return Err(HeightZetaError::NotReducible(dtot.to_string()));
    };
    // dtot = sign * L^lexp * (1 + rest) with rest of strictly negative
    // weight, so the inverse is a geometric series converging in weight.
    let rest = dtot
        .scale(&sign)
        .mul_lefschetz(-lexp)
        .sub(&MotiveElt::one());
    if let Weight::Finite(w) = rest.weight() {
        debug_assert!(w < 0, "tail of a reduced denominator must be small");
    }
    let shifted = value.scale(&sign).mul_lefschetz(-lexp);
    if rest.is_zero() {
        return Ok(LimitValue::Exact(shifted));
    }
    let mut acc = shifted.clone();
    let mut power = shifted;
    loop {
        power = power.mul(&rest).neg();
        match power.weight() {
            Weight::NegInf => break,
            Weight::Finite(w) if w < floor => break,
            Weight::Finite(_) => acc = acc.add(&power),
        }
    }
    Ok(LimitValue::Truncated {
        value: filter_weight_floor(&acc, floor),
        weight_floor: floor,
    })
}

/// Evaluates a truncated series at `T_v = L^{-weight(v)}` for the given
/// form, term by term.
fn eval_series(s: &MSeries, form: &DegreeForm) -> MotiveElt {
    let mut acc = MotiveElt::zero();
    for (m, c) in s.support() {
        acc = acc.add(&c.mul_lefschetz(-(form.degree(m) as i64)));
    }
    acc
}

// ---------------------------------------------------------------------------
// Reports.

/// Certificates, decay of the difference to the stable value, and the
/// degree from which the difference vanishes identically.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub local_cert: LinearConvCert,
    pub place_certs: Vec<LinearConvCert>,
    pub combined: LinearConvCert,
    pub decay: DecayReport,
    pub rate: BigRational,
    pub rate_ok: bool,
    pub exact_from: Option<u64>,
    pub scope_note: String,
}

/// One index of the genus-correction component next to its weight ceiling.
#[derive(Debug, Clone)]
pub struct HComponentRow {
    pub index: MultiIndex,
    pub height: u64,
    pub observed: Weight,
    pub allowed: BigRational,
    pub ok: bool,
}

/// Support check for the curve's correction classes and weight bounds for
/// the component of the series they generate.
#[derive(Debug, Clone)]
pub struct HComponentReport {
    pub max_correction_degree: Option<u64>,
    pub support_ok: bool,
    pub delta: BigRational,
    pub rows: Vec<HComponentRow>,
    pub bounds_hold: bool,
}

const SCOPE_NOTE: &str = "Assembled series covers the principal (untwisted) sector only; \
character-twisted sectors and multi-vertex boundary faces are reported as out of scope, \
never estimated.";

fn staircase_ok(rows: &[DecayRow], rate: &BigRational) -> bool {
    let mut anchor: Option<(u64, i64)> = None;
    for r in rows {
        let Some(w) = r.observed else { continue };
        match anchor {
            None => anchor = Some((r.degree, w)),
            Some((d0, w0)) => {
                let gap = BigRational::from_integer(BigInt::from(r.degree - d0));
                let allowed = BigRational::from_integer(BigInt::from(w0)) - rate.clone() * gap;
                if BigRational::from_integer(BigInt::from(w)) > allowed {
                    return false;
                }
            }
        }
    }
    true
}

/// A validated instance with its assembled series.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub instance: Instance,
    pub assembly: ZetaAssembly,
}

impl Pipeline {
    pub fn new(instance: Instance) -> Result<Self, HeightZetaError> {
        let assembly = assemble(&instance)?;
        Ok(Pipeline { instance, assembly })
    }

    /// The class of the space of sections of the given height multi-index.
    pub fn moduli_class(&self, m: &MultiIndex) -> Result<MotiveElt, HeightZetaError> {
        let g = self.instance.curve.genus() as i64;
        let n = self.instance.boundary.dim() as i64;
        Ok(self
            .assembly
            .plain
            .coefficient(m)?
            .mul_lefschetz((1 - g) * n))
    }

    /// The moduli class rescaled by the integral-model height, the quantity
    /// that stabilizes in the weight topology.
    pub fn normalized_class(&self, m: &MultiIndex) -> Result<MotiveElt, HeightZetaError> {
        let d = self.assembly.plain_rho_prime.degree(m) as i64;
        Ok(self.moduli_class(m)?.mul_lefschetz(-d))
    }

    /// The weight floor used when a stable value needs geometric expansion.
    fn truncation_floor(&self) -> i64 {
        -(2 * self.instance.bound as i64) - 8
    }

    /// The predicted stable value of the normalized classes, assembled
    /// factor by factor and reduced.
    pub fn predicted_limit(&self) -> Result<LimitAssembly, HeightZetaError> {
        let b = &self.instance.boundary;
        let curve = &self.instance.curve;
        let g = curve.genus() as i64;
        let mut num: Vec<MotiveElt> = Vec::new();
        let mut den: Vec<MotiveElt> = Vec::new();
        let lead = (1 - g) * b.dim() as i64;
        if lead != 0 {
            num.push(MotiveElt::lefschetz(lead));
        }
        let l_minus_1 = MotiveElt::lefschetz(1).sub(&MotiveElt::one());
        for _alpha in b.free_components() {
            // Each free component contributes the stable coefficient of its
            // curve zeta factor.
            num.push(curve.pic0().mul_lefschetz(1 - g));
            den.push(l_minus_1.clone());
        }
        for layer in &self.assembly.factorization.layers {
            let d = self.assembly.refined_rho_prime.degree(&layer.index) as i64;
            for &(j, e) in &layer.exponents {
                let zv = curve.zeta_value(j - d)?;
                for _ in 0..e.unsigned_abs() {
                    if e > 0 {
                        den.push(zv.num.clone());
                        for &de in &zv.denom_exps {
                            num.push(MotiveElt::one().sub(&MotiveElt::lefschetz(de)));
                        }
                    } else {
                        num.push(zv.num.clone());
                        for &de in &zv.denom_exps {
                            den.push(MotiveElt::one().sub(&MotiveElt::lefschetz(de)));
                        }
                    }
                }
            }
        }
        for (i, (_, poly)) in self.assembly.special_polys.iter().enumerate() {
            let face = &self.assembly.chosen_faces[i];
            if face.len() > 1 {
                return Err(HeightZetaError::UnsupportedFace {
                    face: face.iter().cloned().collect(),
                    size: face.len(),
                });
            }
            // The place's copy of the generic factor was divided out, so its
            // evaluation enters the denominator; the face factor itself has
            // stable coefficient one.
            let tau = eval_series(&self.assembly.local_factor, &self.assembly.refined_rho_prime);
            if tau.is_zero() {
                return Err(HeightZetaError::NotReducible(
                    "the generic density vanishes at the evaluation point".into(),
                ));
            }
            den.push(tau);
            num.push(eval_series(poly, &self.assembly.refined_rho_prime));
        }
        let fraction = MotiveFraction { num, den };
        let value = reduce_fraction(&fraction, self.truncation_floor())?;
        Ok(LimitAssembly { fraction, value })
    }

    /// The difference of every normalized class to the stable value, as a
    /// series over the plain variables.
    pub fn difference_series(&self, limit: &LimitValue) -> Result<MSeries, HeightZetaError> {
        let a = &self.assembly;
        let mut diff = MSeries::zero(Arc::clone(&a.plain_vars), a.plain_form.clone(), self.instance.bound)?;
        for idx in graded_indices(a.plain_vars.len(), &a.plain_form, self.instance.bound) {
            let mut d = self.normalized_class(&idx)?.sub(limit.value());
            if let Some(floor) = limit.weight_floor() {
                d = filter_weight_floor(&d, floor);
            }
            if !d.is_zero() {
                diff.set_coeff(idx, d)?;
            }
        }
        Ok(diff)
    }

    /// Certifies the local factors, reports the observed weight decay of
    /// the difference to the stable value, and locates the degree from
    /// which the difference vanishes.
    pub fn convergence_report(&self) -> Result<ConvergenceReport, HeightZetaError> {
        let a = &self.assembly;
        let local_cert = certify_polynomial_factor(&a.local_factor, &a.refined_form)?;
        let mut place_certs = Vec::new();
        for (_, p) in &a.special_polys {
            place_certs.push(certify_polynomial_factor(p, &a.refined_form)?);
        }
        let mut all = vec![local_cert.clone()];
        all.extend(place_certs.iter().cloned());
        let combined = combine_product_certs(&all)?;
        let limit = self.predicted_limit()?;
        let diff = self.difference_series(&limit.value)?;
        let decay = weight_decay_report(&diff, &a.plain_form, &combined);
        let rate = combined.delta_prime().clone();
        let rate_ok = staircase_ok(&decay.rows, &rate);
        let exact_from = {
            let worst = diff
                .support()
                .filter(|(_, c)| !c.is_zero())
                .map(|(m, _)| a.plain_form.degree(m))
                .max();
            match worst {
                None => Some(0),
                Some(w) if w < self.instance.bound => Some(w + 1),
                Some(_) => None,
            }
        };
        Ok(ConvergenceReport {
            local_cert,
            place_certs,
            combined,
            decay,
            rate,
            rate_ok,
            exact_from,
            scope_note: SCOPE_NOTE.to_owned(),
        })
    }

    /// Weight bounds for the component of the series generated by the
    /// curve's correction classes, in the one-free-component shape over a
    /// full compactification.
    pub fn h_component_report(&self) -> Result<HComponentReport, HeightZetaError> {
        let b = &self.instance.boundary;
        let curve = &self.instance.curve;
        let free = b.free_components();
        if !self.instance.places.is_empty() || free.len() != 1 {
            return Err(HeightZetaError::UnsupportedShape);
        }
        let a = &self.assembly;
        let alpha = &free[0];
        let pos = a.refined_vars.index_of(&Var::plain(alpha)).unwrap();
        let unit = MultiIndex::unit(a.refined_vars.len(), pos);
        let j = b.rho_prime_of(alpha) as i64 - 1;
        let g = curve.genus() as i64;
        let mut max_correction_degree: Option<u64> = None;
        let mut h = MSeries::zero(
            Arc::clone(&a.refined_vars),
            a.refined_form.clone(),
            self.instance.bound,
        )?;
        let mut k = 0u64;
        loop {
            let idx = unit.scale(k as u32);
            if a.refined_form.degree(&idx) > self.instance.bound {
                break;
            }
            let c = curve.kapranov_correction(k);
            if !c.is_zero() {
                max_correction_degree = Some(k);
                h.set_coeff(idx, c.mul_lefschetz(j * k as i64))?;
            }
            k += 1;
        }
        let support_ok = match max_correction_degree {
            None => true,
            Some(k) => (k as i64) <= 2 * g - 2,
        };
        let sigma = euler_product_over_curve(&a.local_factor, &[], curve)?;
        let hser = h.series_mul(&sigma)?;
        let cert = certify_polynomial_factor(&a.local_factor, &a.refined_form)?;
        let delta = cert.delta().clone();
        let mut rows = Vec::new();
        let mut bounds_hold = true;
        for (m, c) in hser.support() {
            if m.is_zero() {
                continue;
            }
            let height = a.refined_rho_prime.degree(m);
            let epsdeg: u64 = m.0.iter().map(|&e| e as u64).sum();
            let observed = c.mul_lefschetz(-(height as i64)).weight();
            let allowed = -delta.clone() * BigRational::from_integer(BigInt::from(height + epsdeg));
            let ok = match observed {
                Weight::NegInf => true,
                Weight::Finite(w) => BigRational::from_integer(BigInt::from(w)) <= allowed,
            };
            bounds_hold &= ok;
            rows.push(HComponentRow {
                index: m.clone(),
                height,
                observed,
                allowed,
                ok,
            });
        }
        Ok(HComponentReport {
            max_correction_degree,
            support_ok,
            delta,
            rows,
            bounds_hold,
        })
    }

    /// The full serializable report for a run.
    pub fn report(&self) -> Result<RunReport, HeightZetaError> {
        let a = &self.assembly;
        let bound = self.instance.bound;
        let mut moduli = Vec::new();
        let mut normalized = Vec::new();
        for idx in graded_indices(a.plain_vars.len(), &a.plain_form, bound) {
            let mc = self.moduli_class(&idx)?;
            let nc = self.normalized_class(&idx)?;
            let height = a.plain_form.degree(&idx);
            moduli.push(DegreeEntry {
                index: idx.0.clone(),
                height,
                class: mc.to_string(),
                weight: mc.weight().to_string(),
            });
            normalized.push(DegreeEntry {
                index: idx.0.clone(),
                height,
                class: nc.to_string(),
                weight: nc.weight().to_string(),
            });
        }
        let limit = self.predicted_limit()?;
        let conv = self.convergence_report()?;
        let h_component = if self.instance.places.is_empty()
            && self.instance.boundary.free_components().len() == 1
        {
            let h = self.h_component_report()?;
            Some(HReportEntry {
                max_correction_degree: h.max_correction_degree,
                support_ok: h.support_ok,
                delta: h.delta.to_string(),
                bounds_hold: h.bounds_hold,
                rows: h
                    .rows
                    .iter()
                    .map(|r| HRowEntry {
                        index: r.index.0.clone(),
                        height: r.height,
                        observed: r.observed.to_string(),
                        allowed: r.allowed.to_string(),
                        ok: r.ok,
                    })
                    .collect(),
            })
        } else {
            None
        };
        let cert_entry = |c: &LinearConvCert| CertEntry {
            cut: c.m_cut(),
            delta: c.delta().to_string(),
            delta_prime: c.delta_prime().to_string(),
        };
        Ok(RunReport {
            name: self.instance.name.clone(),
            genus: self.instance.curve.genus(),
            dim: self.instance.boundary.dim(),
            bound,
            components: self.instance.boundary.alphabet().to_vec(),
            moduli,
            normalized,
            limit: LimitEntry {
                numerator_factors: limit.fraction.num.iter().map(|f| f.to_string()).collect(),
                denominator_factors: limit.fraction.den.iter().map(|f| f.to_string()).collect(),
                kind: match limit.value {
                    LimitValue::Exact(_) => "exact".to_owned(),
                    LimitValue::Truncated { .. } => "truncated".to_owned(),
                },
                value: limit.value.value().to_string(),
                weight_floor: limit.value.weight_floor(),
            },
            local_certificate: cert_entry(&conv.local_cert),
            place_certificates: conv.place_certs.iter().map(cert_entry).collect(),
            combined_certificate: cert_entry(&conv.combined),
            decay: conv
                .decay
                .rows
                .iter()
                .map(|r| DecayEntry {
                    degree: r.degree,
                    observed: r.observed,
                    hypothesis_ceiling: r.certified.to_string(),
                })
                .collect(),
            slope_hint: conv.decay.slope,
            rate: conv.rate.to_string(),
            rate_ok: conv.rate_ok,
            exact_from: conv.exact_from,
            h_component,
            scope_note: conv.scope_note,
        })
    }
}

/// One height index of a reported series.
#[derive(Debug, Clone, Serialize)]
pub struct DegreeEntry {
    pub index: Vec<u32>,
    pub height: u64,
    pub class: String,
    pub weight: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertEntry {
    pub cut: u64,
    pub delta: String,
    pub delta_prime: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitEntry {
    pub numerator_factors: Vec<String>,
    pub denominator_factors: Vec<String>,
    pub kind: String,
    pub value: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight_floor: Option<i64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayEntry {
    pub degree: u64,
    pub observed: Option<i64>,
    pub hypothesis_ceiling: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct HRowEntry {
    pub index: Vec<u32>,
    pub height: u64,
    pub observed: String,
    pub allowed: String,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct HReportEntry {
    pub max_correction_degree: Option<u64>,
    pub support_ok: bool,
    pub delta: String,
    pub bounds_hold: bool,
    pub rows: Vec<HRowEntry>,
}

/// Everything a run produces, in printable form. Three trust levels appear
/// side by side: exact ring identities (classes, stable values), certified
/// bounds (certificates, decay ceilings), and floating-point diagnostics
/// (the slope hint), labeled as such.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub name: String,
    pub genus: u32,
    pub dim: u32,
    pub bound: u64,
    pub components: Vec<String>,
    pub moduli: Vec<DegreeEntry>,
    pub normalized: Vec<DegreeEntry>,
    pub limit: LimitEntry,
    pub local_certificate: CertEntry,
    pub place_certificates: Vec<CertEntry>,
    pub combined_certificate: CertEntry,
    pub decay: Vec<DecayEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope_hint: Option<f64>,
    pub rate: String,
    pub rate_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_from: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_component: Option<HReportEntry>,
    pub scope_note: String,
}
