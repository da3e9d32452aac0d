//! A computable model of the Grothendieck ring of varieties with the
//! Lefschetz class inverted.
//!
//! Elements are integer-coefficient Laurent polynomials in the Lefschetz class
//! `L` over a free commutative monoid of named symbols (curve classes, stratum
//! classes, Picard classes, ...). Each symbol carries a declared weight and
//! optional point counts over prime fields, which makes two ring
//! homomorphisms computable: the weight filtration bound ([`MotiveElt::weight`])
//! and counting specialization ([`MotiveElt::specialize_count`]).
//!
//! Within this model the weight of a nonzero element is exact and
//! multiplicative; against the geometric classes the symbols stand for it is
//! an upper bound, which is the direction every certificate downstream needs.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Errors from parsing, specialization, and symbol declaration.
#[derive(Debug, Error)]
pub enum MotiveError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("symbol `{0}` is already declared with different data")]
    SymbolRedeclared(String),
    #[error("`L` is reserved and cannot be a symbol name")]
    ReservedName,
    #[error("symbol `{symbol}` has no point count for q={q}, k={k}")]
    MissingCount { symbol: String, q: u64, k: u32 },
}

/// Declaration of a named multiplicative symbol: its weight, whether it is
/// the class of an actual variety (effective), and its point counts
/// `counts[q] = [#X(F_q), #X(F_{q^2}), ...]` over the prime fields of
/// interest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolDecl {
    pub name: String,
    pub weight: i64,
    pub effective: bool,
    pub counts: BTreeMap<u64, Vec<BigInt>>,
}

/// A shared handle to a declared symbol. Equality and ordering are by name.
#[derive(Debug, Clone)]
pub struct Sym(Arc<SymbolDecl>);

impl Sym {
    pub fn name(&self) -> &str {
        &self.0.name
    }
    pub fn weight(&self) -> i64 {
        self.0.weight
    }
    pub fn effective(&self) -> bool {
        self.0.effective
    }
    pub fn count(&self, q: u64, k: u32) -> Result<BigInt, MotiveError> {
        self.0
            .counts
            .get(&q)
            .and_then(|v| v.get(k as usize - 1))
            .cloned()
            .ok_or_else(|| MotiveError::MissingCount {
                symbol: self.0.name.clone(),
                q,
                k,
            })
    }
}

impl PartialEq for Sym {
    fn eq(&self, other: &Self) -> bool {
        self.0.name == other.0.name
    }
}
impl Eq for Sym {}
impl PartialOrd for Sym {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Sym {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.name.cmp(&other.0.name)
    }
}

/// Registry of declared symbols; also the parsing context for element
/// strings.
#[derive(Debug, Clone, Default)]
pub struct SymbolTable {
    syms: BTreeMap<String, Sym>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a symbol. Re-declaring with identical data is a no-op;
    /// conflicting data is an error.
    pub fn declare(&mut self, decl: SymbolDecl) -> Result<Sym, MotiveError> {
        if decl.name == "L" {
            return Err(MotiveError::ReservedName);
        }
        if let Some(existing) = self.syms.get(&decl.name) {
            if *existing.0 == decl {
                return Ok(existing.clone());
            }
            return Err(MotiveError::SymbolRedeclared(decl.name));
        }
        let sym = Sym(Arc::new(decl));
        self.syms.insert(sym.name().to_owned(), sym.clone());
        Ok(sym)
    }

    pub fn get(&self, name: &str) -> Option<Sym> {
        self.syms.get(name).cloned()
    }

    pub fn symbols(&self) -> impl Iterator<Item = &Sym> {
        self.syms.values()
    }

    /// Parses an element string such as `1 - L^-2` or `(L - 1)*Pic0`.
    /// Grammar: sums of products of factors, where a factor is an integer,
    /// `L` with an optional integer exponent, a declared symbol with an
    /// optional nonnegative exponent, or a parenthesized sum.
    pub fn parse(&self, input: &str) -> Result<MotiveElt, MotiveError> {
        let mut p = Parser {
            input: input.as_bytes(),
            pos: 0,
            table: self,
        };
        let elt = p.expr()?;
        p.skip_ws();
        if p.pos != p.input.len() {
            return Err(MotiveError::Parse {
                pos: p.pos,
                msg: "trailing input".into(),
            });
        }
        Ok(elt)
    }
}

/// A single monomial `L^lexp * s1^a1 * ... * sk^ak`. Ordering is the
/// canonical term order: Lefschetz exponent descending, then the sorted
/// symbol part lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial {
    lexp: i64,
    syms: Vec<(Sym, u32)>,
}

impl Monomial {
    fn laurent(lexp: i64) -> Self {
        Monomial { lexp, syms: vec![] }
    }

    fn normalize(mut self) -> Self {
        self.syms.retain(|(_, m)| *m > 0);
        self.syms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Sym, u32)> = Vec::with_capacity(self.syms.len());
        for (s, m) in self.syms.drain(..) {
            match merged.last_mut() {
                Some((prev, pm)) if *prev == s => *pm += m,
                _ => merged.push((s, m)),
            }
        }
        self.syms = merged;
        self
    }

    fn mul(&self, other: &Self) -> Self {
        let mut syms = self.syms.clone();
        syms.extend(other.syms.iter().cloned());
        Monomial {
            lexp: self.lexp + other.lexp,
            syms,
        }
        .normalize()
    }

    pub fn lexp(&self) -> i64 {
        self.lexp
    }
    pub fn symbol_part(&self) -> &[(Sym, u32)] {
        &self.syms
    }

    /// Weight of the monomial: `2*lexp + Σ mult * weight(sym)`.
    pub fn weight(&self) -> i64 {
        2 * self.lexp
            + self
                .syms
                .iter()
                .map(|(s, m)| s.weight() * *m as i64)
                .sum::<i64>()
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .lexp
            .cmp(&self.lexp)
            .then_with(|| self.syms.cmp(&other.syms))
    }
}

/// Weight of an element: `-∞` for zero, otherwise the maximum term weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    NegInf,
    Finite(i64),
}

impl Weight {
    pub fn finite(self) -> Option<i64> {
        match self {
            Weight::NegInf => None,
            Weight::Finite(w) => Some(w),
        }
    }

    /// Weight of a product: `-∞` absorbs, finite weights add.
    pub fn add(self, other: Weight) -> Weight {
        match (self, other) {
            (Weight::Finite(a), Weight::Finite(b)) => Weight::Finite(a + b),
            _ => Weight::NegInf,
        }
    }
}

impl PartialOrd for Weight {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Weight {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Weight::NegInf, Weight::NegInf) => Ordering::Equal,
            (Weight::NegInf, _) => Ordering::Less,
            (_, Weight::NegInf) => Ordering::Greater,
            (Weight::Finite(a), Weight::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::NegInf => write!(f, "-inf"),
            Weight::Finite(w) => write!(f, "{w}"),
        }
    }
}

/// An element of the localized Grothendieck-ring model: a finite sum of
/// monomials with nonzero integer coefficients, kept in canonical term
/// order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MotiveElt {
    terms: BTreeMap<Monomial, BigInt>,
}

impl MotiveElt {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_bigint(BigInt::from(n))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        let mut terms = BTreeMap::new();
        if !n.is_zero() {
            terms.insert(Monomial::laurent(0), n);
        }
        MotiveElt { terms }
    }

    /// `L^e`.
    pub fn lefschetz(e: i64) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::laurent(e), BigInt::one());
        MotiveElt { terms }
    }

    /// The class of a declared symbol.
    pub fn symbol(sym: &Sym) -> Self {
        Self::term(BigInt::one(), 0, &[(sym.clone(), 1)])
    }

    /// A single term `coeff * L^lexp * Π sym^mult`.
    pub fn term(coeff: BigInt, lexp: i64, syms: &[(Sym, u32)]) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            let m = Monomial {
                lexp,
                syms: syms.to_vec(),
            }
            .normalize();
            terms.insert(m, coeff);
        }
        MotiveElt { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        *self == Self::one()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    fn insert_add(&mut self, m: Monomial, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert_add(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        MotiveElt {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = MotiveElt::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.insert_add(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return MotiveElt::zero();
        }
        MotiveElt {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    /// Multiplies by `L^e` (shifts every Lefschetz exponent).
    pub fn mul_lefschetz(&self, e: i64) -> Self {
        MotiveElt {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    (
                        Monomial {
                            lexp: m.lexp + e,
                            syms: m.syms.clone(),
                        },
                        c.clone(),
                    )
                })
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = MotiveElt::one();
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Weight filtration bound: `-∞` for zero, the maximum term weight
    /// otherwise. Exact in the model; an upper bound for the classes the
    /// symbols denote.
    pub fn weight(&self) -> Weight {
        self.terms
            .keys()
            .map(|m| Weight::Finite(m.weight()))
            .max()
            .unwrap_or(Weight::NegInf)
    }

    /// Counting specialization: `L ↦ q^k` and each symbol to its declared
    /// count over `F_{q^k}`. Errors if any symbol lacks counts at `(q, k)`.
    pub fn specialize_count(&self, q: u64, k: u32) -> Result<BigRational, MotiveError> {
        let qk = BigInt::from(q).pow(k);
        let mut total = BigRational::zero();
        for (m, c) in &self.terms {
            let mut v = BigRational::from_integer(c.clone());
            v *= pow_rational(&qk, m.lexp);
            for (s, mult) in &m.syms {
                let cnt = BigRational::from_integer(s.count(q, k)?);
                for _ in 0..*mult {
                    v *= cnt.clone();
                }
            }
            total += v;
        }
        Ok(total)
    }

    /// Returns the Laurent-polynomial coefficients `lexp ↦ c` when the
    /// element involves no symbols.
    pub fn as_laurent(&self) -> Option<BTreeMap<i64, BigInt>> {
        let mut out = BTreeMap::new();
        for (m, c) in &self.terms {
            if !m.syms.is_empty() {
                return None;
            }
            out.insert(m.lexp, c.clone());
        }
        Some(out)
    }

    /// Splits the element into groups with a common symbol part, each with
    /// its Laurent coefficient `lexp ↦ c`.
    fn symbol_groups(&self) -> Vec<(Vec<(Sym, u32)>, BTreeMap<i64, BigInt>)> {
        let mut groups: BTreeMap<Vec<(Sym, u32)>, BTreeMap<i64, BigInt>> = BTreeMap::new();
        for (m, c) in &self.terms {
            groups
                .entry(m.syms.clone())
                .or_default()
                .insert(m.lexp, c.clone());
        }
        groups.into_iter().collect()
    }

    /// Exact division by a symbol-free element; `None` when the division
    /// leaves a remainder (or the divisor is zero or carries symbols).
    pub fn checked_div_exact(&self, divisor: &MotiveElt) -> Option<MotiveElt> {
        let d = divisor.as_laurent()?;
        if d.is_empty() {
            return None;
        }
        let d_min = *d.keys().next().unwrap();
        let d_max = *d.keys().next_back().unwrap();
        let d_lead = d[&d_max].clone();
        let deg_d = (d_max - d_min) as usize;
        let d_vec: Vec<BigInt> = (0..=deg_d)
            .map(|i| d.get(&(d_min + i as i64)).cloned().unwrap_or_default())
            .collect();

        let mut out = MotiveElt::zero();
        for (syms, coeffs) in self.symbol_groups() {
            let n_min = *coeffs.keys().next().unwrap();
            let n_max = *coeffs.keys().next_back().unwrap();
            let deg_n = (n_max - n_min) as usize;
            if deg_n < deg_d {
                return None;
            }
            let mut rem: Vec<BigInt> = (0..=deg_n)
                .map(|i| coeffs.get(&(n_min + i as i64)).cloned().unwrap_or_default())
                .collect();
            let mut quot = vec![BigInt::zero(); deg_n - deg_d + 1];
            // Long division from the top coefficient down; every leading
            // coefficient must divide exactly for an exact quotient.
            for i in (0..quot.len()).rev() {
                let lead = rem[i + deg_d].clone();
                if lead.is_zero() {
                    continue;
                }
                let (q, r) = num_integer::Integer::div_rem(&lead, &d_lead);
                if !r.is_zero() {
                    return None;
                }
                quot[i] = q.clone();
                for (j, dc) in d_vec.iter().enumerate() {
                    rem[i + j] -= &q * dc;
                }
            }
            if rem.iter().any(|c| !c.is_zero()) {
                return None;
            }
            for (i, c) in quot.into_iter().enumerate() {
                if !c.is_zero() {
                    out.insert_add(
                        Monomial {
                            lexp: n_min - d_min + i as i64,
                            syms: syms.clone(),
                        },
                        c,
                    );
                }
            }
        }
        Some(out)
    }

    /// Sufficient effectivity check: every symbol effective, and in each
    /// symbol group the Laurent coefficient, after factoring out its lowest
    /// power of `L`, has nonnegative coefficients when rewritten in the
    /// basis `M = L - 1`. Classes of actual varieties built from affine
    /// cells pass; a `true` certifies effectivity, a `false` decides
    /// nothing.
    pub fn is_certified_effective(&self) -> bool {
        if self.is_zero() {
            return false;
        }
        for (syms, coeffs) in self.symbol_groups() {
            if syms.iter().any(|(s, _)| !s.effective()) {
                return false;
            }
            let min = *coeffs.keys().next().unwrap();
            let max = *coeffs.keys().next_back().unwrap();
            let deg = (max - min) as usize;
            let poly: Vec<BigInt> = (0..=deg)
                .map(|i| coeffs.get(&(min + i as i64)).cloned().unwrap_or_default())
                .collect();
            if !nonneg_in_shifted_basis(&poly) {
                return false;
            }
        }
        true
    }
}

/// Checks that `p(M + 1)` has nonnegative coefficients, where `p` is given
/// by its coefficients in `L` (index = exponent).
fn nonneg_in_shifted_basis(poly: &[BigInt]) -> bool {
    // b_j = Σ_i a_i * C(i, j), computed by repeated synthetic evaluation at 1.
    let mut work = poly.to_vec();
    for _ in 0..poly.len() {
        // Constant term of the current polynomial in (L - 1).
        let mut acc = BigInt::zero();
        for c in work.iter().rev() {
            acc = &acc + c;
        }
        if acc.is_negative() {
            return false;
        }
        // Divide (work - acc) by (L - 1) synthetically.
        let mut next = Vec::with_capacity(work.len().saturating_sub(1));
        let mut carry = BigInt::zero();
        for c in work.iter().rev().take(work.len().saturating_sub(1)) {
            carry = &carry + c;
            next.push(carry.clone());
        }
        next.reverse();
        work = next;
        if work.is_empty() {
            break;
        }
    }
    true
}

fn pow_rational(base: &BigInt, exp: i64) -> BigRational {
    if exp >= 0 {
        BigRational::from_integer(base.pow(exp as u32))
    } else {
        BigRational::from_integer(base.pow((-exp) as u32)).recip()
    }
}

impl fmt::Display for MotiveElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_motive(self, f)
    }
}

/// Renders one Laurent term `c * L^e` without sign, e.g. `L`, `L^-2`, `2*L^2`, `3`.
fn write_laurent_term(f: &mut fmt::Formatter<'_>, c: &BigInt, e: i64) -> fmt::Result {
    let abs = c.abs();
    if e == 0 {
        return write!(f, "{abs}");
    }
    if !abs.is_one() {
        write!(f, "{abs}*")?;
    }
    if e == 1 {
        write!(f, "L")
    } else {
        write!(f, "L^{e}")
    }
}

fn write_symbol_part(f: &mut fmt::Formatter<'_>, syms: &[(Sym, u32)]) -> fmt::Result {
    for (i, (s, m)) in syms.iter().enumerate() {
        if i > 0 {
            write!(f, "*")?;
        }
        if *m == 1 {
            write!(f, "{}", s.name())?;
        } else {
            write!(f, "{}^{}", s.name(), m)?;
        }
    }
    Ok(())
}

fn write_motive(elt: &MotiveElt, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if elt.is_zero() {
        return write!(f, "0");
    }
    let groups = elt.symbol_groups();
    let mut first_group = true;
    for (syms, coeffs) in &groups {
        // Laurent terms in descending exponent order.
        let terms: Vec<(i64, &BigInt)> = coeffs.iter().rev().map(|(e, c)| (*e, c)).collect();
        if syms.is_empty() {
            for (i, (e, c)) in terms.iter().enumerate() {
                let neg = c.is_negative();
                if first_group && i == 0 {
                    if neg {
                        write!(f, "-")?;
                    }
                } else {
                    write!(f, " {} ", if neg { "-" } else { "+" })?;
                }
                write_laurent_term(f, c, *e)?;
            }
        } else if terms.len() == 1 {
            let (e, c) = terms[0];
            let neg = c.is_negative();
            if first_group {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let abs = c.abs();
            if e != 0 || !abs.is_one() {
                write_laurent_term(f, c, e)?;
                write!(f, "*")?;
            }
            write_symbol_part(f, syms)?;
        } else {
            if !first_group {
                write!(f, " + ")?;
            }
            write!(f, "(")?;
            for (i, (e, c)) in terms.iter().enumerate() {
                let neg = c.is_negative();
                if i == 0 {
                    if neg {
                        write!(f, "-")?;
                    }
                } else {
                    write!(f, " {} ", if neg { "-" } else { "+" })?;
                }
                write_laurent_term(f, c, *e)?;
            }
            write!(f, ")*")?;
            write_symbol_part(f, syms)?;
        }
        first_group = false;
    }
    Ok(())
}

impl serde::Serialize for MotiveElt {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

struct Parser<'a> {
    input: &'a [u8],
    pos: usize,
    table: &'a SymbolTable,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.input.len() && self.input[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.input.get(self.pos).copied()
    }

    fn err<T>(&self, msg: &str) -> Result<T, MotiveError> {
        Err(MotiveError::Parse {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn expr(&mut self) -> Result<MotiveElt, MotiveError> {
        let mut negate = false;
        if self.peek() == Some(b'-') {
            self.pos += 1;
            negate = true;
        } else if self.peek() == Some(b'+') {
            self.pos += 1;
        }
        let mut acc = self.term_product()?;
        if negate {
            acc = acc.neg();
        }
        while let Some(op) = self.peek() {
            if op != b'+' && op != b'-' {
                break;
            }
            self.pos += 1;
            let t = self.term_product()?;
            acc = if op == b'+' { acc.add(&t) } else { acc.sub(&t) };
        }
        Ok(acc)
    }

    fn term_product(&mut self) -> Result<MotiveElt, MotiveError> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<MotiveElt, MotiveError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.err("expected `)`");
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                Ok(MotiveElt::from_bigint(n))
            }
            Some(c) if c == b'L' && !self.ident_continues(1) => {
                self.pos += 1;
                let e = if self.peek_raw() == Some(b'^') {
                    self.pos += 1;
                    self.signed_exponent()?
                } else {
                    1
                };
                Ok(MotiveElt::lefschetz(e))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let name = self.ident();
                let sym = self
                    .table
                    .get(&name)
                    .ok_or(MotiveError::UnknownSymbol(name))?;
                let e = if self.peek_raw() == Some(b'^') {
                    self.pos += 1;
                    let e = self.signed_exponent()?;
                    if e < 0 {
                        return self.err("symbol exponents must be nonnegative");
                    }
                    e
                } else {
                    1
                };
                Ok(MotiveElt::symbol(&sym).pow(e as u32))
            }
            _ => self.err("expected a factor"),
        }
    }

    /// True when the identifier starting at the current position continues
    /// past `offset` more bytes (distinguishes the reserved `L` from symbol
    /// names such as `Lpt`).
    fn ident_continues(&mut self, offset: usize) -> bool {
        self.skip_ws();
        matches!(
            self.input.get(self.pos + offset),
            Some(c) if c.is_ascii_alphanumeric() || *c == b'_'
        )
    }

    fn peek_raw(&self) -> Option<u8> {
        self.input.get(self.pos).copied()
    }

    fn ident(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.input.len()
            && (self.input[self.pos].is_ascii_alphanumeric() || self.input[self.pos] == b'_')
        {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.input[start..self.pos]).into_owned()
    }

    fn integer(&mut self) -> Result<BigInt, MotiveError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.input.len() && self.input[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected digits");
        }
        let s = std::str::from_utf8(&self.input[start..self.pos]).unwrap();
        Ok(s.parse().unwrap())
    }

    fn signed_exponent(&mut self) -> Result<i64, MotiveError> {
        let neg = if self.peek_raw() == Some(b'-') {
            self.pos += 1;
            true
        } else {
            false
        };
        let n = self.integer()?;
        let v: i64 = match n.try_into() {
            Ok(v) => v,
            Err(_) => return self.err("exponent out of range"),
        };
        Ok(if neg { -v } else { v })
    }
}
