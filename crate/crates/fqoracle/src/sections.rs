//! Literal section counting for the worked model families.
//!
//! Each counter enumerates honest objects over `F_q` — rational functions,
//! polynomials, or tuples of polynomials — and counts them one by one. No
//! generating functions, no zeta formulas: these are the numbers the
//! symbolic pipeline's moduli classes must specialize to.

use num_bigint::BigInt;
use thiserror::Error;

use crate::gf::{all_coeff_vectors, monic_of_degree, Poly, Prime};

#[derive(Debug, Error)]
pub enum SectionError {
    #[error("q = {0} is not prime")]
    NotPrime(u64),
    #[error("enumeration size {size} exceeds the budget {budget}")]
    TooLarge { size: u128, budget: u128 },
}

/// Which family of sections to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectionModel {
    /// Rational functions `f ∈ F_q(t)` of height `d`: written `g/h` in
    /// lowest terms with `h` monic, the height is `max(deg g, deg h)`
    /// (constants, including 0, have height 0).
    RationalFunctions,
    /// Polynomials in `F_q[t]` of exact degree `m`; the zero polynomial has
    /// no degree, so `m = 0` counts the `q - 1` nonzero constants.
    PolynomialsExactDegree,
    /// Tuples `[f_0 : ... : f_N]` of coprime polynomials modulo scalars
    /// with `max deg f_i = d` and `f_0 ≠ 0` — maps of height `d` from the
    /// line to `P^N` whose generic point avoids the hyperplane `x_0 = 0`.
    ProjectiveSpace { n: u32 },
}

/// Default cap on raw enumeration size; counts stay exact, the cap only
/// guards against accidentally huge inputs.
pub const DEFAULT_BUDGET: u128 = 200_000_000;

/// Counts sections of the given model and height over `F_q` by literal
/// enumeration.
pub fn count_sections(model: SectionModel, q: u64, degree: u32) -> Result<BigInt, SectionError> {
    count_sections_with_budget(model, q, degree, DEFAULT_BUDGET)
}

pub fn count_sections_with_budget(
    model: SectionModel,
    q: u64,
    degree: u32,
    budget: u128,
) -> Result<BigInt, SectionError> {
    let p = Prime::new(q).ok_or(SectionError::NotPrime(q))?;
    match model {
        SectionModel::RationalFunctions => rational_functions(p, degree, budget),
        SectionModel::PolynomialsExactDegree => polynomials_exact_degree(p, degree, budget),
        SectionModel::ProjectiveSpace { n } => projective_space(p, n, degree, budget),
    }
}

fn check_budget(size: u128, budget: u128) -> Result<(), SectionError> {
    if size > budget {
        return Err(SectionError::TooLarge { size, budget });
    }
    Ok(())
}

fn rational_functions(p: Prime, d: u32, budget: u128) -> Result<BigInt, SectionError> {
    let q = p.get();
    if d == 0 {
        // Constants a ∈ F_q, including zero.
        return Ok(BigInt::from(q));
    }
    let d = d as usize;
    let numerators = (q as u128).pow(d as u32 + 1);
    let denominators: u128 = (0..=d).map(|e| (q as u128).pow(e as u32)).sum();
    check_budget(numerators * denominators, budget)?;

    // Denominators: monic of degree 0..=d; numerators: any coefficient
    // vector of length d+1. Keep pairs in lowest terms with max degree
    // exactly d.
    let denoms: Vec<Poly> = (0..=d)
        .flat_map(|e| monic_of_degree(q, e))
        .collect();
    let counts = motivic::exec::map_collect(denoms, |h| {
        let deg_h = h.degree().unwrap();
        let mut count = 0u64;
        for g_coeffs in all_coeff_vectors(q, d + 1) {
            let g = Poly::from_coeffs(g_coeffs);
            let deg_g = g.degree();
            let height = deg_g.unwrap_or(0).max(deg_h);
            if height != d {
                continue;
            }
            if g.gcd(&h, p) != Poly::from_coeffs(vec![1]) {
                continue;
            }
            count += 1;
        }
        count
    });
    Ok(counts.into_iter().map(BigInt::from).sum())
}

fn polynomials_exact_degree(p: Prime, m: u32, budget: u128) -> Result<BigInt, SectionError> {
    let q = p.get();
    let size = (q as u128).pow(m + 1);
    check_budget(size, budget)?;
    let mut count: u64 = 0;
    for coeffs in all_coeff_vectors(q, m as usize + 1) {
        let f = Poly::from_coeffs(coeffs);
        if f.degree() == Some(m as usize) {
            count += 1;
        }
    }
    Ok(BigInt::from(count))
}

fn projective_space(p: Prime, n: u32, d: u32, budget: u128) -> Result<BigInt, SectionError> {
    let q = p.get();
    let len = d as usize + 1;
    let per_coord = (q as u128).pow(len as u32);
    check_budget(per_coord.pow(n + 1), budget)?;

    // Enumerate f_0 in the outer (parallel) loop, the rest inside.
    let f0s: Vec<Vec<u64>> = all_coeff_vectors(q, len).collect();
    let counts = motivic::exec::map_collect(f0s, |f0_coeffs| {
        let f0 = Poly::from_coeffs(f0_coeffs);
        if f0.is_zero() {
            return 0u64;
        }
        let mut count = 0u64;
        let rest_total = per_coord.pow(n) as u64;
        for mut idx in 0..rest_total {
            let mut tuple: Vec<Poly> = Vec::with_capacity(n as usize + 1);
            tuple.push(f0.clone());
            for _ in 0..n {
                let mut coeffs = vec![0u64; len];
                for slot in coeffs.iter_mut() {
                    *slot = idx % q;
                    idx /= q;
                }
                tuple.push(Poly::from_coeffs(coeffs));
            }
            let height = tuple
                .iter()
                .filter_map(|f| f.degree())
                .max()
                .unwrap_or(0);
            if height != d as usize {
                continue;
            }
            let mut g = tuple[0].clone();
            for f in &tuple[1..] {
                g = g.gcd(f, p);
            }
            if g == Poly::from_coeffs(vec![1]) {
                count += 1;
            }
        }
        count
    });
    let total: BigInt = counts.into_iter().map(BigInt::from).sum();
    // Tuples are counted once per scalar multiple; divide exactly.
    let scalars = BigInt::from(q - 1);
    let (quot, rem) = num_integer::Integer::div_rem(&total, &scalars);
    assert!(rem == BigInt::from(0), "scalar orbits must divide evenly");
    Ok(quot)
}
