//! Closed points of the projective line over a prime field.
//!
//! A closed point of degree `d` is either a monic irreducible polynomial of
//! degree `d` in `F_q[t]` or the point at infinity (degree 1). Irreducibles
//! are found by a sieve over monic polynomials, and the counts are validated
//! against the Möbius/necklace formula — a cheap self-check that the sieve
//! enumerates exactly the closed points.

use crate::gf::{monic_of_degree, Poly, Prime};

/// A closed point of `P^1` over `F_q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClosedPoint {
    /// The finite point cut out by a monic irreducible polynomial.
    Finite(Poly),
    /// The point at infinity (always degree 1).
    Infinity,
}

impl ClosedPoint {
    pub fn degree(&self) -> usize {
        match self {
            ClosedPoint::Finite(f) => f.degree().expect("irreducibles are nonzero"),
            ClosedPoint::Infinity => 1,
        }
    }
}

/// All closed points of degree at most `max_deg`, infinity first, then
/// finite points by degree and coefficient order. Panics if the sieve
/// disagrees with the necklace-count formula.
pub fn closed_points(p: Prime, max_deg: usize) -> Vec<ClosedPoint> {
    let mut out = vec![ClosedPoint::Infinity];
    let mut irreducibles: Vec<Poly> = Vec::new();
    for d in 1..=max_deg {
        let mut count_d = 0u64;
        for f in monic_of_degree(p.get(), d) {
            let is_irred = irreducibles
                .iter()
                .take_while(|g| g.degree().unwrap() * 2 <= d)
                .all(|g| !f.rem(g, p).is_zero());
            if is_irred {
                count_d += 1;
                irreducibles.push(f.clone());
                out.push(ClosedPoint::Finite(f));
            }
        }
        assert_eq!(
            count_d,
            necklace_count(p.get(), d as u64),
            "irreducible sieve disagrees with the counting formula at degree {d}"
        );
    }
    out
}

/// Number of monic irreducibles of degree `d` over `F_q`:
/// `(1/d) Σ_{e|d} μ(d/e) q^e`.
pub fn necklace_count(q: u64, d: u64) -> u64 {
    let mut total: i128 = 0;
    for e in 1..=d {
        if d % e == 0 {
            total += i128::from(moebius(d / e)) * (q as i128).pow(e as u32);
        }
    }
    assert!(total >= 0 && total % d as i128 == 0);
    (total / d as i128) as u64
}

fn moebius(mut n: u64) -> i8 {
    let mut factors = 0;
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            n /= d;
            if n % d == 0 {
                return 0;
            }
            factors += 1;
        }
        d += 1;
    }
    if n > 1 {
        factors += 1;
    }
    if factors % 2 == 0 {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn necklace_counts_match_known_values() {
        // F_2: 2 linear, 1 quadratic, 2 cubic, 3 quartic irreducibles.
        assert_eq!(necklace_count(2, 1), 2);
        assert_eq!(necklace_count(2, 2), 1);
        assert_eq!(necklace_count(2, 3), 2);
        assert_eq!(necklace_count(2, 4), 3);
        assert_eq!(necklace_count(3, 1), 3);
        assert_eq!(necklace_count(3, 2), 3);
        assert_eq!(necklace_count(3, 3), 8);
    }

    #[test]
    fn point_counts_per_degree_recover_the_projective_line() {
        let p = Prime::new(2).unwrap();
        let pts = closed_points(p, 4);
        let deg1 = pts.iter().filter(|pt| pt.degree() == 1).count();
        // #P^1(F_2) = 3: two finite closed points of degree 1 plus infinity.
        assert_eq!(deg1, 3);
        // #P^1(F_4) = Σ_{d|2} d·(points of degree d) = 3 + 2·1 = 5.
        let deg2 = pts.iter().filter(|pt| pt.degree() == 2).count();
        assert_eq!(deg1 + 2 * deg2, 5);
    }

    #[test]
    fn sieve_products_are_squarefree_factorizations() {
        // Every monic polynomial of degree 2 factors into the sieve's points.
        let p = Prime::new(3).unwrap();
        let pts = closed_points(p, 2);
        for f in monic_of_degree(3, 2) {
            let divides = pts.iter().any(|pt| match pt {
                ClosedPoint::Finite(g) => f.rem(g, p).is_zero(),
                ClosedPoint::Infinity => false,
            });
            assert!(divides, "no irreducible divisor found for {f:?}");
        }
    }
}
