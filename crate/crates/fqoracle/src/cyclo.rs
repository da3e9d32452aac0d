//! Exact arithmetic in the cyclotomic field `Q(ζ_p)` for a prime `p`.
//!
//! Elements are coordinate vectors of length `p - 1` over the power basis
//! `1, ζ, ..., ζ^{p-2}`, with the relation `ζ^{p-1} = -(1 + ζ + ... + ζ^{p-2})`
//! folding higher powers back in. Since the basis is a basis, equality of
//! vectors is equality of numbers — character sums can be compared exactly,
//! with no floating point anywhere.

use num_rational::BigRational;
use num_traits::{One, Zero};

/// An element of `Q(ζ_p)` in the power basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cyclo {
    p: u64,
    coeffs: Vec<BigRational>,
}

impl Cyclo {
    pub fn zero(p: u64) -> Cyclo {
        assert!(p >= 2);
        Cyclo {
            p,
            coeffs: vec![BigRational::zero(); (p - 1) as usize],
        }
    }

    pub fn one(p: u64) -> Cyclo {
        Cyclo::rational(p, BigRational::one())
    }

    pub fn rational(p: u64, r: BigRational) -> Cyclo {
        let mut c = Cyclo::zero(p);
        c.coeffs[0] = r;
        c
    }

    /// `ζ^a`, with `a` taken mod `p`.
    pub fn root_power(p: u64, a: i64) -> Cyclo {
        let mut c = Cyclo::zero(p);
        let a = a.rem_euclid(p as i64) as u64;
        c.add_power(a, &BigRational::one());
        c
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Adds `c · ζ^k` in place, reducing the power.
    fn add_power(&mut self, k: u64, c: &BigRational) {
        let k = k % self.p;
        if k == self.p - 1 {
            for slot in self.coeffs.iter_mut() {
                *slot -= c;
            }
        } else {
            self.coeffs[k as usize] += c;
        }
    }

    pub fn add(&self, other: &Cyclo) -> Cyclo {
        assert_eq!(self.p, other.p);
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &Cyclo) -> Cyclo {
        assert_eq!(self.p, other.p);
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= b;
        }
        out
    }

    pub fn mul(&self, other: &Cyclo) -> Cyclo {
        assert_eq!(self.p, other.p);
        let mut out = Cyclo::zero(self.p);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                out.add_power((i + j) as u64, &(a * b));
            }
        }
        out
    }

    pub fn scale(&self, r: &BigRational) -> Cyclo {
        let mut out = self.clone();
        for a in out.coeffs.iter_mut() {
            *a *= r;
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Returns the value as a rational if it lies in `Q`.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.coeffs[1..].iter().all(|c| c.is_zero()) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }
}
