//! Arithmetic for polynomials over a prime field `F_p`.
//!
//! Elements are `u64` residues mod `p`; polynomials are little-endian
//! coefficient vectors with no trailing zeros (the zero polynomial is the
//! empty vector). Everything here is deliberately naive — this crate is an
//! oracle, and slow-but-obviously-correct beats clever.

/// A prime modulus. Construction checks primality by trial division.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Option<Prime> {
        if p < 2 {
            return None;
        }
        let mut d = 2;
        while d * d <= p {
            if p % d == 0 {
                return None;
            }
            d += 1;
        }
        Some(Prime(p))
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn add(self, a: u64, b: u64) -> u64 {
        (a + b) % self.0
    }

    pub fn sub(self, a: u64, b: u64) -> u64 {
        (a + self.0 - b % self.0) % self.0
    }

    pub fn mul(self, a: u64, b: u64) -> u64 {
        a * b % self.0
    }

    pub fn neg(self, a: u64) -> u64 {
        (self.0 - a % self.0) % self.0
    }

    pub fn inv(self, a: u64) -> u64 {
        assert!(a % self.0 != 0, "inverse of zero");
        // Fermat: a^(p-2) mod p.
        let mut base = a % self.0;
        let mut exp = self.0 - 2;
        let mut acc = 1u64;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }
}

/// A polynomial over `F_p`, little-endian, trimmed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Poly(pub Vec<u64>);

impl Poly {
    pub fn zero() -> Poly {
        Poly(vec![])
    }

    pub fn constant(c: u64, p: Prime) -> Poly {
        Poly::from_coeffs(vec![c % p.get()])
    }

    pub fn from_coeffs(mut c: Vec<u64>) -> Poly {
        while c.last() == Some(&0) {
            c.pop();
        }
        Poly(c)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<u64> {
        self.0.last().copied()
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == Some(1)
    }

    pub fn add(&self, other: &Poly, p: Prime) -> Poly {
        let n = self.0.len().max(other.0.len());
        let mut out = vec![0u64; n];
        for (i, slot) in out.iter_mut().enumerate() {
            let a = self.0.get(i).copied().unwrap_or(0);
            let b = other.0.get(i).copied().unwrap_or(0);
            *slot = p.add(a, b);
        }
        Poly::from_coeffs(out)
    }

    pub fn scale(&self, c: u64, p: Prime) -> Poly {
        Poly::from_coeffs(self.0.iter().map(|&a| p.mul(a, c)).collect())
    }

    pub fn mul(&self, other: &Poly, p: Prime) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![0u64; self.0.len() + other.0.len() - 1];
        for (i, &a) in self.0.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.0.iter().enumerate() {
                out[i + j] = p.add(out[i + j], p.mul(a, b));
            }
        }
        Poly::from_coeffs(out)
    }

    /// Remainder of `self` modulo `divisor` (which must be nonzero).
    pub fn rem(&self, divisor: &Poly, p: Prime) -> Poly {
        assert!(!divisor.is_zero(), "division by zero polynomial");
        let dd = divisor.degree().unwrap();
        let lead_inv = p.inv(divisor.leading().unwrap());
        let mut r = self.0.clone();
        while r.len() > dd {
            let k = r.len() - 1;
            let c = p.mul(r[k], lead_inv);
            if c != 0 {
                for (j, &dc) in divisor.0.iter().enumerate() {
                    let idx = k - dd + j;
                    r[idx] = p.sub(r[idx], p.mul(c, dc));
                }
            }
            r.pop();
            while r.last() == Some(&0) {
                r.pop();
            }
        }
        Poly::from_coeffs(r)
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Poly, p: Prime) -> Poly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b, p);
            a = b;
            b = r;
        }
        match a.leading() {
            Some(l) if l != 1 => a.scale(p.inv(l), p),
            _ => a,
        }
    }

    pub fn eval(&self, x: u64, p: Prime) -> u64 {
        let mut acc = 0u64;
        for &c in self.0.iter().rev() {
            acc = p.add(p.mul(acc, x), c);
        }
        acc
    }
}

/// All polynomials of degree `< len` (i.e. coefficient vectors of length
/// `len`), in lexicographic order of coefficients. Includes zero.
pub fn all_coeff_vectors(q: u64, len: usize) -> impl Iterator<Item = Vec<u64>> {
    let total = q.pow(len as u32);
    (0..total).map(move |mut idx| {
        let mut v = vec![0u64; len];
        for slot in v.iter_mut() {
            *slot = idx % q;
            idx /= q;
        }
        v
    })
}

/// All monic polynomials of exact degree `d`.
pub fn monic_of_degree(q: u64, d: usize) -> Vec<Poly> {
    all_coeff_vectors(q, d)
        .map(|mut low| {
            low.push(1);
            Poly::from_coeffs(low)
        })
        .collect()
}
