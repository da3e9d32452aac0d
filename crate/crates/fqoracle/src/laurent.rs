//! Truncated Laurent series over a prime field, used for local expansions
//! of rational functions at degree-one places.
//!
//! A series holds coefficients for exponents `start .. prec` (exclusive);
//! everything at `prec` and beyond is unknown. Operations track the
//! precision honestly so valuation tests against a level are reliable.

use crate::gf::Prime;

/// Coefficients for `π^start, π^{start+1}, ..., π^{prec-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalSeries {
    pub start: i64,
    pub coeffs: Vec<u64>,
}

impl LocalSeries {
    pub fn prec(&self) -> i64 {
        self.start + self.coeffs.len() as i64
    }

    pub fn zero_to(prec: i64) -> LocalSeries {
        LocalSeries {
            start: prec,
            coeffs: vec![],
        }
    }

    pub fn monomial(c: u64, e: i64, prec: i64, p: Prime) -> LocalSeries {
        let c = c % p.get();
        if c == 0 || e >= prec {
            return LocalSeries::zero_to(prec);
        }
        let mut coeffs = vec![0; (prec - e) as usize];
        coeffs[0] = c;
        LocalSeries { start: e, coeffs }
    }

    /// Coefficient of `π^e`; panics if `e` is beyond the precision.
    pub fn coeff(&self, e: i64) -> u64 {
        assert!(e < self.prec(), "coefficient beyond precision");
        if e < self.start {
            return 0;
        }
        self.coeffs[(e - self.start) as usize]
    }

    /// Valuation, or `None` when no nonzero coefficient is visible (the
    /// series is 0 up to its precision).
    pub fn valuation(&self) -> Option<i64> {
        self.coeffs
            .iter()
            .position(|&c| c != 0)
            .map(|i| self.start + i as i64)
    }

    fn trim(mut self) -> LocalSeries {
        while self.coeffs.first() == Some(&0) {
            self.coeffs.remove(0);
            self.start += 1;
        }
        self
    }

    pub fn add(&self, other: &LocalSeries, p: Prime) -> LocalSeries {
        let prec = self.prec().min(other.prec());
        let start = self.start.min(other.start).min(prec);
        let mut coeffs = vec![0u64; (prec - start) as usize];
        for (i, slot) in coeffs.iter_mut().enumerate() {
            let e = start + i as i64;
            let a = if e >= self.start && e < self.prec() {
                self.coeff(e)
            } else {
                0
            };
            let b = if e >= other.start && e < other.prec() {
                other.coeff(e)
            } else {
                0
            };
            *slot = p.add(a, b);
        }
        LocalSeries { start, coeffs }.trim()
    }

    pub fn scale(&self, c: u64, p: Prime) -> LocalSeries {
        LocalSeries {
            start: self.start,
            coeffs: self.coeffs.iter().map(|&a| p.mul(a, c)).collect(),
        }
        .trim()
    }

    pub fn mul(&self, other: &LocalSeries, p: Prime) -> LocalSeries {
        // Product precision: each factor's unknown tail enters at
        // (prec of one) + (valuation floor of the other).
        let prec = (self.prec() + other.start).min(other.prec() + self.start);
        let start = (self.start + other.start).min(prec);
        let mut coeffs = vec![0u64; (prec - start) as usize];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                let e = self.start + i as i64 + other.start + j as i64;
                if e < prec {
                    let idx = (e - start) as usize;
                    coeffs[idx] = p.add(coeffs[idx], p.mul(a, b));
                }
            }
        }
        LocalSeries { start, coeffs }.trim()
    }

    /// Inverse of a series with nonzero leading coefficient.
    pub fn inverse(&self, p: Prime) -> LocalSeries {
        let t = self.clone().trim();
        let lead = *t.coeffs.first().expect("inverse of zero series");
        let lead_inv = p.inv(lead);
        let v = t.start;
        let k = t.coeffs.len();
        // (π^v Σ a_i π^i)^{-1} = π^{-v} lead_inv Σ b_i π^i, solved by
        // forward substitution to the same relative precision.
        let mut b = vec![0u64; k];
        b[0] = 1;
        for i in 1..k {
            let mut acc = 0u64;
            for j in 0..i {
                acc = p.add(acc, p.mul(p.mul(t.coeffs[i - j], lead_inv), b[j]));
            }
            b[i] = p.neg(acc);
        }
        LocalSeries {
            start: -v,
            coeffs: b.iter().map(|&x| p.mul(x, lead_inv)).collect(),
        }
        .trim()
    }

    pub fn pow(&self, n: u32, prec_hint: i64, p: Prime) -> LocalSeries {
        let mut acc = LocalSeries::monomial(1, 0, prec_hint, p);
        for _ in 0..n {
            acc = acc.mul(self, p);
        }
        acc
    }
}
