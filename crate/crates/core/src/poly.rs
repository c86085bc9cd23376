//! Dense univariate polynomials over Q and over prime fields.
//!
//! Coefficients are stored in ascending degree order and kept trimmed (no trailing zeros).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};
use std::fmt;

/// Polynomial with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatPoly(pub Vec<BigRational>);

impl RatPoly {
    pub fn new(mut c: Vec<BigRational>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        RatPoly(c)
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| BigRational::from_integer(x.into())).collect())
    }

    pub fn zero() -> Self {
        RatPoly(Vec::new())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn lead(&self) -> Option<&BigRational> {
        self.0.last()
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.0
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.0.len().max(o.0.len());
        let z = BigRational::zero();
        Self::new(
            (0..n)
                .map(|i| self.0.get(i).unwrap_or(&z) + o.0.get(i).unwrap_or(&z))
                .collect(),
        )
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-BigRational::one()))
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        Self::new(self.0.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigRational::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn divrem(&self, d: &Self) -> (Self, Self) {
        let dd = d.degree().expect("division by zero polynomial");
        let lead_inv = d.0[dd].recip();
        let mut r = self.0.clone();
        if r.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut q = vec![BigRational::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = &r[k + dd] * &lead_inv;
            if c.is_zero() {
                continue;
            }
            for (j, dj) in d.0.iter().enumerate() {
                r[k + j] -= &c * dj;
            }
            q[k] = c;
        }
        r.truncate(dd);
        (Self::new(q), Self::new(r))
    }

    pub fn monic(&self) -> Self {
        match self.lead() {
            Some(l) => self.scale(&l.recip()),
            None => Self::zero(),
        }
    }

    /// Returns `(g, s)` with `g = gcd(a, m)` monic and `s*a ≡ g (mod m)`.
    pub fn gcd_with_inverse(a: &Self, m: &Self) -> (Self, Self) {
        let (mut r0, mut r1) = (m.clone(), a.clone());
        let (mut s0, mut s1) = (Self::zero(), Self::new(vec![BigRational::one()]));
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1);
            let s = s0.sub(&q.mul(&s1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
        }
        let l = r0.lead().cloned().unwrap_or_else(BigRational::one).recip();
        (r0.scale(&l), s0.scale(&l))
    }

    /// True when every coefficient is an integer.
    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|c| c.is_integer())
    }

    /// Reduction modulo a prime `p`; requires the denominators to be prime to `p`.
    pub fn reduce_mod(&self, p: u64) -> Option<Vec<u64>> {
        let pb = BigInt::from(p);
        let mut out = Vec::with_capacity(self.0.len());
        for c in &self.0 {
            let den = c.denom().mod_floor_big(&pb);
            if den.is_zero() {
                return None;
            }
            let num = c.numer().mod_floor_big(&pb);
            let inv = crate::arith::inv_mod(to_u64(&den), p)?;
            out.push(crate::arith::mul_mod(to_u64(&num), inv, p));
        }
        Some(fp_trim(out))
    }
}

trait ModFloor {
    fn mod_floor_big(&self, m: &BigInt) -> BigInt;
}

impl ModFloor for BigInt {
    fn mod_floor_big(&self, m: &BigInt) -> BigInt {
        let r = self % m;
        if r.is_negative() {
            r + m
        } else {
            r
        }
    }
}

fn to_u64(x: &BigInt) -> u64 {
    u64::try_from(x).expect("residue fits in u64")
}

impl fmt::Display for RatPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.0.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let show_coeff = i == 0 || !a.is_one();
            if show_coeff {
                write!(f, "{a}")?;
                if i > 0 {
                    write!(f, "*")?;
                }
            }
            match i {
                0 => {}
                1 => write!(f, "T")?,
                _ => write!(f, "T^{i}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for RatPoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Trims trailing zeros of a prime-field polynomial.
pub fn fp_trim(mut c: Vec<u64>) -> Vec<u64> {
    while c.last() == Some(&0) {
        c.pop();
    }
    c
}

/// Remainder of `a` modulo `m` over `F_p` (`m` nonzero).
pub fn fp_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let m = fp_trim(m.to_vec());
    let dm = m.len() - 1;
    let inv = crate::arith::inv_mod(m[dm], p).expect("nonzero leading coefficient");
    let mut r = fp_trim(a.to_vec());
    while r.len() > dm {
        let k = r.len() - 1 - dm;
        let c = crate::arith::mul_mod(r[r.len() - 1], inv, p);
        for (j, mj) in m.iter().enumerate() {
            let t = crate::arith::mul_mod(c, *mj, p);
            r[k + j] = (r[k + j] + p - t) % p;
        }
        r = fp_trim(r);
    }
    r
}

/// Monic gcd over `F_p`.
pub fn fp_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut x = fp_trim(a.to_vec());
    let mut y = fp_trim(b.to_vec());
    while !y.is_empty() {
        let r = fp_rem(&x, &y, p);
        x = y;
        y = r;
    }
    if let Some(&l) = x.last() {
        let inv = crate::arith::inv_mod(l, p).expect("unit");
        x.iter_mut().for_each(|c| *c = crate::arith::mul_mod(*c, inv, p));
    }
    x
}

/// `a + b` over `F_p`.
pub fn fp_add(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    fp_trim((0..n).map(|i| (a.get(i).unwrap_or(&0) + b.get(i).unwrap_or(&0)) % p).collect())
}

/// `a - b` over `F_p`.
pub fn fp_sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    fp_trim((0..n).map(|i| (a.get(i).unwrap_or(&0) + p - b.get(i).unwrap_or(&0) % p) % p).collect())
}

/// `a * b` over `F_p`.
pub fn fp_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + crate::arith::mul_mod(x, y, p)) % p;
        }
    }
    fp_trim(out)
}

/// `a * b mod m` over `F_p`.
pub fn fp_mulmod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    fp_rem(&fp_mul(a, b, p), m, p)
}

/// `base^e mod m` over `F_p`.
pub fn fp_powmod(base: &[u64], mut e: u64, m: &[u64], p: u64) -> Vec<u64> {
    let mut acc = fp_rem(&[1], m, p);
    let mut b = fp_rem(base, m, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = fp_mulmod(&acc, &b, m, p);
        }
        b = fp_mulmod(&b, &b, m, p);
        e >>= 1;
    }
    acc
}

/// Quotient and remainder over `F_p`.
pub fn fp_divrem(a: &[u64], m: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
    let m = fp_trim(m.to_vec());
    let dm = m.len() - 1;
    let inv = crate::arith::inv_mod(m[dm], p).expect("nonzero leading coefficient");
    let mut r = fp_trim(a.to_vec());
    if r.len() <= dm {
        return (Vec::new(), r);
    }
    let mut q = vec![0u64; r.len() - dm];
    while r.len() > dm {
        let k = r.len() - 1 - dm;
        let c = crate::arith::mul_mod(r[r.len() - 1], inv, p);
        q[k] = c;
        for (j, mj) in m.iter().enumerate() {
            let t = crate::arith::mul_mod(c, *mj, p);
            r[k + j] = (r[k + j] + p - t) % p;
        }
        r = fp_trim(r);
    }
    (fp_trim(q), r)
}

/// Monic irreducible factors of a squarefree monic `f` whose factors all have degree `d`,
/// sorted ascending (Cantor-Zassenhaus with a fixed probe sequence).
pub fn fp_equal_degree_factors(f: &[u64], d: usize, p: u64) -> Vec<Vec<u64>> {
    let f = fp_trim(f.to_vec());
    let mut out = Vec::new();
    let mut stack = vec![f];
    let mut seed = 0u64;
    while let Some(g) = stack.pop() {
        let n = g.len() - 1;
        if n == 0 {
            continue;
        }
        if n <= d {
            out.push(g);
            continue;
        }
        loop {
            seed += 1;
            // probe: the base-p digits of seed, with the x coefficient offset by one
            let mut a = vec![seed % p, (seed / p + 1) % p];
            let mut s = seed / p / p;
            while s > 0 {
                a.push(s % p);
                s /= p;
            }
            a.truncate(n);
            let a = fp_rem(&fp_trim(a), &g, p);
            if a.len() <= 1 {
                continue;
            }
            let h = if p == 2 {
                // trace to F_2: a + a^2 + ... + a^(2^(d-1))
                let mut acc = Vec::new();
                let mut cur = a.clone();
                for _ in 0..d {
                    acc = fp_add(&acc, &cur, p);
                    cur = fp_mulmod(&cur, &cur, &g, p);
                }
                acc
            } else {
                // a^((p^d - 1)/2) = prod_i (a^((p-1)/2))^(p^i)
                let b = fp_powmod(&a, (p - 1) / 2, &g, p);
                let mut acc = fp_rem(&[1], &g, p);
                let mut cur = b;
                for _ in 0..d {
                    acc = fp_mulmod(&acc, &cur, &g, p);
                    cur = fp_powmod(&cur, p, &g, p);
                }
                fp_sub(&acc, &[1], p)
            };
            let c = fp_gcd(&g, &h, p);
            let dc = c.len().saturating_sub(1);
            if dc > 0 && dc < n {
                let (quo, _) = fp_divrem(&g, &c, p);
                stack.push(c);
                stack.push(quo);
                break;
            }
        }
    }
    let mut out: Vec<Vec<u64>> = out
        .into_iter()
        .map(|g| {
            let inv = crate::arith::inv_mod(*g.last().expect("nonzero"), p).expect("unit");
            g.iter().map(|&c| crate::arith::mul_mod(c, inv, p)).collect()
        })
        .collect();
    out.sort_by(|x, y| x.iter().rev().cmp(y.iter().rev()));
    out
}
