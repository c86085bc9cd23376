//! Finite fields `F_q` and the groups `SL2`, `PSL2`, `PGL2` over them.
//!
//! Field elements are `u32` codes: the coefficient vector of a polynomial in the
//! generator `w` read as a base-`p` number. Multiplication goes through log/exp tables.

use crate::abelian_fields::{lambda_field, sqrt_pstar_field, AbelianField};
use crate::arith;
use crate::error::{Result, TridentError};
use crate::poly::{fp_gcd, fp_mulmod as poly_mulmod, fp_powmod as poly_powmod, fp_trim};
use serde::{Serialize, Serializer};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// Default upper bound on `q` for field construction.
pub const DEFAULT_MAX_FIELD: u64 = 1 << 20;
/// Upper bound on `q` for enumerative operations.
pub const ENUMERATION_LIMIT: u64 = 64;

/// Enumeration guard, overridable with `TRIDENT_MAX_Q`.
pub fn enumeration_limit() -> u64 {
    std::env::var("TRIDENT_MAX_Q")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(ENUMERATION_LIMIT)
}

/// A finite field of order `q = p^r`.
#[derive(Debug)]
pub struct FqCtx {
    p: u64,
    r: u32,
    q: u64,
    modulus: Vec<u64>,
    exp: Vec<u32>,
    log: Vec<u32>,
    add_table: Option<Vec<u32>>,
}

impl PartialEq for FqCtx {
    fn eq(&self, o: &Self) -> bool {
        self.p == o.p && self.r == o.r
    }
}
impl Eq for FqCtx {}

/// Rabin-style test: `gcd(x^(p^i) - x, f) = 1` for `i <= deg f / 2`.
fn is_irreducible(f: &[u64], p: u64) -> bool {
    let r = f.len() - 1;
    if r <= 1 {
        return r == 1;
    }
    let x = vec![0u64, 1];
    let mut xp = x.clone();
    for _ in 0..r / 2 {
        xp = poly_powmod(&xp, p, f, p);
        let mut d = xp.clone();
        d.resize(d.len().max(2), 0);
        d[1] = (d[1] + p - 1) % p;
        let g = fp_gcd(&fp_trim(d), f, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

fn code_to_poly(mut c: u64, p: u64, r: u32) -> Vec<u64> {
    let mut v = Vec::with_capacity(r as usize);
    for _ in 0..r {
        v.push(c % p);
        c /= p;
    }
    fp_trim(v)
}

fn poly_to_code(v: &[u64], p: u64) -> u32 {
    v.iter().rev().fold(0u64, |acc, &c| acc * p + c) as u32
}

impl FqCtx {
    /// `F_{p^r}` with modulus the smallest monic irreducible of degree `r` by code.
    pub fn new(p: u64, r: u32) -> Result<Arc<FqCtx>> {
        if !arith::is_prime(p) || r == 0 {
            return Err(TridentError::InvalidInput(format!("no field of order {p}^{r}")));
        }
        let q = p
            .checked_pow(r)
            .filter(|&q| q <= DEFAULT_MAX_FIELD.max(enumeration_limit()))
            .ok_or(TridentError::TooLarge {
                what: "finite field".into(),
                q: p.saturating_pow(r),
                limit: DEFAULT_MAX_FIELD,
            })?;
        let modulus = if r == 1 {
            vec![0, 1]
        } else {
            (0..q)
                .map(|c| {
                    let mut f = code_to_poly(c, p, r);
                    f.resize(r as usize, 0);
                    f.push(1);
                    f
                })
                .find(|f| is_irreducible(f, p))
                .expect("irreducible polynomials exist in every degree")
        };
        let n = (q - 1) as usize;
        // find a primitive element by trying codes in order
        let order_divisors: Vec<u64> = arith::prime_divisors(q - 1).iter().map(|&l| (q - 1) / l).collect();
        let gen = (1..q)
            .find(|&c| {
                let g = code_to_poly(c, p, r);
                order_divisors
                    .iter()
                    .all(|&e| poly_powmod(&g, e, &modulus, p) != vec![1])
            })
            .expect("multiplicative group is cyclic");
        let g = code_to_poly(gen, p, r);
        let mut exp = vec![0u32; n.max(1)];
        let mut log = vec![0u32; q as usize];
        let mut cur = vec![1u64];
        for (i, slot) in exp.iter_mut().enumerate().take(n) {
            let c = poly_to_code(&cur, p);
            *slot = c;
            log[c as usize] = i as u32;
            cur = poly_mulmod(&cur, &g, &modulus, p);
        }
        let mut ctx = FqCtx { p, r, q, modulus, exp, log, add_table: None };
        if r > 1 && q <= 256 {
            let mut t = vec![0u32; (q * q) as usize];
            for a in 0..q as u32 {
                for b in 0..q as u32 {
                    t[(a as u64 * q + b as u64) as usize] = ctx.add_digits(a, b);
                }
            }
            ctx.add_table = Some(t);
        }
        Ok(Arc::new(ctx))
    }

    /// The field of order `q`, which must be a prime power.
    pub fn of_order(q: u64) -> Result<Arc<FqCtx>> {
        let (p, r) = arith::prime_power(q)
            .ok_or_else(|| TridentError::InvalidInput(format!("{q} is not a prime power")))?;
        Self::new(p, r)
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn r(&self) -> u32 {
        self.r
    }
    pub fn q(&self) -> u64 {
        self.q
    }
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    fn add_digits(&self, a: u32, b: u32) -> u32 {
        let (p, mut a, mut b) = (self.p as u32, a, b);
        let (mut out, mut place) = (0u32, 1u32);
        while a > 0 || b > 0 {
            out += ((a % p + b % p) % p) * place;
            a /= p;
            b /= p;
            place *= p;
        }
        out
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        if self.r == 1 {
            let s = a + b;
            return if s >= self.p as u32 { s - self.p as u32 } else { s };
        }
        if self.p == 2 {
            return a ^ b;
        }
        match &self.add_table {
            Some(t) => t[a as usize * self.q as usize + b as usize],
            None => self.add_digits(a, b),
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if self.p == 2 {
            return a;
        }
        if self.r == 1 {
            return if a == 0 { 0 } else { self.p as u32 - a };
        }
        let (p, mut a) = (self.p as u32, a);
        let (mut out, mut place) = (0u32, 1u32);
        while a > 0 {
            out += ((p - a % p) % p) * place;
            a /= p;
            place *= p;
        }
        out
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let n = self.q as usize - 1;
        let s = self.log[a as usize] as usize + self.log[b as usize] as usize;
        self.exp[if s >= n { s - n } else { s }]
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        let n = self.q as usize - 1;
        let l = self.log[a as usize] as usize;
        Some(self.exp[(n - l) % n])
    }

    pub fn div(&self, a: u32, b: u32) -> Option<u32> {
        Some(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: u32, e: u64) -> u32 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let n = self.q - 1;
        let l = self.log[a as usize] as u64;
        self.exp[((l as u128 * e as u128) % n as u128) as usize]
    }

    /// The image of an integer.
    pub fn from_int(&self, k: i64) -> u32 {
        k.rem_euclid(self.p as i64) as u32
    }

    /// The prime-field value of `a`, if `a` lies in `F_p`.
    pub fn to_prime_field(&self, a: u32) -> Option<u64> {
        ((a as u64) < self.p).then_some(a as u64)
    }

    pub fn is_square(&self, a: u32) -> bool {
        a == 0 || self.p == 2 || self.log[a as usize] % 2 == 0
    }

    /// A square root, when one exists (the one with even logarithm, or `0`).
    pub fn sqrt(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return Some(0);
        }
        let n = self.q - 1;
        let l = self.log[a as usize] as u64;
        if self.p == 2 {
            return Some(self.exp[((l * (self.q / 2)) % n) as usize]);
        }
        (l % 2 == 0).then(|| self.exp[(l / 2) as usize])
    }

    /// `x -> x^p`.
    pub fn frobenius(&self, a: u32) -> u32 {
        self.pow(a, self.p)
    }

    /// Degree of `F_p(a)` over `F_p`.
    pub fn degree_of(&self, a: u32) -> u32 {
        let mut x = self.frobenius(a);
        let mut d = 1;
        while x != a {
            x = self.frobenius(x);
            d += 1;
        }
        d
    }

    /// Degree of `F_p(a_1, ..., a_k)`.
    pub fn degree_of_all(&self, xs: &[u32]) -> u32 {
        xs.iter().fold(1, |acc, &x| arith::lcm(acc as u64, self.degree_of(x) as u64) as u32)
    }

    /// True when `a` lies in the subfield of order `p^d`.
    pub fn in_subfield(&self, a: u32, d: u32) -> bool {
        self.r % d == 0 && self.pow(a, self.p.pow(d)) == a
    }

    /// All elements in code order.
    pub fn elements(&self) -> impl Iterator<Item = u32> {
        0..self.q as u32
    }

    /// Multiplicative order of a nonzero element.
    pub fn element_order(&self, a: u32) -> u64 {
        let n = self.q - 1;
        n / arith::gcd(n, self.log[a as usize] as u64)
    }

    /// Element written as a polynomial in the generator `w`.
    pub fn format(&self, a: u32) -> String {
        if self.r == 1 {
            return a.to_string();
        }
        let c = code_to_poly(a as u64, self.p, self.r);
        if c.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (i, &x) in c.iter().enumerate().rev() {
            if x == 0 {
                continue;
            }
            let var = match i {
                0 => String::new(),
                1 => "w".into(),
                _ => format!("w^{i}"),
            };
            parts.push(match (i, x) {
                (0, _) => x.to_string(),
                (_, 1) => var,
                _ => format!("{x}*{var}"),
            });
        }
        parts.join("+")
    }

    /// Parses an integer (taken modulo `p`) or a polynomial in `w` such as `2*w^2+w+1`.
    pub fn parse(&self, s: &str) -> Result<u32> {
        let s = s.trim();
        if let Ok(k) = s.parse::<i64>() {
            return Ok(self.from_int(k));
        }
        let bad = || TridentError::InvalidInput(format!("cannot parse field element {s:?}"));
        let mut acc = 0u32;
        for term in s.split('+') {
            let term = term.trim();
            let (coef, var) = match term.split_once('*') {
                Some((c, v)) => (c.trim().parse::<i64>().map_err(|_| bad())?, v.trim()),
                None if term.starts_with('w') => (1, term),
                None => (term.parse::<i64>().map_err(|_| bad())?, ""),
            };
            let e = match var {
                "" => 0,
                "w" => 1,
                v => v.strip_prefix("w^").and_then(|x| x.parse::<u32>().ok()).ok_or_else(bad)?,
            };
            if self.r == 1 && e > 0 {
                return Err(bad());
            }
            let w = if self.r == 1 { 1 } else { poly_to_code(&[0, 1], self.p) };
            let term = self.mul(self.from_int(coef), self.pow(w, e as u64));
            acc = self.add(acc, term);
        }
        Ok(acc)
    }

    /// Roots in this field of a polynomial with coefficients in it (ascending), sorted by code.
    pub fn roots(&self, f: &[u32]) -> Vec<u32> {
        let f = self.trim(f.to_vec());
        if f.len() <= 1 {
            return Vec::new();
        }
        // restrict to the split part gcd(f, x^q - x)
        let xq = self.fq_powmod(&[0, 1], self.q, &f);
        let mut d = xq;
        d.resize(d.len().max(2), 0);
        d[1] = self.sub(d[1], 1);
        let g = self.fq_gcd(&f, &self.trim(d));
        let mut out = Vec::new();
        self.split_linear(g, &mut out, 0);
        out.sort_unstable();
        out.dedup();
        out
    }

    fn split_linear(&self, f: Vec<u32>, out: &mut Vec<u32>, mut seed: u64) {
        let deg = f.len() - 1;
        if deg == 0 {
            return;
        }
        if deg == 1 {
            let inv = self.inv(f[1]).expect("monic factor");
            out.push(self.neg(self.mul(f[0], inv)));
            return;
        }
        if self.q <= 64 {
            // small fields: evaluate at every element
            for x in self.elements() {
                if self.eval(&f, x) == 0 {
                    out.push(x);
                }
            }
            return;
        }
        loop {
            seed += 1;
            let a = (seed % self.q) as u32;
            let b = ((seed / self.q) % self.q) as u32;
            let probe = [a, if b == 0 { 1 } else { b }];
            let h = if self.p == 2 {
                // trace of probe: sum of probe^(2^i)
                let mut acc: Vec<u32> = Vec::new();
                let mut cur = self.trim(probe.to_vec());
                for _ in 0..self.r {
                    acc = self.poly_add(&acc, &cur);
                    cur = self.fq_mulmod(&cur, &cur, &f);
                }
                acc
            } else {
                let mut v = self.fq_powmod(&probe, (self.q - 1) / 2, &f);
                if v.is_empty() {
                    v.push(0);
                }
                v[0] = self.sub(v[0], 1);
                self.trim(v)
            };
            let g = self.fq_gcd(&f, &h);
            let dg = g.len() - 1;
            if dg > 0 && dg < deg {
                let (quo, _) = self.fq_divrem(&f, &g);
                self.split_linear(g, out, seed);
                self.split_linear(quo, out, seed);
                return;
            }
        }
    }

    fn trim(&self, mut v: Vec<u32>) -> Vec<u32> {
        while v.last() == Some(&0) {
            v.pop();
        }
        v
    }

    pub fn eval(&self, f: &[u32], x: u32) -> u32 {
        f.iter().rev().fold(0, |acc, &c| self.add(self.mul(acc, x), c))
    }

    fn poly_add(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        let n = a.len().max(b.len());
        self.trim(
            (0..n)
                .map(|i| self.add(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0)))
                .collect(),
        )
    }

    fn fq_divrem(&self, a: &[u32], m: &[u32]) -> (Vec<u32>, Vec<u32>) {
        let dm = m.len() - 1;
        let inv = self.inv(m[dm]).expect("nonzero leading coefficient");
        let mut r = self.trim(a.to_vec());
        if r.len() <= dm {
            return (Vec::new(), r);
        }
        let mut q = vec![0u32; r.len() - dm];
        while r.len() > dm {
            let k = r.len() - 1 - dm;
            let c = self.mul(r[r.len() - 1], inv);
            q[k] = c;
            for (j, &mj) in m.iter().enumerate() {
                r[k + j] = self.sub(r[k + j], self.mul(c, mj));
            }
            r = self.trim(r);
        }
        (self.trim(q), r)
    }

    fn fq_mulmod(&self, a: &[u32], b: &[u32], m: &[u32]) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u32; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = self.add(out[i + j], self.mul(x, y));
            }
        }
        self.fq_divrem(&out, m).1
    }

    fn fq_powmod(&self, base: &[u32], mut e: u64, m: &[u32]) -> Vec<u32> {
        let mut acc = self.fq_divrem(&[1], m).1;
        let mut b = self.fq_divrem(base, m).1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.fq_mulmod(&acc, &b, m);
            }
            b = self.fq_mulmod(&b, &b, m);
            e >>= 1;
        }
        acc
    }

    fn fq_gcd(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        let mut x = self.trim(a.to_vec());
        let mut y = self.trim(b.to_vec());
        while !y.is_empty() {
            let r = self.fq_divrem(&x, &y).1;
            x = y;
            y = r;
        }
        if let Some(&l) = x.last() {
            let inv = self.inv(l).expect("unit");
            x = x.into_iter().map(|c| self.mul(c, inv)).collect();
        }
        x
    }
}

/// A 2x2 matrix `[a, b, c, d]` (row major) over a field context.
pub type Mat = [u32; 4];

pub const IDENTITY: Mat = [1, 0, 0, 1];

impl FqCtx {
    #[inline]
    pub fn mat_mul(&self, x: &Mat, y: &Mat) -> Mat {
        [
            self.add(self.mul(x[0], y[0]), self.mul(x[1], y[2])),
            self.add(self.mul(x[0], y[1]), self.mul(x[1], y[3])),
            self.add(self.mul(x[2], y[0]), self.mul(x[3], y[2])),
            self.add(self.mul(x[2], y[1]), self.mul(x[3], y[3])),
        ]
    }

    pub fn det(&self, x: &Mat) -> u32 {
        self.sub(self.mul(x[0], x[3]), self.mul(x[1], x[2]))
    }

    pub fn trace(&self, x: &Mat) -> u32 {
        self.add(x[0], x[3])
    }

    pub fn mat_scale(&self, s: u32, x: &Mat) -> Mat {
        [self.mul(s, x[0]), self.mul(s, x[1]), self.mul(s, x[2]), self.mul(s, x[3])]
    }

    /// Inverse of an invertible matrix.
    pub fn mat_inv(&self, x: &Mat) -> Option<Mat> {
        let di = self.inv(self.det(x))?;
        Some(self.mat_scale(di, &[x[3], self.neg(x[1]), self.neg(x[2]), x[0]]))
    }

    /// Canonical representative of `+-x`: the lexicographically smaller code vector.
    pub fn canon_psl(&self, x: &Mat) -> Mat {
        let y = self.mat_scale(self.neg(1), x);
        if y < *x {
            y
        } else {
            *x
        }
    }

    /// Canonical representative of `F_q^x x`: first nonzero entry scaled to 1.
    pub fn canon_pgl(&self, x: &Mat) -> Mat {
        let lead = x.iter().copied().find(|&e| e != 0).expect("nonzero matrix");
        self.mat_scale(self.inv(lead).expect("nonzero"), x)
    }

    pub fn is_scalar(&self, x: &Mat) -> bool {
        x[1] == 0 && x[2] == 0 && x[0] == x[3]
    }

    /// Every element of `SL2(F_q)`, in code order.
    pub fn sl2_elements(&self) -> Vec<Mat> {
        let q = self.q as u32;
        let mut out = Vec::with_capacity((self.q * (self.q * self.q - 1)) as usize);
        for a in 0..q {
            for b in 0..q {
                if a != 0 {
                    let ai = self.inv(a).expect("nonzero");
                    for c in 0..q {
                        // d = (1 + bc) / a
                        let d = self.mul(self.add(1, self.mul(b, c)), ai);
                        out.push([a, b, c, d]);
                    }
                } else if b != 0 {
                    // -bc = 1
                    let c = self.neg(self.inv(b).expect("nonzero"));
                    for d in 0..q {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Canonical representatives of `PSL2(F_q)`.
    pub fn psl2_elements(&self) -> Vec<Mat> {
        self.sl2_elements()
            .into_iter()
            .filter(|m| self.canon_psl(m) == *m)
            .collect()
    }

    /// Canonical representatives of `PGL2(F_q)`.
    pub fn pgl2_elements(&self) -> Vec<Mat> {
        let q = self.q as u32;
        let mut out = Vec::new();
        for b in 0..q {
            for c in 0..q {
                for d in 0..q {
                    if self.sub(d, self.mul(b, c)) != 0 {
                        out.push([1, b, c, d]);
                    }
                }
            }
        }
        for c in 1..q {
            for d in 0..q {
                out.push([0, 1, c, d]);
            }
        }
        out.sort_unstable();
        out
    }

    /// Order of `+-g` in `PSL2` for a trace `t` of an `SL2` element that is not `+-I`.
    ///
    /// Uses `tr(g^n) = D_n(t)` (Dickson) and `g^n = +-I` iff `D_n(t) = +-2`.
    pub fn psl2_order_from_trace(&self, t: u32) -> u64 {
        let two = self.from_int(2);
        let mtwo = self.neg(two);
        if t == two || t == mtwo {
            return self.p;
        }
        let (mut prev, mut cur) = (two, t);
        let mut n = 1u64;
        while cur != two && cur != mtwo {
            let next = self.sub(self.mul(t, cur), prev);
            prev = cur;
            cur = next;
            n += 1;
        }
        n
    }
}

/// The projective group an element belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum GroupKind {
    #[serde(rename = "PSL2")]
    Psl2,
    #[serde(rename = "PGL2")]
    Pgl2,
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", match self {
            GroupKind::Psl2 => "PSL2",
            GroupKind::Pgl2 => "PGL2",
        })
    }
}

/// Group order `q(q^2-1)/gcd(2,q-1)` or `q(q^2-1)`.
pub fn group_order(kind: GroupKind, q: u64) -> u64 {
    let full = q * (q * q - 1);
    match kind {
        GroupKind::Psl2 => full / arith::gcd(2, q - 1),
        GroupKind::Pgl2 => full,
    }
}

/// An element of `PSL2(F_q)` or `PGL2(F_q)` in canonical form.
#[derive(Clone, Debug)]
pub struct ProjElem {
    pub ctx: Arc<FqCtx>,
    pub m: Mat,
    pub kind: GroupKind,
}

impl PartialEq for ProjElem {
    fn eq(&self, o: &Self) -> bool {
        self.ctx == o.ctx && self.kind == o.kind && self.m == o.m
    }
}

impl ProjElem {
    /// Canonicalizes `m`; `PSL2` requires determinant 1, `PGL2` any invertible matrix.
    pub fn new(ctx: &Arc<FqCtx>, m: Mat, kind: GroupKind) -> Result<Self> {
        let d = ctx.det(&m);
        match kind {
            GroupKind::Psl2 if d != 1 => {
                return Err(TridentError::InvalidInput("PSL2 element needs determinant 1".into()))
            }
            GroupKind::Pgl2 if d == 0 => {
                return Err(TridentError::InvalidInput("singular matrix".into()))
            }
            _ => {}
        }
        let m = match kind {
            GroupKind::Psl2 => ctx.canon_psl(&m),
            GroupKind::Pgl2 => ctx.canon_pgl(&m),
        };
        Ok(ProjElem { ctx: ctx.clone(), m, kind })
    }

    pub fn mul(&self, o: &Self) -> Self {
        let m = self.ctx.mat_mul(&self.m, &o.m);
        let m = match self.kind {
            GroupKind::Psl2 => self.ctx.canon_psl(&m),
            GroupKind::Pgl2 => self.ctx.canon_pgl(&m),
        };
        ProjElem { ctx: self.ctx.clone(), m, kind: self.kind }
    }

    pub fn is_identity(&self) -> bool {
        self.ctx.is_scalar(&self.m)
    }

    /// Order in the projective group, by repeated multiplication.
    pub fn order(&self) -> u64 {
        let mut x = self.clone();
        let mut n = 1;
        while !x.is_identity() {
            x = x.mul(self);
            n += 1;
        }
        n
    }
}

/// Jordan type of a conjugacy class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassKind {
    Identity,
    /// `square_class` is 0 for `u` a square, 1 otherwise (always 0 in `PGL2` or characteristic 2).
    Unipotent { square_class: u8 },
    SplitSemisimple,
    NonsplitSemisimple,
}

/// Conjugacy class invariant. `datum` is `[+-t]` (smaller code) for `PSL2` semisimple classes,
/// `[x, 1/x]` sorted for split `PGL2` classes and `[t^2/det]` for nonsplit `PGL2` classes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ConjClassId {
    pub group: GroupKind,
    pub kind: ClassKind,
    pub datum: Vec<u32>,
    pub order: u64,
}

/// Conjugacy class of `g` in its projective group.
pub fn conj_class(g: &ProjElem) -> ConjClassId {
    let ctx = &g.ctx;
    let m = &g.m;
    let t = ctx.trace(m);
    let delta = ctx.det(m);
    let (kind, datum) = if ctx.is_scalar(m) {
        (ClassKind::Identity, vec![])
    } else {
        let disc = ctx.sub(ctx.mul(t, t), ctx.mul(ctx.from_int(4), delta));
        if disc == 0 {
            let square_class = match g.kind {
                GroupKind::Pgl2 => 0,
                GroupKind::Psl2 if ctx.p() == 2 => 0,
                GroupKind::Psl2 => {
                    // normalize to trace 2, then read u off the nilpotent part
                    let two = ctx.from_int(2);
                    let h = if t == two { *m } else { ctx.mat_scale(ctx.neg(1), m) };
                    let u = if h[2] != 0 { ctx.neg(h[2]) } else { h[1] };
                    u8::from(!ctx.is_square(u))
                }
            };
            (ClassKind::Unipotent { square_class }, vec![])
        } else {
            let split = ctx.is_square(disc) && (ctx.p() != 2 || split_char2(ctx, t, delta));
            let kind = if split { ClassKind::SplitSemisimple } else { ClassKind::NonsplitSemisimple };
            let datum = match g.kind {
                GroupKind::Psl2 => vec![t.min(ctx.neg(t))],
                GroupKind::Pgl2 if split => {
                    let (e1, e2) = eigenvalues(ctx, t, delta).expect("split");
                    let x = ctx.div(e1, e2).expect("nonzero");
                    let xi = ctx.inv(x).expect("nonzero");
                    vec![x.min(xi), x.max(xi)]
                }
                GroupKind::Pgl2 => vec![ctx.div(ctx.mul(t, t), delta).expect("nonzero")],
            };
            (kind, datum)
        }
    };
    let order = match (g.kind, kind) {
        (_, ClassKind::Identity) => 1,
        (_, ClassKind::Unipotent { .. }) => ctx.p(),
        (GroupKind::Psl2, _) => ctx.psl2_order_from_trace(t),
        (GroupKind::Pgl2, _) => pgl2_semisimple_order(ctx, t, delta),
    };
    ConjClassId { group: g.kind, kind, datum, order }
}

/// In characteristic 2, `x^2 + t x + d` splits iff `d/t^2` has absolute trace 0.
fn split_char2(ctx: &FqCtx, t: u32, d: u32) -> bool {
    let z = ctx.div(d, ctx.mul(t, t)).expect("t nonzero off the unipotent locus");
    let mut acc = 0;
    let mut cur = z;
    for _ in 0..ctx.r() {
        acc = ctx.add(acc, cur);
        cur = ctx.mul(cur, cur);
    }
    acc == 0
}

/// Roots of `x^2 - t x + d` in `F_q`, if any.
pub fn eigenvalues(ctx: &FqCtx, t: u32, d: u32) -> Option<(u32, u32)> {
    let r = ctx.roots(&[d, ctx.neg(t), 1]);
    match r.as_slice() {
        [x] => Some((*x, *x)),
        [x, y] => Some((*x, *y)),
        _ => None,
    }
}

/// Least `n` with `g^n` scalar, for non-scalar semisimple `g` with trace `t` and determinant `d`.
fn pgl2_semisimple_order(ctx: &FqCtx, t: u32, d: u32) -> u64 {
    // s_n = tr(g^n); g^n scalar iff s_n^2 = 4 d^n
    let four = ctx.from_int(4);
    let (mut prev, mut cur) = (ctx.from_int(2), t);
    let mut dn = d;
    let mut n = 1u64;
    loop {
        if ctx.mul(cur, cur) == ctx.mul(four, dn) {
            return n;
        }
        let next = ctx.sub(ctx.mul(t, cur), ctx.mul(d, prev));
        prev = cur;
        cur = next;
        dn = ctx.mul(dn, d);
        n += 1;
    }
}

/// Projective order of an element, from its class.
pub fn element_order(g: &ProjElem) -> u64 {
    conj_class(g).order
}

/// A class with its size.
#[derive(Clone, Debug, Serialize)]
pub struct ClassEntry {
    pub class: ConjClassId,
    pub size: u64,
    pub representative: Mat,
}

/// All conjugacy classes of `PSL2(F_q)` or `PGL2(F_q)`, by enumeration (`q <= 64`).
pub fn class_census(ctx: &Arc<FqCtx>, kind: GroupKind) -> Result<Vec<ClassEntry>> {
    let limit = enumeration_limit();
    if ctx.q() > limit {
        return Err(TridentError::TooLarge { what: "class census".into(), q: ctx.q(), limit });
    }
    let elems = match kind {
        GroupKind::Psl2 => ctx.psl2_elements(),
        GroupKind::Pgl2 => ctx.pgl2_elements(),
    };
    let mut map: BTreeMap<ConjClassId, (u64, Mat)> = BTreeMap::new();
    for m in elems {
        let e = ProjElem { ctx: ctx.clone(), m, kind };
        let id = conj_class(&e);
        map.entry(id).or_insert((0, m)).0 += 1;
    }
    Ok(map
        .into_iter()
        .map(|(class, (size, representative))| ClassEntry { class, size, representative })
        .collect())
}

/// Field of rationality of a `PSL2(F_q)` class: `Q(lambda_m)` for semisimple classes,
/// `Q(sqrt(p*))` for unipotent classes when `pr` is odd, `Q` otherwise.
pub fn field_of_rationality_psl2(class: &ConjClassId, ctx: &FqCtx) -> AbelianField {
    match class.kind {
        ClassKind::Identity => AbelianField::rational(),
        ClassKind::Unipotent { .. } => {
            if (ctx.p() * ctx.r() as u64) % 2 == 1 {
                sqrt_pstar_field(ctx.p()).expect("odd prime")
            } else {
                AbelianField::rational()
            }
        }
        _ => lambda_field(class.order),
    }
}

/// Weak variant: semisimple classes give `Q(lambda_m)^<Frob_p>`, unipotent classes `Q`.
pub fn field_of_weak_rationality_psl2(class: &ConjClassId, ctx: &FqCtx) -> AbelianField {
    match class.kind {
        ClassKind::Identity | ClassKind::Unipotent { .. } => AbelianField::rational(),
        _ => lambda_field(class.order)
            .fixed_field_of_frobenius(ctx.p())
            .expect("semisimple orders are prime to p"),
    }
}

/// Field of rationality of a `PGL2(F_q)` class: `Q(lambda_m)` if semisimple, else `Q`.
pub fn field_of_rationality_pgl2(class: &ConjClassId, _ctx: &FqCtx) -> AbelianField {
    match class.kind {
        ClassKind::SplitSemisimple | ClassKind::NonsplitSemisimple => lambda_field(class.order),
        _ => AbelianField::rational(),
    }
}

pub fn field_of_weak_rationality_pgl2(class: &ConjClassId, ctx: &FqCtx) -> AbelianField {
    match class.kind {
        ClassKind::SplitSemisimple | ClassKind::NonsplitSemisimple => lambda_field(class.order)
            .fixed_field_of_frobenius(ctx.p())
            .expect("semisimple orders are prime to p"),
        _ => AbelianField::rational(),
    }
}

/// Serializes a matrix as a list of formatted entries.
pub fn format_mat(ctx: &FqCtx, m: &Mat) -> [String; 4] {
    [ctx.format(m[0]), ctx.format(m[1]), ctx.format(m[2]), ctx.format(m[3])]
}

impl Serialize for ProjElem {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        format_mat(&self.ctx, &self.m).serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    const QS: [u64; 9] = [2, 3, 4, 5, 7, 8, 9, 11, 13];

    #[test]
    fn field_axioms_small() {
        for q in [4u64, 8, 9, 25, 27] {
            let f = FqCtx::of_order(q).unwrap();
            for a in f.elements() {
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                }
                for b in f.elements() {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    for c in [0u32, 1, (q - 1) as u32] {
                        let lhs = f.mul(a, f.add(b, c));
                        assert_eq!(lhs, f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
            assert_eq!(f.degree_of_all(&f.elements().collect::<Vec<_>>()), f.r());
        }
    }

    #[test]
    fn modulus_is_deterministic() {
        let a = FqCtx::new(3, 2).unwrap();
        let b = FqCtx::new(3, 2).unwrap();
        assert_eq!(a.modulus(), b.modulus());
        // x^2 + 1 is the smallest irreducible quadratic over F_3
        assert_eq!(a.modulus(), &[1, 0, 1]);
        assert_eq!(FqCtx::new(2, 3).unwrap().modulus(), &[1, 1, 0, 1]);
    }

    #[test]
    fn roots_match_brute_force() {
        for q in [7u64, 9, 13, 16, 125, 121] {
            let f = FqCtx::of_order(q).unwrap();
            let poly = [f.from_int(-1), f.from_int(-2), 1, 1]; // T^3 + T^2 - 2T - 1
            let brute: Vec<u32> = f.elements().filter(|&x| f.eval(&poly, x) == 0).collect();
            assert_eq!(f.roots(&poly), brute, "q={q}");
        }
    }

    #[test]
    fn group_enumeration_sizes() {
        for q in QS {
            let f = FqCtx::of_order(q).unwrap();
            assert_eq!(f.sl2_elements().len() as u64, q * (q * q - 1));
            assert_eq!(f.psl2_elements().len() as u64, group_order(GroupKind::Psl2, q));
            assert_eq!(f.pgl2_elements().len() as u64, group_order(GroupKind::Pgl2, q));
        }
    }

    #[test]
    fn canonical_forms_absorb_scalars() {
        for q in [3u64, 4, 5, 7, 8, 9] {
            let f = FqCtx::of_order(q).unwrap();
            for m in f.sl2_elements() {
                let neg = f.mat_scale(f.neg(1), &m);
                assert_eq!(f.canon_psl(&m), f.canon_psl(&neg));
                for s in 1..q as u32 {
                    assert_eq!(f.canon_pgl(&m), f.canon_pgl(&f.mat_scale(s, &m)));
                }
            }
        }
    }

    #[test]
    fn class_ids_constant_on_conjugacy_orbits() {
        for q in [2u64, 3, 4, 5, 7, 8, 9] {
            let f = FqCtx::of_order(q).unwrap();
            for kind in [GroupKind::Psl2, GroupKind::Pgl2] {
                let elems = match kind {
                    GroupKind::Psl2 => f.psl2_elements(),
                    GroupKind::Pgl2 => f.pgl2_elements(),
                };
                let canon = |m: &Mat| match kind {
                    GroupKind::Psl2 => f.canon_psl(m),
                    GroupKind::Pgl2 => f.canon_pgl(m),
                };
                // brute-force orbits
                let mut seen: HashSet<Mat> = HashSet::new();
                let mut orbits = 0;
                for &g in &elems {
                    if seen.contains(&g) {
                        continue;
                    }
                    orbits += 1;
                    let id = conj_class(&ProjElem { ctx: f.clone(), m: g, kind });
                    assert_eq!(id.order, ProjElem { ctx: f.clone(), m: g, kind }.order());
                    for h in &elems {
                        let hi = f.mat_inv(h).unwrap();
                        let c = canon(&f.mat_mul(&f.mat_mul(h, &g), &hi));
                        seen.insert(c);
                        let idc = conj_class(&ProjElem { ctx: f.clone(), m: c, kind });
                        assert_eq!(id, idc, "q={q} {kind}");
                    }
                }
                // class ids separate orbits
                let census = class_census(&f, kind).unwrap();
                assert_eq!(census.len(), orbits, "q={q} {kind}");
                let total: u64 = census.iter().map(|c| c.size).sum();
                assert_eq!(total, group_order(kind, q));
            }
        }
    }

    #[test]
    fn census_counts() {
        let f7 = FqCtx::of_order(7).unwrap();
        let c = class_census(&f7, GroupKind::Pgl2).unwrap();
        let split = c.iter().filter(|e| e.class.kind == ClassKind::SplitSemisimple).count();
        assert_eq!(split, 3);
        let total: u64 = c.iter().map(|e| e.size).sum();
        assert_eq!(total, 336);
        let f8 = FqCtx::of_order(8).unwrap();
        let c = class_census(&f8, GroupKind::Pgl2).unwrap();
        let split = c.iter().filter(|e| e.class.kind == ClassKind::SplitSemisimple).count();
        assert_eq!(split, 3);
        for q in [3u64, 5, 7, 9, 11] {
            let f = FqCtx::of_order(q).unwrap();
            let c = class_census(&f, GroupKind::Psl2).unwrap();
            let unip = c.iter().filter(|e| matches!(e.class.kind, ClassKind::Unipotent { .. })).count();
            assert_eq!(unip, 2, "q={q}");
        }
        for q in [4u64, 8] {
            let f = FqCtx::of_order(q).unwrap();
            let c = class_census(&f, GroupKind::Psl2).unwrap();
            let unip = c.iter().filter(|e| matches!(e.class.kind, ClassKind::Unipotent { .. })).count();
            assert_eq!(unip, 1, "q={q}");
        }
    }

    #[test]
    fn unipotent_examples() {
        let f = FqCtx::of_order(7).unwrap();
        let g = ProjElem::new(&f, [1, 1, 0, 1], GroupKind::Psl2).unwrap();
        let id = conj_class(&g);
        assert_eq!(id.kind, ClassKind::Unipotent { square_class: 0 });
        assert_eq!(element_order(&g), 7);
        let g = ProjElem::new(&f, [1, 3, 0, 1], GroupKind::Psl2).unwrap();
        assert_eq!(conj_class(&g).kind, ClassKind::Unipotent { square_class: 1 });
        let g = ProjElem::new(&f, [1, 0, 0, 3], GroupKind::Pgl2).unwrap();
        let id = conj_class(&g);
        assert_eq!(id.kind, ClassKind::SplitSemisimple);
        assert_eq!(id.datum, vec![3, 5]);
    }

    #[test]
    fn semisimple_order_determined_by_trace() {
        for q in QS {
            let f = FqCtx::of_order(q).unwrap();
            let mut by_trace: std::collections::HashMap<u32, u64> = Default::default();
            for m in f.psl2_elements() {
                let g = ProjElem { ctx: f.clone(), m, kind: GroupKind::Psl2 };
                let id = conj_class(&g);
                if matches!(id.kind, ClassKind::SplitSemisimple | ClassKind::NonsplitSemisimple) {
                    let o = g.order();
                    let prev = by_trace.insert(id.datum[0], o);
                    assert!(prev.is_none() || prev == Some(o));
                }
            }
        }
    }

    #[test]
    fn rationality_fields() {
        let f7 = FqCtx::of_order(7).unwrap();
        let g = ProjElem::new(&f7, [1, 1, 0, 1], GroupKind::Psl2).unwrap();
        let k = field_of_rationality_psl2(&conj_class(&g), &f7);
        assert_eq!(k.pretty(), "Q(sqrt(-7))");
        let f9 = FqCtx::of_order(9).unwrap();
        let g = ProjElem::new(&f9, [1, 1, 0, 1], GroupKind::Psl2).unwrap();
        assert_eq!(field_of_rationality_psl2(&conj_class(&g), &f9), AbelianField::rational());
        // order-7 element of PSL2(F13)
        let f13 = FqCtx::of_order(13).unwrap();
        let el = f13
            .psl2_elements()
            .into_iter()
            .map(|m| ProjElem { ctx: f13.clone(), m, kind: GroupKind::Psl2 })
            .find(|g| element_order(g) == 7)
            .unwrap();
        let id = conj_class(&el);
        assert_eq!(field_of_rationality_psl2(&id, &f13), lambda_field(7));
        assert_eq!(field_of_weak_rationality_psl2(&id, &f13), lambda_field(7));
        // order-8 element of PGL2(F7)
        let el = f7
            .pgl2_elements()
            .into_iter()
            .map(|m| ProjElem { ctx: f7.clone(), m, kind: GroupKind::Pgl2 })
            .find(|g| element_order(g) == 8)
            .unwrap();
        let id = conj_class(&el);
        assert_eq!(field_of_weak_rationality_pgl2(&id, &f7).pretty(), "Q(sqrt(2))");
        let el = ProjElem::new(&f7, [1, 0, 0, 2], GroupKind::Pgl2).unwrap();
        assert_eq!(element_order(&el), 3);
    }

    #[test]
    fn parse_and_format() {
        let f = FqCtx::of_order(9).unwrap();
        for a in f.elements() {
            assert_eq!(f.parse(&f.format(a)).unwrap(), a);
        }
        let f7 = FqCtx::of_order(7).unwrap();
        assert_eq!(f7.parse("-3").unwrap(), 4);
    }
}
