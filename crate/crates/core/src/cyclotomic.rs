//! Exact arithmetic in cyclotomic fields `Q(zeta_n)`.
//!
//! Elements are stored in the power basis `1, z, ..., z^(phi(n)-1)` of `Q(zeta_n)`
//! modulo the cyclotomic polynomial `Phi_n`, so equality at a fixed conductor is
//! coefficient comparison. Elements of different conductors are compared and
//! combined inside `Q(zeta_lcm)`.
//!
//! Reduction modulo `Phi_n` does not use long division. It uses the identity
//! `Phi_n(x) = prod_{d | n} (1 - x^d)^mu(n/d)` (valid for `n > 1`), so that both the
//! quotient (via reversed power series) and the remainder are computed with one
//! strided prefix sum or difference per squarefree divisor. Integer work is done in
//! `i128` with overflow checks and falls back to big integers when needed.

use crate::arith::{self, euler_phi, gcd, lcm, mobius};
use crate::error::{Result, TridentError};
use crate::poly::RatPoly;
use crate::triangle::Order;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

/// An exact element of `Q(zeta_n)`.
#[derive(Clone, Debug)]
pub struct CycElement {
    conductor: u64,
    coeffs: Vec<BigRational>,
}

// ---------------------------------------------------------------------------
// Cyclotomic polynomials (memoised, exact long division).

fn phi_memo() -> &'static RwLock<HashMap<u64, Arc<Vec<BigInt>>>> {
    static MEMO: OnceLock<RwLock<HashMap<u64, Arc<Vec<BigInt>>>>> = OnceLock::new();
    MEMO.get_or_init(|| RwLock::new(HashMap::new()))
}

/// The integer coefficients of `Phi_n`, ascending. Computed by dividing `x^n - 1` by
/// `Phi_d` for every proper divisor `d`; results are cached process-wide.
pub fn cyclotomic_polynomial(n: u64) -> Arc<Vec<BigInt>> {
    assert!(n >= 1, "cyclotomic polynomial of order 0");
    if let Some(c) = phi_memo().read().expect("memo lock").get(&n) {
        return c.clone();
    }
    let mut num: Vec<BigInt> = vec![BigInt::zero(); n as usize + 1];
    num[0] = BigInt::from(-1);
    num[n as usize] = BigInt::one();
    for d in arith::divisors(n) {
        if d == n {
            continue;
        }
        let den = cyclotomic_polynomial(d);
        num = exact_monic_div(&num, &den);
    }
    let out = Arc::new(num);
    phi_memo()
        .write()
        .expect("memo lock")
        .entry(n)
        .or_insert_with(|| out.clone())
        .clone()
}

fn exact_monic_div(a: &[BigInt], m: &[BigInt]) -> Vec<BigInt> {
    let dm = m.len() - 1;
    let mut r = a.to_vec();
    let mut q = vec![BigInt::zero(); a.len() - dm];
    for k in (0..q.len()).rev() {
        let c = r[k + dm].clone();
        if c.is_zero() {
            continue;
        }
        for (j, mj) in m.iter().enumerate() {
            r[k + j] -= &c * mj;
        }
        q[k] = c;
    }
    debug_assert!(r.iter().all(|x| x.is_zero()));
    q
}

// ---------------------------------------------------------------------------
// Fast reduction modulo Phi_n.

trait Acc: Clone {
    fn acc_zero() -> Self;
    fn acc_is_zero(&self) -> bool;
    fn plus(&self, o: &Self) -> Option<Self>;
    fn minus(&self, o: &Self) -> Option<Self>;
}

impl Acc for i128 {
    fn acc_zero() -> Self {
        0
    }
    fn acc_is_zero(&self) -> bool {
        *self == 0
    }
    fn plus(&self, o: &Self) -> Option<Self> {
        self.checked_add(*o)
    }
    fn minus(&self, o: &Self) -> Option<Self> {
        self.checked_sub(*o)
    }
}

impl Acc for BigInt {
    fn acc_zero() -> Self {
        <BigInt as Zero>::zero()
    }
    fn acc_is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn plus(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn minus(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
}

/// `(d, mu(n/d))` for the divisors `d` with `mu(n/d) != 0`.
fn phi_factors(n: u64) -> Vec<(usize, i32)> {
    arith::divisors(n)
        .into_iter()
        .filter_map(|d| {
            let mu = mobius(n / d);
            (mu != 0).then_some((d as usize, mu))
        })
        .collect()
}

/// Multiply a truncated power series in place by `(1 - x^d)`.
fn series_mul_one_minus<T: Acc>(c: &mut [T], d: usize) -> Option<()> {
    for i in (d..c.len()).rev() {
        c[i] = c[i].minus(&c[i - d])?;
    }
    Some(())
}

/// Divide a truncated power series in place by `(1 - x^d)`.
fn series_div_one_minus<T: Acc>(c: &mut [T], d: usize) -> Option<()> {
    for i in d..c.len() {
        c[i] = c[i].plus(&c[i - d])?;
    }
    Some(())
}

/// Reduces a folded vector (length `n`, exponents taken mod `n`) modulo `Phi_n`.
fn reduce_core<T: Acc>(n: u64, a: &[T]) -> Option<Vec<T>> {
    debug_assert_eq!(a.len(), n as usize);
    if n == 1 {
        return Some(vec![a[0].clone()]);
    }
    let phi = euler_phi(n) as usize;
    let Some(m) = a.iter().rposition(|x| !x.acc_is_zero()) else {
        return Some(vec![T::acc_zero(); phi]);
    };
    if m < phi {
        let mut out = a[..phi].to_vec();
        out.truncate(phi);
        return Some(out);
    }
    let factors = phi_factors(n);
    // reversed quotient: rev(A) / Phi mod x^k (Phi is palindromic for n > 1)
    let k = m - phi + 1;
    let mut c: Vec<T> = (0..k).map(|i| a[m - i].clone()).collect();
    for &(d, mu) in &factors {
        if d >= k {
            continue;
        }
        if mu == 1 {
            series_div_one_minus(&mut c, d)?;
        } else {
            series_mul_one_minus(&mut c, d)?;
        }
    }
    // quotient Q(x) = reverse(c); then w = Q * Phi mod x^phi
    let mut w: Vec<T> = vec![T::acc_zero(); phi];
    for j in 0..k.min(phi) {
        w[j] = c[k - 1 - j].clone();
    }
    for &(d, mu) in &factors {
        if d >= phi {
            continue;
        }
        if mu == 1 {
            series_mul_one_minus(&mut w, d)?;
        } else {
            series_div_one_minus(&mut w, d)?;
        }
    }
    let mut out = Vec::with_capacity(phi);
    for i in 0..phi {
        out.push(a[i].minus(&w[i])?);
    }
    Some(out)
}

/// Reduces integer numerators over a common denominator and normalises.
fn finish(n: u64, nums_i128: Option<Vec<i128>>, nums_big: impl FnOnce() -> Vec<BigInt>, den: &BigInt) -> CycElement {
    let reduced: Vec<BigInt> = match nums_i128.and_then(|v| reduce_core(n, &v)) {
        Some(v) => v.into_iter().map(BigInt::from).collect(),
        None => reduce_core(n, &nums_big()).expect("big integer reduction cannot overflow"),
    };
    let coeffs = reduced
        .into_iter()
        .map(|x| BigRational::new(x, den.clone()))
        .collect();
    CycElement { conductor: n, coeffs }
}

/// Common denominator form of a list of rationals.
fn scaled(c: &[BigRational]) -> (Vec<BigInt>, BigInt) {
    let den = c
        .iter()
        .filter(|x| !x.is_zero())
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let nums = c
        .iter()
        .map(|x| if x.is_zero() { BigInt::zero() } else { x.numer() * (&den / x.denom()) })
        .collect();
    (nums, den)
}

fn to_i128_vec(v: &[BigInt]) -> Option<Vec<i128>> {
    v.iter().map(|x| x.to_i128()).collect()
}

/// Builds an element of `Q(zeta_n)` from a folded dense vector of length `n`.
fn from_folded_rational(n: u64, dense: &[BigRational]) -> CycElement {
    let (nums, den) = scaled(dense);
    let small = to_i128_vec(&nums);
    finish(n, small, || nums.clone(), &den)
}

impl CycElement {
    /// The zero element at conductor `n`.
    pub fn zero(n: u64) -> Self {
        CycElement {
            conductor: n,
            coeffs: vec![BigRational::zero(); euler_phi(n) as usize],
        }
    }

    /// A rational number, at conductor 1.
    pub fn rational(q: BigRational) -> Self {
        CycElement {
            conductor: 1,
            coeffs: vec![q],
        }
    }

    pub fn from_int(k: i64) -> Self {
        Self::rational(BigRational::from_integer(k.into()))
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    /// `sum c_j zeta_n^(e_j)` for integer exponents (any sign) and integer coefficients.
    pub fn from_int_root_sum(n: u64, terms: &[(i64, i64)]) -> Self {
        let mut dense = vec![0i128; n as usize];
        for &(e, c) in terms {
            let i = e.rem_euclid(n as i64) as usize;
            dense[i] += c as i128;
        }
        let big = || dense.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
        let v = dense.clone();
        finish(n, Some(v), big, &BigInt::one())
    }

    /// `sum c_j zeta_n^(e_j)` with rational coefficients.
    pub fn from_root_sum(n: u64, terms: &[(i64, BigRational)]) -> Self {
        let mut dense = vec![BigRational::zero(); n as usize];
        for (e, c) in terms {
            dense[e.rem_euclid(n as i64) as usize] += c;
        }
        from_folded_rational(n, &dense)
    }

    /// Builds an element from coordinates already in the power basis (length `phi(n)`).
    pub fn from_coeffs(n: u64, coeffs: Vec<BigRational>) -> Result<Self> {
        if coeffs.len() != euler_phi(n) as usize {
            return Err(TridentError::InvalidInput(format!(
                "expected {} coefficients for conductor {n}, got {}",
                euler_phi(n),
                coeffs.len()
            )));
        }
        Ok(CycElement { conductor: n, coeffs })
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// The rational value, if the element lies in `Q`.
    pub fn as_rational(&self) -> Option<BigRational> {
        let y = self.reduce_conductor();
        (y.conductor == 1).then(|| y.coeffs[0].clone())
    }

    /// Re-expresses `self` at conductor `n`, which must be a multiple of the current one.
    pub fn embed(&self, n: u64) -> Result<Self> {
        if n == 0 || n % self.conductor != 0 {
            return Err(TridentError::IncompatibleConductors {
                from: self.conductor,
                to: n,
            });
        }
        if n == self.conductor {
            return Ok(self.clone());
        }
        let step = (n / self.conductor) as usize;
        let mut dense = vec![BigRational::zero(); n as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            dense[i * step] = c.clone();
        }
        Ok(from_folded_rational(n, &dense))
    }

    /// Applies `sigma_k : zeta_n -> zeta_n^k`.
    pub fn galois_apply(&self, k: i64) -> Result<Self> {
        let n = self.conductor;
        if gcd(k.unsigned_abs() % n.max(1), n) != 1 && n > 1 {
            return Err(TridentError::NotCoprime { k, n });
        }
        if n <= 2 {
            return Ok(self.clone());
        }
        let kr = k.rem_euclid(n as i64) as u64;
        if kr == 1 {
            return Ok(self.clone());
        }
        let mut dense = vec![BigRational::zero(); n as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                dense[arith::mul_mod(i as u64, kr, n) as usize] = c.clone();
            }
        }
        Ok(from_folded_rational(n, &dense))
    }

    /// True when `sigma_k` fixes `self` (k taken modulo the conductor).
    pub fn is_fixed_by(&self, k: u64) -> bool {
        match self.galois_apply(k as i64) {
            Ok(y) => y.coeffs == self.coeffs,
            Err(_) => false,
        }
    }

    pub fn neg(&self) -> Self {
        CycElement {
            conductor: self.conductor,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.conductor == o.conductor {
            return CycElement {
                conductor: self.conductor,
                coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect(),
            };
        }
        let n = lcm(self.conductor, o.conductor);
        let mut dense = vec![BigRational::zero(); n as usize];
        for x in [self, o] {
            let step = (n / x.conductor) as usize;
            for (i, c) in x.coeffs.iter().enumerate() {
                dense[i * step] += c;
            }
        }
        from_folded_rational(n, &dense)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        CycElement {
            conductor: self.conductor,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = lcm(self.conductor, o.conductor);
        let sa = n / self.conductor;
        let sb = n / o.conductor;
        let (na, da) = scaled(&self.coeffs);
        let (nb, db) = scaled(&o.coeffs);
        let den = &da * &db;
        let ia: Vec<(u64, &BigInt)> = na
            .iter()
            .enumerate()
            .filter(|(_, c)| !Zero::is_zero(*c))
            .map(|(i, c)| ((i as u64 * sa) % n, c))
            .collect();
        let ib: Vec<(u64, &BigInt)> = nb
            .iter()
            .enumerate()
            .filter(|(_, c)| !Zero::is_zero(*c))
            .map(|(i, c)| ((i as u64 * sb) % n, c))
            .collect();
        let small = (|| {
            let mut dense = vec![0i128; n as usize];
            let sa: Vec<(u64, i128)> = ia.iter().map(|(e, c)| Some((*e, c.to_i128()?))).collect::<Option<_>>()?;
            let sb: Vec<(u64, i128)> = ib.iter().map(|(e, c)| Some((*e, c.to_i128()?))).collect::<Option<_>>()?;
            for (ea, ca) in &sa {
                for (eb, cb) in &sb {
                    let slot = &mut dense[((ea + eb) % n) as usize];
                    *slot = slot.checked_add(ca.checked_mul(*cb)?)?;
                }
            }
            Some(dense)
        })();
        let big = || {
            let mut dense = vec![BigInt::zero(); n as usize];
            for (ea, ca) in &ia {
                for (eb, cb) in &ib {
                    dense[((ea + eb) % n) as usize] += *ca * *cb;
                }
            }
            dense
        };
        finish(n, small, big, &den)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = CycElement::one().embed(self.conductor).expect("1 divides n");
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Multiplicative inverse via the extended Euclidean algorithm against `Phi_n`.
    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(TridentError::ZeroInverse);
        }
        let n = self.conductor;
        let phi_n = RatPoly::new(
            cyclotomic_polynomial(n)
                .iter()
                .map(|c| BigRational::from_integer(c.clone()))
                .collect(),
        );
        let a = RatPoly::new(self.coeffs.clone());
        let (g, s) = RatPoly::gcd_with_inverse(&a, &phi_n);
        if g.degree() != Some(0) {
            return Err(TridentError::Internal("non-unit in a field".into()));
        }
        let mut c = s.0;
        c.resize(euler_phi(n) as usize, BigRational::zero());
        Ok(CycElement { conductor: n, coeffs: c })
    }

    /// Tries to rewrite `self` at conductor `n / l` for a prime `l | n`.
    fn descend_prime(&self, l: u64) -> Option<Self> {
        let n = self.conductor;
        let m = n / l;
        if m % l == 0 {
            // Phi_n(x) = Phi_m(x^l): only exponents divisible by l may occur.
            let mut out = Vec::with_capacity(euler_phi(m) as usize);
            for (i, c) in self.coeffs.iter().enumerate() {
                if i as u64 % l == 0 {
                    out.push(c.clone());
                } else if !c.is_zero() {
                    return None;
                }
            }
            return Some(CycElement { conductor: m, coeffs: out });
        }
        // Q(zeta_n) = Q(zeta_m)(zeta_l) with basis zeta_l^i, i < l - 1.
        // zeta_n^k = zeta_m^(k s) zeta_l^(k t) where s l + t m = 1.
        let s = arith::inv_mod(l % m.max(1), m).unwrap_or(1);
        let t = arith::inv_mod(m % l, l).expect("coprime");
        let mut parts: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); m as usize]; l as usize];
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let k = k as u64;
            let em = if m == 1 { 0 } else { arith::mul_mod(k, s, m) };
            let el = arith::mul_mod(k, t, l);
            parts[el as usize][em as usize] += c;
        }
        let reduced: Vec<CycElement> = parts.iter().map(|p| from_folded_rational(m, p)).collect();
        let last = &reduced[l as usize - 1];
        for p in &reduced[1..l as usize - 1] {
            if p.coeffs != last.coeffs {
                return None;
            }
        }
        Some(reduced[0].sub(last))
    }

    /// The same element written at the smallest possible conductor.
    pub fn reduce_conductor(&self) -> Self {
        let mut cur = self.clone();
        loop {
            let mut moved = false;
            for l in arith::prime_divisors(cur.conductor) {
                if let Some(y) = cur.descend_prime(l) {
                    cur = y;
                    moved = true;
                    break;
                }
            }
            if !moved {
                return cur;
            }
        }
    }

    /// Exact equality, across conductors.
    pub fn equals(&self, o: &Self) -> bool {
        if self.conductor == o.conductor {
            return self.coeffs == o.coeffs;
        }
        let n = lcm(self.conductor, o.conductor);
        self.embed(n).expect("divides lcm").coeffs == o.embed(n).expect("divides lcm").coeffs
    }

    /// Subgroup of `(Z/n)^x` (n = conductor) fixing `self`.
    pub fn stabilizer(&self) -> Vec<u64> {
        arith::units(self.conductor)
            .into_iter()
            .filter(|&k| self.is_fixed_by(k))
            .collect()
    }

    /// The distinct Galois conjugates, starting with `self` (at its minimal conductor).
    pub fn conjugates(&self) -> Vec<CycElement> {
        let y = self.reduce_conductor();
        let n = y.conductor;
        let h = y.stabilizer();
        let mut seen = vec![false; n as usize + 1];
        let mut out = Vec::new();
        for k in arith::units(n) {
            if seen[k as usize] {
                continue;
            }
            for &x in &h {
                seen[arith::mul_mod(k, x, n) as usize] = true;
            }
            out.push(y.galois_apply(k as i64).expect("unit"));
        }
        out
    }

    /// Monic minimal polynomial over `Q`, as the product of `T - c` over distinct conjugates `c`.
    pub fn minimal_polynomial(&self) -> RatPoly {
        let conj = self.conjugates();
        let n = conj[0].conductor;
        // coefficients of the running product, ascending, as cyclotomic elements
        let mut acc: Vec<CycElement> = vec![CycElement::one().embed(n).expect("1 | n")];
        for c in &conj {
            let mut next = vec![CycElement::zero(n); acc.len() + 1];
            for (i, a) in acc.iter().enumerate() {
                next[i + 1] = next[i + 1].add(a);
                next[i] = next[i].sub(&a.mul(c));
            }
            acc = next;
        }
        RatPoly::new(
            acc.into_iter()
                .map(|c| c.as_rational().expect("symmetric functions of conjugates are rational"))
                .collect(),
        )
    }

    /// Norm from `Q(self)` to `Q`: the product of the distinct conjugates.
    pub fn norm_of_generated_field(&self) -> BigRational {
        let conj = self.conjugates();
        let mut acc = CycElement::one();
        for c in &conj {
            acc = acc.mul(c);
        }
        acc.as_rational().expect("norm is rational")
    }

    /// Evaluates a rational polynomial at `self`.
    pub fn eval_poly(&self, p: &RatPoly) -> Self {
        let mut acc = CycElement::zero(self.conductor);
        for c in p.coeffs().iter().rev() {
            acc = acc.mul(self).add(&CycElement::rational(c.clone()));
        }
        acc
    }
}

impl PartialEq for CycElement {
    fn eq(&self, o: &Self) -> bool {
        self.equals(o)
    }
}

impl fmt::Display for CycElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
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
            let n = self.conductor;
            match (i, a.is_one()) {
                (0, _) => write!(f, "{a}")?,
                (1, true) => write!(f, "zeta_{n}")?,
                (1, false) => write!(f, "{a}*zeta_{n}")?,
                (_, true) => write!(f, "zeta_{n}^{i}")?,
                (_, false) => write!(f, "{a}*zeta_{n}^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Serialize for CycElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("CycElement", 2)?;
        st.serialize_field("conductor", &self.conductor)?;
        let coeffs: Vec<String> = self
            .coeffs
            .iter()
            .map(|c| format!("{}/{}", c.numer(), c.denom()))
            .collect();
        st.serialize_field("coeffs", &coeffs)?;
        st.end()
    }
}

/// `zeta_n` in `Q(zeta_n)`; `zeta(1) = 1`.
pub fn zeta(n: u64) -> CycElement {
    assert!(n >= 1, "zeta of order 0");
    CycElement::from_int_root_sum(n, &[(1, 1)])
}

/// `lambda_s = zeta_s + zeta_s^(-1)`, with `lambda_inf = 2`.
pub fn lambda_of(s: impl Into<Order>) -> CycElement {
    match s.into() {
        Order::Infinite => CycElement::from_int(2),
        Order::Finite(s) => CycElement::from_int_root_sum(s, &[(1, 1), (-1, 1)]),
    }
}
