//! Triangle triples `(a, b, c)`: curvature, maximality, abelianization, genus,
//! the discriminant element `beta`, and admissibility of primes.

use crate::abelian_fields;
use crate::arith::{gcd, lcm};
use crate::cyclotomic::CycElement;
use crate::error::{Result, TridentError};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

/// A ramification order: an integer `>= 1` or infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Order {
    Finite(u64),
    Infinite,
}

impl Order {
    pub fn finite(self) -> Option<u64> {
        match self {
            Order::Finite(n) => Some(n),
            Order::Infinite => None,
        }
    }

    /// `1/s` as an exact rational (`1/inf = 0`).
    pub fn reciprocal(self) -> BigRational {
        match self {
            Order::Finite(n) => BigRational::new(BigInt::one(), BigInt::from(n)),
            Order::Infinite => BigRational::zero(),
        }
    }

    /// `2s`, keeping infinity.
    pub fn doubled(self) -> Order {
        match self {
            Order::Finite(n) => Order::Finite(2 * n),
            Order::Infinite => Order::Infinite,
        }
    }

    pub fn divisible_by(self, p: u64) -> bool {
        matches!(self, Order::Finite(n) if n % p == 0)
    }
}

impl From<u64> for Order {
    fn from(n: u64) -> Self {
        Order::Finite(n)
    }
}

impl Ord for Order {
    fn cmp(&self, o: &Self) -> Ordering {
        match (self, o) {
            (Order::Finite(a), Order::Finite(b)) => a.cmp(b),
            (Order::Finite(_), Order::Infinite) => Ordering::Less,
            (Order::Infinite, Order::Finite(_)) => Ordering::Greater,
            (Order::Infinite, Order::Infinite) => Ordering::Equal,
        }
    }
}

impl PartialOrd for Order {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(n) => write!(f, "{n}"),
            Order::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Order {
    type Err = TridentError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "oo" | "infinity" | "∞" => Ok(Order::Infinite),
            x => x
                .parse::<u64>()
                .map(Order::Finite)
                .map_err(|_| TridentError::InvalidInput(format!("not an order: {s:?}"))),
        }
    }
}

impl Serialize for Order {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Order::Finite(n) => s.serialize_u64(*n),
            Order::Infinite => s.serialize_str("inf"),
        }
    }
}

/// A sorted triple of orders, each `>= 2` or infinite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TriangleTriple {
    pub a: Order,
    pub b: Order,
    pub c: Order,
}

impl TriangleTriple {
    /// Sorts the entries; rejects entries below 2.
    pub fn new(a: impl Into<Order>, b: impl Into<Order>, c: impl Into<Order>) -> Result<Self> {
        let mut v = [a.into(), b.into(), c.into()];
        for x in v {
            if let Order::Finite(n) = x {
                if n < 2 {
                    return Err(TridentError::InvalidInput(format!("order {n} is below 2")));
                }
            }
        }
        v.sort();
        Ok(TriangleTriple { a: v[0], b: v[1], c: v[2] })
    }

    pub fn finite(a: u64, b: u64, c: u64) -> Result<Self> {
        Self::new(a, b, c)
    }

    pub fn entries(&self) -> [Order; 3] {
        [self.a, self.b, self.c]
    }

    /// The entries as integers, when none is infinite.
    pub fn finite_entries(&self) -> Option<[u64; 3]> {
        Some([self.a.finite()?, self.b.finite()?, self.c.finite()?])
    }

    pub fn has_infinity(&self) -> bool {
        self.c == Order::Infinite
    }
}

impl fmt::Display for TriangleTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.a, self.b, self.c)
    }
}

impl FromStr for TriangleTriple {
    type Err = TridentError;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s
            .trim_matches(|c| c == '(' || c == ')')
            .split(',')
            .collect();
        if parts.len() != 3 {
            return Err(TridentError::InvalidInput(format!("expected a,b,c but got {s:?}")));
        }
        Self::new(parts[0].parse::<Order>()?, parts[1].parse::<Order>()?, parts[2].parse::<Order>()?)
    }
}

impl Serialize for TriangleTriple {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// `chi = 1/a + 1/b + 1/c - 1`; hyperbolic exactly when negative.
pub fn chi(t: &TriangleTriple) -> BigRational {
    t.a.reciprocal() + t.b.reciprocal() + t.c.reciprocal() - BigRational::one()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Curvature {
    Spherical,
    Euclidean,
    Hyperbolic,
}

pub fn classify(t: &TriangleTriple) -> Curvature {
    let x = chi(t);
    if x.is_positive() {
        Curvature::Spherical
    } else if x.is_zero() {
        Curvature::Euclidean
    } else {
        Curvature::Hyperbolic
    }
}

fn require_hyperbolic(t: &TriangleTriple) -> Result<()> {
    if classify(t) == Curvature::Hyperbolic {
        Ok(())
    } else {
        Err(TridentError::NonHyperbolic { triple: t.to_string() })
    }
}

/// True unless the triple has one of the shapes `(a,a,c)`, `(a,b,b)`, `(2,b,2b)`, `(3,b,3b)`
/// with entries taken in any order.
pub fn is_maximal(t: &TriangleTriple) -> Result<bool> {
    require_hyperbolic(t)?;
    let e = t.entries();
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for p in perms {
        let (x, y, z) = (e[p[0]], e[p[1]], e[p[2]]);
        if x == y || y == z {
            return Ok(false);
        }
        for k in [2u64, 3] {
            let kz = match y {
                Order::Finite(n) => Order::Finite(k * n),
                Order::Infinite => Order::Infinite,
            };
            if x == Order::Finite(k) && z == kz {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Invariant factors of a finitely generated abelian group; `0` stands for `Z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Abelianization {
    pub invariants: Vec<u64>,
}

impl Abelianization {
    pub fn is_trivial(&self) -> bool {
        self.invariants.is_empty()
    }

    /// Group order, `None` when infinite.
    pub fn order(&self) -> Option<u64> {
        self.invariants
            .iter()
            .try_fold(1u64, |acc, &d| (d != 0).then_some(acc * d))
    }
}

impl fmt::Display for Abelianization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.invariants.is_empty() {
            return write!(f, "trivial");
        }
        let parts: Vec<String> = self
            .invariants
            .iter()
            .map(|&d| if d == 0 { "Z".to_string() } else { format!("Z/{d}") })
            .collect();
        write!(f, "{}", parts.join(" x "))
    }
}

impl Serialize for Abelianization {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Abelianization of the triangle group: `Z^2` modulo the rows `(a,0)`, `(0,b)`, `(c,c)`
/// (rows with an infinite order are absent), via determinantal divisors.
pub fn abelianization(t: &TriangleTriple) -> Abelianization {
    let mut rows: Vec<[i64; 2]> = Vec::new();
    if let Some(a) = t.a.finite() {
        rows.push([a as i64, 0]);
    }
    if let Some(b) = t.b.finite() {
        rows.push([0, b as i64]);
    }
    if let Some(c) = t.c.finite() {
        rows.push([c as i64, c as i64]);
    }
    let d1 = rows
        .iter()
        .flat_map(|r| r.iter())
        .fold(0u64, |g, &x| gcd(g, x.unsigned_abs()));
    let mut d2 = 0u64;
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let m = rows[i][0] * rows[j][1] - rows[i][1] * rows[j][0];
            d2 = gcd(d2, m.unsigned_abs());
        }
    }
    let mut inv = match (d1, d2) {
        (0, _) => vec![0, 0],
        (d1, 0) => vec![d1, 0],
        (d1, d2) => vec![d1, d2 / d1],
    };
    inv.retain(|&d| d != 1);
    inv.sort_by_key(|&d| if d == 0 { u64::MAX } else { d });
    Abelianization { invariants: inv }
}

/// `g = 1 + (|G|/2)(1 - 1/a - 1/b - 1/c)`, rejected unless a non-negative integer.
pub fn genus(t: &TriangleTriple, group_order: u64) -> Result<u64> {
    if t.has_infinity() {
        return Err(TridentError::InfiniteOrder { what: "genus".into() });
    }
    let g = BigRational::one() - BigRational::from_integer(BigInt::from(group_order)) / BigRational::from_integer(2.into()) * chi(t);
    if !g.is_integer() || g.is_negative() {
        return Err(TridentError::InconsistentRamification {
            triple: t.to_string(),
            order: group_order,
        });
    }
    Ok(u64::try_from(g.to_integer()).expect("genus fits in u64"))
}

/// Laurent terms `(exponent, coefficient)` of `lambda_{2s}` inside `Q(zeta_l)`.
fn lambda_terms(l: u64, s: Order, double: bool) -> Vec<(i64, i64)> {
    match s {
        Order::Infinite => vec![(0, 2)],
        Order::Finite(s) => {
            let order = if double { 2 * s } else { s };
            let e = (l / order) as i64;
            vec![(e, 1), (-e, 1)]
        }
    }
}

fn convolve(x: &[(i64, i64)], y: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut out = Vec::with_capacity(x.len() * y.len());
    for &(e, c) in x {
        for &(f, d) in y {
            out.push((e + f, c * d));
        }
    }
    out
}

/// Conductor at which `beta` is assembled: lcm of the finite `2s`.
pub fn beta_conductor(t: &TriangleTriple) -> u64 {
    t.entries()
        .iter()
        .filter_map(|s| s.finite())
        .fold(1, |acc, s| lcm(acc, 2 * s))
}

/// The two closed forms of the discriminant element:
/// `lambda_2a^2 + lambda_2b^2 + lambda_2c^2 + lambda_2a lambda_2b lambda_2c - 4` and
/// `lambda_a + lambda_b + lambda_c + lambda_2a lambda_2b lambda_2c + 2`.
pub fn beta_forms(t: &TriangleTriple) -> (CycElement, CycElement) {
    let l = beta_conductor(t);
    let e = t.entries();
    let dbl: Vec<Vec<(i64, i64)>> = e.iter().map(|&s| lambda_terms(l, s, true)).collect();
    let single: Vec<Vec<(i64, i64)>> = e.iter().map(|&s| lambda_terms(l, s, false)).collect();
    let product = convolve(&convolve(&dbl[0], &dbl[1]), &dbl[2]);
    let mut first: Vec<(i64, i64)> = Vec::new();
    for d in &dbl {
        first.extend(convolve(d, d));
    }
    first.extend(product.iter().copied());
    first.push((0, -4));
    let mut second: Vec<(i64, i64)> = single.concat();
    second.extend(product.iter().copied());
    second.push((0, 2));
    (
        CycElement::from_int_root_sum(l, &first),
        CycElement::from_int_root_sum(l, &second),
    )
}

/// The discriminant element `beta(a,b,c)`; both closed forms are computed and must agree.
pub fn beta(t: &TriangleTriple) -> CycElement {
    let (x, y) = beta_forms(t);
    assert!(x.equals(&y), "closed forms of beta disagree for {t}");
    x
}

/// Largest `phi(conductor)` for which `beta_pretty` solves for a polynomial in `lambda_m`.
const PRETTY_LIMIT: u64 = 512;

/// `beta` as a polynomial in `lambda_m`, `m` the minimal conductor of `beta`.
pub fn beta_pretty(t: &TriangleTriple) -> String {
    let b = beta(t).reduce_conductor();
    let m = b.conductor();
    if let Some(q) = b.as_rational() {
        return q.to_string();
    }
    if crate::arith::euler_phi(m) > PRETTY_LIMIT {
        return format!("<element of conductor {m}>");
    }
    match express_in_lambda(&b) {
        Some(coeffs) => render_lambda_poly(m, &coeffs),
        None => format!("<element of conductor {m}>"),
    }
}

/// Solves `x = sum_i c_i lambda_m^i` with `i < phi(m)/2` by Gaussian elimination.
fn express_in_lambda(x: &CycElement) -> Option<Vec<BigRational>> {
    let m = x.conductor();
    let d = (crate::arith::euler_phi(m) / 2) as usize;
    let lam = crate::cyclotomic::lambda_of(m);
    let mut cols: Vec<Vec<BigRational>> = Vec::with_capacity(d);
    let mut p = CycElement::one().embed(m).ok()?;
    for _ in 0..d {
        cols.push(p.coeffs().to_vec());
        p = p.mul(&lam);
    }
    let rows = x.coeffs().len();
    // augmented matrix rows x (d + 1)
    let mut a: Vec<Vec<BigRational>> = (0..rows)
        .map(|r| {
            let mut row: Vec<BigRational> = cols.iter().map(|c| c[r].clone()).collect();
            row.push(x.coeffs()[r].clone());
            row
        })
        .collect();
    let mut piv_row = 0;
    let mut pivots = Vec::new();
    for col in 0..d {
        let Some(r) = (piv_row..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(piv_row, r);
        let inv = a[piv_row][col].recip();
        for v in a[piv_row].iter_mut() {
            *v *= &inv;
        }
        for r2 in 0..rows {
            if r2 != piv_row && !a[r2][col].is_zero() {
                let f = a[r2][col].clone();
                for c2 in 0..=d {
                    let delta = &f * &a[piv_row][c2];
                    a[r2][c2] -= delta;
                }
            }
        }
        pivots.push(col);
        piv_row += 1;
    }
    if a[piv_row..].iter().any(|row| !row[d].is_zero()) {
        return None;
    }
    let mut out = vec![BigRational::zero(); d];
    for (r, &c) in pivots.iter().enumerate() {
        out[c] = a[r][d].clone();
    }
    Some(out)
}

fn render_lambda_poly(m: u64, c: &[BigRational]) -> String {
    let mut s = String::new();
    for (i, x) in c.iter().enumerate().rev() {
        if x.is_zero() {
            continue;
        }
        let neg = x.is_negative();
        let a = x.abs();
        if s.is_empty() {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        let var = match i {
            0 => String::new(),
            1 => format!("lambda_{m}"),
            _ => format!("lambda_{m}^{i}"),
        };
        if i == 0 {
            s.push_str(&a.to_string());
        } else if a.is_one() {
            s.push_str(&var);
        } else {
            s.push_str(&format!("{a}*{var}"));
        }
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

/// Largest degree of `E` for which the norm of `beta` is computed.
const NORM_DEGREE_LIMIT: u64 = 48;

/// `N_{E/Q}(beta)` for `E = E(a,b,c)`, or `None` when the field is too large to handle.
pub fn beta_norm(t: &TriangleTriple) -> Option<BigRational> {
    let e = abelian_fields::e_field(t).ok()?;
    if e.degree() > NORM_DEGREE_LIMIT || crate::arith::euler_phi(beta_conductor(t)) > 2048 {
        return None;
    }
    let b = beta(t);
    let conj = b.conjugates();
    let own = conj.len() as u64;
    if e.degree() % own != 0 {
        return None;
    }
    let mut acc = CycElement::one();
    for c in &conj {
        acc = acc.mul(c);
    }
    let n = acc.as_rational()?;
    Some(pow_rational(&n, e.degree() / own))
}

fn pow_rational(x: &BigRational, e: u64) -> BigRational {
    (0..e).fold(BigRational::one(), |acc, _| acc * x)
}

/// True iff `{a,b,c} = {mk, m(k+1), mk(k+1)}` for some `m, k >= 1`.
pub fn is_special_shape(t: &TriangleTriple) -> bool {
    let Some([a, b, c]) = t.finite_entries() else {
        return false;
    };
    for k in 1..=c {
        for m in 1..=c {
            let top = m * k * (k + 1);
            if top > c {
                break;
            }
            if (a, b, c) == (m * k, m * (k + 1), top) {
                return true;
            }
        }
    }
    false
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InadmissibleReason {
    DividesOrders,
    SpecialShapeAt2,
    Ramified,
}

impl fmt::Display for InadmissibleReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::DividesOrders => "divides_orders",
            Self::SpecialShapeAt2 => "special_shape_at_2",
            Self::Ramified => "ramified",
        };
        write!(f, "{s}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Admissibility {
    Admissible,
    AdmissibleAt2,
    Inadmissible(InadmissibleReason),
}

impl Admissibility {
    pub fn is_admissible(self) -> bool {
        !matches!(self, Admissibility::Inadmissible(_))
    }
}

/// Admissibility of `p` for the congruence construction. Infinite entries never count
/// as divisible by `p`.
pub fn admissible_prime(t: &TriangleTriple, p: u64) -> Admissibility {
    if t.entries().iter().any(|s| s.divisible_by(p)) {
        return Admissibility::Inadmissible(InadmissibleReason::DividesOrders);
    }
    if let Ok(f) = abelian_fields::f_field(t) {
        if f.conductor() % p == 0 {
            return Admissibility::Inadmissible(InadmissibleReason::Ramified);
        }
    }
    if p == 2 {
        if is_special_shape(t) {
            return Admissibility::Inadmissible(InadmissibleReason::SpecialShapeAt2);
        }
        return Admissibility::AdmissibleAt2;
    }
    Admissibility::Admissible
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclotomic::lambda_of;
    use proptest::prelude::*;

    fn tt(a: u64, b: u64, c: u64) -> TriangleTriple {
        TriangleTriple::finite(a, b, c).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn chi_values() {
        assert_eq!(chi(&tt(2, 3, 7)), q(-1, 42));
        assert_eq!(chi(&tt(2, 3, 6)), q(0, 1));
        assert_eq!(chi(&tt(2, 2, 2)), q(1, 2));
        let t = TriangleTriple::new(2, 3, Order::Infinite).unwrap();
        assert_eq!(chi(&t), q(-1, 6));
    }

    #[test]
    fn classification_matches_explicit_lists() {
        let spherical_fixed = [(2, 3, 3), (2, 3, 4), (2, 3, 5)];
        let euclidean = [(2, 4, 4), (2, 3, 6), (3, 3, 3)];
        for a in 2..=12u64 {
            for b in a..=12 {
                for c in b..=12 {
                    let expect = if a == 2 && b == 2 || spherical_fixed.contains(&(a, b, c)) {
                        Curvature::Spherical
                    } else if euclidean.contains(&(a, b, c)) {
                        Curvature::Euclidean
                    } else {
                        Curvature::Hyperbolic
                    };
                    assert_eq!(classify(&tt(a, b, c)), expect, "({a},{b},{c})");
                }
            }
        }
        let t = TriangleTriple::new(2, 2, Order::Infinite).unwrap();
        assert_eq!(classify(&t), Curvature::Euclidean);
    }

    #[test]
    fn maximality_examples() {
        assert!(is_maximal(&tt(2, 3, 7)).unwrap());
        assert!(!is_maximal(&tt(2, 7, 7)).unwrap());
        assert!(!is_maximal(&tt(3, 8, 8)).unwrap());
        assert!(!is_maximal(&tt(2, 5, 10)).unwrap());
        assert!(!is_maximal(&tt(3, 4, 12)).unwrap());
        assert!(is_maximal(&tt(2, 4, 5)).unwrap());
        assert!(is_maximal(&tt(2, 3, 8)).unwrap());
        assert!(matches!(is_maximal(&tt(2, 3, 5)), Err(TridentError::NonHyperbolic { .. })));
    }

    /// Oracle: order and exponent of (Z/a x Z/b) / <(c,c)> by enumeration.
    fn brute_force_quotient(a: u64, b: u64, c: u64) -> (u64, u64) {
        let gen = (c % a, c % b);
        let mut sub = std::collections::HashSet::new();
        let mut x = (0, 0);
        loop {
            if !sub.insert(x) {
                break;
            }
            x = ((x.0 + gen.0) % a, (x.1 + gen.1) % b);
        }
        let order = a * b / sub.len() as u64;
        // exponent: least e with e*(i,j) in sub for all (i,j)
        let mut exponent = 1;
        'outer: for e in 1..=order {
            for i in 0..a {
                for j in 0..b {
                    if !sub.contains(&((e * i) % a, (e * j) % b)) {
                        continue 'outer;
                    }
                }
            }
            exponent = e;
            break;
        }
        (order, exponent)
    }

    #[test]
    fn abelianization_matches_brute_force() {
        for a in 2..=9u64 {
            for b in a..=9 {
                for c in b..=9 {
                    let ab = abelianization(&tt(a, b, c));
                    let (ord, exp) = brute_force_quotient(a, b, c);
                    assert_eq!(ab.order(), Some(ord), "({a},{b},{c})");
                    assert_eq!(*ab.invariants.last().unwrap_or(&1), exp, "({a},{b},{c})");
                    let coprime = gcd(a, b) == 1 && gcd(b, c) == 1 && gcd(a, c) == 1;
                    assert_eq!(ab.is_trivial(), coprime);
                }
            }
        }
        assert_eq!(abelianization(&tt(2, 2, 2)).invariants, vec![2, 2]);
        assert!(abelianization(&tt(2, 3, 7)).is_trivial());
        let t = TriangleTriple::new(4, 6, Order::Infinite).unwrap();
        assert_eq!(abelianization(&t).invariants, vec![2, 12]);
        let t = TriangleTriple::new(3, Order::Infinite, Order::Infinite).unwrap();
        assert_eq!(abelianization(&t).invariants, vec![3, 0]);
    }

    #[test]
    fn genus_values() {
        assert_eq!(genus(&tt(2, 3, 7), 168).unwrap(), 3);
        assert_eq!(genus(&tt(2, 3, 7), 1092).unwrap(), 14);
        assert_eq!(genus(&tt(3, 5, 6), 660).unwrap(), 100);
        assert!(matches!(
            genus(&tt(2, 3, 7), 100),
            Err(TridentError::InconsistentRamification { .. })
        ));
        for k in 1..20u64 {
            assert_eq!(genus(&tt(2, 3, 7), 84 * k).unwrap() - 1, k);
        }
    }

    /// Oracle: beta assembled with generic field multiplication.
    fn beta_generic(t: &TriangleTriple) -> CycElement {
        let l2: Vec<CycElement> = t.entries().iter().map(|s| lambda_of(s.doubled())).collect();
        let four = CycElement::from_int(4);
        l2[0].mul(&l2[0])
            .add(&l2[1].mul(&l2[1]))
            .add(&l2[2].mul(&l2[2]))
            .add(&l2[0].mul(&l2[1]).mul(&l2[2]))
            .sub(&four)
    }

    #[test]
    fn beta_agrees_with_generic_arithmetic() {
        for a in 2..=7u64 {
            for b in a..=9 {
                for c in b..=11 {
                    let t = tt(a, b, c);
                    assert!(beta(&t).equals(&beta_generic(&t)), "{t}");
                }
            }
        }
        let t = TriangleTriple::new(2, 3, Order::Infinite).unwrap();
        assert!(beta(&t).equals(&beta_generic(&t)));
    }

    #[test]
    fn beta_examples() {
        assert_eq!(beta(&tt(2, 2, 2)), CycElement::from_int(-4));
        for p in [7u64, 11, 13] {
            let expect = lambda_of(p).sub(&CycElement::from_int(1));
            assert!(beta(&tt(2, 3, p)).equals(&expect));
            assert_eq!(beta_pretty(&tt(2, 3, p)), format!("lambda_{p} - 1"));
        }
        let n = beta_norm(&tt(2, 3, 7)).unwrap();
        assert_eq!(n.abs(), BigRational::one());
    }

    #[test]
    fn special_shapes() {
        assert!(is_special_shape(&tt(2, 3, 6)));
        assert!(!is_special_shape(&tt(2, 3, 7)));
        assert!(!is_special_shape(&tt(6, 10, 15)));
        assert!(is_special_shape(&tt(2, 4, 4)));
        assert!(is_special_shape(&tt(3, 4, 12)));
    }

    #[test]
    fn admissibility_examples() {
        assert_eq!(admissible_prime(&tt(2, 3, 7), 13), Admissibility::Admissible);
        assert_eq!(
            admissible_prime(&tt(2, 3, 7), 7),
            Admissibility::Inadmissible(InadmissibleReason::DividesOrders)
        );
        assert_eq!(admissible_prime(&tt(3, 5, 7), 2), Admissibility::AdmissibleAt2);
        let t = TriangleTriple::new(2, 3, Order::Infinite).unwrap();
        assert_eq!(admissible_prime(&t, 5), Admissibility::Admissible);
    }

    #[test]
    fn parse_and_display() {
        let t: TriangleTriple = "7,2,3".parse().unwrap();
        assert_eq!(t.to_string(), "(2,3,7)");
        let t: TriangleTriple = "2,inf,3".parse().unwrap();
        assert_eq!(t.to_string(), "(2,3,inf)");
        assert!("1,2,3".parse::<TriangleTriple>().is_err());
    }

    proptest! {
        #[test]
        fn maximality_is_order_independent(a in 2u64..20, b in 2u64..20, c in 2u64..20) {
            let t = tt(a, b, c);
            prop_assume!(classify(&t) == Curvature::Hyperbolic);
            prop_assert_eq!(is_maximal(&t).unwrap(), is_maximal(&tt(c, a, b)).unwrap());
        }

        #[test]
        fn perfect_iff_pairwise_coprime(a in 2u64..40, b in 2u64..40, c in 2u64..40) {
            let t = tt(a, b, c);
            let coprime = gcd(a, b) == 1 && gcd(b, c) == 1 && gcd(a, c) == 1;
            prop_assert_eq!(abelianization(&t).is_trivial(), coprime);
        }
    }
}
