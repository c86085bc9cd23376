//! Abelian number fields as subfields of cyclotomic fields.
//!
//! A field is stored as its minimal conductor `n` together with the subgroup
//! `H <= (Z/n)^x` fixing it. Containment, composita, Frobenius orders and
//! pretty names all reduce to arithmetic on residue sets.

use crate::arith::{self, gcd, lcm, units};
use crate::cyclotomic::{lambda_of, CycElement};
use crate::error::{Result, TridentError};
use crate::triangle::{classify, Curvature, Order, TriangleTriple};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use std::collections::HashMap;
use std::fmt;

/// Subfield of `Q(zeta_n)` fixed by `H`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AbelianField {
    conductor: u64,
    fixing_group: Vec<u64>,
}

/// Membership table for a subset of `Z/n`.
fn mask(n: u64, h: &[u64]) -> Vec<bool> {
    let mut m = vec![false; n as usize + 1];
    for &x in h {
        m[x as usize] = true;
    }
    m
}

impl AbelianField {
    /// The field `Q`.
    pub fn rational() -> Self {
        AbelianField { conductor: 1, fixing_group: vec![1] }
    }

    /// Field fixed by the subgroup `h` of `(Z/n)^x`, reduced to its minimal conductor.
    ///
    /// `h` must be a subgroup; closure under multiplication is checked.
    pub fn from_subgroup(n: u64, h: &[u64]) -> Result<Self> {
        if n == 0 {
            return Err(TridentError::InvalidInput("conductor 0".into()));
        }
        let mut h: Vec<u64> = h.iter().map(|&x| arith::residue(x as i64, n)).collect();
        h.sort_unstable();
        h.dedup();
        let m = mask(n, &h);
        if !m[arith::residue(1, n) as usize] {
            return Err(TridentError::InvalidInput("subgroup must contain 1".into()));
        }
        for &x in &h {
            if gcd(x, n) != 1 {
                return Err(TridentError::NotCoprime { k: x as i64, n });
            }
            for &y in &h {
                if !m[arith::mul_mod(x, y, n) as usize] {
                    return Err(TridentError::InvalidInput(format!(
                        "residues do not form a subgroup of (Z/{n})^x"
                    )));
                }
            }
        }
        Ok(Self::canonical(n, &h))
    }

    /// Reduces `(n, h)` to the minimal conductor. `h` must be a sorted subgroup.
    fn canonical(n: u64, h: &[u64]) -> Self {
        let m = mask(n, h);
        let all = units(n);
        for d in arith::divisors(n) {
            // kernel of (Z/n)^x -> (Z/d)^x must lie in h
            let ok = all
                .iter()
                .filter(|&&k| d == 1 || k % d == 1)
                .all(|&k| m[k as usize]);
            if ok {
                let mut hd: Vec<u64> = h.iter().map(|&x| arith::residue(x as i64, d)).collect();
                hd.sort_unstable();
                hd.dedup();
                return AbelianField { conductor: d, fixing_group: hd };
            }
        }
        unreachable!("n itself always qualifies")
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn fixing_group(&self) -> &[u64] {
        &self.fixing_group
    }

    /// `[K : Q] = phi(n) / |H|`.
    pub fn degree(&self) -> u64 {
        arith::euler_phi(self.conductor) / self.fixing_group.len() as u64
    }

    /// The fixing group lifted to `(Z/big)^x`; `big` must be a multiple of the conductor.
    pub fn preimage_at(&self, big: u64) -> Vec<u64> {
        assert!(big % self.conductor == 0, "conductor must divide the target");
        let m = mask(self.conductor, &self.fixing_group);
        units(big)
            .into_iter()
            .filter(|&k| m[arith::residue(k as i64, self.conductor) as usize])
            .collect()
    }

    /// True when `other` is a subfield of `self`.
    pub fn contains(&self, other: &AbelianField) -> bool {
        let n = lcm(self.conductor, other.conductor);
        let mine = self.preimage_at(n);
        let theirs = mask(other.conductor, &other.fixing_group);
        mine.iter()
            .all(|&k| theirs[arith::residue(k as i64, other.conductor) as usize])
    }

    /// The compositum, fixed by the intersection of the lifted groups.
    pub fn compositum(&self, other: &AbelianField) -> AbelianField {
        let n = lcm(self.conductor, other.conductor);
        let theirs = mask(other.conductor, &other.fixing_group);
        let h: Vec<u64> = self
            .preimage_at(n)
            .into_iter()
            .filter(|&k| theirs[arith::residue(k as i64, other.conductor) as usize])
            .collect();
        Self::canonical(n, &h)
    }

    /// True when `x` lies in this field.
    pub fn contains_element(&self, x: &CycElement) -> bool {
        let n = lcm(self.conductor, x.conductor());
        let y = x.embed(n).expect("conductor divides lcm");
        let lifted = self.preimage_at(n);
        // generators suffice, but the group is small enough to check outright
        lifted.iter().all(|&k| y.is_fixed_by(k))
    }

    fn require_unramified(&self, p: u64) -> Result<()> {
        if self.conductor % p == 0 {
            Err(TridentError::RamifiedPrime { p, conductor: self.conductor })
        } else {
            Ok(())
        }
    }

    /// Residue degree of the unramified prime `p`: the order of `p` modulo `H`.
    pub fn frobenius_order(&self, p: u64) -> Result<u64> {
        self.require_unramified(p)?;
        let n = self.conductor;
        let m = mask(n, &self.fixing_group);
        let mut x = arith::residue(p as i64, n);
        let mut r = 1;
        while !m[x as usize] {
            x = arith::mul_mod(x, p, n);
            r += 1;
        }
        Ok(r)
    }

    /// Subfield fixed by Frobenius at `p`, i.e. by `<H, p>`.
    pub fn fixed_field_of_frobenius(&self, p: u64) -> Result<AbelianField> {
        self.require_unramified(p)?;
        let n = self.conductor;
        let mut seen = mask(n, &self.fixing_group);
        let mut h = self.fixing_group.clone();
        let mut frontier = h.clone();
        while let Some(x) = frontier.pop() {
            let y = arith::mul_mod(x, p, n);
            if !seen[y as usize] {
                seen[y as usize] = true;
                h.push(y);
                frontier.push(y);
            }
        }
        h.sort_unstable();
        Ok(Self::canonical(n, &h))
    }

    /// True when the Galois group is elementary abelian of exponent dividing 2.
    pub fn is_multiquadratic(&self) -> bool {
        let n = self.conductor;
        let m = mask(n, &self.fixing_group);
        units(n).iter().all(|&k| m[arith::mul_mod(k, k, n) as usize])
    }

    /// Human-readable name such as `Q(lambda_7,sqrt(2))`.
    pub fn pretty(&self) -> String {
        pretty(self)
    }
}

impl fmt::Display for AbelianField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pretty())
    }
}

impl Serialize for AbelianField {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("AbelianField", 4)?;
        st.serialize_field("conductor", &self.conductor)?;
        st.serialize_field("fixing_group", &self.fixing_group)?;
        st.serialize_field("degree", &self.degree())?;
        st.serialize_field("pretty", &self.pretty())?;
        st.end()
    }
}

/// `Q(lambda_s)`: fixed by `{+-1}` in `(Z/s)^x`.
pub fn lambda_field(s: impl Into<Order>) -> AbelianField {
    match s.into() {
        Order::Infinite => AbelianField::rational(),
        Order::Finite(s) => {
            let h = [arith::residue(1, s), arith::residue(-1, s)];
            AbelianField::from_subgroup(s, &h).expect("{+-1} is a subgroup")
        }
    }
}

/// `Q(sqrt(d))` for an integer `d` that is not a square.
pub fn quadratic_field(d: i64) -> Result<AbelianField> {
    let d0 = arith::squarefree_part(d);
    if d0 == 1 || d == 0 {
        return Err(TridentError::InvalidInput(format!("{d} is a square")));
    }
    let disc = arith::quadratic_discriminant(d0);
    let n = disc.unsigned_abs();
    let h: Vec<u64> = units(n)
        .into_iter()
        .filter(|&k| arith::kronecker(disc, k) == 1)
        .collect();
    AbelianField::from_subgroup(n, &h)
}

/// `Q(sqrt(p*))`, the quadratic subfield of `Q(zeta_p)`, for an odd prime `p`.
pub fn sqrt_pstar_field(p: u64) -> Result<AbelianField> {
    if p == 2 || !arith::is_prime(p) {
        return Err(TridentError::InvalidInput(format!("{p} is not an odd prime")));
    }
    let mut h: Vec<u64> = units(p).into_iter().map(|k| arith::mul_mod(k, k, p)).collect();
    h.sort_unstable();
    h.dedup();
    AbelianField::from_subgroup(p, &h)
}

/// `K(sqrt(p*))`.
pub fn adjoin_sqrt_pstar(k: &AbelianField, p: u64) -> Result<AbelianField> {
    Ok(k.compositum(&sqrt_pstar_field(p)?))
}

/// The field generated over `Q` by the given elements, via the stabilizer in
/// `(Z/N)^x` with `N` the lcm of the conductors.
pub fn field_generated_by(gens: &[CycElement]) -> AbelianField {
    let mut reduced: Vec<CycElement> = gens.iter().map(|g| g.reduce_conductor()).collect();
    reduced.sort_by_key(|g| g.conductor());
    let n = reduced.iter().fold(1, |acc, g| lcm(acc, g.conductor()));
    let mut candidates = units(n);
    for g in &reduced {
        let m = g.conductor();
        let mut cache: HashMap<u64, bool> = HashMap::new();
        candidates.retain(|&k| {
            let r = arith::residue(k as i64, m);
            *cache.entry(r).or_insert_with(|| g.is_fixed_by(r))
        });
    }
    AbelianField::canonical(n, &candidates)
}

fn require_hyperbolic(t: &TriangleTriple) -> Result<()> {
    if classify(t) == Curvature::Hyperbolic {
        Ok(())
    } else {
        Err(TridentError::NonHyperbolic { triple: t.to_string() })
    }
}

/// `F(a,b,c) = Q(lambda_2a, lambda_2b, lambda_2c)`.
pub fn f_field(t: &TriangleTriple) -> Result<AbelianField> {
    require_hyperbolic(t)?;
    let gens: Vec<CycElement> = t.entries().iter().map(|s| lambda_of(s.doubled())).collect();
    Ok(field_generated_by(&gens))
}

/// `D(a,b,c) = Q(lambda_a, lambda_b, lambda_c)`.
pub fn d_field(t: &TriangleTriple) -> Result<AbelianField> {
    require_hyperbolic(t)?;
    let gens: Vec<CycElement> = t.entries().iter().map(|&s| lambda_of(s)).collect();
    Ok(field_generated_by(&gens))
}

/// `lambda_2a lambda_2b lambda_2c`, assembled as a sum of eight roots of unity.
pub fn lambda_product(t: &TriangleTriple) -> CycElement {
    let l = crate::triangle::beta_conductor(t);
    let mut terms = vec![(0i64, 1i64)];
    for s in t.entries() {
        let factor: Vec<(i64, i64)> = match s {
            Order::Infinite => vec![(0, 2)],
            Order::Finite(s) => {
                let e = (l / (2 * s)) as i64;
                vec![(e, 1), (-e, 1)]
            }
        };
        terms = terms
            .iter()
            .flat_map(|&(e, c)| factor.iter().map(move |&(f, d)| (e + f, c * d)))
            .collect();
    }
    CycElement::from_int_root_sum(l, &terms)
}

/// `E(a,b,c) = Q(lambda_a, lambda_b, lambda_c, lambda_2a lambda_2b lambda_2c)`.
pub fn e_field(t: &TriangleTriple) -> Result<AbelianField> {
    require_hyperbolic(t)?;
    let mut gens: Vec<CycElement> = t.entries().iter().map(|&s| lambda_of(s)).collect();
    gens.push(lambda_product(t));
    Ok(field_generated_by(&gens))
}

fn prime_to_p_compositum(t: &TriangleTriple, p: u64, double: bool) -> Result<AbelianField> {
    let Some(entries) = t.finite_entries() else {
        return Err(TridentError::InfiniteOrder { what: "prime-to-p field".into() });
    };
    if !arith::is_prime(p) {
        return Err(TridentError::InvalidInput(format!("{p} is not prime")));
    }
    Ok(entries
        .iter()
        .filter(|&&s| s % p != 0)
        .fold(AbelianField::rational(), |k, &s| {
            k.compositum(&lambda_field(if double { 2 * s } else { s }))
        }))
}

/// `D_{p'}`: compositum of `Q(lambda_s)` over the entries `s` prime to `p`.
pub fn d_pprime(t: &TriangleTriple, p: u64) -> Result<AbelianField> {
    prime_to_p_compositum(t, p, false)
}

/// `F_{p'}`: compositum of `Q(lambda_2s)` over the entries `s` prime to `p`.
pub fn f_pprime(t: &TriangleTriple, p: u64) -> Result<AbelianField> {
    prime_to_p_compositum(t, p, true)
}

/// True when `p` has the same residue degree in `F` as in `E`, which selects `PSL2`.
pub fn splits_completely_in_f_over_e(t: &TriangleTriple, p: u64) -> Result<bool> {
    let f = f_field(t)?;
    let e = e_field(t)?;
    Ok(f.frobenius_order(p)? == e.frobenius_order(p)?)
}

/// Largest number of atoms tried by the pretty-printer.
const MAX_LAMBDA_ATOMS: usize = 3;
const MAX_SQRT_ATOMS: usize = 5;

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Writes `K` as a compositum of the fewest `Q(lambda_s)` and then the fewest `Q(sqrt(d))`.
fn pretty(k: &AbelianField) -> String {
    if k.degree() == 1 {
        return "Q".into();
    }
    let n = k.conductor;
    let mut lambda_atoms: Vec<(u64, AbelianField)> = Vec::new();
    let mut cands: Vec<u64> = arith::divisors(n)
        .into_iter()
        .flat_map(|d| [d, 2 * d])
        .filter(|&s| s >= 3)
        .collect();
    cands.sort_unstable();
    cands.dedup();
    for s in cands {
        let f = lambda_field(s);
        if f.degree() > 1
            && !f.is_multiquadratic()
            && k.contains(&f)
            && !lambda_atoms.iter().any(|(_, g)| *g == f)
        {
            lambda_atoms.push((s, f));
        }
    }
    let mut sqrt_atoms: Vec<(i64, AbelianField)> = Vec::new();
    let mut ds: Vec<i64> = Vec::new();
    for m in 1..=n as i64 {
        for d in [m, -m] {
            if d != 1 && arith::squarefree_part(d) == d {
                let disc = arith::quadratic_discriminant(d);
                if n % disc.unsigned_abs() == 0 {
                    ds.push(d);
                }
            }
        }
    }
    for d in ds {
        let f = quadratic_field(d).expect("squarefree and not 1");
        if k.contains(&f) {
            sqrt_atoms.push((d, f));
        }
    }
    for nl in 0..=MAX_LAMBDA_ATOMS.min(lambda_atoms.len()) {
        for ns in 0..=MAX_SQRT_ATOMS.min(sqrt_atoms.len()) {
            for lc in combinations(lambda_atoms.len(), nl) {
                let base = lc
                    .iter()
                    .fold(AbelianField::rational(), |acc, &i| acc.compositum(&lambda_atoms[i].1));
                if base.degree() * (1 << ns) < k.degree() {
                    continue;
                }
                for sc in combinations(sqrt_atoms.len(), ns) {
                    let f = sc
                        .iter()
                        .fold(base.clone(), |acc, &i| acc.compositum(&sqrt_atoms[i].1));
                    if f == *k {
                        let mut parts: Vec<String> =
                            lc.iter().map(|&i| format!("lambda_{}", lambda_atoms[i].0)).collect();
                        parts.extend(sc.iter().map(|&i| format!("sqrt({})", sqrt_atoms[i].0)));
                        return format!("Q({})", parts.join(","));
                    }
                }
            }
        }
    }
    let gens: Vec<String> = k.fixing_group.iter().map(|h| h.to_string()).collect();
    format!("Q(zeta_{n})^<{}>", gens.join(","))
}
