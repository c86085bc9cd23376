//! Reduction of triangle-group data modulo a prime and the resulting congruence covers
//! `X(a,b,c; P) -> P^1` with Galois group `PSL2(F_q)` or `PGL2(F_q)`.
//!
//! All `lambda` images are taken from one root `y` of the reduced minimal polynomial of
//! `lambda_L` (`L` the lcm of the doubled orders), so the images of `lambda_s` and `lambda_2s`
//! are mutually consistent. The root is the first in code order; other roots give
//! Galois-conjugate covers.

use crate::abelian_fields::{adjoin_sqrt_pstar, d_pprime, e_field, f_field, f_pprime};
use crate::arith;
use crate::cyclotomic::cyclotomic_polynomial;
use crate::error::{Result, TridentError};
use crate::macbeath::{
    closure, construct_triple, is_exceptional_orders, psl2_order, sort3, subgroup_oracle, Macbeath,
    MatGroup, SubgroupTag, TraceTriple, MAX_TABLE_GROUP,
};
use crate::poly::{fp_add, fp_equal_degree_factors, fp_gcd, fp_mul, fp_mulmod, fp_powmod, fp_rem, fp_sub, fp_trim};
use crate::projective_linear::{enumeration_limit, format_mat, group_order, FqCtx, GroupKind, Mat};
use crate::triangle::{self, admissible_prime, Admissibility, InadmissibleReason, Order, TriangleTriple};
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::Serialize;
use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, Mutex, OnceLock};

/// Hyperbolic triples whose reduced trace triples may be exceptional; decided by brute force.
pub const ORACLE_TRIPLES: [[u64; 3]; 5] = [[3, 4, 4], [2, 5, 5], [5, 5, 5], [3, 3, 5], [3, 5, 5]];

/// Largest closure enumerated for the regular coset action.
pub const MAX_REGULAR_ACTION: u64 = 200_000;

/// Largest `deg psi_L` for the gcd test of `beta`.
pub const BETA_MAX_DEGREE: usize = 400;

fn field(p: u64, r: u32) -> Result<Arc<FqCtx>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u32), Arc<FqCtx>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(c) = cache.lock().expect("field cache").get(&(p, r)) {
        return Ok(c.clone());
    }
    let c = FqCtx::new(p, r)?;
    cache.lock().expect("field cache").insert((p, r), c.clone());
    Ok(c)
}

fn prime_to(n: u64, p: u64) -> (u64, u32) {
    let (mut m, mut j) = (n, 0);
    while m % p == 0 {
        m /= p;
        j += 1;
    }
    (m, j)
}

/// Dickson polynomials `D_0 = 2, D_1 = T, D_{k+1} = T D_k - D_{k-1}` over `F_p`, up to `D_d`.
fn dickson_polys(d: usize, p: u64) -> Vec<Vec<u64>> {
    let mut out = vec![fp_trim(vec![2 % p]), vec![0, 1]];
    while out.len() <= d {
        let k = out.len();
        let mut next = vec![0u64; k + 1];
        for (i, &c) in out[k - 1].iter().enumerate() {
            next[i + 1] = c;
        }
        for (i, &c) in out[k - 2].iter().enumerate() {
            next[i] = (next[i] + p - c) % p;
        }
        out.push(fp_trim(next));
    }
    out.truncate(d + 1);
    out
}

/// Minimal polynomial of `lambda_n = zeta_n + zeta_n^-1` reduced mod `p`, ascending and monic.
///
/// Obtained from the palindromic `Phi_n`: `Phi_n(x) / x^d = a_d + sum_k a_{d+k} (x^k + x^-k)`.
pub fn lambda_minpoly_mod_p(n: u64, p: u64) -> Vec<u64> {
    match n {
        0 => panic!("lambda_0 is undefined"),
        1 => return vec![arith::residue(-2, p), 1],
        2 => return vec![2 % p, 1],
        _ => {}
    }
    let phi = cyclotomic_polynomial(n);
    let coeff = |i: usize| -> u64 {
        phi[i].mod_floor(&p.into()).to_u64().expect("residue fits")
    };
    let d = (phi.len() - 1) / 2;
    let dk = dickson_polys(d, p);
    let mut out = vec![0u64; d + 1];
    out[0] = coeff(d);
    for (k, dpoly) in dk.iter().enumerate().skip(1) {
        let a = coeff(d + k);
        for (i, &c) in dpoly.iter().enumerate() {
            out[i] = (out[i] + a * c) % p;
        }
    }
    fp_trim(out)
}

/// `D_k(y)` by the Lucas ladder.
pub fn dickson_eval(c: &FqCtx, k: u64, y: u32) -> u32 {
    let two = c.from_int(2);
    let (mut a, mut b) = (two, y);
    for bit in (0..64 - k.leading_zeros()).rev() {
        if k >> bit & 1 == 0 {
            let ab = c.sub(c.mul(a, b), y);
            a = c.sub(c.mul(a, a), two);
            b = ab;
        } else {
            let ab = c.sub(c.mul(a, b), y);
            b = c.sub(c.mul(b, b), two);
            a = ab;
        }
    }
    a
}

/// Smallest `w` with `p^w = +-1 mod n`; the residue degree of `p` in `Q(lambda_n)`.
pub fn lambda_residue_degree(n: u64, p: u64) -> u32 {
    if n <= 2 {
        return 1;
    }
    let mut x = p % n;
    let mut w = 1;
    while x != 1 && x != n - 1 {
        x = arith::mul_mod(x, p, n);
        w += 1;
    }
    w
}

/// Image of `lambda_s` in the smallest field containing one, as the first root by code.
///
/// `s = infinity` maps to `2`. Errors when `p | s` and `lambda_s` is irrational (ramified).
pub fn reduce_lambda_mod_p(s: Order, p: u64, target: &Arc<FqCtx>) -> Result<u32> {
    if target.p() != p {
        return Err(TridentError::InvalidInput(format!("field of characteristic {} used for p = {p}", target.p())));
    }
    let Some(s) = s.finite() else {
        return Ok(target.from_int(2));
    };
    if s % p == 0 && arith::euler_phi(s) > 2 {
        return Err(TridentError::RamifiedPrime { p, conductor: s });
    }
    let f: Vec<u32> = lambda_minpoly_mod_p(s, p).iter().map(|&c| target.from_int(c as i64)).collect();
    target.roots(&f).first().copied().ok_or_else(|| {
        TridentError::InvalidInput(format!(
            "F_{} does not contain the residue field of Q(lambda_{s}) at {p} (degree {})",
            target.q(),
            lambda_residue_degree(s, p)
        ))
    })
}

/// An embedding of a subfield context into a larger context of the same characteristic.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub small: Arc<FqCtx>,
    pub big: Arc<FqCtx>,
    image: Vec<u32>,
    preimage: HashMap<u32, u32>,
}

impl Embedding {
    /// Sends the generator of `small` to the first root of its modulus in `big`.
    pub fn new(small: &Arc<FqCtx>, big: &Arc<FqCtx>) -> Result<Self> {
        if small.p() != big.p() || big.r() % small.r() != 0 {
            return Err(TridentError::InvalidInput(format!("F_{} is not a subfield of F_{}", small.q(), big.q())));
        }
        let p = small.p();
        let modulus: Vec<u32> = small.modulus().iter().map(|&c| big.from_int(c as i64)).collect();
        let theta = if small.r() == 1 {
            0
        } else {
            *big.roots(&modulus).first().ok_or_else(|| TridentError::Internal("subfield modulus has no root".into()))?
        };
        let powers: Vec<u32> = (0..small.r()).map(|i| big.pow(theta, i as u64)).collect();
        let image: Vec<u32> = (0..small.q())
            .map(|code| {
                let mut c = code;
                let mut acc = 0u32;
                for &pw in &powers {
                    acc = big.add(acc, big.mul(big.from_int((c % p) as i64), pw));
                    c /= p;
                }
                acc
            })
            .collect();
        let preimage = image.iter().enumerate().map(|(i, &x)| (x, i as u32)).collect();
        Ok(Embedding { small: small.clone(), big: big.clone(), image, preimage })
    }

    pub fn map(&self, x: u32) -> u32 {
        self.image[x as usize]
    }

    /// The element of `small` mapping to `x`, if any.
    pub fn pull(&self, x: u32) -> Option<u32> {
        self.preimage.get(&x).copied()
    }
}

fn descend(ambient: &Arc<FqCtx>, xs: &[u32]) -> Result<(Arc<FqCtx>, Vec<u32>)> {
    let d = ambient.degree_of_all(xs);
    if d == ambient.r() {
        return Ok((ambient.clone(), xs.to_vec()));
    }
    let small = field(ambient.p(), d)?;
    let emb = Embedding::new(&small, ambient)?;
    let out = xs
        .iter()
        .map(|&x| emb.pull(x).ok_or_else(|| TridentError::Internal("descent failed".into())))
        .collect::<Result<Vec<_>>>()?;
    Ok((small, out))
}

/// Consistent images of the `lambda` values of a triple modulo a prime above `p`.
#[derive(Clone, Debug)]
pub struct ReducedLambdas {
    pub p: u64,
    /// Index of the chosen root of the reduced `psi_L'`; always 0.
    pub root_index: usize,
    /// Field containing every image before descent.
    pub ambient: Arc<FqCtx>,
    /// Field generated by the `lambda_2s` images (residue field of `F`).
    pub big: Arc<FqCtx>,
    /// Field generated by the `lambda_s` images and the product (residue field of `E`).
    pub small: Arc<FqCtx>,
    pub lambda_2s: [u32; 3],
    pub lambda_s: [u32; 3],
    pub product: u32,
    /// The same images inside `ambient`.
    pub ambient_lambda_2s: [u32; 3],
    pub ambient_lambda_s: [u32; 3],
}

impl ReducedLambdas {
    /// `(-lambda_2a, lambda_2b, lambda_2c)` over `big`.
    pub fn trace_triple(&self) -> TraceTriple {
        let c = &self.big;
        let [x, y, z] = self.lambda_2s;
        TraceTriple { ctx: c.clone(), t: [c.neg(x), y, z] }
    }
}

/// Degree over `F_p` of an element of the field `F_p[T]/(g)`.
fn element_degree(x: &[u64], g: &[u64], p: u64) -> usize {
    let x = fp_rem(x, g, p);
    let mut y = fp_powmod(&x, p, g, p);
    let mut e = 1;
    while y != x {
        y = fp_powmod(&y, p, g, p);
        e += 1;
    }
    e
}

/// Coordinates of `target` in the span of `basis` (vectors of length `w` over `F_p`).
fn solve_in_basis(basis: &[Vec<u64>], target: &[u64], w: usize, p: u64) -> Option<Vec<u64>> {
    let n = basis.len();
    let at = |v: &[u64], i: usize| v.get(i).copied().unwrap_or(0);
    let mut rows: Vec<Vec<u64>> = (0..w)
        .map(|i| basis.iter().map(|b| at(b, i)).chain([at(target, i)]).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(pr) = (r..w).find(|&i| rows[i][col] != 0) else { continue };
        rows.swap(r, pr);
        let inv = arith::inv_mod(rows[r][col], p).expect("unit");
        rows[r].iter_mut().for_each(|x| *x = arith::mul_mod(*x, inv, p));
        for i in 0..w {
            if i != r && rows[i][col] != 0 {
                let f = rows[i][col];
                let pivot_row = rows[r].clone();
                for (x, y) in rows[i].iter_mut().zip(pivot_row) {
                    *x = (*x + p - arith::mul_mod(f, y, p)) % p;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    if rows[r..].iter().any(|row| row[n] != 0) {
        return None;
    }
    let mut sol = vec![0u64; n];
    for (i, &col) in pivots.iter().enumerate() {
        sol[col] = rows[i][n];
    }
    Some(sol)
}

/// Maps elements of the subfield of degree `f` of `F_p[T]/(g)` into the context `k` of degree `f`,
/// via a primitive element sent to the first root of its minimal polynomial.
fn map_subfield(elems: &[Vec<u64>], g: &[u64], p: u64, k: &Arc<FqCtx>) -> Result<Vec<u32>> {
    let f = k.r() as usize;
    let w = g.len() - 1;
    let monomials: Vec<Vec<u64>> = {
        let x = &elems[..3.min(elems.len())];
        let mut m: Vec<Vec<u64>> = x.to_vec();
        for i in 0..x.len() {
            for j in i + 1..x.len() {
                m.push(fp_mulmod(&x[i], &x[j], g, p));
            }
        }
        m
    };
    let tries = 3u64.min(p).pow(monomials.len() as u32);
    let theta = (1..tries)
        .map(|code| {
            let mut c = code;
            let mut acc = Vec::new();
            for m in &monomials {
                let coef = c % 3.min(p);
                c /= 3.min(p);
                acc = fp_add(&acc, &fp_mul(m, &[coef], p), p);
            }
            fp_rem(&acc, g, p)
        })
        .find(|th| element_degree(th, g, p) == f)
        .ok_or_else(|| TridentError::Internal("no primitive element among the lambda images".into()))?;
    let basis: Vec<Vec<u64>> = (0..f).map(|j| fp_powmod(&theta, j as u64, g, p)).collect();
    let top = fp_powmod(&theta, f as u64, g, p);
    let c = solve_in_basis(&basis, &top, w, p).ok_or_else(|| TridentError::Internal("minimal polynomial".into()))?;
    let mut minpoly: Vec<u32> = c.iter().map(|&x| k.neg(k.from_int(x as i64))).collect();
    minpoly.push(1);
    let root = *k
        .roots(&minpoly)
        .first()
        .ok_or_else(|| TridentError::Internal("minimal polynomial has no root in the residue field".into()))?;
    let powers: Vec<u32> = (0..f).map(|j| k.pow(root, j as u64)).collect();
    elems
        .iter()
        .map(|e| {
            let coords = solve_in_basis(&basis, e, w, p)
                .ok_or_else(|| TridentError::Internal("lambda image outside the residue field".into()))?;
            Ok(coords
                .iter()
                .zip(&powers)
                .fold(0, |acc, (&cj, &pw)| k.add(acc, k.mul(k.from_int(cj as i64), pw))))
        })
        .collect()
}

/// Reduces all `lambda` data of `t` at one prime above `p`.
///
/// The prime is fixed by the first irreducible factor `g` of the reduced minimal polynomial of
/// `lambda_L'`, `L'` the prime-to-`p` part of the lcm of the finite `2s`. Images are computed in
/// `F_p[T]/(g)` and then moved to the residue field of `F`.
pub fn reduce_triple(t: &TriangleTriple, p: u64) -> Result<ReducedLambdas> {
    if !arith::is_prime(p) {
        return Err(TridentError::InvalidInput(format!("{p} is not prime")));
    }
    let entries = t.entries();
    let big_l = entries.iter().filter_map(|s| s.finite()).fold(1, |l, s| arith::lcm(l, 2 * s));
    let (lp, _) = prime_to(big_l, p);
    let psi = lambda_minpoly_mod_p(lp, p);
    let w = lambda_residue_degree(lp, p) as usize;
    let g = fp_equal_degree_factors(&psi, w, p).swap_remove(0);
    // zeta_n reduces to zeta_{n'}^gamma with gamma the inverse of the p-part of n modulo n'
    let image = |n: u64| -> Vec<u64> {
        let (np, j) = prime_to(n, p);
        let pj = arith::pow_mod(p, j as u64, np.max(1));
        let gamma = if np == 1 { 0 } else { arith::inv_mod(pj, np).expect("coprime") };
        let k = arith::mul_mod(lp / np, gamma, lp.max(1));
        dickson_mod(k, &g, p)
    };
    let two = fp_const(2, p);
    let a2: Vec<Vec<u64>> = entries.iter().map(|s| s.finite().map_or(two.clone(), |s| image(2 * s))).collect();
    let a1: Vec<Vec<u64>> = a2.iter().map(|x| fp_sub(&fp_mulmod(x, x, &g, p), &two, p)).collect();
    let prod = fp_mulmod(&fp_mulmod(&a2[0], &a2[1], &g, p), &a2[2], &g, p);
    let f = a2.iter().fold(1, |acc, x| arith::lcm(acc, element_degree(x, &g, p) as u64)) as u32;
    let ambient = field(p, f)?;
    let mut all = a2.clone();
    all.extend(a1.iter().cloned());
    all.push(prod);
    let imgs = map_subfield(&all, &g, p, &ambient)?;
    let a2i = [imgs[0], imgs[1], imgs[2]];
    let a1i = [imgs[3], imgs[4], imgs[5]];
    let (big, l2) = descend(&ambient, &a2i)?;
    let (small, l1) = descend(&ambient, &[a1i[0], a1i[1], a1i[2], imgs[6]])?;
    Ok(ReducedLambdas {
        p,
        root_index: 0,
        ambient: ambient.clone(),
        big,
        small,
        lambda_2s: [l2[0], l2[1], l2[2]],
        lambda_s: [l1[0], l1[1], l1[2]],
        product: l1[3],
        ambient_lambda_2s: a2i,
        ambient_lambda_s: a1i,
    })
}

/// How the generators of a cover were obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    /// Witness of the reduced trace triple, classified projective.
    Macbeath,
    /// Brute-force search: subgroup closure or a class-triple search in the group table.
    Oracle,
}

/// Field data attached to a cover.
#[derive(Clone, Debug, Serialize)]
pub struct ReportFields {
    #[serde(rename = "F")]
    pub f: String,
    #[serde(rename = "E")]
    pub e: String,
    /// `D_{p'}` fixed by Frobenius at `p`; absent for triples with an infinite entry.
    #[serde(rename = "D_frob", skip_serializing_if = "Option::is_none")]
    pub d_frob: Option<String>,
    /// `D_{p'}`, with `sqrt(p*)` adjoined when `p | abc`, `pr` is odd and `G` is `PSL2`.
    #[serde(rename = "D_sqrt_pstar", skip_serializing_if = "Option::is_none")]
    pub d_sqrt_pstar: Option<String>,
}

/// Field-of-moduli data: base fields and degree bounds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModuliReport {
    /// Order of Frobenius at `p` in `F_{p'}`.
    pub r: u64,
    /// `p^r` for `PSL2`, `p^(r/2)` for `PGL2`.
    pub q_from_r: u64,
    /// Bound on `[M(X,f) : D_frob]`.
    pub d_cover: u8,
    /// Bound on `[M(X,f,G) : D_sqrt_pstar]`.
    pub d_galois: u8,
}

/// Everything computed for `(t, p)`.
#[derive(Clone, Debug, Serialize)]
pub struct CurveReport {
    pub triple: TriangleTriple,
    pub p: u64,
    /// Some entry is divisible by `p` (then it equals `p`).
    pub extended: bool,
    pub construction: Construction,
    pub group_kind: GroupKind,
    /// Display label; even `q` is written `PGL2` since the groups coincide.
    pub group: String,
    pub q: u64,
    pub group_order: u64,
    /// `(a#, b#, c#)` with infinity replaced by `p`.
    pub ramification: [u64; 3],
    pub genus: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub genus_x0: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub genus_x1: Option<u64>,
    pub fields: ReportFields,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moduli: Option<ModuliReport>,
    /// Reduced `(-lambda_2a, lambda_2b, lambda_2c)` over the residue field of `F`.
    pub trace_triple: [String; 3],
    pub trace_field_order: u64,
    pub root_index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generators: Option<[[String; 4]; 3]>,
}

/// Which quotient of the cover to measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quotient {
    /// Upper-triangular subgroup: the action on `P^1(F_q)`.
    Borel,
    /// Stabiliser of a nonzero vector up to sign.
    Unipotent,
    /// Trivial subgroup: the action of `G` on itself.
    Regular,
}

/// A constructed cover: report plus explicit generators.
#[derive(Clone, Debug)]
pub struct Curve {
    pub report: CurveReport,
    /// Field the generators live in.
    pub ctx: Arc<FqCtx>,
    /// Normalisation used for closures: `Psl2` for `SL2` generators, `Pgl2` for `GL2` ones.
    pub matrix_kind: GroupKind,
    pub generators: [Mat; 3],
}

impl Curve {
    pub fn genus_of_quotient(&self, which: Quotient) -> Result<u64> {
        genus_of_quotient(&self.ctx, self.matrix_kind, &self.generators, self.report.q, which)
    }
}

/// Options for [`curve`].
#[derive(Clone, Copy, Debug, Default)]
pub struct CurveOptions {
    pub tower: bool,
    pub generators: bool,
}

fn inadmissible(t: &TriangleTriple, p: u64, reason: InadmissibleReason) -> TridentError {
    TridentError::Inadmissible { triple: t.to_string(), p, reason: reason.to_string() }
}

/// Checks the hypotheses on `(t, p)`; returns whether `p` divides some entry.
///
/// Entries divisible by `p` are accepted when they equal `p` (the cover is then tamely
/// ramified of index `p` there, as for `infinity`).
pub fn check_prime(t: &TriangleTriple, p: u64) -> Result<bool> {
    if !arith::is_prime(p) {
        return Err(TridentError::InvalidInput(format!("{p} is not prime")));
    }
    if triangle::classify(t) != triangle::Curvature::Hyperbolic {
        return Err(TridentError::NonHyperbolic { triple: t.to_string() });
    }
    let divisible: Vec<u64> = t.entries().iter().filter_map(|s| s.finite()).filter(|s| s % p == 0).collect();
    if divisible.is_empty() {
        return match admissible_prime(t, p) {
            Admissibility::Inadmissible(r) => Err(inadmissible(t, p, r)),
            _ => Ok(false),
        };
    }
    if divisible.iter().any(|&s| s != p) {
        return Err(inadmissible(t, p, InadmissibleReason::DividesOrders));
    }
    if p == 2 && triangle::is_special_shape(t) {
        return Err(inadmissible(t, p, InadmissibleReason::SpecialShapeAt2));
    }
    Ok(true)
}

/// The kind and `q` predicted by residue degrees when `F` is unramified at `p`.
pub fn frobenius_prediction(t: &TriangleTriple, p: u64) -> Result<Option<(GroupKind, u64)>> {
    let f = f_field(t)?;
    if f.conductor() % p == 0 {
        return Ok(None);
    }
    let e = e_field(t)?;
    let (rf, re) = (f.frobenius_order(p)?, e.frobenius_order(p)?);
    let kind = if rf == re { GroupKind::Psl2 } else { GroupKind::Pgl2 };
    Ok(Some((kind, p.pow(re as u32))))
}

/// Field of order `q` as a context.
fn ctx_of(q: u64) -> Result<Arc<FqCtx>> {
    let (p, r) = arith::prime_power(q).ok_or_else(|| TridentError::InvalidInput(format!("{q} is not a prime power")))?;
    field(p, r)
}

/// Searches a generating pair `(g1, g2)` with `|g1| = o[0]`, `|g2| = o[1]`, `|(g1 g2)^-1| = o[2]`,
/// `g1` running over class representatives.
pub fn find_generating_pair(g: &MatGroup, o: [u64; 3]) -> Option<(usize, usize)> {
    for x in g.class_reps() {
        if g.element_order(x) != o[0] {
            continue;
        }
        for y in 0..g.order() {
            if g.element_order(y) != o[1] {
                continue;
            }
            let z = g.inv(g.mul(x, y));
            if g.element_order(z) == o[2] && g.generates(&[x, y]) {
                return Some((x, y));
            }
        }
    }
    None
}

struct Built {
    construction: Construction,
    kind: GroupKind,
    q: u64,
    ctx: Arc<FqCtx>,
    matrix_kind: GroupKind,
    gens: [Mat; 3],
}

fn via_macbeath(tt: &TraceTriple, sharp: [u64; 3], predicted: Option<(GroupKind, u64)>) -> Result<Option<Built>> {
    let mb = Macbeath::new(&tt.ctx);
    let cl = match mb.classify_fast(tt) {
        Ok(cl) => cl,
        Err(TridentError::TooLarge { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let Some(detail) = cl.projective_detail.filter(|_| cl.order_triple == Some(sharp)) else {
        return Ok(None);
    };
    let (kind, q) = (detail.subgroup_kind, detail.subfield_order);
    if let Some(pred) = predicted {
        if pred != (kind, q) {
            return Err(TridentError::Internal(format!(
                "residue degrees predict {}(F{}) but the reduced trace triple {tt} gives {kind}(F{q})",
                pred.0, pred.1
            )));
        }
    }
    Ok(Some(Built {
        construction: Construction::Macbeath,
        kind,
        q,
        ctx: tt.ctx.clone(),
        matrix_kind: GroupKind::Psl2,
        gens: construct_triple(tt)?,
    }))
}

fn via_oracle(tt: &TraceTriple, sharp: [u64; 3], predicted: Option<(GroupKind, u64)>) -> Result<Option<Built>> {
    let c = &tt.ctx;
    if c.q() <= enumeration_limit() {
        if let Ok(gens) = construct_triple(tt) {
            let orders = sort3(gens.map(|m| psl2_order(c, &m)));
            let id = subgroup_oracle(c, &gens[0], &gens[1])?;
            let found = match id.tag {
                SubgroupTag::Psl2 { q0 } => Some((GroupKind::Psl2, q0)),
                SubgroupTag::Pgl2 { q0 } => Some((GroupKind::Pgl2, q0)),
                SubgroupTag::Other => None,
            };
            if let Some((kind, q)) = found.filter(|f| orders == sharp && predicted.is_none_or(|p| p == *f)) {
                return Ok(Some(Built {
                    construction: Construction::Oracle,
                    kind,
                    q,
                    ctx: c.clone(),
                    matrix_kind: GroupKind::Psl2,
                    gens,
                }));
            }
        }
    }
    let p = c.p();
    let candidates: Vec<(GroupKind, u64)> = match predicted {
        Some(pr) => vec![pr],
        None => (1..)
            .map(|f| p.pow(f))
            .take_while(|&q| group_order(GroupKind::Psl2, q) <= MAX_TABLE_GROUP)
            .flat_map(|q| [(GroupKind::Psl2, q), (GroupKind::Pgl2, q)])
            .filter(|&(k, q)| group_order(k, q) <= MAX_TABLE_GROUP)
            .collect(),
    };
    for (kind, q) in candidates {
        if kind == GroupKind::Pgl2 && p == 2 {
            continue;
        }
        let ctx = ctx_of(q)?;
        let g = match MatGroup::new(&ctx, kind) {
            Ok(g) => g,
            Err(TridentError::TooLarge { .. }) => continue,
            Err(e) => return Err(e),
        };
        if let Some((x, y)) = find_generating_pair(&g, sharp) {
            let z = g.inv(g.mul(x, y));
            return Ok(Some(Built {
                construction: Construction::Oracle,
                kind,
                q,
                ctx: ctx.clone(),
                matrix_kind: kind,
                gens: [g.elems[x], g.elems[y], g.elems[z]],
            }));
        }
    }
    Ok(None)
}

/// Display label of `G`; even `q` is written `PGL2`.
pub fn group_label(kind: GroupKind, q: u64) -> String {
    let kind = if q % 2 == 0 { GroupKind::Pgl2 } else { kind };
    format!("{kind}(F{q})")
}

/// Theorem-B style moduli data. Errors on infinite entries.
pub fn moduli_report(t: &TriangleTriple, p: u64, kind: GroupKind, q: u64) -> Result<ModuliReport> {
    let Some([a, b, c]) = t.finite_entries() else {
        return Err(TridentError::InfiniteOrder { what: "field-of-moduli bounds".into() });
    };
    let r = f_pprime(t, p)?.frobenius_order(p)?;
    let q_from_r = match kind {
        GroupKind::Psl2 => p.pow(r as u32),
        GroupKind::Pgl2 if r % 2 == 0 => p.pow(r as u32 / 2),
        GroupKind::Pgl2 => 0,
    };
    let p_divides = (a * b * c) % p == 0;
    let d_cover = if a == 2 || q % 2 == 0 { 1 } else { 2 };
    let d_galois = if q % 2 == 0 || p_divides || kind == GroupKind::Pgl2 { 1 } else { 2 };
    Ok(ModuliReport { r, q_from_r, d_cover, d_galois })
}

fn report_fields(t: &TriangleTriple, p: u64, kind: GroupKind, r: Option<u64>) -> Result<ReportFields> {
    let (d_frob, d_sqrt_pstar) = match (t.finite_entries(), r) {
        (Some([a, b, c]), Some(r)) => {
            let d = d_pprime(t, p)?;
            let frob = d.fixed_field_of_frobenius(p)?;
            let odd = p % 2 == 1 && r % 2 == 1;
            let sq = if (a * b * c) % p == 0 && odd && kind == GroupKind::Psl2 {
                adjoin_sqrt_pstar(&d, p)?
            } else {
                d
            };
            (Some(frob.pretty()), Some(sq.pretty()))
        }
        _ => (None, None),
    };
    Ok(ReportFields { f: f_field(t)?.pretty(), e: e_field(t)?.pretty(), d_frob, d_sqrt_pstar })
}

/// Builds the cover `X(t; P)` for the first prime `P` above `p`.
///
/// The kind and `q` come from the Macbeath classification of the reduced trace triple,
/// cross-checked against residue degrees of `F` and `E` when `F` is unramified at `p`. When the
/// classification is inconclusive, brute force decides for [`ORACLE_TRIPLES`] and for triples
/// with an entry equal to `p` or with spherical `(a#, b#, c#)`.
pub fn curve(t: &TriangleTriple, p: u64, opts: CurveOptions) -> Result<Curve> {
    let extended = check_prime(t, p)?;
    let sharp = sort3(t.entries().map(|s| s.finite().unwrap_or(p)));
    let predicted = frobenius_prediction(t, p)?;
    let red = reduce_triple(t, p)?;
    let tt = red.trace_triple();
    let mut built = via_macbeath(&tt, sharp, predicted)?;
    if built.is_none() {
        let finite_sorted = t.finite_entries().map(sort3);
        let allowed = extended
            || is_exceptional_orders(sharp)
            || finite_sorted.is_some_and(|o| ORACLE_TRIPLES.contains(&o));
        if !allowed {
            return Err(TridentError::Internal(format!(
                "reduced trace triple {tt} of {t} at p = {p} is not projective with orders {sharp:?}"
            )));
        }
        built = via_oracle(&tt, sharp, predicted)?;
    }
    let b = built.ok_or_else(|| TridentError::Internal(format!("no generating triple found for {t} at p = {p}")))?;
    let order = group_order(b.kind, b.q);
    let genus = triangle::genus(&TriangleTriple::finite(sharp[0], sharp[1], sharp[2])?, order)?;
    let moduli = match t.finite_entries() {
        Some(_) => Some(moduli_report(t, p, b.kind, b.q)?),
        None => None,
    };
    let fields = report_fields(t, p, b.kind, moduli.as_ref().map(|m| m.r))?;
    let mut curve = Curve {
        report: CurveReport {
            triple: *t,
            p,
            extended,
            construction: b.construction,
            group_kind: b.kind,
            group: group_label(b.kind, b.q),
            q: b.q,
            group_order: order,
            ramification: sharp,
            genus,
            genus_x0: None,
            genus_x1: None,
            fields,
            moduli,
            trace_triple: tt.formatted(),
            trace_field_order: tt.ctx.q(),
            root_index: red.root_index,
            generators: None,
        },
        ctx: b.ctx,
        matrix_kind: b.matrix_kind,
        generators: b.gens,
    };
    if opts.tower {
        curve.report.genus_x0 = Some(curve.genus_of_quotient(Quotient::Borel)?);
        curve.report.genus_x1 = match curve.genus_of_quotient(Quotient::Unipotent) {
            Ok(g) => Some(g),
            Err(TridentError::Hypothesis(_)) => None,
            Err(e) => return Err(e),
        };
    }
    if opts.generators {
        curve.report.generators = Some(curve.generators.map(|m| format_mat(&curve.ctx, &m)));
    }
    Ok(curve)
}

/// Group, `q`, ramification and genus of `X(t; P)`.
pub fn theorem_a(t: &TriangleTriple, p: u64) -> Result<CurveReport> {
    Ok(curve(t, p, CurveOptions::default())?.report)
}

/// [`theorem_a`] with the field-of-moduli data, which requires finite entries; checks that
/// the residue degree of `F_{p'}` gives the same `q`.
pub fn theorem_b_report(t: &TriangleTriple, p: u64) -> Result<CurveReport> {
    if t.has_infinity() {
        return Err(TridentError::InfiniteOrder { what: "field-of-moduli report".into() });
    }
    let rep = theorem_a(t, p)?;
    let m = rep.moduli.as_ref().expect("finite triple");
    if m.q_from_r != rep.q {
        return Err(TridentError::Internal(format!(
            "Frobenius order r = {} in F_p' gives q = {} but the cover has q = {}",
            m.r, m.q_from_r, rep.q
        )));
    }
    Ok(rep)
}

/// Generators `(g1, g2, g3)` with `g1 g2 g3 = 1` and the field they live in.
pub fn explicit_generators(t: &TriangleTriple, p: u64) -> Result<(Arc<FqCtx>, [Mat; 3])> {
    let c = curve(t, p, CurveOptions::default())?;
    Ok((c.ctx, c.generators))
}

/// Genus of a transitive permutation cover of `P^1` branched over three points:
/// `2g - 2 = -2n + sum (n - #cycles)`.
pub fn permutation_genus(n: usize, perms: &[Vec<u32>]) -> Result<u64> {
    let mut total: i64 = -2 * n as i64;
    for perm in perms {
        let mut seen = vec![false; n];
        let mut cycles = 0i64;
        for s in 0..n {
            if !seen[s] {
                cycles += 1;
                let mut x = s;
                while !seen[x] {
                    seen[x] = true;
                    x = perm[x] as usize;
                }
            }
        }
        total += n as i64 - cycles;
    }
    if total % 2 != 0 || total < -2 {
        return Err(TridentError::Internal(format!("Riemann-Hurwitz sum {total} is not admissible")));
    }
    Ok(((total + 2) / 2) as u64)
}

/// Index of a point of `P^1(F_q)`: `x` for `(x : 1)`, `q` for `(1 : 0)`.
pub fn p1_act(c: &FqCtx, m: &Mat, pt: u32) -> u32 {
    let q = c.q() as u32;
    let (u, v) = if pt == q {
        (m[0], m[2])
    } else {
        (c.add(c.mul(m[0], pt), m[1]), c.add(c.mul(m[2], pt), m[3]))
    };
    if v == 0 {
        q
    } else {
        c.div(u, v).expect("nonzero")
    }
}

/// Permutations of the three generators on an orbit, given an action on integer labels.
fn orbit_perms(gens: &[Mat; 3], start: u32, act: impl Fn(&Mat, u32) -> u32) -> (usize, Vec<Vec<u32>>) {
    let mut index: HashMap<u32, u32> = HashMap::from([(start, 0)]);
    let mut pts = vec![start];
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = act(g, x);
            if !index.contains_key(&y) {
                index.insert(y, pts.len() as u32);
                pts.push(y);
                queue.push_back(y);
            }
        }
    }
    let perms = gens.iter().map(|g| pts.iter().map(|&x| index[&act(g, x)]).collect()).collect();
    (pts.len(), perms)
}

/// Genus of `X_0`, `X_1` or `X` itself from explicit generators.
///
/// `q` is the order of the field of `G`; the Borel quotient is the orbit of size `q + 1` on
/// `P^1` of the generators' field. The unipotent quotient needs `SL2` generators.
pub fn genus_of_quotient(ctx: &Arc<FqCtx>, matrix_kind: GroupKind, gens: &[Mat; 3], q: u64, which: Quotient) -> Result<u64> {
    let big_q = ctx.q() as u32;
    let borel_orbit = || -> Result<(u32, usize, Vec<Vec<u32>>)> {
        let mut visited = vec![false; big_q as usize + 1];
        for start in (0..=big_q).rev() {
            if visited[start as usize] {
                continue;
            }
            let (n, perms) = orbit_perms(gens, start, |m, x| p1_act(ctx, m, x));
            // mark the orbit
            let mut stack = vec![start];
            visited[start as usize] = true;
            while let Some(x) = stack.pop() {
                for g in gens {
                    let y = p1_act(ctx, g, x);
                    if !visited[y as usize] {
                        visited[y as usize] = true;
                        stack.push(y);
                    }
                }
            }
            if n as u64 == q + 1 {
                return Ok((start, n, perms));
            }
        }
        Err(TridentError::Hypothesis(format!("no orbit of size {} on P^1(F_{})", q + 1, ctx.q())))
    };
    match which {
        Quotient::Borel => {
            let (_, n, perms) = borel_orbit()?;
            permutation_genus(n, &perms)
        }
        Quotient::Unipotent => {
            if matrix_kind != GroupKind::Psl2 {
                return Err(TridentError::Hypothesis("unipotent quotient needs SL2 generators".into()));
            }
            let (pt, _, _) = borel_orbit()?;
            let v: (u32, u32) = if pt == big_q { (1, 0) } else { (pt, 1) };
            let enc = |u: u32, w: u32| -> u32 {
                let (nu, nw) = (ctx.neg(u), ctx.neg(w));
                let (u, w) = if (nu, nw) < (u, w) { (nu, nw) } else { (u, w) };
                u * big_q + w
            };
            let act = |m: &Mat, code: u32| -> u32 {
                let (u, w) = (code / big_q, code % big_q);
                enc(ctx.add(ctx.mul(m[0], u), ctx.mul(m[1], w)), ctx.add(ctx.mul(m[2], u), ctx.mul(m[3], w)))
            };
            let (n, perms) = orbit_perms(gens, enc(v.0, v.1), act);
            permutation_genus(n, &perms)
        }
        Quotient::Regular => {
            let order = group_order(GroupKind::Psl2, ctx.q());
            if order > MAX_REGULAR_ACTION && group_order(GroupKind::Pgl2, q) > MAX_REGULAR_ACTION {
                return Err(TridentError::TooLarge { what: "regular action".into(), q: ctx.q(), limit: MAX_REGULAR_ACTION });
            }
            let elems = closure(ctx, matrix_kind, gens);
            let canon = |m: &Mat| match matrix_kind {
                GroupKind::Psl2 => ctx.canon_psl(m),
                GroupKind::Pgl2 => ctx.canon_pgl(m),
            };
            let index: HashMap<Mat, u32> = elems.iter().enumerate().map(|(i, m)| (*m, i as u32)).collect();
            let perms: Vec<Vec<u32>> = gens
                .iter()
                .map(|g| elems.iter().map(|x| index[&canon(&ctx.mat_mul(g, x))]).collect())
                .collect();
            permutation_genus(elems.len(), &perms)
        }
    }
}

/// `|PSL2(Z/p^e)|` (`split`) or `|PGL2(Z/p^e)|`: `p^(3(e-1))` times the order at level `p`.
pub fn p_group_order(p: u64, split: bool, e: u32) -> Result<u64> {
    if e == 0 || !arith::is_prime(p) {
        return Err(TridentError::InvalidInput(format!("level {p}^{e} is not a prime power")));
    }
    let kind = if split { GroupKind::Psl2 } else { GroupKind::Pgl2 };
    p.checked_pow(3 * (e - 1))
        .and_then(|k| k.checked_mul(group_order(kind, p)))
        .ok_or_else(|| TridentError::InvalidInput(format!("order at level {p}^{e} overflows")))
}

/// One prime-power factor of a level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LevelFactor {
    pub p: u64,
    pub split: bool,
    pub e: u32,
}

/// Product of [`p_group_order`] over the factors of the level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelOrder {
    pub order: u64,
    /// True when some factor has `p` in `{2, 3}`, where surjectivity onto the level group
    /// is not guaranteed by the lifting lemma.
    pub surjectivity_unverified: bool,
}

pub fn level_order(factors: &[LevelFactor]) -> Result<LevelOrder> {
    let mut order = 1u64;
    for f in factors {
        order = order
            .checked_mul(p_group_order(f.p, f.split, f.e)?)
            .ok_or_else(|| TridentError::InvalidInput("level order overflows".into()))?;
    }
    Ok(LevelOrder { order, surjectivity_unverified: factors.iter().any(|f| f.p <= 3) })
}

fn fp_const(k: i64, p: u64) -> Vec<u64> {
    fp_trim(vec![arith::residue(k, p)])
}

/// `D_k(T) mod m` over `F_p` by the Lucas ladder.
fn dickson_mod(k: u64, m: &[u64], p: u64) -> Vec<u64> {
    let t = fp_rem(&[0, 1], m, p);
    let two = fp_const(2, p);
    let mtwo = fp_const(-2, p);
    let neg_t: Vec<u64> = t.iter().map(|&c| (p - c) % p).collect();
    let (mut a, mut b) = (fp_rem(&two, m, p), t.clone());
    for bit in (0..64 - k.leading_zeros()).rev() {
        let ab = fp_add(&fp_mulmod(&a, &b, m, p), &neg_t, p);
        if k >> bit & 1 == 0 {
            a = fp_add(&fp_mulmod(&a, &a, m, p), &mtwo, p);
            b = ab;
        } else {
            b = fp_add(&fp_mulmod(&b, &b, m, p), &mtwo, p);
            a = ab;
        }
    }
    fp_rem(&a, m, p)
}

/// True when `beta(t)` is a unit at every prime above `p`, for `p` not dividing `2abc`.
///
/// Writes `beta` as a polynomial in `lambda_L` and tests coprimality with the reduced minimal
/// polynomial of `lambda_L` over `F_p`.
pub fn beta_unit_at_all_primes(t: &TriangleTriple, p: u64) -> Result<bool> {
    let Some(entries) = t.finite_entries() else {
        return Err(TridentError::InfiniteOrder { what: "beta reduction".into() });
    };
    if !arith::is_prime(p) || entries.iter().any(|s| (2 * s) % p == 0) {
        return Err(TridentError::InvalidInput(format!("{p} must be a prime not dividing 2abc")));
    }
    let l = entries.iter().fold(1, |acc, &s| arith::lcm(acc, 2 * s));
    let psi = lambda_minpoly_mod_p(l, p);
    if psi.len() - 1 > BETA_MAX_DEGREE {
        return Err(TridentError::TooLarge { what: "beta gcd test".into(), q: l, limit: BETA_MAX_DEGREE as u64 });
    }
    let x: Vec<Vec<u64>> = entries.iter().map(|&s| dickson_mod(l / (2 * s), &psi, p)).collect();
    let sq = |v: &[u64]| fp_mulmod(v, v, &psi, p);
    let mut beta = fp_add(&fp_add(&sq(&x[0]), &sq(&x[1]), p), &sq(&x[2]), p);
    beta = fp_add(&beta, &fp_mulmod(&fp_mulmod(&x[0], &x[1], &psi, p), &x[2], &psi, p), p);
    beta = fp_add(&beta, &fp_const(-4, p), p);
    let g = fp_gcd(&beta, &psi, p);
    Ok(g.len() == 1)
}

/// `beta(t)` reduced at the first prime above `p`: the singular form of the reduced trace triple.
pub fn reduced_beta(t: &TriangleTriple, p: u64) -> Result<(Arc<FqCtx>, u32)> {
    let red = reduce_triple(t, p)?;
    let tt = red.trace_triple();
    Ok((tt.ctx.clone(), crate::macbeath::dform(&tt)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclotomic::lambda_of;

    fn tt(a: u64, b: u64, c: u64) -> TriangleTriple {
        TriangleTriple::finite(a, b, c).unwrap()
    }

    #[test]
    fn lambda_minpoly_matches_rational_minimal_polynomial() {
        for n in 3..=40u64 {
            let rat = lambda_of(n).minimal_polynomial();
            for p in [2u64, 3, 5, 7, 11, 13] {
                let expected = rat.reduce_mod(p).expect("integral");
                assert_eq!(lambda_minpoly_mod_p(n, p), expected, "n = {n}, p = {p}");
            }
        }
        assert_eq!(lambda_minpoly_mod_p(7, 13), vec![12, 11, 1, 1]);
    }

    #[test]
    fn reduce_examples() {
        let f13 = FqCtx::new(13, 1).unwrap();
        let y = reduce_lambda_mod_p(Order::Finite(7), 13, &f13).unwrap();
        let cubic = |x: u64| (x * x * x + x * x + 11 * x + 12) % 13;
        assert_eq!(cubic(y as u64), 0);
        assert_eq!((0..13).filter(|&x| cubic(x) == 0).count(), 3);
        for p in [3u64, 5, 7, 11] {
            let f = FqCtx::new(p, 1).unwrap();
            assert_eq!(reduce_lambda_mod_p(Order::Finite(4), p, &f).unwrap(), 0);
            assert_eq!(reduce_lambda_mod_p(Order::Infinite, p, &f).unwrap(), 2);
        }
        let f7 = FqCtx::new(7, 1).unwrap();
        assert!(matches!(
            reduce_lambda_mod_p(Order::Finite(14), 7, &f7),
            Err(TridentError::RamifiedPrime { .. })
        ));
        // 2 is inert in Q(lambda_7)
        let f2 = FqCtx::new(2, 1).unwrap();
        assert!(reduce_lambda_mod_p(Order::Finite(7), 2, &f2).is_err());
    }

    #[test]
    fn dickson_matches_recurrence() {
        let c = FqCtx::new(3, 3).unwrap();
        for y in c.elements() {
            let (mut prev, mut cur) = (c.from_int(2), y);
            for k in 1..40u64 {
                assert_eq!(dickson_eval(&c, k, y), cur);
                let next = c.sub(c.mul(y, cur), prev);
                prev = cur;
                cur = next;
            }
            assert_eq!(dickson_eval(&c, 0, y), 2);
        }
    }

    #[test]
    fn reductions_are_consistent() {
        for (a, b, c) in [(2, 3, 7), (2, 4, 6), (3, 5, 6), (2, 5, 5), (4, 5, 6), (3, 3, 7), (5, 5, 5), (2, 3, 11)] {
            let t = tt(a, b, c);
            for p in [2u64, 3, 5, 7, 11, 13, 17, 19] {
                let Ok(red) = reduce_triple(&t, p) else { continue };
                let w = &red.ambient;
                for i in 0..3 {
                    let x = red.ambient_lambda_2s[i];
                    assert_eq!(w.mul(x, x), w.add(red.ambient_lambda_s[i], w.from_int(2)), "{t} at {p}");
                }
                // each image is a root of the reduced minimal polynomial
                for (i, s) in t.finite_entries().unwrap().iter().enumerate() {
                    if s % p != 0 {
                        let f: Vec<u32> =
                            lambda_minpoly_mod_p(2 * s, p).iter().map(|&k| w.from_int(k as i64)).collect();
                        assert_eq!(w.eval(&f, red.ambient_lambda_2s[i]), 0);
                    }
                }
            }
        }
    }

    #[test]
    fn residue_fields_match_frobenius_orders() {
        for (a, b, c) in [(2, 3, 7), (2, 4, 6), (3, 5, 6), (4, 5, 6), (3, 3, 4), (2, 3, 8), (3, 4, 4)] {
            let t = tt(a, b, c);
            for p in [5u64, 7, 11, 13, 17, 19, 23] {
                if t.finite_entries().unwrap().iter().any(|s| (2 * s) % p == 0) {
                    continue;
                }
                let red = match reduce_triple(&t, p) {
                    Ok(r) => r,
                    Err(TridentError::TooLarge { .. }) => continue,
                    Err(e) => panic!("{t} at {p}: {e}"),
                };
                let f = f_field(&t).unwrap().frobenius_order(p).unwrap();
                let e = e_field(&t).unwrap().frobenius_order(p).unwrap();
                assert_eq!(red.big.r() as u64, f, "{t} at {p}");
                assert_eq!(red.small.r() as u64, e, "{t} at {p}");
            }
        }
    }

    #[test]
    fn theorem_a_examples() {
        let r = theorem_a(&tt(2, 3, 7), 13).unwrap();
        assert_eq!((r.group.as_str(), r.genus), ("PSL2(F13)", 14));
        let r = theorem_a(&tt(2, 4, 6), 5).unwrap();
        assert_eq!((r.group.as_str(), r.genus), ("PGL2(F5)", 6));
        let r = theorem_a(&tt(3, 5, 6), 11).unwrap();
        assert_eq!((r.group_kind, r.q), (GroupKind::Psl2, 11));
        let r = theorem_a(&tt(2, 5, 5), 2).unwrap();
        assert_eq!((r.group_order, r.q, r.genus), (60, 4, 4));
        let r = theorem_a(&tt(2, 3, 7), 7).unwrap();
        assert_eq!((r.group.as_str(), r.genus, r.ramification), ("PSL2(F7)", 3, [2, 3, 7]));
        let inf = TriangleTriple::new(2u64, 3u64, Order::Infinite).unwrap();
        let r = theorem_a(&inf, 5).unwrap();
        assert_eq!((r.group.as_str(), r.ramification), ("PSL2(F5)", [2, 3, 5]));
        assert_eq!(r.trace_triple[2], "2");
    }

    #[test]
    fn theorem_a_errors() {
        let e = theorem_a(&tt(2, 3, 14), 7).unwrap_err();
        assert_eq!(e.context()["reason"], "divides_orders");
        assert!(matches!(theorem_a(&tt(2, 3, 6), 5), Err(TridentError::NonHyperbolic { .. })));
        assert!(matches!(theorem_a(&tt(2, 3, 7), 4), Err(TridentError::InvalidInput(_))));
        // (2,3,6)-shape scaled: (2,4,4)... special shapes at 2 are rejected
        let e = theorem_a(&tt(3, 4, 12), 2).unwrap_err();
        assert_eq!(e.code(), "inadmissible");
    }

    #[test]
    fn theorem_b_examples() {
        let r = theorem_b_report(&tt(2, 3, 7), 13).unwrap();
        let m = r.moduli.as_ref().unwrap();
        assert_eq!((m.r, m.q_from_r, m.d_cover), (1, 13, 1));
        assert_eq!(r.fields.d_frob.as_deref(), Some("Q(lambda_7)"));
        let r = theorem_b_report(&tt(3, 5, 6), 11).unwrap();
        let m = r.moduli.as_ref().unwrap();
        assert_eq!((m.d_cover, m.d_galois), (2, 2));
        assert_eq!(r.fields.d_frob.as_deref(), Some("Q(sqrt(5))"));
        // p a primitive root mod 2c gives q = p^(phi(2c)/2)
        for (c, p) in [(7u64, 5u64), (9, 5), (9, 11), (11, 7), (11, 13), (13, 7)] {
            assert_eq!(arith::multiplicative_order(p, 2 * c), Some(arith::euler_phi(2 * c)));
            let r = theorem_b_report(&tt(2, 3, c), p).unwrap();
            assert_eq!(r.q, p.pow(arith::euler_phi(2 * c) as u32 / 2), "(2,3,{c}) at {p}");
            assert_eq!(r.fields.d_frob.as_deref(), Some("Q"));
        }
        let inf = TriangleTriple::new(2u64, 3u64, Order::Infinite).unwrap();
        assert!(matches!(theorem_b_report(&inf, 5), Err(TridentError::InfiniteOrder { .. })));
    }

    #[test]
    fn explicit_generators_generate() {
        for ((a, b, c), p, order) in [((2, 3, 7), 13, 1092u64), ((2, 5, 5), 2, 60), ((2, 4, 6), 5, 120), ((3, 5, 6), 11, 660)] {
            let cv = curve(&tt(a, b, c), p, CurveOptions::default()).unwrap();
            let g = &cv.generators;
            let prod = cv.ctx.mat_mul(&cv.ctx.mat_mul(&g[0], &g[1]), &g[2]);
            assert!(cv.ctx.is_scalar(&prod));
            assert_eq!(closure(&cv.ctx, cv.matrix_kind, g).len() as u64, order, "({a},{b},{c}) at {p}");
        }
    }

    #[test]
    fn tower_examples() {
        let g0 = |a, b, c, p| {
            curve(&tt(a, b, c), p, CurveOptions { tower: true, generators: false }).unwrap().report.genus_x0.unwrap()
        };
        assert_eq!(g0(2, 3, 7, 7), 0);
        assert_eq!(g0(2, 4, 7, 7), 1);
        assert_eq!(g0(5, 5, 5, 2), 2);
        assert_eq!(g0(2, 3, 7, 13), 0);
    }

    #[test]
    fn regular_action_recovers_genus() {
        for ((a, b, c), p) in [((2, 3, 7), 7), ((2, 4, 6), 5), ((2, 5, 5), 2), ((2, 3, 7), 13), ((3, 4, 4), 3)] {
            let cv = curve(&tt(a, b, c), p, CurveOptions::default()).unwrap();
            assert_eq!(cv.genus_of_quotient(Quotient::Regular).unwrap(), cv.report.genus, "({a},{b},{c}) at {p}");
        }
    }

    #[test]
    fn unipotent_quotient_is_between() {
        let cv = curve(&tt(2, 3, 7), 13, CurveOptions { tower: true, generators: false }).unwrap();
        let (g0, g1) = (cv.report.genus_x0.unwrap(), cv.report.genus_x1.unwrap());
        assert!(g0 <= g1 && g1 <= cv.report.genus);
    }

    #[test]
    fn group_kind_is_reorder_invariant() {
        let perms = [(2, 3, 7), (7, 2, 3), (3, 7, 2)];
        let kinds: Vec<_> = perms
            .iter()
            .map(|&(a, b, c)| {
                let t = TriangleTriple::new(a as u64, b as u64, c as u64).unwrap();
                theorem_a(&t, 13).unwrap().group_kind
            })
            .collect();
        assert!(kinds.iter().all(|k| *k == kinds[0]));
    }

    fn brute_psl2_mod_25() -> u64 {
        let n = 25u64;
        let mut count = 0u64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        if (a * d + n * n - b * c % n) % n == 1 {
                            count += 1;
                        }
                    }
                }
            }
        }
        count / 2
    }

    #[test]
    fn level_orders() {
        assert_eq!(p_group_order(7, true, 1).unwrap(), 168);
        assert_eq!(p_group_order(5, false, 1).unwrap(), 120);
        assert_eq!(p_group_order(5, true, 2).unwrap(), 7500);
        assert_eq!(brute_psl2_mod_25(), 7500);
        assert_eq!(p_group_order(5, true, 2).unwrap() / p_group_order(5, true, 1).unwrap(), 125);
        let lv = level_order(&[LevelFactor { p: 5, split: true, e: 1 }, LevelFactor { p: 3, split: false, e: 1 }]).unwrap();
        assert_eq!(lv.order, 60 * 24);
        assert!(lv.surjectivity_unverified);
    }

    #[test]
    fn beta_is_a_unit_away_from_2abc() {
        for (a, b, c) in [(2, 3, 7), (2, 4, 5), (3, 3, 4), (4, 5, 6), (2, 5, 5)] {
            let t = tt(a, b, c);
            for p in [3u64, 7, 11, 13, 17, 19, 23, 29, 31] {
                if [a, b, c].iter().any(|s| (2 * s) % p == 0) {
                    continue;
                }
                assert!(beta_unit_at_all_primes(&t, p).unwrap(), "{t} at {p}");
                match reduced_beta(&t, p) {
                    Ok((ctx, b)) => assert_ne!(b, 0, "{t} at {p} over F_{}", ctx.q()),
                    Err(TridentError::TooLarge { .. }) => {}
                    Err(e) => panic!("{t} at {p}: {e}"),
                }
            }
        }
    }

    #[test]
    fn p1_action_is_a_permutation() {
        let c = FqCtx::new(3, 2).unwrap();
        let m = [1, 2, 3, 5];
        let mut img: Vec<u32> = (0..=9).map(|x| p1_act(&c, &m, x)).collect();
        img.sort_unstable();
        assert_eq!(img, (0..=9).collect::<Vec<_>>());
    }
}
