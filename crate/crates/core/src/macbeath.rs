//! Trace triples over `F_q` and the classification of subgroups of `PSL2(F_q)`
//! generated by two elements.
//!
//! A trace triple `t` stands for the set `T(t)` of triples `(g1, g2, g3)` in `SL2(F_q)`
//! with `g1 g2 g3 = 1` and `tr g_i = t_i`. The module decides whether `t` is commutative,
//! exceptional or projective, constructs witnesses, and carries brute-force oracles for
//! the generated subgroups and for Nielsen-type orbit counts.

use crate::error::{Result, TridentError};
use crate::projective_linear::{
    conj_class, enumeration_limit, group_order, ConjClassId, FqCtx, GroupKind, Mat, ProjElem,
};
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock};

/// An ordered triple `(t1, t2, t3)` of field elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceTriple {
    pub ctx: Arc<FqCtx>,
    pub t: [u32; 3],
}

impl TraceTriple {
    pub fn new(ctx: &Arc<FqCtx>, t: [u32; 3]) -> Result<Self> {
        if t.iter().any(|&x| x as u64 >= ctx.q()) {
            return Err(TridentError::InvalidInput(format!("{t:?} is not a triple over F_{}", ctx.q())));
        }
        Ok(TraceTriple { ctx: ctx.clone(), t })
    }

    /// Parses `"0,1,2"` (integers are read modulo `p`, other entries as polynomials in `w`).
    pub fn parse(ctx: &Arc<FqCtx>, s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 3 {
            return Err(TridentError::InvalidInput(format!("expected three comma-separated entries, got {s:?}")));
        }
        let mut t = [0u32; 3];
        for (slot, part) in t.iter_mut().zip(parts) {
            *slot = ctx.parse(part)?;
        }
        Self::new(ctx, t)
    }

    /// Degree of `F_p(t)` over `F_p`.
    pub fn degree(&self) -> u32 {
        self.ctx.degree_of_all(&self.t)
    }

    pub fn up_to_signs(&self) -> TraceTripleUpToSigns {
        let c = &self.ctx;
        TraceTripleUpToSigns { ctx: c.clone(), t: self.t.map(|x| x.min(c.neg(x))) }
    }

    pub fn formatted(&self) -> [String; 3] {
        self.t.map(|x| self.ctx.format(x))
    }
}

impl fmt::Display for TraceTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.formatted();
        write!(f, "({a},{b},{c})")
    }
}

/// A trace triple modulo independent sign changes of its entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceTripleUpToSigns {
    pub ctx: Arc<FqCtx>,
    /// Per-coordinate canonical representative: the smaller code of `+-t_i`.
    pub t: [u32; 3],
}

impl TraceTripleUpToSigns {
    /// The distinct sign lifts, in a fixed order.
    pub fn lifts(&self) -> Vec<TraceTriple> {
        let c = &self.ctx;
        let mut out: Vec<TraceTriple> = Vec::new();
        for mask in 0..8u32 {
            let mut t = self.t;
            for (i, x) in t.iter_mut().enumerate() {
                if mask >> i & 1 == 1 {
                    *x = c.neg(*x);
                }
            }
            let lift = TraceTriple { ctx: c.clone(), t };
            if !out.contains(&lift) {
                out.push(lift);
            }
        }
        out
    }
}

/// The singular form `t1^2 + t2^2 + t3^2 - t1 t2 t3 - 4`.
pub fn dform(t: &TraceTriple) -> u32 {
    let c = &t.ctx;
    let [a, b, d] = t.t;
    let sq = c.add(c.add(c.mul(a, a), c.mul(b, b)), c.mul(d, d));
    c.sub(c.sub(sq, c.mul(c.mul(a, b), d)), c.from_int(4))
}

/// Spherical order triples realised inside `PSL2(F_q)` besides the dihedral family `(2,2,c)`.
pub const EXCEPTIONAL_TRIPLES: [[u64; 3]; 9] = [
    [2, 3, 3],
    [3, 3, 3],
    [3, 4, 4],
    [2, 3, 4],
    [2, 5, 5],
    [5, 5, 5],
    [3, 3, 5],
    [3, 5, 5],
    [2, 3, 5],
];

pub fn sort3(mut o: [u64; 3]) -> [u64; 3] {
    o.sort_unstable();
    o
}

/// True for the dihedral family `(2,2,c)`, `c >= 2`, and the nine listed triples (order ignored).
pub fn is_exceptional_orders(o: [u64; 3]) -> bool {
    let s = sort3(o);
    (s[0] == 2 && s[1] == 2) || EXCEPTIONAL_TRIPLES.contains(&s)
}

/// The subgroup predicted for a projective trace triple.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProjectiveDetail {
    pub regular: bool,
    pub subgroup_kind: GroupKind,
    /// Order of the field over which the subgroup is defined.
    pub subfield_order: u64,
    /// For irregular triples, the position playing the role of `t1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rational_position: Option<usize>,
}

impl ProjectiveDetail {
    pub fn group_order(&self) -> u64 {
        group_order(self.subgroup_kind, self.subfield_order)
    }
}

/// Result of [`Macbeath::classify`].
#[derive(Clone, Debug, Serialize)]
pub struct Classification {
    pub q: u64,
    pub t: [String; 3],
    pub dform: String,
    /// `d(t) = 0`.
    pub commutative: bool,
    pub exceptional: bool,
    pub projective: bool,
    /// Sorted order triple; `None` when it depends on the witness.
    pub order_triple: Option<[u64; 3]>,
    /// All sorted order triples of witnesses considered for the order triple.
    pub order_candidates: Vec<[u64; 3]>,
    /// Sorted order triples over all witnesses.
    pub realized_orders: Vec<[u64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projective_detail: Option<ProjectiveDetail>,
    /// Whether some witness generates an abelian subgroup of `PSL2`; `None` past the enumeration limit.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_commutative: Option<bool>,
}

impl Classification {
    /// True when the dform criterion and the brute-force witness search disagree.
    pub fn dform_disagrees(&self) -> bool {
        self.oracle_commutative.is_some_and(|o| o != self.commutative)
    }

    pub fn flags(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.commutative {
            v.push("commutative");
        }
        if self.exceptional {
            v.push("exceptional");
        }
        if self.projective {
            v.push("projective");
        }
        v
    }
}

/// Sign-class classification: all lifts projective, or at least one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SignClassification {
    pub projective: bool,
    pub partly_projective: bool,
}

/// Result of the regular/irregular test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Irregularity {
    pub irregular: bool,
    /// Order of the index-2 subfield `k` of `F_p(t)` when irregular.
    pub subfield_order: Option<u64>,
    pub rational_position: Option<usize>,
}

/// True iff `F_p(t)` has an index-2 subfield `k` such that, for some position `i`, `t_i` lies in `k`
/// and every other entry is zero or a square root of a nonsquare of `k`.
pub fn is_irregular(t: &TraceTriple) -> Irregularity {
    let c = &t.ctx;
    let e = t.degree();
    let none = Irregularity { irregular: false, subfield_order: None, rational_position: None };
    if e % 2 == 1 {
        return none;
    }
    let d = e / 2;
    let in_k = |x: u32| c.in_subfield(x, d);
    for i in 0..3 {
        if !in_k(t.t[i]) {
            continue;
        }
        let ok = (0..3)
            .filter(|&j| j != i)
            .all(|j| t.t[j] == 0 || (!in_k(t.t[j]) && in_k(c.mul(t.t[j], t.t[j]))));
        if ok {
            return Irregularity {
                irregular: true,
                subfield_order: Some(c.p().pow(d)),
                rational_position: Some(i),
            };
        }
    }
    none
}

/// Finds `(g1, g2, g3)` in `SL2(F_q)` with `g1 g2 g3 = 1` and traces `t`.
///
/// `g1` is the companion matrix `[[t1, -1], [1, 0]]`; `g2 = [[a, b], [c, t2 - a]]` is found by
/// scanning `a` over `F_p(t)` and then the rest of `F_q` in code order, taking the smallest
/// root `b`. When `t1 = +-2` the scalar `g1 = +-I` is tried as a fallback.
pub fn construct_triple(t: &TraceTriple) -> Result<[Mat; 3]> {
    let c = &t.ctx;
    let [t1, t2, t3] = t.t;
    let e = t.degree();
    let order: Vec<u32> = c
        .elements()
        .filter(|&a| c.in_subfield(a, e))
        .chain(c.elements().filter(|&a| !c.in_subfield(a, e)))
        .collect();
    let g1 = [t1, c.neg(1), 1, 0];
    for &a in &order {
        // det(g2) = 1 and tr(g1 g2) = t3 reduce to b^2 + (t1 a - t3) b + (a^2 - a t2 + 1) = 0
        let lin = c.sub(c.mul(t1, a), t3);
        let cst = c.add(c.sub(c.mul(a, a), c.mul(a, t2)), 1);
        if let Some(&b) = c.roots(&[cst, lin, 1]).first() {
            let g2 = [a, b, c.add(lin, b), c.sub(t2, a)];
            return Ok(finish(c, g1, g2));
        }
    }
    let two = c.from_int(2);
    if t1 == two || t1 == c.neg(two) {
        let s = if t1 == two { 1 } else { c.neg(1) };
        if c.mul(s, t2) == t3 {
            return Ok(finish(c, [s, 0, 0, s], [t2, c.neg(1), 1, 0]));
        }
    }
    Err(TridentError::Internal(format!("no witness found for trace triple {t}")))
}

fn finish(c: &FqCtx, g1: Mat, g2: Mat) -> [Mat; 3] {
    let g3 = c.mat_inv(&c.mat_mul(&g1, &g2)).expect("invertible");
    [g1, g2, g3]
}

/// Order of `+-g` in `PSL2(F_q)` for `g` in `SL2(F_q)`.
pub fn psl2_order(c: &FqCtx, g: &Mat) -> u64 {
    if c.is_scalar(g) {
        1
    } else {
        c.psl2_order_from_trace(c.trace(g))
    }
}

/// Per-field state shared by repeated classifications.
pub struct Macbeath {
    ctx: Arc<FqCtx>,
    sl2: OnceLock<Vec<Mat>>,
}

impl Macbeath {
    pub fn new(ctx: &Arc<FqCtx>) -> Self {
        Macbeath { ctx: ctx.clone(), sl2: OnceLock::new() }
    }

    pub fn ctx(&self) -> &Arc<FqCtx> {
        &self.ctx
    }

    fn guard(&self, what: &str) -> Result<()> {
        let limit = enumeration_limit();
        if self.ctx.q() > limit {
            return Err(TridentError::TooLarge { what: what.into(), q: self.ctx.q(), limit });
        }
        Ok(())
    }

    fn sl2(&self) -> &[Mat] {
        self.sl2.get_or_init(|| self.ctx.sl2_elements())
    }

    /// Representatives of the `SL2(F_q)`-classes of trace `t`.
    pub fn sl2_class_reps(&self, t: u32) -> Vec<Mat> {
        let c = &self.ctx;
        let two = c.from_int(2);
        if t != two && t != c.neg(two) {
            return vec![[t, c.neg(1), 1, 0]];
        }
        let s = if t == two { 1 } else { c.neg(1) };
        let mut reps = vec![[s, 0, 0, s], [s, 1, 0, s]];
        if c.p() != 2 {
            let nu = c.elements().find(|&x| !c.is_square(x)).expect("odd q has nonsquares");
            reps.push([s, nu, 0, s]);
        }
        reps
    }

    /// Every witness in `T(t)` up to `SL2`-conjugacy of `g1`: `g1` runs over class representatives
    /// and `g2` over all of `SL2(F_q)`.
    pub fn witnesses(&self, t: &TraceTriple) -> Result<Vec<[Mat; 3]>> {
        self.guard("witness enumeration")?;
        let c = &self.ctx;
        let [t1, t2, t3] = t.t;
        let mut out = Vec::new();
        for g1 in self.sl2_class_reps(t1) {
            for g2 in self.sl2() {
                if c.trace(g2) == t2 {
                    let g12 = c.mat_mul(&g1, g2);
                    if c.trace(&g12) == t3 {
                        out.push([g1, *g2, c.mat_inv(&g12).expect("invertible")]);
                    }
                }
            }
        }
        Ok(out)
    }

    /// True when `+-g1` and `+-g2` commute.
    pub fn commute(&self, g: &[Mat; 3]) -> bool {
        let c = &self.ctx;
        let x = c.mat_mul(&g[0], &g[1]);
        let y = c.mat_mul(&g[1], &g[0]);
        c.canon_psl(&x) == c.canon_psl(&y)
    }

    fn orders_of(&self, g: &[Mat; 3]) -> [u64; 3] {
        sort3(g.map(|m| psl2_order(&self.ctx, &m)))
    }

    /// Whether some witness of `t` generates an abelian subgroup of `PSL2(F_q)`.
    pub fn has_abelian_witness(&self, t: &TraceTriple) -> Result<bool> {
        Ok(self.witnesses(t)?.iter().any(|g| self.commute(g)))
    }

    /// Classifies `t`. Enumeration is needed only when `d(t) = 0` and some entry is `+-2`.
    /// The brute-force commutativity oracle runs when `q` is within the enumeration limit.
    pub fn classify(&self, t: &TraceTriple) -> Result<Classification> {
        self.classify_impl(t, true)
    }

    /// Like [`Macbeath::classify`] but never runs the commutativity oracle.
    pub fn classify_fast(&self, t: &TraceTriple) -> Result<Classification> {
        self.classify_impl(t, false)
    }

    fn classify_impl(&self, t: &TraceTriple, oracle: bool) -> Result<Classification> {
        let c = &self.ctx;
        let d = dform(t);
        let commutative = d == 0;
        let two = c.from_int(2);
        let has_pm2 = t.t.iter().any(|&x| x == two || x == c.neg(two));
        let (order_candidates, realized) = if commutative && has_pm2 {
            let ws = self.witnesses(t)?;
            let mut abel: Vec<[u64; 3]> =
                ws.iter().filter(|g| self.commute(g)).map(|g| self.orders_of(g)).collect();
            let mut all: Vec<[u64; 3]> = ws.iter().map(|g| self.orders_of(g)).collect();
            abel.sort_unstable();
            abel.dedup();
            all.sort_unstable();
            all.dedup();
            (abel, all)
        } else {
            // no witness has a scalar entry, so orders are read off the traces
            let o = sort3(t.t.map(|x| c.psl2_order_from_trace(x)));
            (vec![o], vec![o])
        };
        let order_triple = (order_candidates.len() == 1).then(|| order_candidates[0]);
        let exceptional = realized.iter().any(|&o| is_exceptional_orders(o));
        let projective = !commutative && !exceptional;
        let projective_detail = projective.then(|| {
            let irr = is_irregular(t);
            if irr.irregular {
                ProjectiveDetail {
                    regular: false,
                    subgroup_kind: GroupKind::Pgl2,
                    subfield_order: irr.subfield_order.expect("irregular"),
                    rational_position: irr.rational_position,
                }
            } else {
                ProjectiveDetail {
                    regular: true,
                    subgroup_kind: GroupKind::Psl2,
                    subfield_order: c.p().pow(t.degree()),
                    rational_position: None,
                }
            }
        });
        let oracle_commutative = if oracle && c.q() <= enumeration_limit() {
            Some(self.has_abelian_witness(t)?)
        } else {
            None
        };
        Ok(Classification {
            q: c.q(),
            t: t.formatted(),
            dform: c.format(d),
            commutative,
            exceptional,
            projective,
            order_triple,
            order_candidates,
            realized_orders: realized,
            projective_detail,
            oracle_commutative,
        })
    }

    /// Projective iff every sign lift is; partly projective iff some lift is.
    pub fn classify_signs(&self, t: &TraceTripleUpToSigns) -> Result<SignClassification> {
        let mut flags = Vec::new();
        for lift in t.lifts() {
            flags.push(self.classify(&lift)?.projective);
        }
        Ok(SignClassification {
            projective: flags.iter().all(|&f| f),
            partly_projective: flags.iter().any(|&f| f),
        })
    }

    /// Classification of every triple in `F_q^3`, in code order.
    pub fn census(&self) -> Result<Vec<(TraceTriple, Classification)>> {
        self.guard("trace triple census")?;
        let q = self.ctx.q() as u32;
        let mut out = Vec::with_capacity((q * q * q) as usize);
        for a in 0..q {
            for b in 0..q {
                for d in 0..q {
                    let t = TraceTriple { ctx: self.ctx.clone(), t: [a, b, d] };
                    let cl = self.classify(&t)?;
                    out.push((t, cl));
                }
            }
        }
        Ok(out)
    }
}

/// Header of the trace-triple census TSV.
pub const CENSUS_HEADER: &str =
    "t1\tt2\tt3\tdform\tcommutative\toracle_commutative\texceptional\tprojective\torders\tsubgroup";

fn orders_str(o: &[u64; 3]) -> String {
    format!("({},{},{})", o[0], o[1], o[2])
}

/// One census line; undefined order triples print their candidates joined by `|`.
pub fn census_line(cl: &Classification) -> String {
    let b = |x: bool| if x { "1" } else { "0" };
    let orders = match cl.order_triple {
        Some(o) => orders_str(&o),
        None => cl.order_candidates.iter().map(orders_str).collect::<Vec<_>>().join("|"),
    };
    let subgroup = match &cl.projective_detail {
        Some(d) => format!("{}(F{})", d.subgroup_kind, d.subfield_order),
        None => "-".into(),
    };
    let oc = cl.oracle_commutative.map_or("-", b);
    format!(
        "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
        cl.t[0], cl.t[1], cl.t[2], cl.dform, b(cl.commutative), oc, b(cl.exceptional),
        b(cl.projective), orders, subgroup
    )
}

/// Closure of `gens` in `PSL2(F_q)` (for `Psl2`, matrices in `SL2`) or `PGL2(F_q)`, sorted.
pub fn closure(c: &FqCtx, kind: GroupKind, gens: &[Mat]) -> Vec<Mat> {
    let canon = |m: &Mat| match kind {
        GroupKind::Psl2 => c.canon_psl(m),
        GroupKind::Pgl2 => c.canon_pgl(m),
    };
    let gens: Vec<Mat> = gens.iter().map(canon).collect();
    let id = canon(&crate::projective_linear::IDENTITY);
    let mut seen = std::collections::HashSet::from([id]);
    let mut stack = vec![id];
    while let Some(x) = stack.pop() {
        for g in &gens {
            let y = canon(&c.mat_mul(&x, g));
            if seen.insert(y) {
                stack.push(y);
            }
        }
    }
    let mut v: Vec<Mat> = seen.into_iter().collect();
    v.sort_unstable();
    v
}

/// Isomorphism tag of a generated subgroup.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SubgroupTag {
    /// Conjugate to the standard `PSL2(F_q0)`.
    Psl2 { q0: u64 },
    /// Conjugate to the standard `PGL2(F_q0)` (entries of the normalised form in `F_q0`).
    Pgl2 { q0: u64 },
    Other,
}

/// Output of [`subgroup_oracle`].
#[derive(Clone, Debug, Serialize)]
pub struct SubgroupId {
    pub order: u64,
    pub tag: SubgroupTag,
    /// `h` in `PGL2(F_q)` with `h g_i h^-1` in the standard subgroup.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Mat>,
}

/// Identifies `+-<g1, g2>` inside `PSL2(F_q)` by closure, order comparison and an explicit conjugator.
pub fn subgroup_oracle(c: &Arc<FqCtx>, g1: &Mat, g2: &Mat) -> Result<SubgroupId> {
    let limit = enumeration_limit();
    if c.q() > limit {
        return Err(TridentError::TooLarge { what: "subgroup oracle".into(), q: c.q(), limit });
    }
    for g in [g1, g2] {
        if c.det(g) != 1 {
            return Err(TridentError::InvalidInput("generators must lie in SL2".into()));
        }
    }
    let order = closure(c, GroupKind::Psl2, &[*g1, *g2]).len() as u64;
    let (p, r) = (c.p(), c.r());
    let mut candidates = Vec::new();
    for d in (1..=r).filter(|d| r % d == 0) {
        let q0 = p.pow(d);
        if order == group_order(GroupKind::Psl2, q0) {
            candidates.push((SubgroupTag::Psl2 { q0 }, d));
        } else if p != 2 && r % (2 * d) == 0 && order == group_order(GroupKind::Pgl2, q0) {
            candidates.push((SubgroupTag::Pgl2 { q0 }, d));
        }
    }
    for (tag, d) in candidates {
        let inside = |m: &Mat| {
            let n = match tag {
                SubgroupTag::Psl2 { .. } => c.canon_psl(m),
                _ => c.canon_pgl(m),
            };
            n.iter().all(|&x| c.in_subfield(x, d))
        };
        for h in c.pgl2_elements() {
            let hi = c.mat_inv(&h).expect("invertible");
            let conj = |g: &Mat| {
                // rescale to determinant 1 is unnecessary: conjugation preserves the determinant
                c.mat_mul(&c.mat_mul(&h, g), &hi)
            };
            if inside(&conj(g1)) && inside(&conj(g2)) {
                return Ok(SubgroupId { order, tag, certificate: Some(h) });
            }
        }
    }
    Ok(SubgroupId { order, tag: SubgroupTag::Other, certificate: None })
}

/// A small projective group with a full multiplication table.
pub struct MatGroup {
    pub ctx: Arc<FqCtx>,
    pub kind: GroupKind,
    pub elems: Vec<Mat>,
    index: HashMap<Mat, u16>,
    table: Vec<u16>,
    inv: Vec<u16>,
    pub class_of: Vec<u16>,
    pub classes: Vec<ConjClassId>,
}

/// Largest group handled by [`MatGroup`].
pub const MAX_TABLE_GROUP: u64 = 8400;

impl MatGroup {
    pub fn new(ctx: &Arc<FqCtx>, kind: GroupKind) -> Result<Self> {
        let n = group_order(kind, ctx.q());
        if n > MAX_TABLE_GROUP {
            return Err(TridentError::TooLarge { what: "group table".into(), q: ctx.q(), limit: MAX_TABLE_GROUP });
        }
        let elems = match kind {
            GroupKind::Psl2 => ctx.psl2_elements(),
            GroupKind::Pgl2 => ctx.pgl2_elements(),
        };
        let index: HashMap<Mat, u16> = elems.iter().enumerate().map(|(i, m)| (*m, i as u16)).collect();
        let mut g = MatGroup {
            ctx: ctx.clone(),
            kind,
            elems,
            index,
            table: Vec::new(),
            inv: Vec::new(),
            class_of: Vec::new(),
            classes: Vec::new(),
        };
        let n = g.elems.len();
        let mut table = vec![0u16; n * n];
        for i in 0..n {
            for j in 0..n {
                table[i * n + j] = g.locate(&ctx.mat_mul(&g.elems[i], &g.elems[j]));
            }
        }
        g.table = table;
        let e = g.locate(&crate::projective_linear::IDENTITY) as usize;
        g.inv = (0..n)
            .map(|i| (0..n).find(|&j| g.table[i * n + j] as usize == e).expect("group") as u16)
            .collect();
        let ids: Vec<ConjClassId> = g
            .elems
            .iter()
            .map(|m| conj_class(&ProjElem { ctx: ctx.clone(), m: *m, kind }))
            .collect();
        let mut classes = ids.clone();
        classes.sort();
        classes.dedup();
        g.class_of = ids.iter().map(|id| classes.binary_search(id).expect("present") as u16).collect();
        g.classes = classes;
        Ok(g)
    }

    fn canon(&self, m: &Mat) -> Mat {
        match self.kind {
            GroupKind::Psl2 => self.ctx.canon_psl(m),
            GroupKind::Pgl2 => self.ctx.canon_pgl(m),
        }
    }

    fn locate(&self, m: &Mat) -> u16 {
        self.index[&self.canon(m)]
    }

    /// Index of a matrix (any scalar multiple), if it lies in the group.
    pub fn index_of(&self, m: &Mat) -> Option<usize> {
        self.index.get(&self.canon(m)).map(|&i| i as usize)
    }

    pub fn order(&self) -> usize {
        self.elems.len()
    }

    pub fn identity(&self) -> usize {
        self.locate(&crate::projective_linear::IDENTITY) as usize
    }

    #[inline]
    pub fn mul(&self, i: usize, j: usize) -> usize {
        self.table[i * self.elems.len() + j] as usize
    }

    #[inline]
    pub fn inv(&self, i: usize) -> usize {
        self.inv[i] as usize
    }

    pub fn conj(&self, h: usize, g: usize) -> usize {
        self.mul(self.mul(h, g), self.inv(h))
    }

    pub fn element_order(&self, i: usize) -> u64 {
        self.classes[self.class_of[i] as usize].order
    }

    /// First element of each class, in class order.
    pub fn class_reps(&self) -> Vec<usize> {
        let mut reps = vec![usize::MAX; self.classes.len()];
        for (i, &c) in self.class_of.iter().enumerate() {
            if reps[c as usize] == usize::MAX {
                reps[c as usize] = i;
            }
        }
        reps
    }

    /// Size of the subgroup generated by `gens`.
    pub fn closure_size(&self, gens: &[usize]) -> usize {
        let n = self.elems.len();
        let mut seen = vec![false; n];
        let e = self.identity();
        seen[e] = true;
        let mut stack = vec![e];
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for &g in gens {
                let y = self.mul(x, g);
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        count
    }

    pub fn generates(&self, gens: &[usize]) -> bool {
        self.closure_size(gens) == self.elems.len()
    }

    pub fn centralizer(&self, x: usize) -> Vec<usize> {
        (0..self.order()).filter(|&h| self.mul(h, x) == self.mul(x, h)).collect()
    }

    /// Display name; even `q` is written `PGL2` since the two groups coincide.
    pub fn label(&self) -> String {
        let kind = if self.ctx.p() == 2 { GroupKind::Pgl2 } else { self.kind };
        format!("{kind}(F{})", self.ctx.q())
    }

    fn perm_of(&self, f: impl Fn(&Mat) -> Mat) -> Vec<u16> {
        self.elems.iter().map(|m| self.locate(&f(m))).collect()
    }

    /// Coset representatives of `Aut(G)/Inn(G)` as permutations of element indices: powers of the
    /// entrywise Frobenius, times conjugation by `diag(nu, 1)` for `PSL2` in odd characteristic.
    pub fn outer_automorphisms(&self) -> Vec<Vec<u16>> {
        let c = &self.ctx;
        let sigma = self.perm_of(|m| m.map(|x| c.frobenius(x)));
        let mut taus = vec![(0..self.order() as u16).collect::<Vec<_>>()];
        if self.kind == GroupKind::Psl2 && c.p() != 2 {
            let nu = c.elements().find(|&x| !c.is_square(x)).expect("nonsquare");
            let nui = c.inv(nu).expect("nonzero");
            // diag(nu,1) m diag(nu,1)^-1 keeps the determinant
            taus.push(self.perm_of(|m| [m[0], c.mul(nu, m[1]), c.mul(nui, m[2]), m[3]]));
        }
        let mut out = Vec::new();
        let mut s: Vec<u16> = (0..self.order() as u16).collect();
        for _ in 0..c.r() {
            for tau in &taus {
                out.push(tau.iter().map(|&i| s[i as usize]).collect());
            }
            s = s.iter().map(|&i| sigma[i as usize]).collect();
        }
        out
    }
}

/// `d_r = |Sigma(C)/Inn(G)|` and `d_wr = |Sigma(C)/Aut(G)|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitCounts {
    pub d_r: u64,
    pub d_wr: u64,
}

/// Bounds from the orbit table; `exact` marks rows stating equality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitBounds {
    pub d_r: u64,
    pub d_wr: u64,
    pub exact: bool,
}

/// Bounds on orbit counts for a partly projective, non-exceptional triple with orders `orders`.
pub fn orbit_counts_theoretical(
    p: u64,
    orders: [u64; 3],
    p_divides_abc: bool,
    kind: GroupKind,
) -> Result<OrbitBounds> {
    if is_exceptional_orders(orders) {
        return Err(TridentError::Hypothesis(format!("order triple {orders:?} is exceptional")));
    }
    let a = sort3(orders)[0];
    let b = |d_r, d_wr, exact| Ok(OrbitBounds { d_r, d_wr, exact });
    match (p == 2, a == 2, p_divides_abc, kind) {
        (true, ..) => b(1, 1, true),
        (false, true, true, _) => b(1, 1, true),
        (false, true, false, GroupKind::Pgl2) => b(1, 1, true),
        (false, true, false, GroupKind::Psl2) => b(2, 1, true),
        (false, false, false, GroupKind::Psl2) => b(4, 2, false),
        (false, false, ..) => b(2, 2, false),
    }
}

/// Orbit data for one ordered class triple.
#[derive(Clone, Debug, Serialize)]
pub struct ClassTripleOrbits {
    pub classes: [ConjClassId; 3],
    pub orders: [u64; 3],
    /// Number of generating triples with `g1` fixed to the class representative.
    pub sigma_size: usize,
    pub counts: OrbitCounts,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
    fn components(&mut self) -> u64 {
        (0..self.0.len()).filter(|&i| self.find(i) == i).count() as u64
    }
}

/// Exact orbit counts for every ordered class triple of `G` that contains a generating triple.
///
/// Fixing `g1` to a class representative `x1`, `Sigma(C)/Inn(G)` is the set of admissible `g2`
/// modulo the centralizer of `x1`. Outer automorphisms preserving `C` act after being composed
/// with an inner automorphism that returns `x1` to itself.
pub fn orbit_counts_all(g: &MatGroup) -> Vec<ClassTripleOrbits> {
    let n = g.order();
    let outs = g.outer_automorphisms();
    let mut out = Vec::new();
    for (c1, &x1) in g.class_reps().iter().enumerate() {
        let mut sigma: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for g2 in 0..n {
            let g3 = g.inv(g.mul(x1, g2));
            if g.generates(&[x1, g2]) {
                sigma
                    .entry((g.class_of[g2] as usize, g.class_of[g3] as usize))
                    .or_default()
                    .push(g2);
            }
        }
        if sigma.is_empty() {
            continue;
        }
        let cent = g.centralizer(x1);
        let mut to_x1 = vec![usize::MAX; n];
        for h in 0..n {
            let y = g.conj(g.inv(h), x1);
            if to_x1[y] == usize::MAX {
                to_x1[y] = h;
            }
        }
        for ((c2, c3), list) in sigma {
            let pos: HashMap<usize, usize> = list.iter().enumerate().map(|(i, &x)| (x, i)).collect();
            let mut uf = UnionFind::new(list.len());
            for &h in &cent {
                for (i, &g2) in list.iter().enumerate() {
                    uf.union(i, pos[&g.conj(h, g2)]);
                }
            }
            let d_r = uf.components();
            let g3_of = |g2: usize| g.inv(g.mul(x1, g2));
            for phi in &outs {
                let ph = |i: usize| phi[i] as usize;
                let s = list[0];
                let preserved = g.class_of[ph(x1)] as usize == c1
                    && g.class_of[ph(s)] as usize == c2
                    && g.class_of[ph(g3_of(s))] as usize == c3;
                if !preserved {
                    continue;
                }
                let h = to_x1[ph(x1)];
                for (i, &g2) in list.iter().enumerate() {
                    uf.union(i, pos[&g.conj(h, ph(g2))]);
                }
            }
            let d_wr = uf.components();
            let s = list[0];
            out.push(ClassTripleOrbits {
                classes: [
                    g.classes[c1].clone(),
                    g.classes[c2].clone(),
                    g.classes[c3].clone(),
                ],
                orders: [g.element_order(x1), g.element_order(s), g.element_order(g3_of(s))],
                sigma_size: list.len(),
                counts: OrbitCounts { d_r, d_wr },
            });
        }
    }
    out
}

/// Exact orbit counts for one class triple, by full enumeration (`q <= 13`).
pub fn orbit_counts_oracle(
    ctx: &Arc<FqCtx>,
    kind: GroupKind,
    class_triple: &[ConjClassId; 3],
) -> Result<OrbitCounts> {
    if ctx.q() > 13 {
        return Err(TridentError::TooLarge { what: "orbit oracle".into(), q: ctx.q(), limit: 13 });
    }
    let g = MatGroup::new(ctx, kind)?;
    Ok(orbit_counts_all(&g)
        .into_iter()
        .find(|o| &o.classes == class_triple)
        .map_or(OrbitCounts { d_r: 0, d_wr: 0 }, |o| o.counts))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(q: u64) -> Arc<FqCtx> {
        FqCtx::of_order(q).unwrap()
    }

    fn tt(c: &Arc<FqCtx>, t: [i64; 3]) -> TraceTriple {
        TraceTriple::new(c, t.map(|x| c.from_int(x))).unwrap()
    }

    fn check_witness(c: &FqCtx, t: &TraceTriple, g: &[Mat; 3]) {
        for (m, &x) in g.iter().zip(&t.t) {
            assert_eq!(c.det(m), 1);
            assert_eq!(c.trace(m), x);
        }
        let prod = c.mat_mul(&c.mat_mul(&g[0], &g[1]), &g[2]);
        assert_eq!(prod, crate::projective_linear::IDENTITY);
    }

    #[test]
    fn dform_examples() {
        let c = f(7);
        assert_eq!(dform(&tt(&c, [2, 0, 0])), 0);
        assert_eq!(dform(&tt(&c, [0, 1, 2])), 1);
        assert_eq!(dform(&tt(&c, [0, 0, 0])), c.from_int(-4));
        assert_eq!(dform(&tt(&c, [0, 3, 3])), 0);
        assert_eq!(dform(&tt(&c, [1, 1, -1])), 0);
    }

    #[test]
    fn construct_triple_everywhere() {
        for q in [2u64, 3, 4, 5, 7, 8, 9, 11, 13] {
            let c = f(q);
            for a in c.elements() {
                for b in c.elements() {
                    for d in c.elements() {
                        let t = TraceTriple::new(&c, [a, b, d]).unwrap();
                        let g = construct_triple(&t).unwrap();
                        check_witness(&c, &t, &g);
                    }
                }
            }
        }
    }

    #[test]
    fn identity_triple_is_a_witness() {
        let c = f(5);
        let t = tt(&c, [2, 2, 2]);
        let mb = Macbeath::new(&c);
        let ws = mb.witnesses(&t).unwrap();
        let id = crate::projective_linear::IDENTITY;
        assert!(ws.contains(&[id, id, id]));
    }

    #[test]
    fn witnesses_match_brute_force_count() {
        // g1 over class reps times |class| recovers |T(t)| counted over all of SL2 x SL2
        let c = f(5);
        let mb = Macbeath::new(&c);
        let sl2 = c.sl2_elements();
        let t = tt(&c, [1, 2, 3]);
        let brute = sl2
            .iter()
            .flat_map(|g1| sl2.iter().map(move |g2| (g1, g2)))
            .filter(|(g1, g2)| {
                c.trace(g1) == t.t[0] && c.trace(g2) == t.t[1] && c.trace(&c.mat_mul(g1, g2)) == t.t[2]
            })
            .count();
        // t1 = 1 is not +-2, so one class of size |SL2| / |centralizer| = 120 / 6
        assert_eq!(mb.witnesses(&t).unwrap().len() * 20, brute);
    }

    #[test]
    fn order_triples_q7() {
        let c = f(7);
        let mb = Macbeath::new(&c);
        assert_eq!(mb.classify(&tt(&c, [0, 1, 2])).unwrap().order_triple, Some([2, 3, 7]));
        assert_eq!(mb.classify(&tt(&c, [1, 1, 3])).unwrap().order_triple, Some([3, 3, 4]));
        let u = mb.classify(&tt(&c, [2, 2, 2])).unwrap();
        assert_eq!(u.order_triple, None);
        assert_eq!(u.order_candidates, vec![[1, 1, 1], [1, 7, 7], [7, 7, 7]]);
    }

    #[test]
    fn classify_q7_examples() {
        let c = f(7);
        let mb = Macbeath::new(&c);
        let x = mb.classify(&tt(&c, [0, 1, 1])).unwrap();
        assert!(x.exceptional && !x.projective);
        assert_eq!(x.order_triple, Some([2, 3, 3]));
        let y = mb.classify(&tt(&c, [1, 2, 2])).unwrap();
        assert!(y.projective);
        let d = y.projective_detail.unwrap();
        assert_eq!((d.subgroup_kind, d.subfield_order, d.regular), (GroupKind::Psl2, 7, true));
        let z = mb.classify(&tt(&c, [1, 3, -3])).unwrap();
        assert!(!z.projective);
        let [g1, g2, _] = construct_triple(&tt(&c, [1, 3, -3])).unwrap();
        // some witness generates all of PSL2(F7), yet the triple is exceptional
        let ws = mb.witnesses(&tt(&c, [1, 3, -3])).unwrap();
        assert!(ws.iter().any(|w| closure(&c, GroupKind::Psl2, &w[..2]).len() == 168));
        let _ = (g1, g2);
    }

    #[test]
    fn zero_triple_has_abelian_witness_despite_dform() {
        let c = f(7);
        let mb = Macbeath::new(&c);
        let cl = mb.classify(&tt(&c, [0, 0, 0])).unwrap();
        assert!(!cl.commutative);
        assert_eq!(cl.oracle_commutative, Some(true));
        assert!(cl.dform_disagrees());
        assert!(cl.exceptional);
    }

    #[test]
    fn irregular_definition_by_enumeration() {
        let c = f(9);
        let mut found = 0;
        for a in c.elements() {
            for b in c.elements() {
                for d in c.elements() {
                    let t = TraceTriple::new(&c, [a, b, d]).unwrap();
                    // direct reading of the definition with k = F3
                    let e = t.degree();
                    let sqrt_ns = |x: u32| x == 0 || (!c.in_subfield(x, 1) && c.in_subfield(c.mul(x, x), 1));
                    let direct = e == 2
                        && (0..3).any(|i| {
                            c.in_subfield(t.t[i], 1) && (0..3).filter(|&j| j != i).all(|j| sqrt_ns(t.t[j]))
                        });
                    assert_eq!(is_irregular(&t).irregular, direct, "{t}");
                    found += usize::from(direct);
                }
            }
        }
        assert!(found > 0);
        let c7 = f(7);
        for a in c7.elements() {
            assert!(!is_irregular(&TraceTriple::new(&c7, [a, 1, 2]).unwrap()).irregular);
        }
    }

    #[test]
    fn subgroup_oracle_examples() {
        let c = f(7);
        let [g1, g2, _] = construct_triple(&tt(&c, [0, 1, 2])).unwrap();
        let id = subgroup_oracle(&c, &g1, &g2).unwrap();
        assert_eq!(id.order, 168);
        assert_eq!(id.tag, SubgroupTag::Psl2 { q0: 7 });
        let e = crate::projective_linear::IDENTITY;
        let triv = subgroup_oracle(&c, &e, &e).unwrap();
        assert_eq!((triv.order, triv.tag), (1, SubgroupTag::Other));

        // over F25, t1 in F5 and t2, t3 in sqrt(2) F5 gives irregular triples
        let c25 = f(25);
        let mb = Macbeath::new(&c25);
        let s = c25.sqrt(2).unwrap();
        let t = (0..125u32)
            .map(|i| {
                let [a, x, y] = [i / 25, i / 5 % 5, i % 5];
                TraceTriple::new(&c25, [a, c25.mul(x, s), c25.mul(y, s)]).unwrap()
            })
            .find(|t| {
                let cl = mb.classify(t).unwrap();
                cl.projective && !cl.projective_detail.unwrap().regular
            })
            .expect("an irregular projective triple over F25");
        let [g1, g2, _] = construct_triple(&t).unwrap();
        let id = subgroup_oracle(&c25, &g1, &g2).unwrap();
        assert_eq!((id.order, id.tag), (120, SubgroupTag::Pgl2 { q0: 5 }));
        assert!(id.certificate.is_some());
    }

    #[test]
    fn sign_lifts_preserve_generated_subgroups() {
        // flipping two signs multiplies two generators by -1, which is invisible in PSL2
        let c = f(7);
        for i in 0..343u32 {
            let t = TraceTriple::new(&c, [i / 49, i / 7 % 7, i % 7]).unwrap();
            let [g1, g2, _] = construct_triple(&t).unwrap();
            let base = closure(&c, GroupKind::Psl2, &[g1, g2]);
            let m = c.neg(1);
            let flips = [
                (c.mat_scale(m, &g1), c.mat_scale(m, &g2)),
                (c.mat_scale(m, &g1), g2),
                (g1, c.mat_scale(m, &g2)),
            ];
            for (h1, h2) in flips {
                assert_eq!(closure(&c, GroupKind::Psl2, &[h1, h2]), base);
            }
        }
    }

    #[test]
    fn theoretical_table_rows() {
        use GroupKind::*;
        let b = |p, o, d, k| orbit_counts_theoretical(p, o, d, k).unwrap();
        assert_eq!(b(2, [2, 3, 7], false, Psl2), OrbitBounds { d_r: 1, d_wr: 1, exact: true });
        assert_eq!(b(7, [2, 3, 7], true, Psl2), OrbitBounds { d_r: 1, d_wr: 1, exact: true });
        assert_eq!(b(13, [2, 3, 7], false, Psl2), OrbitBounds { d_r: 2, d_wr: 1, exact: true });
        assert_eq!(b(13, [2, 3, 7], false, Pgl2), OrbitBounds { d_r: 1, d_wr: 1, exact: true });
        assert_eq!(b(11, [3, 5, 6], false, Psl2), OrbitBounds { d_r: 4, d_wr: 2, exact: false });
        assert!(orbit_counts_theoretical(7, [2, 3, 4], false, Psl2).is_err());
    }

    #[test]
    fn orbit_oracle_examples() {
        let g7 = MatGroup::new(&f(7), GroupKind::Psl2).unwrap();
        let all7 = orbit_counts_all(&g7);
        let o237: Vec<_> = all7.iter().filter(|o| o.orders == [2, 3, 7]).collect();
        assert!(!o237.is_empty());
        assert!(o237.iter().all(|o| o.counts.d_r == 1));

        let g13 = MatGroup::new(&f(13), GroupKind::Psl2).unwrap();
        let o: Vec<_> = orbit_counts_all(&g13).into_iter().filter(|o| o.orders == [2, 3, 7]).collect();
        assert!(!o.is_empty());
        assert!(o.iter().all(|o| o.counts == OrbitCounts { d_r: 2, d_wr: 1 }));

        let g2 = MatGroup::new(&f(2), GroupKind::Psl2).unwrap();
        assert!(orbit_counts_all(&g2).iter().all(|o| o.counts == OrbitCounts { d_r: 1, d_wr: 1 }));
    }

    #[test]
    fn orbit_counts_invariants() {
        for (q, kind) in [(5, GroupKind::Psl2), (5, GroupKind::Pgl2), (8, GroupKind::Psl2), (9, GroupKind::Psl2)] {
            let g = MatGroup::new(&f(q), kind).unwrap();
            for o in orbit_counts_all(&g) {
                assert!(o.counts.d_wr <= o.counts.d_r && o.counts.d_wr >= 1, "{o:?}");
            }
        }
    }

    #[test]
    fn mat_group_basics() {
        let g = MatGroup::new(&f(5), GroupKind::Pgl2).unwrap();
        assert_eq!(g.order(), 120);
        let e = g.identity();
        for i in 0..g.order() {
            assert_eq!(g.mul(i, g.inv(i)), e);
            assert_eq!(g.mul(e, i), i);
        }
        let sizes: usize = g.class_reps().iter().map(|&x| g.order() / g.centralizer(x).len()).sum();
        assert_eq!(sizes, 120);
        assert_eq!(g.label(), "PGL2(F5)");
        assert_eq!(MatGroup::new(&f(4), GroupKind::Psl2).unwrap().label(), "PGL2(F4)");
    }
}
