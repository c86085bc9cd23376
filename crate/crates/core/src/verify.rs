//! Brute-force verification suites shared by the `oracle` command and the acceptance tests.
//!
//! Each suite compares a theoretical prediction with exhaustive enumeration and returns a
//! report listing every disagreement instead of stopping at the first.

use crate::census::{census_with_witnesses, fixture_rows, regular_genus, CensusRow};
use crate::error::{Result, TridentError};
use crate::macbeath::{
    closure, construct_triple, is_exceptional_orders, orbit_counts_all, orbit_counts_theoretical, sort3,
    subgroup_oracle, Classification, Macbeath, MatGroup, SubgroupTag, TraceTriple,
};
use crate::projective_linear::{FqCtx, GroupKind};
use crate::triangle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

/// The worked `q = 7` listing, embedded at build time.
pub const Q7_LISTING: &str = include_str!("../../../fixtures/macbeath_q7_listing.tsv");

/// Field orders covered by the exhaustive suites.
pub const SMALL_Q: [u64; 9] = [2, 3, 4, 5, 7, 8, 9, 11, 13];

/// Which sign changes of a listed pattern are included.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Signs {
    Any,
    Even,
    Odd,
}

/// One line of the `q = 7` listing.
#[derive(Clone, Debug, Serialize)]
pub struct ListingEntry {
    pub category: String,
    pub pattern: [i64; 3],
    pub signs: Signs,
    /// Sorted order triples; more than one when the order triple is not well defined.
    pub orders: Vec<[u64; 3]>,
}

fn parse_orders(s: &str) -> Result<[u64; 3]> {
    let bad = || TridentError::InvalidInput(format!("bad order triple {s:?}"));
    let v: Vec<u64> = s
        .trim_matches(|c| c == '(' || c == ')')
        .split(',')
        .map(|x| x.trim().parse().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    v.try_into().map_err(|_| bad())
}

/// Parses the embedded `q = 7` listing.
pub fn q7_listing() -> Result<Vec<ListingEntry>> {
    let mut out = Vec::new();
    for line in Q7_LISTING.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
        let cols: Vec<&str> = line.split('\t').collect();
        let [category, pattern, signs, orders] = cols[..] else {
            return Err(TridentError::InvalidInput(format!("bad listing line {line:?}")));
        };
        let nums: Vec<i64> = pattern
            .split(',')
            .map(|x| x.trim().parse().map_err(|_| TridentError::InvalidInput(format!("bad entry {x:?}"))))
            .collect::<Result<_>>()?;
        let pattern: [i64; 3] =
            nums.try_into().map_err(|_| TridentError::InvalidInput(format!("bad pattern {pattern}")))?;
        let signs = match signs {
            "any" => Signs::Any,
            "even" => Signs::Even,
            "odd" => Signs::Odd,
            s => return Err(TridentError::InvalidInput(format!("bad sign rule {s}"))),
        };
        let orders = orders.split('|').map(parse_orders).collect::<Result<_>>()?;
        out.push(ListingEntry { category: category.to_string(), pattern, signs, orders });
    }
    Ok(out)
}

/// Every triple covered by an entry: permutations of the pattern, with the sign parity counted
/// relative to the all-positive pattern (so `(1,1,-1)` odd means an odd number of minus signs).
pub fn expand(c: &FqCtx, e: &ListingEntry) -> BTreeSet<[u32; 3]> {
    let abs = e.pattern.map(|x| x.abs());
    let mut out = BTreeSet::new();
    for perm in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
        for mask in 0..8u32 {
            let odd = mask.count_ones() % 2 == 1;
            let ok = match e.signs {
                Signs::Any => true,
                Signs::Even => !odd,
                Signs::Odd => odd,
            };
            if !ok {
                continue;
            }
            let t: [i64; 3] = std::array::from_fn(|i| {
                let x = abs[perm[i]];
                if mask >> i & 1 == 1 {
                    -x
                } else {
                    x
                }
            });
            out.insert(t.map(|x| c.from_int(x)));
        }
    }
    out
}

/// A triple whose listed data differ from the computed classification.
#[derive(Clone, Debug, Serialize)]
pub struct ListingMismatch {
    pub t: [String; 3],
    pub column: &'static str,
    pub listed: String,
    pub computed: String,
}

/// Comparison of the full `q = 7` classification with the listing.
#[derive(Clone, Debug, Serialize)]
pub struct Q7Report {
    pub classified: usize,
    pub commutative: usize,
    pub exceptional: usize,
    pub projective: usize,
    /// Triples where `d(t) = 0` and the witness search disagree.
    pub dform_disagreements: Vec<[String; 3]>,
    pub mismatches: Vec<ListingMismatch>,
}

fn orders_string(o: &[[u64; 3]]) -> String {
    o.iter().map(|o| format!("({},{},{})", o[0], o[1], o[2])).collect::<Vec<_>>().join("|")
}

fn categories(cl: &Classification) -> Vec<&'static str> {
    let mut v = Vec::new();
    if cl.oracle_commutative.unwrap_or(cl.commutative) {
        v.push("commutative");
    }
    if cl.exceptional {
        v.push("exceptional");
    }
    if cl.projective {
        v.push("projective");
    }
    v
}

/// Classifies all of `F_7^3` and compares with the listing; commutativity is taken from the
/// witness search.
pub fn q7_report() -> Result<Q7Report> {
    let ctx = FqCtx::of_order(7)?;
    let listing = q7_listing()?;
    let mut listed: BTreeMap<[u32; 3], BTreeMap<&str, &[[u64; 3]]>> = BTreeMap::new();
    // projective patterns cover only the triples not listed otherwise
    for e in listing.iter().filter(|e| e.category != "projective") {
        for t in expand(&ctx, e) {
            listed.entry(t).or_default().insert(&e.category, &e.orders);
        }
    }
    for e in listing.iter().filter(|e| e.category == "projective") {
        for t in expand(&ctx, e) {
            if !listed.contains_key(&t) {
                listed.entry(t).or_default().insert(&e.category, &e.orders);
            }
        }
    }
    let census = Macbeath::new(&ctx).census()?;
    let mut report = Q7Report {
        classified: census.len(),
        commutative: 0,
        exceptional: 0,
        projective: 0,
        dform_disagreements: Vec::new(),
        mismatches: Vec::new(),
    };
    for (t, cl) in &census {
        let cats = categories(cl);
        report.commutative += cats.contains(&"commutative") as usize;
        report.exceptional += cl.exceptional as usize;
        report.projective += cl.projective as usize;
        if cl.dform_disagrees() {
            report.dform_disagreements.push(cl.t.clone());
        }
        let empty = BTreeMap::new();
        let want = listed.get(&t.t).unwrap_or(&empty);
        let want_cats: Vec<&str> = want.keys().copied().collect();
        let mut got_cats = cats.clone();
        got_cats.sort_unstable();
        if want_cats != got_cats {
            report.mismatches.push(ListingMismatch {
                t: cl.t.clone(),
                column: "categories",
                listed: want_cats.join(","),
                computed: got_cats.join(","),
            });
        }
        if let Some(o) = want.values().next() {
            let computed = match cl.order_triple {
                Some(ot) => vec![ot],
                None => cl.order_candidates.clone(),
            };
            if orders_string(o) != orders_string(&computed) {
                report.mismatches.push(ListingMismatch {
                    t: cl.t.clone(),
                    column: "orders",
                    listed: orders_string(o),
                    computed: orders_string(&computed),
                });
            }
        }
    }
    Ok(report)
}

/// Outcome of comparing the classification with subgroup closure.
#[derive(Clone, Debug, Default, Serialize)]
pub struct OracleAgreement {
    pub q: u64,
    pub triples: usize,
    pub witnesses: usize,
    pub disagreements: Vec<String>,
}

fn expected_tag(cl: &Classification) -> Option<SubgroupTag> {
    let d = cl.projective_detail.as_ref()?;
    Some(match d.subgroup_kind {
        GroupKind::Psl2 => SubgroupTag::Psl2 { q0: d.subfield_order },
        GroupKind::Pgl2 => SubgroupTag::Pgl2 { q0: d.subfield_order },
    })
}

fn check_witness(
    ctx: &Arc<FqCtx>,
    cl: &Classification,
    g: &[crate::projective_linear::Mat; 3],
    out: &mut OracleAgreement,
) -> Result<()> {
    out.witnesses += 1;
    if let Some(want) = expected_tag(cl) {
        let id = subgroup_oracle(ctx, &g[0], &g[1])?;
        if id.tag != want {
            out.disagreements.push(format!("{:?}: predicted {want:?}, closure gives {:?}", cl.t, id.tag));
        }
    }
    Ok(())
}

/// Every trace triple of `F_q^3` and every witness: projective triples generate the predicted
/// subgroup, exceptional ones a spherical or projective group, and every triple is commutative,
/// exceptional or projective.
pub fn oracle_equivalence_exhaustive(q: u64) -> Result<OracleAgreement> {
    let ctx = FqCtx::of_order(q)?;
    let mb = Macbeath::new(&ctx);
    let mut out = OracleAgreement { q, ..Default::default() };
    for (t, cl) in mb.census()? {
        out.triples += 1;
        if categories(&cl).is_empty() {
            out.disagreements.push(format!("{:?}: no category", cl.t));
        }
        if cl.projective {
            for g in mb.witnesses(&t)? {
                check_witness(&ctx, &cl, &g, &mut out)?;
            }
        } else if cl.exceptional && !categories(&cl).contains(&"commutative") {
            for g in mb.witnesses(&t)? {
                out.witnesses += 1;
                if !spherical_or_projective(&ctx, &g)? {
                    out.disagreements.push(format!("{:?}: exceptional witness generates neither", cl.t));
                }
            }
        }
    }
    Ok(out)
}

/// A witness of an exceptional triple generates a dihedral group, `A4`, `S4`, `A5`, or a
/// projective group over a subfield.
fn spherical_or_projective(ctx: &Arc<FqCtx>, g: &[crate::projective_linear::Mat; 3]) -> Result<bool> {
    let orders = sort3(g.map(|m| crate::macbeath::psl2_order(ctx, &m)));
    let id = subgroup_oracle(ctx, &g[0], &g[1])?;
    let dihedral = orders[0] <= 2 && orders[1] <= 2 && id.order == 2 * orders[2];
    Ok(dihedral || [12, 24, 60].contains(&id.order) || id.tag != SubgroupTag::Other)
}

/// `n` witnesses of projective triples drawn with a seeded generator.
pub fn oracle_equivalence_sampled(q: u64, n: usize, seed: u64) -> Result<OracleAgreement> {
    let ctx = FqCtx::of_order(q)?;
    let mb = Macbeath::new(&ctx);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = OracleAgreement { q, ..Default::default() };
    while out.witnesses < n {
        let t = TraceTriple::new(&ctx, std::array::from_fn(|_| rng.gen_range(0..q as u32)))?;
        let cl = mb.classify_fast(&t)?;
        out.triples += 1;
        if !cl.projective {
            continue;
        }
        let ws = mb.witnesses(&t)?;
        if ws.is_empty() {
            out.disagreements.push(format!("{:?}: no witness", cl.t));
            continue;
        }
        let g = ws[rng.gen_range(0..ws.len())];
        check_witness(&ctx, &cl, &g, &mut out)?;
    }
    Ok(out)
}

/// Triples of `F_q^3` for which [`construct_triple`] fails or returns a non-witness.
pub fn construct_failures(q: u64) -> Result<Vec<[u32; 3]>> {
    let ctx = FqCtx::of_order(q)?;
    let qq = q as u32;
    let mut bad = Vec::new();
    for a in 0..qq {
        for b in 0..qq {
            for c in 0..qq {
                let t = TraceTriple::new(&ctx, [a, b, c])?;
                let ok = construct_triple(&t).is_ok_and(|g| {
                    let prod = ctx.mat_mul(&ctx.mat_mul(&g[0], &g[1]), &g[2]);
                    g.iter().all(|m| ctx.det(m) == 1)
                        && prod == crate::projective_linear::IDENTITY
                        && [0, 1, 2].iter().all(|&i| ctx.trace(&g[i]) == t.t[i])
                });
                if !ok {
                    bad.push([a, b, c]);
                }
            }
        }
    }
    Ok(bad)
}

/// Genus checks for one table row.
#[derive(Clone, Debug, Serialize)]
pub struct GenusCheck {
    pub row: String,
    pub genus_formula: u64,
    pub genus_regular: u64,
    pub g0_borel: u64,
    pub g0_table: u64,
}

impl GenusCheck {
    pub fn ok(&self) -> bool {
        self.genus_formula == self.genus_regular && self.g0_borel == self.g0_table
    }
}

/// For each table row with `q <= max_q`: the genus formula against the regular action of a
/// witness, and the Borel quotient genus against the table.
pub fn table_genus_checks(max_q: u64) -> Result<Vec<GenusCheck>> {
    let fixture: BTreeMap<_, CensusRow> = fixture_rows()?.into_iter().map(|r| (r.key(), r)).collect();
    let gmax = fixture.keys().map(|k| k.0).max().unwrap_or(2);
    let mut out = Vec::new();
    for (row, w) in census_with_witnesses(gmax)? {
        if w.q > max_q {
            continue;
        }
        let Some(f) = fixture.get(&row.key()) else { continue };
        let g = MatGroup::new(&w.ctx, w.kind)?;
        let idx = w.generators.map(|m| g.index_of(&m).expect("witness lies in the group"));
        let formula = triangle::genus(&row.triple, g.order() as u64)?;
        out.push(GenusCheck {
            row: format!("{} {} {}", row.g, row.triple, row.group),
            genus_formula: formula,
            genus_regular: regular_genus(&g, idx)?,
            g0_borel: row.g0,
            g0_table: f.g0,
        });
    }
    Ok(out)
}

/// Orbit counts against the theoretical bounds.
#[derive(Clone, Debug, Default, Serialize)]
pub struct OrbitBoundReport {
    pub class_triples: usize,
    pub violations: Vec<String>,
    /// Exact bound rows met with equality: `p2`, `a2_p_divides`, `a2_psl2`.
    pub attained: BTreeSet<&'static str>,
}

/// Every generating class triple with non-exceptional orders in `PSL2(F_q)` and `PGL2(F_q)`.
pub fn orbit_bounds(qs: &[u64]) -> Result<OrbitBoundReport> {
    let mut rep = OrbitBoundReport::default();
    for &q in qs {
        let ctx = FqCtx::of_order(q)?;
        let p = ctx.p();
        let kinds: &[GroupKind] = if p == 2 { &[GroupKind::Psl2] } else { &[GroupKind::Psl2, GroupKind::Pgl2] };
        for &kind in kinds {
            let g = MatGroup::new(&ctx, kind)?;
            for o in orbit_counts_all(&g) {
                let orders = sort3(o.orders);
                if orders[0] < 2 || is_exceptional_orders(orders) {
                    continue;
                }
                rep.class_triples += 1;
                let pdiv = orders.iter().any(|x| x % p == 0);
                let b = orbit_counts_theoretical(p, orders, pdiv, kind)?;
                if o.counts.d_r > b.d_r || o.counts.d_wr > b.d_wr {
                    rep.violations.push(format!(
                        "{kind}(F{q}) {orders:?}: counts ({}, {}) exceed ({}, {})",
                        o.counts.d_r, o.counts.d_wr, b.d_r, b.d_wr
                    ));
                }
                let hit = (o.counts.d_r, o.counts.d_wr) == (b.d_r, b.d_wr);
                let row = match (p == 2, orders[0] == 2, pdiv, kind) {
                    (true, ..) => Some("p2"),
                    (false, true, true, _) => Some("a2_p_divides"),
                    (false, true, false, GroupKind::Psl2) => Some("a2_psl2"),
                    _ => None,
                };
                if let (true, Some(r)) = (hit, row) {
                    rep.attained.insert(r);
                }
            }
        }
    }
    Ok(rep)
}

/// Closure sizes of constructed triples match the classification's subgroup order.
pub fn closure_orders(q: u64) -> Result<Vec<String>> {
    let ctx = FqCtx::of_order(q)?;
    let mb = Macbeath::new(&ctx);
    let mut bad = Vec::new();
    for (t, cl) in mb.census()? {
        let Some(d) = &cl.projective_detail else { continue };
        let g = construct_triple(&t)?;
        let n = closure(&ctx, GroupKind::Psl2, &g).len() as u64;
        if n != d.group_order() {
            bad.push(format!("{:?}: closure {n}, predicted {}", cl.t, d.group_order()));
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn listing_expansion_counts() {
        let ctx = FqCtx::of_order(7).unwrap();
        let e = |p: [i64; 3], s| ListingEntry { category: "x".into(), pattern: p, signs: s, orders: vec![] };
        assert_eq!(expand(&ctx, &e([2, 2, 2], Signs::Even)).len(), 4);
        assert_eq!(expand(&ctx, &e([2, 2, -2], Signs::Odd)).len(), 4);
        assert_eq!(expand(&ctx, &e([0, 0, 0], Signs::Any)).len(), 1);
        assert_eq!(expand(&ctx, &e([0, 1, 2], Signs::Any)).len(), 24);
        let odd = expand(&ctx, &e([1, 1, -1], Signs::Odd));
        assert!(odd.contains(&[1, 1, 6]) && odd.contains(&[6, 6, 6]) && !odd.contains(&[1, 1, 1]));
    }

    #[test]
    fn listing_parses() {
        let l = q7_listing().unwrap();
        assert_eq!(l.len(), 27);
        assert_eq!(l[0].orders.len(), 3);
    }

    #[test]
    fn small_suites() {
        assert!(oracle_equivalence_exhaustive(5).unwrap().disagreements.is_empty());
        assert!(construct_failures(4).unwrap().is_empty());
        assert!(closure_orders(7).unwrap().is_empty());
        let s = oracle_equivalence_sampled(7, 50, 1).unwrap();
        assert_eq!(s.witnesses, 50);
        assert!(s.disagreements.is_empty());
    }
}
