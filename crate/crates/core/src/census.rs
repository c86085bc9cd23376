//! Census of `PSL2(F_q)`- and `PGL2(F_q)`-Galois Belyi curves of small genus.
//!
//! For each group `G` within the Hurwitz bound, every conjugacy class triple is searched for a
//! generating pair `(g1, g2)` with `g1` a class representative. Surviving rows get their genus,
//! the genus of the Borel quotient and the attached abelian fields.

use crate::abelian_fields::{d_pprime, e_field, f_field};
use crate::congruence::{p1_act, permutation_genus};
use crate::error::{Result, TridentError};
use crate::macbeath::{MatGroup, MAX_TABLE_GROUP};
use crate::projective_linear::{group_order, FqCtx, GroupKind, Mat};
use crate::triangle::TriangleTriple;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

/// Largest accepted genus bound.
pub const MAX_GENUS: u64 = 101;

/// The reference table, embedded at build time.
pub const TABLE_FIXTURE: &str = include_str!("../../../fixtures/table_9_1.tsv");

/// Header of the census TSV.
pub const TSV_HEADER: &str = "g\t(a,b,c)\tG\tarithmetic?\tg0\tF\tE\tD";

/// `84 (g - 1)`, the largest automorphism group of a curve of genus `g >= 2`.
pub fn hurwitz_group_bound(g: u64) -> u64 {
    84 * g.saturating_sub(1)
}

/// Arithmeticity of the triangle group, copied from the fixture; never computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Arithmetic {
    Yes,
    No,
    Unknown,
}

impl fmt::Display for Arithmetic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Arithmetic::Yes => "T",
            Arithmetic::No => "F",
            Arithmetic::Unknown => "?",
        })
    }
}

impl Serialize for Arithmetic {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// One curve of the census.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CensusRow {
    pub g: u64,
    pub triple: TriangleTriple,
    /// Group label; even `q` is written `PGL2`.
    #[serde(rename = "G")]
    pub group: String,
    pub arithmetic: Arithmetic,
    pub g0: u64,
    #[serde(rename = "F")]
    pub f: String,
    #[serde(rename = "E")]
    pub e: String,
    /// `D_{p'}` fixed by Frobenius at the characteristic of `G`.
    #[serde(rename = "D")]
    pub d: String,
}

impl CensusRow {
    /// Sort and lookup key `(g, triple, G)`.
    pub fn key(&self) -> (u64, TriangleTriple, String) {
        (self.g, self.triple, self.group.clone())
    }

    /// The `q` in the group label `PSL2(Fq)` or `PGL2(Fq)`.
    pub fn group_q(&self) -> Option<u64> {
        self.group.split("(F").nth(1)?.trim_end_matches(')').parse().ok()
    }

    pub fn to_tsv(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.g, self.triple, self.group, self.arithmetic, self.g0, self.f, self.e, self.d
        )
    }

    /// Parses one TSV line in [`TSV_HEADER`] order.
    pub fn from_tsv(line: &str) -> Result<Self> {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 8 {
            return Err(TridentError::InvalidInput(format!("expected 8 columns in {line:?}")));
        }
        let int = |s: &str| {
            s.parse::<u64>().map_err(|_| TridentError::InvalidInput(format!("bad integer {s:?}")))
        };
        let arithmetic = match cols[3] {
            "T" => Arithmetic::Yes,
            "F" => Arithmetic::No,
            _ => Arithmetic::Unknown,
        };
        Ok(CensusRow {
            g: int(cols[0])?,
            triple: cols[1].parse()?,
            group: cols[2].to_string(),
            arithmetic,
            g0: int(cols[4])?,
            f: cols[5].to_string(),
            e: cols[6].to_string(),
            d: cols[7].to_string(),
        })
    }
}

/// A generating triple realising a census row.
#[derive(Clone, Debug)]
pub struct Witness {
    pub ctx: Arc<FqCtx>,
    pub kind: GroupKind,
    pub q: u64,
    pub generators: [Mat; 3],
}

/// The reference rows.
pub fn fixture_rows() -> Result<Vec<CensusRow>> {
    TABLE_FIXTURE
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(CensusRow::from_tsv)
        .collect()
}

/// Groups `(kind, q)` of order at most `bound`; even `q` appears once.
pub fn candidate_groups(bound: u64) -> Vec<(GroupKind, u64)> {
    let mut out = Vec::new();
    // |PSL2(F_q)| >= (q^3 - q) / 2
    for q in (2u64..).take_while(|&q| (q * q * q - q) / 2 <= bound) {
        if crate::arith::prime_power(q).is_none() || group_order(GroupKind::Psl2, q) > bound {
            continue;
        }
        out.push((GroupKind::Psl2, q));
        if q % 2 == 1 && group_order(GroupKind::Pgl2, q) <= bound {
            out.push((GroupKind::Pgl2, q));
        }
    }
    out
}

fn is_hyperbolic(o: [u64; 3]) -> bool {
    // 1/a + 1/b + 1/c < 1
    o[1] * o[2] + o[0] * o[2] + o[0] * o[1] < o[0] * o[1] * o[2]
}

/// Genus of the Borel quotient from generators acting on `P^1(F_q)`.
pub fn borel_genus(ctx: &FqCtx, gens: &[Mat; 3]) -> Result<u64> {
    let n = ctx.q() as usize + 1;
    let perms: Vec<Vec<u32>> = gens.iter().map(|g| (0..n as u32).map(|x| p1_act(ctx, g, x)).collect()).collect();
    permutation_genus(n, &perms)
}

/// Genus from the action of `G` on itself by left multiplication.
pub fn regular_genus(g: &MatGroup, gens: [usize; 3]) -> Result<u64> {
    let perms: Vec<Vec<u32>> = gens
        .iter()
        .map(|&x| (0..g.order()).map(|y| g.mul(x, y) as u32).collect())
        .collect();
    permutation_genus(g.order(), &perms)
}

/// Every generating class triple of `G` with hyperbolic orders and genus in `[2, gmax]`,
/// as `(sorted orders, genus, witness indices)`, one per class triple.
pub fn generating_class_triples(g: &MatGroup, gmax: u64) -> Vec<([u64; 3], u64, [usize; 3])> {
    let n = g.order() as u64;
    let mut seen: BTreeSet<(u16, u16, u16)> = BTreeSet::new();
    let mut out = Vec::new();
    for x in g.class_reps() {
        let a = g.element_order(x);
        if a < 2 {
            continue;
        }
        for y in 0..g.order() {
            let b = g.element_order(y);
            if b < 2 {
                continue;
            }
            let z = g.inv(g.mul(x, y));
            let c = g.element_order(z);
            let mut o = [a, b, c];
            o.sort_unstable();
            if c < 2 || !is_hyperbolic(o) {
                continue;
            }
            // 2g - 2 = n - n/a - n/b - n/c
            let twice = n as i64 - (n / a + n / b + n / c) as i64 + 2;
            if twice < 4 || twice % 2 != 0 || (twice / 2) as u64 > gmax {
                continue;
            }
            let key = (g.class_of[x], g.class_of[y], g.class_of[z]);
            if seen.contains(&key) || !g.generates(&[x, y]) {
                continue;
            }
            seen.insert(key);
            out.push((o, (twice / 2) as u64, [x, y, z]));
        }
    }
    out
}

fn fields_for(t: &TriangleTriple, p: u64) -> Result<(String, String, String)> {
    let d = d_pprime(t, p)?.fixed_field_of_frobenius(p)?;
    Ok((f_field(t)?.pretty(), e_field(t)?.pretty(), d.pretty()))
}

/// Rows with witnesses, sorted by `(g, triple, G)`; arithmeticity from the fixture.
pub fn census_with_witnesses(gmax: u64) -> Result<Vec<(CensusRow, Witness)>> {
    if !(2..=MAX_GENUS).contains(&gmax) {
        return Err(TridentError::InvalidInput(format!("genus bound {gmax} outside 2..={MAX_GENUS}")));
    }
    let bound = hurwitz_group_bound(gmax);
    let groups = candidate_groups(bound);
    if let Some(&(kind, q)) = groups.iter().find(|&&(k, q)| group_order(k, q) > MAX_TABLE_GROUP) {
        return Err(TridentError::TooLarge {
            what: format!("census group {kind}(F{q})"),
            q,
            limit: MAX_TABLE_GROUP,
        });
    }
    let arithmetic: BTreeMap<_, _> = fixture_rows()?.into_iter().map(|r| (r.key(), r.arithmetic)).collect();
    let per_group: Vec<Result<Vec<(CensusRow, Witness)>>> = groups
        .par_iter()
        .map(|&(kind, q)| -> Result<Vec<(CensusRow, Witness)>> {
            let ctx = FqCtx::of_order(q)?;
            let g = MatGroup::new(&ctx, kind)?;
            let label = g.label();
            let mut rows = Vec::new();
            for (o, genus, w) in generating_class_triples(&g, gmax) {
                let t = TriangleTriple::finite(o[0], o[1], o[2])?;
                let gens = w.map(|i| g.elems[i]);
                let g0 = borel_genus(&ctx, &gens)?;
                let (f, e, d) = fields_for(&t, ctx.p())?;
                let mut row = CensusRow {
                    g: genus,
                    triple: t,
                    group: label.clone(),
                    arithmetic: Arithmetic::Unknown,
                    g0,
                    f,
                    e,
                    d,
                };
                row.arithmetic = arithmetic.get(&row.key()).copied().unwrap_or(Arithmetic::Unknown);
                rows.push((row, Witness { ctx: ctx.clone(), kind, q, generators: gens }));
            }
            Ok(rows)
        })
        .collect();
    let mut all = Vec::new();
    for r in per_group {
        all.extend(r?);
    }
    all.sort_by(|x, y| (x.0.key(), x.0.g0).cmp(&(y.0.key(), y.0.g0)));
    all.dedup_by(|x, y| x.0 == y.0);
    Ok(all)
}

/// All rows with `2 <= g <= gmax`.
pub fn census(gmax: u64) -> Result<Vec<CensusRow>> {
    Ok(census_with_witnesses(gmax)?.into_iter().map(|(r, _)| r).collect())
}

/// One disagreement between a computed row and the fixture.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CellMismatch {
    pub g: u64,
    pub triple: TriangleTriple,
    #[serde(rename = "G")]
    pub group: String,
    pub column: &'static str,
    pub computed: String,
    pub fixture: String,
}

/// Result of comparing computed rows against the fixture as multisets.
#[derive(Clone, Debug, Default, Serialize)]
pub struct FixtureComparison {
    pub missing: Vec<CensusRow>,
    pub extra: Vec<CensusRow>,
    pub mismatches: Vec<CellMismatch>,
}

impl FixtureComparison {
    pub fn is_exact(&self) -> bool {
        self.missing.is_empty() && self.extra.is_empty() && self.mismatches.is_empty()
    }
}

/// Matches rows on `(g, triple, G)` and compares `g0`, `F`, `E`, `D`; arithmeticity is passed
/// through and not compared.
pub fn compare_with_fixture(rows: &[CensusRow], fixture: &[CensusRow]) -> FixtureComparison {
    let mut out = FixtureComparison::default();
    let mut pool: Vec<Option<&CensusRow>> = fixture.iter().map(Some).collect();
    for r in rows {
        let slot = pool.iter_mut().find(|s| s.is_some_and(|f| f.key() == r.key()));
        let Some(slot) = slot else {
            out.extra.push(r.clone());
            continue;
        };
        let f = slot.take().expect("present");
        let cells = [
            ("g0", r.g0.to_string(), f.g0.to_string()),
            ("F", r.f.clone(), f.f.clone()),
            ("E", r.e.clone(), f.e.clone()),
            ("D", r.d.clone(), f.d.clone()),
        ];
        for (column, computed, fixture) in cells {
            if computed != fixture {
                out.mismatches.push(CellMismatch {
                    g: r.g,
                    triple: r.triple,
                    group: r.group.clone(),
                    column,
                    computed,
                    fixture,
                });
            }
        }
    }
    out.missing = pool.into_iter().flatten().cloned().collect();
    out
}
