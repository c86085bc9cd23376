//! Command-line front end for the `trident` binary.
//!
//! Exit codes: `0` on success, `1` on a domain error (JSON error object on stderr) or a failed
//! oracle suite, `2` on a usage error.

use crate::abelian_fields::{d_field, d_pprime, e_field, f_field, f_pprime, splits_completely_in_f_over_e};
use crate::census::{census, compare_with_fixture, fixture_rows, TSV_HEADER};
use crate::congruence::{curve, CurveOptions};
use crate::error::{Result, TridentError};
use crate::macbeath::{census_line, Macbeath, TraceTriple, CENSUS_HEADER};
use crate::projective_linear::FqCtx;
use crate::triangle::{self, TriangleTriple};
use crate::verify;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::io::Write;

#[derive(Parser, Debug)]
#[command(name = "trident", version, about = "Congruence covers of hyperbolic triangle groups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Invariants of a triangle triple.
    #[command(subcommand)]
    Triple(TripleCmd),
    /// Trace fields `F`, `E`, `D` and their behaviour at a prime.
    Fields(FieldsArgs),
    /// The cover `X(a,b,c; P)`: group, `q`, genus, fields of moduli.
    Curve(CurveArgs),
    /// Trace triples over a finite field.
    #[command(subcommand)]
    Macbeath(MacbeathCmd),
    /// Census of `PSL2`/`PGL2`-Galois Belyi curves of small genus.
    Census(CensusArgs),
    /// Runs the brute-force verification suites and prints one line per suite.
    Oracle(OracleArgs),
}

#[derive(Subcommand, Debug)]
pub enum TripleCmd {
    /// Curvature, maximality, abelianization and the discriminant `beta`.
    Classify {
        a: String,
        b: String,
        c: String,
    },
}

#[derive(Args, Debug)]
pub struct FieldsArgs {
    /// Triple as `a,b,c`; `inf` is accepted.
    #[arg(long)]
    pub triple: String,
    /// Optional prime for the `p`-dependent fields.
    #[arg(long)]
    pub p: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Tsv,
    Pretty,
}

#[derive(Args, Debug)]
pub struct CurveArgs {
    #[arg(long)]
    pub triple: String,
    #[arg(long)]
    pub p: u64,
    /// Append explicit generators.
    #[arg(long)]
    pub with_generators: bool,
    /// Append the genera of the Borel and unipotent quotients.
    #[arg(long)]
    pub tower: bool,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Subcommand, Debug)]
pub enum MacbeathCmd {
    /// Classifies one trace triple.
    Classify {
        #[arg(long)]
        q: u64,
        /// Entries as integers or polynomial strings, comma separated.
        #[arg(long)]
        t: String,
    },
    /// Classifies every trace triple in `F_q^3` (TSV).
    Census {
        #[arg(long)]
        q: u64,
    },
}

#[derive(Args, Debug)]
pub struct CensusArgs {
    #[arg(long, default_value_t = 24)]
    pub gmax: u64,
    #[arg(long, value_enum, default_value = "tsv")]
    pub format: Format,
    /// Compare against the embedded table and print the differences to stderr.
    #[arg(long)]
    pub compare: bool,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    /// Skip the slow suites (sampled `q = 11, 13` and orbit counts at `q = 11, 13`).
    #[arg(long)]
    pub quick: bool,
}

fn parse_triple(s: &str) -> Result<TriangleTriple> {
    s.parse()
}

fn to_json<T: serde::Serialize>(x: &T) -> String {
    serde_json::to_string_pretty(x).expect("serializable")
}

fn triple_classify(a: &str, b: &str, c: &str) -> Result<String> {
    let t = parse_triple(&format!("{a},{b},{c}"))?;
    let class = triangle::classify(&t);
    let hyperbolic = class == triangle::Curvature::Hyperbolic;
    let maximal = if hyperbolic { Some(triangle::is_maximal(&t)?) } else { None };
    let ab = triangle::abelianization(&t);
    let (beta_pretty, beta_norm) = if hyperbolic && !t.has_infinity() {
        (Some(triangle::beta_pretty(&t)), triangle::beta_norm(&t).map(|x| x.to_string()))
    } else {
        (None, None)
    };
    Ok(to_json(&json!({
        "triple": t,
        "chi": triangle::chi(&t).to_string(),
        "class": class,
        "maximal": maximal,
        "abelianization": ab.invariants,
        "beta_pretty": beta_pretty,
        "beta_norm": beta_norm,
    })))
}

fn fields(args: &FieldsArgs) -> Result<String> {
    let t = parse_triple(&args.triple)?;
    let f = f_field(&t)?;
    let e = e_field(&t)?;
    let d = d_field(&t)?;
    let mut out = json!({
        "triple": t,
        "F": {"pretty": f.pretty(), "conductor": f.conductor(), "degree": f.degree()},
        "E": {"pretty": e.pretty(), "conductor": e.conductor(), "degree": e.degree()},
        "D": {"pretty": d.pretty(), "conductor": d.conductor(), "degree": d.degree()},
    });
    if let Some(p) = args.p {
        let dp = d_pprime(&t, p)?;
        let fp = f_pprime(&t, p)?;
        out["p"] = json!(p);
        out["D_pprime"] = json!(dp.pretty());
        out["D_pprime_frob"] = json!(dp.fixed_field_of_frobenius(p)?.pretty());
        out["F_pprime"] = json!(fp.pretty());
        out["frobenius_order_F_pprime"] = json!(fp.frobenius_order(p)?);
        if f.conductor() % p != 0 {
            out["splits_in_F_over_E"] = json!(splits_completely_in_f_over_e(&t, p)?);
        }
    }
    Ok(to_json(&out))
}

fn curve_cmd(args: &CurveArgs) -> Result<String> {
    let t = parse_triple(&args.triple)?;
    let c = curve(&t, args.p, CurveOptions { tower: args.tower, generators: args.with_generators })?;
    let r = &c.report;
    match args.format {
        Format::Json => Ok(to_json(r)),
        Format::Tsv | Format::Pretty => {
            let v = serde_json::to_value(r).expect("serializable");
            let sep = if args.format == Format::Tsv { "\t" } else { ": " };
            let obj = v.as_object().expect("object");
            Ok(obj.iter().map(|(k, v)| format!("{k}{sep}{}", plain(v))).collect::<Vec<_>>().join("\n"))
        }
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn parse_trace_triple(ctx: &std::sync::Arc<FqCtx>, s: &str) -> Result<TraceTriple> {
    TraceTriple::parse(ctx, s)
}

fn macbeath_cmd(cmd: &MacbeathCmd) -> Result<String> {
    match cmd {
        MacbeathCmd::Classify { q, t } => {
            let ctx = FqCtx::of_order(*q)?;
            let t = parse_trace_triple(&ctx, t)?;
            Ok(to_json(&Macbeath::new(&ctx).classify(&t)?))
        }
        MacbeathCmd::Census { q } => {
            let ctx = FqCtx::of_order(*q)?;
            let rows = Macbeath::new(&ctx).census()?;
            let mut out = vec![CENSUS_HEADER.to_string()];
            out.extend(rows.iter().map(|(_, cl)| census_line(cl)));
            Ok(out.join("\n"))
        }
    }
}

fn census_cmd(args: &CensusArgs) -> Result<String> {
    let rows = census(args.gmax)?;
    if args.compare {
        let cmp = compare_with_fixture(&rows, &fixture_rows()?);
        eprintln!("{}", to_json(&cmp));
    }
    match args.format {
        Format::Json => Ok(to_json(&rows)),
        _ => {
            let mut out = vec![TSV_HEADER.to_string()];
            out.extend(rows.iter().map(|r| r.to_tsv()));
            Ok(out.join("\n"))
        }
    }
}

fn line(ok: bool, name: &str, detail: String) -> String {
    format!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" })
}

fn oracle(args: &OracleArgs) -> Result<(String, bool)> {
    let mut lines = Vec::new();
    let mut all = true;
    let mut push = |ok: bool, name: &str, detail: String| {
        all &= ok;
        lines.push(line(ok, name, detail));
    };
    let r = verify::q7_report()?;
    push(
        r.mismatches.is_empty(),
        "macbeath_q7_listing",
        format!("{} triples, {} mismatches, dform disagreements {:?}", r.classified, r.mismatches.len(), r.dform_disagreements),
    );
    for q in verify::SMALL_Q {
        let slow = q >= 11;
        if slow && args.quick {
            continue;
        }
        let a = if slow {
            verify::oracle_equivalence_sampled(q, 1000, q)?
        } else {
            verify::oracle_equivalence_exhaustive(q)?
        };
        push(
            a.disagreements.is_empty(),
            &format!("closure_vs_classification_q{q}"),
            format!("{} triples, {} witnesses, {} disagreements", a.triples, a.witnesses, a.disagreements.len()),
        );
        let bad = verify::construct_failures(q)?;
        push(bad.is_empty(), &format!("construct_triple_q{q}"), format!("{} failures", bad.len()));
    }
    let qs: Vec<u64> = verify::SMALL_Q.into_iter().filter(|&q| !args.quick || q < 11).collect();
    let ob = verify::orbit_bounds(&qs)?;
    push(
        ob.violations.is_empty(),
        "orbit_count_bounds",
        format!("{} class triples, {} violations, attained {:?}", ob.class_triples, ob.violations.len(), ob.attained),
    );
    let gc = verify::table_genus_checks(13)?;
    let bad: Vec<&str> = gc.iter().filter(|c| !c.ok()).map(|c| c.row.as_str()).collect();
    push(bad.is_empty(), "table_genus", format!("{} rows, failing {bad:?}", gc.len()));
    Ok((lines.join("\n"), all))
}

fn init_threads() {
    if let Some(n) = std::env::var("TRIDENT_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        // a second initialisation only fails when a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Runs one parsed command; returns the text for stdout and whether it succeeded.
pub fn run(cli: &Cli) -> Result<(String, bool)> {
    init_threads();
    match &cli.command {
        Command::Triple(TripleCmd::Classify { a, b, c }) => Ok((triple_classify(a, b, c)?, true)),
        Command::Fields(a) => Ok((fields(a)?, true)),
        Command::Curve(a) => Ok((curve_cmd(a)?, true)),
        Command::Macbeath(m) => Ok((macbeath_cmd(m)?, true)),
        Command::Census(a) => Ok((census_cmd(a)?, true)),
        Command::Oracle(a) => oracle(a),
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn main_with_args<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok((out, ok)) => {
            let mut stdout = std::io::stdout().lock();
            let _ = writeln!(stdout, "{out}");
            if ok {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("{}", to_json(&e.to_json()));
            if matches!(e, TridentError::InvalidInput(_)) {
                2
            } else {
                1
            }
        }
    }
}
