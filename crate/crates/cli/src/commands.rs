//! The subcommands.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::thread;

use anyhow::{Context as _, Result};
use endo_dga::complex::window;
use endo_dga::homology::{random_boundary, random_cycle, second_component_divisible};
use endo_dga::products::pairing_table;
use endo_dga::theta::seq_product;
use endo_dga::{
    boundary_witness, certify_group, dense_matrix, differential, massey, verify_dd, Certification, Cochain,
    Context, Error, OracleAnswer, Solver, ThetaSeq,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::certificate::{recheck, Certificate};
use crate::{config_error, Command, ConfigArgs, Format, Output};

pub fn dispatch(ctx: &Context, command: &Command, cfg: &ConfigArgs) -> Result<Output> {
    let inputs = command.inputs(cfg.seed);
    let mut cert = Certificate::new(ctx, command.name(), inputs);
    let pretty = match command {
        Command::Verify { k, samples } => verify(ctx, &mut cert, k.values().collect(), *samples, cfg.seed)?,
        Command::Table { degrees } => table(ctx, &mut cert, degrees.values().collect())?,
        Command::Homology { n } => homology(ctx, &mut cert, *n)?,
        Command::Product { k, a, b } => product(ctx, &mut cert, *k, a.zip(*b))?,
        Command::Massey { i, j, mode } => massey_report(ctx, &mut cert, *i, *j, *mode)?,
        Command::Recheck { .. } => unreachable!("handled before a context is built"),
    };
    let text = match cfg.format {
        Format::Pretty => pretty,
        Format::Json => serde_json::to_string_pretty(&cert)? + "\n",
        Format::Csv => table_csv(&cert)?,
    };
    Ok(Output {
        text,
        passed: cert.passed,
    })
}

fn header(ctx: &Context, what: &str) -> String {
    format!(
        "{what}  p={} M={} N={} r={} scalars={}\n",
        ctx.p(),
        ctx.precision(),
        ctx.length(),
        ctx.unit(),
        ctx.scalars()
    )
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

#[derive(Clone, Debug, Serialize)]
struct PropertyResult {
    property: &'static str,
    twist: i64,
    passed: bool,
    checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    counterexample_seed: Option<u64>,
    detail: String,
}

impl PropertyResult {
    fn new(property: &'static str, twist: i64) -> Self {
        Self {
            property,
            twist,
            passed: true,
            checked: 0,
            counterexample_seed: None,
            detail: String::new(),
        }
    }

    fn record(&mut self, ok: bool, seed: u64) {
        self.checked += 1;
        if !ok {
            self.passed = false;
            self.counterexample_seed.get_or_insert(seed);
        }
    }
}

/// Seed for one sample, derived from the run seed, the property, the twist and the sample index.
pub fn sample_seed(seed: u64, tag: u64, k: i64, sample: usize) -> u64 {
    let mut h = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    h = (h ^ (k as u64)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    h = (h ^ sample as u64).wrapping_mul(0x94D0_49BB_1331_11EB);
    h ^ (h >> 31)
}

/// Reduced size for oracle cross-checks.
const ORACLE_MIN_PRECISION: u32 = 2;
const ORACLE_MIN_LENGTH: usize = 48;
const ORACLE_TRUSTED: usize = 9;
const PAIR_SUPPORT: usize = 8;
const MAX_REJECTIONS: usize = 10_000;

fn verify_twist(ctx: &Context, k: i64, samples: usize, seed: u64) -> Result<Vec<PropertyResult>> {
    let mut out = Vec::new();
    let limit = ctx.trusted_limit();

    let dd = verify_dd(ctx, k, samples, seed)?;
    let mut r = PropertyResult::new("d(d(x)) = 0", k);
    r.checked = dd.checked;
    r.passed = dd.passed();
    if let Some(f) = dd.failures.first() {
        r.counterexample_seed = Some(seed);
        r.detail = format!("degree {} sample {} residue {}", f.degree, f.sample, f.residue);
    }
    out.push(r);

    let mut r = PropertyResult::new("witness validity", k);
    for (slot, &n) in window(ctx, k).degrees.iter().enumerate() {
        for s in 0..samples {
            let sd = sample_seed(seed, 1 + slot as u64, k, s);
            let x = random_boundary(ctx, n, limit, &mut ChaCha8Rng::seed_from_u64(sd))?;
            let ok = match boundary_witness(&x)?.witness() {
                Some(w) => differential(w)? == x,
                None => false,
            };
            r.record(ok, sd);
        }
    }
    out.push(r);

    if k != 0 {
        let mut r = PropertyResult::new("cycle second components divisible", k);
        let n = (2 * ctx.p() as i64 - 2) * k;
        for s in 0..samples {
            let sd = sample_seed(seed, 10, k, s);
            let x = random_cycle(ctx, n, limit, true, &mut ChaCha8Rng::seed_from_u64(sd))?;
            r.record(second_component_divisible(&x)?, sd);
        }
        out.push(r);
    }

    let mut r = PropertyResult::new("index-zero multiplicativity", k);
    let (mut accepted, mut rejected) = (0, 0);
    while accepted < samples && rejected < MAX_REJECTIONS {
        let sd = sample_seed(seed, 20, k, accepted + rejected);
        let mut rng = ChaCha8Rng::seed_from_u64(sd);
        let a = sparse(ctx, k, &mut rng);
        let b = sparse(ctx, -k, &mut rng);
        match seq_product(&a, &b) {
            Ok(c) => {
                accepted += 1;
                r.record(c[0] == a[0] * b[0], sd);
            }
            Err(Error::NegativeTwistExponent { .. } | Error::UndefinedTwistExponent { .. }) => rejected += 1,
            Err(e) => return Err(e.into()),
        }
    }
    r.passed &= accepted == samples;
    r.detail = format!("pairs (k, -k), {rejected} rejected for undefined twist exponents");
    out.push(r);

    out.push(match oracle_context(ctx, k)? {
        Some(oracle_ctx) => oracle_agreement(&oracle_ctx, k, samples, seed)?,
        None => {
            let mut r = PropertyResult::new("oracle agreement", k);
            r.detail = "skipped: neighbouring twists exceed the precision".into();
            r
        }
    });
    Ok(out)
}

fn sparse<R: Rng>(ctx: &Context, k: i64, rng: &mut R) -> ThetaSeq {
    let mut s = ThetaSeq::zero(ctx, k);
    for m in 0..PAIR_SUPPORT {
        if rng.gen_bool(0.5) {
            s.set(m, ctx.int(rng.gen_range(0..ctx.modulus().value()) as i64));
        }
    }
    s
}

/// Smallest precision from 2 up to M that keeps v(t) + 1 below it for the twists t next to k.
fn oracle_context(ctx: &Context, k: i64) -> Result<Option<Context>> {
    let fits = |m: u32| (k - 1..=k + 1).all(|t| ctx.twist_valuation(t).is_none_or(|v| v < m));
    let Some(m) = (ORACLE_MIN_PRECISION..=ctx.precision()).find(|&m| fits(m)) else {
        return Ok(None);
    };
    Ok(Some(
        Context::builder(ctx.p())
            .precision(m)
            .unit(ctx.unit())
            .scalars(ctx.scalars())
            .build()?,
    ))
}

fn oracle_agreement(ctx: &Context, k: i64, samples: usize, seed: u64) -> Result<PropertyResult> {
    let n0 = (ctx.trusted_margin() + ORACLE_TRUSTED).max(ORACLE_MIN_LENGTH);
    let limit = n0 - ctx.trusted_margin();
    let degrees = window(ctx, k).degrees;
    let solvers = degrees
        .iter()
        .map(|&n| dense_matrix(ctx, n - 1, n0).map(Solver::new))
        .collect::<endo_dga::Result<Vec<_>>>()?;
    let mut r = PropertyResult::new("oracle agreement", k);
    let mut members = 0;
    for s in 0..samples {
        let sd = sample_seed(seed, 30, k, s);
        let mut rng = ChaCha8Rng::seed_from_u64(sd);
        let slot = s % degrees.len();
        let n = degrees[slot];
        let target = match s % 3 {
            0 => random_boundary(ctx, n, limit - 1, &mut rng)?,
            1 => random_cycle(ctx, n, limit, rng.gen_bool(0.5), &mut rng)?,
            _ => Cochain::random(ctx, n, limit, 2, &mut rng),
        };
        let constructive = boundary_witness(&target)?;
        let oracle = solvers[slot].solve(&target)?;
        let mut ok = constructive.is_boundary() == oracle.is_member();
        if let Some(w) = constructive.witness() {
            ok &= differential(w)? == target;
        }
        if let OracleAnswer::Witness(w) = &oracle {
            ok &= differential(w)? == target;
            members += 1;
        }
        r.record(ok, sd);
    }
    r.detail = format!("p={} M={} N0={n0}, {members} boundaries", ctx.p(), ctx.precision());
    Ok(r)
}

fn verify(ctx: &Context, cert: &mut Certificate, twists: Vec<i64>, samples: usize, seed: u64) -> Result<String> {
    for &k in &twists {
        if ctx.twist_valuation(k).is_some_and(|v| v >= ctx.precision()) {
            return Err(config_error(format!(
                "twist {k} has v(k) + 1 >= M = {}; raise --precision",
                ctx.precision()
            )));
        }
    }
    let per_twist: Vec<Result<Vec<PropertyResult>>> = thread::scope(|scope| {
        let handles: Vec<_> = twists
            .iter()
            .map(|&k| {
                let ctx = ctx.clone();
                scope.spawn(move || verify_twist(&ctx, k, samples, seed))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("verification thread panicked"))
            .collect()
    });
    let mut text = header(ctx, "verify");
    for results in per_twist {
        for r in results? {
            cert.passed &= r.passed;
            let _ = write!(text, "  {}  k={:<4} {:<36} {:>6} checked", mark(r.passed), r.twist, r.property, r.checked);
            if let Some(s) = r.counterexample_seed {
                let _ = write!(text, "  counterexample seed {s}");
            }
            if !r.detail.is_empty() {
                let _ = write!(text, "  ({})", r.detail);
            }
            text.push('\n');
            cert.results.push(serde_json::to_value(&r)?);
        }
    }
    let _ = writeln!(text, "{}", if cert.passed { "all properties hold" } else { "some properties failed" });
    Ok(text)
}

fn add_certification(cert: &mut Certificate, c: &Certification) -> Result<()> {
    for (target, witness) in &c.evidence {
        cert.witness(target, witness)?;
    }
    cert.passed &= c.certified();
    Ok(())
}

fn table(ctx: &Context, cert: &mut Certificate, degrees: Vec<i64>) -> Result<String> {
    let mut text = header(ctx, "table");
    let _ = writeln!(text, "  {:>6}  {:>4}  {:<10}  status", "n", "k", "H^n");
    for n in degrees {
        let c = certify_group(ctx, n).map_err(|e| match e {
            Error::PrecisionExhausted(msg) => config_error(format!("degree {n}: {msg}; raise --precision")),
            other => other.into(),
        })?;
        add_certification(cert, &c)?;
        let group = c.group.render(ctx.p());
        let status = if c.certified() { "certified" } else { "FAILED" };
        let _ = writeln!(text, "  {:>6}  {:>4}  {:<10}  {status}", n, c.twist, group);
        cert.results.push(json!({
            "degree": n,
            "twist": c.twist,
            "group": group,
            "certified": c.certified(),
        }));
    }
    Ok(text)
}

fn table_csv(cert: &Certificate) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["degree", "twist", "group", "certified"])?;
    for row in &cert.results {
        w.write_record([
            row["degree"].to_string(),
            row["twist"].to_string(),
            row["group"].as_str().unwrap_or_default().to_string(),
            row["certified"].to_string(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn homology(ctx: &Context, cert: &mut Certificate, n: i64) -> Result<String> {
    let c = certify_group(ctx, n)?;
    add_certification(cert, &c)?;
    let mut text = header(ctx, "homology");
    let _ = writeln!(text, "H^{n} = {}  (twist {})", c.group.render(ctx.p()), c.twist);
    for check in &c.checks {
        let _ = writeln!(text, "  {}  {}", mark(check.passed), check.name);
    }
    let valid = c.witnesses.iter().filter(|w| w.residue_zero).count();
    let _ = writeln!(text, "  witnesses: {valid}/{} map onto their targets", c.witnesses.len());
    cert.results.push(json!({
        "degree": n,
        "twist": c.twist,
        "group": c.group.render(ctx.p()),
        "certified": c.certified(),
        "checks": c.checks,
    }));
    Ok(text)
}

fn product(ctx: &Context, cert: &mut Certificate, k: i64, pair: Option<(u64, u64)>) -> Result<String> {
    if k == 0 {
        return Err(config_error("the pairing needs k != 0"));
    }
    let e = ctx.twist_valuation(k).expect("nonzero twist");
    if e >= ctx.precision() {
        return Err(config_error(format!("Z/p^{e} needs --precision above {e}")));
    }
    let size = ctx.p().pow(e);
    let step = 2 * ctx.p() as i64 - 2;
    let mut text = header(ctx, "product");
    let _ = writeln!(
        text,
        "H^{} x H^{} -> H^2,  Z/{size} x Z/{size} -> Q/Z_({}),  (a, b) -> a b / p^{}",
        -step * k + 1,
        step * k + 1,
        ctx.p(),
        2 * e
    );
    let table = pairing_table(ctx, k)?;
    match pair {
        Some((a, b)) => {
            if a >= size || b >= size {
                return Err(config_error(format!("--a and --b must be below {size}")));
            }
            let v = table[a as usize][b as usize];
            let _ = writeln!(text, "  {a} . {b} = {v}");
            cert.results.push(json!({"a": a, "b": b, "value": v.to_string(), "zero": v.is_zero()}));
        }
        None => {
            for (a, row) in table.iter().enumerate() {
                let cells: Vec<String> = row.iter().map(|v| format!("{:>8}", v.to_string())).collect();
                let _ = writeln!(text, "  {a:>4} | {}", cells.join(" "));
                for (b, v) in row.iter().enumerate() {
                    cert.results.push(json!({"a": a, "b": b, "value": v.to_string(), "zero": v.is_zero()}));
                }
            }
        }
    }
    Ok(text)
}

fn massey_report(
    ctx: &Context,
    cert: &mut Certificate,
    i: i64,
    j: i64,
    mode: endo_dga::RepresentativeMode,
) -> Result<String> {
    let m = massey(ctx, i, j, mode).map_err(|e| match e {
        Error::InvalidInput(msg) | Error::PrecisionExhausted(msg) => config_error(msg),
        other => other.into(),
    })?;
    let ab = differential(&m.u)?;
    let bc = differential(&m.v)?;
    cert.witness(&ab, &m.u)?;
    cert.witness(&bc, &m.v)?;
    let group = endo_dga::homology_group(ctx, m.class.degree)?.render(ctx.p());
    let mut text = header(ctx, "massey");
    let _ = writeln!(text, "<gamma_{i}, p, gamma_{j}>  representatives {mode:?}");
    let _ = writeln!(text, "  a = {}", m.a);
    let _ = writeln!(text, "  b = {}", m.b);
    let _ = writeln!(text, "  c = {}", m.c);
    let _ = writeln!(text, "  u = {}   d(u) = a.b: {}", m.u, mark(m.witness_checks[0].residue_zero));
    let _ = writeln!(text, "  v = {}   d(v) = b.c: {}", m.v, mark(m.witness_checks[1].residue_zero));
    let _ = writeln!(text, "  representative {}", m.representative);
    let _ = writeln!(text, "  class {}", m.class);
    let _ = writeln!(text, "  order {}", m.order.render(ctx.p()));
    let _ = writeln!(text, "  indeterminacy {}", m.indeterminacy.render(ctx.p()));
    cert.results.push(json!({
        "i": i,
        "j": j,
        "mode": mode,
        "degree": m.class.degree,
        "group": group,
        "class": m.class.to_string(),
        "invariant": format!("{:?}", m.class.invariant),
        "order": m.order.render(ctx.p()),
        "indeterminacy": m.indeterminacy.render(ctx.p()),
        "representative": m.representative.to_record(),
    }));
    Ok(text)
}

pub fn recheck_file(path: &Path, format: Format) -> Result<Output> {
    let bytes = fs::read(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    let cert: Certificate = serde_json::from_slice(&bytes)
        .with_context(|| format!("{} is not a certificate", path.display()))
        .map_err(|e| config_error(format!("{e:#}")))?;
    let r = recheck(&cert)?;
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&r)? + "\n",
        _ => format!(
            "recheck {}: {} witnesses, recorded {}, recomputed {}, {}\n",
            cert.command,
            r.checked,
            mark(cert.witness_checks.iter().all(|w| w.residue_zero)),
            mark(r.witnesses_valid),
            if r.reproduced { "reproduced" } else { "NOT reproduced" }
        ),
    };
    Ok(Output {
        text,
        passed: r.reproduced,
    })
}
