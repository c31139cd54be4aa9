//! Degree windows of the complex, cochains, and the differential.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{Context, PadicFraction, PadicInt};
use crate::error::{Error, Result};
use crate::theta::{psi_post, psi_pre, psi_pre_rat, q_post, q_pre, ThetaSeq};

/// Component layout of a degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Shape {
    Zero,
    Seq,
    SeqSeq,
    SeqSeqRat,
    SeqRat,
    Rat,
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Shape::Zero => "0",
            Shape::Seq => "S",
            Shape::SeqSeq => "S+S",
            Shape::SeqSeqRat => "S+S+Q",
            Shape::SeqRat => "S+Q",
            Shape::Rat => "Q",
        };
        write!(f, "{s}")
    }
}

/// Window twist k and offset j with n = (2p-2)k + j, j in [-1, 2p-4].
pub fn locate(p: u64, n: i64) -> (i64, i64) {
    let period = 2 * p as i64 - 2;
    let k = (n + 1).div_euclid(period);
    (k, n - period * k)
}

pub fn shape_of(p: u64, n: i64) -> Shape {
    match locate(p, n) {
        (_, -1) => Shape::Seq,
        (0, 0) => Shape::SeqSeqRat,
        (_, 0) => Shape::SeqSeq,
        (_, 1) => Shape::SeqRat,
        (_, 2) => Shape::Rat,
        _ => Shape::Zero,
    }
}

/// The four nonzero degrees (2p-2)k-1 ..= (2p-2)k+2 of twist k.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComplexWindow {
    pub twist: i64,
    pub degrees: [i64; 4],
    pub shapes: [Shape; 4],
}

pub fn window(ctx: &Context, k: i64) -> ComplexWindow {
    let base = (2 * ctx.p() as i64 - 2) * k;
    let degrees = [base - 1, base, base + 1, base + 2];
    ComplexWindow {
        twist: k,
        degrees,
        shapes: degrees.map(|n| shape_of(ctx.p(), n)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Body {
    Zero,
    Seq(ThetaSeq),
    SeqSeq(ThetaSeq, ThetaSeq),
    SeqSeqRat(ThetaSeq, ThetaSeq, PadicFraction),
    SeqRat(ThetaSeq, PadicFraction),
    Rat(PadicFraction),
}

impl Body {
    pub fn shape(&self) -> Shape {
        match self {
            Body::Zero => Shape::Zero,
            Body::Seq(..) => Shape::Seq,
            Body::SeqSeq(..) => Shape::SeqSeq,
            Body::SeqSeqRat(..) => Shape::SeqSeqRat,
            Body::SeqRat(..) => Shape::SeqRat,
            Body::Rat(..) => Shape::Rat,
        }
    }

    pub fn sequences(&self) -> Vec<&ThetaSeq> {
        match self {
            Body::Zero | Body::Rat(_) => vec![],
            Body::Seq(a) | Body::SeqRat(a, _) => vec![a],
            Body::SeqSeq(a, b) | Body::SeqSeqRat(a, b, _) => vec![a, b],
        }
    }

    pub fn rational(&self) -> Option<&PadicFraction> {
        match self {
            Body::SeqSeqRat(_, _, x) | Body::SeqRat(_, x) | Body::Rat(x) => Some(x),
            _ => None,
        }
    }

    fn map(
        &self,
        f: impl Fn(&ThetaSeq) -> ThetaSeq,
        g: impl Fn(&PadicFraction) -> PadicFraction,
    ) -> Body {
        match self {
            Body::Zero => Body::Zero,
            Body::Seq(a) => Body::Seq(f(a)),
            Body::SeqSeq(a, b) => Body::SeqSeq(f(a), f(b)),
            Body::SeqSeqRat(a, b, x) => Body::SeqSeqRat(f(a), f(b), g(x)),
            Body::SeqRat(a, x) => Body::SeqRat(f(a), g(x)),
            Body::Rat(x) => Body::Rat(g(x)),
        }
    }

    fn zip(
        &self,
        other: &Body,
        f: impl Fn(&ThetaSeq, &ThetaSeq) -> ThetaSeq,
        g: impl Fn(&PadicFraction, &PadicFraction) -> PadicFraction,
    ) -> Body {
        match (self, other) {
            (Body::Zero, Body::Zero) => Body::Zero,
            (Body::Seq(a), Body::Seq(c)) => Body::Seq(f(a, c)),
            (Body::SeqSeq(a, b), Body::SeqSeq(c, d)) => Body::SeqSeq(f(a, c), f(b, d)),
            (Body::SeqSeqRat(a, b, x), Body::SeqSeqRat(c, d, y)) => {
                Body::SeqSeqRat(f(a, c), f(b, d), g(x, y))
            }
            (Body::SeqRat(a, x), Body::SeqRat(c, y)) => Body::SeqRat(f(a, c), g(x, y)),
            (Body::Rat(x), Body::Rat(y)) => Body::Rat(g(x, y)),
            _ => panic!("combining cochains of different shapes"),
        }
    }
}

/// An element of C^n.
#[derive(Clone, PartialEq, Eq)]
pub struct Cochain {
    ctx: Context,
    degree: i64,
    body: Body,
}

impl Cochain {
    /// Checks the body against the shape and twist of the degree.
    pub fn new(ctx: &Context, degree: i64, body: Body) -> Result<Self> {
        let expected = shape_of(ctx.p(), degree);
        let found = body.shape();
        if expected != found {
            return Err(Error::ShapeMismatch {
                degree,
                expected,
                found,
            });
        }
        let (k, _) = locate(ctx.p(), degree);
        for s in body.sequences() {
            if s.twist() != k {
                return Err(Error::TwistMismatch {
                    expected: k,
                    found: s.twist(),
                });
            }
            if s.len() != ctx.length() {
                return Err(Error::LengthMismatch {
                    expected: ctx.length(),
                    found: s.len(),
                });
            }
        }
        if let Some(x) = body.rational() {
            if x.base() != ctx.modulus() {
                return Err(Error::InvalidInput("fraction over a different modulus".into()));
            }
        }
        Ok(Self {
            ctx: ctx.clone(),
            degree,
            body,
        })
    }

    pub fn zero(ctx: &Context, degree: i64) -> Self {
        let (k, _) = locate(ctx.p(), degree);
        let s = || ThetaSeq::zero(ctx, k);
        let q = ctx.fraction_zero();
        let body = match shape_of(ctx.p(), degree) {
            Shape::Zero => Body::Zero,
            Shape::Seq => Body::Seq(s()),
            Shape::SeqSeq => Body::SeqSeq(s(), s()),
            Shape::SeqSeqRat => Body::SeqSeqRat(s(), s(), q),
            Shape::SeqRat => Body::SeqRat(s(), q),
            Shape::Rat => Body::Rat(q),
        };
        Self {
            ctx: ctx.clone(),
            degree,
            body,
        }
    }

    /// Cochain with uniform sequence coefficients below `support` and a random fraction of exponent at most `max_exponent`.
    pub fn random<R: Rng + ?Sized>(
        ctx: &Context,
        degree: i64,
        support: usize,
        max_exponent: u32,
        rng: &mut R,
    ) -> Self {
        let (k, _) = locate(ctx.p(), degree);
        let mut s = || ThetaSeq::random(ctx, k, support, rng);
        let body = match shape_of(ctx.p(), degree) {
            Shape::Zero => Body::Zero,
            Shape::Seq => Body::Seq(s()),
            Shape::SeqSeq => Body::SeqSeq(s(), s()),
            Shape::SeqSeqRat => {
                let (a, b) = (s(), s());
                Body::SeqSeqRat(a, b, random_fraction(ctx, max_exponent, rng))
            }
            Shape::SeqRat => {
                let a = s();
                Body::SeqRat(a, random_fraction(ctx, max_exponent, rng))
            }
            Shape::Rat => Body::Rat(random_fraction(ctx, max_exponent, rng)),
        };
        Self {
            ctx: ctx.clone(),
            degree,
            body,
        }
    }

    pub fn ctx(&self) -> &Context {
        &self.ctx
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn twist(&self) -> i64 {
        locate(self.ctx.p(), self.degree).0
    }

    pub fn offset(&self) -> i64 {
        locate(self.ctx.p(), self.degree).1
    }

    pub fn body(&self) -> &Body {
        &self.body
    }

    pub fn into_body(self) -> Body {
        self.body
    }

    pub fn shape(&self) -> Shape {
        self.body.shape()
    }

    pub fn is_zero(&self) -> bool {
        self.body.sequences().iter().all(|s| s.is_zero())
            && self.body.rational().is_none_or(PadicFraction::is_zero)
    }

    /// Highest nonzero sequence index over all components.
    pub fn top(&self) -> Option<usize> {
        self.body.sequences().iter().filter_map(|s| s.top()).max()
    }

    pub fn scale(&self, s: PadicInt) -> Self {
        let k = s.residue() as i64;
        self.with_body(self.body.map(|a| a.scale(s), |x| x.mul_int(k)))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check(other);
        self.with_body(self.body.zip(&other.body, |a, b| a + b, |x, y| *x + *y))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check(other);
        self.with_body(self.body.zip(&other.body, |a, b| a - b, |x, y| *x - *y))
    }

    pub fn neg(&self) -> Self {
        self.with_body(self.body.map(|a| -a, |x| -*x))
    }

    fn with_body(&self, body: Body) -> Self {
        Self {
            ctx: self.ctx.clone(),
            degree: self.degree,
            body,
        }
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.degree, other.degree, "combining cochains of different degrees");
    }

    /// Size of the largest coefficient: 0 for zero, p^(M - v) for a sequence entry of valuation v,
    /// p^(M + e) for a fraction with denominator p^e.
    pub fn residue_norm(&self) -> u64 {
        let p = self.ctx.p();
        let m = self.ctx.precision();
        let mut worst = 0u64;
        for s in self.body.sequences() {
            for c in s.coeffs() {
                if let Some(v) = c.valuation().finite() {
                    worst = worst.max(p.pow(m - v));
                }
            }
        }
        if let Some(x) = self.body.rational() {
            if !x.is_zero() {
                let size = match x.valuation() {
                    Some(v) if v < 0 => p.pow(m + v.unsigned_abs() as u32),
                    Some(v) => p.pow(m - v as u32),
                    None => 0,
                };
                worst = worst.max(size);
            }
        }
        worst
    }
}

/// Plain-data form of a cochain: residues of each sequence up to its last nonzero entry,
/// and the rational component as (numerator residue, exponent).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CochainRecord {
    pub degree: i64,
    pub sequences: Vec<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rational: Option<(u64, u32)>,
}

impl Cochain {
    pub fn to_record(&self) -> CochainRecord {
        let sequences = self
            .body
            .sequences()
            .iter()
            .map(|s| {
                let end = s.top().map_or(0, |t| t + 1);
                s.coeffs()[..end].iter().map(PadicInt::residue).collect()
            })
            .collect();
        let rational = self
            .body
            .rational()
            .map(|x| (x.mantissa().residue(), x.exponent()));
        CochainRecord {
            degree: self.degree,
            sequences,
            rational,
        }
    }

    pub fn from_record(ctx: &Context, record: &CochainRecord) -> Result<Self> {
        let n = record.degree;
        let (k, _) = locate(ctx.p(), n);
        let mut seqs = Vec::with_capacity(record.sequences.len());
        for values in &record.sequences {
            if values.len() > ctx.length() {
                return Err(Error::LengthMismatch {
                    expected: ctx.length(),
                    found: values.len(),
                });
            }
            let mut s = ThetaSeq::zero(ctx, k);
            for (m, &v) in values.iter().enumerate() {
                if v >= ctx.modulus().value() {
                    return Err(Error::InvalidInput(format!("residue {v} out of range")));
                }
                s.set(m, ctx.int(v as i64));
            }
            seqs.push(s);
        }
        let q = match record.rational {
            Some((num, e)) => Some(ctx.fraction(
                i64::try_from(num).map_err(|_| Error::InvalidInput("numerator out of range".into()))?,
                e,
            )?),
            None => None,
        };
        let mut seqs = seqs.into_iter();
        let body = match (shape_of(ctx.p(), n), seqs.next(), seqs.next(), seqs.next(), q) {
            (Shape::Zero, None, None, None, None) => Body::Zero,
            (Shape::Seq, Some(a), None, None, None) => Body::Seq(a),
            (Shape::SeqSeq, Some(a), Some(b), None, None) => Body::SeqSeq(a, b),
            (Shape::SeqSeqRat, Some(a), Some(b), None, Some(x)) => Body::SeqSeqRat(a, b, x),
            (Shape::SeqRat, Some(a), None, None, Some(x)) => Body::SeqRat(a, x),
            (Shape::Rat, None, None, None, Some(x)) => Body::Rat(x),
            (shape, ..) => {
                return Err(Error::InvalidInput(format!(
                    "record does not match shape {shape} of degree {n}"
                )))
            }
        };
        Cochain::new(ctx, n, body)
    }
}

impl fmt::Display for Cochain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[deg {}] ", self.degree)?;
        match &self.body {
            Body::Zero => write!(f, "0"),
            Body::Seq(a) => write!(f, "({a})"),
            Body::SeqSeq(a, b) => write!(f, "({a}, {b})"),
            Body::SeqSeqRat(a, b, x) => write!(f, "({a}, {b}, {x})"),
            Body::SeqRat(a, x) => write!(f, "({a}, {x})"),
            Body::Rat(x) => write!(f, "({x})"),
        }
    }
}

impl fmt::Debug for Cochain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub fn random_fraction<R: Rng + ?Sized>(ctx: &Context, max_exponent: u32, rng: &mut R) -> PadicFraction {
    let e = rng.gen_range(0..=max_exponent);
    let bound = ctx.modulus().value() as i64 * ctx.p().pow(e) as i64;
    ctx.fraction(rng.gen_range(0..bound), e)
        .expect("exponent within cap")
}

/// The differential C^n -> C^(n+1).
pub fn differential(x: &Cochain) -> Result<Cochain> {
    let ctx = &x.ctx;
    let n = x.degree;
    let k = x.twist();
    let body = match &x.body {
        Body::Seq(a) => {
            let (pre, post) = (psi_pre(a)?, psi_post(a)?);
            if k == 0 {
                Body::SeqSeqRat(pre, post, ctx.fraction_zero())
            } else {
                Body::SeqSeq(pre, post)
            }
        }
        Body::SeqSeq(a, b) => {
            Body::SeqRat(&psi_post(a)? - &psi_pre(b)?, q_post(b))
        }
        Body::SeqSeqRat(a, b, q) => {
            Body::SeqRat(&psi_post(a)? - &psi_pre(b)?, q_post(b) - q_pre(q))
        }
        Body::SeqRat(a, y) => Body::Rat(q_post(a) + psi_pre_rat(ctx, k, y)?),
        Body::Rat(_) | Body::Zero => return Ok(Cochain::zero(ctx, n + 1)),
    };
    Cochain::new(ctx, n + 1, body)
}

pub fn is_cycle(x: &Cochain) -> Result<bool> {
    Ok(differential(x)?.is_zero())
}

/// A sample whose double differential did not vanish.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DdFailure {
    pub degree: i64,
    pub sample: usize,
    pub residue: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub twist: i64,
    pub samples: usize,
    pub seed: u64,
    pub degrees: Vec<i64>,
    pub checked: usize,
    pub max_residue: u64,
    pub failures: Vec<DdFailure>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.max_residue == 0
    }
}

/// Applies d twice to random full-length cochains in every degree of window k.
pub fn verify_dd(ctx: &Context, k: i64, samples: usize, seed: u64) -> Result<VerificationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let degrees = window(ctx, k).degrees.to_vec();
    let mut report = VerificationReport {
        twist: k,
        samples,
        seed,
        degrees: degrees.clone(),
        checked: 0,
        max_residue: 0,
        failures: Vec::new(),
    };
    for &n in &degrees {
        for sample in 0..samples {
            let x = Cochain::random(ctx, n, ctx.length(), ctx.precision(), &mut rng);
            let dd = differential(&differential(&x)?)?;
            let residue = dd.residue_norm();
            report.checked += 1;
            report.max_residue = report.max_residue.max(residue);
            if residue != 0 {
                report.failures.push(DdFailure {
                    degree: n,
                    sample,
                    residue,
                });
            }
        }
    }
    Ok(report)
}
