//! Cycles, boundary witnesses, class invariants and the homology groups.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{Context, PadicFraction, PadicInt};
use crate::complex::{differential, is_cycle, locate, random_fraction, shape_of, Body, Cochain, Shape};
use crate::error::{Error, Result};
use crate::theta::{psi_pre, ThetaSeq};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupDescriptor {
    Zero,
    FreeLocalRankOne,
    CyclicPPower(u32),
    RationalsModLocal,
}

impl GroupDescriptor {
    pub fn render(&self, p: u64) -> String {
        match self {
            GroupDescriptor::Zero => "0".into(),
            GroupDescriptor::FreeLocalRankOne => format!("Z_({p})"),
            GroupDescriptor::CyclicPPower(e) => format!("Z/{}", p.pow(*e)),
            GroupDescriptor::RationalsModLocal => format!("Q/Z_({p})"),
        }
    }
}

/// Why a cochain is not a boundary.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Obstruction {
    NotCycle,
    /// Degree -1 of a window: the differential is injective on trusted support.
    Nonzero,
    /// Degree 0: the index-zero coefficient survives.
    IndexZeroNonzero { value: u64 },
    /// Degree (2p-2)k+1: the index-zero coefficient is not divisible by p^required.
    IndexZeroNotDivisible { value: u64, required: u32 },
    /// Degree 2: the value is not in Z_(p).
    NotIntegral { exponent: u32 },
    /// A cycle of the mod p^M model with no counterpart over Z_(p).
    PrecisionArtifact { reason: String },
}

impl fmt::Display for Obstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Obstruction::NotCycle => write!(f, "not a cycle"),
            Obstruction::Nonzero => write!(f, "nonzero cochain in an injective degree"),
            Obstruction::IndexZeroNonzero { value } => {
                write!(f, "index-zero coefficient {value} is nonzero")
            }
            Obstruction::IndexZeroNotDivisible { value, required } => {
                write!(f, "index-zero coefficient {value} is not divisible by p^{required}")
            }
            Obstruction::NotIntegral { exponent } => {
                write!(f, "rational value has denominator p^{exponent}")
            }
            Obstruction::PrecisionArtifact { reason } => write!(f, "precision artifact: {reason}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoundaryCheck {
    Boundary(Cochain),
    NotBoundary(Obstruction),
}

impl BoundaryCheck {
    pub fn is_boundary(&self) -> bool {
        matches!(self, BoundaryCheck::Boundary(_))
    }

    pub fn witness(&self) -> Option<&Cochain> {
        match self {
            BoundaryCheck::Boundary(w) => Some(w),
            BoundaryCheck::NotBoundary(_) => None,
        }
    }
}

fn check_trusted(x: &Cochain) -> Result<()> {
    let limit = x.ctx().trusted_limit();
    match x.top() {
        Some(index) if index >= limit => Err(Error::UntrustedSupport { index, limit }),
        _ => Ok(()),
    }
}

/// Solves psi_pre(c)_m = target_m for every m >= 1, with c vanishing from the first pivot
/// at or above the support of the target.
pub fn solve_pre_tail(target: &ThetaSeq) -> Result<ThetaSeq> {
    let ctx = target.ctx();
    let k = target.twist();
    let lambda = ctx.twist_scalar(k)?;
    let mut c = ThetaSeq::zero(ctx, k);
    let top = target.top().unwrap_or(0);
    let l = ctx.pivot_at_or_above(top).ok_or(Error::UntrustedSupport {
        index: top,
        limit: ctx.trusted_limit(),
    })?;
    for m in (1..=l).rev() {
        let above = if m < l { c[m] } else { ctx.zero() };
        c.set(m - 1, target[m] - above * (ctx.index_factor(m) + lambda));
    }
    Ok(c)
}

fn boundary(x: &Cochain, w: Cochain) -> Result<BoundaryCheck> {
    if differential(&w)? != *x {
        return Err(Error::WitnessCheckFailed(x.degree()));
    }
    Ok(BoundaryCheck::Boundary(w))
}

fn not_boundary(o: Obstruction) -> Result<BoundaryCheck> {
    Ok(BoundaryCheck::NotBoundary(o))
}

fn artifact(reason: impl Into<String>) -> Result<BoundaryCheck> {
    not_boundary(Obstruction::PrecisionArtifact {
        reason: reason.into(),
    })
}

/// A cochain w with d(w) = x, or the obstruction; every witness is re-checked before it is returned.
pub fn boundary_witness(x: &Cochain) -> Result<BoundaryCheck> {
    check_trusted(x)?;
    if !is_cycle(x)? {
        return not_boundary(Obstruction::NotCycle);
    }
    let ctx = x.ctx();
    let n = x.degree();
    let k = x.twist();
    let source = |body| Cochain::new(ctx, n - 1, body);
    match x.body() {
        Body::Zero => boundary(x, Cochain::zero(ctx, n - 1)),
        Body::Seq(_) => {
            if x.is_zero() {
                boundary(x, Cochain::zero(ctx, n - 1))
            } else {
                not_boundary(Obstruction::Nonzero)
            }
        }
        Body::SeqSeqRat(a, _, _) => {
            // Cycles are (a, 0, 0); d(c) = (psi_pre c, 0, 0) and psi_pre c has index zero 0.
            if !a[0].is_zero() {
                return not_boundary(Obstruction::IndexZeroNonzero {
                    value: a[0].residue(),
                });
            }
            boundary(x, source(Body::Seq(solve_pre_tail(a)?))?)
        }
        Body::SeqSeq(a, b) => {
            let v = ctx.twist_valuation(k).expect("nonzero twist");
            let shift = ctx.precision() - v;
            let mut star = ThetaSeq::zero(ctx, k);
            for m in 0..b.len() {
                let q = ctx.div_twist(k, b[m]).ok_or_else(|| {
                    Error::PrecisionExhausted(format!(
                        "coefficient {m} of the second component is not divisible by the twist scalar"
                    ))
                })?;
                star.set(m, q);
            }
            let delta = a - &psi_pre(&star)?;
            if !delta[0].is_zero() {
                return artifact(format!(
                    "index-zero defect {} is killed by p^{v} but not divisible by p^{}",
                    delta[0].residue(),
                    ctx.precision()
                ));
            }
            let mut reduced = ThetaSeq::zero(ctx, k);
            for m in 1..delta.len() {
                let q = delta[m].div_p_power(shift).ok_or_else(|| {
                    Error::PrecisionExhausted(format!("defect at index {m} not divisible by p^{shift}"))
                })?;
                reduced.set(m, q);
            }
            let correction = solve_pre_tail(&reduced)?.scale(ctx.int(1).mul_p_power(shift));
            boundary(x, source(Body::Seq(&star + &correction))?)
        }
        Body::SeqRat(c, y) if k == 0 => {
            // d(0, b, x') = (-psi_pre b, b_0 - x').
            let b = -&solve_pre_tail(c)?;
            let q = PadicFraction::from_int(b[0]) - *y;
            boundary(x, source(Body::SeqSeqRat(ThetaSeq::zero(ctx, k), b, q))?)
        }
        Body::SeqRat(c, y) => {
            if !y.is_zero() {
                return artifact(format!("rational component {y} is killed by the twist scalar"));
            }
            let v = ctx.twist_valuation(k).expect("nonzero twist");
            let Some(a0_shift) = ctx.div_twist(k, c[0]) else {
                return not_boundary(Obstruction::IndexZeroNotDivisible {
                    value: c[0].residue(),
                    required: v,
                });
            };
            let mut b = ThetaSeq::zero(ctx, k);
            let l = ctx
                .pivot_at_or_above(c.top().unwrap_or(0))
                .ok_or(Error::UntrustedSupport {
                    index: c.top().unwrap_or(0),
                    limit: ctx.trusted_limit(),
                })?;
            b.set(l - 1, -c[l]);
            for q in (1..l).rev() {
                b.set(q - 1, -(ctx.index_factor(q) * b[q]) - c[q]);
            }
            let mut a = b.clone();
            a.set(0, b[0] + a0_shift);
            boundary(x, source(Body::SeqSeq(a, b))?)
        }
        Body::Rat(y) if k == 0 => match y.to_int() {
            Some(v) => {
                let a = ThetaSeq::basis(ctx, 0, 0).scale(v);
                boundary(x, source(Body::SeqRat(a, ctx.fraction_zero()))?)
            }
            None => not_boundary(Obstruction::NotIntegral {
                exponent: y.exponent(),
            }),
        },
        Body::Rat(y) => {
            let v = ctx.twist_valuation(k).expect("nonzero twist");
            let lifted = y
                .div_p_power(v)
                .map_err(|e| Error::PrecisionExhausted(e.to_string()))?;
            let unit = ctx.twist_unit_at(k, ctx.precision() + lifted.exponent())?;
            let pre = lifted.mul_scalar(unit.inverse().expect("unit"));
            boundary(x, source(Body::SeqRat(ThetaSeq::zero(ctx, k), pre))?)
        }
    }
}

/// Canonical invariant of a homology class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClassInvariant {
    Zero,
    /// Degree 0: the index-zero coefficient in Z_(p), modelled mod p^M.
    Local(PadicInt),
    /// Degree (2p-2)k+1: the index-zero coefficient mod p^exponent.
    Torsion { value: u64, exponent: u32 },
    /// Degree 2: a class in Q/Z_(p).
    RationalModLocal(PadicFraction),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomologyClass {
    pub p: u64,
    pub degree: i64,
    pub invariant: ClassInvariant,
}

impl fmt::Display for HomologyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.invariant {
            ClassInvariant::Zero => write!(f, "0 in H^{}", self.degree),
            ClassInvariant::Local(v) => write!(f, "{v} in Z_({}) = H^{}", self.p, self.degree),
            ClassInvariant::Torsion { value, exponent } => write!(
                f,
                "{value} in Z/{} = H^{}",
                self.p.pow(*exponent),
                self.degree
            ),
            ClassInvariant::RationalModLocal(x) => {
                write!(f, "{x} in Q/Z_({}) = H^{}", self.p, self.degree)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ClassOrder {
    /// Order p^e.
    PPower(u32),
    Infinite,
}

impl ClassOrder {
    pub fn render(&self, p: u64) -> String {
        match self {
            ClassOrder::PPower(e) => p.pow(*e).to_string(),
            ClassOrder::Infinite => "infinite".into(),
        }
    }
}

pub fn class_of(x: &Cochain) -> Result<HomologyClass> {
    check_trusted(x)?;
    if !is_cycle(x)? {
        return Err(Error::NotCycle(x.degree()));
    }
    let ctx = x.ctx();
    let k = x.twist();
    let make = |invariant| HomologyClass {
        p: ctx.p(),
        degree: x.degree(),
        invariant,
    };
    let invariant = match x.body() {
        Body::SeqSeqRat(a, _, _) => ClassInvariant::Local(a[0]),
        Body::SeqRat(c, y) if k != 0 => {
            if !y.is_zero() {
                return Err(Error::PrecisionExhausted(format!(
                    "rational component {y} of a cycle in degree {} has no integral counterpart",
                    x.degree()
                )));
            }
            let exponent = ctx.twist_valuation(k).expect("nonzero twist");
            if exponent >= ctx.precision() {
                return Err(Error::PrecisionExhausted(format!(
                    "group exponent {exponent} needs precision above {}",
                    ctx.precision()
                )));
            }
            let value = c[0].residue() % ctx.p().pow(exponent);
            if value == 0 {
                ClassInvariant::Zero
            } else {
                ClassInvariant::Torsion { value, exponent }
            }
        }
        Body::Rat(y) if k == 0 => {
            let frac = y.fractional_part();
            if frac.is_zero() {
                ClassInvariant::Zero
            } else {
                ClassInvariant::RationalModLocal(frac)
            }
        }
        _ => match boundary_witness(x)? {
            BoundaryCheck::Boundary(_) => ClassInvariant::Zero,
            BoundaryCheck::NotBoundary(o) => {
                return Err(Error::PrecisionExhausted(format!(
                    "cycle in degree {} is not a boundary of the model: {o}",
                    x.degree()
                )))
            }
        },
    };
    let invariant = match invariant {
        ClassInvariant::Local(v) if v.is_zero() => ClassInvariant::Zero,
        other => other,
    };
    Ok(make(invariant))
}

pub fn class_order(c: &HomologyClass) -> ClassOrder {
    match &c.invariant {
        ClassInvariant::Zero => ClassOrder::PPower(0),
        ClassInvariant::Local(_) => ClassOrder::Infinite,
        ClassInvariant::Torsion { value, exponent } => {
            let v = crate::arith::int_valuation(c.p, *value as i64);
            ClassOrder::PPower(exponent - v.min(*exponent))
        }
        ClassInvariant::RationalModLocal(x) => ClassOrder::PPower(x.exponent()),
    }
}

/// Closed-form group in degree n.
pub fn homology_group(ctx: &Context, n: i64) -> Result<GroupDescriptor> {
    let (k, j) = locate(ctx.p(), n);
    Ok(match (k, j) {
        (0, 0) => GroupDescriptor::FreeLocalRankOne,
        (0, 2) => GroupDescriptor::RationalsModLocal,
        (0, _) => GroupDescriptor::Zero,
        (_, 1) => {
            let e = ctx.twist_valuation(k).expect("nonzero twist");
            if e >= ctx.precision() {
                return Err(Error::PrecisionExhausted(format!(
                    "H^{n} = Z/p^{e} needs precision above {}",
                    ctx.precision()
                )));
            }
            GroupDescriptor::CyclicPPower(e)
        }
        _ => GroupDescriptor::Zero,
    })
}

/// Uses the closed form for H^(2p-2)i and H^(2p-2)j, which are both zero for i, j != 0.
pub fn indeterminacy(ctx: &Context, i: i64, j: i64) -> Result<GroupDescriptor> {
    let step = 2 * ctx.p() as i64 - 2;
    let gi = homology_group(ctx, step * j)?;
    let gj = homology_group(ctx, step * i)?;
    if gi == GroupDescriptor::Zero && gj == GroupDescriptor::Zero {
        Ok(GroupDescriptor::Zero)
    } else {
        Err(Error::InvalidInput(format!(
            "indeterminacy needs i, j != 0, got ({i}, {j})"
        )))
    }
}

/// Whether every trusted second-component coefficient of a cycle in degree (2p-2)k, k != 0,
/// is divisible by p^(v(k)+1).
pub fn second_component_divisible(x: &Cochain) -> Result<bool> {
    let ctx = x.ctx();
    let Body::SeqSeq(_, b) = x.body() else {
        return Err(Error::ShapeMismatch {
            degree: x.degree(),
            expected: Shape::SeqSeq,
            found: x.shape(),
        });
    };
    if !is_cycle(x)? {
        return Err(Error::NotCycle(x.degree()));
    }
    let v = ctx.twist_valuation(x.twist()).expect("nonzero twist");
    Ok(b.coeffs()[..ctx.trusted_limit()]
        .iter()
        .all(|c| c.div_p_power(v).is_some()))
}

/// A random cycle with sequence support below `support`. With `artifacts`, cycles of the
/// mod p^M model that do not lift to Z_(p) are mixed in.
pub fn random_cycle<R: Rng + ?Sized>(
    ctx: &Context,
    n: i64,
    support: usize,
    artifacts: bool,
    rng: &mut R,
) -> Result<Cochain> {
    let (k, j) = locate(ctx.p(), n);
    let support = support.min(ctx.trusted_limit()).max(1);
    let body = match (shape_of(ctx.p(), n), k, j) {
        (Shape::SeqSeqRat, _, _) => Body::SeqSeqRat(
            ThetaSeq::random(ctx, 0, support, rng),
            ThetaSeq::zero(ctx, 0),
            ctx.fraction_zero(),
        ),
        (Shape::SeqSeq, _, _) => {
            let lambda = ctx.twist_scalar(k)?;
            let mut a = ThetaSeq::random(ctx, k, support, rng);
            let b = solve_pre_tail(&a.scale(lambda))?;
            let mut a0 = b[0];
            if artifacts {
                let v = ctx.twist_valuation(k).expect("nonzero twist");
                let r = ctx.int(rng.gen_range(0..ctx.p().pow(v + 1)) as i64);
                a0 += r.mul_p_power(ctx.precision() - v);
            }
            a.set(0, a0);
            Body::SeqSeq(a, b)
        }
        (Shape::SeqRat, 0, _) => {
            let mut a = ThetaSeq::random(ctx, 0, support, rng);
            a.set(0, ctx.zero());
            Body::SeqRat(a, random_fraction(ctx, 2, rng))
        }
        (Shape::SeqRat, _, _) => {
            let a = ThetaSeq::random(ctx, k, support, rng);
            let y = if artifacts {
                let v = ctx.twist_valuation(k).expect("nonzero twist");
                let r = ctx.int(rng.gen_range(0..ctx.p().pow(v + 1)) as i64);
                PadicFraction::from_int(r.mul_p_power(ctx.precision() - v))
            } else {
                ctx.fraction_zero()
            };
            Body::SeqRat(a, y)
        }
        (Shape::Rat, _, _) => Body::Rat(random_fraction(ctx, 2, rng)),
        (Shape::Seq, _, _) | (Shape::Zero, _, _) => return Ok(Cochain::zero(ctx, n)),
    };
    Cochain::new(ctx, n, body)
}

/// d of a random cochain in degree n - 1, with sequence support below `support`.
pub fn random_boundary<R: Rng + ?Sized>(
    ctx: &Context,
    n: i64,
    support: usize,
    rng: &mut R,
) -> Result<Cochain> {
    let support = support.min(ctx.trusted_limit()).max(2);
    let c = Cochain::random(ctx, n - 1, support - 1, 2, rng);
    differential(&c)
}

/// Whether a witness maps exactly onto its target.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessCheck {
    pub degree: i64,
    pub residue_zero: bool,
}

impl WitnessCheck {
    pub fn of(target: &Cochain, witness: &Cochain) -> Result<Self> {
        Ok(Self {
            degree: target.degree(),
            residue_zero: differential(witness)? == *target,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertCheck {
    pub name: String,
    pub passed: bool,
}

/// The closed-form group in a degree together with the engine's consistency checks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certification {
    pub degree: i64,
    pub twist: i64,
    pub group: GroupDescriptor,
    pub checks: Vec<CertCheck>,
    pub witnesses: Vec<WitnessCheck>,
    /// (target, witness) behind each entry of `witnesses`.
    #[serde(skip)]
    pub evidence: Vec<(Cochain, Cochain)>,
}

impl Certification {
    pub fn certified(&self) -> bool {
        self.checks.iter().all(|c| c.passed) && self.witnesses.iter().all(|w| w.residue_zero)
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect()
    }
}

struct Certifier {
    checks: Vec<CertCheck>,
    witnesses: Vec<WitnessCheck>,
    evidence: Vec<(Cochain, Cochain)>,
}

impl Certifier {
    fn check(&mut self, name: impl Into<String>, passed: bool) {
        self.checks.push(CertCheck {
            name: name.into(),
            passed,
        });
    }

    fn expect_boundary(&mut self, name: impl Into<String>, x: &Cochain) -> Result<()> {
        let result = boundary_witness(x)?;
        if let BoundaryCheck::Boundary(w) = &result {
            self.witnesses.push(WitnessCheck::of(x, w)?);
            self.evidence.push((x.clone(), w.clone()));
        }
        self.check(name, result.is_boundary());
        Ok(())
    }

    fn expect_not_boundary(&mut self, name: impl Into<String>, x: &Cochain) -> Result<()> {
        let result = boundary_witness(x)?;
        self.check(name, matches!(result, BoundaryCheck::NotBoundary(ref o) if *o != Obstruction::NotCycle));
        Ok(())
    }

    /// p^(e-1) x is not a boundary and p^e x is.
    fn expect_order(&mut self, name: &str, x: &Cochain, e: u32) -> Result<()> {
        let p = x.ctx().int(x.ctx().p() as i64);
        if e > 0 {
            let below = x.scale(p.pow(e as u64 - 1));
            self.expect_not_boundary(format!("{name}: p^{} multiple is not a boundary", e - 1), &below)?;
        }
        let at = x.scale(p.pow(e as u64));
        self.expect_boundary(format!("{name}: p^{e} multiple is a boundary"), &at)
    }
}

fn rat_cochain(ctx: &Context, n: i64, x: PadicFraction) -> Result<Cochain> {
    Cochain::new(ctx, n, Body::Rat(x))
}

/// Certifies the closed-form group of degree n against the engine: generator orders,
/// witnesses for probe boundaries, and injectivity where the group vanishes for that reason.
pub fn certify_group(ctx: &Context, n: i64) -> Result<Certification> {
    let group = homology_group(ctx, n)?;
    let (k, _) = locate(ctx.p(), n);
    let limit = ctx.trusted_limit();
    let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
    let mut cert = Certifier {
        checks: Vec::new(),
        witnesses: Vec::new(),
        evidence: Vec::new(),
    };
    let basis = |t: usize| ThetaSeq::basis(ctx, k, t);
    match shape_of(ctx.p(), n) {
        Shape::Zero => cert.check("zero object", Cochain::zero(ctx, n).is_zero()),
        Shape::Seq => {
            let injective = (0..limit).all(|t| {
                let x = Cochain::new(ctx, n, Body::Seq(basis(t))).expect("shape");
                !is_cycle(&x).expect("differential")
            });
            cert.check("basis probes are not cycles", injective);
            let mut random_ok = true;
            for _ in 0..16 {
                let x = Cochain::random(ctx, n, limit, 0, &mut rng);
                if !x.is_zero() && is_cycle(&x)? {
                    random_ok = false;
                }
            }
            cert.check("random probes are not cycles", random_ok);
            cert.expect_boundary("zero bounds", &Cochain::zero(ctx, n))?;
        }
        Shape::SeqSeqRat => {
            let zero = ThetaSeq::zero(ctx, 0);
            let q0 = ctx.fraction_zero();
            let g = Cochain::new(ctx, n, Body::SeqSeqRat(basis(0), zero.clone(), q0))?;
            cert.check("generator is a cycle", is_cycle(&g)?);
            cert.check(
                "generator class is 1",
                class_of(&g)?.invariant == ClassInvariant::Local(ctx.int(1)),
            );
            for e in 0..ctx.precision() {
                let x = g.scale(ctx.int(1).mul_p_power(e));
                cert.expect_not_boundary(format!("p^{e} generator is not a boundary"), &x)?;
            }
            for t in 1..limit {
                let x = Cochain::new(ctx, n, Body::SeqSeqRat(basis(t), zero.clone(), q0))?;
                cert.expect_boundary(format!("probe Theta_{t} bounds"), &x)?;
            }
            let mut additive = true;
            for _ in 0..16 {
                let x = random_cycle(ctx, n, limit, false, &mut rng)?;
                let y = random_cycle(ctx, n, limit, false, &mut rng)?;
                let sum = class_value(&class_of(&x.add(&y))?, ctx)
                    == class_value(&class_of(&x)?, ctx) + class_value(&class_of(&y)?, ctx);
                additive &= sum;
            }
            cert.check("class map is additive", additive);
        }
        Shape::SeqSeq => {
            for t in 0..limit - 1 {
                let c = Cochain::new(ctx, n - 1, Body::Seq(basis(t)))?;
                cert.expect_boundary(format!("probe d(Theta_{t}) bounds"), &differential(&c)?)?;
            }
            for s in 0..8 {
                let x = random_cycle(ctx, n, limit, false, &mut rng)?;
                cert.check(
                    format!("random cycle {s} has divisible second component"),
                    second_component_divisible(&x)?,
                );
                cert.expect_boundary(format!("random cycle {s} bounds"), &x)?;
            }
        }
        Shape::SeqRat if k == 0 => {
            for t in 1..limit {
                let x = Cochain::new(ctx, n, Body::SeqRat(basis(t), ctx.fraction_zero()))?;
                cert.expect_boundary(format!("probe Theta_{t} bounds"), &x)?;
            }
            for e in 0..=2 {
                let x = Cochain::new(ctx, n, Body::SeqRat(basis(1).scale(ctx.zero()), ctx.fraction(1, e)?))?;
                cert.expect_boundary(format!("probe 1/p^{e} bounds"), &x)?;
            }
            let g = Cochain::new(ctx, n, Body::SeqRat(basis(0), ctx.fraction_zero()))?;
            cert.check("Theta_0 is not a cycle", !is_cycle(&g)?);
        }
        Shape::SeqRat => {
            let GroupDescriptor::CyclicPPower(e) = group else {
                unreachable!("odd window degree has a cyclic group")
            };
            let g = Cochain::new(ctx, n, Body::SeqRat(basis(0), ctx.fraction_zero()))?;
            cert.check("generator is a cycle", is_cycle(&g)?);
            cert.expect_order("generator", &g, e)?;
            for t in 1..limit {
                let x = Cochain::new(ctx, n, Body::SeqRat(basis(t), ctx.fraction_zero()))?;
                cert.expect_boundary(format!("probe Theta_{t} bounds"), &x)?;
            }
        }
        Shape::Rat if k == 0 => {
            cert.expect_boundary("1 bounds", &rat_cochain(ctx, n, ctx.fraction(1, 0)?)?)?;
            for e in 1..=2 {
                let x = rat_cochain(ctx, n, ctx.fraction(1, e)?)?;
                cert.expect_order(&format!("1/p^{e}"), &x, e)?;
                cert.check(
                    format!("1/p^{e} has order p^{e}"),
                    class_order(&class_of(&x)?) == ClassOrder::PPower(e),
                );
            }
        }
        Shape::Rat => {
            for e in 0..=2 {
                let x = rat_cochain(ctx, n, ctx.fraction(1, e)?)?;
                cert.expect_boundary(format!("1/p^{e} bounds"), &x)?;
            }
        }
    }
    Ok(Certification {
        degree: n,
        twist: k,
        group,
        checks: cert.checks,
        witnesses: cert.witnesses,
        evidence: cert.evidence,
    })
}

fn class_value(c: &HomologyClass, ctx: &Context) -> PadicInt {
    match c.invariant {
        ClassInvariant::Local(v) => v,
        _ => ctx.zero(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Context {
        Context::new(5, 3).unwrap()
    }

    fn seq(c: &Context, k: i64, v: &[i64]) -> ThetaSeq {
        ThetaSeq::from_ints(c, k, v)
    }

    #[test]
    fn groups() {
        let c = ctx();
        assert_eq!(homology_group(&c, -1).unwrap(), GroupDescriptor::Zero);
        assert_eq!(homology_group(&c, 0).unwrap(), GroupDescriptor::FreeLocalRankOne);
        assert_eq!(homology_group(&c, 1).unwrap(), GroupDescriptor::Zero);
        assert_eq!(homology_group(&c, 2).unwrap(), GroupDescriptor::RationalsModLocal);
        assert_eq!(homology_group(&c, 9).unwrap(), GroupDescriptor::CyclicPPower(1));
        assert_eq!(homology_group(&c, 41).unwrap(), GroupDescriptor::CyclicPPower(2));
        assert_eq!(homology_group(&c, 3).unwrap(), GroupDescriptor::Zero);
        assert!(matches!(homology_group(&c, 201), Err(Error::PrecisionExhausted(_))));
        assert_eq!(GroupDescriptor::CyclicPPower(2).render(5), "Z/25");
    }

    #[test]
    fn cycles() {
        let c = ctx();
        let x = Cochain::new(&c, 9, Body::SeqRat(seq(&c, 1, &[3, 4]), c.fraction_zero())).unwrap();
        assert!(is_cycle(&x).unwrap());
        let y = Cochain::new(&c, 0, Body::SeqSeqRat(seq(&c, 0, &[3, 4]), seq(&c, 0, &[]), c.fraction_zero())).unwrap();
        assert!(is_cycle(&y).unwrap());
        let z = Cochain::new(&c, 0, Body::SeqSeqRat(seq(&c, 0, &[]), seq(&c, 0, &[1]), c.fraction_zero())).unwrap();
        assert!(!is_cycle(&z).unwrap());
    }

    #[test]
    fn witnesses_degree_9() {
        let c = ctx();
        let x = Cochain::new(&c, 9, Body::SeqRat(seq(&c, 1, &[5]), c.fraction_zero())).unwrap();
        let w = boundary_witness(&x).unwrap();
        assert_eq!(differential(w.witness().unwrap()).unwrap(), x);
        let y = Cochain::new(&c, 9, Body::SeqRat(seq(&c, 1, &[1]), c.fraction_zero())).unwrap();
        assert_eq!(
            boundary_witness(&y).unwrap(),
            BoundaryCheck::NotBoundary(Obstruction::IndexZeroNotDivisible { value: 1, required: 1 })
        );
        let z = Cochain::new(&c, 9, Body::SeqRat(seq(&c, 1, &[10, 3, 0, 7, 1]), c.fraction_zero())).unwrap();
        assert!(boundary_witness(&z).unwrap().is_boundary());
    }

    #[test]
    fn witness_degree_0() {
        let c = ctx();
        let x = Cochain::new(&c, 0, Body::SeqSeqRat(seq(&c, 0, &[0, 3, 1]), seq(&c, 0, &[]), c.fraction_zero())).unwrap();
        assert!(boundary_witness(&x).unwrap().is_boundary());
        let y = Cochain::new(&c, 0, Body::SeqSeqRat(seq(&c, 0, &[7, 1]), seq(&c, 0, &[]), c.fraction_zero())).unwrap();
        assert_eq!(
            boundary_witness(&y).unwrap(),
            BoundaryCheck::NotBoundary(Obstruction::IndexZeroNonzero { value: 7 })
        );
        assert_eq!(class_of(&y).unwrap().invariant, ClassInvariant::Local(c.int(7)));
        assert_eq!(class_order(&class_of(&y).unwrap()), ClassOrder::Infinite);
    }

    #[test]
    fn classes() {
        let c = ctx();
        let x = Cochain::new(&c, 41, Body::SeqRat(seq(&c, 5, &[5]), c.fraction_zero())).unwrap();
        let cl = class_of(&x).unwrap();
        assert_eq!(cl.invariant, ClassInvariant::Torsion { value: 5, exponent: 2 });
        assert_eq!(class_order(&cl), ClassOrder::PPower(1));
        let g = Cochain::new(&c, 9, Body::SeqRat(seq(&c, 1, &[1]), c.fraction_zero())).unwrap();
        assert_eq!(class_order(&class_of(&g).unwrap()), ClassOrder::PPower(1));
        let q = Cochain::new(&c, 2, Body::Rat(c.fraction(1, 1).unwrap())).unwrap();
        assert_eq!(
            class_of(&q).unwrap().invariant,
            ClassInvariant::RationalModLocal(c.fraction(1, 1).unwrap())
        );
    }

    #[test]
    fn degree_2_and_twisted_rationals() {
        let c = ctx();
        let one = Cochain::new(&c, 2, Body::Rat(c.fraction(6, 0).unwrap())).unwrap();
        assert!(boundary_witness(&one).unwrap().is_boundary());
        let fifth = Cochain::new(&c, 2, Body::Rat(c.fraction(1, 1).unwrap())).unwrap();
        assert_eq!(
            boundary_witness(&fifth).unwrap(),
            BoundaryCheck::NotBoundary(Obstruction::NotIntegral { exponent: 1 })
        );
        for k in [1, 5, -2] {
            let n = 8 * k + 2;
            let x = Cochain::new(&c, n, Body::Rat(c.fraction(3, 2).unwrap())).unwrap();
            assert!(boundary_witness(&x).unwrap().is_boundary());
        }
    }

    #[test]
    fn twisted_degree_zero_offset() {
        let c = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in [1, -1, 5] {
            for _ in 0..5 {
                let x = random_boundary(&c, 8 * k, 40, &mut rng).unwrap();
                assert!(boundary_witness(&x).unwrap().is_boundary());
                let y = random_cycle(&c, 8 * k, 40, false, &mut rng).unwrap();
                assert!(is_cycle(&y).unwrap());
                assert!(boundary_witness(&y).unwrap().is_boundary());
            }
        }
        // (p^(M - v - 1) e_0, 0) is a cycle of the truncated model only.
        let art = Cochain::new(&c, 8, Body::SeqSeq(seq(&c, 1, &[25]), seq(&c, 1, &[]))).unwrap();
        assert!(is_cycle(&art).unwrap());
        assert!(matches!(
            boundary_witness(&art).unwrap(),
            BoundaryCheck::NotBoundary(Obstruction::PrecisionArtifact { .. })
        ));
    }

    #[test]
    fn degree_1_witness() {
        let c = ctx();
        let x = Cochain::new(&c, 1, Body::SeqRat(seq(&c, 0, &[0, 4, 2]), c.fraction(2, 2).unwrap())).unwrap();
        assert!(boundary_witness(&x).unwrap().is_boundary());
    }

    #[test]
    fn untrusted_support() {
        let c = ctx();
        let limit = c.trusted_limit();
        let x = Cochain::new(&c, 9, Body::SeqRat(ThetaSeq::basis(&c, 1, limit), c.fraction_zero())).unwrap();
        assert!(matches!(
            boundary_witness(&x),
            Err(Error::UntrustedSupport { index, .. }) if index == limit
        ));
    }

    #[test]
    fn certifications() {
        let c = ctx();
        for n in [-1, 0, 1, 2, 3, 7, 8, 9, 10, 41, -7] {
            let cert = certify_group(&c, n).unwrap();
            assert!(cert.certified(), "degree {n}: {:?}", cert.failed_checks());
        }
    }
}
