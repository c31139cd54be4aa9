//! The pairing into H^2 and the Massey products <gamma_i, p, gamma_j>.

use serde::{Deserialize, Serialize};

use crate::arith::{Context, PadicFraction};
use crate::complex::{differential, locate, shape_of, Body, Cochain, Shape};
use crate::error::{Error, Result};
use crate::homology::{
    boundary_witness, class_of, class_order, indeterminacy, BoundaryCheck, ClassInvariant,
    ClassOrder, GroupDescriptor, HomologyClass, WitnessCheck,
};
use crate::theta::{seq_product, ThetaSeq};

fn torsion_value(c: &HomologyClass, exponent: u32) -> Result<u64> {
    match &c.invariant {
        ClassInvariant::Zero => Ok(0),
        ClassInvariant::Torsion { value, exponent: e } if *e == exponent => Ok(*value),
        other => Err(Error::DegreeMismatch(format!(
            "expected a class in Z/p^{exponent}, found {other:?}"
        ))),
    }
}

/// H^(-(2p-2)k+1) x H^((2p-2)k+1) -> H^2 = Q/Z_(p), (a, b) -> a b / p^(2(v(k)+1)).
pub fn cohomology_product(
    ctx: &Context,
    alpha: &HomologyClass,
    beta: &HomologyClass,
) -> Result<HomologyClass> {
    let (ka, ja) = locate(ctx.p(), alpha.degree);
    let (kb, jb) = locate(ctx.p(), beta.degree);
    if ja != 1 || jb != 1 || ka != -kb || kb == 0 {
        return Err(Error::DegreeMismatch(format!(
            "cannot pair degrees {} and {}",
            alpha.degree, beta.degree
        )));
    }
    let e = ctx.twist_valuation(kb).expect("nonzero twist");
    if e >= ctx.precision() {
        return Err(Error::PrecisionExhausted(format!(
            "Z/p^{e} needs precision above {}",
            ctx.precision()
        )));
    }
    let a = torsion_value(alpha, e)?;
    let b = torsion_value(beta, e)?;
    let frac = pairing_value(ctx, a, b, e)?;
    Ok(HomologyClass {
        p: ctx.p(),
        degree: 2,
        invariant: if frac.is_zero() {
            ClassInvariant::Zero
        } else {
            ClassInvariant::RationalModLocal(frac)
        },
    })
}

/// a b / p^(2e) mod Z_(p) on canonical representatives.
pub fn pairing_value(ctx: &Context, a: u64, b: u64, e: u32) -> Result<PadicFraction> {
    let prod = (a as i64)
        .checked_mul(b as i64)
        .ok_or_else(|| Error::InvalidInput("pairing operands too large".into()))?;
    Ok(ctx.fraction(prod, 2 * e)?.fractional_part())
}

/// The full pairing table over Z/p^(v(k)+1), rows a, columns b.
pub fn pairing_table(ctx: &Context, k: i64) -> Result<Vec<Vec<PadicFraction>>> {
    let e = ctx
        .twist_valuation(k)
        .ok_or_else(|| Error::InvalidInput("pairing needs k != 0".into()))?;
    let size = ctx.p().pow(e);
    (0..size)
        .map(|a| (0..size).map(|b| pairing_value(ctx, a, b, e)).collect())
        .collect()
}

fn first_sequence(x: &Cochain) -> Result<&ThetaSeq> {
    x.body()
        .sequences()
        .first()
        .copied()
        .ok_or_else(|| Error::InvalidInput(format!("degree {} has no sequence component", x.degree())))
}

/// Product of cochains through their first sequence components, placed in the first
/// sequence slot of the target degree.
pub fn chain_product(x: &Cochain, y: &Cochain) -> Result<Cochain> {
    let ctx = x.ctx();
    let s = seq_product(first_sequence(x)?, first_sequence(y)?)?;
    let n = x.degree() + y.degree();
    let twist = s.twist();
    let z = || ThetaSeq::zero(ctx, twist);
    let q = ctx.fraction_zero();
    let body = match shape_of(ctx.p(), n) {
        Shape::Seq => Body::Seq(s),
        Shape::SeqSeq => Body::SeqSeq(s, z()),
        Shape::SeqSeqRat => Body::SeqSeqRat(s, z(), q),
        Shape::SeqRat => Body::SeqRat(s, q),
        Shape::Rat | Shape::Zero => {
            return Err(Error::DegreeMismatch(format!(
                "degree {n} has no sequence component"
            )))
        }
    };
    Cochain::new(ctx, n, body)
}

/// (-1)^(1 + degree).
fn sign(degree: i64) -> i64 {
    if (1 + degree).rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

fn signed(x: &Cochain, s: i64) -> Cochain {
    if s < 0 {
        x.neg()
    } else {
        x.clone()
    }
}

/// Exponent of p in the representatives of gamma_i.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepresentativeMode {
    /// p^v(i) a_0: a class of order p.
    #[default]
    OrderP,
    /// p^(v(i)+1) a_0: itself a boundary.
    PaperLiteral,
}

/// (<p^e a_0, 0, ...>, 0) in degree (2p-2)i+1.
pub fn representative(ctx: &Context, i: i64, mode: RepresentativeMode, a0: i64) -> Result<Cochain> {
    let v = ctx.nu(i);
    let e = match mode {
        RepresentativeMode::OrderP => v,
        RepresentativeMode::PaperLiteral => v + 1,
    };
    let a = ThetaSeq::basis(ctx, i, 0).scale(ctx.int(a0).mul_p_power(e));
    Cochain::new(ctx, (2 * ctx.p() as i64 - 2) * i + 1, Body::SeqRat(a, ctx.fraction_zero()))
}

/// The scalar p as the degree-0 cycle (<p, 0, ...>, 0, 0).
pub fn scalar_p(ctx: &Context) -> Cochain {
    let a = ThetaSeq::basis(ctx, 0, 0).scale(ctx.int(ctx.p() as i64));
    Cochain::new(
        ctx,
        0,
        Body::SeqSeqRat(a, ThetaSeq::zero(ctx, 0), ctx.fraction_zero()),
    )
    .expect("degree 0 shape")
}

#[derive(Clone, Debug)]
pub struct MasseyResult {
    pub i: i64,
    pub j: i64,
    pub a: Cochain,
    pub b: Cochain,
    pub c: Cochain,
    pub u: Cochain,
    pub v: Cochain,
    pub witness_checks: Vec<WitnessCheck>,
    pub representative: Cochain,
    pub class: HomologyClass,
    pub order: ClassOrder,
    pub indeterminacy: GroupDescriptor,
}

impl MasseyResult {
    pub fn witnesses_valid(&self) -> bool {
        self.witness_checks.iter().all(|w| w.residue_zero)
    }
}

fn check_twists(ctx: &Context, i: i64, j: i64) -> Result<()> {
    if i == 0 || j == 0 || i + j == 0 {
        return Err(Error::InvalidInput(format!(
            "Massey product needs i, j, i + j nonzero, got ({i}, {j})"
        )));
    }
    for k in [i, j, i + j] {
        let e = ctx.twist_valuation(k).expect("nonzero");
        if e >= ctx.precision() {
            return Err(Error::PrecisionExhausted(format!(
                "twist {k} needs precision above {e}"
            )));
        }
    }
    Ok(())
}

fn solve(target: &Cochain) -> Result<Cochain> {
    match boundary_witness(target)? {
        BoundaryCheck::Boundary(w) => Ok(w),
        BoundaryCheck::NotBoundary(o) => Err(Error::NotBoundary(o)),
    }
}

/// <gamma_i, p, gamma_j> with unit representative coefficients.
pub fn massey(ctx: &Context, i: i64, j: i64, mode: RepresentativeMode) -> Result<MasseyResult> {
    massey_with(ctx, i, j, mode, 1, 1)
}

/// <a, p, c> for a = a0 gamma_i, c = c0 gamma_j, using the constructive witnesses.
pub fn massey_with(
    ctx: &Context,
    i: i64,
    j: i64,
    mode: RepresentativeMode,
    a0: i64,
    c0: i64,
) -> Result<MasseyResult> {
    check_twists(ctx, i, j)?;
    let a = representative(ctx, i, mode, a0)?;
    let c = representative(ctx, j, mode, c0)?;
    let b = scalar_p(ctx);
    let ab = signed(&chain_product(&a, &b)?, sign(a.degree()));
    let bc = signed(&chain_product(&b, &c)?, sign(b.degree()));
    let u = solve(&ab)?;
    let v = solve(&bc)?;
    massey_from_witnesses(i, j, &a, &b, &c, &u, &v)
}

/// Evaluates the Massey representative for given witnesses; fails if they do not bound a b and b c.
pub fn massey_from_witnesses(
    i: i64,
    j: i64,
    a: &Cochain,
    b: &Cochain,
    c: &Cochain,
    u: &Cochain,
    v: &Cochain,
) -> Result<MasseyResult> {
    let ctx = a.ctx();
    let ab = signed(&chain_product(a, b)?, sign(a.degree()));
    let bc = signed(&chain_product(b, c)?, sign(b.degree()));
    let witness_checks = vec![WitnessCheck::of(&ab, u)?, WitnessCheck::of(&bc, v)?];
    if differential(u)? != ab || differential(v)? != bc {
        return Err(Error::WitnessCheckFailed(u.degree()));
    }
    let uc = signed(&chain_product(u, c)?, sign(u.degree()));
    let av = signed(&chain_product(a, v)?, sign(a.degree()));
    let representative = uc.add(&av);
    let class = class_of(&representative)?;
    let order = class_order(&class);
    Ok(MasseyResult {
        i,
        j,
        a: a.clone(),
        b: b.clone(),
        c: c.clone(),
        u: u.clone(),
        v: v.clone(),
        witness_checks,
        representative,
        class,
        order,
        indeterminacy: indeterminacy(ctx, i, j)?,
    })
}
