//! Sequences in the Theta basis and the structure maps between them.

use std::fmt;
use std::ops::{Add, Index, Neg, Sub};

use rand::Rng;

use crate::arith::{Context, PadicFraction, PadicInt, Valuation};
use crate::error::{Error, Result};

/// Coefficients a_m of sum a_m Theta_m, truncated at the context length, tagged with a twist k.
#[derive(Clone)]
pub struct ThetaSeq {
    ctx: Context,
    twist: i64,
    coeffs: Vec<PadicInt>,
}

impl ThetaSeq {
    pub fn zero(ctx: &Context, twist: i64) -> Self {
        Self {
            ctx: ctx.clone(),
            twist,
            coeffs: vec![ctx.zero(); ctx.length()],
        }
    }

    /// The sequence of Theta_m.
    pub fn basis(ctx: &Context, twist: i64, m: usize) -> Self {
        let mut out = Self::zero(ctx, twist);
        out.coeffs[m] = ctx.int(1);
        out
    }

    /// Leading coefficients from integers, zero-padded.
    pub fn from_ints(ctx: &Context, twist: i64, values: &[i64]) -> Self {
        assert!(values.len() <= ctx.length(), "more coefficients than the length");
        let mut out = Self::zero(ctx, twist);
        for (slot, v) in out.coeffs.iter_mut().zip(values) {
            *slot = ctx.int(*v);
        }
        out
    }

    pub fn from_coeffs(ctx: &Context, twist: i64, coeffs: Vec<PadicInt>) -> Result<Self> {
        if coeffs.len() != ctx.length() {
            return Err(Error::LengthMismatch {
                expected: ctx.length(),
                found: coeffs.len(),
            });
        }
        Ok(Self {
            ctx: ctx.clone(),
            twist,
            coeffs,
        })
    }

    /// Uniform residues on indices below `support`.
    pub fn random<R: Rng + ?Sized>(ctx: &Context, twist: i64, support: usize, rng: &mut R) -> Self {
        let modulus = ctx.modulus().value();
        let mut out = Self::zero(ctx, twist);
        for slot in out.coeffs.iter_mut().take(support.min(ctx.length())) {
            *slot = ctx.int(rng.gen_range(0..modulus) as i64);
        }
        out
    }

    pub fn ctx(&self) -> &Context {
        &self.ctx
    }

    pub fn twist(&self) -> i64 {
        self.twist
    }

    pub fn coeffs(&self) -> &[PadicInt] {
        &self.coeffs
    }

    pub fn set(&mut self, m: usize, value: PadicInt) {
        self.coeffs[m] = value;
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(PadicInt::is_zero)
    }

    /// Highest index with a nonzero coefficient.
    pub fn top(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    pub fn scale(&self, s: PadicInt) -> Self {
        self.map(|c| c * s)
    }

    pub fn with_twist(&self, twist: i64) -> Self {
        Self {
            twist,
            ..self.clone()
        }
    }

    fn map(&self, f: impl Fn(PadicInt) -> PadicInt) -> Self {
        Self {
            ctx: self.ctx.clone(),
            twist: self.twist,
            coeffs: self.coeffs.iter().map(|c| f(*c)).collect(),
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(PadicInt, PadicInt) -> PadicInt) -> Self {
        assert_eq!(self.twist, other.twist, "twist mismatch");
        Self {
            ctx: self.ctx.clone(),
            twist: self.twist,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }
}

impl PartialEq for ThetaSeq {
    fn eq(&self, other: &Self) -> bool {
        self.twist == other.twist && self.coeffs == other.coeffs
    }
}

impl Eq for ThetaSeq {}

impl Index<usize> for ThetaSeq {
    type Output = PadicInt;
    fn index(&self, m: usize) -> &PadicInt {
        &self.coeffs[m]
    }
}

impl Add for &ThetaSeq {
    type Output = ThetaSeq;
    fn add(self, rhs: Self) -> ThetaSeq {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Sub for &ThetaSeq {
    type Output = ThetaSeq;
    fn sub(self, rhs: Self) -> ThetaSeq {
        self.zip(rhs, |a, b| a - b)
    }
}

impl Neg for &ThetaSeq {
    type Output = ThetaSeq;
    fn neg(self) -> ThetaSeq {
        self.map(|a| -a)
    }
}

impl fmt::Display for ThetaSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        let end = self.top().map_or(1, |t| t + 1);
        for (m, c) in self.coeffs[..end].iter().enumerate() {
            if m > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        if end < self.coeffs.len() {
            write!(f, ", ...")?;
        }
        write!(f, ">@{}", self.twist)
    }
}

impl fmt::Debug for ThetaSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Post-composition with Psi - 1: multiplication by the twist scalar.
pub fn psi_post(a: &ThetaSeq) -> Result<ThetaSeq> {
    let lambda = a.ctx.twist_scalar(a.twist)?;
    Ok(a.scale(lambda))
}

/// Pre-composition with Psi - 1: multiplication by Theta_1 + lambda Theta_0.
pub fn psi_pre(a: &ThetaSeq) -> Result<ThetaSeq> {
    let ctx = &a.ctx;
    let lambda = ctx.twist_scalar(a.twist)?;
    let mut out = ThetaSeq::zero(ctx, a.twist);
    out.coeffs[0] = lambda * a[0];
    for m in 1..a.len() {
        out.coeffs[m] = a[m] * (ctx.index_factor(m) + lambda) + a[m - 1];
    }
    Ok(out)
}

/// Projection to the rational part: a_0 at twist 0, zero otherwise.
pub fn q_post(a: &ThetaSeq) -> PadicFraction {
    if a.twist == 0 {
        PadicFraction::from_int(a[0])
    } else {
        a.ctx.fraction_zero()
    }
}

/// Inclusion of the rational part; the identity.
pub fn q_pre(x: &PadicFraction) -> PadicFraction {
    *x
}

/// Psi - 1 on the rational component of twist k.
pub fn psi_pre_rat(ctx: &Context, k: i64, x: &PadicFraction) -> Result<PadicFraction> {
    if k == 0 {
        return Ok(ctx.fraction_zero());
    }
    ctx.twist_scalar(k)?;
    let lambda = ctx.twist_scalar_at(k, ctx.precision() + x.exponent())?;
    Ok(x.mul_scalar(lambda))
}

/// Multiplication by Psi - r^c.
pub fn mul_linear_factor(a: &ThetaSeq, c: i64) -> ThetaSeq {
    let ctx = &a.ctx;
    let rc = ctx.rpow(c);
    let mut out = ThetaSeq::zero(ctx, a.twist);
    out.coeffs[0] = a[0] * (ctx.root(1) - rc);
    for m in 1..a.len() {
        out.coeffs[m] = a[m] * (ctx.root(m + 1) - rc) + a[m - 1];
    }
    out
}

/// Multiplication by Theta_1 = Psi - 1.
pub fn mul_theta1(a: &ThetaSeq) -> ThetaSeq {
    mul_linear_factor(a, 0)
}

/// Theta_m evaluated at Psi = r^(i(p-1)).
pub fn theta_scalar(ctx: &Context, i: i64, m: usize) -> PadicInt {
    let eig = ctx.rpow(i * (ctx.p() as i64 - 1));
    (1..=m).fold(ctx.int(1), |acc, j| acc * (eig - ctx.root(j)))
}

/// Valuation of [`theta_scalar`].
pub fn n_exp(ctx: &Context, i: i64, m: usize) -> Valuation {
    theta_scalar(ctx, i, m).valuation()
}

fn exponent_shift(ctx: &Context, i: i64, shift: i64, index: usize, pair: (usize, usize)) -> Result<i64> {
    if shift == 0 {
        return Ok(0);
    }
    let value = |at: i64| {
        n_exp(ctx, at, index)
            .finite()
            .map(i64::from)
            .ok_or(Error::UndefinedTwistExponent {
                m: pair.0,
                n: pair.1,
                i: at,
                index,
            })
    };
    Ok(value(i + shift)? - value(i)?)
}

/// Twisted product of sequences; twists add.
pub fn seq_product(a: &ThetaSeq, b: &ThetaSeq) -> Result<ThetaSeq> {
    let ctx = &a.ctx;
    let len = ctx.length();
    let (k, l) = (a.twist, b.twist);
    let mut out = ThetaSeq::zero(ctx, k + l);
    let (Some(top_a), Some(top_b)) = (a.top(), b.top()) else {
        return Ok(out);
    };
    let precision = i64::from(ctx.precision());
    for n in 0..=top_b {
        if b[n].is_zero() {
            continue;
        }
        // Theta_m Theta_n lives on indices n..=n+m; grow it one linear factor at a time.
        let mut window = vec![ctx.int(1)];
        for m in 0..=top_a {
            if m + n >= len {
                return Err(Error::TruncationOverflow {
                    m: top_a,
                    n,
                    length: len,
                });
            }
            if m > 0 {
                let c = ctx.rpow(crate::arith::root_exponent(m as u64));
                let mut next = vec![ctx.zero(); m + 1];
                for (t, w) in window.iter().enumerate() {
                    // Psi Theta_q = Theta_{q+1} + r^(root exponent of q+1) Theta_q.
                    let q = n + t;
                    next[t] += *w * (ctx.root(q + 1) - c);
                    next[t + 1] += *w;
                }
                window = next;
            }
            if a[m].is_zero() {
                continue;
            }
            let i = (m + n) as i64;
            let e = exponent_shift(ctx, i, k, m, (m, n))? + exponent_shift(ctx, i, l, n, (m, n))?;
            if e < 0 {
                return Err(Error::NegativeTwistExponent { m, n, exponent: e });
            }
            if e >= precision {
                continue;
            }
            let s = (a[m] * b[n]).mul_p_power(e as u32);
            for (t, w) in window.iter().enumerate() {
                out.coeffs[n + t] += s * *w;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::ScalarMode;

    fn ctx() -> Context {
        Context::new(5, 3).unwrap()
    }

    fn seq(c: &Context, k: i64, v: &[i64]) -> ThetaSeq {
        ThetaSeq::from_ints(c, k, v)
    }

    #[test]
    fn psi_post_examples() {
        let c = ctx();
        assert_eq!(psi_post(&seq(&c, 1, &[1, 2, 3])).unwrap(), seq(&c, 1, &[5, 10, 15]));
        assert!(psi_post(&seq(&c, 0, &[4, 9])).unwrap().is_zero());
        assert_eq!(psi_post(&seq(&c, 5, &[1])).unwrap(), seq(&c, 5, &[25]));
        assert!(matches!(
            psi_post(&seq(&c, 25, &[1])),
            Err(Error::PrecisionExhausted(_))
        ));
    }

    #[test]
    fn psi_pre_examples() {
        let c = ctx();
        assert_eq!(psi_pre(&seq(&c, 0, &[1])).unwrap(), seq(&c, 0, &[0, 1]));
        assert_eq!(psi_pre(&seq(&c, 0, &[0, 1])).unwrap(), seq(&c, 0, &[0, 1, 1]));
        assert_eq!(psi_pre(&seq(&c, 1, &[1])).unwrap(), seq(&c, 1, &[5, 1]));
    }

    #[test]
    fn psi_pre_keeps_last_index() {
        let c = ctx();
        let n = c.length();
        let a = ThetaSeq::basis(&c, 0, n - 1);
        let b = psi_pre(&a).unwrap();
        assert_eq!(b[n - 1], c.index_factor(n - 1));
        assert_eq!(b.top(), Some(n - 1));
    }

    #[test]
    fn rational_maps() {
        let c = ctx();
        assert_eq!(q_post(&seq(&c, 0, &[3, 7, 1])), c.fraction(3, 0).unwrap());
        assert!(q_post(&seq(&c, 2, &[3, 7, 1])).is_zero());
        assert!(q_post(&ThetaSeq::zero(&c, 0)).is_zero());
        let x = c.fraction(7, 2).unwrap();
        assert_eq!(q_pre(&x), x);
        assert!(psi_pre_rat(&c, 0, &c.fraction(9, 0).unwrap()).unwrap().is_zero());
        assert_eq!(
            psi_pre_rat(&c, 1, &c.fraction(1, 2).unwrap()).unwrap(),
            c.fraction(1, 1).unwrap()
        );
        assert_eq!(
            psi_pre_rat(&c, 5, &c.fraction(3, 0).unwrap()).unwrap(),
            c.fraction(75, 0).unwrap()
        );
        let e = c.with_scalars(ScalarMode::Exact);
        assert_eq!(
            psi_pre_rat(&e, 1, &e.fraction(1, 2).unwrap()).unwrap(),
            e.fraction(3, 1).unwrap()
        );
    }

    #[test]
    fn theta_scalars() {
        let c = ctx();
        assert_eq!(theta_scalar(&c, 7, 0).residue(), 1);
        assert_eq!(n_exp(&c, 7, 0), Valuation::Finite(0));
        assert_eq!(theta_scalar(&c, 1, 1).residue(), 15);
        assert_eq!(n_exp(&c, 1, 1), Valuation::Finite(1));
        assert!(theta_scalar(&c, 0, 1).is_zero());
        assert_eq!(n_exp(&c, 0, 1), Valuation::Top);
    }

    #[test]
    fn linear_factors() {
        let c = ctx();
        let one = seq(&c, 0, &[1]);
        assert_eq!(mul_theta1(&one), seq(&c, 0, &[0, 1]));
        assert!(mul_theta1(&ThetaSeq::zero(&c, 0)).is_zero());
        assert_eq!(mul_linear_factor(&one, 0), seq(&c, 0, &[0, 1]));
        let mut t = one.clone();
        for j in 1..=6u64 {
            t = mul_linear_factor(&t, crate::arith::root_exponent(j));
        }
        assert_eq!(t, ThetaSeq::basis(&c, 0, 6));
    }

    #[test]
    fn product_examples() {
        let c = ctx();
        let p = seq_product(&seq(&c, 1, &[2]), &seq(&c, -1, &[3])).unwrap();
        assert_eq!(p.twist(), 0);
        assert_eq!(p[0].residue(), 6);
        let a = seq(&c, 2, &[1, 4, 2]);
        assert!(seq_product(&a, &ThetaSeq::zero(&c, 0)).unwrap().is_zero());
        assert_eq!(
            seq_product(&seq(&c, 0, &[1]), &seq(&c, 0, &[0, 1])).unwrap(),
            seq(&c, 0, &[0, 1])
        );
    }

    #[test]
    fn product_expansion_matches_linear_factors() {
        let c = ctx();
        let mut expect = ThetaSeq::basis(&c, 0, 3);
        for j in 1..=4u64 {
            expect = mul_linear_factor(&expect, crate::arith::root_exponent(j));
        }
        let got = seq_product(&ThetaSeq::basis(&c, 0, 4), &ThetaSeq::basis(&c, 0, 3)).unwrap();
        assert_eq!(got, expect);
    }

    #[test]
    fn product_overflow() {
        let c = ctx();
        let n = c.length();
        let a = ThetaSeq::basis(&c, 0, n / 2 + 1);
        let err = seq_product(&a, &a).unwrap_err();
        assert!(matches!(err, Error::TruncationOverflow { .. }));
    }

    #[test]
    fn product_undefined_exponent() {
        let c = ctx();
        // Theta_25 at Psi = r^100 = 1 vanishes, so N(25, 25) is undefined.
        let a = ThetaSeq::basis(&c, 1, 25);
        let b = ThetaSeq::basis(&c, 0, 0);
        assert!(matches!(
            seq_product(&a, &b),
            Err(Error::UndefinedTwistExponent { .. })
        ));
    }

    #[test]
    fn display() {
        let c = ctx();
        assert_eq!(seq(&c, 1, &[5, 1]).to_string(), "<5, 1, ...>@1");
        assert_eq!(ThetaSeq::zero(&c, 0).to_string(), "<0, ...>@0");
    }
}
