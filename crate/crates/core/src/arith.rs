//! Exact arithmetic in Z/p^M, fractions in Q/p^M Z_(p), and the shared context.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fraction exponents may exceed the working precision by at most this much.
pub const FRACTION_HEADROOM: u32 = 8;

/// Extra length beyond the minimum used when no length is given.
pub const DEFAULT_LENGTH_SLACK: usize = 64;

/// Slack the length must keep beyond twice the period.
pub const MIN_LENGTH_SLACK: usize = 16;

fn checked_pow(base: u64, exp: u32) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

pub fn is_odd_prime(p: u64) -> bool {
    if p < 3 || p.is_multiple_of(2) {
        return false;
    }
    let mut d = 3;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// p-adic valuation of a nonzero integer.
pub fn int_valuation(p: u64, k: i64) -> u32 {
    assert!(k != 0, "valuation of zero");
    let mut k = k.unsigned_abs();
    let mut v = 0;
    while k.is_multiple_of(p) {
        k /= p;
        v += 1;
    }
    v
}

/// Exponent of the j-th root in the product defining Theta: j/2 for even j, (1-j)/2 for odd j.
pub fn root_exponent(j: u64) -> i64 {
    let j = j as i64;
    if j % 2 == 0 {
        j / 2
    } else {
        (1 - j) / 2
    }
}

/// Root exponent shifted by one, the exponent governing index m of a sequence.
pub fn index_exponent(m: u64) -> i64 {
    root_exponent(m + 1)
}

/// The modulus p^M together with p and M.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Modulus {
    p: u64,
    precision: u32,
    value: u64,
}

impl Modulus {
    pub fn new(p: u64, precision: u32) -> Result<Self> {
        let value = checked_pow(p, precision)
            .filter(|v| *v < (1u64 << 62))
            .ok_or(Error::ModulusOverflow { p, precision })?;
        Ok(Self {
            p,
            precision,
            value,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn with_precision(&self, precision: u32) -> Result<Self> {
        Self::new(self.p, precision)
    }

    fn reduce(&self, x: i128) -> u64 {
        x.rem_euclid(self.value as i128) as u64
    }
}

/// A residue class in Z/p^M.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PadicInt {
    residue: u64,
    modulus: Modulus,
}

/// p-adic valuation of a residue; `Top` for zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Valuation {
    Finite(u32),
    Top,
}

impl Valuation {
    pub fn finite(self) -> Option<u32> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Top => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Top => write!(f, "TOP"),
        }
    }
}

impl PadicInt {
    pub fn new(x: i64, modulus: Modulus) -> Self {
        Self::from_i128(x as i128, modulus)
    }

    pub fn from_i128(x: i128, modulus: Modulus) -> Self {
        Self {
            residue: modulus.reduce(x),
            modulus,
        }
    }

    pub fn zero(modulus: Modulus) -> Self {
        Self {
            residue: 0,
            modulus,
        }
    }

    pub fn one(modulus: Modulus) -> Self {
        Self::new(1, modulus)
    }

    /// Canonical representative in [0, p^M).
    pub fn residue(&self) -> u64 {
        self.residue
    }

    /// Representative in (-p^M/2, p^M/2].
    pub fn signed(&self) -> i64 {
        let m = self.modulus.value;
        if self.residue > m / 2 {
            self.residue as i64 - m as i64
        } else {
            self.residue as i64
        }
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn precision(&self) -> u32 {
        self.modulus.precision
    }

    pub fn is_zero(&self) -> bool {
        self.residue == 0
    }

    pub fn is_unit(&self) -> bool {
        !self.residue.is_multiple_of(self.modulus.p)
    }

    pub fn valuation(&self) -> Valuation {
        if self.residue == 0 {
            return Valuation::Top;
        }
        Valuation::Finite(int_valuation(self.modulus.p, self.residue as i64))
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = *self;
        let mut acc = Self::one(self.modulus);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    pub fn inverse(&self) -> Option<Self> {
        if !self.is_unit() {
            return None;
        }
        let (mut old_r, mut r) = (self.residue as i128, self.modulus.value as i128);
        let (mut old_s, mut s) = (1i128, 0i128);
        while r != 0 {
            let q = old_r / r;
            (old_r, r) = (r, old_r - q * r);
            (old_s, s) = (s, old_s - q * s);
        }
        Some(Self::from_i128(old_s, self.modulus))
    }

    pub fn mul_p_power(&self, e: u32) -> Self {
        if e >= self.modulus.precision {
            return Self::zero(self.modulus);
        }
        let f = checked_pow(self.modulus.p, e).expect("power below modulus");
        *self * Self::new(f as i64, self.modulus)
    }

    /// Exact division by p^e using the canonical representative; `None` if p^e does not divide it.
    pub fn div_p_power(&self, e: u32) -> Option<Self> {
        if e == 0 {
            return Some(*self);
        }
        if e > self.modulus.precision {
            return None;
        }
        let f = checked_pow(self.modulus.p, e)?;
        if !self.residue.is_multiple_of(f) {
            return None;
        }
        Some(Self {
            residue: self.residue / f,
            modulus: self.modulus,
        })
    }

    /// Reduction to a lower precision.
    pub fn reduce_to(&self, precision: u32) -> Self {
        assert!(precision <= self.modulus.precision, "reduce_to cannot raise precision");
        let m = self.modulus.with_precision(precision).expect("lower precision fits");
        Self::new(self.residue as i64, m)
    }

    /// Canonical lift to a higher precision.
    pub fn lift_to(&self, precision: u32) -> Result<Self> {
        assert!(precision >= self.modulus.precision, "lift_to cannot lower precision");
        let m = self.modulus.with_precision(precision)?;
        Ok(Self::new(self.residue as i64, m))
    }

    fn check(&self, other: &Self) {
        assert_eq!(
            self.modulus, other.modulus,
            "mixing residues of different moduli"
        );
    }
}

impl fmt::Display for PadicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.residue)
    }
}

impl fmt::Debug for PadicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (mod {}^{})",
            self.residue, self.modulus.p, self.modulus.precision
        )
    }
}

impl Add for PadicInt {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.check(&rhs);
        let m = self.modulus.value;
        let s = self.residue + rhs.residue;
        Self {
            residue: if s >= m { s - m } else { s },
            modulus: self.modulus,
        }
    }
}

impl Sub for PadicInt {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for PadicInt {
    type Output = Self;
    fn neg(self) -> Self {
        let residue = if self.residue == 0 {
            0
        } else {
            self.modulus.value - self.residue
        };
        Self {
            residue,
            modulus: self.modulus,
        }
    }
}

impl Mul for PadicInt {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.check(&rhs);
        let r = (self.residue as u128 * rhs.residue as u128) % self.modulus.value as u128;
        Self {
            residue: r as u64,
            modulus: self.modulus,
        }
    }
}

impl AddAssign for PadicInt {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl SubAssign for PadicInt {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

/// An element of Q/p^M Z_(p), written mantissa / p^exponent.
///
/// The mantissa lives in Z/p^(M+exponent) and is a unit whenever the exponent is positive.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PadicFraction {
    mantissa: PadicInt,
    exponent: u32,
    base: Modulus,
}

impl PadicFraction {
    pub fn zero(base: Modulus) -> Self {
        Self {
            mantissa: PadicInt::zero(base),
            exponent: 0,
            base,
        }
    }

    pub fn from_int(x: PadicInt) -> Self {
        Self {
            mantissa: x,
            exponent: 0,
            base: x.modulus(),
        }
    }

    /// numerator / p^exponent over the base modulus p^M.
    pub fn new(numerator: i64, exponent: u32, base: Modulus) -> Result<Self> {
        Self::check_cap(exponent, base)?;
        let m = base.with_precision(base.precision + exponent)?;
        Ok(Self::from_parts(PadicInt::new(numerator, m), exponent, base))
    }

    /// Builds mantissa / p^exponent; the mantissa must carry precision M + exponent.
    pub fn from_parts(mantissa: PadicInt, exponent: u32, base: Modulus) -> Self {
        assert_eq!(mantissa.precision(), base.precision + exponent);
        Self {
            mantissa,
            exponent,
            base,
        }
        .normalized()
    }

    fn check_cap(exponent: u32, base: Modulus) -> Result<()> {
        let cap = base.precision + FRACTION_HEADROOM;
        if exponent > cap {
            return Err(Error::ExponentCap { exponent, cap });
        }
        Ok(())
    }

    fn normalized(self) -> Self {
        let mut out = self;
        while out.exponent > 0 && !out.mantissa.is_unit() {
            let q = out.mantissa.div_p_power(1).expect("divisible by p");
            out.exponent -= 1;
            out.mantissa = q.reduce_to(out.base.precision + out.exponent);
        }
        out
    }

    pub fn mantissa(&self) -> PadicInt {
        self.mantissa
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn base(&self) -> Modulus {
        self.base
    }

    pub fn is_zero(&self) -> bool {
        self.exponent == 0 && self.mantissa.is_zero()
    }

    pub fn is_integral(&self) -> bool {
        self.exponent == 0
    }

    pub fn to_int(&self) -> Option<PadicInt> {
        self.is_integral().then_some(self.mantissa)
    }

    /// The class in Q/Z_(p).
    pub fn fractional_part(&self) -> Self {
        if self.exponent == 0 {
            return Self::zero(self.base);
        }
        let f = checked_pow(self.base.p, self.exponent).expect("exponent within cap");
        let r = self.mantissa.residue() % f;
        Self::from_parts(
            PadicInt::new(r as i64, self.mantissa.modulus()),
            self.exponent,
            self.base,
        )
    }

    /// Valuation in Q/p^M Z_(p): -exponent for proper fractions, the integer valuation otherwise.
    pub fn valuation(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else if self.exponent > 0 {
            Some(-(self.exponent as i64))
        } else {
            self.mantissa.valuation().finite().map(|v| v as i64)
        }
    }

    fn lifted_mantissa(&self, exponent: u32) -> PadicInt {
        let m = self
            .mantissa
            .lift_to(self.base.precision + exponent)
            .expect("within cap");
        m.mul_p_power(exponent - self.exponent)
    }

    pub fn mul_p_power(&self, t: u32) -> Self {
        if t <= self.exponent {
            let e = self.exponent - t;
            return Self::from_parts(
                self.mantissa.reduce_to(self.base.precision + e),
                e,
                self.base,
            );
        }
        let m = self.mantissa.reduce_to(self.base.precision);
        Self::from_int(m.mul_p_power(t - self.exponent))
    }

    pub fn div_p_power(&self, t: u32) -> Result<Self> {
        let e = self.exponent + t;
        Self::check_cap(e, self.base)?;
        let m = self.mantissa.lift_to(self.base.precision + e)?;
        Ok(Self::from_parts(m, e, self.base))
    }

    /// Multiplication by an integer scalar given to at least precision M + exponent.
    pub fn mul_scalar(&self, s: PadicInt) -> Self {
        let need = self.base.precision + self.exponent;
        let s = s.reduce_to(need);
        Self::from_parts(self.mantissa * s, self.exponent, self.base)
    }

    pub fn mul_int(&self, n: i64) -> Self {
        let s = PadicInt::new(n, self.mantissa.modulus());
        Self::from_parts(self.mantissa * s, self.exponent, self.base)
    }

    /// Numerator after scaling by p^scale, in Z/p^(M+scale); `None` if the exponent exceeds the scale.
    pub fn scaled_numerator(&self, scale: u32) -> Option<PadicInt> {
        if self.exponent > scale {
            return None;
        }
        Some(self.lifted_mantissa(scale))
    }

    /// Inverse of [`Self::scaled_numerator`].
    pub fn from_scaled(numerator: PadicInt, scale: u32, base: Modulus) -> Result<Self> {
        Self::check_cap(scale, base)?;
        Ok(Self::from_parts(numerator, scale, base))
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.base, other.base, "mixing fractions of different bases");
    }
}

impl Add for PadicFraction {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.check(&rhs);
        let e = self.exponent.max(rhs.exponent);
        Self::from_parts(self.lifted_mantissa(e) + rhs.lifted_mantissa(e), e, self.base)
    }
}

impl Neg for PadicFraction {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            mantissa: -self.mantissa,
            ..self
        }
    }
}

impl Sub for PadicFraction {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl fmt::Display for PadicFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent == 0 {
            write!(f, "{}", self.mantissa.residue())
        } else {
            let d = checked_pow(self.base.p, self.exponent).unwrap_or(0);
            write!(f, "{}/{}", self.mantissa.residue(), d)
        }
    }
}

impl fmt::Debug for PadicFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (in Q/{}^{} Z_({}))",
            self, self.base.p, self.base.precision, self.base.p
        )
    }
}

/// Scalar model for the twist maps: the normalized generator p^(v(k)+1) or the literal r^(k(p-1)) - 1.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarMode {
    #[default]
    Normalized,
    Exact,
}

impl fmt::Display for ScalarMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarMode::Normalized => write!(f, "normalized"),
            ScalarMode::Exact => write!(f, "exact"),
        }
    }
}

fn pow_mod(base: u64, mut e: u64, m: u64) -> u64 {
    let mut acc: u128 = 1 % m as u128;
    let mut b = base as u128 % m as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m as u128;
        }
        b = b * b % m as u128;
        e >>= 1;
    }
    acc as u64
}

fn has_order(a: u64, order: u64, m: u64) -> bool {
    pow_mod(a, order, m) == 1
        && prime_factors(order)
            .into_iter()
            .all(|q| pow_mod(a, order / q, m) != 1)
}

/// Smallest generator of (Z/p^2)^x.
pub fn adams_unit(p: u64) -> Result<u64> {
    if !is_odd_prime(p) {
        return Err(Error::NotOddPrime(p));
    }
    let m = p * p;
    (2..m)
        .find(|&g| g % p != 0 && has_order(g, p * (p - 1), m))
        .ok_or(Error::NotAGenerator { unit: 0, p })
}

/// Builder for [`Context`].
#[derive(Clone, Debug)]
pub struct ContextBuilder {
    p: u64,
    precision: u32,
    length: Option<usize>,
    unit: Option<u64>,
    scalars: ScalarMode,
}

impl ContextBuilder {
    pub fn precision(mut self, precision: u32) -> Self {
        self.precision = precision;
        self
    }

    pub fn length(mut self, length: usize) -> Self {
        self.length = Some(length);
        self
    }

    pub fn length_opt(mut self, length: Option<usize>) -> Self {
        self.length = length;
        self
    }

    pub fn unit(mut self, unit: u64) -> Self {
        self.unit = Some(unit);
        self
    }

    pub fn unit_opt(mut self, unit: Option<u64>) -> Self {
        self.unit = unit;
        self
    }

    pub fn scalars(mut self, scalars: ScalarMode) -> Self {
        self.scalars = scalars;
        self
    }

    pub fn build(self) -> Result<Context> {
        let p = self.p;
        if !is_odd_prime(p) {
            return Err(Error::NotOddPrime(p));
        }
        if self.precision < 2 {
            return Err(Error::PrecisionTooSmall(self.precision));
        }
        // Fraction mantissas reach precision 2M + headroom.
        Modulus::new(p, 2 * self.precision + FRACTION_HEADROOM).map_err(|_| {
            Error::ModulusOverflow {
                p,
                precision: self.precision,
            }
        })?;
        let modulus = Modulus::new(p, self.precision)?;
        let period = (p - 1) * checked_pow(p, self.precision - 1).expect("fits");
        let minimum = 2 * period as usize + MIN_LENGTH_SLACK;
        let length = self
            .length
            .unwrap_or(2 * period as usize + DEFAULT_LENGTH_SLACK);
        if length < minimum {
            return Err(Error::LengthTooShort { length, minimum });
        }
        let unit = match self.unit {
            Some(u) => {
                if u % p == 0 || !has_order(u % (p * p), p * (p - 1), p * p) {
                    return Err(Error::NotAGenerator { unit: u, p });
                }
                u
            }
            None => adams_unit(p)?,
        };
        // A generator mod p^2 generates mod every p^M for odd p.
        debug_assert!(has_order(unit % modulus.value(), period, modulus.value()));

        let r = PadicInt::new(unit as i64, modulus);
        let r_inv = r.inverse().expect("unit");
        let power = |e: i64| {
            if e >= 0 {
                r.pow(e as u64)
            } else {
                r_inv.pow(e.unsigned_abs())
            }
        };
        let roots: Vec<PadicInt> = (0..=length as u64 + 1)
            .map(|j| power(root_exponent(j)))
            .collect();
        let one = PadicInt::one(modulus);
        let index_factors: Vec<PadicInt> = (0..length as u64)
            .map(|m| power(index_exponent(m)) - one)
            .collect();

        Ok(Context {
            inner: Arc::new(Inner {
                p,
                precision: self.precision,
                length,
                unit,
                scalars: self.scalars,
                modulus,
                period,
                roots,
                index_factors,
            }),
        })
    }
}

#[derive(Debug)]
struct Inner {
    p: u64,
    precision: u32,
    length: usize,
    unit: u64,
    scalars: ScalarMode,
    modulus: Modulus,
    period: u64,
    roots: Vec<PadicInt>,
    index_factors: Vec<PadicInt>,
}

/// Prime, precision, truncation length, Adams unit and scalar model, with cached root powers.
#[derive(Clone, Debug)]
pub struct Context {
    inner: Arc<Inner>,
}

impl PartialEq for Context {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.p() == other.p()
                && self.precision() == other.precision()
                && self.length() == other.length()
                && self.unit() == other.unit()
                && self.scalars() == other.scalars())
    }
}

impl Eq for Context {}

impl Context {
    pub fn builder(p: u64) -> ContextBuilder {
        ContextBuilder {
            p,
            precision: 3,
            length: None,
            unit: None,
            scalars: ScalarMode::Normalized,
        }
    }

    pub fn new(p: u64, precision: u32) -> Result<Self> {
        Self::builder(p).precision(precision).build()
    }

    pub fn p(&self) -> u64 {
        self.inner.p
    }

    pub fn precision(&self) -> u32 {
        self.inner.precision
    }

    pub fn length(&self) -> usize {
        self.inner.length
    }

    pub fn unit(&self) -> u64 {
        self.inner.unit
    }

    pub fn scalars(&self) -> ScalarMode {
        self.inner.scalars
    }

    pub fn modulus(&self) -> Modulus {
        self.inner.modulus
    }

    /// Same data with a different scalar model.
    pub fn with_scalars(&self, scalars: ScalarMode) -> Self {
        if scalars == self.scalars() {
            return self.clone();
        }
        Self::builder(self.p())
            .precision(self.precision())
            .length(self.length())
            .unit(self.unit())
            .scalars(scalars)
            .build()
            .expect("validated parameters")
    }

    pub fn int(&self, x: i64) -> PadicInt {
        PadicInt::new(x, self.modulus())
    }

    pub fn zero(&self) -> PadicInt {
        PadicInt::zero(self.modulus())
    }

    pub fn fraction(&self, numerator: i64, exponent: u32) -> Result<PadicFraction> {
        PadicFraction::new(numerator, exponent, self.modulus())
    }

    pub fn fraction_zero(&self) -> PadicFraction {
        PadicFraction::zero(self.modulus())
    }

    /// Order of r modulo p^M, (p-1) p^(M-1).
    pub fn period(&self) -> u64 {
        self.inner.period
    }

    pub fn rpow(&self, e: i64) -> PadicInt {
        self.rpow_at(e, self.precision()).expect("working precision")
    }

    pub fn rpow_at(&self, e: i64, precision: u32) -> Result<PadicInt> {
        let m = Modulus::new(self.p(), precision)?;
        let r = PadicInt::new(self.unit() as i64, m);
        Ok(if e >= 0 {
            r.pow(e as u64)
        } else {
            r.inverse().expect("unit").pow(e.unsigned_abs())
        })
    }

    /// r raised to the j-th root exponent, for 0 <= j <= length + 1.
    pub fn root(&self, j: usize) -> PadicInt {
        self.inner.roots[j]
    }

    /// r^(index exponent of m) - 1, for m < length.
    pub fn index_factor(&self, m: usize) -> PadicInt {
        self.inner.index_factors[m]
    }

    /// Whether index l >= 1 has r^(index exponent) = 1, so the structure map drops a unit there.
    pub fn is_pivot(&self, l: usize) -> bool {
        l >= 1 && index_exponent(l as u64).rem_euclid(self.period() as i64) == 0
    }

    /// Smallest pivot, 2 * period - 1.
    pub fn trusted_margin(&self) -> usize {
        2 * self.period() as usize - 1
    }

    /// Supports strictly below this index are solved exactly by the witness recursions.
    pub fn trusted_limit(&self) -> usize {
        self.length() - self.trusted_margin()
    }

    /// Smallest pivot at or above max(t, 1).
    pub fn pivot_at_or_above(&self, t: usize) -> Option<usize> {
        (t.max(1)..self.length()).find(|&l| self.is_pivot(l))
    }

    pub fn nu(&self, k: i64) -> u32 {
        int_valuation(self.p(), k)
    }

    /// Valuation of the twist scalar for k != 0, v(k) + 1.
    pub fn twist_valuation(&self, k: i64) -> Option<u32> {
        (k != 0).then(|| self.nu(k) + 1)
    }

    pub fn twist_scalar(&self, k: i64) -> Result<PadicInt> {
        if k == 0 {
            return Ok(self.zero());
        }
        let v = self.nu(k) + 1;
        if v >= self.precision() {
            return Err(Error::PrecisionExhausted(format!(
                "twist {k} has scalar valuation {v} >= precision {}",
                self.precision()
            )));
        }
        self.twist_scalar_at(k, self.precision())
    }

    /// Twist scalar at an arbitrary precision, without the exhaustion check.
    pub fn twist_scalar_at(&self, k: i64, precision: u32) -> Result<PadicInt> {
        let m = Modulus::new(self.p(), precision)?;
        if k == 0 {
            return Ok(PadicInt::zero(m));
        }
        Ok(match self.scalars() {
            ScalarMode::Normalized => PadicInt::one(m).mul_p_power(self.nu(k) + 1),
            ScalarMode::Exact => {
                let e = k
                    .checked_mul(self.p() as i64 - 1)
                    .ok_or_else(|| Error::InvalidInput(format!("twist {k} too large")))?;
                self.rpow_at(e, precision)? - PadicInt::one(m)
            }
        })
    }

    /// Unit part of the twist scalar, lambda_k / p^(v(k)+1), at the given precision.
    pub fn twist_unit_at(&self, k: i64, precision: u32) -> Result<PadicInt> {
        let v = self
            .twist_valuation(k)
            .ok_or_else(|| Error::InvalidInput("twist 0 has no unit part".into()))?;
        let full = self.twist_scalar_at(k, precision + v)?;
        let u = full.div_p_power(v).expect("valuation v(k)+1");
        Ok(u.reduce_to(precision))
    }

    /// x / lambda_k in Z/p^M when p^(v(k)+1) divides x.
    pub fn div_twist(&self, k: i64, x: PadicInt) -> Option<PadicInt> {
        let v = self.twist_valuation(k)?;
        let q = x.div_p_power(v)?;
        let u = self.twist_unit_at(k, self.precision()).ok()?;
        Some(q * u.inverse()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u64) -> Context {
        Context::new(p, 3).unwrap()
    }

    #[test]
    fn adams_units() {
        assert_eq!(adams_unit(3).unwrap(), 2);
        assert_eq!(adams_unit(5).unwrap(), 2);
        assert_eq!(adams_unit(7).unwrap(), 3);
        assert_eq!(adams_unit(11).unwrap(), 2);
        assert!(matches!(adams_unit(9), Err(Error::NotOddPrime(9))));
        assert!(matches!(adams_unit(2), Err(Error::NotOddPrime(2))));
    }

    #[test]
    fn rpow_negative() {
        let c = ctx(5);
        assert_eq!(c.rpow(-1).residue(), 63);
        assert_eq!(c.rpow(100).residue(), 1);
        assert_eq!(c.rpow(50).residue(), 124);
    }

    #[test]
    fn index_exponents() {
        let roots: Vec<i64> = (1..=6).map(root_exponent).collect();
        assert_eq!(roots, vec![0, 1, -1, 2, -2, 3]);
        assert_eq!(index_exponent(0), 0);
        assert_eq!(index_exponent(1), 1);
        assert_eq!(index_exponent(2), -1);
    }

    #[test]
    fn pivots_and_window() {
        let c = ctx(5);
        assert_eq!(c.period(), 100);
        assert_eq!(c.length(), 264);
        assert_eq!(c.trusted_margin(), 199);
        assert_eq!(c.trusted_limit(), 65);
        assert!(c.is_pivot(199) && c.is_pivot(200));
        assert!(!c.is_pivot(198) && !c.is_pivot(201) && !c.is_pivot(0));
        assert_eq!(c.pivot_at_or_above(0), Some(199));
        assert_eq!(ctx(7).trusted_limit(), 65);
    }

    #[test]
    fn context_validation() {
        assert!(matches!(Context::new(4, 3), Err(Error::NotOddPrime(4))));
        assert!(matches!(Context::new(5, 1), Err(Error::PrecisionTooSmall(1))));
        assert!(matches!(
            Context::builder(5).length(100).build(),
            Err(Error::LengthTooShort { minimum: 216, .. })
        ));
        assert!(matches!(
            Context::builder(5).unit(4).build(),
            Err(Error::NotAGenerator { unit: 4, p: 5 })
        ));
        assert!(matches!(
            Context::builder(5).precision(20).build(),
            Err(Error::ModulusOverflow { .. })
        ));
        assert_eq!(Context::builder(5).unit(3).build().unwrap().unit(), 3);
    }

    #[test]
    fn twist_scalars() {
        let c = ctx(5);
        assert_eq!(c.twist_scalar(0).unwrap().residue(), 0);
        assert_eq!(c.twist_scalar(1).unwrap().residue(), 5);
        assert_eq!(c.twist_scalar(-2).unwrap().residue(), 5);
        assert_eq!(c.twist_scalar(5).unwrap().residue(), 25);
        assert!(matches!(c.twist_scalar(25), Err(Error::PrecisionExhausted(_))));
        let e = c.with_scalars(ScalarMode::Exact);
        assert_eq!(e.twist_scalar(1).unwrap().residue(), 15);
        assert_eq!(e.twist_scalar(1).unwrap().valuation(), Valuation::Finite(1));
        assert_eq!(e.div_twist(1, c.int(30)).unwrap().residue(), 2);
        assert!(e.div_twist(1, c.int(3)).is_none());
    }

    #[test]
    fn inverse_and_valuation() {
        let c = ctx(5);
        let x = c.int(7);
        assert_eq!((x * x.inverse().unwrap()).residue(), 1);
        assert!(c.int(10).inverse().is_none());
        assert_eq!(c.int(50).valuation(), Valuation::Finite(2));
        assert_eq!(c.int(125).valuation(), Valuation::Top);
        assert_eq!(c.int(-1).signed(), -1);
    }

    #[test]
    fn fractions() {
        let c = ctx(5);
        let a = c.fraction(1, 2).unwrap();
        let b = c.fraction(5, 2).unwrap();
        assert_eq!(b, c.fraction(1, 1).unwrap());
        assert_eq!(a.mul_p_power(2), c.fraction(1, 0).unwrap());
        assert_eq!((b.mul_int(5)).to_int().unwrap().residue(), 1);
        let s = a + a.mul_int(24);
        assert_eq!(s, c.fraction(1, 0).unwrap());
        assert!(s.fractional_part().is_zero());
        assert_eq!(format!("{a}"), "1/25");
        assert_eq!(a.valuation(), Some(-2));
        assert!(matches!(c.fraction(1, 12), Err(Error::ExponentCap { .. })));
        let y = a.scaled_numerator(5).unwrap();
        assert_eq!(PadicFraction::from_scaled(y, 5, c.modulus()).unwrap(), a);
        assert_eq!(a.div_p_power(1).unwrap(), c.fraction(1, 3).unwrap());
        assert_eq!(c.fraction(125, 0).unwrap(), c.fraction_zero());
    }
}
