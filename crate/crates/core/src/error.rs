use thiserror::Error;

use crate::complex::Shape;
use crate::homology::Obstruction;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),

    #[error("precision must be at least 2, got {0}")]
    PrecisionTooSmall(u32),

    #[error("p^{precision} does not fit the residue word for p = {p}")]
    ModulusOverflow { p: u64, precision: u32 },

    #[error("sequence length {length} is below the minimum {minimum} needed for a trusted window")]
    LengthTooShort { length: usize, minimum: usize },

    #[error("{unit} does not generate (Z/{p}^2)^x")]
    NotAGenerator { unit: u64, p: u64 },

    #[error("fraction exponent {exponent} exceeds the cap {cap}")]
    ExponentCap { exponent: u32, cap: u32 },

    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("degree {degree}: expected shape {expected:?}, found {found:?}")]
    ShapeMismatch {
        degree: i64,
        expected: Shape,
        found: Shape,
    },

    #[error("twist mismatch: expected {expected}, found {found}")]
    TwistMismatch { expected: i64, found: i64 },

    #[error("sequence length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("negative p-exponent {exponent} for the pair (m, n) = ({m}, {n})")]
    NegativeTwistExponent { m: usize, n: usize, exponent: i64 },

    #[error("p-exponent undefined for the pair (m, n) = ({m}, {n}): N({i}, {index}) vanishes mod p^M")]
    UndefinedTwistExponent {
        m: usize,
        n: usize,
        i: i64,
        index: usize,
    },

    #[error("product term Theta_{m} * Theta_{n} reaches index {} >= length {length}", m + n)]
    TruncationOverflow { m: usize, n: usize, length: usize },

    #[error("support index {index} lies outside the trusted window (< {limit})")]
    UntrustedSupport { index: usize, limit: usize },

    #[error("not a boundary: {0}")]
    NotBoundary(Obstruction),

    #[error("cochain in degree {0} is not a cycle")]
    NotCycle(i64),

    #[error("constructed witness in degree {0} does not map onto its target")]
    WitnessCheckFailed(i64),

    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
