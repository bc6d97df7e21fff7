//! Exact arithmetic: quadratic integers in class-number-one fields,
//! principal ideals, cyclotomic field elements, certified complex balls,
//! and valuations at a fixed prime above `p`.

pub mod ball;
pub mod cyc;
pub mod ideal;
pub mod prime;
pub mod quad;
pub mod recognize;

pub use ball::{ComplexBall, RealBall};
pub use cyc::CycElem;
pub use ideal::IdealK;
pub use prime::PrimeContext;
pub use quad::{Field, QuadElem};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ArithError {
    #[error("ideals are not coprime")]
    NotCoprime,
    #[error("no unit multiple of the generator is congruent to 1 mod f")]
    NoNormalizedGenerator,
    #[error("the prime specification does not single out a prime above p")]
    AmbiguousPrime,
    #[error("no algebraic candidate within tolerance")]
    RecognitionFailed,
    #[error("precision escalation exhausted at {0} bits")]
    PrecisionExhausted(u32),
    #[error("element is not divisible")]
    NotDivisible,
    #[error("element is not invertible")]
    NotInvertible,
    #[error("incompatible cyclotomic orders: {0} and {1}")]
    OrderMismatch(u64, u64),
    #[error("unsupported field discriminant {0}")]
    BadDiscriminant(i64),
}

pub type Result<T> = std::result::Result<T, ArithError>;
