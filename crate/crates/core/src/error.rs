use thiserror::Error;

/// Every failure the library can report.
///
/// Variants marked "bug" signal a violated theorem-level invariant; they are
/// reported instead of panicking so the CLI can emit them as JSON.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is not coprime to the conductor {1}")]
    NotCoprime(i64, u64),
    #[error("input must be nonzero")]
    ZeroInput,
    #[error("index {0} is not a valid Gamma character index mod {1}")]
    BadIndex(i64, u64),
    #[error("{0} does not divide the modulus {1}")]
    BadDivisor(u64, u64),
    #[error("distribution argument must be nonzero")]
    ZeroArgument,
    #[error("modulus {0} is out of range (need m >= 3)")]
    BadModulus(u64),
    #[error("weight function is not constant on units")]
    NotConstantWeight,
    #[error("no integral decomposition found (bug)")]
    NoIntegralSolution,
    #[error("invalid partition: {0}")]
    BadPartition(String),
    #[error("equation {0} is not in the kernel of the character map (bug)")]
    NotInKernel(String),
    #[error("not an equation of the Mumford-Tate group: {0}")]
    NotAnEquation(String),
    #[error("2pi exponent {0} does not cancel (bug)")]
    TranscendentalResidue(String),
    #[error("radical exponent {1} of {0} is not a half integer (bug)")]
    NonHalfIntegerExponent(u64, String),
    #[error("exact and numeric values disagree: {0} (bug)")]
    NumericMismatch(String),
    #[error("value does not descend to Q(zeta_{0}) (bug)")]
    DescentFailure(u64),
    #[error("budget exhausted: {0}")]
    BudgetExhausted(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("odd modulus required, got {0}")]
    EvenModulus(u64),
    #[error("p = 2 is not supported")]
    EvenPrime,
    #[error("p = {0} divides the housing conductor {1}")]
    ConductorClash(u64, u64),
    #[error("no square-root witness found within conductor budget {0}")]
    WitnessNotFound(u64),
    #[error("matrix shape does not match the permutation i -> u^-1 i: {0}")]
    ShapeMismatch(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable name.
    pub fn code(&self) -> &'static str {
        use Error::*;
        match self {
            DivisionByZero => "DivisionByZero",
            NotCoprime(..) => "NotCoprime",
            ZeroInput => "ZeroInput",
            BadIndex(..) => "BadIndex",
            BadDivisor(..) => "BadDivisor",
            ZeroArgument => "ZeroArgument",
            BadModulus(..) => "BadModulus",
            NotConstantWeight => "NotConstantWeight",
            NoIntegralSolution => "NoIntegralSolution",
            BadPartition(..) => "BadPartition",
            NotInKernel(..) => "NotInKernel",
            NotAnEquation(..) => "NotAnEquation",
            TranscendentalResidue(..) => "TranscendentalResidue",
            NonHalfIntegerExponent(..) => "NonHalfIntegerExponent",
            NumericMismatch(..) => "NumericMismatch",
            DescentFailure(..) => "DescentFailure",
            BudgetExhausted(..) => "BudgetExhausted",
            BudgetExceeded(..) => "BudgetExceeded",
            EvenModulus(..) => "EvenModulus",
            EvenPrime => "EvenPrime",
            ConductorClash(..) => "ConductorClash",
            WitnessNotFound(..) => "WitnessNotFound",
            ShapeMismatch(..) => "ShapeMismatch",
            Parse(..) => "Parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
