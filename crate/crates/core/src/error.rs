use thiserror::Error;

/// Every failure mode of the library.
///
/// Variants map onto the precondition that was violated; the CLI turns
/// [`Error::BudgetExceeded`] into its own exit status and everything else
/// into a precondition failure.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    CompositeModulus(u64),
    #[error("modulus {0} is too small to define a field")]
    ModulusTooSmall(u64),
    #[error("operation requires odd characteristic")]
    EvenCharacteristic,
    #[error("division by the zero polynomial")]
    DivisionByZeroPoly,
    #[error("gcd of two zero polynomials is undefined")]
    BothZero,
    #[error("operation requires a polynomial of positive degree")]
    ConstantPolynomial,
    #[error("operation is undefined on the zero polynomial")]
    ZeroPolynomial,
    #[error("polynomial must be monic")]
    NotMonic,
    #[error("polynomials live over different fields (p = {0} and p = {1})")]
    FieldMismatch(u32, u32),
    #[error("enumeration of {needed} items exceeds the budget of {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("degree {degree} exceeds reversal length {n}")]
    DegreeExceedsN { degree: usize, n: usize },
    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),
    #[error("invalid short interval: {0}")]
    InvalidInterval(String),
    #[error("unsupported modulus shape: {0}")]
    UnsupportedModulusShape(String),
    #[error("the trivial character has no L-polynomial in this sense")]
    TrivialCharacter,
    #[error("root finding did not converge: {0}")]
    RootFindingDidNotConverge(String),
    #[error("character is not even and primitive")]
    NotEvenPrimitive,
    #[error("no closed form for I_{k}({m};{n}); use Monte Carlo mode")]
    ClosedFormNotAvailable { k: usize, m: usize, n: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("residue is not coprime to the modulus")]
    NotCoprime,
    #[error("invalid shift tuple: {0}")]
    InvalidShiftTuple(String),
    #[error("shifts must be pairwise distinct")]
    DuplicateShifts,
    #[error("shift must be nonzero")]
    ZeroShift,
    #[error("modulus is not squarefree")]
    NotSquarefree,
    #[error("degree out of range: {0}")]
    DegreeOutOfRange(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("cannot parse polynomial {text:?}: {reason}")]
    Parse { text: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
