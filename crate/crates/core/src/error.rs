use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid field configuration: {0}")]
    InvalidConfig(String),
    #[error("operands belong to different fields")]
    ConfigMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("no square root exists")]
    NoSquareRoot,
    #[error("denominator {0} is not a unit in the residue field")]
    DenominatorNotUnit(String),
    #[error("cannot parse local number: {0}")]
    ParseLocal(String),

    #[error("series shape mismatch: {0}")]
    CutoffMismatch(String),
    #[error("substituted map has a nonzero constant term")]
    NonzeroConstantTerm,
    #[error("jacobian at the origin is not invertible modulo the uniformizer")]
    SingularJacobian,
    #[error("rescaled map has non-integral coefficients")]
    NonIntegralRescale,
    #[error("series square root needs constant term 1")]
    BadConstantTerm,
    #[error("evaluation point outside the convergence polydisc")]
    ConvergenceDomain,
    #[error("coefficient is not integral: {0}")]
    NotIntegral(String),

    #[error("cyclotomic values over different primes")]
    PrimeMismatch,

    #[error("step function cells overlap")]
    OverlappingCells,
    #[error("coset enumeration of {needed} cells exceeds the budget of {budget}")]
    DepthOverflow { needed: u128, budget: u64 },
    #[error("double transform is not a scalar multiple of the reflection")]
    ConstantNotScalar,
    #[error("coefficient overflow in exact accumulation")]
    Overflow,

    #[error("point is not a critical point: {0}")]
    NotCritical(String),
    #[error("hessian is degenerate modulo the uniformizer")]
    DegenerateHessian,
    #[error("residue class {0} has vanishing gradient but degenerate hessian")]
    DegenerateCriticalClass(String),

    #[error("gradient vanishes on the region: {0}")]
    GradientVanishes(String),
    #[error("subdivision budget exhausted")]
    BudgetExhausted,

    #[error("point is not a critical point over Q")]
    NotCriticalOverQ,
    #[error("hessian is degenerate over Q")]
    DegenerateHessianOverQ,
    #[error("prime {0} is bad for this formula")]
    BadPrime(u32),

    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("non-polynomial expression at {line}:{col}: {msg}")]
    NonPolynomial { line: usize, col: usize, msg: String },
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
