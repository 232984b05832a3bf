use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    CompositeModulus(u64),
    #[error("modulus {0} exceeds the supported maximum 2^26")]
    ModulusTooLarge(u64),
    #[error("modulus {0} is below the supported minimum 3")]
    ModulusTooSmall(u64),
    #[error("zero has no discrete logarithm")]
    ZeroHasNoLog,
    #[error("division by zero")]
    DivisionByZero,
    #[error("character exponent {k} out of range 0..={max}")]
    ExponentOutOfRange { k: u64, max: u64 },
    #[error("operation requires a nontrivial character")]
    TrivialCharacter,
    #[error("requested set size {size} exceeds p - 1 = {max}")]
    SizeTooLarge { size: usize, max: u64 },
    #[error("subgroup index {index} does not divide p - 1 = {order}")]
    BadSubgroupIndex { index: u64, order: u64 },
    #[error("explicit set contains an element congruent to zero")]
    ZeroInExplicitSet,
    #[error("interval [{start}, {start} + {len}) does not lie inside 1..p-1 for p = {p}")]
    IntervalOutOfRange { start: u64, len: u64, p: u64 },
    #[error("geometric progression with start {start} and ratio {ratio} hits zero mod {p}")]
    ZeroInProgression { start: u64, ratio: u64, p: u64 },
    #[error("tensor weights over {cells} cells exceed the cap 2^24")]
    TensorTooLarge { cells: u64 },
    #[error("sets live in different fields (p = {0} vs p = {1})")]
    FieldMismatch(u64, u64),
    #[error("work estimate {needed} exceeds budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("operation needs multilinear (constant or factored) weights, got a general tensor")]
    GeneralTensorWeights,
    #[error("weight system does not match the set cardinalities")]
    WeightShapeMismatch,
    #[error("set {0} is empty")]
    EmptySet(&'static str),
    #[error("moment order nu = {0} outside 1..=8")]
    NuOutOfRange(u32),
    #[error("bad parameters: {0}")]
    BadParameters(String),
    #[error("variant {0} is not defined for this operation")]
    UnsupportedVariant(&'static str),
}
