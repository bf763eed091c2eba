use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Errors raised by curve construction, pool operations and the
/// approximation solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Price domain failed `0 < pmin < pmax < inf`.
    InvalidDomain { pmin: f64, pmax: f64 },
    /// A price argument must be strictly positive and finite.
    NonPositivePrice(f64),
    /// Breakpoints are unsorted, do not span the domain, or do not match
    /// the segment count.
    MalformedBreakpoints(&'static str),
    /// Curve value would be negative at the given price.
    NegativeValue { at: f64 },
    /// Curve would increase across or within a segment at the given price.
    NotNonIncreasing { at: f64 },
    /// Operands live on different price domains.
    DomainMismatch,
    /// Scaling a curve by a negative factor would leave the cone.
    NegativeScale(f64),
    /// Requested quantity is outside the curve's attainable range.
    QuantityOutOfRange { q: f64, lo: f64, hi: f64 },
    /// Price lies outside the pool/measure domain.
    OutOfDomain(f64),
    /// Probability arguments must lie in `[0, 1]`.
    InvalidProbability(f64),
    /// Weight-function construction failed.
    InvalidWeight(&'static str),
    /// Tick list is unsorted, out of range, or missing required endpoints.
    InvalidTicks(&'static str),
    /// Coefficient vector length does not match the basis size.
    CoefficientMismatch { expected: usize, got: usize },
    /// Cone coefficients must be nonnegative.
    NegativeCoefficient(f64),
    /// Generic invalid scalar/config parameter.
    InvalidParameter(&'static str),
    /// The optimizing solver only supports p in {1, 2}.
    UnsupportedExponent(f64),
    /// No LP position with this id.
    UnknownLp(String),
    /// An LP position with this id already exists.
    DuplicateLp(String),
    /// The pool's numéraire reserve dropped below the solvency floor.
    SolvencyBreach { reserve: f64, floor: f64 },
    /// An event in a sequence failed; carries the step index and cause.
    SequenceFailed { index: usize, cause: Box<Error> },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidDomain { pmin, pmax } => {
                write!(f, "invalid price domain [{pmin}, {pmax}]")
            }
            Error::NonPositivePrice(p) => write!(f, "price must be positive, got {p}"),
            Error::MalformedBreakpoints(why) => write!(f, "malformed breakpoints: {why}"),
            Error::NegativeValue { at } => write!(f, "curve value negative at p = {at}"),
            Error::NotNonIncreasing { at } => write!(f, "curve increases at p = {at}"),
            Error::DomainMismatch => write!(f, "price domains do not match"),
            Error::NegativeScale(c) => write!(f, "scale factor must be nonnegative, got {c}"),
            Error::QuantityOutOfRange { q, lo, hi } => {
                write!(f, "quantity {q} outside attainable range [{lo}, {hi}]")
            }
            Error::OutOfDomain(p) => write!(f, "price {p} outside domain"),
            Error::InvalidProbability(q) => write!(f, "probability {q} outside [0, 1]"),
            Error::InvalidWeight(why) => write!(f, "invalid weight function: {why}"),
            Error::InvalidTicks(why) => write!(f, "invalid ticks: {why}"),
            Error::CoefficientMismatch { expected, got } => {
                write!(f, "expected {expected} coefficients, got {got}")
            }
            Error::NegativeCoefficient(c) => {
                write!(f, "cone coefficients must be nonnegative, got {c}")
            }
            Error::InvalidParameter(why) => write!(f, "invalid parameter: {why}"),
            Error::UnsupportedExponent(p) => {
                write!(f, "solver supports p in {{1, 2}}, got {p}")
            }
            Error::UnknownLp(id) => write!(f, "unknown LP position: {id}"),
            Error::DuplicateLp(id) => write!(f, "LP position already exists: {id}"),
            Error::SolvencyBreach { reserve, floor } => {
                write!(f, "numéraire reserve {reserve} fell below solvency floor {floor}")
            }
            Error::SequenceFailed { index, cause } => {
                write!(f, "event {index} failed: {cause}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
