//! Exact-arithmetic compression driven by next-bit predictors.
//!
//! This crate implements an arithmetic coder whose probability model is a
//! *randomized* next-bit predictor made pseudo-deterministic by adding a
//! small amount of advice-controlled noise and rounding the result onto a
//! coarse grid. Encoder and decoder never share randomness; the only shared
//! state is a logarithmically small advice integer that travels inside the
//! encoded container. Bits whose conditional probability falls below a
//! threshold are escaped verbatim into a side list instead of being coded,
//! which keeps the output length close to the information content even when
//! the model assigns some bits vanishing probability.
//!
//! All probability arithmetic is exact (arbitrary-precision rationals), so
//! encoder and decoder agree bit-for-bit whenever the predictor is
//! consistent between them.
//!
//! Module map:
//!
//! - [`bits`]: bit strings and prefix handling.
//! - [`rng`]: deterministic seed splitting and exact sampling primitives.
//! - [`numeric`]: exact `ceil(-log2)` and directed dyadic bounds for `log2`.
//! - [`source`]: toy distribution families with exactly computable
//!   conditionals (uniform, i.i.d., Markov, enumerated sampler).
//! - [`predictor`]: the base-predictor contract and the noise-and-rounding
//!   wrapper that makes predictions pseudo-deterministic.
//! - [`codec`]: the encoder/decoder pair, plus the self-testing robust
//!   wrapper with a verbatim fallback.
//! - [`container`]: the bit-exact self-delimiting serialization format.
//! - [`constants`]: frozen container-overhead constants used by the length
//!   bound assertions.
//! - [`vectors`]: golden-vector verification for the container format.
//! - [`harness`]: experiment runners and bound checkers.

pub mod bits;
pub mod codec;
pub mod constants;
pub mod container;
pub mod harness;
pub mod numeric;
pub mod predictor;
pub mod rng;
pub mod source;
pub mod vectors;

use std::fmt;

pub use bits::{Bit, BitString};
pub use codec::{decode, encode, robustify_decode, robustify_encode, Encoding, RobustEncoding};
pub use predictor::{pseudo_predict, sample_advice, Advice, BasePredictor, PredictorParams};
pub use source::{ExactProb, SourceKind, SourceSpec};

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A conditional probability was requested for a prefix with zero mass.
    ZeroMassPrefix { prefix: BitString },
    /// An exhaustive-enumeration operation was asked to walk a support that
    /// is too large for it.
    SupportTooLarge { ell: u32, max: u32 },
    /// An input string did not have the length the source demands.
    InvalidLength { expected: usize, got: usize },
    /// A serialized container (or golden-vector file) failed to parse.
    MalformedEncoding { detail: String },
    /// A golden vector did not reproduce; carries the first divergence.
    VectorMismatch { vector: String, detail: String },
    /// A configuration file failed to parse; names the offending field.
    Config { field: String, detail: String },
    /// A precondition on operation arguments was violated.
    InvalidArgument { detail: String },
    /// File input/output failed.
    Io { detail: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ZeroMassPrefix { prefix } => {
                write!(f, "prefix {prefix} has zero mass; conditional undefined")
            }
            Error::SupportTooLarge { ell, max } => {
                write!(f, "output length {ell} exceeds enumeration limit {max}")
            }
            Error::InvalidLength { expected, got } => {
                write!(f, "expected a string of length {expected}, got {got}")
            }
            Error::MalformedEncoding { detail } => write!(f, "malformed encoding: {detail}"),
            Error::VectorMismatch { vector, detail } => {
                write!(f, "golden vector {vector:?} mismatch: {detail}")
            }
            Error::Config { field, detail } => {
                write!(f, "config field `{field}`: {detail}")
            }
            Error::InvalidArgument { detail } => write!(f, "invalid argument: {detail}"),
            Error::Io { detail } => write!(f, "io: {detail}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
