//! Randomized low-T-count synthesis and verification of Boolean-function
//! unitaries over the Clifford+T gate set.
//!
//! The toolkit compiles the unitary `U_f: |x, b> -> |x, b XOR f(x)>` of a
//! Boolean function `f` into a *distribution* over cheap circuits: each run
//! samples a handful of parity subsets, evaluates a small inner function of
//! those parities, and reversibly writes the result onto the target wire.
//! The averaged channel approximates `U_f` in diamond distance while the
//! T-count of every sampled circuit depends only on the number of parities,
//! not on the input arity.
//!
//! Module map:
//!
//! * [`boolfn`]: packed truth tables (up to 24 bits), named function
//!   families, promise masks, parity-check matrices.
//! * [`fourier`]: exact Walsh-Hadamard spectra with integer numerators,
//!   spectral one-norms, and sampling distributions over subsets.
//! * [`sketch`]: parity-sketch generators (uniform subsets for OR-type
//!   targets, spectral sampling for general targets), exact per-input error
//!   oracles, query-count selection, and parity decision tree depth.
//! * [`circuit`]: Clifford+T circuit representation, the 7-T Toffoli, the
//!   Toffoli ladder, sketch compilers, T-count accounting, and the text/JSON
//!   circuit formats.
//! * [`verify`]: statevector and basis-permutation simulators, Monte Carlo
//!   and exactly enumerated channel-error reports with diamond-distance
//!   certificates, and stabilizer-nullity measurement.

pub mod boolfn;
pub mod circuit;
mod error;
pub mod fourier;
pub mod rng;
pub mod sketch;
pub mod verify;

pub use error::{Error, Result};

/// Largest supported function arity. Truth tables are dense, so `2^n` bits
/// are materialized per function.
pub const MAX_ARITY: u32 = 24;

/// Exact arbitrary-precision rational used for every exposed probability,
/// norm, and error value.
pub type Rational = num_rational::BigRational;

/// Builds a `Rational` from an integer numerator/denominator pair.
pub fn rational(num: i64, den: u64) -> Rational {
    Rational::new(num.into(), den.into())
}

/// `1 / 2^k` as an exact rational.
pub fn pow2_inv(k: u32) -> Rational {
    Rational::new(1.into(), num_bigint::BigInt::from(1u8) << k)
}

/// Nearest float to an exact rational, for display and float-domain bounds.
pub fn rational_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().expect("rational magnitudes stay in f64 range")
}
