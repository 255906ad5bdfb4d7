//! Parity sketches: randomized approximations of a Boolean function by a
//! small inner function of XOR subsets.
//!
//! A sketch holds `k` variable subsets `S_1..S_k` and an inner function `g0`;
//! it computes `g(x) = g0(XOR_{S_1}(x), ..., XOR_{S_k}(x))`. Two samplers
//! produce sketches whose *average* behavior approximates a target `f`:
//!
//! * [`sample_or_sketch`]: uniform independent subsets with an OR inner
//!   function, approximating `OR_n`. The per-input error is exactly 0 at
//!   `x = 0` and exactly `2^-k` elsewhere.
//! * [`sample_fourier_sketch`]: subsets drawn from `p(S) = |fhat(S)| / norm`
//!   with a signed-threshold inner function, approximating any non-zero `f`.
//!   The per-input error obeys a Hoeffding bound `2 exp(-k / (8 norm^2))`.
//!
//! Exact per-input error probabilities for both samplers are computed as
//! arbitrary-precision rationals ([`exact_error_or`], [`exact_error_fourier`]),
//! so certificates never rest on sampling.

mod pdt;
mod table;

pub use pdt::pdt_min_depth;
pub use table::{table_protocol, TableProtocol, TableRow};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::boolfn::{BooleanFunction, SubsetMask};
use crate::fourier::SamplingDistribution;
use crate::{rational, Error, Rational, Result};

/// Inner function applied to the parity bits.
///
/// `Or` and `SignedThreshold` are the two quantum-compiled variants. `NotOr`
/// and `Expr` arise in the randomized-parity-decision-tree protocols of the
/// bench table, where sketches are evaluated classically and only their gate
/// cost is accounted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InnerFunction {
    /// OR of the parities.
    Or,
    /// 1 exactly when every parity vanishes.
    NotOr,
    /// 1 iff `(norm / k) * sum_i sign_i * (-1)^{parity_i} >= 1/2`; the tie
    /// falls on the 1 side. `norm` is stored as an exact unreduced fraction
    /// `norm_num / norm_den` with `norm_den = 2^n`.
    SignedThreshold {
        signs: Vec<i8>,
        norm_num: u64,
        norm_den: u64,
    },
    /// Gate expression over the parity bits.
    Expr(InnerExpr),
}

/// A sampled parity sketch `g(x) = inner(XOR_{S_1}(x), ..., XOR_{S_k}(x))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParitySketch {
    pub n: u32,
    pub subsets: Vec<SubsetMask>,
    pub inner: InnerFunction,
}

impl ParitySketch {
    /// Number of parities.
    pub fn k(&self) -> u32 {
        self.subsets.len() as u32
    }

    /// Evaluates the sketch; `x` must satisfy `x < 2^n`.
    pub fn eval(&self, x: u32) -> bool {
        debug_assert!(self.n >= 32 || x >> self.n == 0);
        match &self.inner {
            InnerFunction::Or => self.subsets.iter().any(|s| s.parity(x)),
            InnerFunction::NotOr => !self.subsets.iter().any(|s| s.parity(x)),
            InnerFunction::SignedThreshold { signs, norm_num, norm_den } => {
                debug_assert_eq!(signs.len(), self.subsets.len());
                let plus = self
                    .subsets
                    .iter()
                    .zip(signs)
                    .filter(|(s, sign)| s.parity(x) == (**sign < 0))
                    .count() as u32;
                threshold_decision(self.k(), plus, *norm_num, *norm_den)
            }
            InnerFunction::Expr(e) => {
                let bits: Vec<bool> = self.subsets.iter().map(|s| s.parity(x)).collect();
                e.eval(&bits)
            }
        }
    }

    /// Gate cost of the inner function (see [`InnerFunction`] variants and
    /// [`InnerCost`]); depends only on `k`, never on `n`.
    pub fn inner_cost(&self) -> InnerCost {
        match &self.inner {
            InnerFunction::Or => InnerCost { and_or: self.k().saturating_sub(1) as u64, not: 0 },
            InnerFunction::NotOr => {
                InnerCost { and_or: self.k().saturating_sub(1) as u64, not: 1 }
            }
            InnerFunction::SignedThreshold { .. } => {
                // Unary-counter threshold over k bits with cutoff at most k.
                let k = self.k() as u64;
                InnerCost { and_or: 2 * k * (k + 1), not: 1 }
            }
            InnerFunction::Expr(e) => e.cost(),
        }
    }
}

/// Signed-threshold decision for `plus` positive samples out of `k`:
/// `(norm/k) * (2*plus - k) >= 1/2`, cleared of denominators. Bounds:
/// `norm_num <= 2^36`, `norm_den <= 2^24`, so `i128` never overflows.
#[inline]
fn threshold_decision(k: u32, plus: u32, norm_num: u64, norm_den: u64) -> bool {
    let spread = 2 * plus as i128 - k as i128;
    2 * norm_num as i128 * spread >= k as i128 * norm_den as i128
}

/// Least number of positive samples out of `k` that decides 1, or `k + 1`
/// when even all-positive stays below threshold.
pub fn threshold_cutoff(k: u32, norm_num: u64, norm_den: u64) -> u32 {
    (0..=k)
        .find(|&j| threshold_decision(k, j, norm_num, norm_den))
        .unwrap_or(k + 1)
}

/// Synthesis-side arity cap. Truth tables stop at [`crate::MAX_ARITY`], but
/// sampling and compiling sketches only touches subset masks and wire
/// indices, so it extends to one mask word.
pub const MAX_SKETCH_ARITY: u32 = 64;

/// Draws `k` independent uniform subsets of `[n]` with an OR inner function.
///
/// Arity may exceed the truth-table cap (up to 64): the resulting sketch
/// can be compiled but not evaluated against a dense table.
pub fn sample_or_sketch<R: rand::Rng + ?Sized>(n: u32, k: u32, rng: &mut R) -> Result<ParitySketch> {
    if n == 0 || n > MAX_SKETCH_ARITY {
        return Err(Error::ArityOutOfRange { n, max: MAX_SKETCH_ARITY });
    }
    let subsets = (0..k)
        .map(|_| {
            SubsetMask(if n == 64 {
                rng.random::<u64>()
            } else {
                rng.random_range(0..1u64 << n)
            })
        })
        .collect();
    Ok(ParitySketch { n, subsets, inner: InnerFunction::Or })
}

/// Draws `k` subsets from the spectral distribution with the matching
/// signed-threshold inner function. Requires `k >= 1`.
pub fn sample_fourier_sketch<R: rand::Rng + ?Sized>(
    dist: &SamplingDistribution,
    k: u32,
    rng: &mut R,
) -> Result<ParitySketch> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "spectral sketches need at least one sample".into(),
        ));
    }
    let mut subsets = Vec::with_capacity(k as usize);
    let mut signs = Vec::with_capacity(k as usize);
    for _ in 0..k {
        let (mask, sign) = dist.sample(rng);
        subsets.push(mask);
        signs.push(sign);
    }
    Ok(ParitySketch {
        n: dist.n(),
        subsets,
        inner: InnerFunction::SignedThreshold {
            signs,
            norm_num: dist.total(),
            norm_den: 1u64 << dist.n(),
        },
    })
}

/// Exact error probability of a `k`-subset OR sketch at input `x`:
/// 0 at `x = 0`, otherwise exactly `2^-k` (each uniform parity of a non-zero
/// input is an independent fair bit, and the sketch errs only when all `k`
/// stay zero).
pub fn exact_error_or(n: u32, k: u32, x: u32) -> Result<Rational> {
    if n == 0 || n > crate::MAX_ARITY {
        return Err(Error::ArityOutOfRange { n, max: crate::MAX_ARITY });
    }
    if x >= 1 << n {
        return Err(Error::InputOutOfRange { x, n });
    }
    if x == 0 {
        Ok(Rational::zero())
    } else {
        Ok(crate::pow2_inv(k))
    }
}

/// Exact error probability of a `k`-sample spectral sketch of `f` at `x`.
///
/// Each draw lands on the positive side (`sign(fhat(S)) * chi_S(x) = +1`)
/// with exact probability `q_x`; the sketch outputs 1 iff the number of
/// positive draws reaches the threshold cutoff. The error is the matching
/// exact binomial tail.
pub fn exact_error_fourier(
    f: &BooleanFunction,
    dist: &SamplingDistribution,
    k: u32,
    x: u32,
) -> Result<Rational> {
    if f.n() != dist.n() {
        return Err(Error::InvalidParameter(format!(
            "function arity {} != distribution arity {}",
            f.n(),
            dist.n()
        )));
    }
    if k == 0 {
        return Err(Error::InvalidParameter(
            "spectral sketches need at least one sample".into(),
        ));
    }
    let value = f.eval(x)?;
    let plus_weight: u64 = dist
        .masks()
        .iter()
        .zip(dist.signs())
        .zip(dist.weights())
        .filter(|((mask, sign), _)| mask.parity(x) == (**sign < 0))
        .map(|(_, w)| *w)
        .sum();
    let q = rational(plus_weight as i64, dist.total());
    let cutoff = threshold_cutoff(k, dist.total(), 1u64 << dist.n());
    let p_one = binomial_tail_ge(k, cutoff, &q);
    Ok(if value { Rational::one() - p_one } else { p_one })
}

/// `P[Binomial(k, q) >= j0]`, exact.
pub fn binomial_tail_ge(k: u32, j0: u32, q: &Rational) -> Rational {
    if j0 > k {
        return Rational::zero();
    }
    let p = Rational::one() - q;
    // Power tables avoid repeated exponentiation.
    let mut q_pow = vec![Rational::one()];
    let mut p_pow = vec![Rational::one()];
    for i in 0..k as usize {
        q_pow.push(&q_pow[i] * q);
        p_pow.push(&p_pow[i] * &p);
    }
    let mut coeff = BigInt::one();
    let mut tail = Rational::zero();
    for j in 0..=k {
        if j >= j0 {
            tail += Rational::from(coeff.clone())
                * &q_pow[j as usize]
                * &p_pow[(k - j) as usize];
        }
        if j < k {
            coeff = coeff * BigInt::from(k - j) / BigInt::from(j + 1);
        }
    }
    tail
}

/// Hoeffding-style analytic bound `2 exp(-k / (8 norm^2))` on the per-input
/// error of a `k`-sample spectral sketch.
pub fn fourier_error_bound(one_norm: &Rational, k: u32) -> f64 {
    let norm = rational_to_f64(one_norm);
    2.0 * (-(k as f64) / (8.0 * norm * norm)).exp()
}

/// Number of uniform subsets for an OR-type sketch meeting diamond error
/// `epsilon`: `ceil(log2(1/epsilon)) + 2`.
pub fn choose_k_or(epsilon: f64) -> Result<u32> {
    check_epsilon(epsilon)?;
    Ok(guarded_ceil((1.0 / epsilon).log2()) + 2)
}

/// Number of spectral samples meeting diamond error `epsilon`:
/// `ceil(8 * norm^2 * ln(8/epsilon))`, at least 1.
pub fn choose_k_fourier(one_norm: &Rational, epsilon: f64) -> Result<u32> {
    check_epsilon(epsilon)?;
    if one_norm.is_zero() {
        return Err(Error::DegenerateFunction("zero spectrum has no sample count"));
    }
    let norm = rational_to_f64(one_norm);
    let raw = 8.0 * norm * norm * (8.0 / epsilon).ln();
    Ok(guarded_ceil(raw).max(1))
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    Ok(())
}

/// Ceiling with a relative snap window: values within `1e-9` of an integer
/// are treated as that integer before rounding up, so float dust on exact
/// powers of two cannot inflate the count.
fn guarded_ceil(v: f64) -> u32 {
    let snapped = v.round();
    let v = if (v - snapped).abs() < 1e-9 * snapped.abs().max(1.0) { snapped } else { v };
    v.ceil().max(0.0) as u32
}

pub(crate) use crate::rational_to_f64;

/// Gate cost of an inner function: 2-input AND/OR gates and NOT gates.
/// Parities themselves are not counted; they are CNOT-only.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InnerCost {
    pub and_or: u64,
    pub not: u64,
}

impl InnerCost {
    /// T-count estimate at 7 T per 2-input AND/OR; NOT and XOR are free.
    pub fn t_estimate(&self) -> u64 {
        7 * self.and_or
    }
}

/// Gate expression over parity bits, used by the bench-table protocols.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum InnerExpr {
    /// Parity bit `idx`.
    Leaf { idx: u32 },
    Const { value: bool },
    Not { arg: Box<InnerExpr> },
    And { args: Vec<InnerExpr> },
    Or { args: Vec<InnerExpr> },
    Xor { args: Vec<InnerExpr> },
    /// 1 iff at most `bound` of the arguments are 1.
    AtMost { bound: u32, args: Vec<InnerExpr> },
    /// 1 iff strictly more than half of the arguments are 1.
    Majority { args: Vec<InnerExpr> },
}

impl InnerExpr {
    pub fn leaf(idx: u32) -> Self {
        InnerExpr::Leaf { idx }
    }

    pub fn eval(&self, bits: &[bool]) -> bool {
        match self {
            InnerExpr::Leaf { idx } => bits[*idx as usize],
            InnerExpr::Const { value } => *value,
            InnerExpr::Not { arg } => !arg.eval(bits),
            InnerExpr::And { args } => args.iter().all(|a| a.eval(bits)),
            InnerExpr::Or { args } => args.iter().any(|a| a.eval(bits)),
            InnerExpr::Xor { args } => args.iter().filter(|a| a.eval(bits)).count() % 2 == 1,
            InnerExpr::AtMost { bound, args } => {
                args.iter().filter(|a| a.eval(bits)).count() as u32 <= *bound
            }
            InnerExpr::Majority { args } => {
                2 * args.iter().filter(|a| a.eval(bits)).count() > args.len()
            }
        }
    }

    /// Largest referenced parity index.
    pub fn max_leaf(&self) -> Option<u32> {
        match self {
            InnerExpr::Leaf { idx } => Some(*idx),
            InnerExpr::Const { .. } => None,
            InnerExpr::Not { arg } => arg.max_leaf(),
            InnerExpr::And { args }
            | InnerExpr::Or { args }
            | InnerExpr::Xor { args }
            | InnerExpr::AtMost { args, .. }
            | InnerExpr::Majority { args } => args.iter().filter_map(|a| a.max_leaf()).max(),
        }
    }

    /// Cost of the fixed synthesis: n-ary AND/OR as gate chains, XOR via
    /// `(a OR b) AND NOT(a AND b)`, counting constructions via a unary
    /// counter of `2(bound + 1)` gates per input.
    pub fn cost(&self) -> InnerCost {
        let mut c = InnerCost { and_or: 0, not: 0 };
        self.accumulate_cost(&mut c);
        c
    }

    fn accumulate_cost(&self, c: &mut InnerCost) {
        match self {
            InnerExpr::Leaf { .. } | InnerExpr::Const { .. } => {}
            InnerExpr::Not { arg } => {
                c.not += 1;
                arg.accumulate_cost(c);
            }
            InnerExpr::And { args } | InnerExpr::Or { args } => {
                c.and_or += args.len().saturating_sub(1) as u64;
                for a in args {
                    a.accumulate_cost(c);
                }
            }
            InnerExpr::Xor { args } => {
                c.and_or += 3 * args.len().saturating_sub(1) as u64;
                c.not += args.len().saturating_sub(1) as u64;
                for a in args {
                    a.accumulate_cost(c);
                }
            }
            InnerExpr::AtMost { bound, args } => {
                c.and_or += 2 * (*bound as u64 + 1) * args.len() as u64;
                c.not += 1;
                for a in args {
                    a.accumulate_cost(c);
                }
            }
            InnerExpr::Majority { args } => {
                let bound = args.len() as u64 / 2;
                c.and_or += 2 * (bound + 1) * args.len() as u64;
                c.not += 2;
                for a in args {
                    a.accumulate_cost(c);
                }
            }
        }
    }
}

/// On-disk sketch format: the sketch plus provenance metadata.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SketchFile {
    pub n: u32,
    pub k: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub subsets: Vec<SubsetMask>,
    pub inner: InnerFunction,
}

impl SketchFile {
    pub fn new(sketch: &ParitySketch, seed: Option<u64>) -> Self {
        SketchFile {
            n: sketch.n,
            k: sketch.k(),
            seed,
            subsets: sketch.subsets.clone(),
            inner: sketch.inner.clone(),
        }
    }

    /// Validates internal consistency and returns the sketch.
    pub fn into_sketch(self) -> Result<ParitySketch> {
        if self.n == 0 || self.n > MAX_SKETCH_ARITY {
            return Err(Error::ArityOutOfRange { n: self.n, max: MAX_SKETCH_ARITY });
        }
        if self.k as usize != self.subsets.len() {
            return Err(Error::InvalidParameter(format!(
                "k = {} but {} subsets listed",
                self.k,
                self.subsets.len()
            )));
        }
        if let Some(s) = self.subsets.iter().find(|s| self.n < 64 && s.0 >> self.n != 0) {
            return Err(Error::InvalidParameter(format!(
                "subset {s} references variables beyond arity {}",
                self.n
            )));
        }
        if let InnerFunction::SignedThreshold { signs, norm_den, .. } = &self.inner {
            if signs.len() != self.subsets.len() {
                return Err(Error::InvalidParameter(format!(
                    "{} signs for {} subsets",
                    signs.len(),
                    self.subsets.len()
                )));
            }
            if signs.iter().any(|s| *s != 1 && *s != -1) {
                return Err(Error::InvalidParameter("signs must be +-1".into()));
            }
            if *norm_den == 0 || !norm_den.is_power_of_two() {
                return Err(Error::InvalidParameter(
                    "norm denominator must be a power of two".into(),
                ));
            }
        }
        if let InnerFunction::Expr(e) = &self.inner {
            if let Some(max) = e.max_leaf() {
                if max as usize >= self.subsets.len() {
                    return Err(Error::InvalidParameter(format!(
                        "expression references parity {max} but only {} exist",
                        self.subsets.len()
                    )));
                }
            }
        }
        Ok(ParitySketch { n: self.n, subsets: self.subsets, inner: self.inner })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sketch serialization cannot fail")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Ok(serde_json::from_str(json)?)
    }
}
