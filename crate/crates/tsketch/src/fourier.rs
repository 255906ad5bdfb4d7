//! Exact Fourier analysis of Boolean functions over the parity basis.
//!
//! A 0/1-valued `f` on `n` bits expands as `f(x) = sum_S fhat(S) chi_S(x)`
//! with `chi_S(x) = (-1)^{XOR_S(x)}`; every coefficient is an integer
//! multiple of `2^-n`. Spectra store those integer numerators, so one-norms,
//! sampling weights, and signs are exact, never floating point.
//!
//! Functions carrying a promise mask are transformed as stored: the table's
//! placeholder values on don't-care inputs are part of the completion being
//! analyzed.

use serde::Serialize;

use crate::boolfn::{BooleanFunction, SubsetMask};
use crate::{rational, Error, Rational, Result};

/// Integer-numerator Fourier spectrum; `coefficient(S) = numerators[S] / 2^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FourierSpectrum {
    n: u32,
    numerators: Vec<i32>,
}

impl FourierSpectrum {
    /// Walsh-Hadamard transform of `f`, exact over the integers.
    pub fn of(f: &BooleanFunction) -> Self {
        let n = f.n();
        let mut v: Vec<i32> = (0..f.domain_size()).map(|x| f.get(x) as i32).collect();
        butterfly(&mut v);
        FourierSpectrum { n, numerators: v }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Integer numerator of `fhat(S)` over the fixed denominator `2^n`.
    pub fn numerator(&self, s: SubsetMask) -> i32 {
        self.numerators[s.0 as usize]
    }

    pub fn coefficient(&self, s: SubsetMask) -> Rational {
        rational(self.numerator(s) as i64, 1u64 << self.n)
    }

    /// Spectral one-norm `sum_S |fhat(S)|`, exact.
    pub fn one_norm(&self) -> Rational {
        rational(self.one_norm_numerator() as i64, 1u64 << self.n)
    }

    /// Integer numerator of the one-norm over `2^n`.
    pub fn one_norm_numerator(&self) -> u64 {
        self.numerators.iter().map(|c| c.unsigned_abs() as u64).sum()
    }

    /// Subsets with nonzero coefficient, ascending by mask.
    pub fn support(&self) -> impl Iterator<Item = SubsetMask> + '_ {
        self.numerators
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0)
            .map(|(s, _)| SubsetMask(s as u64))
    }

    /// Inverse transform; recovers the analyzed completion exactly.
    pub fn reconstruct(&self) -> BooleanFunction {
        let mut v = self.numerators.clone();
        butterfly(&mut v);
        let scale = 1i32 << self.n;
        BooleanFunction::from_fn(self.n, |x| {
            let val = v[x as usize];
            debug_assert!(val == 0 || val == scale);
            val == scale
        })
        .expect("arity already validated")
    }

    /// Distribution `p(S) = |fhat(S)| / one_norm`, with exact integer
    /// cumulative weights. Errors on the identically-zero function.
    pub fn sampling_distribution(&self) -> Result<SamplingDistribution> {
        let mut masks = Vec::new();
        let mut signs = Vec::new();
        let mut weights = Vec::new();
        let mut cumulative = Vec::new();
        let mut acc = 0u64;
        for (s, &c) in self.numerators.iter().enumerate() {
            if c != 0 {
                masks.push(SubsetMask(s as u64));
                signs.push(if c > 0 { 1 } else { -1 });
                weights.push(c.unsigned_abs() as u64);
                acc += c.unsigned_abs() as u64;
                cumulative.push(acc);
            }
        }
        if masks.is_empty() {
            return Err(Error::DegenerateFunction(
                "spectral sampling needs a nonzero coefficient",
            ));
        }
        Ok(SamplingDistribution { n: self.n, masks, signs, weights, cumulative })
    }
}

/// In-place Walsh-Hadamard butterfly. Applying it twice multiplies by `2^n`.
/// Values stay within `+-2^n`, far inside `i32`.
fn butterfly(v: &mut [i32]) {
    let mut h = 1;
    while h < v.len() {
        for block in (0..v.len()).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (v[i], v[i + h]);
                v[i] = a + b;
                v[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Sampling distribution over the spectral support, `p(S) = |fhat(S)| / N`
/// where `N` is the one-norm numerator. Inversion sampling uses exact
/// integer cumulative weights.
#[derive(Clone, Debug, Serialize)]
pub struct SamplingDistribution {
    n: u32,
    masks: Vec<SubsetMask>,
    signs: Vec<i8>,
    weights: Vec<u64>,
    cumulative: Vec<u64>,
}

impl SamplingDistribution {
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Total integer weight (the one-norm numerator).
    pub fn total(&self) -> u64 {
        *self.cumulative.last().expect("support is nonempty")
    }

    /// Support size; nonempty by construction.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn masks(&self) -> &[SubsetMask] {
        &self.masks
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// Integer weights `|numerator(S)|` aligned with `masks()`.
    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    /// Exact selection probability of entry `i`.
    pub fn prob(&self, i: usize) -> Rational {
        rational(self.weights[i] as i64, self.total())
    }

    /// Index owning lattice point `u` in `[0, total)`.
    fn index_for(&self, u: u64) -> usize {
        debug_assert!(u < self.total());
        self.cumulative.partition_point(|&c| c <= u)
    }

    /// Draws `(S, sign(fhat(S)))` with probability `|fhat(S)| / one_norm`.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> (SubsetMask, i8) {
        let u = rng.random_range(0..self.total());
        let i = self.index_for(u);
        (self.masks[i], self.signs[i])
    }
}
