//! Randomized parity-decision-tree protocols for the bench families.
//!
//! Each protocol fixes a *schedule* (how many parities to draw and how the
//! inner function combines them) from the target family and an error budget
//! `epsilon`, such that
//!
//! * the number of parities and the inner gate cost depend only on the
//!   family parameters and `epsilon`, never on the arity `n`, and
//! * the exact per-input error probability is at most `epsilon / 2` on every
//!   promise input (the factor-2 margin keeps empirical checks at budget
//!   `epsilon` comfortably clear of statistical noise).
//!
//! Rows and their constructions:
//!
//! * `OR`: `k` uniform parities, inner OR; errs only on `x != 0`, exactly
//!   `2^-k` there.
//! * `HW<=d` (d >= 1): per repetition every variable is thrown uniformly
//!   into `4d^2` buckets; `r` uniform sub-parities per bucket detect an
//!   occupied bucket with probability `1 - 2^-r` and never fire on an empty
//!   one; a repetition accepts when at most `d` buckets are detected, and
//!   the sketch accepts when every repetition does. Weight `<= d` inputs are
//!   always accepted; heavier inputs survive a repetition with probability
//!   at most `(d+1)/(8d) + (d+1) 2^-r`.
//! * `HW gap` (1 iff `|x| <= k`, promise `|x| <= k` or `|x| >= 2k`): per
//!   repetition a set `T` takes each variable with probability `1/(2k)` and
//!   two uniform sub-parities of `T` look for intersection with `x`; the
//!   repetition votes "small" when neither fires. A vote threshold midway
//!   between the two sides' vote probabilities decides.
//! * `CW` / `MEQ`: membership in an F2 code (codewords of a check matrix /
//!   matrices with identical rows, via row-difference parities). Each query
//!   is a uniform F2 combination of the generators and fires with
//!   probability exactly 1/2 outside the code; inner NOT(OR).
//! * `RANK1`: per round four bilinear parities `q_ij = a_i^T x b_j`; the
//!   determinant bit `q11 q22 XOR q12 q21` certifies rank >= 2 one-sidedly
//!   and `OR(q_ij)` certifies rank >= 1. Accept iff no round fired its
//!   determinant and some round fired some `q`.
//!
//! Per-round acceptance probabilities for `RANK1` (`P[q=1] = (1-2^-rho)/2`
//! etc.) are verified against exhaustive enumeration in the tests.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::boolfn::{rank_f2, Family, SubsetMask};
use crate::{rational, Error, Rational, Result};

use super::{binomial_tail_ge, InnerCost, InnerExpr, InnerFunction, ParitySketch};

/// Bench-table row labels.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TableRow {
    Or,
    HammingBall,
    HammingGap,
    Codeword,
    MatrixEq,
    RankOne,
}

#[derive(Clone, Debug)]
enum Schedule {
    /// `k` uniform parities.
    Or { k: u32 },
    /// `k` uniform F2 combinations of fixed generator parities.
    Linear { k: u32, generators: Vec<u32> },
    Ball {
        d: u32,
        buckets: u32,
        per_bucket: u32,
        reps: u32,
    },
    Gap {
        k: u32,
        per_rep: u32,
        reps: u32,
        /// Accept (output 1) iff at least `cutoff` repetitions voted small.
        cutoff: u32,
        /// Largest small-vote probability on the heavy side.
        lo: Rational,
        /// Smallest small-vote probability on the light side.
        hi: Rational,
    },
    RankOne { rows: u32, cols: u32, rounds: u32 },
}

/// A fixed randomized-parity protocol for one family instance.
#[derive(Clone, Debug)]
pub struct TableProtocol {
    row: TableRow,
    family: Family,
    n: u32,
    epsilon: f64,
    inner: InnerFunction,
    schedule: Schedule,
}

/// Builds the protocol for `family` at error budget `epsilon`.
pub fn table_protocol(family: &Family, epsilon: f64) -> Result<TableProtocol> {
    super::check_epsilon(epsilon)?;
    let eps_half = Rational::from_float(epsilon)
        .expect("epsilon already validated finite")
        / Rational::from_integer(2.into());
    let n = family.arity();
    if n == 0 || n > crate::MAX_ARITY {
        return Err(Error::ArityOutOfRange { n, max: crate::MAX_ARITY });
    }
    let (row, schedule) = match family {
        Family::Or { .. } => (TableRow::Or, Schedule::Or { k: one_sided_queries(&eps_half) }),
        Family::HammingAtMost { d: 0, .. } => (
            // HW <= 0 is NOT(OR); its code is {0} with singleton generators.
            TableRow::HammingBall,
            Schedule::Linear {
                k: one_sided_queries(&eps_half),
                generators: (0..n).map(|v| 1 << v).collect(),
            },
        ),
        Family::HammingAtMost { d, .. } => {
            let d = *d;
            let buckets = 4 * d * d;
            // Detection misses an occupied bucket with probability 2^-r;
            // r makes the union term (d+1) 2^-r at most 1/8.
            let per_bucket = (8 * (d + 1)).next_power_of_two().trailing_zeros();
            let q = rational(d as i64 + 1, 8 * d as u64)
                + rational(d as i64 + 1, 1) * crate::pow2_inv(per_bucket);
            debug_assert!(q < rational(1, 2));
            let mut reps = 1;
            let mut power = q.clone();
            while power > eps_half {
                reps += 1;
                power *= &q;
                if reps > 4096 {
                    return Err(Error::ResourceLimit(
                        "ball schedule exceeds 4096 repetitions".into(),
                    ));
                }
            }
            (TableRow::HammingBall, Schedule::Ball { d, buckets, per_bucket, reps })
        }
        Family::HammingGap { k, .. } => {
            let k = *k;
            if k == 0 || 2 * k > n {
                return Err(Error::InvalidParameter(format!(
                    "gap schedule needs 1 <= k and 2k <= n, got k={k}, n={n}"
                )));
            }
            let per_rep = 2u32;
            let hi = gap_small_vote(k, per_rep, k);
            let lo = gap_small_vote(k, per_rep, 2 * k);
            debug_assert!(lo < hi);
            let tau = (&lo + &hi) / Rational::from_integer(2.into());
            let mut found = None;
            for reps in 1..=4096u32 {
                let cutoff_rat = (&tau * Rational::from_integer(reps.into())).ceil();
                let cutoff = u32::try_from(cutoff_rat.to_integer()).unwrap().clamp(1, reps);
                let heavy_err = binomial_tail_ge(reps, cutoff, &lo);
                let light_err = Rational::one() - binomial_tail_ge(reps, cutoff, &hi);
                if heavy_err <= eps_half && light_err <= eps_half {
                    found = Some((reps, cutoff));
                    break;
                }
            }
            let (reps, cutoff) = found.ok_or_else(|| {
                Error::ResourceLimit("gap schedule exceeds 4096 repetitions".into())
            })?;
            (TableRow::HammingGap, Schedule::Gap { k, per_rep, reps, cutoff, lo, hi })
        }
        Family::Codeword { check } => (
            TableRow::Codeword,
            Schedule::Linear {
                k: one_sided_queries(&eps_half),
                generators: check.rows().to_vec(),
            },
        ),
        Family::MatrixEq { rows, cols } => {
            let mut generators = Vec::new();
            for i in 0..rows.saturating_sub(1) {
                for j in 0..*cols {
                    generators.push(1 << (i * cols + j) | 1 << ((i + 1) * cols + j));
                }
            }
            if generators.is_empty() {
                // A single-row matrix is always "all rows equal".
                generators.push(0);
            }
            (
                TableRow::MatrixEq,
                Schedule::Linear { k: one_sided_queries(&eps_half), generators },
            )
        }
        Family::RankOne { rows, cols } => {
            let max_rank = (*rows).min(*cols);
            let mut rounds = None;
            for t in 1..=4096u32 {
                if rank_one_worst_error(max_rank, t) <= eps_half {
                    rounds = Some(t);
                    break;
                }
            }
            let rounds = rounds.ok_or_else(|| {
                Error::ResourceLimit("rank schedule exceeds 4096 rounds".into())
            })?;
            (TableRow::RankOne, Schedule::RankOne { rows: *rows, cols: *cols, rounds })
        }
        other => {
            return Err(Error::InvalidParameter(format!(
                "no table protocol for family {}",
                other.label()
            )))
        }
    };
    let inner = build_inner(&schedule);
    Ok(TableProtocol { row, family: family.clone(), n, epsilon, inner, schedule })
}

/// Queries for a one-sided test erring with probability exactly `2^-k`:
/// minimal `k` with `2^-k <= eps_half`.
fn one_sided_queries(eps_half: &Rational) -> u32 {
    let mut k = 1;
    while crate::pow2_inv(k) > *eps_half {
        k += 1;
    }
    k
}

/// Exact probability that a gap repetition votes "small" on a weight-`w`
/// input: `beta + (1 - beta) 2^-r` with `beta = (1 - 1/(2k))^w`.
fn gap_small_vote(k: u32, per_rep: u32, w: u32) -> Rational {
    let base = rational(2 * k as i64 - 1, 2 * k as u64);
    let mut beta = Rational::one();
    for _ in 0..w {
        beta *= &base;
    }
    let miss = crate::pow2_inv(per_rep);
    &beta + (Rational::one() - &beta) * miss
}

/// `P[a^T M b = 1]`-style round statistics for a rank-`rho` matrix.
/// `delta`: probability the round's determinant bit fires (certifying
/// rank >= 2). `all_zero`: probability all four bilinear parities vanish.
fn rank_round_stats(rho: u32) -> (Rational, Rational) {
    if rho == 0 {
        return (Rational::zero(), Rational::one());
    }
    let inv = crate::pow2_inv(rho);
    let inv2 = crate::pow2_inv(rho.saturating_sub(1));
    let p_indep = if rho >= 2 {
        (Rational::one() - &inv) * (Rational::one() - &inv2)
    } else {
        Rational::zero()
    };
    let delta = &p_indep * rational(3, 8);
    // span(u1, u2) has dimension 0, 1, 2 with the probabilities below; all
    // four parities vanish iff both b's are orthogonal to the span.
    let p0 = &inv * &inv;
    let p1 = rational(3, 1) * &inv * (Rational::one() - &inv);
    let all_zero = &p0
        + &p1 * rational(1, 4)
        + &p_indep * rational(1, 16);
    (delta, all_zero)
}

/// Exact error of the `t`-round rank test on a rank-`rho` input.
fn rank_error(rho: u32, t: u32) -> Rational {
    let (delta, all_zero) = rank_round_stats(rho);
    let no_det = pow_rational(&(Rational::one() - delta), t);
    let silent = pow_rational(&all_zero, t);
    let p_out1 = no_det - silent;
    if rho == 1 {
        Rational::one() - p_out1
    } else {
        p_out1
    }
}

fn rank_one_worst_error(max_rank: u32, t: u32) -> Rational {
    (1..=max_rank).map(|rho| rank_error(rho, t)).max().expect("max_rank >= 1")
}

fn pow_rational(base: &Rational, exp: u32) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

/// Inner function matching each schedule's parity layout.
fn build_inner(schedule: &Schedule) -> InnerFunction {
    match schedule {
        Schedule::Or { .. } => InnerFunction::Or,
        Schedule::Linear { .. } => InnerFunction::NotOr,
        Schedule::Ball { d, buckets, per_bucket, reps } => {
            // Parity (rep, bucket, j) at index (rep*buckets + bucket)*r + j.
            let rep_tests = (0..*reps)
                .map(|rep| InnerExpr::AtMost {
                    bound: *d,
                    args: (0..*buckets)
                        .map(|b| InnerExpr::Or {
                            args: (0..*per_bucket)
                                .map(|j| InnerExpr::leaf((rep * buckets + b) * per_bucket + j))
                                .collect(),
                        })
                        .collect(),
                })
                .collect();
            InnerFunction::Expr(InnerExpr::And { args: rep_tests })
        }
        Schedule::Gap { per_rep, reps, cutoff, .. } => {
            // Parity (rep, j) at index rep*per_rep + j. A repetition votes
            // small iff its OR stays 0; accept iff at least `cutoff` small
            // votes, i.e. at most reps - cutoff fired ORs.
            let fired = (0..*reps)
                .map(|rep| InnerExpr::Or {
                    args: (0..*per_rep).map(|j| InnerExpr::leaf(rep * per_rep + j)).collect(),
                })
                .collect();
            InnerFunction::Expr(InnerExpr::AtMost { bound: reps - cutoff, args: fired })
        }
        Schedule::RankOne { rounds, .. } => {
            // Parities q11 q12 q21 q22 of round i at indices 4i .. 4i+3.
            let dets = (0..*rounds)
                .map(|i| InnerExpr::Xor {
                    args: vec![
                        InnerExpr::And {
                            args: vec![InnerExpr::leaf(4 * i), InnerExpr::leaf(4 * i + 3)],
                        },
                        InnerExpr::And {
                            args: vec![InnerExpr::leaf(4 * i + 1), InnerExpr::leaf(4 * i + 2)],
                        },
                    ],
                })
                .collect();
            let any = (0..4 * *rounds).map(InnerExpr::leaf).collect();
            InnerFunction::Expr(InnerExpr::And {
                args: vec![
                    InnerExpr::Not { arg: Box::new(InnerExpr::Or { args: dets }) },
                    InnerExpr::Or { args: any },
                ],
            })
        }
    }
}

impl TableProtocol {
    pub fn row(&self) -> TableRow {
        self.row
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Parities per sampled sketch; a function of the family parameters and
    /// `epsilon` only.
    pub fn queries(&self) -> u32 {
        match &self.schedule {
            Schedule::Or { k } | Schedule::Linear { k, .. } => *k,
            Schedule::Ball { buckets, per_bucket, reps, .. } => buckets * per_bucket * reps,
            Schedule::Gap { per_rep, reps, .. } => per_rep * reps,
            Schedule::RankOne { rounds, .. } => 4 * rounds,
        }
    }

    /// Gate cost of the inner function; also arity-independent.
    pub fn inner_cost(&self) -> InnerCost {
        let sketch = ParitySketch {
            n: self.n,
            subsets: vec![SubsetMask::EMPTY; self.queries() as usize],
            inner: self.inner.clone(),
        };
        sketch.inner_cost()
    }

    /// Draws one sketch.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> ParitySketch {
        let mut subsets = Vec::with_capacity(self.queries() as usize);
        self.sample_subsets_into(rng, &mut subsets);
        ParitySketch { n: self.n, subsets, inner: self.inner.clone() }
    }

    /// Draws one sketch's subsets into a reusable buffer.
    pub fn sample_subsets_into<R: rand::Rng + ?Sized>(
        &self,
        rng: &mut R,
        out: &mut Vec<SubsetMask>,
    ) {
        out.clear();
        let n = self.n;
        match &self.schedule {
            Schedule::Or { k } => {
                for _ in 0..*k {
                    out.push(SubsetMask(rng.random_range(0..1u64 << n)));
                }
            }
            Schedule::Linear { k, generators } => {
                for _ in 0..*k {
                    let mut m = 0u32;
                    for g in generators {
                        if rng.random::<bool>() {
                            m ^= g;
                        }
                    }
                    out.push(SubsetMask(u64::from(m)));
                }
            }
            Schedule::Ball { buckets, per_bucket, reps, .. } => {
                let mut members = vec![0u32; *buckets as usize];
                for _ in 0..*reps {
                    members.fill(0);
                    for v in 0..n {
                        members[rng.random_range(0..*buckets) as usize] |= 1 << v;
                    }
                    for b in 0..*buckets as usize {
                        for _ in 0..*per_bucket {
                            out.push(SubsetMask(u64::from(random_subset(members[b], rng))));
                        }
                    }
                }
            }
            Schedule::Gap { k, per_rep, reps, .. } => {
                for _ in 0..*reps {
                    let mut t_mask = 0u32;
                    for v in 0..n {
                        if rng.random_range(0..2 * k) == 0 {
                            t_mask |= 1 << v;
                        }
                    }
                    for _ in 0..*per_rep {
                        out.push(SubsetMask(u64::from(random_subset(t_mask, rng))));
                    }
                }
            }
            Schedule::RankOne { rows, cols, rounds } => {
                for _ in 0..*rounds {
                    let a1 = rng.random_range(0..1u32 << rows);
                    let a2 = rng.random_range(0..1u32 << rows);
                    let b1 = rng.random_range(0..1u32 << cols);
                    let b2 = rng.random_range(0..1u32 << cols);
                    for (a, b) in [(a1, b1), (a1, b2), (a2, b1), (a2, b2)] {
                        out.push(SubsetMask(u64::from(outer_mask(a, b, *cols))));
                    }
                }
            }
        }
        debug_assert_eq!(out.len(), self.queries() as usize);
    }

    /// Evaluates a sampled sketch without materializing it.
    pub fn eval_sampled(&self, subsets: &[SubsetMask], x: u32, scratch: &mut Vec<bool>) -> bool {
        match &self.inner {
            InnerFunction::Or => subsets.iter().any(|s| s.parity(x)),
            InnerFunction::NotOr => !subsets.iter().any(|s| s.parity(x)),
            InnerFunction::Expr(e) => {
                scratch.clear();
                scratch.extend(subsets.iter().map(|s| s.parity(x)));
                e.eval(scratch)
            }
            InnerFunction::SignedThreshold { .. } => {
                unreachable!("table rows never use threshold inners")
            }
        }
    }

    /// Exact per-input error probability. Inputs outside the promise return
    /// zero (the protocol is unconstrained there).
    pub fn per_input_error(&self, x: u32) -> Result<Rational> {
        if x >= 1u32 << self.n {
            return Err(Error::InputOutOfRange { x, n: self.n });
        }
        Ok(match &self.schedule {
            Schedule::Or { k } => {
                if x == 0 {
                    Rational::zero()
                } else {
                    crate::pow2_inv(*k)
                }
            }
            Schedule::Linear { k, generators } => {
                if generators.iter().all(|g| !SubsetMask(u64::from(*g)).parity(x)) {
                    Rational::zero()
                } else {
                    crate::pow2_inv(*k)
                }
            }
            Schedule::Ball { d, buckets, per_bucket, reps } => {
                let m = x.count_ones();
                if m <= *d {
                    Rational::zero()
                } else {
                    pow_rational(&ball_rep_accept(m, *buckets, *per_bucket, *d), *reps)
                }
            }
            Schedule::Gap { k, per_rep, reps, cutoff, .. } => {
                let w = x.count_ones();
                let vote = gap_small_vote(*k, *per_rep, w);
                if w <= *k {
                    Rational::one() - binomial_tail_ge(*reps, *cutoff, &vote)
                } else if w >= 2 * k {
                    binomial_tail_ge(*reps, *cutoff, &vote)
                } else {
                    Rational::zero()
                }
            }
            Schedule::RankOne { rows, cols, rounds } => {
                let col_mask = (1u32 << cols) - 1;
                let rho = rank_f2((0..*rows).map(|i| (x >> (i * cols)) & col_mask));
                if rho == 0 {
                    Rational::zero()
                } else {
                    rank_error(rho, *rounds)
                }
            }
        })
    }

    /// Largest exact error over promise inputs, by class analysis.
    pub fn worst_case_error(&self) -> Rational {
        match &self.schedule {
            Schedule::Or { k } | Schedule::Linear { k, .. } => crate::pow2_inv(*k),
            Schedule::Ball { d, buckets, per_bucket, reps } => (*d + 1..=self.n)
                .map(|m| pow_rational(&ball_rep_accept(m, *buckets, *per_bucket, *d), *reps))
                .max()
                .unwrap_or_else(Rational::zero),
            Schedule::Gap { reps, cutoff, lo, hi, .. } => {
                let heavy = binomial_tail_ge(*reps, *cutoff, lo);
                let light = Rational::one() - binomial_tail_ge(*reps, *cutoff, hi);
                heavy.max(light)
            }
            Schedule::RankOne { rows, cols, rounds } => {
                rank_one_worst_error((*rows).min(*cols), *rounds)
            }
        }
    }

    pub fn description(&self) -> String {
        match &self.schedule {
            Schedule::Or { k } => format!("{k} uniform parities, inner OR"),
            Schedule::Linear { k, generators } => format!(
                "{k} uniform combinations of {} generators, inner NOT(OR)",
                generators.len()
            ),
            Schedule::Ball { d, buckets, per_bucket, reps } => format!(
                "{reps} reps x {buckets} buckets x {per_bucket} parities, accept iff <= {d} \
                 buckets detected in every rep"
            ),
            Schedule::Gap { per_rep, reps, cutoff, .. } => format!(
                "{reps} reps x {per_rep} parities, accept iff >= {cutoff} silent reps"
            ),
            Schedule::RankOne { rounds, .. } => format!(
                "{rounds} rounds x 4 bilinear parities, accept iff no determinant fired and \
                 some parity fired"
            ),
        }
    }
}

/// Probability a single repetition of the ball test accepts a weight-`m`
/// input (`m > d`): the `m` one-bits land in buckets with classic occupancy
/// law, each occupied bucket is detected independently with probability
/// `1 - 2^-r`, and the repetition accepts iff at most `d` detections.
fn ball_rep_accept(m: u32, buckets: u32, per_bucket: u32, d: u32) -> Rational {
    // occ[o] = P[o distinct buckets occupied] after placing each one-bit
    // uniformly at random.
    let b = buckets as i64;
    let mut occ = vec![Rational::zero(); buckets as usize + 1];
    occ[0] = Rational::one();
    for _ in 0..m {
        let mut next = vec![Rational::zero(); buckets as usize + 1];
        for (o, p) in occ.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let o_i = o as i64;
            if o > 0 {
                next[o] += p * rational(o_i, b as u64);
            }
            if o < buckets as usize {
                next[o + 1] += p * rational(b - o_i, b as u64);
            }
        }
        occ = next;
    }
    let detect = Rational::one() - crate::pow2_inv(per_bucket);
    occ.iter()
        .enumerate()
        .filter(|(_, p)| !p.is_zero())
        .map(|(o, p)| {
            let undetected =
                Rational::one() - binomial_tail_ge(o as u32, d + 1, &detect);
            p * undetected
        })
        .sum()
}

/// Uniform random subset of the variables in `mask`.
fn random_subset<R: rand::Rng + ?Sized>(mask: u32, rng: &mut R) -> u32 {
    let mut out = 0u32;
    let mut rest = mask;
    while rest != 0 {
        let v = rest.trailing_zeros();
        rest &= rest - 1;
        if rng.random::<bool>() {
            out |= 1 << v;
        }
    }
    out
}

/// Outer-product parity mask: bits `(r, c)` with `r` in `a`, `c` in `b`,
/// at input position `r*cols + c`.
fn outer_mask(a: u32, b: u32, cols: u32) -> u32 {
    let mut m = 0u32;
    let mut rest = a;
    while rest != 0 {
        let r = rest.trailing_zeros();
        rest &= rest - 1;
        m |= b << (r * cols);
    }
    m
}
