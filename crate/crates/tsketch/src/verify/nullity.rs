//! Stabilizer nullity, Pauli overlaps, and the perturbation ball check.
//!
//! The nullity of an n-qubit pure state is `n - log2 |Stab(psi)|`, where
//! `Stab(psi)` is the group of signed Pauli operators fixing the state.
//! It is a faithful magic monotone on the states produced here: zero
//! exactly on stabilizer states, invariant under Clifford circuits, and
//! additive under tensor products. The measurement routine scans all
//! `2 * 4^n` signed Paulis directly, so it needs no prior knowledge of the
//! state's structure.

use num_complex::Complex64;
use serde::Serialize;

use crate::verify::sim::StateVector;
use crate::{Error, Result};

/// Pauli scans walk `4^n * 2^n` amplitude products; capped here.
pub const MAX_NULLITY_QUBITS: u32 = 7;

/// Stabilizer enumeration is exact BFS over the Clifford orbit; the state
/// counts grow like `2^(n^2)`, so it is capped at 3 qubits (1080 states).
pub const MAX_ENUMERATION_QUBITS: u32 = 3;

/// Expectation values within this distance of +-1 count as stabilizing.
const STAB_TOL: f64 = 1e-8;

/// A signed Pauli operator `sign * i^(x.z) X(x) Z(z)`, Hermitian by
/// construction. Masks are little-endian over wires.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PauliOp {
    pub sign: i8,
    pub x_mask: u32,
    pub z_mask: u32,
}

/// Result of a stabilizer-nullity scan.
#[derive(Debug, Clone, Serialize)]
pub struct NullityReport {
    pub n: u32,
    /// Number of signed Paulis fixing the state (always a power of two;
    /// the scan fails otherwise rather than rounding).
    pub stabilizer_count: u64,
    /// `n - log2(stabilizer_count)`.
    pub nullity: u32,
    /// The stabilizing operators themselves, identity included.
    pub witnesses: Vec<PauliOp>,
}

/// `<psi| i^(x.z) X(x) Z(z) |psi>` for unsigned Pauli masks.
///
/// `X(v) Z(w) |y> = (-1)^(w.y) |y XOR v>`, so the expectation is
/// `sum_z conj(psi[z]) i^c (-1)^(w.(z XOR v)) psi[z XOR v]` with
/// `c = |v AND w| mod 4`.
fn pauli_expectation(psi: &StateVector, v: u32, w: u32) -> Complex64 {
    let phase = match (v & w).count_ones() % 4 {
        0 => Complex64::ONE,
        1 => Complex64::I,
        2 => -Complex64::ONE,
        _ => -Complex64::I,
    };
    let amps = psi.amplitudes();
    let mut acc = Complex64::ZERO;
    for (z, a) in amps.iter().enumerate() {
        let src = z ^ v as usize;
        let sign = if ((w as usize & src).count_ones()) % 2 == 1 { -1.0 } else { 1.0 };
        acc += a.conj() * sign * amps[src];
    }
    phase * acc
}

/// Scans all `2 * 4^n` signed Paulis and reports the stabilizer group size,
/// the nullity, and the witnesses. `n <= 7`.
pub fn stabilizer_nullity(psi: &StateVector) -> Result<NullityReport> {
    let n = psi.n();
    if n > MAX_NULLITY_QUBITS {
        return Err(Error::ResourceLimit(format!(
            "nullity scan caps at {MAX_NULLITY_QUBITS} qubits, got {n}"
        )));
    }
    let mut witnesses = Vec::new();
    for v in 0..1u32 << n {
        for w in 0..1u32 << n {
            let ov = pauli_expectation(psi, v, w);
            if (ov - Complex64::ONE).norm() <= STAB_TOL {
                witnesses.push(PauliOp { sign: 1, x_mask: v, z_mask: w });
            } else if (ov + Complex64::ONE).norm() <= STAB_TOL {
                witnesses.push(PauliOp { sign: -1, x_mask: v, z_mask: w });
            }
        }
    }
    let count = witnesses.len() as u64;
    if !count.is_power_of_two() {
        return Err(Error::Invariant(format!(
            "stabilizer count {count} is not a power of two; \
             the state sits too close to a tolerance boundary"
        )));
    }
    Ok(NullityReport {
        n,
        stabilizer_count: count,
        nullity: n - count.trailing_zeros(),
        witnesses,
    })
}

/// Largest `|<psi| P |psi>|` over non-identity unsigned Paulis. `n <= 7`.
pub fn max_pauli_overlap(psi: &StateVector) -> Result<f64> {
    let n = psi.n();
    if n > MAX_NULLITY_QUBITS {
        return Err(Error::ResourceLimit(format!(
            "Pauli overlap scan caps at {MAX_NULLITY_QUBITS} qubits, got {n}"
        )));
    }
    let mut best = 0.0f64;
    for v in 0..1u32 << n {
        for w in 0..1u32 << n {
            if v == 0 && w == 0 {
                continue;
            }
            best = best.max(pauli_expectation(psi, v, w).norm());
        }
    }
    Ok(best)
}

/// The n-qubit state `C^(n-1)Z |+>^n`: uniform amplitudes with a sign flip
/// on the all-ones index. For `n = 1` this degenerates to `Z|+> = |->`.
pub fn ccz_plus_state(n: u32) -> Result<StateVector> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one qubit".into()));
    }
    let dim = 1usize
        .checked_shl(n)
        .filter(|_| n <= crate::verify::sim::MAX_STATEVECTOR_QUBITS)
        .ok_or_else(|| Error::ResourceLimit(format!("{n} qubits exceed the dense cap")))?;
    let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
    let mut amps = vec![amp; dim];
    amps[dim - 1] = -amp;
    StateVector::from_amplitudes(n, amps)
}

/// The T-magic state `T H |0> = (|0> + e^(-i pi/4) |1>) / sqrt(2)`.
pub fn t_state() -> StateVector {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let amps = vec![
        Complex64::new(r, 0.0),
        Complex64::from_polar(r, -std::f64::consts::FRAC_PI_4),
    ];
    StateVector::from_amplitudes(1, amps).expect("unit by construction")
}

/// Result of [`nullity_ball_check`].
#[derive(Debug, Clone, Serialize)]
pub struct BallCheckReport {
    pub n: u32,
    pub delta: f64,
    pub trials: u64,
    /// Smallest nullity seen across all perturbed states.
    pub min_nullity: u32,
    /// True when every perturbed state kept the full nullity `n`.
    pub all_full_nullity: bool,
    /// Exact minimum trace distance from `C^(n-1)Z |+>^n` to any stabilizer
    /// state, available when `n` is small enough to enumerate them.
    pub stabilizer_gap: Option<f64>,
}

/// Perturbs `C^(n-1)Z |+>^n` by `sqrt(1 - delta^2) |phi> + delta |eta>`
/// with `eta` a Haar-ish random unit vector orthogonal to `phi`, so each
/// perturbed state sits at trace distance exactly `delta`. Verifies the
/// nullity stays pinned at `n` throughout the ball (`n <= 5`).
pub fn nullity_ball_check(n: u32, delta: f64, trials: u64, seed: u64) -> Result<BallCheckReport> {
    if n == 0 || n > 5 {
        return Err(Error::ResourceLimit(format!(
            "ball check runs nullity scans in a loop; capped at 5 qubits, got {n}"
        )));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in [0, 1), got {delta}"
        )));
    }
    let phi = ccz_plus_state(n)?;
    let dim = phi.amplitudes().len();
    let mut min_nullity = n;
    for trial in 0..trials {
        let mut rng = crate::rng::stream(seed, trial);
        let mut eta: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(gaussian(&mut rng), gaussian(&mut rng)))
            .collect();
        // Project out the phi component, normalize the remainder.
        let overlap: Complex64 = phi
            .amplitudes()
            .iter()
            .zip(&eta)
            .map(|(p, e)| p.conj() * e)
            .sum();
        for (e, p) in eta.iter_mut().zip(phi.amplitudes()) {
            *e -= overlap * p;
        }
        let eta = StateVector::normalized(n, eta)?;
        let scale = (1.0 - delta * delta).sqrt();
        let amps = phi
            .amplitudes()
            .iter()
            .zip(eta.amplitudes())
            .map(|(p, e)| scale * p + delta * e)
            .collect();
        let psi = StateVector::normalized(n, amps)?;
        debug_assert!((psi.trace_distance(&phi) - delta).abs() < 1e-9);
        min_nullity = min_nullity.min(stabilizer_nullity(&psi)?.nullity);
    }
    let stabilizer_gap = if n <= MAX_ENUMERATION_QUBITS {
        let gap = enumerate_stabilizer_states(n)?
            .iter()
            .map(|s| s.trace_distance(&phi))
            .fold(f64::INFINITY, f64::min);
        Some(gap)
    } else {
        None
    };
    Ok(BallCheckReport {
        n,
        delta,
        trials,
        min_nullity,
        all_full_nullity: min_nullity == n,
        stabilizer_gap,
    })
}

/// One standard normal via Box-Muller.
fn gaussian<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// All n-qubit stabilizer states (`n <= 3`), enumerated exactly.
///
/// States are BFS-closed under `{H, S, CX}` from `|0..0>`, represented as
/// Gaussian-integer amplitude vectors modulo a global `(1 + i)^h` factor.
/// Canonicalization divides out `(1 + i)` while possible and rotates the
/// first nonzero amplitude into the quarter-plane `re > 0, im >= 0`, which
/// identifies states exactly, with no floating point anywhere.
pub fn enumerate_stabilizer_states(n: u32) -> Result<Vec<StateVector>> {
    if n == 0 || n > MAX_ENUMERATION_QUBITS {
        return Err(Error::ResourceLimit(format!(
            "stabilizer enumeration caps at {MAX_ENUMERATION_QUBITS} qubits, got {n}"
        )));
    }
    let dim = 1usize << n;
    type Exact = Vec<(i64, i64)>;

    fn canonical(mut v: Exact) -> Exact {
        // Divide by (1 + i) while every entry allows it: (x, y) / (1 + i)
        // = ((x + y) / 2, (y - x) / 2), integral iff x + y is even.
        loop {
            let all_even = v.iter().all(|&(x, y)| (x + y) % 2 == 0);
            let all_zero = v.iter().all(|&(x, y)| x == 0 && y == 0);
            if all_zero || !all_even {
                break;
            }
            for e in &mut v {
                *e = ((e.0 + e.1) / 2, (e.1 - e.0) / 2);
            }
        }
        // Rotate the global phase so the first nonzero entry has
        // re > 0, im >= 0; exactly one of the four rotations does.
        if let Some(&(x, y)) = v.iter().find(|&&(x, y)| x != 0 || y != 0) {
            let (mut cx, mut cy) = (x, y);
            let mut quarter_turns = 0;
            while !(cx > 0 && cy >= 0) {
                (cx, cy) = (cy, -cx);
                quarter_turns += 1;
            }
            for _ in 0..quarter_turns {
                for e in &mut v {
                    // Multiply by -i: (x + iy)(-i) = y - ix.
                    *e = (e.1, -e.0);
                }
            }
        }
        v
    }

    let mut start = vec![(0i64, 0i64); dim];
    start[0] = (1, 0);
    let start = canonical(start);
    let mut seen = std::collections::HashSet::new();
    seen.insert(start.clone());
    let mut queue = std::collections::VecDeque::from([start]);
    while let Some(state) = queue.pop_front() {
        let push = |next: Exact, seen: &mut std::collections::HashSet<Exact>,
                        queue: &mut std::collections::VecDeque<Exact>| {
            let c = canonical(next);
            if seen.insert(c.clone()) {
                queue.push_back(c);
            }
        };
        for a in 0..n {
            let bit = 1usize << a;
            // H (unnormalized; the scale folds into canonicalization).
            let mut h = state.clone();
            for i in 0..dim {
                if i & bit == 0 {
                    let (a0, a1) = (state[i], state[i | bit]);
                    h[i] = (a0.0 + a1.0, a0.1 + a1.1);
                    h[i | bit] = (a0.0 - a1.0, a0.1 - a1.1);
                }
            }
            push(h, &mut seen, &mut queue);
            // S: multiply amplitudes with bit a set by i.
            let mut s = state.clone();
            for (i, e) in s.iter_mut().enumerate() {
                if i & bit != 0 {
                    *e = (-e.1, e.0);
                }
            }
            push(s, &mut seen, &mut queue);
            for b in 0..n {
                if b == a {
                    continue;
                }
                let bbit = 1usize << b;
                let mut cx = state.clone();
                for i in 0..dim {
                    if i & bit != 0 && i & bbit == 0 {
                        cx.swap(i, i | bbit);
                    }
                }
                push(cx, &mut seen, &mut queue);
            }
        }
    }

    seen.into_iter()
        .map(|exact| {
            let amps = exact
                .into_iter()
                .map(|(x, y)| Complex64::new(x as f64, y as f64))
                .collect();
            StateVector::normalized(n, amps)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use rand::Rng as _;

    fn apply_random_clifford(s: &StateVector, seed: u64, len: usize) -> StateVector {
        let mut rng = crate::rng::master(seed);
        let n = s.n();
        let mut out = s.clone();
        for _ in 0..len {
            let w = rng.random_range(0..n);
            let mut v = rng.random_range(0..n);
            if n > 1 && v == w {
                v = (v + 1) % n;
            }
            let g = match rng.random_range(0u8..if n > 1 { 9 } else { 6 }) {
                0 => Gate::H(w),
                1 => Gate::S(w),
                2 => Gate::Sdg(w),
                3 => Gate::X(w),
                4 => Gate::Y(w),
                5 => Gate::Z(w),
                6 => Gate::Cx(w, v),
                7 => Gate::Cz(w, v),
                _ => Gate::Swap(w, v),
            };
            out.apply_gate(g).unwrap();
        }
        out
    }

    #[test]
    fn stabilizer_states_have_nullity_zero_with_full_witness_groups() {
        let zero3 = StateVector::basis(3, 0).unwrap();
        let report = stabilizer_nullity(&zero3).unwrap();
        assert_eq!(report.nullity, 0);
        assert_eq!(report.stabilizer_count, 8);
        // |000> is stabilized exactly by +Z(w): all witnesses have empty
        // X part and positive sign.
        assert!(report.witnesses.iter().all(|p| p.x_mask == 0 && p.sign == 1));

        for seed in 0..10 {
            let s = apply_random_clifford(&zero3, seed, 40);
            let r = stabilizer_nullity(&s).unwrap();
            assert_eq!(r.nullity, 0, "Clifford image of |000> at seed {seed}");
            assert_eq!(r.stabilizer_count, 8);
        }
    }

    #[test]
    fn magic_states_have_known_nullity() {
        assert_eq!(stabilizer_nullity(&t_state()).unwrap().nullity, 1);
        let tt = t_state().tensor(&t_state()).unwrap();
        assert_eq!(stabilizer_nullity(&tt).unwrap().nullity, 2);
        for n in 3..=5 {
            let phi = ccz_plus_state(n).unwrap();
            let r = stabilizer_nullity(&phi).unwrap();
            assert_eq!(r.nullity, n, "nullity of the n = {n} multi-controlled-Z state");
            assert_eq!(r.stabilizer_count, 1, "only the identity survives");
        }
        // n <= 2 keeps the gate Clifford: |-> and CZ|++> are stabilizer
        // states, so the full-nullity regime starts at n = 3.
        assert_eq!(stabilizer_nullity(&ccz_plus_state(1).unwrap()).unwrap().nullity, 0);
        assert_eq!(stabilizer_nullity(&ccz_plus_state(2).unwrap()).unwrap().nullity, 0);
    }

    #[test]
    fn max_pauli_overlap_matches_the_closed_form() {
        for n in 3..=6 {
            let phi = ccz_plus_state(n).unwrap();
            let got = max_pauli_overlap(&phi).unwrap();
            let want = 1.0 - 4.0 / (1u64 << n) as f64;
            assert!(
                (got - want).abs() < 1e-12,
                "n = {n}: overlap {got}, want {want}"
            );
        }
        // A stabilizer state attains overlap exactly 1.
        let plus = {
            let mut s = StateVector::basis(2, 0).unwrap();
            s.apply_gate(Gate::H(0)).unwrap();
            s.apply_gate(Gate::H(1)).unwrap();
            s
        };
        assert!((max_pauli_overlap(&plus).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nullity_is_clifford_invariant() {
        let phi = ccz_plus_state(4).unwrap();
        let tt = t_state().tensor(&t_state()).unwrap().tensor(&StateVector::basis(2, 0).unwrap()).unwrap();
        for seed in 0..50 {
            let a = apply_random_clifford(&phi, seed, 30);
            assert_eq!(stabilizer_nullity(&a).unwrap().nullity, 4, "seed {seed}");
            let b = apply_random_clifford(&tt, seed ^ 0xBEEF, 30);
            assert_eq!(stabilizer_nullity(&b).unwrap().nullity, 2, "seed {seed}");
        }
    }

    #[test]
    fn one_t_gate_raises_nullity_by_at_most_one() {
        for seed in 0..30 {
            let base = apply_random_clifford(&StateVector::basis(3, 0).unwrap(), seed, 35);
            let before = stabilizer_nullity(&base).unwrap().nullity;
            let mut kicked = base.clone();
            kicked.apply_gate(Gate::T(seed as u32 % 3)).unwrap();
            let after = stabilizer_nullity(&kicked).unwrap().nullity;
            assert!(
                after <= before + 1,
                "seed {seed}: T raised nullity {before} -> {after}"
            );
        }
        // And strictly raises it on a bare stabilizer state with support on
        // both |0> and |1> of the hit wire.
        let mut plus = StateVector::basis(1, 0).unwrap();
        plus.apply_gate(Gate::H(0)).unwrap();
        plus.apply_gate(Gate::T(0)).unwrap();
        assert_eq!(stabilizer_nullity(&plus).unwrap().nullity, 1);
    }

    #[test]
    fn nullity_adds_under_tensor_products() {
        let zero = StateVector::basis(1, 0).unwrap();
        let cases = [
            (zero.clone(), t_state(), 1u32),
            (t_state(), t_state(), 2),
            (ccz_plus_state(3).unwrap(), zero.clone(), 3),
            (ccz_plus_state(3).unwrap(), t_state(), 4),
        ];
        for (a, b, want) in cases {
            let na = stabilizer_nullity(&a).unwrap().nullity;
            let nb = stabilizer_nullity(&b).unwrap().nullity;
            assert_eq!(na + nb, want, "case sanity");
            let prod = a.tensor(&b).unwrap();
            assert_eq!(
                stabilizer_nullity(&prod).unwrap().nullity,
                want,
                "tensor of nullities {na} + {nb}"
            );
        }
    }

    #[test]
    fn stabilizer_enumeration_matches_the_counting_formula() {
        // #states(n) = 2^n * prod_{i=1..n} (2^i + 1).
        assert_eq!(enumerate_stabilizer_states(1).unwrap().len(), 6);
        assert_eq!(enumerate_stabilizer_states(2).unwrap().len(), 60);
        assert_eq!(enumerate_stabilizer_states(3).unwrap().len(), 1080);
        assert!(enumerate_stabilizer_states(4).is_err());

        // Every enumerated state must scan as an actual stabilizer state.
        for s in enumerate_stabilizer_states(2).unwrap() {
            assert_eq!(stabilizer_nullity(&s).unwrap().nullity, 0);
        }
    }

    #[test]
    fn ball_check_reports_full_nullity_and_the_stabilizer_gap() {
        let report = nullity_ball_check(3, 0.05, 15, 424).unwrap();
        assert_eq!(report.min_nullity, 3);
        assert!(report.all_full_nullity);
        // The distance to any stabilizer state is at least 2 / 2^n.
        let gap = report.stabilizer_gap.expect("n = 3 enumerates");
        assert!(gap >= 2.0 / 8.0, "gap {gap}");

        // No enumeration above 3 qubits.
        let wide = nullity_ball_check(4, 0.02, 4, 77).unwrap();
        assert!(wide.stabilizer_gap.is_none());
        assert!(wide.all_full_nullity);

        assert!(nullity_ball_check(3, 1.5, 2, 1).is_err());
        assert!(nullity_ball_check(6, 0.1, 2, 1).is_err());
    }
}
