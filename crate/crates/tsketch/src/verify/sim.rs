//! Basis-permutation and dense statevector simulators.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
use std::path::Path;

use num_complex::Complex64;

use crate::circuit::{Circuit, Gate};
use crate::{Error, Result};

/// Dense simulation is capped here; memory is `16 * 2^n` bytes.
pub const MAX_STATEVECTOR_QUBITS: u32 = 14;

/// Unit-norm tolerance for constructed, simulated, and loaded states.
const NORM_TOL: f64 = 1e-10;

/// Magic prefix of the binary statevector format.
const STATE_MAGIC: [u8; 8] = *b"TSKSTATE";

/// A computational-basis assignment over an arbitrary number of wires,
/// packed little-endian: wire `w` is bit `w % 64` of word `w / 64`.
///
/// Compiled threshold sketches can use hundreds of wires, far past any
/// dense simulator; their gate set is classical, so a bit array is the
/// whole simulation state.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BitState {
    words: Vec<u64>,
    wires: u32,
}

impl BitState {
    /// All-zero assignment on `wires` wires.
    pub fn zeros(wires: u32) -> Self {
        BitState { words: vec![0; wires.div_ceil(64) as usize], wires }
    }

    /// Assignment with the low 64 wires set from `x` (little-endian) and
    /// the rest zero. `x` must fit in `wires` bits.
    pub fn from_index(wires: u32, x: u64) -> Result<Self> {
        if wires < 64 && x >> wires != 0 {
            return Err(Error::InvalidParameter(format!(
                "basis index {x:#x} does not fit in {wires} wires"
            )));
        }
        let mut s = BitState::zeros(wires);
        if !s.words.is_empty() {
            s.words[0] = x;
        }
        Ok(s)
    }

    pub fn wires(&self) -> u32 {
        self.wires
    }

    pub fn get(&self, w: u32) -> bool {
        debug_assert!(w < self.wires);
        self.words[(w / 64) as usize] >> (w % 64) & 1 == 1
    }

    pub fn set(&mut self, w: u32, v: bool) {
        debug_assert!(w < self.wires);
        let word = &mut self.words[(w / 64) as usize];
        if v {
            *word |= 1 << (w % 64);
        } else {
            *word &= !(1 << (w % 64));
        }
    }

    fn toggle(&mut self, w: u32) {
        debug_assert!(w < self.wires);
        self.words[(w / 64) as usize] ^= 1 << (w % 64);
    }

    /// Reads wires `start..start + len` as a little-endian integer;
    /// `len <= 64` and the range must be in bounds.
    pub fn extract(&self, start: u32, len: u32) -> u64 {
        assert!(len <= 64 && start as u64 + len as u64 <= self.wires as u64);
        let mut out = 0u64;
        for i in 0..len {
            if self.get(start + i) {
                out |= 1 << i;
            }
        }
        out
    }

    /// Writes `value` into wires `start..start + len`, little-endian.
    pub fn set_range(&mut self, start: u32, len: u32, value: u64) {
        assert!(len <= 64 && start as u64 + len as u64 <= self.wires as u64);
        for i in 0..len {
            self.set(start + i, value >> i & 1 == 1);
        }
    }

    /// True when every wire outside `start..start + len` is zero.
    pub fn zero_outside(&self, start: u32, len: u32) -> bool {
        (0..self.wires).all(|w| (w >= start && w < start + len) || !self.get(w))
    }
}

/// Runs a circuit as a classical reversible permutation. Only `X`, `CX`,
/// `SWAP`, and `TOFF3` have basis semantics; any other gate returns
/// [`Error::NonClassicalGate`], which doubles as the detection signal for
/// "this circuit is not a pure permutation".
pub fn simulate_basis(c: &Circuit, input: &BitState) -> Result<BitState> {
    if input.wires != c.wires() {
        return Err(Error::InvalidParameter(format!(
            "input has {} wires, circuit has {}",
            input.wires,
            c.wires()
        )));
    }
    let mut s = input.clone();
    for g in c.gates() {
        match *g {
            Gate::X(a) => s.toggle(a),
            Gate::Cx(a, b) => {
                if s.get(a) {
                    s.toggle(b);
                }
            }
            Gate::Swap(a, b) => {
                let (va, vb) = (s.get(a), s.get(b));
                s.set(a, vb);
                s.set(b, va);
            }
            Gate::Toff3(a, b, c) => {
                if s.get(a) && s.get(b) {
                    s.toggle(c);
                }
            }
            other => return Err(Error::NonClassicalGate(other.name().to_string())),
        }
    }
    Ok(s)
}

/// A dense pure state on `n <= 14` qubits, little-endian: wire `w` is bit
/// `w` of the amplitude index.
///
/// Phase conventions are load-bearing and pinned by tests:
/// `T = diag(1, e^{-i pi/4})`, `S = diag(1, i)`, so `T^2 = S^dagger`.
#[derive(Clone, Debug)]
pub struct StateVector {
    n: u32,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// The basis state `|x>`.
    pub fn basis(n: u32, x: u64) -> Result<Self> {
        check_qubits(n)?;
        if x >> n != 0 {
            return Err(Error::InvalidParameter(format!(
                "basis index {x:#x} does not fit in {n} qubits"
            )));
        }
        let mut amps = vec![Complex64::ZERO; 1 << n];
        amps[x as usize] = Complex64::ONE;
        Ok(StateVector { n, amps })
    }

    /// Wraps explicit amplitudes; must already be unit norm within 1e-10.
    pub fn from_amplitudes(n: u32, amps: Vec<Complex64>) -> Result<Self> {
        check_qubits(n)?;
        if amps.len() != 1 << n {
            return Err(Error::InvalidParameter(format!(
                "expected {} amplitudes for {n} qubits, got {}",
                1u64 << n,
                amps.len()
            )));
        }
        let s = StateVector { n, amps };
        if (s.norm() - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameter(format!(
                "state norm {} is not 1 within {NORM_TOL}",
                s.norm()
            )));
        }
        Ok(s)
    }

    /// Wraps amplitudes after rescaling to unit norm; rejects zero vectors.
    pub fn normalized(n: u32, mut amps: Vec<Complex64>) -> Result<Self> {
        check_qubits(n)?;
        if amps.len() != 1 << n {
            return Err(Error::InvalidParameter(format!(
                "expected {} amplitudes for {n} qubits, got {}",
                1u64 << n,
                amps.len()
            )));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::InvalidParameter("cannot normalize the zero vector".into()));
        }
        for a in &mut amps {
            *a /= norm;
        }
        Ok(StateVector { n, amps })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        assert_eq!(self.n, other.n, "inner product requires equal qubit counts");
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Pure-state fidelity `|<self|other>|^2`, clamped to `[0, 1]`.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr().clamp(0.0, 1.0)
    }

    /// Pure-state trace distance `sqrt(1 - F)`; for pure states the upper
    /// Fuchs-van de Graaf bound is tight.
    pub fn trace_distance(&self, other: &StateVector) -> f64 {
        (1.0 - self.fidelity(other)).max(0.0).sqrt()
    }

    /// Tensor product with `other` on the high wires: the combined index is
    /// `x + (y << self.n)` for `|x>` in `self` and `|y>` in `other`.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let n = self.n + other.n;
        check_qubits(n)?;
        let mut amps = Vec::with_capacity(1 << n);
        for hi in &other.amps {
            for lo in &self.amps {
                amps.push(lo * hi);
            }
        }
        Ok(StateVector { n, amps })
    }

    /// Applies one gate in place. Wire indices must be in range.
    pub fn apply_gate(&mut self, g: Gate) -> Result<()> {
        for w in g.wires() {
            if w >= self.n {
                return Err(Error::InvalidParameter(format!(
                    "gate {} touches wire {w}, state has {} qubits",
                    g.name(),
                    self.n
                )));
            }
        }
        let dim = self.amps.len();
        match g {
            Gate::X(a) => {
                let bit = 1usize << a;
                for i in 0..dim {
                    if i & bit == 0 {
                        self.amps.swap(i, i | bit);
                    }
                }
            }
            Gate::Y(a) => {
                let bit = 1usize << a;
                for i in 0..dim {
                    if i & bit == 0 {
                        let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                        self.amps[i] = -Complex64::I * a1;
                        self.amps[i | bit] = Complex64::I * a0;
                    }
                }
            }
            Gate::Z(a) => self.phase_on_bit(a, -Complex64::ONE),
            Gate::H(a) => {
                let bit = 1usize << a;
                for i in 0..dim {
                    if i & bit == 0 {
                        let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                        self.amps[i] = FRAC_1_SQRT_2 * (a0 + a1);
                        self.amps[i | bit] = FRAC_1_SQRT_2 * (a0 - a1);
                    }
                }
            }
            Gate::S(a) => self.phase_on_bit(a, Complex64::I),
            Gate::Sdg(a) => self.phase_on_bit(a, -Complex64::I),
            Gate::T(a) => self.phase_on_bit(a, Complex64::cis(-FRAC_PI_4)),
            Gate::Tdg(a) => self.phase_on_bit(a, Complex64::cis(FRAC_PI_4)),
            Gate::Cx(c, t) => {
                let (cb, tb) = (1usize << c, 1usize << t);
                for i in 0..dim {
                    if i & cb != 0 && i & tb == 0 {
                        self.amps.swap(i, i | tb);
                    }
                }
            }
            Gate::Cz(a, b) => {
                let (ab, bb) = (1usize << a, 1usize << b);
                for i in 0..dim {
                    if i & ab != 0 && i & bb != 0 {
                        self.amps[i] = -self.amps[i];
                    }
                }
            }
            Gate::Swap(a, b) => {
                let (ab, bb) = (1usize << a, 1usize << b);
                for i in 0..dim {
                    if i & ab != 0 && i & bb == 0 {
                        self.amps.swap(i, i ^ ab ^ bb);
                    }
                }
            }
            Gate::Toff3(a, b, t) => {
                let (ab, bb, tb) = (1usize << a, 1usize << b, 1usize << t);
                for i in 0..dim {
                    if i & ab != 0 && i & bb != 0 && i & tb == 0 {
                        self.amps.swap(i, i | tb);
                    }
                }
            }
        }
        Ok(())
    }

    fn phase_on_bit(&mut self, wire: u32, phase: Complex64) {
        let bit = 1usize << wire;
        for i in 0..self.amps.len() {
            if i & bit != 0 {
                self.amps[i] *= phase;
            }
        }
    }

    /// Writes the binary format: an 8-byte magic, the qubit count as a
    /// little-endian `u64`, then `2^n` amplitudes as little-endian `f64`
    /// pairs (real, imaginary).
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut bytes = Vec::with_capacity(16 + 16 * self.amps.len());
        bytes.extend_from_slice(&STATE_MAGIC);
        bytes.extend_from_slice(&u64::from(self.n).to_le_bytes());
        for a in &self.amps {
            bytes.extend_from_slice(&a.re.to_le_bytes());
            bytes.extend_from_slice(&a.im.to_le_bytes());
        }
        std::fs::write(path, bytes)?;
        Ok(())
    }

    /// Reads the binary format written by [`StateVector::save`], validating
    /// magic, qubit count, payload length, and unit norm.
    pub fn load(path: &Path) -> Result<StateVector> {
        let bytes = std::fs::read(path)?;
        if bytes.len() < 16 || bytes[..8] != STATE_MAGIC {
            return Err(Error::InvalidParameter(format!(
                "{} is not a statevector file (bad magic or truncated header)",
                path.display()
            )));
        }
        let n_raw = u64::from_le_bytes(bytes[8..16].try_into().expect("8-byte slice"));
        let n = u32::try_from(n_raw)
            .ok()
            .filter(|n| *n <= MAX_STATEVECTOR_QUBITS)
            .ok_or_else(|| {
                Error::ResourceLimit(format!(
                    "statevector file declares {n_raw} qubits, cap is {MAX_STATEVECTOR_QUBITS}"
                ))
            })?;
        let expected = 16 + (16usize << n);
        if bytes.len() != expected {
            return Err(Error::InvalidParameter(format!(
                "statevector file is {} bytes, expected {expected} for {n} qubits",
                bytes.len()
            )));
        }
        let mut amps = Vec::with_capacity(1 << n);
        for chunk in bytes[16..].chunks_exact(16) {
            let re = f64::from_le_bytes(chunk[..8].try_into().expect("8-byte slice"));
            let im = f64::from_le_bytes(chunk[8..].try_into().expect("8-byte slice"));
            amps.push(Complex64::new(re, im));
        }
        StateVector::from_amplitudes(n, amps)
    }
}

fn check_qubits(n: u32) -> Result<()> {
    if n == 0 || n > MAX_STATEVECTOR_QUBITS {
        return Err(Error::ResourceLimit(format!(
            "dense simulation supports 1..={MAX_STATEVECTOR_QUBITS} qubits, got {n}"
        )));
    }
    Ok(())
}

/// Applies every gate of `c` to `input` densely and checks the result is
/// still unit norm (a numeric sanity gate; all gates are unitary).
pub fn simulate_statevector(c: &Circuit, input: &StateVector) -> Result<StateVector> {
    if c.wires() != input.n {
        return Err(Error::InvalidParameter(format!(
            "input has {} qubits, circuit has {} wires",
            input.n,
            c.wires()
        )));
    }
    let mut s = input.clone();
    for g in c.gates() {
        s.apply_gate(*g)?;
    }
    if (s.norm() - 1.0).abs() > NORM_TOL {
        return Err(Error::Invariant(format!(
            "simulation drifted off unit norm: {}",
            s.norm()
        )));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::{BooleanFunction, Family};
    use crate::circuit::{compile_or_sketch, compile_threshold_sketch, toffoli3, toffoli_ladder};
    use crate::fourier::FourierSpectrum;
    use crate::sketch::{sample_fourier_sketch, sample_or_sketch};
    // rand::Rng comes in scope through proptest's prelude.
    use proptest::prelude::*;

    fn approx(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn bit_state_ranges_round_trip() {
        let mut s = BitState::zeros(130);
        s.set_range(60, 10, 0b10_1100_1101);
        assert_eq!(s.extract(60, 10), 0b10_1100_1101);
        assert_eq!(s.extract(0, 60), 0);
        assert_eq!(s.extract(70, 60), 0);
        assert!(!s.zero_outside(0, 60));
        assert!(s.zero_outside(60, 10));
        s.set_range(60, 10, 0);
        assert_eq!(s, BitState::zeros(130));
        assert!(BitState::from_index(8, 0x100).is_err());
        assert_eq!(BitState::from_index(8, 0xA5).unwrap().extract(0, 8), 0xA5);
    }

    // The 15-gate network is the exact Toffoli unitary: every basis column
    // matches the permutation with no global or relative phase.
    #[test]
    fn toffoli3_matches_the_permutation_unitary() {
        let c = toffoli3();
        for x in 0u64..8 {
            let out = simulate_statevector(&c, &StateVector::basis(3, x).unwrap()).unwrap();
            let y = if x & 0b011 == 0b011 { x ^ 0b100 } else { x };
            for (z, amp) in out.amplitudes().iter().enumerate() {
                let want = if z as u64 == y { Complex64::ONE } else { Complex64::ZERO };
                assert!(
                    approx(*amp, want, 1e-12),
                    "column {x}: amplitude at {z} is {amp}, want {want}"
                );
            }
        }
    }

    #[test]
    fn phase_conventions_are_pinned() {
        // T on |+> leaves amplitudes (1, e^{-i pi/4}) / sqrt(2).
        let mut s = StateVector::basis(1, 0).unwrap();
        s.apply_gate(Gate::H(0)).unwrap();
        s.apply_gate(Gate::T(0)).unwrap();
        assert!(approx(s.amplitudes()[0], Complex64::new(FRAC_1_SQRT_2, 0.0), 1e-15));
        assert!(approx(
            s.amplitudes()[1],
            Complex64::new(0.5, -0.5),
            1e-15
        ));

        // S = diag(1, i), so T^2 must equal S^dagger under this convention.
        let mut twice_t = StateVector::basis(1, 1).unwrap();
        twice_t.apply_gate(Gate::T(0)).unwrap();
        twice_t.apply_gate(Gate::T(0)).unwrap();
        let mut sdg = StateVector::basis(1, 1).unwrap();
        sdg.apply_gate(Gate::Sdg(0)).unwrap();
        assert!(approx(twice_t.amplitudes()[1], sdg.amplitudes()[1], 1e-15));
        assert!(approx(twice_t.amplitudes()[1], Complex64::new(0.0, -1.0), 1e-15));

        let mut s_gate = StateVector::basis(1, 1).unwrap();
        s_gate.apply_gate(Gate::S(0)).unwrap();
        assert!(approx(s_gate.amplitudes()[1], Complex64::I, 1e-15));

        // Y|0> = i|1>, Y|1> = -i|0>.
        let mut y0 = StateVector::basis(1, 0).unwrap();
        y0.apply_gate(Gate::Y(0)).unwrap();
        assert!(approx(y0.amplitudes()[1], Complex64::I, 1e-15));
        let mut y1 = StateVector::basis(1, 1).unwrap();
        y1.apply_gate(Gate::Y(0)).unwrap();
        assert!(approx(y1.amplitudes()[0], -Complex64::I, 1e-15));
    }

    #[test]
    fn involutions_and_register_order_hold() {
        // H, X, Z, SWAP, CZ are involutions; S^2 = Z on a random-ish state.
        let raw = vec![
            Complex64::new(0.5, 0.1),
            Complex64::new(-0.3, 0.2),
            Complex64::new(0.0, 0.7),
            Complex64::new(0.25, -0.15),
        ];
        let base = StateVector::normalized(2, raw).unwrap();
        for g in [Gate::H(0), Gate::X(1), Gate::Z(0), Gate::Swap(0, 1), Gate::Cz(0, 1)] {
            let mut s = base.clone();
            s.apply_gate(g).unwrap();
            s.apply_gate(g).unwrap();
            assert!(s.fidelity(&base) > 1.0 - 1e-12, "{:?} is not an involution", g);
        }
        let mut twice_s = base.clone();
        twice_s.apply_gate(Gate::S(1)).unwrap();
        twice_s.apply_gate(Gate::S(1)).unwrap();
        let mut z = base.clone();
        z.apply_gate(Gate::Z(1)).unwrap();
        for (a, b) in twice_s.amplitudes().iter().zip(z.amplitudes()) {
            assert!(approx(*a, *b, 1e-15));
        }

        // Tensor puts `self` on the low wires: |1> tensor |0> = |01> = index 1.
        let one = StateVector::basis(1, 1).unwrap();
        let zero = StateVector::basis(1, 0).unwrap();
        let prod = one.tensor(&zero).unwrap();
        assert!(approx(prod.amplitudes()[1], Complex64::ONE, 1e-15));
    }

    #[test]
    fn basis_and_dense_simulators_agree_on_classical_circuits() {
        let c = toffoli_ladder(3).unwrap();
        assert_eq!(c.wires(), 5);
        for x in 0u64..32 {
            let dense =
                simulate_statevector(&c, &StateVector::basis(5, x).unwrap()).unwrap();
            let bits = simulate_basis(&c, &BitState::from_index(5, x).unwrap()).unwrap();
            let y = bits.extract(0, 5);
            for (z, amp) in dense.amplitudes().iter().enumerate() {
                let want = if z as u64 == y { Complex64::ONE } else { Complex64::ZERO };
                assert!(approx(*amp, want, 1e-12));
            }
            // With a clean ancilla the ladder ANDs wires 0..3 onto wire 3
            // and restores the ancilla; a dirty ancilla voids the contract.
            if x >> 4 == 0 {
                let expect = x ^ (u64::from(x & 0b111 == 0b111) << 3);
                assert_eq!(y, expect, "ladder output on {x:#07b}");
            }
        }
    }

    #[test]
    fn basis_simulation_rejects_non_classical_gates() {
        let mut c = Circuit::new(1);
        c.push(Gate::H(0)).unwrap();
        let err = simulate_basis(&c, &BitState::zeros(1)).unwrap_err();
        assert!(matches!(err, Error::NonClassicalGate(ref g) if g == "H"));
    }

    // Compiled OR sketches implement |x>|b>|0..> -> |x>|b XOR g(x)>|0..>
    // exhaustively, ancillas restored, for every (x, b).
    #[test]
    fn compiled_or_sketch_agrees_with_sketch_eval() {
        let mut rng = crate::rng::master(41);
        let sk = sample_or_sketch(5, 3, &mut rng).unwrap();
        let c = compile_or_sketch(&sk).unwrap();
        for x in 0u64..32 {
            for b in 0u64..2 {
                let mut input = BitState::zeros(c.wires());
                input.set_range(0, 5, x);
                input.set(5, b == 1);
                let out = simulate_basis(&c, &input).unwrap();
                assert_eq!(out.extract(0, 5), x, "input register must be preserved");
                let g = sk.eval(x as u32);
                assert_eq!(out.get(5), (b == 1) ^ g, "target on x={x} b={b}");
                assert!(out.zero_outside(0, 6), "ancillas must return to zero");
            }
        }
    }

    #[test]
    fn compiled_threshold_sketch_agrees_with_sketch_eval() {
        let f = BooleanFunction::named(&Family::Majority { n: 3 }).unwrap();
        let spec = FourierSpectrum::of(&f);
        let dist = spec.sampling_distribution().unwrap();
        let mut rng = crate::rng::master(42);
        let sk = sample_fourier_sketch(&dist, 6, &mut rng).unwrap();
        let c = compile_threshold_sketch(&sk).unwrap();
        for x in 0u64..8 {
            for b in 0u64..2 {
                let mut input = BitState::zeros(c.wires());
                input.set_range(0, 3, x);
                input.set(3, b == 1);
                let out = simulate_basis(&c, &input).unwrap();
                assert_eq!(out.extract(0, 3), x);
                let g = sk.eval(x as u32);
                assert_eq!(out.get(3), (b == 1) ^ g, "target on x={x} b={b}");
                assert!(out.zero_outside(0, 4), "ancillas must return to zero");
            }
        }
    }

    #[test]
    fn statevector_files_round_trip_and_validate() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.svec");
        let mut s = StateVector::basis(3, 5).unwrap();
        s.apply_gate(Gate::H(0)).unwrap();
        s.apply_gate(Gate::T(0)).unwrap();
        s.apply_gate(Gate::Cx(0, 2)).unwrap();
        s.save(&path).unwrap();
        let back = StateVector::load(&path).unwrap();
        assert_eq!(back.n(), 3);
        for (a, b) in s.amplitudes().iter().zip(back.amplitudes()) {
            assert_eq!(a, b, "round trip must be bit-exact");
        }

        let raw = std::fs::read(&path).unwrap();
        std::fs::write(&path, &raw[..raw.len() - 1]).unwrap();
        assert!(StateVector::load(&path).is_err(), "truncated payload");
        let mut bad_magic = raw.clone();
        bad_magic[0] ^= 0xFF;
        std::fs::write(&path, &bad_magic).unwrap();
        assert!(StateVector::load(&path).is_err(), "corrupted magic");
        let mut bad_norm = raw;
        // Zero out the known-nonzero amplitude at index 4 (header is 16
        // bytes, amplitudes are 16 bytes each), leaving norm 1/sqrt(2).
        for b in &mut bad_norm[16 + 16 * 4..16 + 16 * 5] {
            *b = 0;
        }
        std::fs::write(&path, &bad_norm).unwrap();
        assert!(StateVector::load(&path).is_err(), "off-norm payload");
    }

    #[test]
    fn size_and_width_guards_fire() {
        assert!(StateVector::basis(15, 0).is_err());
        assert!(StateVector::basis(0, 0).is_err());
        assert!(StateVector::basis(3, 8).is_err());
        assert!(StateVector::from_amplitudes(2, vec![Complex64::ONE; 3]).is_err());
        assert!(StateVector::from_amplitudes(1, vec![Complex64::ONE; 2]).is_err());
        let c = Circuit::new(4);
        let s = StateVector::basis(3, 0).unwrap();
        assert!(simulate_statevector(&c, &s).is_err());
        let mut g = StateVector::basis(2, 0).unwrap();
        assert!(g.apply_gate(Gate::X(2)).is_err());
    }

    // Fuchs-van de Graaf for pure states: 1 - sqrt(F) <= D <= sqrt(1 - F),
    // with the upper bound tight; checked within 1e-9 on pseudo-random pairs.
    #[test]
    fn pure_state_distances_satisfy_fuchs_van_de_graaf()
    {
        let mut rng = crate::rng::master(7);
        for _ in 0..25 {
            let random_state = |rng: &mut crate::rng::Rng| {
                let amps = (0..8)
                    .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect();
                StateVector::normalized(3, amps).unwrap()
            };
            let a = random_state(&mut rng);
            let b = random_state(&mut rng);
            let f = a.fidelity(&b);
            let d = a.trace_distance(&b);
            assert!(1.0 - f.sqrt() <= d + 1e-9);
            assert!(d <= (1.0 - f).sqrt() + 1e-9);
            assert!((d - (1.0 - f).sqrt()).abs() <= 1e-9, "pure-state bound is tight");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        // Random dense circuits keep states normalized and agree with the
        // macro-expanded form of themselves.
        #[test]
        fn random_circuits_preserve_norm_and_macro_expansion(
            seed in 0u64..1000,
            picks in proptest::collection::vec(0u8..12, 1..40),
        ) {
            let mut rng = crate::rng::master(seed);
            let mut c = Circuit::new(3);
            for p in picks {
                let w = rand::Rng::random_range(&mut rng, 0u32..3);
                let mut v = rand::Rng::random_range(&mut rng, 0u32..3);
                if v == w { v = (v + 1) % 3; }
                let u = 3 - w - v;
                let g = match p {
                    0 => Gate::H(w),
                    1 => Gate::S(w),
                    2 => Gate::Sdg(w),
                    3 => Gate::X(w),
                    4 => Gate::Y(w),
                    5 => Gate::Z(w),
                    6 => Gate::T(w),
                    7 => Gate::Tdg(w),
                    8 => Gate::Cx(w, v),
                    9 => Gate::Cz(w, v),
                    10 => Gate::Swap(w, v),
                    _ => Gate::Toff3(w, v, u),
                };
                c.push(g).unwrap();
            }
            let input = StateVector::basis(3, 5).unwrap();
            let direct = simulate_statevector(&c, &input).unwrap();
            prop_assert!((direct.norm() - 1.0).abs() < 1e-9);
            let expanded = simulate_statevector(&c.expand_macros(), &input).unwrap();
            prop_assert!(direct.fidelity(&expanded) > 1.0 - 1e-9);
            // Macro expansion must not even shift global phase.
            let ip = direct.inner(&expanded);
            prop_assert!((ip - Complex64::ONE).norm() < 1e-6);
        }
    }
}
