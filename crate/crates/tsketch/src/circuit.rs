//! Clifford+T circuit representation, sketch compilation, exact T-count
//! accounting, and serialization.
//!
//! Gate set: `H, S, SDG, X, Y, Z, T, TDG, CX, CZ, SWAP` plus the `TOFF3`
//! macro. `T = diag(1, e^{-i pi/4})`. A `TOFF3` expands to the standard
//! 15-gate network with exactly 7 `T`/`TDG` gates, so the T-count of a
//! circuit is `#T + #TDG + 7 * #TOFF3` whether or not macros are expanded.
//!
//! Compiled sketch circuits act on the wire layout
//! `[inputs | target | parity ancillas | counter ancillas]` and map
//! `|x>|b>|0...>` to `|x>|b XOR g(x)>|0...>`; every ancilla is returned to
//! zero by mirror uncomputation.

use serde::{Deserialize, Serialize};

use crate::sketch::{InnerFunction, ParitySketch};
use crate::{Error, Result};

/// One gate. Wire indices are zero-based and little-endian with respect to
/// basis-state bit positions.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Gate {
    H(u32),
    S(u32),
    Sdg(u32),
    X(u32),
    Y(u32),
    Z(u32),
    T(u32),
    Tdg(u32),
    Cx(u32, u32),
    Cz(u32, u32),
    Swap(u32, u32),
    /// Toffoli macro: controls, then target.
    Toff3(u32, u32, u32),
}

impl Gate {
    pub fn name(self) -> &'static str {
        match self {
            Gate::H(_) => "H",
            Gate::S(_) => "S",
            Gate::Sdg(_) => "SDG",
            Gate::X(_) => "X",
            Gate::Y(_) => "Y",
            Gate::Z(_) => "Z",
            Gate::T(_) => "T",
            Gate::Tdg(_) => "TDG",
            Gate::Cx(..) => "CX",
            Gate::Cz(..) => "CZ",
            Gate::Swap(..) => "SWAP",
            Gate::Toff3(..) => "TOFF3",
        }
    }

    /// Wires the gate touches, in declaration order.
    pub fn wires(self) -> Vec<u32> {
        match self {
            Gate::H(a)
            | Gate::S(a)
            | Gate::Sdg(a)
            | Gate::X(a)
            | Gate::Y(a)
            | Gate::Z(a)
            | Gate::T(a)
            | Gate::Tdg(a) => vec![a],
            Gate::Cx(a, b) | Gate::Cz(a, b) | Gate::Swap(a, b) => vec![a, b],
            Gate::Toff3(a, b, c) => vec![a, b, c],
        }
    }

    pub fn is_clifford(self) -> bool {
        !matches!(self, Gate::T(_) | Gate::Tdg(_) | Gate::Toff3(..))
    }

    fn from_parts(name: &str, wires: &[u32]) -> Option<Gate> {
        Some(match (name, wires) {
            ("H", &[a]) => Gate::H(a),
            ("S", &[a]) => Gate::S(a),
            ("SDG", &[a]) => Gate::Sdg(a),
            ("X", &[a]) => Gate::X(a),
            ("Y", &[a]) => Gate::Y(a),
            ("Z", &[a]) => Gate::Z(a),
            ("T", &[a]) => Gate::T(a),
            ("TDG", &[a]) => Gate::Tdg(a),
            ("CX", &[a, b]) => Gate::Cx(a, b),
            ("CZ", &[a, b]) => Gate::Cz(a, b),
            ("SWAP", &[a, b]) => Gate::Swap(a, b),
            ("TOFF3", &[a, b, c]) => Gate::Toff3(a, b, c),
            _ => return None,
        })
    }
}

/// Contiguous labeled wire range.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    pub start: u32,
    pub len: u32,
}

/// An ordered list of gates over `wires` wires, with optional registers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    wires: u32,
    registers: Vec<Register>,
    gates: Vec<Gate>,
}

/// Exact gate accounting. `t_count` is macro-aware:
/// `#T + #TDG + 7 * #TOFF3`, invariant under [`Circuit::expand_macros`].
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TCountReport {
    pub t_count: u64,
    pub toff3_count: u64,
    pub cx_count: u64,
    /// All Clifford gates, CX included.
    pub clifford_count: u64,
}

impl Circuit {
    pub fn new(wires: u32) -> Self {
        Circuit { wires, registers: Vec::new(), gates: Vec::new() }
    }

    /// Builds an empty circuit with validated registers: in range, disjoint.
    pub fn with_registers(wires: u32, registers: Vec<Register>) -> Result<Self> {
        let mut claimed = vec![false; wires as usize];
        for r in &registers {
            let end = r.start as u64 + r.len as u64;
            if end > wires as u64 {
                return Err(Error::InvalidParameter(format!(
                    "register {} spans wires {}..{} beyond {}",
                    r.name,
                    r.start,
                    end,
                    wires
                )));
            }
            for w in r.start..r.start + r.len {
                if claimed[w as usize] {
                    return Err(Error::InvalidParameter(format!(
                        "register {} overlaps another register at wire {w}",
                        r.name
                    )));
                }
                claimed[w as usize] = true;
            }
        }
        Ok(Circuit { wires, registers, gates: Vec::new() })
    }

    pub fn wires(&self) -> u32 {
        self.wires
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Appends a gate after validating wire bounds and distinctness.
    pub fn push(&mut self, gate: Gate) -> Result<()> {
        let ws = gate.wires();
        for &w in &ws {
            if w >= self.wires {
                return Err(Error::InvalidParameter(format!(
                    "{} touches wire {w} but the circuit has {} wires",
                    gate.name(),
                    self.wires
                )));
            }
        }
        for i in 1..ws.len() {
            if ws[..i].contains(&ws[i]) {
                return Err(Error::InvalidParameter(format!(
                    "{} repeats wire {}",
                    gate.name(),
                    ws[i]
                )));
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    fn push_all(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<()> {
        for g in gates {
            self.push(g)?;
        }
        Ok(())
    }

    /// True when no `TOFF3` macro remains.
    pub fn macro_expanded(&self) -> bool {
        !self.gates.iter().any(|g| matches!(g, Gate::Toff3(..)))
    }

    pub fn t_count(&self) -> TCountReport {
        let mut r = TCountReport { t_count: 0, toff3_count: 0, cx_count: 0, clifford_count: 0 };
        for g in &self.gates {
            match g {
                Gate::T(_) | Gate::Tdg(_) => r.t_count += 1,
                Gate::Toff3(..) => {
                    r.toff3_count += 1;
                    r.t_count += 7;
                }
                Gate::Cx(..) => {
                    r.cx_count += 1;
                    r.clifford_count += 1;
                }
                _ => r.clifford_count += 1,
            }
        }
        r
    }

    /// Replaces every `TOFF3` with the 15-gate, 7-T network. Idempotent;
    /// preserves both the unitary and the macro-aware T-count.
    pub fn expand_macros(&self) -> Circuit {
        let mut out = Circuit {
            wires: self.wires,
            registers: self.registers.clone(),
            gates: Vec::with_capacity(self.gates.len()),
        };
        for &g in &self.gates {
            match g {
                Gate::Toff3(a, b, c) => out.gates.extend_from_slice(&toffoli3_network(a, b, c)),
                other => out.gates.push(other),
            }
        }
        out
    }

    /// Textual gate list: `wires N`, one `reg name start len` line per
    /// register, then one gate per line as `NAME w[,w[,w]]`.
    pub fn to_text(&self) -> String {
        let mut s = format!("wires {}\n", self.wires);
        for r in &self.registers {
            s.push_str(&format!("reg {} {} {}\n", r.name, r.start, r.len));
        }
        for g in &self.gates {
            let ws: Vec<String> = g.wires().iter().map(|w| w.to_string()).collect();
            s.push_str(&format!("{} {}\n", g.name(), ws.join(",")));
        }
        s
    }

    /// Parses the textual format; errors carry 1-based line numbers.
    /// Blank lines and `#` comments are skipped.
    pub fn from_text(text: &str) -> Result<Circuit> {
        let syntax = |line: usize, msg: String| Error::Syntax { line, msg };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (line, header) = lines
            .next()
            .ok_or_else(|| syntax(1, "empty input, expected `wires N`".into()))?;
        let wires = header
            .strip_prefix("wires ")
            .and_then(|rest| rest.trim().parse::<u32>().ok())
            .ok_or_else(|| syntax(line, format!("expected `wires N`, got {header:?}")))?;

        let mut registers = Vec::new();
        let mut circuit = None;
        for (line, l) in lines {
            if let Some(rest) = l.strip_prefix("reg ") {
                if circuit.is_some() {
                    return Err(syntax(line, "register lines must precede gates".into()));
                }
                let parts: Vec<&str> = rest.split_whitespace().collect();
                let reg = match parts.as_slice() {
                    [name, start, len] => match (start.parse(), len.parse()) {
                        (Ok(start), Ok(len)) => {
                            Register { name: (*name).to_string(), start, len }
                        }
                        _ => return Err(syntax(line, format!("bad register bounds in {l:?}"))),
                    },
                    _ => return Err(syntax(line, format!("expected `reg name start len`, got {l:?}"))),
                };
                registers.push(reg);
                continue;
            }
            let c = match &mut circuit {
                Some(c) => c,
                None => {
                    circuit = Some(
                        Circuit::with_registers(wires, std::mem::take(&mut registers))
                            .map_err(|e| syntax(line, e.to_string()))?,
                    );
                    circuit.as_mut().unwrap()
                }
            };
            let (name, rest) = l.split_once(' ').ok_or_else(|| {
                syntax(line, format!("expected `NAME w[,w[,w]]`, got {l:?}"))
            })?;
            let ws: Vec<u32> = rest
                .split(',')
                .map(|t| t.trim().parse::<u32>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| syntax(line, format!("bad wire index in {l:?}: {e}")))?;
            let gate = Gate::from_parts(name, &ws).ok_or_else(|| {
                syntax(line, format!("unknown gate {name:?} with {} wires", ws.len()))
            })?;
            c.push(gate).map_err(|e| syntax(line, e.to_string()))?;
        }
        match circuit {
            Some(c) => Ok(c),
            // No gates at all: still a valid circuit.
            None => Circuit::with_registers(wires, registers),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&CircuitFile::from(self))
            .expect("circuit serialization cannot fail")
    }

    pub fn from_json(json: &str) -> Result<Circuit> {
        let file: CircuitFile = serde_json::from_str(json)?;
        file.into_circuit()
    }
}

/// JSON form of a circuit.
#[derive(Serialize, Deserialize)]
pub struct CircuitFile {
    pub wires: u32,
    pub registers: Vec<Register>,
    pub gates: Vec<GateJson>,
}

#[derive(Serialize, Deserialize)]
pub struct GateJson {
    pub gate: String,
    pub wires: Vec<u32>,
}

impl From<&Circuit> for CircuitFile {
    fn from(c: &Circuit) -> Self {
        CircuitFile {
            wires: c.wires,
            registers: c.registers.clone(),
            gates: c
                .gates
                .iter()
                .map(|g| GateJson { gate: g.name().to_string(), wires: g.wires() })
                .collect(),
        }
    }
}

impl CircuitFile {
    pub fn into_circuit(self) -> Result<Circuit> {
        let mut c = Circuit::with_registers(self.wires, self.registers)?;
        for (i, g) in self.gates.iter().enumerate() {
            let gate = Gate::from_parts(&g.gate, &g.wires).ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "gate {}: unknown gate {:?} with {} wires",
                    i,
                    g.gate,
                    g.wires.len()
                ))
            })?;
            c.push(gate)?;
        }
        Ok(c)
    }
}

/// The 15-gate Toffoli network on (control a, control b, target c):
/// 7 T/TDG, 6 CX, 2 H; equal to the Toffoli unitary exactly (no global
/// phase) under `T = diag(1, e^{-i pi/4})`.
fn toffoli3_network(a: u32, b: u32, c: u32) -> [Gate; 15] {
    [
        Gate::H(c),
        Gate::Cx(b, c),
        Gate::T(c),
        Gate::Cx(a, c),
        Gate::Tdg(c),
        Gate::Cx(b, c),
        Gate::T(c),
        Gate::Cx(a, c),
        Gate::Tdg(b),
        Gate::Tdg(c),
        Gate::Cx(a, b),
        Gate::H(c),
        Gate::Tdg(a),
        Gate::T(b),
        Gate::Cx(a, b),
    ]
}

/// The expanded 3-qubit Toffoli circuit (controls 0 and 1, target 2);
/// T-count exactly 7.
pub fn toffoli3() -> Circuit {
    let mut c = Circuit::with_registers(
        3,
        vec![
            Register { name: "input".into(), start: 0, len: 2 },
            Register { name: "target".into(), start: 2, len: 1 },
        ],
    )
    .expect("static registers are valid");
    c.push_all(toffoli3_network(0, 1, 2)).expect("static network is valid");
    c
}

/// `C^m X` on controls `0..m`, target `m`, via a compute/uncompute ladder:
/// `CX` for m = 1, one `TOFF3` for m = 2, and for m >= 3 exactly `2m - 3`
/// `TOFF3` macros (m - 1 compute, m - 2 uncompute) over `m - 2` clean
/// ancillas at wires `m+1..2m-1`. Ancillas return to zero on every input.
pub fn toffoli_ladder(m: u32) -> Result<Circuit> {
    if m == 0 {
        return Err(Error::InvalidParameter(
            "a controlled gate needs at least one control".into(),
        ));
    }
    let anc = m.saturating_sub(2);
    let target = m;
    let mut c = Circuit::with_registers(
        m + 1 + anc,
        vec![
            Register { name: "input".into(), start: 0, len: m },
            Register { name: "target".into(), start: m, len: 1 },
            Register { name: "ancilla".into(), start: m + 1, len: anc },
        ],
    )?;
    match m {
        1 => c.push(Gate::Cx(0, target))?,
        2 => c.push(Gate::Toff3(0, 1, target))?,
        _ => {
            let anc0 = m + 1;
            // forward: a_0 = c_0 AND c_1, a_i = a_{i-1} AND c_{i+1}.
            let mut forward = vec![Gate::Toff3(0, 1, anc0)];
            for i in 1..anc {
                forward.push(Gate::Toff3(i + 1, anc0 + i - 1, anc0 + i));
            }
            c.push_all(forward.iter().copied())?;
            c.push(Gate::Toff3(m - 1, anc0 + anc - 1, target))?;
            c.push_all(forward.into_iter().rev())?;
        }
    }
    Ok(c)
}

fn sketch_registers(n: u32, total: u32) -> Vec<Register> {
    vec![
        Register { name: "input".into(), start: 0, len: n },
        Register { name: "target".into(), start: n, len: 1 },
        Register { name: "ancilla".into(), start: n + 1, len: total - n - 1 },
    ]
}

/// Compiles an OR-inner sketch to a circuit mapping `|x>|b>|0..>` to
/// `|x>|b XOR g(x)>|0..>`.
///
/// Parities are CX fan-ins onto parity ancillas; `OR_k` is an X-conjugated
/// `toffoli_ladder(k)` (`OR = NOT AND NOT`). T-count: 0 for k <= 1
/// (a single parity is Clifford), `7 (2k - 3)` for k >= 2; independent of n.
pub fn compile_or_sketch(sk: &ParitySketch) -> Result<Circuit> {
    if sk.inner != InnerFunction::Or {
        return Err(Error::InvalidParameter(format!(
            "OR compiler got a {:?} inner",
            sk.inner
        )));
    }
    let (n, k) = (sk.n, sk.k());
    let target = n;
    if k == 0 {
        // g is identically 0.
        return Circuit::with_registers(n + 1, sketch_registers(n, n + 1));
    }
    if k == 1 {
        // OR of one parity is the parity itself: CX fan-in onto the target.
        let mut c = Circuit::with_registers(n + 1, sketch_registers(n, n + 1))?;
        for v in sk.subsets[0].bits() {
            c.push(Gate::Cx(v, target))?;
        }
        return Ok(c);
    }
    let ladder_anc = k.saturating_sub(2);
    let total = n + 1 + k + ladder_anc;
    let mut c = Circuit::with_registers(total, sketch_registers(n, total))?;
    let parity0 = n + 1;
    let mut forward = Vec::new();
    for (i, s) in sk.subsets.iter().enumerate() {
        for v in s.bits() {
            forward.push(Gate::Cx(v, parity0 + i as u32));
        }
    }
    // OR = NOT(AND(NOT ...)): negate parities, AND-ladder into the target,
    // then a final X on the target absorbs the outer negation.
    for i in 0..k {
        forward.push(Gate::X(parity0 + i));
    }
    c.push_all(forward.iter().copied())?;
    match k {
        2 => c.push(Gate::Toff3(parity0, parity0 + 1, target))?,
        _ => {
            let anc0 = n + 1 + k;
            let mut ladder = vec![Gate::Toff3(parity0, parity0 + 1, anc0)];
            for i in 1..ladder_anc {
                ladder.push(Gate::Toff3(parity0 + i + 1, anc0 + i - 1, anc0 + i));
            }
            c.push_all(ladder.iter().copied())?;
            c.push(Gate::Toff3(parity0 + k - 1, anc0 + ladder_anc - 1, target))?;
            c.push_all(ladder.into_iter().rev())?;
        }
    }
    c.push_all(forward.into_iter().rev())?;
    c.push(Gate::X(target))?;
    Ok(c)
}

/// Compiles a signed-threshold sketch: sign-folded parity indicators, a
/// carry-save population counter built from one-`TOFF3` full/half adders,
/// and a constant-offset comparator whose carry-out drives the target; all
/// intermediates mirror-uncomputed. T-count grows linearly in k (at most
/// `14 (k + 2 ceil(log2(k+1)))`; see the shipped format docs for measured
/// values).
pub fn compile_threshold_sketch(sk: &ParitySketch) -> Result<Circuit> {
    let InnerFunction::SignedThreshold { signs, norm_num, norm_den } = &sk.inner else {
        return Err(Error::InvalidParameter(format!(
            "threshold compiler got a {:?} inner",
            sk.inner
        )));
    };
    if signs.len() != sk.subsets.len() {
        return Err(Error::InvalidParameter(format!(
            "{} signs for {} subsets",
            signs.len(),
            sk.subsets.len()
        )));
    }
    let (n, k) = (sk.n, sk.k());
    let target = n;
    let cutoff = crate::sketch::threshold_cutoff(k, *norm_num, *norm_den);

    // Degenerate thresholds: constants need no counting.
    if cutoff == 0 {
        let mut c = Circuit::with_registers(n + 1, sketch_registers(n, n + 1))?;
        c.push(Gate::X(target))?;
        return Ok(c);
    }
    if cutoff > k {
        return Circuit::with_registers(n + 1, sketch_registers(n, n + 1));
    }
    if k == 1 {
        // cutoff = 1: the decision is the single sign-folded indicator.
        let mut c = Circuit::with_registers(n + 1, sketch_registers(n, n + 1))?;
        for v in sk.subsets[0].bits() {
            c.push(Gate::Cx(v, target))?;
        }
        if signs[0] > 0 {
            c.push(Gate::X(target))?;
        }
        return Ok(c);
    }

    // Wires are allocated on demand: parity indicators first, then adder
    // carries, then comparator carries. Build the forward gate list against
    // a growing wire budget, then size the circuit.
    let parity0 = n + 1;
    let mut next_wire = parity0 + k;
    let mut alloc = || {
        let w = next_wire;
        next_wire += 1;
        w
    };
    let mut forward: Vec<Gate> = Vec::new();

    // Stage A: indicator bits. Plus-side indicator is the parity for
    // negative signs and the negated parity for positive signs.
    for (i, s) in sk.subsets.iter().enumerate() {
        for v in s.bits() {
            forward.push(Gate::Cx(v, parity0 + i as u32));
        }
    }
    for (i, sign) in signs.iter().enumerate() {
        if *sign > 0 {
            forward.push(Gate::X(parity0 + i as u32));
        }
    }

    // Stage B: carry-save reduction to one live wire per weight level.
    // A full adder leaves sum on its third wire and carry on a fresh
    // ancilla; the first two wires hold garbage until the mirror pass.
    let mut levels: Vec<Vec<u32>> = vec![(0..k).map(|i| parity0 + i).collect()];
    let mut w = 0;
    while w < levels.len() {
        while levels[w].len() >= 2 {
            let carry = alloc();
            if levels.len() == w + 1 {
                levels.push(Vec::new());
            }
            if levels[w].len() >= 3 {
                let a = levels[w].pop().unwrap();
                let b = levels[w].pop().unwrap();
                let s = levels[w].pop().unwrap();
                forward.extend_from_slice(&[
                    Gate::Cx(a, b),
                    Gate::Cx(a, s),
                    Gate::Toff3(b, s, carry),
                    Gate::Cx(a, carry),
                    Gate::Cx(b, s),
                    Gate::Cx(a, s),
                ]);
                levels[w].push(s);
            } else {
                let (a, s) = (levels[w].pop().unwrap(), levels[w].pop().unwrap());
                forward.extend_from_slice(&[Gate::Toff3(a, s, carry), Gate::Cx(a, s)]);
                levels[w].push(s);
            }
            levels[w + 1].push(carry);
        }
        w += 1;
    }

    // Stage C: comparator. count >= cutoff iff adding 2^m - cutoff
    // overflows m bits; ripple the carry of that constant addition.
    let m = levels.len() as u32;
    debug_assert!(k < 1u64.checked_shl(m).unwrap_or(u64::MAX) as u32 + 1);
    let addend = (1u64 << m) - cutoff as u64;
    let mut carry: Option<u32> = None;
    for (wt, level) in levels.iter().enumerate() {
        let bit = addend >> wt & 1 == 1;
        let q = level.first().copied();
        carry = match (bit, q, carry) {
            (false, _, None) => None,
            // addend 0 + count 0 + carry r never overflows this position.
            (false, None, Some(_)) => None,
            (false, Some(q), Some(r)) => {
                let r2 = alloc();
                forward.push(Gate::Toff3(q, r, r2));
                Some(r2)
            }
            (true, None, r) => r,
            (true, Some(q), None) => {
                let r2 = alloc();
                forward.push(Gate::Cx(q, r2));
                Some(r2)
            }
            (true, Some(q), Some(r)) => {
                let r2 = alloc();
                forward.extend_from_slice(&[
                    Gate::X(q),
                    Gate::X(r),
                    Gate::Toff3(q, r, r2),
                    Gate::X(r2),
                    Gate::X(q),
                    Gate::X(r),
                ]);
                Some(r2)
            }
        };
    }

    let total = next_wire;
    let mut c = Circuit::with_registers(total, sketch_registers(n, total))?;
    c.push_all(forward.iter().copied())?;
    match carry {
        Some(r) => c.push(Gate::Cx(r, target))?,
        // cutoff <= k guarantees some count reaches it, so a carry wire
        // always exists here; kept defensive for hand-written inners.
        None => {
            return Err(Error::Invariant(
                "comparator produced no carry wire for a reachable cutoff".into(),
            ))
        }
    }
    c.push_all(forward.into_iter().rev())?;
    Ok(c)
}
