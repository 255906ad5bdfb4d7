//! Numerical verification: circuit simulation, exact and empirical channel
//! error, diamond-distance certificates, stabilizer nullity, and Pauli
//! overlaps.
//!
//! Two simulators cover the two circuit regimes:
//!
//! * [`simulate_basis`] treats `{X, CX, SWAP, TOFF3}` circuits as classical
//!   reversible permutations over arbitrarily many wires; compiled sketch
//!   circuits are checked exhaustively this way.
//! * [`simulate_statevector`] applies the full gate set densely for at most
//!   14 qubits; macro expansion, phase conventions, and tiny exact channels
//!   are checked this way.
//!
//! All certificates bottom out in exact per-input error oracles; Monte
//! Carlo estimates are compared against them with Wilson 99% intervals and
//! flag (never certify) disagreement.

mod channel;
mod nullity;
mod sim;

/// Amplitude type used by [`StateVector`].
pub use num_complex::Complex64;

pub use channel::{
    channel_error_report, exact_channel_tiny, trace_distance_hermitian, ChannelErrorReport,
    InputErrorRow, SketchGenerator,
};
pub use nullity::{
    ccz_plus_state, enumerate_stabilizer_states, max_pauli_overlap, nullity_ball_check,
    stabilizer_nullity, t_state, BallCheckReport, NullityReport, PauliOp,
};
pub use sim::{
    simulate_basis, simulate_statevector, BitState, StateVector, MAX_STATEVECTOR_QUBITS,
};
