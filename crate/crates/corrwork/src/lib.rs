//! Heat-to-work conversion for gases of pairwise-correlated two-qubit
//! molecules.
//!
//! The crate models an isothermal vessel of ideal-gas molecules whose only
//! departure from equilibrium lives in two-particle correlations (classical
//! or entangled), and extracts that correlation as mechanical work through
//! semipermeable-membrane mixing protocols. It is organized in four layers:
//!
//! - [`qmat`]: small dense complex matrices, Hermitian eigensolver, partial
//!   trace, unitary completion.
//! - [`states`]: canonical two-qubit density matrices, entropy measures, and
//!   the protocol unitaries.
//! - [`thermo`]: semipermeable-membrane gas networks, pressures, piston
//!   equilibria, and quasistatic work integrals.
//! - [`protocols`]: a declarative step engine that runs the canonical
//!   heat-to-work protocols and keeps a heat/work/entropy ledger.

pub mod protocols;
pub mod qmat;
pub mod states;
pub mod thermo;

pub use protocols::{
    membrane_measure, protocol_classical_full, protocol_classical_partial,
    protocol_quantum_full, protocol_quantum_partial, run_protocol, run_protocol_with_tol,
    verify_equivalence, EquivalenceReport, LedgerEntry, MixTarget, ProtocolError, ProtocolResult,
    ProtocolStep, RegionTarget,
};
pub use qmat::{complete_to_unitary, Complex64, ComplexMatrix, ComplexVector, QmatError, Subsystem};
pub use states::{
    bell, bell_vector, binary_entropy, classical_full, classical_partial, defect_vs_equilibrium,
    entropy_defect, orthogonal_supports, partial_entangled, partial_entangled_vector,
    synthesize_unitary, u1_flip_b, u2_pair_swap, von_neumann_entropy, BellKind, CorrelationParam,
    Ensemble, StateError, TwoQubitState, Which,
};
pub use thermo::{
    closed_form_work, Equilibrium, GasSpec, MembraneNetwork, PistonDisplacement, ThermoError,
};
