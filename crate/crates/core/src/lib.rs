//! Compiler, simulators and checks for IQP (commuting-gate) circuits.
//!
//! Circuits come in three kinds: `universal` circuits over {H, Z, CZ, P},
//! and IQP circuits whose diagonal gates are read either in the X basis
//! (`iqp-x`) or in the Z basis between implicit Hadamard layers (`iqp-z`).
//! The [`compiler`] lowers universal circuits to post-selected `iqp-z`
//! circuits, [`exact`] is a dense statevector oracle, [`fast`] samples IQP
//! circuits with small output registers without touching the full state, and
//! [`verify`] holds the distribution metrics and decision checks.
//!
//! Bit order is little-endian throughout: bit `i` of an integer label is the
//! `i`-th entry of whatever ordered list of lines it labels.

pub mod circuit;
pub mod compiler;
pub mod config;
pub mod distribution;
pub mod error;
pub mod exact;
pub mod fast;
pub mod format;
pub mod gate;
pub mod phase;
pub mod random;
mod sampling;
pub mod verify;
pub mod wht;

pub use circuit::{check_restricted_phases, validate, validate_with, Circuit, CircuitKind, Violation};
pub use config::Caps;
pub use distribution::{Distribution, SampleBatch};
pub use error::{Error, ParseError, Result};
pub use format::{parse_circuit, parse_circuit_with, serialize_circuit};
pub use gate::{gate_phase, Gate, NamedKind};
pub use phase::{phase_add, PhaseValue};
pub use compiler::{gadgetize, normalize_hadamards, to_x_form, to_z_form, GadgetReport};
pub use exact::{
    conditional_distribution, joint_distribution, output_distribution, run_statevector, sample_bitchain, StateVector,
};
pub use fast::{conditional_output_state, exact_average, phase_profile, sample_fast, PhaseProfile};
pub use verify::{
    decide, empirical_check, hoeffding_shots, multiplicative_ratio, postselected_statistic, sandwich_check,
    tv_distance, CheckVerdict, DecisionOutcome, EmpiricalReport, RatioBound, RatioResult, SandwichReport, Verdict,
};
