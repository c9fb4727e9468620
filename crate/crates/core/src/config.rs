/// Resource limits shared by validation, the simulators and the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    /// Largest line count the dense statevector oracle accepts.
    pub statevector_qubits: usize,
    /// Largest output register the fast sampler transforms (2^M table).
    pub sampler_outputs: usize,
    /// Largest non-output register `exact_average` enumerates.
    pub enumeration_lines: usize,
    /// Largest arity of a dense diagonal gate table.
    pub dense_arity: usize,
}

impl Caps {
    pub const DEFAULT: Caps = Caps {
        statevector_qubits: 22,
        sampler_outputs: 24,
        enumeration_lines: 20,
        dense_arity: 10,
    };
}

impl Default for Caps {
    fn default() -> Self {
        Caps::DEFAULT
    }
}
