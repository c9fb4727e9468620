//! The circuit IR and its structural invariants.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::config::Caps;
use crate::error::{Error, Result};
use crate::gate::{Gate, NamedKind};

/// Which gate alphabet a circuit uses and how its diagonal gates are read.
///
/// `IqpZ` circuits carry an implicit layer of Hadamards at the start and end
/// of every line; it is never stored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CircuitKind {
    Universal,
    IqpX,
    IqpZ,
}

impl CircuitKind {
    pub fn name(self) -> &'static str {
        match self {
            CircuitKind::Universal => "universal",
            CircuitKind::IqpX => "iqp-x",
            CircuitKind::IqpZ => "iqp-z",
        }
    }

    pub fn is_iqp(self) -> bool {
        !matches!(self, CircuitKind::Universal)
    }

    pub fn permits(self, gate: &Gate) -> bool {
        matches!(
            (self, gate),
            (CircuitKind::Universal, Gate::Named { .. })
                | (CircuitKind::IqpX | CircuitKind::IqpZ, Gate::Dense { .. } | Gate::Parity { .. })
        )
    }
}

impl fmt::Display for CircuitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CircuitKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "universal" => Ok(CircuitKind::Universal),
            "iqp-x" => Ok(CircuitKind::IqpX),
            "iqp-z" => Ok(CircuitKind::IqpZ),
            other => Err(format!("unknown circuit kind `{other}`")),
        }
    }
}

/// A circuit on `n_lines` qubits starting in `|0…0⟩`.
///
/// `output` is the measured register and `postselect` the register
/// conditioned on reading all zeros. `relabel[i]` is the physical line that
/// carries logical wire `i`; it is the identity unless the circuit came out of
/// the gadget compiler.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub kind: CircuitKind,
    pub n_lines: usize,
    pub gates: Vec<Gate>,
    pub output: Vec<usize>,
    pub postselect: Vec<usize>,
    pub relabel: Vec<usize>,
}

impl Circuit {
    /// Empty circuit measuring `output`.
    pub fn new(kind: CircuitKind, n_lines: usize, output: Vec<usize>) -> Self {
        Circuit {
            kind,
            n_lines,
            gates: Vec::new(),
            output,
            postselect: Vec::new(),
            relabel: (0..n_lines).collect(),
        }
    }

    pub fn with_gates(mut self, gates: impl IntoIterator<Item = Gate>) -> Self {
        self.gates.extend(gates);
        self
    }

    pub fn with_postselect(mut self, postselect: Vec<usize>) -> Self {
        self.postselect = postselect;
        self
    }

    pub fn push(&mut self, gate: Gate) {
        self.gates.push(gate);
    }

    /// Lines in neither the output nor the post-selection register, ascending.
    pub fn idle_lines(&self) -> Vec<usize> {
        let used: HashSet<_> = self.output.iter().chain(&self.postselect).copied().collect();
        (0..self.n_lines).filter(|l| !used.contains(l)).collect()
    }

    /// Lines not in the output register, ascending.
    pub fn non_output_lines(&self) -> Vec<usize> {
        let out: HashSet<_> = self.output.iter().copied().collect();
        (0..self.n_lines).filter(|l| !out.contains(l)).collect()
    }

    pub fn has_identity_relabel(&self) -> bool {
        self.relabel.iter().enumerate().all(|(i, &l)| i == l)
    }

    pub fn ensure_valid(&self) -> Result<()> {
        self.ensure_valid_with(&Caps::DEFAULT)
    }

    pub fn ensure_valid_with(&self, caps: &Caps) -> Result<()> {
        let violations = validate_with(self, caps);
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(violations))
        }
    }

    pub(crate) fn expect_kind(&self, expected: &[CircuitKind]) -> Result<()> {
        if expected.contains(&self.kind) {
            Ok(())
        } else {
            Err(Error::WrongKind {
                expected: expected.iter().map(|k| k.name()).collect::<Vec<_>>().join(" or "),
                found: self.kind.name().to_string(),
            })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Register {
    Output,
    Postselect,
}

impl fmt::Display for Register {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Register::Output => "output",
            Register::Postselect => "postselect",
        })
    }
}

/// A broken circuit invariant. `gate` fields index into `Circuit::gates`.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    NoLines,
    EmptyOutput,
    RegisterOverlap { line: usize },
    RegisterLineOutOfRange { register: Register, line: usize },
    RegisterDuplicate { register: Register, line: usize },
    GateNotPermitted { gate: usize, kind: CircuitKind },
    GateLineOutOfRange { gate: usize, line: usize },
    GateDuplicateLine { gate: usize, line: usize },
    EmptyGate { gate: usize },
    NamedArity { gate: usize, kind: NamedKind, found: usize },
    ArityCap { gate: usize, arity: usize, cap: usize },
    TableLength { gate: usize, expected: usize, found: usize },
    MixedTable { gate: usize },
    NonFinitePhase { gate: usize },
    BadRelabel,
}

impl Violation {
    pub fn gate(&self) -> Option<usize> {
        use Violation::*;
        match *self {
            GateNotPermitted { gate, .. }
            | GateLineOutOfRange { gate, .. }
            | GateDuplicateLine { gate, .. }
            | EmptyGate { gate }
            | NamedArity { gate, .. }
            | ArityCap { gate, .. }
            | TableLength { gate, .. }
            | MixedTable { gate }
            | NonFinitePhase { gate } => Some(gate),
            _ => None,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            NoLines => write!(f, "circuit has no lines"),
            EmptyOutput => write!(f, "output register is empty"),
            RegisterOverlap { line } => {
                write!(f, "line {line} is in both the output and postselect registers")
            }
            RegisterLineOutOfRange { register, line } => {
                write!(f, "{register} register line {line} is out of range")
            }
            RegisterDuplicate { register, line } => {
                write!(f, "{register} register lists line {line} twice")
            }
            GateNotPermitted { gate, kind } => {
                write!(f, "gate {gate}: gate not permitted by kind {kind}")
            }
            GateLineOutOfRange { gate, line } => write!(f, "gate {gate}: line {line} is out of range"),
            GateDuplicateLine { gate, line } => write!(f, "gate {gate}: line {line} listed twice"),
            EmptyGate { gate } => write!(f, "gate {gate}: acts on no lines"),
            NamedArity { gate, kind, found } => {
                write!(f, "gate {gate}: {kind} acts on {} line(s), {found} given", kind.arity())
            }
            ArityCap { gate, arity, cap } => {
                write!(f, "gate {gate}: dense arity {arity} exceeds cap {cap}")
            }
            TableLength { gate, expected, found } => {
                write!(f, "gate {gate}: phase table has {found} entries, expected {expected}")
            }
            MixedTable { gate } => write!(f, "gate {gate}: table mixes lattice and real phases"),
            NonFinitePhase { gate } => write!(f, "gate {gate}: non-finite phase"),
            BadRelabel => write!(f, "relabel map is not a permutation of the lines"),
        }
    }
}

pub fn validate(c: &Circuit) -> Vec<Violation> {
    validate_with(c, &Caps::DEFAULT)
}

/// Every broken invariant of `c`, in a stable order; empty iff `c` is valid.
pub fn validate_with(c: &Circuit, caps: &Caps) -> Vec<Violation> {
    let mut out = Vec::new();
    if c.n_lines == 0 {
        out.push(Violation::NoLines);
    }
    if c.output.is_empty() {
        out.push(Violation::EmptyOutput);
    }
    for (register, lines) in [(Register::Output, &c.output), (Register::Postselect, &c.postselect)] {
        let mut seen = HashSet::new();
        for &line in lines {
            if line >= c.n_lines {
                out.push(Violation::RegisterLineOutOfRange { register, line });
            }
            if !seen.insert(line) {
                out.push(Violation::RegisterDuplicate { register, line });
            }
        }
    }
    let outputs: HashSet<_> = c.output.iter().copied().collect();
    let mut overlaps: Vec<_> = c.postselect.iter().filter(|l| outputs.contains(l)).copied().collect();
    overlaps.dedup();
    out.extend(overlaps.into_iter().map(|line| Violation::RegisterOverlap { line }));

    for (i, g) in c.gates.iter().enumerate() {
        check_gate(i, g, c, caps, &mut out);
    }

    let mut seen = vec![false; c.n_lines];
    let is_perm = c.relabel.len() == c.n_lines
        && c.relabel.iter().all(|&l| l < c.n_lines && !std::mem::replace(&mut seen[l], true));
    if !is_perm {
        out.push(Violation::BadRelabel);
    }
    out
}

fn check_gate(i: usize, g: &Gate, c: &Circuit, caps: &Caps, out: &mut Vec<Violation>) {
    if !c.kind.permits(g) {
        out.push(Violation::GateNotPermitted { gate: i, kind: c.kind });
    }
    let lines = g.lines();
    if lines.is_empty() {
        out.push(Violation::EmptyGate { gate: i });
    }
    let mut seen = HashSet::new();
    for &line in lines {
        if line >= c.n_lines {
            out.push(Violation::GateLineOutOfRange { gate: i, line });
        }
        if !seen.insert(line) {
            out.push(Violation::GateDuplicateLine { gate: i, line });
        }
    }
    match g {
        Gate::Named { kind, lines } => {
            if lines.len() != kind.arity() {
                out.push(Violation::NamedArity { gate: i, kind: *kind, found: lines.len() });
            }
        }
        Gate::Dense { lines, table } => {
            if lines.len() > caps.dense_arity {
                out.push(Violation::ArityCap { gate: i, arity: lines.len(), cap: caps.dense_arity });
            } else if table.len() != 1 << lines.len() {
                out.push(Violation::TableLength { gate: i, expected: 1 << lines.len(), found: table.len() });
            }
            let lattice = table.iter().filter(|p| p.is_lattice()).count();
            if lattice != 0 && lattice != table.len() {
                out.push(Violation::MixedTable { gate: i });
            }
            if table.iter().any(|p| !p.radians().is_finite()) {
                out.push(Violation::NonFinitePhase { gate: i });
            }
        }
        Gate::Parity { theta, .. } => {
            if !theta.radians().is_finite() {
                out.push(Violation::NonFinitePhase { gate: i });
            }
        }
    }
}

/// True iff every phase any gate can apply is an integer power of `e^{iπ/8}`.
pub fn check_restricted_phases(c: &Circuit) -> bool {
    c.gates.iter().all(Gate::is_lattice)
}
