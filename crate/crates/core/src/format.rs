//! Line-oriented text format for circuits.
//!
//! ```text
//! # comments run to end of line
//! qubits 3
//! kind iqp-x
//! output 0 1
//! postselect 2
//! gate D 2 0 1 L:0,0,0,8
//! gate X 3 0 1 2 R:0.3
//! ```
//!
//! Named gates (`gate H 0`, `gate CZ 0 1`, ...) are only valid in `universal`
//! circuits. An optional `relabel <lines...>` directive records the logical
//! to physical line map written by the compiler.

use std::fmt::Write as _;

use crate::circuit::{validate_with, Circuit, CircuitKind};
use crate::config::Caps;
use crate::error::ParseError;
use crate::gate::{Gate, NamedKind};
use crate::phase::PhaseValue;

type PResult<T> = std::result::Result<T, ParseError>;

pub fn parse_circuit(text: &str) -> PResult<Circuit> {
    parse_circuit_with(text, &Caps::DEFAULT)
}

pub fn parse_circuit_with(text: &str, caps: &Caps) -> PResult<Circuit> {
    let mut n_lines: Option<(usize, usize)> = None;
    let mut kind: Option<(CircuitKind, usize)> = None;
    let mut output: Option<(Vec<usize>, usize)> = None;
    let mut postselect: Option<(Vec<usize>, usize)> = None;
    let mut relabel: Option<(Vec<usize>, usize)> = None;
    let mut gates = Vec::new();
    let mut gate_lines = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let directive = tokens.next().unwrap_or_default();
        let rest: Vec<&str> = tokens.collect();
        let err = |msg: String| ParseError::new(lineno, msg);
        match directive {
            "qubits" => {
                once(&n_lines, "qubits", lineno)?;
                let [n] = rest.as_slice() else {
                    return Err(err("`qubits` takes exactly one count".into()));
                };
                n_lines = Some((parse_index(n, lineno)?, lineno));
            }
            "kind" => {
                once(&kind, "kind", lineno)?;
                let [k] = rest.as_slice() else {
                    return Err(err("`kind` takes exactly one value".into()));
                };
                kind = Some((k.parse().map_err(err)?, lineno));
            }
            "output" => {
                once(&output, "output", lineno)?;
                output = Some((parse_indices(&rest, lineno)?, lineno));
            }
            "postselect" => {
                once(&postselect, "postselect", lineno)?;
                if rest.iter().any(|t| t.contains('=') || t.contains(':')) {
                    return Err(err(
                        "post-selection is always on all zeros; outcome patterns are not supported".into(),
                    ));
                }
                postselect = Some((parse_indices(&rest, lineno)?, lineno));
            }
            "relabel" => {
                once(&relabel, "relabel", lineno)?;
                relabel = Some((parse_indices(&rest, lineno)?, lineno));
            }
            "gate" => {
                gates.push(parse_gate(&rest, lineno)?);
                gate_lines.push(lineno);
            }
            other => return Err(err(format!("unknown directive `{other}`"))),
        }
    }

    let (n_lines, _) = n_lines.ok_or_else(|| ParseError::new(0, "missing `qubits` directive"))?;
    let (kind, _) = kind.ok_or_else(|| ParseError::new(0, "missing `kind` directive"))?;
    let (output, output_line) = output.ok_or_else(|| ParseError::new(0, "missing `output` directive"))?;
    let (postselect, post_line) = postselect.unwrap_or_default();
    let (relabel, relabel_line) = relabel.unwrap_or_else(|| ((0..n_lines).collect(), 0));
    let circuit = Circuit { kind, n_lines, gates, output, postselect, relabel };

    let violations = validate_with(&circuit, caps);
    if let Some(first) = violations.first() {
        use crate::circuit::{Register, Violation as V};
        let line = match first {
            v if v.gate().is_some() => gate_lines[v.gate().unwrap_or(0)],
            V::RegisterOverlap { .. }
            | V::RegisterDuplicate { register: Register::Postselect, .. }
            | V::RegisterLineOutOfRange { register: Register::Postselect, .. } => post_line,
            V::RegisterDuplicate { .. } | V::RegisterLineOutOfRange { .. } | V::EmptyOutput => output_line,
            V::BadRelabel => relabel_line,
            _ => 0,
        };
        let message = violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ");
        return Err(ParseError::new(line, message));
    }
    Ok(circuit)
}

fn once<T>(slot: &Option<(T, usize)>, name: &str, lineno: usize) -> PResult<()> {
    match slot {
        Some((_, first)) => Err(ParseError::new(
            lineno,
            format!("duplicate `{name}` directive (first given on line {first})"),
        )),
        None => Ok(()),
    }
}

fn parse_index(tok: &str, lineno: usize) -> PResult<usize> {
    tok.parse()
        .map_err(|_| ParseError::new(lineno, format!("expected a non-negative integer, found `{tok}`")))
}

fn parse_indices(toks: &[&str], lineno: usize) -> PResult<Vec<usize>> {
    toks.iter().map(|t| parse_index(t, lineno)).collect()
}

fn parse_gate(toks: &[&str], lineno: usize) -> PResult<Gate> {
    let err = |msg: String| ParseError::new(lineno, msg);
    let Some((&name, args)) = toks.split_first() else {
        return Err(err("`gate` needs a gate name".into()));
    };
    if let Some(kind) = NamedKind::from_name(name) {
        return Ok(Gate::named(kind, parse_indices(args, lineno)?));
    }
    match name {
        "D" | "X" => {
            let Some((&k, rest)) = args.split_first() else {
                return Err(err(format!("gate {name} needs an arity")));
            };
            let k = parse_index(k, lineno)?;
            if rest.len() != k + 1 {
                return Err(err(format!(
                    "gate {name} of arity {k} needs {k} line(s) and a phase list, found {} token(s)",
                    rest.len()
                )));
            }
            let lines = parse_indices(&rest[..k], lineno)?;
            let phases = parse_phases(rest[k], lineno)?;
            if name == "D" {
                Ok(Gate::dense(lines, phases))
            } else {
                let [theta] = phases.as_slice() else {
                    return Err(err(format!("parity gate takes one phase, found {}", phases.len())));
                };
                Ok(Gate::parity(*theta, lines))
            }
        }
        other => Err(err(format!("unknown gate `{other}`"))),
    }
}

fn parse_phases(tok: &str, lineno: usize) -> PResult<Vec<PhaseValue>> {
    let err = |msg: String| ParseError::new(lineno, msg);
    let (tag, list) = tok
        .split_once(':')
        .ok_or_else(|| err(format!("expected `L:<...>` or `R:<...>`, found `{tok}`")))?;
    let items = list.split(',').map(str::trim);
    match tag {
        "L" => items
            .map(|s| {
                s.parse::<i64>()
                    .map(PhaseValue::lattice)
                    .map_err(|_| err(format!("bad lattice phase `{s}`")))
            })
            .collect(),
        "R" => items
            .map(|s| match s.parse::<f64>() {
                Ok(theta) if theta.is_finite() => Ok(PhaseValue::Real(theta)),
                _ => Err(err(format!("bad radian phase `{s}`"))),
            })
            .collect(),
        other => Err(err(format!("unknown phase tag `{other}`"))),
    }
}

/// Canonical text of `c`: header directives in fixed order, then one line
/// per gate. Real angles use the shortest representation that parses back
/// to the same `f64`.
pub fn serialize_circuit(c: &Circuit) -> String {
    let mut s = String::new();
    let join = |v: &[usize]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
    let _ = writeln!(s, "qubits {}", c.n_lines);
    let _ = writeln!(s, "kind {}", c.kind);
    let _ = writeln!(s, "output {}", join(&c.output));
    if !c.postselect.is_empty() {
        let _ = writeln!(s, "postselect {}", join(&c.postselect));
    }
    if !c.has_identity_relabel() {
        let _ = writeln!(s, "relabel {}", join(&c.relabel));
    }
    for g in &c.gates {
        match g {
            Gate::Named { kind, lines } => {
                let _ = writeln!(s, "gate {kind} {}", join(lines));
            }
            Gate::Dense { lines, table } => {
                let _ = writeln!(s, "gate D {} {} {}", lines.len(), join(lines), phase_list(table));
            }
            Gate::Parity { theta, lines } => {
                let _ = writeln!(s, "gate X {} {} {}", lines.len(), join(lines), phase_list(&[*theta]));
            }
        }
    }
    s
}

fn phase_list(table: &[PhaseValue]) -> String {
    if table.iter().all(PhaseValue::is_lattice) {
        let body: Vec<_> = table.iter().filter_map(PhaseValue::steps).map(|t| t.to_string()).collect();
        format!("L:{}", body.join(","))
    } else {
        let body: Vec<_> = table.iter().map(|p| format!("{:?}", p.radians())).collect();
        format!("R:{}", body.join(","))
    }
}
