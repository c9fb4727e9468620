//! Gate descriptions: dense diagonal tables, parity phases and the named
//! universal set.

use std::fmt;

use crate::error::{Error, Result};
use crate::phase::PhaseValue;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NamedKind {
    H,
    Z,
    CZ,
    /// `diag(e^{iπ/8}, e^{-iπ/8})`
    P,
}

impl NamedKind {
    pub fn arity(self) -> usize {
        match self {
            NamedKind::CZ => 2,
            _ => 1,
        }
    }

    /// Lattice table of the diagonal gates; `None` for H.
    pub fn lattice_table(self) -> Option<&'static [u8]> {
        match self {
            NamedKind::H => None,
            NamedKind::Z => Some(&[0, 8]),
            NamedKind::CZ => Some(&[0, 0, 0, 8]),
            NamedKind::P => Some(&[1, 15]),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NamedKind::H => "H",
            NamedKind::Z => "Z",
            NamedKind::CZ => "CZ",
            NamedKind::P => "P",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "H" => Some(NamedKind::H),
            "Z" => Some(NamedKind::Z),
            "CZ" => Some(NamedKind::CZ),
            "P" => Some(NamedKind::P),
            _ => None,
        }
    }
}

impl fmt::Display for NamedKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A gate acting on an ordered list of lines.
///
/// Table indices are little-endian in `lines`: bit `i` of the index is the
/// basis bit of `lines[i]`. A parity gate puts `theta` on even-parity labels
/// and `-theta` on odd-parity labels.
#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    Dense { lines: Vec<usize>, table: Vec<PhaseValue> },
    Parity { theta: PhaseValue, lines: Vec<usize> },
    Named { kind: NamedKind, lines: Vec<usize> },
}

impl Gate {
    pub fn dense(lines: Vec<usize>, table: Vec<PhaseValue>) -> Self {
        Gate::Dense { lines, table }
    }

    pub fn dense_lattice(lines: Vec<usize>, table: &[u8]) -> Self {
        Gate::Dense { lines, table: table.iter().map(|&t| PhaseValue::lattice(t as i64)).collect() }
    }

    pub fn parity(theta: PhaseValue, lines: Vec<usize>) -> Self {
        Gate::Parity { theta, lines }
    }

    pub fn named(kind: NamedKind, lines: Vec<usize>) -> Self {
        Gate::Named { kind, lines }
    }

    pub fn h(line: usize) -> Self {
        Gate::named(NamedKind::H, vec![line])
    }

    pub fn z(line: usize) -> Self {
        Gate::named(NamedKind::Z, vec![line])
    }

    pub fn cz(a: usize, b: usize) -> Self {
        Gate::named(NamedKind::CZ, vec![a, b])
    }

    pub fn p(line: usize) -> Self {
        Gate::named(NamedKind::P, vec![line])
    }

    pub fn lines(&self) -> &[usize] {
        match self {
            Gate::Dense { lines, .. } | Gate::Parity { lines, .. } | Gate::Named { lines, .. } => lines,
        }
    }

    pub fn arity(&self) -> usize {
        self.lines().len()
    }

    pub fn is_diagonal(&self) -> bool {
        !matches!(self, Gate::Named { kind: NamedKind::H, .. })
    }

    /// Phase on the basis label whose bits on `self.lines()` form `index`
    /// (little-endian).
    pub fn phase_at(&self, index: usize) -> Result<PhaseValue> {
        match self {
            Gate::Dense { table, .. } => table
                .get(index)
                .copied()
                .ok_or_else(|| Error::InvalidArgument(format!("table index {index} out of range"))),
            Gate::Parity { theta, .. } => {
                Ok(if index.count_ones().is_multiple_of(2) { *theta } else { theta.neg() })
            }
            Gate::Named { kind, .. } => kind
                .lattice_table()
                .map(|t| PhaseValue::Lattice(t[index & (t.len() - 1)]))
                .ok_or(Error::NotDiagonal),
        }
    }

    /// Dense table equivalent of a diagonal gate.
    pub fn to_dense(&self) -> Result<Gate> {
        match self {
            Gate::Dense { .. } => Ok(self.clone()),
            Gate::Parity { theta, lines } => {
                let table = (0..1usize << lines.len())
                    .map(|i| if i.count_ones() % 2 == 0 { *theta } else { theta.neg() })
                    .collect();
                Ok(Gate::Dense { lines: lines.clone(), table })
            }
            Gate::Named { kind, lines } => kind
                .lattice_table()
                .map(|t| Gate::dense_lattice(lines.clone(), t))
                .ok_or(Error::NotDiagonal),
        }
    }

    /// Whether every phase this gate can produce lies on the π/8 lattice.
    pub fn is_lattice(&self) -> bool {
        match self {
            Gate::Dense { table, .. } => table.iter().all(PhaseValue::is_lattice),
            Gate::Parity { theta, .. } => theta.is_lattice(),
            Gate::Named { .. } => true,
        }
    }
}

/// Phase of a diagonal gate on a basis label restricted to the gate's lines,
/// `bits[i]` being the bit on `g.lines()[i]`.
pub fn gate_phase(g: &Gate, bits: &[bool]) -> Result<PhaseValue> {
    if !g.is_diagonal() {
        return Err(Error::NotDiagonal);
    }
    if bits.len() != g.arity() {
        return Err(Error::ArityMismatch { expected: g.arity(), found: bits.len() });
    }
    let index = bits.iter().enumerate().fold(0usize, |acc, (i, &b)| acc | (b as usize) << i);
    g.phase_at(index)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn cz_phase_on_11() {
        let cz = Gate::cz(0, 1).to_dense().unwrap();
        assert_eq!(gate_phase(&cz, &bits("11")).unwrap(), PhaseValue::Lattice(8));
        assert_eq!(gate_phase(&cz, &bits("10")).unwrap(), PhaseValue::Lattice(0));
    }

    #[test]
    fn parity_even_label_gets_theta() {
        let g = Gate::parity(PhaseValue::Real(0.3), vec![0, 1, 2]);
        assert_eq!(gate_phase(&g, &bits("101")).unwrap(), PhaseValue::Real(0.3));
        assert_eq!(gate_phase(&g, &bits("100")).unwrap(), PhaseValue::Real(-0.3));
    }

    #[test]
    fn dense_index_is_little_endian() {
        let g = Gate::dense_lattice(vec![4, 7], &[0, 1, 2, 3]);
        assert_eq!(gate_phase(&g, &bits("11")).unwrap(), PhaseValue::Lattice(3));
        // line 4 set, line 7 clear -> index 1
        assert_eq!(gate_phase(&g, &bits("10")).unwrap(), PhaseValue::Lattice(1));
        assert_eq!(gate_phase(&g, &bits("01")).unwrap(), PhaseValue::Lattice(2));
    }

    #[test]
    fn arity_mismatch_and_h_rejected() {
        let g = Gate::dense_lattice(vec![0, 1], &[0, 0, 0, 8]);
        assert!(matches!(gate_phase(&g, &bits("1")), Err(Error::ArityMismatch { expected: 2, found: 1 })));
        assert!(matches!(gate_phase(&Gate::h(0), &bits("1")), Err(Error::NotDiagonal)));
    }

    #[test]
    fn named_tables() {
        assert_eq!(Gate::z(0).to_dense().unwrap(), Gate::dense_lattice(vec![0], &[0, 8]));
        assert_eq!(Gate::p(3).to_dense().unwrap(), Gate::dense_lattice(vec![3], &[1, 15]));
        assert_eq!(Gate::cz(2, 1).to_dense().unwrap(), Gate::dense_lattice(vec![2, 1], &[0, 0, 0, 8]));
    }

    #[test]
    fn parity_matches_dense_expansion_exhaustively() {
        for arity in 1..=10usize {
            for theta in [PhaseValue::Lattice(3), PhaseValue::Real(0.77)] {
                let g = Gate::parity(theta, (0..arity).collect());
                let d = g.to_dense().unwrap();
                for index in 0..1usize << arity {
                    let b: Vec<bool> = (0..arity).map(|i| index >> i & 1 == 1).collect();
                    assert_eq!(gate_phase(&g, &b).unwrap(), gate_phase(&d, &b).unwrap());
                }
            }
        }
    }
}
