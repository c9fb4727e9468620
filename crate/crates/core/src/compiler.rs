//! Rewriting passes: X/Z form conversion, Hadamard normalization, and the
//! Hadamard-gadget lowering of universal circuits to post-selected `iqp-z`
//! circuits.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::circuit::{Circuit, CircuitKind};
use crate::error::{Error, Result};
use crate::gate::{Gate, NamedKind};

pub use crate::circuit::check_restricted_phases;

/// Retags an `iqp-x` circuit as `iqp-z`. The tables carry over unchanged:
/// conjugating by `H^{⊗n}` maps each X-diagonal gate to the Z-diagonal gate
/// with the same table under `|±⟩ ↔ |0/1⟩`.
pub fn to_z_form(c: &Circuit) -> Result<Circuit> {
    c.expect_kind(&[CircuitKind::IqpX])?;
    Ok(Circuit { kind: CircuitKind::IqpZ, ..c.clone() })
}

pub fn to_x_form(c: &Circuit) -> Result<Circuit> {
    c.expect_kind(&[CircuitKind::IqpZ])?;
    Ok(Circuit { kind: CircuitKind::IqpX, ..c.clone() })
}

fn is_h(g: &Gate) -> bool {
    matches!(g, Gate::Named { kind: NamedKind::H, .. })
}

/// Makes every line start and end with its own H gate.
///
/// A line whose first gate is not H gets `H H` prepended; a line whose last
/// gate is not H, or whose only H would serve as both ends, gets `H H`
/// appended. Each insertion is an identity, so the unitary is unchanged.
pub fn normalize_hadamards(c: &Circuit) -> Result<Circuit> {
    c.expect_kind(&[CircuitKind::Universal])?;
    c.ensure_valid()?;
    let mut per_line: Vec<Vec<usize>> = vec![Vec::new(); c.n_lines];
    for (i, g) in c.gates.iter().enumerate() {
        for &l in g.lines() {
            per_line[l].push(i);
        }
    }
    let mut prefix = Vec::new();
    let mut suffix = Vec::new();
    for (line, touches) in per_line.iter().enumerate() {
        let first_is_h = touches.first().is_some_and(|&i| is_h(&c.gates[i]));
        if !first_is_h {
            prefix.extend([Gate::h(line), Gate::h(line)]);
        }
        let last_is_h = touches.last().is_some_and(|&i| is_h(&c.gates[i]));
        // after a prepend the line opens with two H's of its own
        let distinct_ends = !first_is_h || touches.len() >= 2;
        if !(last_is_h && distinct_ends) && !(touches.is_empty() && !first_is_h) {
            suffix.extend([Gate::h(line), Gate::h(line)]);
        }
    }
    let gates = prefix.into_iter().chain(c.gates.iter().cloned()).chain(suffix).collect();
    Ok(Circuit { gates, ..c.clone() })
}

/// What [`gadgetize`] did to the line layout.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GadgetReport {
    pub ancillas_added: usize,
    pub postselects_added: usize,
    /// `(retired line, ancilla taking over)` for each gadget, in application
    /// order.
    pub gadgets: Vec<(usize, usize)>,
    /// Logical wire to final physical line; a permutation of the output
    /// circuit's lines.
    pub relabel: Vec<usize>,
    /// Original output and post-selection lines to the lines carrying them
    /// in the compiled circuit.
    pub original_to_final: BTreeMap<usize, usize>,
}

impl GadgetReport {
    /// Comment block written above a compiled circuit.
    pub fn to_comment_lines(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# gadgets {} ancillas {} postselects {}", self.gadgets.len(), self.ancillas_added, self.postselects_added);
        for &(a, e) in &self.gadgets {
            let _ = writeln!(s, "# ancilla {e}<-{a}");
        }
        for (orig, fin) in &self.original_to_final {
            let _ = writeln!(s, "# line {orig}->{fin}");
        }
        s
    }
}

/// Lowers a universal circuit over {H, Z, CZ, P} to a post-selected `iqp-z`
/// circuit with the same conditional output distribution.
///
/// The input is first normalized so every line begins and ends with H; those
/// boundary H's become the implicit Hadamard layers. Each remaining H on a
/// line `a` becomes a fresh line `e`, a CZ on `(a, e)`, and post-selection of
/// `a` on 0; later gates on `a` move to `e`. Each such gadget succeeds with
/// probability exactly 1/2 and leaves `H|ψ⟩` on `e`.
pub fn gadgetize(c: &Circuit) -> Result<(Circuit, GadgetReport)> {
    let norm = normalize_hadamards(c)?;
    for (i, g) in norm.gates.iter().enumerate() {
        if !matches!(g, Gate::Named { .. }) {
            return Err(Error::NotUniversal(i));
        }
    }

    let n = norm.n_lines;
    let mut first_h = vec![usize::MAX; n];
    let mut last_h = vec![usize::MAX; n];
    for (i, g) in norm.gates.iter().enumerate() {
        if is_h(g) {
            let l = g.lines()[0];
            if first_h[l] == usize::MAX {
                first_h[l] = i;
            }
            last_h[l] = i;
        }
    }

    let mut phys: Vec<usize> = (0..n).collect();
    let mut retired = vec![false; n];
    let mut n_lines = n;
    let mut gates = Vec::new();
    let mut gadgets = Vec::new();
    let mut gadget_posts = Vec::new();

    for (i, g) in norm.gates.iter().enumerate() {
        let Gate::Named { kind, lines } = g else { unreachable!() };
        let mapped: Vec<usize> = lines.iter().map(|&l| phys[l]).collect();
        if let Some(&dead) = mapped.iter().find(|&&p| retired[p]) {
            return Err(Error::LineRetired(dead));
        }
        match kind {
            NamedKind::H => {
                let l = lines[0];
                if i == first_h[l] || i == last_h[l] {
                    continue;
                }
                let (a, e) = (phys[l], n_lines);
                n_lines += 1;
                retired.push(false);
                gates.push(Gate::dense_lattice(vec![a, e], NamedKind::CZ.lattice_table().unwrap()));
                retired[a] = true;
                gadget_posts.push(a);
                gadgets.push((a, e));
                phys[l] = e;
            }
            diag => gates.push(Gate::dense_lattice(mapped, diag.lattice_table().unwrap())),
        }
    }

    let output: Vec<usize> = norm.output.iter().map(|&l| phys[l]).collect();
    let mut postselect: Vec<usize> = norm.postselect.iter().map(|&l| phys[l]).collect();
    postselect.extend(&gadget_posts);
    let relabel: Vec<usize> = phys.iter().copied().chain(gadget_posts.iter().copied()).collect();
    let original_to_final = norm.output.iter().chain(&norm.postselect).map(|&l| (l, phys[l])).collect();

    let out = Circuit { kind: CircuitKind::IqpZ, n_lines, gates, output, postselect, relabel: relabel.clone() };
    out.ensure_valid()?;
    let report = GadgetReport {
        ancillas_added: gadgets.len(),
        postselects_added: gadget_posts.len(),
        gadgets,
        relabel,
        original_to_final,
    };
    Ok((out, report))
}

/// Number of H gates that are neither the first nor the last gate on their
/// line.
pub fn count_intermediate_hadamards(c: &Circuit) -> usize {
    let mut per_line: Vec<Vec<bool>> = vec![Vec::new(); c.n_lines];
    for g in &c.gates {
        for &l in g.lines() {
            per_line[l].push(is_h(g));
        }
    }
    per_line
        .iter()
        .map(|seq| match seq.len() {
            0..=2 => 0,
            len => seq[1..len - 1].iter().filter(|&&h| h).count(),
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{conditional_distribution, run_statevector};
    use crate::phase::PhaseValue;

    fn universal(n: usize, gates: Vec<Gate>) -> Circuit {
        Circuit::new(CircuitKind::Universal, n, vec![0]).with_gates(gates)
    }

    fn assert_same_state(a: &Circuit, b: &Circuit) {
        let (x, y) = (run_statevector(a).unwrap(), run_statevector(b).unwrap());
        for (p, q) in x.amplitudes().iter().zip(y.amplitudes()) {
            assert!((p - q).norm() < 1e-12);
        }
    }

    #[test]
    fn form_conversion() {
        let x = Circuit::new(CircuitKind::IqpX, 2, vec![0, 1])
            .with_gates([Gate::parity(PhaseValue::Real(0.7), vec![0, 1])]);
        let z = to_z_form(&x).unwrap();
        assert_eq!(z.kind, CircuitKind::IqpZ);
        assert_eq!(to_x_form(&z).unwrap(), x);
        assert!(matches!(to_x_form(&x), Err(Error::WrongKind { .. })));
        assert!(matches!(to_z_form(&z), Err(Error::WrongKind { .. })));

        let cz = Circuit::new(CircuitKind::IqpX, 2, vec![0, 1])
            .with_gates([Gate::dense_lattice(vec![0, 1], &[0, 0, 0, 8])]);
        assert_same_state(&cz, &to_z_form(&cz).unwrap());

        let empty = Circuit::new(CircuitKind::IqpX, 3, vec![0, 1, 2]);
        let d = conditional_distribution(&to_z_form(&empty).unwrap()).unwrap();
        assert_eq!(d.prob(0), 1.0);
    }

    #[test]
    fn normalize_examples() {
        let done = universal(1, vec![Gate::h(0), Gate::p(0), Gate::h(0)]);
        assert_eq!(normalize_hadamards(&done).unwrap(), done);

        let bare = universal(1, vec![Gate::z(0)]);
        let norm = normalize_hadamards(&bare).unwrap();
        assert_eq!(norm.gates, vec![Gate::h(0), Gate::h(0), Gate::z(0), Gate::h(0), Gate::h(0)]);
        assert_same_state(&bare, &norm);

        let empty = Circuit::new(CircuitKind::Universal, 2, vec![0, 1]);
        let norm = normalize_hadamards(&empty).unwrap();
        assert_eq!(norm.gates, vec![Gate::h(0), Gate::h(0), Gate::h(1), Gate::h(1)]);

        // a lone H cannot be both ends of its line
        let lone = universal(1, vec![Gate::h(0)]);
        let norm = normalize_hadamards(&lone).unwrap();
        assert_eq!(norm.gates, vec![Gate::h(0), Gate::h(0), Gate::h(0)]);
        assert_same_state(&lone, &norm);
    }

    #[test]
    fn no_intermediate_h_means_no_gadgets() {
        let (out, report) = gadgetize(&universal(1, vec![Gate::h(0), Gate::h(0)])).unwrap();
        assert_eq!(report.ancillas_added, 0);
        assert!(out.postselect.is_empty());
        assert!(out.gates.is_empty());
        assert_eq!(out.n_lines, 1);
    }

    #[test]
    fn one_gadget_preserves_distribution() {
        let c = universal(1, vec![Gate::h(0), Gate::p(0), Gate::h(0), Gate::p(0), Gate::h(0)]);
        let (out, report) = gadgetize(&c).unwrap();
        assert_eq!((report.ancillas_added, report.postselects_added), (1, 1));
        assert_eq!(report.gadgets, vec![(0, 1)]);
        assert_eq!(out.output, vec![1]);
        assert_eq!(out.postselect, vec![0]);
        assert_eq!(out.relabel, vec![1, 0]);
        assert!(check_restricted_phases(&out));
        let (a, b) = (conditional_distribution(&c).unwrap(), conditional_distribution(&out).unwrap());
        for k in 0..2 {
            assert!((a.prob(k) - b.prob(k)).abs() < 1e-10);
        }
        let report_text = report.to_comment_lines();
        assert!(report_text.contains("# ancilla 1<-0"));
    }

    #[test]
    fn hph_gadgetized_closed_form() {
        // both H's are boundary gates and become the implicit layers
        let c = universal(1, vec![Gate::h(0), Gate::p(0), Gate::h(0)]);
        let (out, _) = gadgetize(&c).unwrap();
        let d = conditional_distribution(&out).unwrap();
        assert!((d.prob(0) - (2.0 + 2f64.sqrt()) / 4.0).abs() < 1e-10);
        assert!((d.prob(1) - (2.0 - 2f64.sqrt()) / 4.0).abs() < 1e-10);
    }

    #[test]
    fn ancillas_match_intermediate_count() {
        let c = Circuit::new(CircuitKind::Universal, 2, vec![0, 1]).with_postselect(vec![]).with_gates([
            Gate::p(0),
            Gate::h(0),
            Gate::cz(0, 1),
            Gate::h(1),
            Gate::h(0),
            Gate::p(1),
        ]);
        let norm = normalize_hadamards(&c).unwrap();
        let (out, report) = gadgetize(&c).unwrap();
        assert_eq!(report.ancillas_added, count_intermediate_hadamards(&norm));
        assert_eq!(out.n_lines, 2 + report.ancillas_added);
        assert!(out.gates.iter().all(|g| matches!(g, Gate::Dense { .. }) && g.arity() <= 2));
    }

    #[test]
    fn rejects_non_universal() {
        let c = Circuit::new(CircuitKind::IqpZ, 1, vec![0]);
        assert!(matches!(gadgetize(&c), Err(Error::WrongKind { .. })));
    }
}
