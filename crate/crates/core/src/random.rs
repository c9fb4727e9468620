//! Random instances for tests, benchmarks and acceptance runs.

use num_complex::Complex64;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::circuit::{Circuit, CircuitKind};
use crate::distribution::Distribution;
use crate::gate::{Gate, NamedKind};
use crate::phase::PhaseValue;

fn distinct_lines<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    rand::seq::index::sample(rng, n, k).into_vec()
}

/// A universal circuit on `1..=max_lines` lines with `0..=max_gates` gates
/// from {H, Z, CZ, P} and a nonempty output register.
pub fn random_universal<R: Rng>(rng: &mut R, max_lines: usize, max_gates: usize) -> Circuit {
    let n = rng.random_range(1..=max_lines);
    let m = rng.random_range(1..=n);
    let mut c = Circuit::new(CircuitKind::Universal, n, distinct_lines(rng, n, m));
    for _ in 0..rng.random_range(0..=max_gates) {
        let kinds: &[NamedKind] =
            if n >= 2 { &[NamedKind::H, NamedKind::Z, NamedKind::CZ, NamedKind::P] } else { &[NamedKind::H, NamedKind::Z, NamedKind::P] };
        let kind = *kinds.choose(rng).expect("nonempty");
        c.push(Gate::named(kind, distinct_lines(rng, n, kind.arity())));
    }
    c
}

/// An `iqp-z` circuit with lattice phases: `n` lines, `m` output lines chosen
/// at random, and `gates` gates of arity `1..=max_arity`. About one gate in
/// five is a Parity gate.
pub fn random_lattice_iqp<R: Rng>(rng: &mut R, n: usize, m: usize, gates: usize, max_arity: usize) -> Circuit {
    let mut c = Circuit::new(CircuitKind::IqpZ, n, distinct_lines(rng, n, m));
    for _ in 0..gates {
        let k = rng.random_range(1..=max_arity.min(n));
        let lines = distinct_lines(rng, n, k);
        c.push(if rng.random_bool(0.2) {
            Gate::parity(PhaseValue::Lattice(rng.random_range(0..16)), lines)
        } else {
            let table: Vec<u8> = (0..1usize << k).map(|_| rng.random_range(0..16)).collect();
            Gate::dense_lattice(lines, &table)
        });
    }
    c
}

/// Like [`random_lattice_iqp`] but each gate's line set is drawn by class:
/// output-only, mixed output and non-output, or non-output only, with fixed
/// weights. The work per shot of the fast sampler then does not depend on
/// `n` in expectation.
pub fn random_classed_iqp<R: Rng>(rng: &mut R, n: usize, m: usize, gates: usize, max_arity: usize) -> Circuit {
    assert!(m >= 1 && m < n, "need both output and non-output lines");
    let mut lines: Vec<usize> = (0..n).collect();
    lines.shuffle(rng);
    let (out, rest) = lines.split_at(m);
    let mut c = Circuit::new(CircuitKind::IqpZ, n, out.to_vec());
    for _ in 0..gates {
        let k = rng.random_range(1..=max_arity);
        let class = rng.random_range(0..3);
        let chosen: Vec<usize> = match class {
            0 => out.choose_multiple(rng, k.min(m)).copied().collect(),
            1 if k >= 2 => {
                let ko = rng.random_range(1..k).min(m);
                let mut v: Vec<usize> = out.choose_multiple(rng, ko).copied().collect();
                v.extend(rest.choose_multiple(rng, (k - ko).min(rest.len())));
                v.shuffle(rng);
                v
            }
            _ => rest.choose_multiple(rng, k.min(rest.len())).copied().collect(),
        };
        let table: Vec<u8> = (0..1usize << chosen.len()).map(|_| rng.random_range(0..16)).collect();
        c.push(Gate::dense_lattice(chosen, &table));
    }
    c
}

fn random_phase<R: Rng>(rng: &mut R, lattice: bool) -> PhaseValue {
    if lattice {
        PhaseValue::Lattice(rng.random_range(0..16))
    } else {
        PhaseValue::Real(rng.random_range(0.0..std::f64::consts::TAU))
    }
}

/// Any valid circuit of any kind, with real and lattice phases, optional
/// post-selection and an optional nontrivial relabel. Used for format
/// round-trips.
pub fn random_any<R: Rng>(rng: &mut R) -> Circuit {
    let kind = *[CircuitKind::Universal, CircuitKind::IqpX, CircuitKind::IqpZ].choose(rng).expect("nonempty");
    if kind == CircuitKind::Universal {
        let mut c = random_universal(rng, 6, 20);
        if rng.random_bool(0.3) {
            let idle: Vec<usize> = (0..c.n_lines).filter(|l| !c.output.contains(l)).collect();
            c.postselect = idle.into_iter().filter(|_| rng.random_bool(0.5)).collect();
        }
        return c;
    }
    let n = rng.random_range(1..=8);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let m = rng.random_range(1..=n);
    let output = perm[..m].to_vec();
    let postselect: Vec<usize> = perm[m..].iter().copied().filter(|_| rng.random_bool(0.4)).collect();
    let mut c = Circuit::new(kind, n, output).with_postselect(postselect);
    for _ in 0..rng.random_range(0..=12) {
        let k = rng.random_range(1..=n.min(4));
        let lines = distinct_lines(rng, n, k);
        let lattice = rng.random_bool(0.6);
        c.push(if rng.random_bool(0.3) {
            Gate::parity(random_phase(rng, lattice), lines)
        } else {
            Gate::dense(lines, (0..1usize << k).map(|_| random_phase(rng, lattice)).collect())
        });
    }
    if rng.random_bool(0.3) {
        let mut relabel: Vec<usize> = (0..n).collect();
        relabel.shuffle(rng);
        c.relabel = relabel;
    }
    c
}

/// A uniformly random single-qubit pure state.
pub fn random_qubit<R: Rng>(rng: &mut R) -> [Complex64; 2] {
    loop {
        let v: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let norm_sqr: f64 = v.iter().map(|x| x * x).sum();
        if norm_sqr > 1e-6 && norm_sqr <= 1.0 {
            let s = norm_sqr.sqrt();
            return [Complex64::new(v[0] / s, v[1] / s), Complex64::new(v[2] / s, v[3] / s)];
        }
    }
}

/// A distribution with full support over `width` bits, weights drawn from
/// `(0.05, 1)` before normalizing.
pub fn random_full_distribution<R: Rng>(rng: &mut R, width: usize) -> Distribution {
    let w: Vec<f64> = (0..1usize << width).map(|_| rng.random_range(0.05..1.0)).collect();
    Distribution::from_weights(width, &w).expect("positive weights")
}

/// Multiplies each probability of `p` by a factor in `[1/spread, spread]`
/// and renormalizes.
pub fn perturb<R: Rng>(rng: &mut R, p: &Distribution, spread: f64) -> Distribution {
    let mut w = p.to_dense();
    let ln = spread.ln();
    for x in &mut w {
        *x *= (rng.random_range(-ln..=ln)).exp();
    }
    Distribution::from_weights(p.width(), &w).expect("positive weights")
}
