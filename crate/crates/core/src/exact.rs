//! Dense statevector oracle.
//!
//! Everything here is exact up to double-precision rounding and exponential
//! in the line count; it is the ground truth the compiler and the fast
//! sampler are checked against.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::circuit::{Circuit, CircuitKind};
use crate::config::Caps;
use crate::distribution::{Distribution, SampleBatch};
use crate::error::{Error, Result};
use crate::gate::{Gate, NamedKind};
use crate::sampling::chunked_tallies;

const PAR_THRESHOLD: usize = 1 << 14;

/// Amplitudes of an `n`-qubit state; bit `i` of an index is line `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zero(n: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        StateVector { n, amps }
    }

    /// Panics unless `amps.len()` is a power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Self {
        assert!(amps.len().is_power_of_two(), "amplitude count must be a power of two");
        StateVector { n: amps.len().trailing_zeros() as usize, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn apply_h(&mut self, line: usize) {
        let stride = 1usize << line;
        let butterfly = |chunk: &mut [Complex64]| {
            let (lo, hi) = chunk.split_at_mut(stride);
            for (a, b) in lo.iter_mut().zip(hi) {
                let (x, y) = (*a, *b);
                *a = (x + y) * FRAC_1_SQRT_2;
                *b = (x - y) * FRAC_1_SQRT_2;
            }
        };
        if self.amps.len() >= PAR_THRESHOLD {
            self.amps.par_chunks_mut(2 * stride).for_each(butterfly);
        } else {
            self.amps.chunks_mut(2 * stride).for_each(butterfly);
        }
    }

    /// Multiplies each amplitude by `phases[j]`, `j` gathering the index bits
    /// on `lines` little-endian.
    pub fn apply_diagonal(&mut self, lines: &[usize], phases: &[Complex64]) {
        debug_assert_eq!(phases.len(), 1 << lines.len());
        let apply = |(idx, a): (usize, &mut Complex64)| {
            let j = lines.iter().enumerate().fold(0, |acc, (i, &l)| acc | ((idx >> l) & 1) << i);
            *a *= phases[j];
        };
        if self.amps.len() >= PAR_THRESHOLD {
            self.amps.par_iter_mut().enumerate().for_each(apply);
        } else {
            self.amps.iter_mut().enumerate().for_each(apply);
        }
    }

    fn apply_parity(&mut self, lines: &[usize], even: Complex64, odd: Complex64) {
        let mask = lines.iter().fold(0usize, |m, &l| m | 1 << l);
        let apply = |(idx, a): (usize, &mut Complex64)| {
            *a *= if (idx & mask).count_ones() % 2 == 0 { even } else { odd };
        };
        if self.amps.len() >= PAR_THRESHOLD {
            self.amps.par_iter_mut().enumerate().for_each(apply);
        } else {
            self.amps.iter_mut().enumerate().for_each(apply);
        }
    }

    /// Applies a gate read in the Z basis (H is the only non-diagonal gate).
    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        match gate {
            Gate::Named { kind: NamedKind::H, lines } => self.apply_h(lines[0]),
            Gate::Parity { theta, lines } => {
                self.apply_parity(lines, theta.to_complex(), theta.neg().to_complex())
            }
            Gate::Dense { lines, table } => {
                let phases: Vec<_> = table.iter().map(|p| p.to_complex()).collect();
                self.apply_diagonal(lines, &phases);
            }
            named @ Gate::Named { .. } => return self.apply_gate(&named.to_dense()?),
        }
        Ok(())
    }

    /// Applies a gate that is diagonal in the X basis: `H^{⊗k} D H^{⊗k}` on
    /// its support.
    pub fn apply_x_diagonal(&mut self, gate: &Gate) -> Result<()> {
        if !gate.is_diagonal() {
            return Err(Error::NotDiagonal);
        }
        for &l in gate.lines() {
            self.apply_h(l);
        }
        self.apply_gate(gate)?;
        for &l in gate.lines() {
            self.apply_h(l);
        }
        Ok(())
    }

    pub fn apply_h_all(&mut self) {
        for l in 0..self.n {
            self.apply_h(l);
        }
    }

    /// Weight of every outcome of `register` (little-endian in register order).
    pub fn register_weights(&self, register: &[usize]) -> Vec<f64> {
        let mut w = vec![0.0; 1 << register.len()];
        for (idx, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if p != 0.0 {
                let j = register.iter().enumerate().fold(0, |acc, (i, &l)| acc | ((idx >> l) & 1) << i);
                w[j] += p;
            }
        }
        w
    }

    /// One `index re im` line per amplitude.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (i, a) in self.amps.iter().enumerate() {
            let _ = writeln!(s, "{i} {:?} {:?}", a.re, a.im);
        }
        s
    }
}

pub fn run_statevector(c: &Circuit) -> Result<StateVector> {
    run_statevector_with(c, &Caps::DEFAULT)
}

/// Final pre-measurement state of `c` on input `|0…0⟩`.
pub fn run_statevector_with(c: &Circuit, caps: &Caps) -> Result<StateVector> {
    if c.n_lines > caps.statevector_qubits {
        return Err(Error::CapExceeded {
            resource: "statevector qubit",
            requested: c.n_lines,
            cap: caps.statevector_qubits,
        });
    }
    c.ensure_valid_with(caps)?;
    let mut psi = StateVector::zero(c.n_lines);
    match c.kind {
        CircuitKind::Universal => {
            for g in &c.gates {
                psi.apply_gate(g)?;
            }
        }
        CircuitKind::IqpZ => {
            psi.apply_h_all();
            for g in &c.gates {
                psi.apply_gate(g)?;
            }
            psi.apply_h_all();
        }
        CircuitKind::IqpX => {
            for g in &c.gates {
                psi.apply_x_diagonal(g)?;
            }
        }
    }
    Ok(psi)
}

pub fn joint_distribution(c: &Circuit) -> Result<Distribution> {
    joint_distribution_with(c, &Caps::DEFAULT)
}

/// Born-rule distribution of the concatenated register `output ++ postselect`.
pub fn joint_distribution_with(c: &Circuit, caps: &Caps) -> Result<Distribution> {
    let psi = run_statevector_with(c, caps)?;
    let register: Vec<usize> = c.output.iter().chain(&c.postselect).copied().collect();
    Distribution::from_weights(register.len(), &psi.register_weights(&register))
}

pub fn output_distribution(c: &Circuit) -> Result<Distribution> {
    output_distribution_with(c, &Caps::DEFAULT)
}

/// Unconditioned distribution of the output register.
pub fn output_distribution_with(c: &Circuit, caps: &Caps) -> Result<Distribution> {
    let psi = run_statevector_with(c, caps)?;
    Distribution::from_weights(c.output.len(), &psi.register_weights(&c.output))
}

pub fn conditional_distribution(c: &Circuit) -> Result<Distribution> {
    conditional_distribution_with(c, &Caps::DEFAULT)
}

/// `prob[O = x | P = 0…0]`, the plain output distribution when `P` is empty.
pub fn conditional_distribution_with(c: &Circuit, caps: &Caps) -> Result<Distribution> {
    joint_distribution_with(c, caps)?.condition_high_zero(c.output.len())
}

pub fn marginal(d: &Distribution, positions: &[usize]) -> Result<Distribution> {
    d.marginal(positions)
}

pub fn sample_bitchain(c: &Circuit, seed: u64, shots: u64) -> Result<SampleBatch> {
    sample_bitchain_with(c, seed, shots, &Caps::DEFAULT)
}

/// Weak simulation from strong simulation: each shot draws the output bits
/// in register order, bit `j` from its exact conditional given bits `0..j`.
pub fn sample_bitchain_with(c: &Circuit, seed: u64, shots: u64, caps: &Caps) -> Result<SampleBatch> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be positive".into()));
    }
    let target = conditional_distribution_with(c, caps)?;
    let chain = BitChain::new(&target);
    Ok(chunked_tallies(seed, shots, target.width(), || (), |_, rng| chain.draw(rng)))
}

/// Prefix marginals of a distribution: `prefix[j]` is the law of bits `0..j`.
pub(crate) struct BitChain {
    prefix: Vec<Vec<f64>>,
}

impl BitChain {
    pub(crate) fn new(d: &Distribution) -> Self {
        let m = d.width();
        let mut prefix = vec![Vec::new(); m + 1];
        prefix[m] = d.to_dense();
        for j in (0..m).rev() {
            let next = &prefix[j + 1];
            let half = 1usize << j;
            prefix[j] = (0..half).map(|k| next[k] + next[k | half]).collect();
        }
        BitChain { prefix }
    }

    pub(crate) fn draw<R: Rng>(&self, rng: &mut R) -> u64 {
        let mut key = 0usize;
        for j in 0..self.prefix.len() - 1 {
            let p_one = self.prefix[j + 1][key | 1 << j] / self.prefix[j][key];
            if rng.random::<f64>() < p_one {
                key |= 1 << j;
            }
        }
        key as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::PhaseValue;

    fn universal(n: usize, output: Vec<usize>, gates: Vec<Gate>) -> Circuit {
        Circuit::new(CircuitKind::Universal, n, output).with_gates(gates)
    }

    fn cz_iqp_z() -> Circuit {
        Circuit::new(CircuitKind::IqpZ, 2, vec![0, 1]).with_gates([Gate::dense_lattice(vec![0, 1], &[0, 0, 0, 8])])
    }

    // 2x2 matrix product oracle for single-qubit circuits
    fn single_qubit_oracle(gates: &[[[Complex64; 2]; 2]]) -> [Complex64; 2] {
        let mut v = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        for m in gates {
            v = [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]];
        }
        v
    }

    #[test]
    fn empty_circuit_is_zero_state() {
        let psi = run_statevector(&universal(1, vec![0], vec![])).unwrap();
        assert_eq!(psi.amplitudes(), &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
    }

    #[test]
    fn hph_closed_form() {
        let c = universal(1, vec![0], vec![Gate::h(0), Gate::p(0), Gate::h(0)]);
        let d = output_distribution(&c).unwrap();
        let expect = (2.0 + 2f64.sqrt()) / 4.0;
        assert!((d.prob(0) - expect).abs() < 1e-12);

        let r = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let h = [[r, r], [r, -r]];
        let e = Complex64::cis(std::f64::consts::PI / 8.0);
        let p = [[e, Complex64::new(0.0, 0.0)], [Complex64::new(0.0, 0.0), e.conj()]];
        let v = single_qubit_oracle(&[h, p, h]);
        assert!((v[0].norm_sqr() - d.prob(0)).abs() < 1e-12);
    }

    #[test]
    fn cz_sandwich_is_uniform() {
        let d = joint_distribution(&cz_iqp_z()).unwrap();
        for k in 0..4 {
            assert!((d.prob(k) - 0.25).abs() < 1e-12);
        }
        // same thing spelled out as a universal circuit
        let u = universal(2, vec![0, 1], vec![Gate::h(0), Gate::h(1), Gate::cz(0, 1), Gate::h(0), Gate::h(1)]);
        let psi_u = run_statevector(&u).unwrap();
        let psi_z = run_statevector(&cz_iqp_z()).unwrap();
        for (a, b) in psi_u.amplitudes().iter().zip(psi_z.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn identity_joint_is_point_mass() {
        let d = joint_distribution(&universal(1, vec![0], vec![])).unwrap();
        assert_eq!(d, Distribution::point(1, 0));
    }

    #[test]
    fn conditional_matches_joint_quotient() {
        let c = universal(3, vec![0], vec![Gate::h(0), Gate::h(1), Gate::cz(0, 1), Gate::p(1), Gate::h(1), Gate::h(2)])
            .with_postselect(vec![1, 2]);
        let joint = joint_distribution(&c).unwrap();
        let cond = conditional_distribution(&c).unwrap();
        let denom = joint.prob(0b000) + joint.prob(0b001);
        assert_eq!(cond.prob(0), joint.prob(0b000) / denom);
        assert_eq!(cond.prob(1), joint.prob(0b001) / denom);

        let plain = universal(2, vec![1], vec![Gate::h(0), Gate::cz(0, 1)]);
        assert_eq!(conditional_distribution(&plain).unwrap(), output_distribution(&plain).unwrap());
    }

    #[test]
    fn impossible_postselection() {
        // P = H Z H = X flips line 1 to |1> deterministically
        let c = universal(2, vec![0], vec![Gate::h(1), Gate::z(1), Gate::h(1)]).with_postselect(vec![1]);
        assert!(matches!(conditional_distribution(&c), Err(Error::ZeroPostselectionMass { .. })));
    }

    #[test]
    fn cap_is_enforced() {
        let c = Circuit::new(CircuitKind::IqpZ, 23, vec![0]);
        assert!(matches!(run_statevector(&c), Err(Error::CapExceeded { requested: 23, cap: 22, .. })));
    }

    #[test]
    fn iqp_x_equals_iqp_z_with_same_tables() {
        let gates = vec![
            Gate::dense_lattice(vec![0, 1], &[0, 0, 0, 8]),
            Gate::parity(PhaseValue::Real(0.4), vec![1, 2]),
            Gate::dense_lattice(vec![2], &[1, 15]),
        ];
        let x = Circuit::new(CircuitKind::IqpX, 3, vec![0, 1, 2]).with_gates(gates.clone());
        let z = Circuit::new(CircuitKind::IqpZ, 3, vec![0, 1, 2]).with_gates(gates);
        let (a, b) = (run_statevector(&x).unwrap(), run_statevector(&z).unwrap());
        for (p, q) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((p - q).norm() < 1e-12);
        }
    }

    #[test]
    fn bitchain_deterministic_circuit() {
        let batch = sample_bitchain(&universal(3, vec![0, 2], vec![]), 1, 500).unwrap();
        assert_eq!(batch.tallies.len(), 1);
        assert_eq!(batch.count(0), 500);
    }

    #[test]
    fn bitchain_uniform_within_five_sigma() {
        let n = 100_000u64;
        let batch = sample_bitchain(&cz_iqp_z(), 42, n).unwrap();
        assert_eq!(batch, sample_bitchain(&cz_iqp_z(), 42, n).unwrap());
        let sigma = (n as f64 * 0.25 * 0.75).sqrt();
        for k in 0..4 {
            let dev = (batch.count(k) as f64 - n as f64 / 4.0).abs();
            assert!(dev < 5.0 * sigma, "outcome {k}: {}", batch.count(k));
        }
    }

    #[test]
    fn bitchain_follows_skewed_conditional() {
        let c = universal(2, vec![0, 1], vec![Gate::h(0), Gate::p(0), Gate::h(0), Gate::h(1), Gate::cz(0, 1)]);
        let truth = output_distribution(&c).unwrap();
        let batch = sample_bitchain(&c, 3, 100_000).unwrap();
        let emp = batch.empirical().unwrap();
        let tv: f64 = (0..4).map(|k| (emp.prob(k) - truth.prob(k)).abs()).sum();
        assert!(tv < 0.02, "tv = {tv}");
    }
}
