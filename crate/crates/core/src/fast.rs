//! Exact sampling of IQP circuits with a small output register.
//!
//! In Z form, just before the closing Hadamard layer the state is
//! `2^{-(M+N)/2} Σ_{x,y} e^{i f(x,y)} |x,y⟩`, where `x` labels the `M`
//! output lines, `y` the `N` others, and `f` is the sum of the gate phases.
//! Reading `y` gives a uniform string, and for fixed `y` the output amplitudes
//! are a normalized Walsh–Hadamard transform of `e^{i f(·,y)}`. A shot
//! therefore costs one `2^M` table and one transform, independent of `N`.
//!
//! Gates that touch no output line only add a `y`-dependent global phase and
//! are dropped from the per-shot work. Gates that do are grouped by the set
//! of output lines they touch, so each group contributes one small table
//! that is expanded into the `2^M` table once. Groups that read no `y` bit
//! are folded into a base table when the plan is built.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::circuit::{check_restricted_phases, Circuit, CircuitKind};
use crate::config::Caps;
use crate::distribution::{gather_bits, Distribution, SampleBatch};
use crate::error::{Error, Result};
use crate::gate::Gate;
use crate::phase::{reduce_angle, PhaseValue, LATTICE_UNIT};
use crate::sampling::{chunked_tallies, inverse_cdf};
use crate::wht::walsh_hadamard;

/// Upper bound on cached per-`y` CDF entries (`2^R · 2^M`).
const CDF_CACHE_ENTRIES: usize = 1 << 22;

/// The accumulated phase `f(x, y₀)` for every output label `x`, plus the
/// `x`-independent part from gates touching no output line.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseProfile {
    pub m: usize,
    pub fixed_phase: PhaseValue,
    pub table: Vec<PhaseValue>,
}

/// Phase accumulator: exact mod-16 steps or radians.
trait Accum: Copy + Default + Send + Sync + 'static {
    fn add(self, other: Self) -> Self;
    fn unit(self) -> Complex64;
    fn from_phase(p: PhaseValue) -> Self;
    fn to_phase(self) -> PhaseValue;
}

impl Accum for u8 {
    #[inline]
    fn add(self, other: u8) -> u8 {
        (self + other) & 15
    }
    #[inline]
    fn unit(self) -> Complex64 {
        LATTICE_UNIT[self as usize]
    }
    fn from_phase(p: PhaseValue) -> u8 {
        p.steps().expect("lattice plan built from lattice gates")
    }
    fn to_phase(self) -> PhaseValue {
        PhaseValue::Lattice(self)
    }
}

impl Accum for f64 {
    #[inline]
    fn add(self, other: f64) -> f64 {
        self + other
    }
    #[inline]
    fn unit(self) -> Complex64 {
        Complex64::cis(self)
    }
    fn from_phase(p: PhaseValue) -> f64 {
        p.radians()
    }
    fn to_phase(self) -> PhaseValue {
        PhaseValue::Real(reduce_angle(self))
    }
}

struct Term<A> {
    table: Vec<A>,
    /// Table-index bits contributed by each assignment of the group's
    /// output bits.
    out_map: Vec<usize>,
    /// `(shift, relevant y index)`; the table index is the XOR of all
    /// shifted y bits with `out_map[s]`.
    y_bits: Vec<(usize, usize)>,
}

struct Group<A> {
    out_bits: Vec<usize>,
    terms: Vec<Term<A>>,
}

impl<A: Accum> Group<A> {
    fn add_into(&self, full: &mut [A], small: &mut Vec<A>, y: &[u8]) {
        small.clear();
        small.resize(1 << self.out_bits.len(), A::default());
        for term in &self.terms {
            let yp = term.y_bits.iter().fold(0usize, |acc, &(sh, r)| acc ^ ((y[r] as usize) << sh));
            for (s, slot) in small.iter_mut().enumerate() {
                *slot = slot.add(term.table[yp ^ term.out_map[s]]);
            }
        }
        if let [bit] = self.out_bits[..] {
            for (x, f) in full.iter_mut().enumerate() {
                *f = f.add(small[(x >> bit) & 1]);
            }
        } else {
            for (x, f) in full.iter_mut().enumerate() {
                *f = f.add(small[gather_bits(x as u64, &self.out_bits) as usize]);
            }
        }
    }
}

struct Plan<A> {
    m: usize,
    /// Number of y bits any output-touching gate reads.
    relevant: usize,
    /// Contribution of gates that read no y bit.
    base: Vec<A>,
    groups: Vec<Group<A>>,
    max_group_bits: usize,
}

struct Scratch<A> {
    full: Vec<A>,
    small: Vec<A>,
    amps: Vec<Complex64>,
    y: Vec<u8>,
}

impl<A: Accum> Plan<A> {
    /// `rel_of[j]` receives the relevant index of the `j`-th non-output line.
    fn build(c: &Circuit, rel_of: &mut [Option<usize>]) -> Self {
        let m = c.output.len();
        let mut out_pos = vec![None; c.n_lines];
        for (p, &l) in c.output.iter().enumerate() {
            out_pos[l] = Some(p);
        }
        let mut y_pos = vec![None; c.n_lines];
        for (j, l) in c.non_output_lines().into_iter().enumerate() {
            y_pos[l] = Some(j);
        }
        let mut relevant = 0;
        let mut groups: BTreeMap<Vec<usize>, Vec<Term<A>>> = BTreeMap::new();

        for g in &c.gates {
            let lines = g.lines();
            if lines.iter().all(|&l| out_pos[l].is_none()) {
                continue;
            }
            let parity = matches!(g, Gate::Parity { .. });
            let mut outs: Vec<(usize, usize)> = Vec::new();
            let mut y_bits = Vec::new();
            for (b, &l) in lines.iter().enumerate() {
                match out_pos[l] {
                    Some(p) => outs.push((p, b)),
                    None => {
                        let j = y_pos[l].expect("every line is output or non-output");
                        let r = *rel_of[j].get_or_insert_with(|| {
                            relevant += 1;
                            relevant - 1
                        });
                        y_bits.push((if parity { 0 } else { b }, r));
                    }
                }
            }
            outs.sort_unstable();
            let out_bits: Vec<usize> = outs.iter().map(|&(p, _)| p).collect();
            let out_map: Vec<usize> = (0..1usize << outs.len())
                .map(|s| {
                    if parity {
                        (s.count_ones() & 1) as usize
                    } else {
                        outs.iter().enumerate().fold(0, |acc, (t, &(_, b))| acc | ((s >> t) & 1) << b)
                    }
                })
                .collect();
            let table = match g {
                Gate::Parity { theta, .. } => vec![A::from_phase(*theta), A::from_phase(theta.neg())],
                other => {
                    let dense = other.to_dense().expect("IQP gates are diagonal");
                    let Gate::Dense { table, .. } = dense else { unreachable!() };
                    table.into_iter().map(A::from_phase).collect()
                }
            };
            groups.entry(out_bits).or_default().push(Term { table, out_map, y_bits });
        }
        let mut plan = Plan { m, relevant, base: vec![A::default(); 1 << m], groups: Vec::new(), max_group_bits: 0 };
        let mut fixed = Vec::new();
        for (out_bits, terms) in groups {
            let (stat, dynamic): (Vec<_>, Vec<_>) = terms.into_iter().partition(|t| t.y_bits.is_empty());
            if !stat.is_empty() {
                fixed.push(Group { out_bits: out_bits.clone(), terms: stat });
            }
            if !dynamic.is_empty() {
                plan.groups.push(Group { out_bits, terms: dynamic });
            }
        }
        plan.max_group_bits = plan.groups.iter().chain(&fixed).map(|g| g.out_bits.len()).max().unwrap_or(0);
        let mut small = Vec::new();
        for group in &fixed {
            group.add_into(&mut plan.base, &mut small, &[]);
        }
        plan
    }

    fn scratch(&self) -> Scratch<A> {
        Scratch {
            full: vec![A::default(); 1 << self.m],
            small: Vec::with_capacity(1 << self.max_group_bits),
            amps: vec![Complex64::new(0.0, 0.0); 1 << self.m],
            y: vec![0; self.relevant],
        }
    }

    /// Fills `scratch.full` with `f(·, y)` for the relevant bits in `scratch.y`.
    fn accumulate(&self, scratch: &mut Scratch<A>) {
        let Scratch { full, small, y, .. } = scratch;
        full.copy_from_slice(&self.base);
        for group in &self.groups {
            group.add_into(full, small, y);
        }
    }

    /// Leaves `|a[x]|²` (summing to one) in `out` for the current `scratch.y`.
    fn probabilities(&self, scratch: &mut Scratch<A>, out: &mut [f64]) {
        self.accumulate(scratch);
        for (a, f) in scratch.amps.iter_mut().zip(&scratch.full) {
            *a = f.unit();
        }
        walsh_hadamard(&mut scratch.amps);
        let scale = 1.0 / (1u64 << (2 * self.m)) as f64;
        for (p, a) in out.iter_mut().zip(&scratch.amps) {
            *p = a.norm_sqr() * scale;
        }
    }

    fn set_y_from_index(&self, scratch: &mut Scratch<A>, index: usize) {
        for (r, bit) in scratch.y.iter_mut().enumerate() {
            *bit = ((index >> r) & 1) as u8;
        }
    }

    fn exact_average(&self) -> Vec<f64> {
        let size = 1usize << self.m;
        (0..1usize << self.relevant)
            .into_par_iter()
            .fold(
                || (self.scratch(), vec![0.0; size], vec![0.0; size]),
                |(mut scratch, mut acc, mut probs), index| {
                    self.set_y_from_index(&mut scratch, index);
                    self.probabilities(&mut scratch, &mut probs);
                    for (a, p) in acc.iter_mut().zip(&probs) {
                        *a += p;
                    }
                    (scratch, acc, probs)
                },
            )
            .map(|(_, acc, _)| acc)
            .reduce(|| vec![0.0; size], |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            })
    }

    fn cdf(&self, scratch: &mut Scratch<A>, out: &mut [f64]) {
        self.probabilities(scratch, out);
        let mut run = 0.0;
        for p in out.iter_mut() {
            run += *p;
            *p = run;
        }
    }

    fn sample(&self, seed: u64, shots: u64) -> SampleBatch {
        let size = 1usize << self.m;
        let cacheable = self.relevant < usize::BITS as usize - 1
            && (1usize << self.relevant).saturating_mul(size) <= CDF_CACHE_ENTRIES
            && (1u64 << self.relevant) <= shots;
        if cacheable {
            let cdfs: Vec<Vec<f64>> = (0..1usize << self.relevant)
                .into_par_iter()
                .map_init(
                    || self.scratch(),
                    |scratch, index| {
                        self.set_y_from_index(scratch, index);
                        let mut cdf = vec![0.0; size];
                        self.cdf(scratch, &mut cdf);
                        cdf
                    },
                )
                .collect();
            let relevant = self.relevant;
            return chunked_tallies(seed, shots, self.m, || (), |_, rng| {
                let index = if relevant == 0 { 0 } else { (rng.random::<u64>() >> (64 - relevant)) as usize };
                inverse_cdf(&cdfs[index], rng.random::<f64>()) as u64
            });
        }
        chunked_tallies(
            seed,
            shots,
            self.m,
            || (self.scratch(), vec![0.0; size]),
            |(scratch, cdf), rng| {
                let mut word = 0u64;
                for (r, bit) in scratch.y.iter_mut().enumerate() {
                    if r % 64 == 0 {
                        word = rng.random();
                    }
                    *bit = ((word >> (r % 64)) & 1) as u8;
                }
                self.cdf(scratch, cdf);
                inverse_cdf(cdf, rng.random::<f64>()) as u64
            },
        )
    }
}

enum AnyPlan {
    Lattice(Plan<u8>),
    Real(Plan<f64>),
}

fn prepare(c: &Circuit, caps: &Caps) -> Result<(AnyPlan, Vec<Option<usize>>)> {
    c.expect_kind(&[CircuitKind::IqpZ, CircuitKind::IqpX])?;
    c.ensure_valid_with(caps)?;
    if c.output.len() > caps.sampler_outputs {
        return Err(Error::CapExceeded {
            resource: "sampler output",
            requested: c.output.len(),
            cap: caps.sampler_outputs,
        });
    }
    let mut rel_of = vec![None; c.n_lines - c.output.len()];
    let plan = if check_restricted_phases(c) {
        AnyPlan::Lattice(Plan::build(c, &mut rel_of))
    } else {
        AnyPlan::Real(Plan::build(c, &mut rel_of))
    };
    Ok((plan, rel_of))
}

pub fn phase_profile(c: &Circuit, y0: &[bool]) -> Result<PhaseProfile> {
    phase_profile_with(c, y0, &Caps::DEFAULT)
}

/// `f(x, y₀)` for every output label `x`. `y0[j]` is the bit on the `j`-th
/// non-output line in ascending line order. An `iqp-x` circuit is read
/// through its Z form, which has the same tables.
pub fn phase_profile_with(c: &Circuit, y0: &[bool], caps: &Caps) -> Result<PhaseProfile> {
    let n_y = c.n_lines.saturating_sub(c.output.len());
    if y0.len() != n_y {
        return Err(Error::ArityMismatch { expected: n_y, found: y0.len() });
    }
    let (plan, rel_of) = prepare(c, caps)?;
    let mut y_rel = Vec::new();
    for (j, r) in rel_of.iter().enumerate() {
        if let Some(r) = *r {
            if y_rel.len() <= r {
                y_rel.resize(r + 1, 0);
            }
            y_rel[r] = y0[j] as u8;
        }
    }
    let table = match plan {
        AnyPlan::Lattice(p) => profile_table(&p, &y_rel),
        AnyPlan::Real(p) => profile_table(&p, &y_rel),
    };

    let non_output = c.non_output_lines();
    let mut y_bit = vec![false; c.n_lines];
    for (j, &l) in non_output.iter().enumerate() {
        y_bit[l] = y0[j];
    }
    let is_output: Vec<bool> = {
        let mut v = vec![false; c.n_lines];
        c.output.iter().for_each(|&l| v[l] = true);
        v
    };
    let mut fixed_phase = PhaseValue::ZERO;
    for g in c.gates.iter().filter(|g| g.lines().iter().all(|&l| !is_output[l])) {
        let index = match g {
            Gate::Parity { lines, .. } => lines.iter().filter(|&&l| y_bit[l]).count() & 1,
            _ => g.lines().iter().enumerate().fold(0, |acc, (b, &l)| acc | (y_bit[l] as usize) << b),
        };
        fixed_phase = fixed_phase + g.phase_at(index)?;
    }
    Ok(PhaseProfile { m: c.output.len(), fixed_phase, table })
}

fn profile_table<A: Accum>(plan: &Plan<A>, y_rel: &[u8]) -> Vec<PhaseValue> {
    let mut scratch = plan.scratch();
    scratch.y.copy_from_slice(y_rel);
    plan.accumulate(&mut scratch);
    scratch.full.iter().map(|a| a.to_phase()).collect()
}

/// Output distribution for one fixed `y₀`:
/// `a[x'] = 2^{-M} Σ_x (-1)^{x·x'} e^{i table[x]}`, `p = |a|²`.
/// The fixed phase is global and drops out.
pub fn conditional_output_state(p: &PhaseProfile) -> Distribution {
    let mut amps: Vec<Complex64> = p.table.iter().map(PhaseValue::to_complex).collect();
    walsh_hadamard(&mut amps);
    let scale = 1.0 / (1u64 << (2 * p.m)) as f64;
    let probs: Vec<f64> = amps.iter().map(|a| a.norm_sqr() * scale).collect();
    Distribution::from_weights(p.m, &probs).expect("unit-norm transform has positive mass")
}

pub fn sample_fast(c: &Circuit, seed: u64, shots: u64) -> Result<SampleBatch> {
    sample_fast_with(c, seed, shots, &Caps::DEFAULT)
}

/// Samples the (unconditioned) output register of an IQP circuit: each shot
/// draws `y₀` uniformly, then `x'` from the conditional output state.
/// Post-selection lines are treated like any other non-output line.
pub fn sample_fast_with(c: &Circuit, seed: u64, shots: u64, caps: &Caps) -> Result<SampleBatch> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be positive".into()));
    }
    let (plan, _) = prepare(c, caps)?;
    Ok(match plan {
        AnyPlan::Lattice(p) => p.sample(seed, shots),
        AnyPlan::Real(p) => p.sample(seed, shots),
    })
}

pub fn exact_average(c: &Circuit) -> Result<Distribution> {
    exact_average_with(c, &Caps::DEFAULT)
}

/// `2^{-N} Σ_{y₀}` of the conditional output states: the exact output
/// marginal, by enumeration of the non-output register.
pub fn exact_average_with(c: &Circuit, caps: &Caps) -> Result<Distribution> {
    let n_y = c.n_lines.saturating_sub(c.output.len());
    if n_y > caps.enumeration_lines {
        return Err(Error::CapExceeded {
            resource: "enumerated non-output line",
            requested: n_y,
            cap: caps.enumeration_lines,
        });
    }
    let (plan, _) = prepare(c, caps)?;
    let (m, weights) = match plan {
        AnyPlan::Lattice(p) => (p.m, p.exact_average()),
        AnyPlan::Real(p) => (p.m, p.exact_average()),
    };
    Distribution::from_weights(m, &weights)
}
