//! Phase angles, exact on the π/8 lattice or approximate in radians.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};
use std::fmt;

use num_complex::Complex64;

/// Number of lattice points on the unit circle; one step is π/8.
pub const LATTICE_ORDER: u8 = 16;

/// `e^{iπt/8}` for `t = 0..16`, with the axis points written exactly.
pub(crate) static LATTICE_UNIT: [Complex64; 16] = {
    const C1: f64 = 0.923_879_532_511_286_7; // cos(π/8)
    const S1: f64 = 0.382_683_432_365_089_8; // sin(π/8)
    const H: f64 = FRAC_1_SQRT_2;
    const fn c(re: f64, im: f64) -> Complex64 {
        Complex64 { re, im }
    }
    [
        c(1.0, 0.0),
        c(C1, S1),
        c(H, H),
        c(S1, C1),
        c(0.0, 1.0),
        c(-S1, C1),
        c(-H, H),
        c(-C1, S1),
        c(-1.0, 0.0),
        c(-C1, -S1),
        c(-H, -H),
        c(-S1, -C1),
        c(0.0, -1.0),
        c(S1, -C1),
        c(H, -H),
        c(C1, -S1),
    ]
};

/// A diagonal phase entry. `Lattice(t)` is `e^{iπt/8}` with `t` kept in
/// `0..16`; `Real(θ)` is `e^{iθ}` for finite θ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PhaseValue {
    Lattice(u8),
    Real(f64),
}

impl PhaseValue {
    pub const ZERO: PhaseValue = PhaseValue::Lattice(0);

    pub fn lattice(t: i64) -> Self {
        PhaseValue::Lattice(t.rem_euclid(LATTICE_ORDER as i64) as u8)
    }

    /// Panics on a non-finite angle.
    pub fn real(theta: f64) -> Self {
        assert!(theta.is_finite(), "phase angle must be finite, got {theta}");
        PhaseValue::Real(theta)
    }

    pub fn is_lattice(&self) -> bool {
        matches!(self, PhaseValue::Lattice(_))
    }

    /// Lattice exponent `t` of `e^{iπt/8}`, if this is a lattice phase.
    pub fn steps(&self) -> Option<u8> {
        match *self {
            PhaseValue::Lattice(t) => Some(t),
            PhaseValue::Real(_) => None,
        }
    }

    pub fn radians(&self) -> f64 {
        match *self {
            PhaseValue::Lattice(t) => t as f64 * PI / 8.0,
            PhaseValue::Real(theta) => theta,
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        match *self {
            PhaseValue::Lattice(t) => LATTICE_UNIT[(t & 15) as usize],
            PhaseValue::Real(theta) => Complex64::cis(theta),
        }
    }

    pub fn neg(&self) -> Self {
        match *self {
            PhaseValue::Lattice(t) => PhaseValue::Lattice((LATTICE_ORDER - t) % LATTICE_ORDER),
            PhaseValue::Real(theta) => PhaseValue::Real(-theta),
        }
    }
}

impl Default for PhaseValue {
    fn default() -> Self {
        PhaseValue::ZERO
    }
}

/// Lattice sums stay on the lattice; anything involving a real angle becomes a
/// real angle reduced to `[0, 2π)`.
pub fn phase_add(a: PhaseValue, b: PhaseValue) -> PhaseValue {
    match (a, b) {
        (PhaseValue::Lattice(s), PhaseValue::Lattice(t)) => {
            PhaseValue::Lattice((s + t) % LATTICE_ORDER)
        }
        _ => PhaseValue::Real(reduce_angle(a.radians() + b.radians())),
    }
}

pub(crate) fn reduce_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

impl std::ops::Add for PhaseValue {
    type Output = PhaseValue;
    fn add(self, rhs: PhaseValue) -> PhaseValue {
        phase_add(self, rhs)
    }
}

impl std::ops::Neg for PhaseValue {
    type Output = PhaseValue;
    fn neg(self) -> PhaseValue {
        PhaseValue::neg(&self)
    }
}

impl fmt::Display for PhaseValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhaseValue::Lattice(t) => write!(f, "L{t}"),
            PhaseValue::Real(theta) => write!(f, "R{theta}"),
        }
    }
}
