//! Distribution metrics, the post-selected statistic and its sandwich bound,
//! bounded-error decisions, and statistical checks on sample tallies.

use std::collections::BTreeSet;
use std::fmt;

use statrs::distribution::{Binomial, ContinuousCDF, DiscreteCDF, Normal};

use crate::circuit::Circuit;
use crate::config::Caps;
use crate::distribution::{format_bits, Distribution, SampleBatch};
use crate::error::{Error, Result};
use crate::exact::conditional_distribution_with;

/// Comparison slack used by [`sandwich_check`].
pub const SANDWICH_TOLERANCE: f64 = 1e-12;

/// Per-outcome significance before correcting for the number of outcomes.
pub const BASE_SIGMA: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RatioBound {
    Finite(f64),
    Unbounded,
}

impl RatioBound {
    pub fn value(self) -> f64 {
        match self {
            RatioBound::Finite(c) => c,
            RatioBound::Unbounded => f64::INFINITY,
        }
    }

    pub fn max(self, other: RatioBound) -> RatioBound {
        match (self, other) {
            (RatioBound::Finite(a), RatioBound::Finite(b)) => RatioBound::Finite(a.max(b)),
            _ => RatioBound::Unbounded,
        }
    }
}

impl fmt::Display for RatioBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RatioBound::Finite(c) => write!(f, "{c}"),
            RatioBound::Unbounded => f.write_str("unbounded"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioResult {
    pub c_min: RatioBound,
    /// Outcome achieving the extreme ratio; `None` only for empty supports.
    pub witness: Option<u64>,
}

fn check_widths(p: &Distribution, r: &Distribution) -> Result<()> {
    if p.width() != r.width() {
        return Err(Error::WidthMismatch { left: p.width(), right: r.width() });
    }
    Ok(())
}

fn union_support(p: &Distribution, r: &Distribution) -> BTreeSet<u64> {
    p.iter().chain(r.iter()).map(|(k, _)| k).collect()
}

/// Smallest `c ≥ 1` with `p(x)/c ≤ r(x) ≤ c·p(x)` for all `x`.
pub fn multiplicative_ratio(p: &Distribution, r: &Distribution) -> Result<RatioResult> {
    check_widths(p, r)?;
    let mut best = RatioResult { c_min: RatioBound::Finite(1.0), witness: None };
    let mut worst = 0.0_f64;
    for x in union_support(p, r) {
        let (a, b) = (p.prob(x), r.prob(x));
        if a == 0.0 || b == 0.0 {
            return Ok(RatioResult { c_min: RatioBound::Unbounded, witness: Some(x) });
        }
        let ratio = (a / b).max(b / a);
        if best.witness.is_none() || ratio > worst {
            worst = ratio;
            best = RatioResult { c_min: RatioBound::Finite(ratio), witness: Some(x) };
        }
    }
    Ok(best)
}

/// Unhalved total variation `Σ_x |p(x) − r(x)|`, in `[0, 2]`.
pub fn tv_distance(p: &Distribution, r: &Distribution) -> Result<f64> {
    check_widths(p, r)?;
    Ok(union_support(p, r).into_iter().map(|x| (p.prob(x) - r.prob(x)).abs()).sum())
}

/// `S(x) = prob[O = x, P = 0…0] / prob[P = 0…0]` for a joint distribution
/// whose low `out_width` bits are `O` and whose remaining bits are `P`.
pub fn postselected_statistic(joint: &Distribution, out_width: usize) -> Result<Distribution> {
    joint.condition_high_zero(out_width)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SandwichReport {
    pub holds: bool,
    /// Outcome where `max(S/S̃, S̃/S) / c²` is largest, with that factor;
    /// above one means the bound is exceeded there.
    pub worst: Option<(u64, f64)>,
}

/// Checks `S(x)/c² ≤ S̃(x) ≤ c²·S(x)` for every outcome, with absolute slack
/// [`SANDWICH_TOLERANCE`] on each comparison.
pub fn sandwich_check(s: &Distribution, s_tilde: &Distribution, c: f64) -> Result<SandwichReport> {
    check_widths(s, s_tilde)?;
    if !(c >= 1.0) {
        return Err(Error::InvalidArgument(format!("sandwich constant must be at least 1, got {c}")));
    }
    let c2 = c * c;
    let mut holds = true;
    let mut worst: Option<(u64, f64)> = None;
    for x in union_support(s, s_tilde) {
        let (a, b) = (s.prob(x), s_tilde.prob(x));
        if a / c2 > b + SANDWICH_TOLERANCE || b > c2 * a + SANDWICH_TOLERANCE {
            holds = false;
        }
        let factor = if a == 0.0 || b == 0.0 { f64::INFINITY } else { (a / b).max(b / a) / c2 };
        if worst.is_none_or(|(_, w)| factor > w) {
            worst = Some((x, factor));
        }
    }
    Ok(SandwichReport { holds, worst })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Accept => "accept",
            Verdict::Reject => "reject",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecisionOutcome {
    pub verdict: Verdict,
    pub s1: f64,
    pub delta_used: f64,
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, 1/2), got {delta}")));
    }
    Ok(())
}

/// Accept when `s1 ≥ 1/2 + δ`, reject when `s1 ≤ 1/2 − δ`.
pub fn classify(s1: f64, delta: f64) -> Result<DecisionOutcome> {
    check_delta(delta)?;
    let verdict = if s1 >= 0.5 + delta {
        Verdict::Accept
    } else if s1 <= 0.5 - delta {
        Verdict::Reject
    } else {
        Verdict::Inconclusive
    };
    Ok(DecisionOutcome { verdict, s1, delta_used: delta })
}

pub fn decide(c: &Circuit, delta: f64) -> Result<DecisionOutcome> {
    decide_with(c, delta, &Caps::DEFAULT)
}

/// Classifies `S(1) = prob[O = 1 | P = 0…0]` for a single-line output.
pub fn decide_with(c: &Circuit, delta: f64, caps: &Caps) -> Result<DecisionOutcome> {
    check_delta(delta)?;
    if c.output.len() != 1 {
        return Err(Error::InvalidArgument(format!(
            "decision needs a single-line output register, found {} lines",
            c.output.len()
        )));
    }
    let s = conditional_distribution_with(c, caps)?;
    classify(s.prob(1), delta)
}

/// Smallest `s` with `2·exp(−2·s·precision²) ≤ γ`.
pub fn hoeffding_shots(precision: f64, gamma: f64) -> Result<u64> {
    if !(precision > 0.0 && precision < 1.0) || !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidArgument("precision and gamma must lie in (0, 1)".into()));
    }
    let bound = (2.0 / gamma).ln() / (2.0 * precision * precision);
    let mut s = bound.ceil().max(0.0) as u64;
    // guard the ceiling against rounding on either side
    while s > 0 && 2.0 * (-2.0 * (s - 1) as f64 * precision * precision).exp() <= gamma {
        s -= 1;
    }
    while 2.0 * (-2.0 * s as f64 * precision * precision).exp() > gamma {
        s += 1;
    }
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckVerdict {
    Pass,
    Fail,
    InsufficientData,
}

impl fmt::Display for CheckVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckVerdict::Pass => "pass",
            CheckVerdict::Fail => "fail",
            CheckVerdict::InsufficientData => "insufficient data",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeScore {
    pub outcome: u64,
    pub count: u64,
    pub expected: f64,
    pub z: f64,
    /// Two-sided exact binomial tail probability.
    pub p_value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalReport {
    pub verdict: CheckVerdict,
    pub shots: u64,
    pub tv: f64,
    /// Number of outcomes tested (union of observed and true supports).
    pub outcomes: usize,
    /// Per-outcome two-sided significance after the Bonferroni correction.
    pub alpha: f64,
    /// `|z|` equivalent of `alpha`.
    pub z_threshold: f64,
    pub scores: Vec<OutcomeScore>,
}

impl EmpiricalReport {
    pub fn worst(&self) -> Option<&OutcomeScore> {
        self.scores.iter().min_by(|a, b| a.p_value.total_cmp(&b.p_value))
    }

    pub fn report_lines(&self, width: usize) -> Vec<ReportLine> {
        let mut lines = vec![ReportLine::new("shots", self.shots as f64, None, None)];
        if self.verdict == CheckVerdict::InsufficientData {
            lines.push(ReportLine::new("check", 0.0, None, Some(self.verdict.to_string())));
            return lines;
        }
        lines.push(ReportLine::new("tv", self.tv, None, None));
        if let Some(w) = self.worst() {
            lines.push(ReportLine::new(
                &format!("max_abs_z[{}]", format_bits(w.outcome, width)),
                w.z.abs(),
                Some(self.z_threshold),
                None,
            ));
            lines.push(ReportLine::new("min_p_value", w.p_value, Some(self.alpha), Some(self.verdict.to_string())));
        }
        lines
    }
}

/// Two-sided tail at `BASE_SIGMA` standard deviations.
fn base_alpha() -> f64 {
    let n = Normal::standard();
    2.0 * n.cdf(-BASE_SIGMA)
}

/// Tests tallies against `truth`, outcome by outcome, at `BASE_SIGMA` with
/// a Bonferroni correction over the outcomes tested. Each outcome's count is
/// compared with its exact binomial law, so rare outcomes are judged
/// correctly; `z` is reported alongside for reading.
pub fn empirical_check(batch: &SampleBatch, truth: &Distribution) -> Result<EmpiricalReport> {
    if batch.width != truth.width() {
        return Err(Error::WidthMismatch { left: batch.width, right: truth.width() });
    }
    let outcomes: BTreeSet<u64> = batch.tallies.keys().copied().chain(truth.iter().map(|(k, _)| k)).collect();
    let k = outcomes.len().max(1);
    let alpha = base_alpha() / k as f64;
    let z_threshold = -Normal::standard().inverse_cdf(alpha / 2.0);
    let Some(empirical) = batch.empirical() else {
        return Ok(EmpiricalReport {
            verdict: CheckVerdict::InsufficientData,
            shots: 0,
            tv: 0.0,
            outcomes: outcomes.len(),
            alpha,
            z_threshold,
            scores: Vec::new(),
        });
    };
    let tv = tv_distance(&empirical, truth)?;
    let n = batch.shots;
    let mut scores = Vec::with_capacity(outcomes.len());
    let mut pass = true;
    for x in outcomes {
        let p = truth.prob(x).clamp(0.0, 1.0);
        let count = batch.count(x);
        let expected = n as f64 * p;
        let sd = (expected * (1.0 - p)).sqrt();
        let diff = count as f64 - expected;
        let z = if sd > 0.0 {
            diff / sd
        } else if diff == 0.0 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        };
        let p_value = binomial_two_sided(n, p, count);
        if p_value < alpha {
            pass = false;
        }
        scores.push(OutcomeScore { outcome: x, count, expected, z, p_value });
    }
    Ok(EmpiricalReport {
        verdict: if pass { CheckVerdict::Pass } else { CheckVerdict::Fail },
        shots: n,
        tv,
        outcomes: scores.len(),
        alpha,
        z_threshold,
        scores,
    })
}

fn binomial_two_sided(n: u64, p: f64, k: u64) -> f64 {
    if p <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    let b = Binomial::new(p, n).expect("valid binomial parameters");
    let lower = b.cdf(k);
    let upper = if k == 0 { 1.0 } else { b.sf(k - 1) };
    (2.0 * lower.min(upper)).min(1.0)
}

/// One row of a textual check report.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportLine {
    pub metric: String,
    pub value: f64,
    pub threshold: Option<f64>,
    pub verdict: Option<String>,
}

impl ReportLine {
    pub fn new(metric: &str, value: f64, threshold: Option<f64>, verdict: Option<String>) -> Self {
        ReportLine { metric: metric.to_string(), value, threshold, verdict }
    }
}

impl fmt::Display for ReportLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.metric, self.value)?;
        if let Some(t) = self.threshold {
            write!(f, " threshold {t}")?;
        }
        if let Some(v) = &self.verdict {
            write!(f, " {v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::CircuitKind;
    use crate::gate::Gate;
    use std::collections::BTreeMap;

    fn d(width: usize, pairs: &[(u64, f64)]) -> Distribution {
        Distribution::new(width, pairs.iter().copied()).unwrap()
    }

    #[test]
    fn ratio_examples() {
        let p = d(1, &[(0, 0.5), (1, 0.5)]);
        assert_eq!(multiplicative_ratio(&p, &p).unwrap().c_min, RatioBound::Finite(1.0));
        let r = d(1, &[(0, 0.25), (1, 0.75)]);
        let res = multiplicative_ratio(&p, &r).unwrap();
        assert_eq!(res.c_min, RatioBound::Finite(2.0));
        assert_eq!(res.witness, Some(0));
        let q = d(1, &[(0, 1.0)]);
        let s = d(1, &[(0, 0.9), (1, 0.1)]);
        assert_eq!(multiplicative_ratio(&q, &s).unwrap().c_min, RatioBound::Unbounded);
        assert!(matches!(multiplicative_ratio(&q, &Distribution::point(2, 0)), Err(Error::WidthMismatch { .. })));
    }

    #[test]
    fn tv_examples() {
        let p = d(1, &[(0, 0.5), (1, 0.5)]);
        let r = d(1, &[(0, 0.25), (1, 0.75)]);
        assert_eq!(tv_distance(&p, &p).unwrap(), 0.0);
        assert!((tv_distance(&p, &r).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(tv_distance(&Distribution::point(2, 0), &Distribution::point(2, 3)).unwrap(), 2.0);
    }

    #[test]
    fn statistic_examples() {
        let joint = d(2, &[(0b00, 0.1), (0b10, 0.3), (0b01, 0.3), (0b11, 0.3)]);
        let s = postselected_statistic(&joint, 1).unwrap();
        assert!((s.prob(0) - 0.25).abs() < 1e-12);
        assert!((s.prob(1) - 0.75).abs() < 1e-12);
        let plain = d(2, &[(1, 0.4), (2, 0.6)]);
        assert_eq!(postselected_statistic(&plain, 2).unwrap(), plain);
        let dead = d(2, &[(0b10, 0.5), (0b11, 0.5)]);
        assert!(matches!(postselected_statistic(&dead, 1), Err(Error::ZeroPostselectionMass { .. })));
    }

    #[test]
    fn sandwich_examples() {
        let s = d(1, &[(0, 0.2), (1, 0.8)]);
        assert!(sandwich_check(&s, &s, 1.0).unwrap().holds);
        let t = d(1, &[(0, 0.9), (1, 0.1)]);
        let rep = sandwich_check(&s, &t, 1.2).unwrap();
        assert!(!rep.holds);
        assert_eq!(rep.worst.unwrap().0, 1);
        assert!(sandwich_check(&s, &Distribution::point(2, 0), 1.0).is_err());
    }

    #[test]
    fn decide_examples() {
        // X-basis phase π on the output: |1⟩ with certainty
        let yes = Circuit::new(CircuitKind::IqpZ, 1, vec![0]).with_gates([Gate::dense_lattice(vec![0], &[0, 8])]);
        let out = decide(&yes, 0.4).unwrap();
        assert_eq!(out.verdict, Verdict::Accept);
        assert!((out.s1 - 1.0).abs() < 1e-12);
        assert_eq!(classify(0.5, 0.01).unwrap().verdict, Verdict::Inconclusive);
        assert_eq!(classify(0.05, 0.4).unwrap().verdict, Verdict::Reject);
        assert!(decide(&yes, 0.5).is_err());
        let two = Circuit::new(CircuitKind::IqpZ, 2, vec![0, 1]);
        assert!(matches!(decide(&two, 0.1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn hoeffding_examples() {
        assert_eq!(hoeffding_shots(0.1, 0.05).unwrap(), 185);
        assert_eq!(hoeffding_shots(0.5, 0.5).unwrap(), 3);
        let a = hoeffding_shots(0.02, 0.01).unwrap() as f64;
        let b = hoeffding_shots(0.01, 0.01).unwrap() as f64;
        assert!((b / a - 4.0).abs() < 0.01);
        assert!(hoeffding_shots(0.0, 0.5).is_err());
    }

    #[test]
    fn empirical_examples() {
        let truth = d(2, &[(0, 0.25), (1, 0.25), (2, 0.25), (3, 0.25)]);
        let close = SampleBatch::new(0, 2, BTreeMap::from([(0, 25_100), (1, 24_950), (2, 25_000), (3, 24_950)]));
        assert_eq!(empirical_check(&close, &truth).unwrap().verdict, CheckVerdict::Pass);
        // TV 0.3 from truth
        let shifted = SampleBatch::new(0, 2, BTreeMap::from([(0, 40_000), (1, 25_000), (2, 25_000), (3, 10_000)]));
        let rep = empirical_check(&shifted, &truth).unwrap();
        assert_eq!(rep.verdict, CheckVerdict::Fail);
        assert!(rep.worst().unwrap().z.abs() > 50.0);
        let empty = SampleBatch::new(0, 2, BTreeMap::new());
        assert_eq!(empirical_check(&empty, &truth).unwrap().verdict, CheckVerdict::InsufficientData);
        let impossible = SampleBatch::new(0, 2, BTreeMap::from([(0, 1)]));
        assert_eq!(empirical_check(&impossible, &Distribution::point(2, 1)).unwrap().verdict, CheckVerdict::Fail);
        assert!(empirical_check(&empty, &Distribution::point(3, 0)).is_err());
    }

    #[test]
    fn rare_outcomes_are_not_false_alarms() {
        let truth = d(1, &[(0, 1.0 - 1e-6), (1, 1e-6)]);
        let batch = SampleBatch::new(0, 1, BTreeMap::from([(0, 99_998), (1, 2)]));
        assert_eq!(empirical_check(&batch, &truth).unwrap().verdict, CheckVerdict::Pass);
    }

    #[test]
    fn bonferroni_threshold_grows_with_outcomes() {
        let a = empirical_check(&SampleBatch::new(0, 1, BTreeMap::from([(0, 10)])), &Distribution::uniform(1)).unwrap();
        let b = empirical_check(&SampleBatch::new(0, 6, BTreeMap::from([(0, 10)])), &Distribution::uniform(6)).unwrap();
        assert!(a.z_threshold > 5.0 && b.z_threshold > a.z_threshold);
    }
}
