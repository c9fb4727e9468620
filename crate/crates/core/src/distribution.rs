//! Probability distributions and sample tallies over fixed-width bit strings.
//!
//! Outcome keys are little-endian: bit `i` of the key is position `i` of the
//! register. In text, position 0 is printed leftmost.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, ParseError, Result};

/// Accepted drift of a probability vector's total before renormalizing.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Below this, `prob[P = 0…0]` is treated as exactly zero.
pub const ZERO_MASS_THRESHOLD: f64 = 1e-14;

const MAX_WIDTH: usize = 64;

/// A normalized distribution over `width`-bit outcomes. Only outcomes with
/// nonzero probability are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    width: usize,
    probs: BTreeMap<u64, f64>,
}

impl Distribution {
    /// Builds a distribution from explicit probabilities. They must lie in
    /// `[0, 1]` and sum to one within [`SUM_TOLERANCE`]; the stored values are
    /// rescaled to sum to one.
    pub fn new(width: usize, probs: impl IntoIterator<Item = (u64, f64)>) -> Result<Self> {
        check_width(width)?;
        let mut map = BTreeMap::new();
        for (k, p) in probs {
            if width < 64 && k >> width != 0 {
                return Err(Error::InvalidDistribution(format!("outcome {k} does not fit in {width} bits")));
            }
            if !(0.0..=1.0 + SUM_TOLERANCE).contains(&p) {
                return Err(Error::InvalidDistribution(format!("probability {p} out of range")));
            }
            *map.entry(k).or_insert(0.0) += p;
        }
        let total: f64 = map.values().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
        }
        Ok(Self::rescaled(width, map, total))
    }

    /// Normalizes nonnegative weights indexed by outcome.
    pub fn from_weights(width: usize, weights: &[f64]) -> Result<Self> {
        check_width(width)?;
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || weights.iter().any(|w| *w < 0.0) {
            return Err(Error::InvalidDistribution("weights must be nonnegative with positive total".into()));
        }
        let map = weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(k, w)| (k as u64, *w))
            .collect();
        Ok(Self::rescaled(width, map, total))
    }

    fn rescaled(width: usize, mut map: BTreeMap<u64, f64>, total: f64) -> Self {
        map.retain(|_, p| *p > 0.0);
        for p in map.values_mut() {
            *p /= total;
        }
        Distribution { width, probs: map }
    }

    pub fn point(width: usize, outcome: u64) -> Self {
        Distribution { width, probs: BTreeMap::from([(outcome, 1.0)]) }
    }

    pub fn uniform(width: usize) -> Self {
        let n = 1u64 << width;
        Distribution { width, probs: (0..n).map(|k| (k, 1.0 / n as f64)).collect() }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn prob(&self, outcome: u64) -> f64 {
        self.probs.get(&outcome).copied().unwrap_or(0.0)
    }

    /// Nonzero entries in ascending outcome order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.probs.iter().map(|(&k, &p)| (k, p))
    }

    pub fn support_len(&self) -> usize {
        self.probs.len()
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    /// Dense vector of length `2^width`.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut v = vec![0.0; 1usize << self.width];
        for (&k, &p) in &self.probs {
            v[k as usize] = p;
        }
        v
    }

    /// Distribution of the bits at `positions`; output bit `j` is input bit
    /// `positions[j]`.
    pub fn marginal(&self, positions: &[usize]) -> Result<Distribution> {
        if let Some(&bad) = positions.iter().find(|&&p| p >= self.width) {
            return Err(Error::InvalidArgument(format!("position {bad} out of range for width {}", self.width)));
        }
        let mut map = BTreeMap::new();
        for (&k, &p) in &self.probs {
            *map.entry(gather_bits(k, positions)).or_insert(0.0) += p;
        }
        let total = map.values().sum();
        Ok(Self::rescaled(positions.len(), map, total))
    }

    /// Splits outcomes into a low `out_width` part `x` and a high part `z`
    /// and returns `prob[x | z = 0…0]`.
    pub fn condition_high_zero(&self, out_width: usize) -> Result<Distribution> {
        if out_width > self.width {
            return Err(Error::WidthMismatch { left: out_width, right: self.width });
        }
        let low_mask = if out_width == 64 { u64::MAX } else { (1u64 << out_width) - 1 };
        let kept: BTreeMap<u64, f64> =
            self.probs.iter().filter(|(&k, _)| k & !low_mask == 0).map(|(&k, &p)| (k, p)).collect();
        let mass: f64 = kept.values().sum();
        if mass <= ZERO_MASS_THRESHOLD {
            return Err(Error::ZeroPostselectionMass { mass });
        }
        Ok(Self::rescaled(out_width, kept, mass))
    }

    /// Text document: a `distribution` header, the width, then one
    /// `<bits> <probability>` line per nonzero outcome.
    pub fn to_text(&self) -> String {
        let mut s = format!("distribution\nwidth {}\n", self.width);
        for (&k, &p) in &self.probs {
            let _ = writeln!(s, "{} {:?}", format_bits(k, self.width), p);
        }
        s
    }

    pub fn from_text(text: &str) -> std::result::Result<Self, ParseError> {
        let doc = Document::parse(text, "distribution")?;
        let entries = doc
            .entries
            .iter()
            .map(|(line, k, v)| {
                v.parse::<f64>()
                    .map(|p| (*k, p))
                    .map_err(|_| ParseError::new(*line, format!("bad probability `{v}`")))
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Distribution::new(doc.width, entries).map_err(|e| ParseError::new(0, e.to_string()))
    }
}

fn check_width(width: usize) -> Result<()> {
    if width > MAX_WIDTH {
        return Err(Error::InvalidDistribution(format!("width {width} exceeds {MAX_WIDTH}")));
    }
    Ok(())
}

pub(crate) fn gather_bits(key: u64, positions: &[usize]) -> u64 {
    positions.iter().enumerate().fold(0, |acc, (j, &p)| acc | ((key >> p) & 1) << j)
}

/// Bit string with position 0 leftmost; `-` for an empty register.
pub fn format_bits(key: u64, width: usize) -> String {
    if width == 0 {
        return "-".into();
    }
    (0..width).map(|i| if key >> i & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn parse_bits(s: &str) -> Option<(u64, usize)> {
    if s == "-" {
        return Some((0, 0));
    }
    if s.len() > MAX_WIDTH {
        return None;
    }
    s.chars().enumerate().try_fold((0u64, s.len()), |(acc, w), (i, c)| match c {
        '0' => Some((acc, w)),
        '1' => Some((acc | 1 << i, w)),
        _ => None,
    })
}

/// Outcome tallies from a sampler run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleBatch {
    pub seed: u64,
    pub shots: u64,
    pub width: usize,
    pub tallies: BTreeMap<u64, u64>,
}

impl SampleBatch {
    pub fn new(seed: u64, width: usize, tallies: BTreeMap<u64, u64>) -> Self {
        let shots = tallies.values().sum();
        SampleBatch { seed, shots, width, tallies }
    }

    pub fn count(&self, outcome: u64) -> u64 {
        self.tallies.get(&outcome).copied().unwrap_or(0)
    }

    /// Relative frequencies; `None` when there are no shots.
    pub fn empirical(&self) -> Option<Distribution> {
        if self.shots == 0 {
            return None;
        }
        let n = self.shots as f64;
        Distribution::new(self.width, self.tallies.iter().map(|(&k, &c)| (k, c as f64 / n))).ok()
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("samples\nseed {}\nshots {}\nwidth {}\n", self.seed, self.shots, self.width);
        for (&k, &c) in &self.tallies {
            if c > 0 {
                let _ = writeln!(s, "{} {}", format_bits(k, self.width), c);
            }
        }
        s
    }

    pub fn from_text(text: &str) -> std::result::Result<Self, ParseError> {
        let doc = Document::parse(text, "samples")?;
        let mut tallies = BTreeMap::new();
        for (line, k, v) in &doc.entries {
            let c: u64 = v.parse().map_err(|_| ParseError::new(*line, format!("bad count `{v}`")))?;
            *tallies.entry(*k).or_insert(0) += c;
        }
        let batch = SampleBatch::new(doc.seed.unwrap_or(0), doc.width, tallies);
        if let Some(shots) = doc.shots {
            if shots != batch.shots {
                return Err(ParseError::new(0, format!("shots {shots} but tallies sum to {}", batch.shots)));
            }
        }
        Ok(batch)
    }
}

struct Document {
    width: usize,
    seed: Option<u64>,
    shots: Option<u64>,
    entries: Vec<(usize, u64, String)>,
}

impl Document {
    fn parse(text: &str, header: &str) -> std::result::Result<Self, ParseError> {
        let mut seen_header = false;
        let mut width = None;
        let mut seed = None;
        let mut shots = None;
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let toks: Vec<&str> = content.split_whitespace().collect();
            let err = |m: String| ParseError::new(line, m);
            let num = |t: &str| t.parse::<u64>().map_err(|_| err(format!("bad number `{t}`")));
            match toks.as_slice() {
                [h] if !seen_header => {
                    if *h != header {
                        return Err(err(format!("expected `{header}` document, found `{h}`")));
                    }
                    seen_header = true;
                }
                _ if !seen_header => return Err(err(format!("missing `{header}` header"))),
                ["width", w] => width = Some(num(w)? as usize),
                ["seed", s] => seed = Some(num(s)?),
                ["shots", s] => shots = Some(num(s)?),
                [bits, value] => {
                    let w = width.ok_or_else(|| err("`width` must precede entries".into()))?;
                    let (k, kw) = parse_bits(bits).ok_or_else(|| err(format!("bad bit string `{bits}`")))?;
                    if kw != w {
                        return Err(err(format!("bit string `{bits}` has width {kw}, expected {w}")));
                    }
                    entries.push((line, k, value.to_string()));
                }
                _ => return Err(err(format!("unrecognized line `{content}`"))),
            }
        }
        let width = width.ok_or_else(|| ParseError::new(0, "missing `width`"))?;
        if width > MAX_WIDTH {
            return Err(ParseError::new(0, format!("width {width} exceeds {MAX_WIDTH}")));
        }
        Ok(Document { width, seed, shots, entries })
    }
}
