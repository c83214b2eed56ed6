//! Slit families `(k_n, b_n)`: loading, truncation and the interval structure
//! of the real line cut at the slit positions.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const DEFAULT_TRUNCATION: usize = 64;

/// Terms of a power lattice summed when checking a user tail bound.
const TAIL_CHECK_TERMS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slit {
    pub k: f64,
    pub b: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sides {
    Both,
    Positive,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightLaw {
    /// `b_n = b0 * ratio^|n|`
    Geometric { b0: f64, ratio: f64 },
    /// `b_n = b0 * |n|^-exponent`
    Power { b0: f64, exponent: f64 },
}

/// User-certified bound on the weight tail `sum_{|n| > N} b_n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TailBound {
    Power { c: f64, power: f64 },
    Geometric { c: f64, ratio: f64 },
}

impl TailBound {
    pub fn eval(&self, n: usize) -> f64 {
        match *self {
            TailBound::Power { c, power } => c * (n.max(1) as f64).powf(-power),
            TailBound::Geometric { c, ratio } => c * ratio.powi(n as i32),
        }
    }
}

/// Lattice family `k_n = offset + spacing * n` for `n` in `Z \ {0}` (or `n >= 1`).
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    pub spacing: f64,
    pub offset: f64,
    pub sides: Sides,
    pub law: WeightLaw,
    pub truncation: usize,
    pub tail: Option<TailBound>,
}

impl Lattice {
    fn weight(&self, n: i64) -> f64 {
        let m = n.unsigned_abs() as f64;
        match self.law {
            WeightLaw::Geometric { b0, ratio } => b0 * ratio.powf(m),
            WeightLaw::Power { b0, exponent } => b0 * m.powf(-exponent),
        }
    }

    fn side_count(&self) -> f64 {
        match self.sides {
            Sides::Both => 2.0,
            Sides::Positive => 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Repr {
    Finite(Vec<Slit>),
    Lattice(Lattice),
}

/// A validated slit family.
#[derive(Clone, Debug, PartialEq)]
pub struct SlitFamily {
    repr: Repr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntervalKind {
    LeftUnbounded,
    Bounded,
    RightUnbounded,
}

/// A component of `R \ {k_n}`. Unbounded ends are stored as infinities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub kind: IntervalKind,
    /// Index of the pole at each finite end, in the materialized order.
    pub lo_pole: Option<usize>,
    pub hi_pole: Option<usize>,
    /// Set when the interval only exists because the family was truncated.
    pub artifact: bool,
}

impl Interval {
    pub fn is_bounded(&self) -> bool {
        self.kind == IntervalKind::Bounded
    }
}

/// Intervals in left-to-right order: `I_-`, the bounded ones, `I_+`.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalStructure {
    pub intervals: Vec<Interval>,
}

impl IntervalStructure {
    pub fn bounded(&self) -> impl Iterator<Item = (usize, &Interval)> {
        self.intervals.iter().enumerate().filter(|(_, iv)| iv.is_bounded())
    }

    pub fn bounded_count(&self) -> usize {
        self.bounded().count()
    }
}

#[derive(Serialize, Deserialize)]
struct Document {
    slits: RawSlits,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum RawSlits {
    Finite {
        entries: Vec<Slit>,
    },
    Parametric {
        rule: String,
        params: RawParams,
        #[serde(rename = "N", default = "default_truncation")]
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tail_bound: Option<TailBound>,
    },
}

fn default_truncation() -> usize {
    DEFAULT_TRUNCATION
}

#[derive(Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    spacing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    offset: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sides: Option<Sides>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exponent: Option<f64>,
}

fn require(v: Option<f64>, name: &str) -> Result<f64> {
    match v {
        Some(x) if x.is_finite() => Ok(x),
        Some(x) => Err(Error::InvalidParameter(format!("{name} = {x} is not finite"))),
        None => Err(Error::InvalidParameter(format!("missing parameter `{name}`"))),
    }
}

impl SlitFamily {
    /// Finite family from `(k, b)` pairs in any order.
    pub fn finite(pairs: &[(f64, f64)]) -> Result<Self> {
        let entries: Vec<Slit> = pairs.iter().map(|&(k, b)| Slit { k, b }).collect();
        Self::from_entries(entries)
    }

    fn from_entries(mut entries: Vec<Slit>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidParameter("slit family is empty".into()));
        }
        for s in &entries {
            if !s.k.is_finite() {
                return Err(Error::InvalidParameter(format!("slit position {} is not finite", s.k)));
            }
            if !(s.b > 0.0) || !s.b.is_finite() {
                return Err(Error::NonPositiveWeight { k: s.k, b: s.b });
            }
        }
        entries.sort_by(|a, b| a.k.total_cmp(&b.k));
        for w in entries.windows(2) {
            if w[0].k == w[1].k {
                return Err(Error::DuplicateK(w[0].k));
            }
        }
        Ok(Self { repr: Repr::Finite(entries) })
    }

    /// Two-sided geometric lattice `k_n = spacing * n`, `b_n = b0 * ratio^|n|`.
    pub fn geometric_lattice(spacing: f64, b0: f64, ratio: f64, truncation: usize) -> Result<Self> {
        Self::lattice(Lattice {
            spacing,
            offset: 0.0,
            sides: Sides::Both,
            law: WeightLaw::Geometric { b0, ratio },
            truncation,
            tail: None,
        })
    }

    pub fn lattice(lat: Lattice) -> Result<Self> {
        if lat.spacing == 0.0 {
            return Err(Error::ZeroGap);
        }
        if !(lat.spacing > 0.0) || !lat.spacing.is_finite() || !lat.offset.is_finite() {
            return Err(Error::InvalidParameter(format!("spacing = {} must be positive", lat.spacing)));
        }
        if lat.truncation == 0 {
            return Err(Error::InvalidParameter("truncation N must be at least 1".into()));
        }
        match lat.law {
            WeightLaw::Geometric { b0, ratio } => {
                if !(b0 > 0.0) || !b0.is_finite() {
                    return Err(Error::NonPositiveWeight { k: lat.offset + lat.spacing, b: b0 });
                }
                if !(ratio > 0.0 && ratio < 1.0) {
                    return Err(Error::InvalidParameter(format!("ratio = {ratio} must lie in (0, 1)")));
                }
            }
            WeightLaw::Power { b0, exponent } => {
                if !(b0 > 0.0) || !b0.is_finite() {
                    return Err(Error::NonPositiveWeight { k: lat.offset + lat.spacing, b: b0 });
                }
                if !(exponent > 1.0) || !exponent.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "exponent = {exponent} must exceed 1 for a summable family"
                    )));
                }
                let bound = lat.tail.ok_or_else(|| Error::MissingTailBound("power_lattice".into()))?;
                check_tail_bound(&lat, &bound)?;
            }
        }
        Ok(Self { repr: Repr::Lattice(lat) })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Document = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        match doc.slits {
            RawSlits::Finite { entries } => Self::from_entries(entries),
            RawSlits::Parametric { rule, params, n, tail_bound } => {
                let spacing = require(params.spacing, "spacing")?;
                let offset = params.offset.unwrap_or(0.0);
                let sides = params.sides.unwrap_or(Sides::Both);
                let b0 = require(params.b0, "b0")?;
                let law = match rule.as_str() {
                    "geometric_lattice" => WeightLaw::Geometric { b0, ratio: require(params.ratio, "ratio")? },
                    "power_lattice" => WeightLaw::Power { b0, exponent: require(params.exponent, "exponent")? },
                    other => return Err(Error::UnknownRule(other.to_string())),
                };
                Self::lattice(Lattice { spacing, offset, sides, law, truncation: n, tail: tail_bound })
            }
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let slits = match &self.repr {
            Repr::Finite(entries) => RawSlits::Finite { entries: entries.clone() },
            Repr::Lattice(lat) => {
                let mut params = RawParams {
                    spacing: Some(lat.spacing),
                    offset: Some(lat.offset),
                    sides: Some(lat.sides),
                    ..RawParams::default()
                };
                let rule = match lat.law {
                    WeightLaw::Geometric { b0, ratio } => {
                        params.b0 = Some(b0);
                        params.ratio = Some(ratio);
                        "geometric_lattice"
                    }
                    WeightLaw::Power { b0, exponent } => {
                        params.b0 = Some(b0);
                        params.exponent = Some(exponent);
                        "power_lattice"
                    }
                };
                RawSlits::Parametric { rule: rule.into(), params, n: lat.truncation, tail_bound: lat.tail }
            }
        };
        serde_json::to_string_pretty(&Document { slits }).expect("family serializes")
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.repr, Repr::Finite(_))
    }

    pub fn lattice_params(&self) -> Option<&Lattice> {
        match &self.repr {
            Repr::Lattice(l) => Some(l),
            Repr::Finite(_) => None,
        }
    }

    /// Truncation stored with the family (the entry count for finite families).
    pub fn default_truncation(&self) -> usize {
        match &self.repr {
            Repr::Finite(e) => e.len(),
            Repr::Lattice(l) => l.truncation,
        }
    }

    /// Entries with `|n| <= n_trunc`, sorted by `k`. Finite families ignore `n_trunc`.
    pub fn materialize(&self, n_trunc: usize) -> Vec<Slit> {
        match &self.repr {
            Repr::Finite(e) => e.clone(),
            Repr::Lattice(lat) => {
                let n = n_trunc as i64;
                let lo = if lat.sides == Sides::Both { -n } else { 1 };
                (lo..=n)
                    .filter(|&m| m != 0)
                    .map(|m| Slit { k: lat.offset + lat.spacing * m as f64, b: lat.weight(m) })
                    .collect()
            }
        }
    }

    /// Upper bound on `sum_{|n| > n_trunc} b_n`.
    pub fn tail_weight(&self, n_trunc: usize) -> f64 {
        match &self.repr {
            Repr::Finite(_) => 0.0,
            Repr::Lattice(lat) => match (lat.law, lat.tail) {
                (WeightLaw::Geometric { b0, ratio }, _) => {
                    lat.side_count() * b0 * ratio.powi(n_trunc as i32 + 1) / (1.0 - ratio)
                }
                (WeightLaw::Power { .. }, Some(t)) => lat.side_count() * t.eval(n_trunc),
                (WeightLaw::Power { .. }, None) => f64::INFINITY,
            },
        }
    }

    /// Distance from `z` to the nearest slit position left out by the truncation.
    pub fn tail_distance(&self, z: num_complex::Complex64, n_trunc: usize) -> f64 {
        match &self.repr {
            Repr::Finite(_) => f64::INFINITY,
            Repr::Lattice(lat) => {
                let first = (n_trunc + 1) as f64;
                let nearest = |x: f64| -> f64 {
                    let m = ((x - lat.offset) / lat.spacing).round().max(first);
                    let k = lat.offset + lat.spacing * m;
                    (z - k).norm()
                };
                let pos = nearest(z.re);
                if lat.sides == Sides::Both {
                    let m = ((lat.offset - z.re) / lat.spacing).round().max(first);
                    let k = lat.offset - lat.spacing * m;
                    pos.min((z - k).norm())
                } else {
                    pos
                }
            }
        }
    }

    /// The gap `d = inf |k_n - k_m|`, infinite for a single slit.
    pub fn gap(&self) -> f64 {
        match &self.repr {
            Repr::Finite(e) => e.windows(2).map(|w| w[1].k - w[0].k).fold(f64::INFINITY, f64::min),
            Repr::Lattice(lat) => lat.spacing,
        }
    }

    pub fn intervals(&self, n_trunc: usize) -> IntervalStructure {
        let ks: Vec<f64> = self.materialize(n_trunc).iter().map(|s| s.k).collect();
        let (left_artifact, right_artifact) = match &self.repr {
            Repr::Finite(_) => (false, false),
            Repr::Lattice(l) => (l.sides == Sides::Both, true),
        };
        let last = ks.len() - 1;
        let mut intervals = vec![Interval {
            lo: f64::NEG_INFINITY,
            hi: ks[0],
            kind: IntervalKind::LeftUnbounded,
            lo_pole: None,
            hi_pole: Some(0),
            artifact: left_artifact,
        }];
        for i in 0..last {
            intervals.push(Interval {
                lo: ks[i],
                hi: ks[i + 1],
                kind: IntervalKind::Bounded,
                lo_pole: Some(i),
                hi_pole: Some(i + 1),
                artifact: false,
            });
        }
        intervals.push(Interval {
            lo: ks[last],
            hi: f64::INFINITY,
            kind: IntervalKind::RightUnbounded,
            lo_pole: Some(last),
            hi_pole: None,
            artifact: right_artifact,
        });
        IntervalStructure { intervals }
    }

    /// Finite family with positions scaled by `c` and weights by `c^2`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        match &self.repr {
            Repr::Finite(e) => {
                let pairs: Vec<(f64, f64)> = e.iter().map(|s| (c * s.k, c * c * s.b)).collect();
                Self::finite(&pairs)
            }
            Repr::Lattice(_) => Err(Error::InvalidParameter("scaling is only defined for finite families".into())),
        }
    }
}

fn check_tail_bound(lat: &Lattice, bound: &TailBound) -> Result<()> {
    for &n in &[1usize, 8, 64] {
        let partial: f64 = ((n + 1)..=(n + TAIL_CHECK_TERMS)).map(|m| lat.weight(m as i64)).sum();
        if bound.eval(n) < partial {
            return Err(Error::InvalidParameter(format!(
                "tail bound {:e} at N = {n} is below the partial tail {partial:e}",
                bound.eval(n)
            )));
        }
    }
    Ok(())
}
