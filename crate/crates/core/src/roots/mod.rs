//! Zeros of `P` and the case classification of a slit family.
//!
//! Each bounded interval carries one or three zeros and each unbounded
//! interval none or two, with multiplicity. Apart from one standard zero per
//! bounded interval, exactly one of the following is present: a zero `beta`
//! in the upper half-plane, two extra simple real zeros, a double zero, or a
//! triple zero.

pub mod complex;
mod partial;
pub mod real;

pub use partial::{PartialFraction, ResidueCheck, SimpleTerm, SingularPart};

use crate::config::{IntervalStructure, SlitFamily};
use crate::error::{Error, Result};
use crate::pfunc::{AuxiliaryFunction, RealPoint};
use num_complex::Complex64;
use real::{IntervalRoots, NearDegeneracy, Thresholds};
use serde::Serialize;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const AMBIGUITY_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CaseKind {
    ComplexPair,
    DistinctReal,
    DoubleRoot,
    TripleRoot,
}

/// A real zero of `P`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealRoot {
    pub point: RealPoint,
    pub value: f64,
    /// Index into [`IntervalStructure::intervals`].
    pub interval: usize,
    /// `P'` at the zero.
    pub derivative: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Case {
    ComplexPair { beta: Complex64 },
    /// `P'(rho1) > 0 > P'(rho2)`, both in the same interval.
    DistinctReal { rho1: RealRoot, rho2: RealRoot },
    DoubleRoot { rho0: RealRoot },
    /// `rho0` replaces the standard zero of its bounded interval.
    TripleRoot { rho0: RealRoot },
}

impl Case {
    pub fn kind(&self) -> CaseKind {
        match self {
            Case::ComplexPair { .. } => CaseKind::ComplexPair,
            Case::DistinctReal { .. } => CaseKind::DistinctReal,
            Case::DoubleRoot { .. } => CaseKind::DoubleRoot,
            Case::TripleRoot { .. } => CaseKind::TripleRoot,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ambiguity {
    pub candidates: [CaseKind; 2],
    pub margin: f64,
}

#[derive(Clone, Debug)]
pub struct Classification {
    pub case: Case,
    /// Standard zeros `lambda_n` entering the partial fractions, in increasing order.
    pub standard_roots: Vec<RealRoot>,
    /// Smallest scaled decision margin.
    pub margin: f64,
    pub ambiguity: Option<Ambiguity>,
    /// Largest truncation tail bound on `P` at the located zeros.
    pub tail_bound: f64,
    pub intervals: IntervalStructure,
}

impl Classification {
    pub fn kind(&self) -> CaseKind {
        self.case.kind()
    }

    pub fn is_resolved(&self) -> bool {
        self.ambiguity.is_none()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ClassifyOptions {
    /// Scaled margin at or below which a decision counts as exactly degenerate.
    pub tol: f64,
    /// Scaled margin below which a generic decision is reported as ambiguous.
    pub ambiguous: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, ambiguous: AMBIGUITY_THRESHOLD }
    }
}

fn real_root(aux: &AuxiliaryFunction, p: RealPoint, interval: usize) -> RealRoot {
    RealRoot { point: p, value: aux.point_value(p), interval, derivative: aux.derivative_real(p, 1) }
}

/// Standard zeros, one per bounded interval except a triple-zero interval.
pub fn find_standard_roots(aux: &AuxiliaryFunction, opts: ClassifyOptions) -> Result<Vec<RealRoot>> {
    Ok(classify(aux, opts)?.standard_roots)
}

pub fn classify(aux: &AuxiliaryFunction, opts: ClassifyOptions) -> Result<Classification> {
    let th = Thresholds { exact: opts.tol, ambiguous: opts.ambiguous };
    let intervals = aux.family().intervals(aux.truncation());
    let mut standard = Vec::new();
    let mut extra: Option<Case> = None;
    let mut margin = f64::INFINITY;
    let mut near: Option<(NearDegeneracy, f64)> = None;
    let mut crests = Vec::new();
    let mut multiplicity = 0usize;

    for (idx, iv) in intervals.intervals.iter().enumerate() {
        let scan = real::scan_interval(aux, iv, th)?;
        margin = margin.min(scan.margin);
        if let Some(kind) = scan.near {
            if near.is_none() {
                near = Some((kind, scan.margin));
            }
        }
        if let Some(c) = scan.crest {
            crests.push(aux.point_value(c));
        }
        multiplicity += scan.roots.multiplicity();
        if scan.roots.is_extra() {
            if extra.is_some() {
                return Err(Error::RootSearch(format!("more than one interval carries extra zeros (interval {idx})")));
            }
            if iv.artifact {
                return Err(Error::RootSearch(format!(
                    "extra zeros lie in the truncation interval {idx}; increase N"
                )));
            }
        }
        let rr = |p| real_root(aux, p, idx);
        match scan.roots {
            IntervalRoots::None => {}
            IntervalRoots::Simple(p) => standard.push(rr(p)),
            IntervalRoots::Three([r1, r2, r3]) => {
                standard.push(rr(r1));
                extra = Some(Case::DistinctReal { rho1: rr(r2), rho2: rr(r3) });
            }
            IntervalRoots::Pair([left, right]) => {
                let (rho1, rho2) = if iv.kind == crate::config::IntervalKind::LeftUnbounded {
                    (left, right)
                } else {
                    (right, left)
                };
                extra = Some(Case::DistinctReal { rho1: rr(rho1), rho2: rr(rho2) });
            }
            IntervalRoots::Double { double, simple } => {
                if let Some(s) = simple {
                    standard.push(rr(s));
                }
                extra = Some(Case::DoubleRoot { rho0: rr(double) });
            }
            IntervalRoots::Triple(p) => extra = Some(Case::TripleRoot { rho0: rr(p) }),
        }
    }

    let poles = aux.poles().len();
    let case = match extra {
        Some(c) => c,
        None => {
            let beta = complex::find_upper_root(aux, &crests)?;
            let mu = beta.im / (1.0 + beta.norm());
            margin = margin.min(mu);
            if mu < opts.ambiguous && near.is_none() {
                near = Some((NearDegeneracy::Double, mu));
            }
            multiplicity += 2;
            Case::ComplexPair { beta }
        }
    };
    if multiplicity != poles + 1 {
        return Err(Error::RootSearch(format!(
            "found {multiplicity} zeros with multiplicity, expected {}",
            poles + 1
        )));
    }

    let tail_bound = match case {
        Case::ComplexPair { beta } => aux.tail_bound(beta, 0),
        _ => 0.0,
    }
    .max(standard.iter().map(|r| aux.tail_bound(Complex64::new(r.value, 0.0), 0)).fold(0.0, f64::max));

    let kind = case.kind();
    let mut ambiguity = near.map(|(deg, m)| {
        let other = match deg {
            NearDegeneracy::Double if kind == CaseKind::DoubleRoot => CaseKind::TripleRoot,
            NearDegeneracy::Double => CaseKind::DoubleRoot,
            NearDegeneracy::Triple => CaseKind::TripleRoot,
        };
        Ambiguity { candidates: [kind, other], margin: m }
    });
    if ambiguity.is_none() && tail_bound > 0.0 && tail_bound >= margin {
        let other = if kind == CaseKind::DoubleRoot { CaseKind::TripleRoot } else { CaseKind::DoubleRoot };
        ambiguity = Some(Ambiguity { candidates: [kind, other], margin });
    }
    Ok(Classification { case, standard_roots: standard, margin, ambiguity, tail_bound, intervals })
}

/// Adjusts the weight of slit `slit` of a finite family until the chosen
/// critical value of `P` on `interval` vanishes, producing a double zero.
pub fn tune_double_root(family: &SlitFamily, slit: usize, interval: usize, want_max: bool) -> Result<SlitFamily> {
    let entries = family.materialize(family.default_truncation());
    if !family.is_finite() || slit >= entries.len() {
        return Err(Error::InvalidParameter("tuning needs a finite family and a valid slit index".into()));
    }
    let with = |b: f64| -> Result<SlitFamily> {
        let pairs: Vec<(f64, f64)> =
            entries.iter().enumerate().map(|(i, s)| (s.k, if i == slit { b } else { s.b })).collect();
        SlitFamily::finite(&pairs)
    };
    let critical = |b: f64| -> Result<f64> {
        let fam = with(b)?;
        let aux = AuxiliaryFunction::with_default_truncation(&fam);
        let iv = fam.intervals(aux.truncation()).intervals[interval];
        Ok(real::extremum(&aux, &iv, want_max)?.1)
    };
    let mut lo = entries[slit].b;
    let mut f_lo = critical(lo)?;
    let mut hi = lo;
    let mut f_hi = f_lo;
    let mut grow = 2.0;
    for _ in 0..200 {
        if f_lo.signum() != f_hi.signum() {
            break;
        }
        let up = hi * grow;
        let down = lo / grow;
        if let Ok(v) = critical(up) {
            hi = up;
            f_hi = v;
        }
        if f_lo.signum() == f_hi.signum() {
            if let Ok(v) = critical(down) {
                lo = down;
                f_lo = v;
            }
        }
        grow *= 1.5;
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::RootSearch("no weight produces a double zero on this interval".into()));
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        let f_mid = critical(mid)?;
        if f_mid == 0.0 || (hi - lo) <= 2.0 * f64::EPSILON * hi {
            return with(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    with((lo * hi).sqrt())
}

/// Symmetric pair `{(-k, k^2/8), (k, k^2/8)}` with a triple zero at the origin.
pub fn symmetric_triple(k: f64) -> Result<SlitFamily> {
    SlitFamily::finite(&[(-k, k * k / 8.0), (k, k * k / 8.0)])
}

pub fn partial_fraction(aux: &AuxiliaryFunction, cls: &Classification) -> PartialFraction {
    PartialFraction::build(aux, cls)
}
