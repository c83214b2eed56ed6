//! Real zeros of `P` on one component of `R \ {k_n}`.
//!
//! On a bounded interval `P''` decreases from `+inf` to `-inf`, so `P'` has a
//! single maximum and `P` has at most two critical points. On `I_-` the
//! function is concave and on `I_+` convex. Every search below brackets a
//! monotone piece and polishes with safeguarded Newton steps.

use crate::config::{Interval, IntervalKind};
use crate::error::{Error, Result};
use crate::pfunc::{AuxiliaryFunction, RealPoint};

const MAX_ITER: usize = 400;
const MAX_EXPAND: usize = 2100;

/// Roots found on one interval.
#[derive(Clone, Debug, PartialEq)]
pub enum IntervalRoots {
    None,
    Simple(RealPoint),
    /// Three simple roots in increasing order (bounded interval).
    Three([RealPoint; 3]),
    /// Two simple roots in increasing order (unbounded interval).
    Pair([RealPoint; 2]),
    Double { double: RealPoint, simple: Option<RealPoint> },
    Triple(RealPoint),
}

impl IntervalRoots {
    /// Whether the interval carries more roots than the minimum count.
    pub fn is_extra(&self) -> bool {
        !matches!(self, IntervalRoots::None | IntervalRoots::Simple(_))
    }

    /// Number of roots counted with multiplicity.
    pub fn multiplicity(&self) -> usize {
        match self {
            IntervalRoots::None => 0,
            IntervalRoots::Simple(_) => 1,
            IntervalRoots::Three(_) => 3,
            IntervalRoots::Pair(_) => 2,
            IntervalRoots::Double { simple, .. } => 2 + simple.is_some() as usize,
            IntervalRoots::Triple(_) => 3,
        }
    }
}

/// Which degeneracy a near-threshold decision is close to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NearDegeneracy {
    Double,
    Triple,
}

#[derive(Clone, Debug)]
pub struct IntervalScan {
    pub roots: IntervalRoots,
    /// Smallest scaled decision margin met on this interval.
    pub margin: f64,
    pub near: Option<NearDegeneracy>,
    /// Point where `P'` is largest on the interval (for complex seeding).
    pub crest: Option<RealPoint>,
}

/// Thresholds on scaled decision quantities.
#[derive(Clone, Copy, Debug)]
pub struct Thresholds {
    pub exact: f64,
    pub ambiguous: f64,
}

pub(crate) struct Frame<'a> {
    pub aux: &'a AuxiliaryFunction,
    lo: Option<usize>,
    hi: Option<usize>,
}

impl<'a> Frame<'a> {
    pub fn new(aux: &'a AuxiliaryFunction, iv: &Interval) -> Self {
        Self { aux, lo: iv.lo_pole, hi: iv.hi_pole }
    }

    fn k(&self, i: usize) -> f64 {
        self.aux.poles()[i]
    }

    /// Re-anchors to the nearer pole of the interval.
    fn canon(&self, p: RealPoint) -> RealPoint {
        if let (Some(lo), Some(hi)) = (self.lo, self.hi) {
            let half = 0.5 * (self.k(hi) - self.k(lo));
            if p.anchor == lo && p.offset > half {
                return RealPoint { anchor: hi, offset: (self.k(lo) - self.k(hi)) + p.offset };
            }
            if p.anchor == hi && -p.offset > half {
                return RealPoint { anchor: lo, offset: (self.k(hi) - self.k(lo)) + p.offset };
            }
        }
        p
    }

    fn offset_in(&self, p: RealPoint, anchor: usize) -> f64 {
        if p.anchor == anchor {
            p.offset
        } else {
            (self.k(p.anchor) - self.k(anchor)) + p.offset
        }
    }

    /// Signed length `b - a`.
    fn width(&self, a: RealPoint, b: RealPoint) -> f64 {
        self.offset_in(b, a.anchor) - a.offset
    }

    fn shift(&self, p: RealPoint, dx: f64) -> RealPoint {
        self.canon(RealPoint { anchor: p.anchor, offset: p.offset + dx })
    }

    fn mid(&self, a: RealPoint, b: RealPoint) -> RealPoint {
        let ob = self.offset_in(b, a.anchor);
        self.canon(RealPoint { anchor: a.anchor, offset: 0.5 * (a.offset + ob) })
    }

    fn near_lo(&self) -> RealPoint {
        let lo = self.lo.expect("interval has a left pole");
        let span = self.hi.map(|hi| self.k(hi) - self.k(lo)).unwrap_or(1.0);
        RealPoint { anchor: lo, offset: 0.25 * span }
    }

    fn near_hi(&self) -> RealPoint {
        let hi = self.hi.expect("interval has a right pole");
        let span = self.lo.map(|lo| self.k(hi) - self.k(lo)).unwrap_or(1.0);
        RealPoint { anchor: hi, offset: -0.25 * span }
    }

    /// Moves toward the left pole until `pred` holds.
    fn approach_lo(&self, pred: impl Fn(RealPoint) -> bool) -> Result<RealPoint> {
        let mut p = self.near_lo();
        for _ in 0..MAX_EXPAND {
            if pred(p) {
                return Ok(p);
            }
            p.offset *= 0.0625;
            if p.offset == 0.0 {
                break;
            }
        }
        Err(Error::RootSearch("no bracket next to the left pole".into()))
    }

    fn approach_hi(&self, pred: impl Fn(RealPoint) -> bool) -> Result<RealPoint> {
        let mut p = self.near_hi();
        for _ in 0..MAX_EXPAND {
            if pred(p) {
                return Ok(p);
            }
            p.offset *= 0.0625;
            if p.offset == 0.0 {
                break;
            }
        }
        Err(Error::RootSearch("no bracket next to the right pole".into()))
    }

    /// Moves from halfway between the left pole and `limit` toward the pole
    /// until `pred` holds, so the result lies left of `limit`.
    fn approach_lo_before(&self, limit: RealPoint, pred: impl Fn(RealPoint) -> bool) -> Result<RealPoint> {
        let lo = self.lo.expect("interval has a left pole");
        let mut p = RealPoint { anchor: lo, offset: 0.5 * self.offset_in(limit, lo) };
        for _ in 0..MAX_EXPAND {
            if pred(p) {
                return Ok(p);
            }
            p.offset *= 0.0625;
            if p.offset == 0.0 {
                break;
            }
        }
        Err(Error::RootSearch("no bracket next to the left pole".into()))
    }

    fn approach_hi_after(&self, limit: RealPoint, pred: impl Fn(RealPoint) -> bool) -> Result<RealPoint> {
        let hi = self.hi.expect("interval has a right pole");
        let mut p = RealPoint { anchor: hi, offset: 0.5 * self.offset_in(limit, hi) };
        for _ in 0..MAX_EXPAND {
            if pred(p) {
                return Ok(p);
            }
            p.offset *= 0.0625;
            if p.offset == 0.0 {
                break;
            }
        }
        Err(Error::RootSearch("no bracket next to the right pole".into()))
    }

    /// Moves outward from `limit` toward infinity until `pred` holds.
    fn expand_beyond(&self, limit: RealPoint, dir: f64, pred: impl Fn(RealPoint) -> bool) -> Result<RealPoint> {
        let mut step = 1.0f64.max(self.aux.point_value(limit).abs());
        for _ in 0..MAX_EXPAND {
            let p = self.shift(limit, dir * step);
            if pred(p) {
                return Ok(p);
            }
            step *= 2.0;
            if !step.is_finite() {
                break;
            }
        }
        Err(Error::RootSearch("no bracket toward infinity".into()))
    }

    /// Moves away from the only pole of an unbounded interval until `pred` holds.
    fn expand(&self, dir: f64, pred: impl Fn(RealPoint) -> bool) -> Result<RealPoint> {
        let anchor = if dir < 0.0 { self.hi } else { self.lo }.expect("unbounded interval has one pole");
        let mut step = 1.0f64.max(self.k(anchor).abs());
        for _ in 0..MAX_EXPAND {
            let p = RealPoint { anchor, offset: dir * step };
            if pred(p) {
                return Ok(p);
            }
            step *= 2.0;
            if !step.is_finite() {
                break;
            }
        }
        Err(Error::RootSearch("no bracket toward infinity".into()))
    }

    fn eval(&self, p: RealPoint, order: u32) -> f64 {
        self.aux.derivative_real(p, order)
    }

    /// Zero of `P^(order)` on `[a, b]`, where the values at the ends differ in sign.
    pub fn solve(&self, order: u32, mut a: RealPoint, mut b: RealPoint) -> Result<RealPoint> {
        let fa = self.eval(a, order);
        let fb = self.eval(b, order);
        if fa == 0.0 {
            return Ok(a);
        }
        if fb == 0.0 {
            return Ok(b);
        }
        if fa.signum() == fb.signum() {
            return Err(Error::RootSearch(format!("bracket for P^({order}) has no sign change")));
        }
        let sa = fa.signum();
        let mut x = self.mid(a, b);
        for _ in 0..MAX_ITER {
            let fx = self.eval(x, order);
            if fx == 0.0 || fx.is_nan() {
                return Ok(x);
            }
            if fx.signum() == sa {
                a = x;
            } else {
                b = x;
            }
            let w = self.width(a, b);
            let scale = a.offset.abs().min(self.offset_in(b, a.anchor).abs());
            if w <= 4.0 * f64::EPSILON * scale || w <= f64::MIN_POSITIVE {
                return Ok(x);
            }
            let dfx = self.eval(x, order + 1);
            let step = -fx / dfx;
            let cand = self.shift(x, step);
            let inside = step.is_finite() && self.width(a, cand) > 0.0 && self.width(cand, b) > 0.0;
            if inside && step.abs() < 0.5 * w {
                if step.abs() <= 2.0 * f64::EPSILON * x.offset.abs() {
                    return Ok(cand);
                }
                x = cand;
            } else {
                x = self.mid(a, b);
            }
        }
        Ok(x)
    }
}

fn scaled(aux: &AuxiliaryFunction, p: RealPoint, order: u32) -> (f64, f64) {
    let v = aux.derivative_real(p, order);
    let m = aux.magnitude_real(p, order);
    (v, v.abs() / m)
}

struct Decisions {
    margin: f64,
    near: Option<NearDegeneracy>,
    th: Thresholds,
}

impl Decisions {
    fn note(&mut self, mu: f64, kind: NearDegeneracy) {
        self.margin = self.margin.min(mu);
        if mu > self.th.exact && mu < self.th.ambiguous && self.near.is_none() {
            self.near = Some(kind);
        }
    }
}

pub fn scan_interval(aux: &AuxiliaryFunction, iv: &Interval, th: Thresholds) -> Result<IntervalScan> {
    let fr = Frame::new(aux, iv);
    let mut dec = Decisions { margin: f64::INFINITY, near: None, th };
    let (roots, crest) = match iv.kind {
        IntervalKind::Bounded => scan_bounded(&fr, &mut dec)?,
        IntervalKind::LeftUnbounded => scan_unbounded(&fr, &mut dec, -1.0)?,
        IntervalKind::RightUnbounded => scan_unbounded(&fr, &mut dec, 1.0)?,
    };
    Ok(IntervalScan { roots, margin: dec.margin, near: dec.near, crest: Some(crest) })
}

fn scan_bounded(fr: &Frame, dec: &mut Decisions) -> Result<(IntervalRoots, RealPoint)> {
    let th = dec.th;
    let a2 = fr.approach_lo(|p| fr.eval(p, 2) > 0.0)?;
    let b2 = fr.approach_hi(|p| fr.eval(p, 2) < 0.0)?;
    let c = fr.solve(2, a2, b2)?;
    let (p1, mu1) = scaled(fr.aux, c, 1);
    let a0 = |limit| fr.approach_lo_before(limit, |p| fr.eval(p, 0) > 0.0);
    let b0 = |limit| fr.approach_hi_after(limit, |p| fr.eval(p, 0) < 0.0);

    if p1 <= 0.0 || mu1 <= th.exact {
        let (_, mu0) = scaled(fr.aux, c, 0);
        if mu1 <= th.exact && mu0 <= th.exact {
            dec.margin = dec.margin.min(mu0.max(mu1));
            return Ok((IntervalRoots::Triple(c), c));
        }
        if mu1 < th.ambiguous {
            dec.note(mu0.max(mu1), NearDegeneracy::Triple);
        } else {
            dec.margin = dec.margin.min(mu1);
        }
        let r = fr.solve(0, a0(c)?, b0(c)?)?;
        return Ok((IntervalRoots::Simple(r), c));
    }
    if mu1 < th.ambiguous {
        let (_, mu0) = scaled(fr.aux, c, 0);
        dec.note(mu0.max(mu1), NearDegeneracy::Triple);
    }

    let a1 = fr.approach_lo_before(c, |p| fr.eval(p, 1) < 0.0)?;
    let b1 = fr.approach_hi_after(c, |p| fr.eval(p, 1) < 0.0)?;
    let c1 = fr.solve(1, a1, c)?;
    let c2 = fr.solve(1, c, b1)?;
    let (q1, mu_q1) = scaled(fr.aux, c1, 0);
    let (q2, mu_q2) = scaled(fr.aux, c2, 0);

    if mu_q1 <= th.exact {
        dec.margin = dec.margin.min(mu_q1);
        let r = fr.solve(0, c2, b0(c2)?)?;
        return Ok((IntervalRoots::Double { double: c1, simple: Some(r) }, c));
    }
    if mu_q2 <= th.exact {
        dec.margin = dec.margin.min(mu_q2);
        let r = fr.solve(0, a0(c1)?, c1)?;
        return Ok((IntervalRoots::Double { double: c2, simple: Some(r) }, c));
    }
    if q1 > 0.0 {
        dec.note(mu_q1, NearDegeneracy::Double);
        let r = fr.solve(0, c2, b0(c2)?)?;
        return Ok((IntervalRoots::Simple(r), c));
    }
    if q2 < 0.0 {
        dec.note(mu_q2, NearDegeneracy::Double);
        let r = fr.solve(0, a0(c1)?, c1)?;
        return Ok((IntervalRoots::Simple(r), c));
    }
    dec.note(mu_q1, NearDegeneracy::Double);
    dec.note(mu_q2, NearDegeneracy::Double);
    let r1 = fr.solve(0, a0(c1)?, c1)?;
    let r2 = fr.solve(0, c1, c2)?;
    let r3 = fr.solve(0, c2, b0(c2)?)?;
    Ok((IntervalRoots::Three([r1, r2, r3]), c))
}

/// `dir = -1` for `I_-` (concave, maximum) and `+1` for `I_+` (convex, minimum).
fn scan_unbounded(fr: &Frame, dec: &mut Decisions, dir: f64) -> Result<(IntervalRoots, RealPoint)> {
    let th = dec.th;
    let c = if dir < 0.0 {
        let far = fr.expand(-1.0, |p| fr.eval(p, 1) > 0.0)?;
        let near = fr.approach_hi(|p| fr.eval(p, 1) < 0.0)?;
        fr.solve(1, far, near)?
    } else {
        let near = fr.approach_lo(|p| fr.eval(p, 1) < 0.0)?;
        let far = fr.expand(1.0, |p| fr.eval(p, 1) > 0.0)?;
        fr.solve(1, near, far)?
    };
    let (q, mu) = scaled(fr.aux, c, 0);
    if mu <= th.exact {
        dec.margin = dec.margin.min(mu);
        return Ok((IntervalRoots::Double { double: c, simple: None }, c));
    }
    dec.note(mu, NearDegeneracy::Double);
    let has_pair = if dir < 0.0 { q > 0.0 } else { q < 0.0 };
    if !has_pair {
        return Ok((IntervalRoots::None, c));
    }
    let pair = if dir < 0.0 {
        let far = fr.expand_beyond(c, -1.0, |p| fr.eval(p, 0) < 0.0)?;
        let near = fr.approach_hi_after(c, |p| fr.eval(p, 0) < 0.0)?;
        [fr.solve(0, far, c)?, fr.solve(0, c, near)?]
    } else {
        let near = fr.approach_lo_before(c, |p| fr.eval(p, 0) > 0.0)?;
        let far = fr.expand_beyond(c, 1.0, |p| fr.eval(p, 0) > 0.0)?;
        [fr.solve(0, near, c)?, fr.solve(0, c, far)?]
    };
    Ok((IntervalRoots::Pair(pair), c))
}

/// Critical point of `P` on an interval and the value there. On a bounded
/// interval `want_max` selects the local maximum, otherwise the minimum.
pub fn extremum(aux: &AuxiliaryFunction, iv: &Interval, want_max: bool) -> Result<(RealPoint, f64)> {
    let fr = Frame::new(aux, iv);
    let c = match iv.kind {
        IntervalKind::LeftUnbounded => {
            let far = fr.expand(-1.0, |p| fr.eval(p, 1) > 0.0)?;
            let near = fr.approach_hi(|p| fr.eval(p, 1) < 0.0)?;
            fr.solve(1, far, near)?
        }
        IntervalKind::RightUnbounded => {
            let near = fr.approach_lo(|p| fr.eval(p, 1) < 0.0)?;
            let far = fr.expand(1.0, |p| fr.eval(p, 1) > 0.0)?;
            fr.solve(1, near, far)?
        }
        IntervalKind::Bounded => {
            let a2 = fr.approach_lo(|p| fr.eval(p, 2) > 0.0)?;
            let b2 = fr.approach_hi(|p| fr.eval(p, 2) < 0.0)?;
            let c = fr.solve(2, a2, b2)?;
            if fr.eval(c, 1) <= 0.0 {
                return Err(Error::RootSearch("interval has no critical points".into()));
            }
            if want_max {
                let b1 = fr.approach_hi_after(c, |p| fr.eval(p, 1) < 0.0)?;
                fr.solve(1, c, b1)?
            } else {
                let a1 = fr.approach_lo_before(c, |p| fr.eval(p, 1) < 0.0)?;
                fr.solve(1, a1, c)?
            }
        }
    };
    Ok((c, aux.derivative_real(c, 0)))
}
