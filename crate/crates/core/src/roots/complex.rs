//! The non-real zero of `P` in the upper half-plane: Newton iteration from a
//! ladder of seeds, confirmed by argument-principle counts on rectangles.

use crate::error::{Error, Result};
use crate::pfunc::AuxiliaryFunction;
use num_complex::Complex64;
use std::f64::consts::PI;

const NEWTON_ITER: usize = 200;
const LADDER: i32 = 40;
const MAX_DEPTH: u32 = 48;
const QUADTREE_DEPTH: usize = 60;

/// Axis-aligned rectangle in the upper half-plane.
#[derive(Clone, Copy, Debug)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    fn contains(&self, z: Complex64) -> bool {
        z.re > self.x0 && z.re < self.x1 && z.im > self.y0 && z.im < self.y1
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.x0, self.y0),
            Complex64::new(self.x1, self.y0),
            Complex64::new(self.x1, self.y1),
            Complex64::new(self.x0, self.y1),
        ]
    }

    fn quarters(&self) -> [Rect; 4] {
        let xm = 0.5 * (self.x0 + self.x1);
        let ym = 0.5 * (self.y0 + self.y1);
        [
            Rect { x0: self.x0, x1: xm, y0: self.y0, y1: ym },
            Rect { x0: xm, x1: self.x1, y0: self.y0, y1: ym },
            Rect { x0: self.x0, x1: xm, y0: ym, y1: self.y1 },
            Rect { x0: xm, x1: self.x1, y0: ym, y1: self.y1 },
        ]
    }

    fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }
}

/// Number of zeros of `P` inside `rect` (which must avoid the real axis).
pub fn count_zeros(aux: &AuxiliaryFunction, rect: &Rect) -> Result<i64> {
    if !(rect.y0 > 0.0) {
        return Err(Error::Precondition("counting rectangle must lie above the real axis".into()));
    }
    let c = rect.corners();
    let mut total = 0.0;
    for i in 0..4 {
        total += edge_increment(aux, c[i], c[(i + 1) % 4])?;
    }
    let w = total / (2.0 * PI);
    let n = w.round();
    if (w - n).abs() > 0.05 {
        return Err(Error::RootSearch(format!("argument count {w} is not close to an integer")));
    }
    Ok(n as i64)
}

fn edge_increment(aux: &AuxiliaryFunction, a: Complex64, b: Complex64) -> Result<f64> {
    let len = (b - a).norm();
    let clearance = a.im.min(b.im);
    let pieces = ((len / (0.5 * clearance)).ceil() as usize).clamp(16, 400_000);
    let mut total = 0.0;
    let mut za = a;
    let mut fa = aux.value(a);
    for i in 1..=pieces {
        let zb = a + (b - a) * (i as f64 / pieces as f64);
        let fb = aux.value(zb);
        total += segment(aux, za, fa, zb, fb, 0)?;
        za = zb;
        fa = fb;
    }
    Ok(total)
}

fn segment(aux: &AuxiliaryFunction, za: Complex64, fa: Complex64, zb: Complex64, fb: Complex64, depth: u32) -> Result<f64> {
    if fa.norm() == 0.0 || fb.norm() == 0.0 {
        return Err(Error::RootSearch("zero on the counting contour".into()));
    }
    let d = (fb / fa).arg();
    if d.abs() <= PI / 4.0 {
        return Ok(d);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::RootSearch("argument increment did not resolve".into()));
    }
    let zm = 0.5 * (za + zb);
    let fm = aux.value(zm);
    Ok(segment(aux, za, fa, zm, fm, depth + 1)? + segment(aux, zm, fm, zb, fb, depth + 1)?)
}

/// Damped Newton on `P` kept in the upper half-plane.
pub fn newton(aux: &AuxiliaryFunction, seed: Complex64) -> Option<Complex64> {
    let mut z = seed;
    for _ in 0..NEWTON_ITER {
        let p = aux.value(z);
        let dp = aux.derivative(z, 1);
        let mut step = -p / dp;
        if !step.re.is_finite() || !step.im.is_finite() {
            return None;
        }
        let cap = 0.5 * (1.0 + z.norm());
        if step.norm() > cap {
            step *= cap / step.norm();
        }
        let mut next = z + step;
        let mut halvings = 0;
        while next.im <= 0.0 {
            step *= 0.5;
            next = z + step;
            halvings += 1;
            if halvings > 60 {
                return None;
            }
        }
        z = next;
        if step.norm() <= 4.0 * f64::EPSILON * (1.0 + z.norm()) {
            return Some(z);
        }
    }
    let p = aux.value(z);
    let scale = z.norm() + aux.total_residue() / z.im.max(f64::MIN_POSITIVE);
    (p.norm() <= 1e-12 * scale).then_some(z)
}

/// Search box guaranteed to contain the zero: its real part is half a convex
/// combination of the `k_n` and its imaginary part at most `sqrt(sum 4 b_n)`.
pub fn search_box(aux: &AuxiliaryFunction, y0: f64) -> Rect {
    let poles = aux.poles();
    let lo = 0.5 * poles[0].min(0.0);
    let hi = 0.5 * poles[poles.len() - 1].max(0.0);
    let pad = 1.0 + 0.1 * (hi - lo);
    let s = aux.total_residue().sqrt();
    let d = aux.family().gap();
    let height = if d.is_finite() { (10.0 * d).max(4.0 * s) } else { 4.0 * s };
    Rect { x0: lo - pad, x1: hi + pad, y0, y1: height }
}

/// Locates the zero of `P` in the upper half-plane.
pub fn find_upper_root(aux: &AuxiliaryFunction, seeds_x: &[f64]) -> Result<Complex64> {
    let top = search_box(aux, 1.0).y1;
    let mut xs: Vec<f64> = seeds_x.to_vec();
    let poles = aux.poles();
    for w in poles.windows(2) {
        xs.push(0.5 * (w[0] + w[1]));
    }
    xs.push(0.5 * (poles[0] + poles[poles.len() - 1]));
    for j in 0..LADDER {
        let y = top * 0.5f64.powi(j);
        for &x in &xs {
            if let Some(z) = newton(aux, Complex64::new(x, y)) {
                if confirm(aux, z)? {
                    return Ok(z);
                }
            }
        }
    }
    let z = quadtree(aux, search_box(aux, top * 1e-6))?;
    if confirm(aux, z)? {
        Ok(z)
    } else {
        Err(Error::RootSearch("no zero of P located in the upper half-plane".into()))
    }
}

fn confirm(aux: &AuxiliaryFunction, z: Complex64) -> Result<bool> {
    let pole_gap = aux.nearest_pole(z).1;
    let r = (0.5 * z.im).min(0.5 * pole_gap).min(0.25 * (1.0 + z.norm()));
    let local = Rect { x0: z.re - r, x1: z.re + r, y0: z.im - r, y1: z.im + r };
    if count_zeros(aux, &local)? != 1 {
        return Ok(false);
    }
    let mut global = search_box(aux, 0.5 * z.im);
    global.y1 = global.y1.max(2.0 * z.im);
    Ok(global.contains(z) && count_zeros(aux, &global)? == 1)
}

fn quadtree(aux: &AuxiliaryFunction, start: Rect) -> Result<Complex64> {
    if count_zeros(aux, &start)? != 1 {
        return Err(Error::RootSearch("argument principle finds no isolated zero in the search box".into()));
    }
    let mut rect = start;
    for _ in 0..QUADTREE_DEPTH {
        if let Some(z) = newton(aux, rect.center()) {
            if rect.contains(z) {
                return Ok(z);
            }
        }
        let mut next = None;
        for q in rect.quarters() {
            if count_zeros(aux, &q)? == 1 {
                next = Some(q);
                break;
            }
        }
        rect = next.ok_or_else(|| Error::RootSearch("zero sits on a subdivision edge".into()))?;
    }
    newton(aux, rect.center()).ok_or_else(|| Error::RootSearch("Newton failed after isolation".into()))
}
