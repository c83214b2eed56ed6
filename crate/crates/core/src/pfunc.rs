//! The auxiliary function `P(z) = z + sum 4 b_n / (z - k_n)`, its derivatives,
//! truncation tail bounds, and the F/H/G decompositions.

use crate::config::{Slit, SlitFamily};
use crate::error::{Error, Result};
use crate::numerics::{factorial, CompensatedSum, RealSum};
use num_complex::Complex64;

/// Relative distance to a pole below which evaluation is refused.
pub const POLE_GUARD: f64 = 1e-12;

/// Evaluation of `P^(order)` with a bound on the neglected tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PValue {
    pub value: Complex64,
    pub tail_bound: f64,
}

/// A real point stored as a pole plus an offset, so that points very close
/// to a pole keep their full relative precision.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealPoint {
    pub anchor: usize,
    pub offset: f64,
}

#[derive(Clone, Debug)]
pub struct AuxiliaryFunction {
    family: SlitFamily,
    truncation: usize,
    slits: Vec<Slit>,
    poles: Vec<f64>,
    weights: Vec<f64>,
}

impl AuxiliaryFunction {
    pub fn new(family: &SlitFamily, n_trunc: usize) -> Self {
        let slits = family.materialize(n_trunc);
        let poles = slits.iter().map(|s| s.k).collect();
        let weights = slits.iter().map(|s| 4.0 * s.b).collect();
        Self { family: family.clone(), truncation: n_trunc, slits, poles, weights }
    }

    pub fn with_default_truncation(family: &SlitFamily) -> Self {
        Self::new(family, family.default_truncation())
    }

    pub fn family(&self) -> &SlitFamily {
        &self.family
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn slits(&self) -> &[Slit] {
        &self.slits
    }

    /// Materialized slit positions in increasing order.
    pub fn poles(&self) -> &[f64] {
        &self.poles
    }

    /// The residue `4 b_n` of `P` at pole `i`.
    pub fn residue(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// `sum 4 b_n` over the materialized poles.
    pub fn total_residue(&self) -> f64 {
        let mut s = RealSum::new();
        self.weights.iter().for_each(|&w| s.add(w));
        s.value()
    }

    pub fn tail_weight(&self) -> f64 {
        self.family.tail_weight(self.truncation)
    }

    pub fn tail_distance(&self, z: Complex64) -> f64 {
        self.family.tail_distance(z, self.truncation)
    }

    /// Bound on the contribution of unmaterialized poles to `P^(order)(z)`.
    pub fn tail_bound(&self, z: Complex64, order: u32) -> f64 {
        let tw = self.tail_weight();
        if tw == 0.0 {
            return 0.0;
        }
        let dist = self.tail_distance(z);
        4.0 * tw * factorial(order) / dist.powi(order as i32 + 1)
    }

    /// Nearest materialized pole and its distance.
    pub fn nearest_pole(&self, z: Complex64) -> (usize, f64) {
        let i = self.poles.partition_point(|&k| k < z.re);
        let mut best = (0, f64::INFINITY);
        for j in [i.wrapping_sub(1), i] {
            if j < self.poles.len() {
                let d = (z - self.poles[j]).norm();
                if d < best.1 {
                    best = (j, d);
                }
            }
        }
        best
    }

    fn check_pole(&self, z: Complex64) -> Result<()> {
        let (i, d) = self.nearest_pole(z);
        let k = self.poles[i];
        if d < POLE_GUARD * k.abs().max(1.0) {
            return Err(Error::PoleProximity { z, k, dist: d });
        }
        Ok(())
    }

    /// `P^(order)(z)` with its tail bound; refuses points next to a pole.
    pub fn eval(&self, z: Complex64, order: u32) -> Result<PValue> {
        self.check_pole(z)?;
        Ok(PValue { value: self.derivative(z, order), tail_bound: self.tail_bound(z, order) })
    }

    /// `P(z)` without the pole check.
    pub fn value(&self, z: Complex64) -> Complex64 {
        self.derivative(z, 0)
    }

    /// `P^(order)(z)` without the pole check.
    pub fn derivative(&self, z: Complex64, order: u32) -> Complex64 {
        let coeff = sign(order) * factorial(order);
        let mut s = CompensatedSum::new();
        for (&k, &w) in self.poles.iter().zip(&self.weights) {
            s.add(w * coeff / (z - k).powi(order as i32 + 1));
        }
        s.value() + leading(z, order)
    }

    /// `x - k_m` for an anchored real point.
    pub fn diff(&self, p: RealPoint, m: usize) -> f64 {
        if m == p.anchor {
            p.offset
        } else {
            (self.poles[p.anchor] - self.poles[m]) + p.offset
        }
    }

    pub fn point_value(&self, p: RealPoint) -> f64 {
        self.poles[p.anchor] + p.offset
    }

    /// `P^(order)` at an anchored real point.
    pub fn derivative_real(&self, p: RealPoint, order: u32) -> f64 {
        let coeff = sign(order) * factorial(order);
        let mut s = RealSum::new();
        for m in 0..self.poles.len() {
            s.add(self.weights[m] * coeff / self.diff(p, m).powi(order as i32 + 1));
        }
        let x = self.point_value(p);
        let lead = match order {
            0 => x,
            1 => 1.0,
            _ => 0.0,
        };
        s.add(lead);
        s.value()
    }

    /// Sum of absolute values of the terms of `P^(order)` at a real point.
    pub fn magnitude_real(&self, p: RealPoint, order: u32) -> f64 {
        let coeff = factorial(order);
        let terms: f64 = (0..self.poles.len())
            .map(|m| self.weights[m] * coeff / self.diff(p, m).abs().powi(order as i32 + 1))
            .sum();
        terms
            + match order {
                0 => self.point_value(p).abs(),
                1 => 1.0,
                _ => 0.0,
            }
    }

    /// `F(z, w) = P(z) / ((z - w)(z - conj w))`.
    pub fn f_direct(&self, z: Complex64, w: Complex64) -> Result<Complex64> {
        self.check_pole(z)?;
        Ok(self.value(z) / ((z - w) * (z - w.conj())))
    }

    pub fn f_decomposed(&self, z: Complex64, w: Complex64) -> Result<Complex64> {
        self.check_pole(z)?;
        self.check_pole(w)?;
        let wb = w.conj();
        let head = (self.value(w) / (z - w) - self.value(wb) / (z - wb)) / (w - wb);
        let mut s = CompensatedSum::new();
        for (&k, &c) in self.poles.iter().zip(&self.weights) {
            s.add(c / ((z - k) * (w - k).norm_sqr()));
        }
        Ok(head + s.value())
    }

    /// `H(z, l1, l2) = P(z) / ((z - l1)(z - l2))`.
    pub fn h_direct(&self, z: Complex64, l1: Complex64, l2: Complex64) -> Result<Complex64> {
        self.check_pole(z)?;
        Ok(self.value(z) / ((z - l1) * (z - l2)))
    }

    pub fn h_decomposed(&self, z: Complex64, l1: Complex64, l2: Complex64) -> Result<Complex64> {
        self.check_pole(z)?;
        self.check_pole(l1)?;
        self.check_pole(l2)?;
        let head = (self.value(l1) / (z - l1) - self.value(l2) / (z - l2)) / (l1 - l2);
        let mut s = CompensatedSum::new();
        for (&k, &c) in self.poles.iter().zip(&self.weights) {
            s.add(c / ((z - k) * (l1 - k) * (l2 - k)));
        }
        Ok(head + s.value())
    }

    /// `G(z, l) = P(z) / (z - l)^2`.
    pub fn g_direct(&self, z: Complex64, l: Complex64) -> Result<Complex64> {
        self.check_pole(z)?;
        Ok(self.value(z) / ((z - l) * (z - l)))
    }

    pub fn g_decomposed(&self, z: Complex64, l: Complex64) -> Result<Complex64> {
        self.check_pole(z)?;
        self.check_pole(l)?;
        let head = self.derivative(l, 1) / (z - l) + self.value(l) / ((z - l) * (z - l));
        let mut s = CompensatedSum::new();
        for (&k, &c) in self.poles.iter().zip(&self.weights) {
            s.add(c / ((z - k) * (l - k) * (l - k)));
        }
        Ok(head + s.value())
    }
}

fn sign(order: u32) -> f64 {
    if order % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn leading(z: Complex64, order: u32) -> Complex64 {
    match order {
        0 => z,
        1 => Complex64::new(1.0, 0.0),
        _ => Complex64::new(0.0, 0.0),
    }
}
