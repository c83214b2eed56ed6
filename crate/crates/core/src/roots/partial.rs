//! Partial-fraction expansion of `1/P` for each case, and the residue identity
//! `sum of residues = 1` that follows from `1/P(z) ~ 1/z` at infinity.

use super::{Case, Classification};
use crate::numerics::{factorial, CompensatedSum, RealSum};
use crate::pfunc::{AuxiliaryFunction, RealPoint};
use num_complex::Complex64;

/// `coefficient / (z - root)` with `coefficient = 1/P'(root)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimpleTerm {
    pub point: RealPoint,
    pub root: f64,
    pub derivative: f64,
    pub coefficient: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SingularPart {
    /// `1/(P'(beta)(z - beta)) + 1/(conj P'(beta)(z - conj beta))`
    ComplexPair { beta: Complex64, derivative: Complex64 },
    DistinctReal { rho1: SimpleTerm, rho2: SimpleTerm },
    /// `second/(z - rho0)^2 + first/(z - rho0)`
    DoubleRoot { point: RealPoint, rho0: f64, second: f64, first: f64 },
    /// `third/(z - rho0)^3 + second/(z - rho0)^2 + first/(z - rho0)`
    TripleRoot { point: RealPoint, rho0: f64, third: f64, second: f64, first: f64 },
}

#[derive(Clone, Debug)]
pub struct PartialFraction {
    pub singular: SingularPart,
    pub simple: Vec<SimpleTerm>,
    poles: Vec<f64>,
    tail: f64,
}

/// Residue identity check: `sum` should equal one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidueCheck {
    pub sum: f64,
    pub residual: f64,
    /// Truncation estimate for the omitted zeros plus a rounding allowance.
    pub bound: f64,
}

fn simple(aux: &AuxiliaryFunction, p: RealPoint) -> SimpleTerm {
    let d = aux.derivative_real(p, 1);
    SimpleTerm { point: p, root: aux.point_value(p), derivative: d, coefficient: 1.0 / d }
}

impl PartialFraction {
    pub fn build(aux: &AuxiliaryFunction, cls: &Classification) -> Self {
        let simple_terms = cls.standard_roots.iter().map(|r| simple(aux, r.point)).collect();
        let singular = match cls.case {
            Case::ComplexPair { beta } => SingularPart::ComplexPair { beta, derivative: aux.derivative(beta, 1) },
            Case::DistinctReal { rho1, rho2 } => {
                SingularPart::DistinctReal { rho1: simple(aux, rho1.point), rho2: simple(aux, rho2.point) }
            }
            Case::DoubleRoot { rho0 } => {
                let p2 = aux.derivative_real(rho0.point, 2);
                let p3 = aux.derivative_real(rho0.point, 3);
                SingularPart::DoubleRoot {
                    point: rho0.point,
                    rho0: rho0.value,
                    second: 2.0 / p2,
                    first: -2.0 * p3 / (3.0 * p2 * p2),
                }
            }
            Case::TripleRoot { rho0 } => {
                let a3 = aux.derivative_real(rho0.point, 3) / factorial(3);
                let a4 = aux.derivative_real(rho0.point, 4) / factorial(4);
                let a5 = aux.derivative_real(rho0.point, 5) / factorial(5);
                SingularPart::TripleRoot {
                    point: rho0.point,
                    rho0: rho0.value,
                    third: 1.0 / a3,
                    second: -a4 / (a3 * a3),
                    first: (a4 * a4 - a3 * a5) / (a3 * a3 * a3),
                }
            }
        };
        let tw = aux.tail_weight();
        let tail = if tw == 0.0 {
            0.0
        } else {
            let r = aux.tail_distance(Complex64::new(0.0, 0.0)).max(1.0);
            4.0 * tw / (r * r)
        };
        Self { singular, simple: simple_terms, poles: aux.poles().to_vec(), tail }
    }

    fn diff(&self, z: Complex64, p: RealPoint) -> Complex64 {
        (z - self.poles[p.anchor]) - p.offset
    }

    /// The expansion evaluated at `z`; equals `1/P(z)`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut s = CompensatedSum::new();
        for t in &self.simple {
            s.add(t.coefficient / self.diff(z, t.point));
        }
        let sing = match self.singular {
            SingularPart::ComplexPair { beta, derivative } => {
                1.0 / (derivative * (z - beta)) + 1.0 / (derivative.conj() * (z - beta.conj()))
            }
            SingularPart::DistinctReal { rho1, rho2 } => {
                rho1.coefficient / self.diff(z, rho1.point) + rho2.coefficient / self.diff(z, rho2.point)
            }
            SingularPart::DoubleRoot { point, second, first, .. } => {
                let u = self.diff(z, point);
                second / (u * u) + first / u
            }
            SingularPart::TripleRoot { point, third, second, first, .. } => {
                let u = self.diff(z, point);
                third / (u * u * u) + second / (u * u) + first / u
            }
        };
        s.add(sing);
        s.value()
    }

    /// Residue of the singular part (the coefficient of `1/(z - .)` summed).
    pub fn singular_residue(&self) -> f64 {
        match self.singular {
            SingularPart::ComplexPair { derivative, .. } => 2.0 * (1.0 / derivative).re,
            SingularPart::DistinctReal { rho1, rho2 } => rho1.coefficient + rho2.coefficient,
            SingularPart::DoubleRoot { first, .. } | SingularPart::TripleRoot { first, .. } => first,
        }
    }

    pub fn residue_sum(&self) -> f64 {
        let mut s = RealSum::new();
        for t in &self.simple {
            s.add(t.coefficient);
        }
        s.add(self.singular_residue());
        s.value()
    }

    pub fn verify_residue_identity(&self) -> ResidueCheck {
        let sum = self.residue_sum();
        let magnitude: f64 = self.simple.iter().map(|t| t.coefficient.abs()).sum::<f64>() + self.singular_residue().abs();
        let rounding = 8.0 * f64::EPSILON * (self.simple.len() as f64 + 2.0) * (magnitude + 1.0);
        ResidueCheck { sum, residual: (sum - 1.0).abs(), bound: self.tail + rounding }
    }

    /// `arg P'(beta)`, in `(-pi/2, pi/2)`.
    pub fn psi(&self) -> Option<f64> {
        match self.singular {
            SingularPart::ComplexPair { derivative, .. } => Some(derivative.arg()),
            _ => None,
        }
    }

    /// Exponent weights `a_n`: `|P'(beta)/P'(lambda_n)|` or `P'(rho1)/|P'(lambda_n)|`.
    pub fn a_coefficients(&self) -> Option<Vec<f64>> {
        let scale = match self.singular {
            SingularPart::ComplexPair { derivative, .. } => derivative.norm(),
            SingularPart::DistinctReal { rho1, .. } => rho1.derivative,
            _ => return None,
        };
        Some(self.simple.iter().map(|t| scale / t.derivative.abs()).collect())
    }

    /// `b = P'(rho1)/|P'(rho2)|` in the distinct-real case.
    pub fn b_coefficient(&self) -> Option<f64> {
        match self.singular {
            SingularPart::DistinctReal { rho1, rho2 } => Some(rho1.derivative / rho2.derivative.abs()),
            _ => None,
        }
    }
}
