//! Koenigs maps `h` that turn the flow into multiplication (complex and
//! distinct-real cases) or translation (double and triple cases).
//!
//! In every case `h' / h = c / P` or `h' = 1 / P`, so along the flow
//! `h(f(z, t)) = (1 - t)^(c/2) h(z / sqrt(1 - t))` or
//! `h(f(z, t)) = h(z / sqrt(1 - t)) + log(1 - t) / 2`.

use crate::error::{Error, Result};
use crate::numerics::{log1p, CompensatedSum};
use crate::pfunc::{AuxiliaryFunction, RealPoint};
use crate::roots::{self, Case, CaseKind, Classification, ClassifyOptions, PartialFraction, SingularPart};
use num_complex::Complex64;

pub const DEFAULT_Z0: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Linearization {
    /// `h' / h = rate / P`; the flow multiplies `h` by `exp(-rate * tau / 2)`.
    Multiplicative { rate: Complex64 },
    /// `h' = 1 / P`; the flow subtracts `tau / 2` from `h`.
    Additive,
}

#[derive(Clone, Copy, Debug)]
enum Singular {
    Complex { beta: Complex64, conj_exponent: Complex64 },
    Distinct { rho1: RealPoint, rho2: RealPoint, b: f64 },
    Double { rho0: RealPoint, log_coeff: f64, pole1: f64 },
    Triple { rho0: RealPoint, log_coeff: f64, pole1: f64, pole2: f64 },
}

#[derive(Clone, Copy, Debug)]
struct LogTerm {
    point: RealPoint,
    coeff: Complex64,
}

/// One sample of `h` on the real line.
#[derive(Clone, Copy, Debug)]
pub struct BoundarySample {
    pub x: f64,
    pub h: Complex64,
    /// `log h` on a branch continuous along the real line (multiplicative
    /// cases), or `h` itself (additive cases).
    pub phi: Complex64,
}

#[derive(Clone, Debug)]
pub struct KoenigsMap {
    aux: AuxiliaryFunction,
    classification: Classification,
    pf: PartialFraction,
    z0: Complex64,
    terms: Vec<LogTerm>,
    singular: Singular,
    linearization: Linearization,
    limit: Complex64,
}

impl KoenigsMap {
    pub fn new(aux: &AuxiliaryFunction, cls: &Classification, z0: Complex64) -> Result<Self> {
        if !(z0.im > 0.0) {
            return Err(Error::NotInUpperHalfPlane(z0));
        }
        let pf = roots::partial_fraction(aux, cls);
        let (singular, linearization, limit) = match pf.singular {
            SingularPart::ComplexPair { beta, derivative } => (
                Singular::Complex { beta, conj_exponent: derivative / derivative.conj() },
                Linearization::Multiplicative { rate: derivative },
                beta,
            ),
            SingularPart::DistinctReal { rho1, rho2 } => (
                Singular::Distinct { rho1: rho1.point, rho2: rho2.point, b: -rho1.derivative / rho2.derivative },
                Linearization::Multiplicative { rate: Complex64::new(-rho1.derivative, 0.0) },
                Complex64::new(rho1.root, 0.0),
            ),
            SingularPart::DoubleRoot { point, rho0, second, first } => (
                Singular::Double { rho0: point, log_coeff: first, pole1: -second },
                Linearization::Additive,
                Complex64::new(rho0, 0.0),
            ),
            SingularPart::TripleRoot { point, rho0, third, second, first } => (
                Singular::Triple { rho0: point, log_coeff: first, pole1: -second, pole2: -0.5 * third },
                Linearization::Additive,
                Complex64::new(rho0, 0.0),
            ),
        };
        let rate = match linearization {
            Linearization::Multiplicative { rate } => rate,
            Linearization::Additive => Complex64::new(1.0, 0.0),
        };
        let terms = pf.simple.iter().map(|t| LogTerm { point: t.point, coeff: rate * t.coefficient }).collect();
        Ok(Self {
            aux: aux.clone(),
            classification: cls.clone(),
            pf,
            z0,
            terms,
            singular,
            linearization,
            limit,
        })
    }

    /// Classifies the family behind `aux` and builds its map with base point `z0`.
    pub fn from_aux(aux: &AuxiliaryFunction, z0: Complex64) -> Result<Self> {
        let cls = roots::classify(aux, ClassifyOptions::default())?;
        Self::new(aux, &cls, z0)
    }

    pub fn aux(&self) -> &AuxiliaryFunction {
        &self.aux
    }

    pub fn classification(&self) -> &Classification {
        &self.classification
    }

    pub fn partial_fraction(&self) -> &PartialFraction {
        &self.pf
    }

    pub fn case(&self) -> CaseKind {
        self.classification.kind()
    }

    pub fn z0(&self) -> Complex64 {
        self.z0
    }

    pub fn linearization(&self) -> Linearization {
        self.linearization
    }

    /// `c` in `h'/h = c/P`, or one in the additive cases.
    pub fn rate(&self) -> Complex64 {
        match self.linearization {
            Linearization::Multiplicative { rate } => rate,
            Linearization::Additive => Complex64::new(1.0, 0.0),
        }
    }

    /// Limit of every tip trajectory: `beta`, `rho1` or `rho0`.
    pub fn limit_point(&self) -> Complex64 {
        self.limit
    }

    pub fn is_multiplicative(&self) -> bool {
        matches!(self.linearization, Linearization::Multiplicative { .. })
    }

    fn diff(&self, z: Complex64, p: RealPoint) -> Complex64 {
        (z - self.aux.poles()[p.anchor]) - p.offset
    }

    fn normalized_log(&self, z: Complex64, p: RealPoint) -> Complex64 {
        let d0 = self.diff(self.z0, p);
        let dz = z - self.z0;
        if dz.norm() < 0.5 * d0.norm() {
            log1p(dz / d0)
        } else {
            self.diff(z, p).ln() - d0.ln()
        }
    }

    /// `log h(z)` in the multiplicative cases, `h(z)` in the additive ones.
    /// The branch is continuous on the closed upper half-plane except across
    /// the horizontal ray left of `beta` in the complex case, where it jumps
    /// by `2 pi i`.
    pub fn phi(&self, z: Complex64) -> Complex64 {
        let mut s = CompensatedSum::new();
        for t in &self.terms {
            s.add(t.coeff * self.normalized_log(z, t.point));
        }
        let sing = match self.singular {
            Singular::Complex { beta, conj_exponent } => {
                let bc = beta.conj();
                ((z - beta).ln() - (self.z0 - beta).ln()) + conj_exponent * ((z - bc).ln() - (self.z0 - bc).ln())
            }
            Singular::Distinct { rho1, rho2, b } => b * self.diff(z, rho2).ln() - self.diff(z, rho1).ln(),
            Singular::Double { rho0, log_coeff, pole1 } => {
                let u = self.diff(z, rho0);
                log_coeff * u.ln() + pole1 / u
            }
            Singular::Triple { rho0, log_coeff, pole1, pole2 } => {
                let u = self.diff(z, rho0);
                log_coeff * u.ln() + pole1 / u + pole2 / (u * u)
            }
        };
        s.add(sing);
        s.value()
    }

    /// `h(z)` for `z` in the closed upper half-plane.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if z.im < 0.0 || !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::NotInUpperHalfPlane(z));
        }
        Ok(self.eval_unchecked(z))
    }

    pub fn eval_unchecked(&self, z: Complex64) -> Complex64 {
        let phi = self.phi(z);
        if self.is_multiplicative() {
            phi.exp()
        } else {
            phi
        }
    }

    /// `h'(z)` from `h'/h = c/P` or `h' = 1/P`.
    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let p = self.aux.value(z);
        match self.linearization {
            Linearization::Multiplicative { rate } => self.eval_unchecked(z) * rate / p,
            Linearization::Additive => 1.0 / p,
        }
    }

    /// Estimated contribution of the zeros left out by truncation.
    pub fn tail_bound(&self, z: Complex64) -> f64 {
        let tw = self.aux.tail_weight();
        if tw == 0.0 {
            return 0.0;
        }
        let r = self.aux.tail_distance(Complex64::new(0.0, 0.0)).max(1.0);
        let coeff_tail = 4.0 * tw / (r * r);
        let log_bound = std::f64::consts::PI + 2.0 * (z - self.z0).norm();
        let tail = self.rate().norm() * coeff_tail * log_bound;
        if self.is_multiplicative() {
            tail * self.eval_unchecked(z).norm()
        } else {
            tail
        }
    }

    /// Images `h(k_n)` of the slit tips.
    pub fn tip_points(&self) -> Vec<Complex64> {
        self.aux.poles().iter().map(|&k| self.eval_unchecked(Complex64::new(k, 0.0))).collect()
    }

    /// `h` along the real line at the given points.
    pub fn boundary_scan(&self, xs: &[f64]) -> Vec<BoundarySample> {
        xs.iter()
            .map(|&x| {
                let z = Complex64::new(x, 0.0);
                let phi = self.phi(z);
                let h = if self.is_multiplicative() { phi.exp() } else { phi };
                BoundarySample { x, h, phi }
            })
            .collect()
    }

    /// Flow action on the image: `h -> (1-t)^(c/2) h` or `h -> h + log(1-t)/2`,
    /// written in log-time `tau = -log(1 - t)`.
    pub fn act(&self, w: Complex64, tau: f64) -> Complex64 {
        match self.linearization {
            Linearization::Multiplicative { rate } => w * (-rate * (0.5 * tau)).exp(),
            Linearization::Additive => w - 0.5 * tau,
        }
    }

    /// The same action on `phi` values.
    pub fn act_phi(&self, phi: Complex64, tau: f64) -> Complex64 {
        match self.linearization {
            Linearization::Multiplicative { rate } => phi - rate * (0.5 * tau),
            Linearization::Additive => phi - 0.5 * tau,
        }
    }

    /// Residual between `phi(z)` and a target value, branch-reduced in the
    /// multiplicative cases so that it measures `log(h(z) / w)`.
    pub fn phi_residual(&self, z: Complex64, target: Complex64) -> Complex64 {
        let d = self.phi(z) - target;
        if self.is_multiplicative() {
            let two_pi = 2.0 * std::f64::consts::PI;
            Complex64::new(d.re, d.im - two_pi * (d.im / two_pi).round())
        } else {
            d
        }
    }

    /// Real points where `h` is singular or has a branch point.
    pub fn special_points(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self.terms.iter().map(|t| self.aux.point_value(t.point)).collect();
        match self.singular {
            Singular::Complex { .. } => {}
            Singular::Distinct { rho1, rho2, .. } => {
                pts.push(self.aux.point_value(rho1));
                pts.push(self.aux.point_value(rho2));
            }
            Singular::Double { rho0, .. } | Singular::Triple { rho0, .. } => pts.push(self.aux.point_value(rho0)),
        }
        pts.sort_by(f64::total_cmp);
        pts
    }

    /// Coefficients of the additive form: `(log coefficient, 1/(z-rho0), 1/(z-rho0)^2)`.
    pub fn additive_coefficients(&self) -> Option<(f64, f64, f64)> {
        match self.singular {
            Singular::Double { log_coeff, pole1, .. } => Some((log_coeff, pole1, 0.0)),
            Singular::Triple { log_coeff, pole1, pole2, .. } => Some((log_coeff, pole1, pole2)),
            _ => None,
        }
    }

    /// Rotation `theta` such that `exp(i theta) h` maps the upper half-plane
    /// into itself (distinct-real case): the piece just right of `rho1` goes
    /// to the negative real axis.
    pub fn half_plane_rotation(&self) -> Option<f64> {
        let Singular::Distinct { rho1, .. } = self.singular else { return None };
        let r1 = self.aux.point_value(rho1);
        let next = self.special_points().into_iter().find(|&p| p > r1);
        let x = match next {
            Some(p) => r1 + 0.5 * (p - r1),
            None => r1 + 1.0,
        };
        let x = if x == r1 { r1 + f64::EPSILON * r1.abs().max(1.0) } else { x };
        Some(std::f64::consts::PI - self.phi(Complex64::new(x, 0.0)).im)
    }

    pub fn case_data(&self) -> Case {
        self.classification.case
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SlitFamily;

    fn map(pairs: &[(f64, f64)]) -> KoenigsMap {
        let fam = SlitFamily::finite(pairs).unwrap();
        let aux = AuxiliaryFunction::with_default_truncation(&fam);
        KoenigsMap::from_aux(&aux, DEFAULT_Z0).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_slit_closed_form() {
        let m = map(&[(0.0, 1.0)]);
        for z in [c(0.5, 0.5), c(-2.0, 3.0), c(1.0, 0.01)] {
            let expected = (z * z + 4.0) / 3.0;
            assert!((m.eval(z).unwrap() - expected).norm() < 1e-13 * expected.norm().max(1.0));
        }
        assert!((m.eval(c(0.0, 0.0)).unwrap() - c(4.0 / 3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn double_root_closed_form() {
        let m = map(&[(4.0, 1.0)]);
        for z in [c(0.5, 0.5), c(3.0, 2.0), c(-1.0, 0.2)] {
            let expected = (z - 2.0).ln() + 2.0 / (z - 2.0);
            let diff = m.eval(z).unwrap() - expected;
            assert!((diff - (m.eval(c(0.0, 1.0)).unwrap() - (c(-2.0, 1.0).ln() + 2.0 / c(-2.0, 1.0)))).norm() < 1e-12);
            let dh = m.derivative(z);
            assert!((dh - (z - 4.0) / ((z - 2.0) * (z - 2.0))).norm() < 1e-12);
        }
        assert!(m.eval(c(3.0, 0.0)).unwrap().im.abs() < 1e-14);
        assert!((m.eval(c(0.0, 0.0)).unwrap().im - std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn triple_root_closed_form() {
        let r = 2.0 * 2f64.sqrt();
        let m = map(&[(-r, 1.0), (r, 1.0)]);
        let base = m.eval(c(0.0, 1.0)).unwrap() - (c(0.0, 1.0).ln() + 4.0 / c(-1.0, 0.0));
        for z in [c(0.5, 0.5), c(3.0, 2.0)] {
            let expected = z.ln() + 4.0 / (z * z) + base;
            assert!((m.eval(z).unwrap() - expected).norm() < 1e-8);
        }
    }

    #[test]
    fn distinct_real_tip_arguments() {
        let m = map(&[(-3.0, 1.0), (3.0, 1.0)]);
        let tips = m.tip_points();
        let rot = m.half_plane_rotation().unwrap();
        let args: Vec<f64> = tips.iter().map(|w| (w * Complex64::from_polar(1.0, rot)).arg()).collect();
        let pi = std::f64::consts::PI;
        assert!((args[0] + args[1] - pi).abs() < 1e-12);
        assert!((args[0] - 4.0 * pi / 9.0).abs() < 1e-12);
        assert!((args[1] - args[0] - pi / 9.0).abs() < 1e-12);
    }

    #[test]
    fn logarithmic_derivative_identity() {
        for pairs in [vec![(-1.0, 1.0), (1.0, 1.0)], vec![(-3.0, 1.0), (3.0, 1.0)], vec![(0.0, 1.0), (1.0, 1.0)]] {
            let m = map(&pairs);
            for z in [c(0.3, 0.4), c(-1.5, 2.0), c(2.5, 0.7)] {
                let h = m.eval(z).unwrap();
                let dh = m.derivative(z);
                let eps = 1e-6;
                let fd = (m.eval(z + eps).unwrap() - m.eval(z - eps).unwrap()) / (2.0 * eps);
                assert!((fd - dh).norm() < 1e-6 * (1.0 + dh.norm()), "{pairs:?} {z}");
                assert!((dh * m.aux().value(z) - m.rate() * h).norm() < 1e-10 * (1.0 + h.norm()));
            }
        }
    }
}
