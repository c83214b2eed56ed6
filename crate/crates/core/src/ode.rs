//! Direct integration of the Loewner equation
//! `dw/dt = sum 2 b_n / (w - k_n sqrt(1 - t))`, used as an independent check
//! on the conjugation formula. Dormand-Prince 5(4) with adaptive steps.

use crate::error::{Error, Result};
use crate::numerics::CompensatedSum;
use crate::pfunc::AuxiliaryFunction;
use num_complex::Complex64;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Distance to the driving points below which a trajectory counts as absorbed.
    pub absorb_tol: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-12, atol: 1e-14, max_steps: 2_000_000, absorb_tol: 1e-7 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OdeOutcome {
    Reached(Complex64),
    /// The trajectory hit a driving point at time `t`.
    Absorbed { t: f64, w: Complex64 },
}

impl OdeOutcome {
    pub fn reached(self) -> Option<Complex64> {
        match self {
            OdeOutcome::Reached(w) => Some(w),
            OdeOutcome::Absorbed { .. } => None,
        }
    }
}

/// Integrates `w' = f(s, w)` from `s0` to `s1 > s0`. `clearance` measures the
/// distance to the singular set; reaching `absorb_tol` stops the integration.
pub fn integrate<F, G>(f: F, clearance: G, s0: f64, w0: Complex64, s1: f64, opts: &OdeOptions) -> Result<OdeOutcome>
where
    F: Fn(f64, Complex64) -> Complex64,
    G: Fn(f64, Complex64) -> f64,
{
    let mut s = s0;
    let mut w = w0;
    if s1 <= s0 {
        return Ok(OdeOutcome::Reached(w));
    }
    let mut h = ((s1 - s0) * 1e-3).min(1e-2 * clearance(s, w).max(1e-12));
    let mut k1 = f(s, w);
    for _ in 0..opts.max_steps {
        if clearance(s, w) < opts.absorb_tol {
            return Ok(OdeOutcome::Absorbed { t: s, w });
        }
        if s + h >= s1 {
            h = s1 - s;
        }
        let k2 = f(s + C2 * h, w + h * (A21 * k1));
        let k3 = f(s + C3 * h, w + h * (A31 * k1 + A32 * k2));
        let k4 = f(s + C4 * h, w + h * (A41 * k1 + A42 * k2 + A43 * k3));
        let k5 = f(s + C5 * h, w + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
        let k6 = f(s + h, w + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
        let wn = w + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        let k7 = f(s + h, wn);
        let err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
        let scale = opts.atol + opts.rtol * w.norm().max(wn.norm());
        let ratio = err.norm() / scale;
        let finite = wn.re.is_finite() && wn.im.is_finite() && ratio.is_finite();
        if finite && ratio <= 1.0 {
            s += h;
            w = wn;
            k1 = k7;
            if s >= s1 {
                return Ok(OdeOutcome::Reached(w));
            }
            let grow = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
            h *= grow;
        } else {
            let shrink = if finite { (0.9 * ratio.powf(-0.2)).clamp(0.1, 0.5) } else { 0.1 };
            h *= shrink;
        }
        if h <= 1e-15 * s.abs().max(1e-300) || h < f64::MIN_POSITIVE {
            return Ok(OdeOutcome::Absorbed { t: s, w });
        }
    }
    Err(Error::Continuation { t: s, reason: "step budget exhausted in the ODE integrator".into() })
}

fn driving_sum(aux: &AuxiliaryFunction, w: Complex64, root: f64, sign: f64) -> Complex64 {
    let mut acc = CompensatedSum::new();
    for s in aux.slits() {
        acc.add(sign * 2.0 * s.b / (w - s.k * root));
    }
    acc.value()
}

fn clearance(aux: &AuxiliaryFunction, w: Complex64, root: f64) -> f64 {
    aux.slits().iter().map(|s| (w - s.k * root).norm()).fold(f64::INFINITY, f64::min)
}

/// `g_t(z)`: the forward Loewner flow started at `z`, or the time it is absorbed.
pub fn ode_oracle(aux: &AuxiliaryFunction, z: Complex64, t_end: f64, opts: &OdeOptions) -> Result<OdeOutcome> {
    check_time(t_end)?;
    let f = |t: f64, w: Complex64| driving_sum(aux, w, (1.0 - t).sqrt(), 1.0);
    let g = |t: f64, w: Complex64| clearance(aux, w, (1.0 - t).sqrt());
    integrate(f, g, 0.0, z, t_end, opts)
}

/// `f_t(z) = g_t^{-1}(z)` by the backward equation with reversed driving,
/// `dF/du = -sum 2 b_n / (F - k_n sqrt(1 - (t - u)))`, `u` from 0 to `t`.
pub fn inverse_oracle(aux: &AuxiliaryFunction, z: Complex64, t: f64, opts: &OdeOptions) -> Result<Complex64> {
    check_time(t)?;
    if !(z.im > 0.0) {
        return Err(Error::NotInUpperHalfPlane(z));
    }
    let f = |u: f64, w: Complex64| driving_sum(aux, w, (1.0 - (t - u)).sqrt(), -1.0);
    let g = |u: f64, w: Complex64| clearance(aux, w, (1.0 - (t - u)).sqrt());
    match integrate(f, g, 0.0, z, t, opts)? {
        OdeOutcome::Reached(w) => Ok(w),
        OdeOutcome::Absorbed { t, .. } => {
            Err(Error::Continuation { t, reason: "backward flow met a driving point".into() })
        }
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(0.0..1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!("time {t} must lie in [0, 1)")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SlitFamily;

    fn single() -> AuxiliaryFunction {
        AuxiliaryFunction::with_default_truncation(&SlitFamily::finite(&[(0.0, 1.0)]).unwrap())
    }

    #[test]
    fn single_slit_forward_closed_form() {
        let a = single();
        let w = ode_oracle(&a, Complex64::new(0.0, 3.0), 0.5, &OdeOptions::default()).unwrap().reached().unwrap();
        assert!((w - Complex64::new(0.0, 7f64.sqrt())).norm() < 1e-10);
    }

    #[test]
    fn single_slit_absorption_time() {
        let a = single();
        match ode_oracle(&a, Complex64::new(0.0, 1.0), 0.9, &OdeOptions::default()).unwrap() {
            OdeOutcome::Absorbed { t, .. } => assert!((t - 0.25).abs() < 1e-6, "{t}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_slit_inverse_closed_form() {
        let a = single();
        let f = inverse_oracle(&a, Complex64::new(0.0, 1.0), 0.2, &OdeOptions::default()).unwrap();
        assert!((f - Complex64::new(0.0, 1.8f64.sqrt())).norm() < 1e-10);
    }

    #[test]
    fn semigroup_property() {
        let fam = SlitFamily::finite(&[(-1.0, 0.5), (2.0, 1.0)]).unwrap();
        let a = AuxiliaryFunction::with_default_truncation(&fam);
        let opts = OdeOptions::default();
        let z = Complex64::new(0.3, 1.2);
        let direct = ode_oracle(&a, z, 0.6, &opts).unwrap().reached().unwrap();
        let f = |t: f64, w: Complex64| driving_sum(&a, w, (1.0 - t).sqrt(), 1.0);
        let g = |t: f64, w: Complex64| clearance(&a, w, (1.0 - t).sqrt());
        let mid = integrate(f, g, 0.0, z, 0.25, &opts).unwrap().reached().unwrap();
        let two = integrate(f, g, 0.25, mid, 0.6, &opts).unwrap().reached().unwrap();
        assert!((direct - two).norm() < 1e-10);
    }

    #[test]
    fn inverse_round_trip() {
        let fam = SlitFamily::finite(&[(-1.0, 0.5), (2.0, 1.0)]).unwrap();
        let a = AuxiliaryFunction::with_default_truncation(&fam);
        let opts = OdeOptions::default();
        let z = Complex64::new(0.4, 0.9);
        let f = inverse_oracle(&a, z, 0.7, &opts).unwrap();
        let back = ode_oracle(&a, f, 0.7, &opts).unwrap().reached().unwrap();
        assert!((back - z).norm() < 1e-9);
    }
}
