//! The flow `f(z, t) = h^{-1}(act_t(h(z / sqrt(1 - t))))` and the tip
//! trajectories `t -> f(k_n sqrt(1 - t), t)`.
//!
//! Time is handled in log-time `tau = -log(1 - t)`, where the action on `h`
//! is linear. Inversion of `h` is damped Newton with continuation in `tau`;
//! Newton works on `log h` (or `h` in the additive cases), whose derivative
//! is `c / P`.

use crate::error::{Error, Result};
use crate::koenigs::KoenigsMap;
use crate::numerics::{log_time, time_from_log, CompensatedSum};
use crate::ode::{inverse_oracle, ode_oracle, OdeOptions, OdeOutcome};
use crate::pfunc::AuxiliaryFunction;
use crate::roots::CaseKind;
use num_complex::Complex64;
use serde::Serialize;

/// Log-time spacing of the default grid, `t_k = 1 - 2^(-k/8)`.
pub const GRID_STEP: f64 = std::f64::consts::LN_2 / 8.0;
pub const DEFAULT_T_MAX: f64 = 1.0 - 1e-6;

#[derive(Clone, Copy, Debug)]
pub struct FlowOptions {
    /// Accepted inversion residual (relative for multiplicative maps).
    pub residual_tol: f64,
    pub max_newton: usize,
    pub min_step: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self { residual_tol: 1e-10, max_newton: 60, min_step: 1e-13 }
    }
}

#[derive(Clone, Debug)]
pub enum TimeGrid {
    /// `t_k = 1 - 2^(-k/8)` up to `t_max`, which is always included.
    Geometric { t_max: f64 },
    /// Explicit times in increasing order.
    Times(Vec<f64>),
    /// Explicit log-times in increasing order.
    LogTimes(Vec<f64>),
}

impl Default for TimeGrid {
    fn default() -> Self {
        TimeGrid::Geometric { t_max: DEFAULT_T_MAX }
    }
}

impl TimeGrid {
    pub fn log_times(&self) -> Result<Vec<f64>> {
        let taus = match self {
            TimeGrid::Geometric { t_max } => {
                if !(*t_max > 0.0 && *t_max < 1.0) {
                    return Err(Error::InvalidParameter(format!("t_max = {t_max} must lie in (0, 1)")));
                }
                let end = log_time(*t_max);
                let mut v: Vec<f64> = (1..).map(|k| k as f64 * GRID_STEP).take_while(|&s| s < end).collect();
                v.push(end);
                v
            }
            TimeGrid::Times(ts) => {
                if ts.iter().any(|t| !(0.0..1.0).contains(t)) {
                    return Err(Error::InvalidParameter("grid times must lie in [0, 1)".into()));
                }
                ts.iter().map(|&t| log_time(t)).collect()
            }
            TimeGrid::LogTimes(v) => v.clone(),
        };
        if taus.windows(2).any(|w| w[1] <= w[0]) || taus.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return Err(Error::InvalidParameter("time grid must be increasing and finite".into()));
        }
        Ok(taus)
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Sample {
    pub t: f64,
    pub tau: f64,
    pub z: Complex64,
    pub dist: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub slit: usize,
    pub k: f64,
    pub limit: Complex64,
    pub samples: Vec<Sample>,
    /// Set when continuation stopped early; `samples` holds what was reached.
    pub failure: Option<String>,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has its starting sample")
    }

    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }
}

/// Stopping rule for tracing past the time grid in log-time.
#[derive(Clone, Copy, Debug)]
pub struct TailOptions {
    /// Stop once the distance to the limit is below this (relative to `1 + |limit|`).
    pub target_dist: f64,
    pub tau_cap: f64,
    /// Stop a spiralling trajectory once it has wound this far around `beta`.
    pub winding_cap: f64,
    /// Always stop below this distance (relative), where inversion runs out of precision.
    pub dist_floor: f64,
}

impl Default for TailOptions {
    fn default() -> Self {
        Self { target_dist: 1e-3, tau_cap: 1e8, winding_cap: 6.0 * std::f64::consts::PI, dist_floor: 1e-7 }
    }
}

#[derive(Clone, Debug)]
pub struct FlowEvaluator {
    map: KoenigsMap,
    opts: FlowOptions,
}

struct Solved {
    z: Complex64,
    iterations: usize,
}

impl FlowEvaluator {
    pub fn new(map: KoenigsMap) -> Self {
        Self { map, opts: FlowOptions::default() }
    }

    pub fn with_options(map: KoenigsMap, opts: FlowOptions) -> Self {
        Self { map, opts }
    }

    pub fn map(&self) -> &KoenigsMap {
        &self.map
    }

    pub fn limit(&self) -> Complex64 {
        self.map.limit_point()
    }

    fn residual_scale(&self, target: Complex64) -> f64 {
        1.0 + target.norm()
    }

    fn newton(&self, target: Complex64, seed: Complex64) -> Option<Solved> {
        let rate = self.map.rate();
        let aux = self.map.aux();
        let scale = self.residual_scale(target);
        let mut z = seed;
        if !(z.im > 0.0) {
            return None;
        }
        let mut last = f64::INFINITY;
        for it in 0..self.opts.max_newton {
            let d = self.map.phi_residual(z, target);
            if !(d.re.is_finite() && d.im.is_finite()) {
                return None;
            }
            let r = d.norm();
            if r <= 1e-14 * scale || (r <= self.opts.residual_tol * scale && r >= 0.5 * last) {
                return Some(Solved { z, iterations: it });
            }
            last = r;
            let mut step = -d * aux.value(z) / rate;
            if !(step.re.is_finite() && step.im.is_finite()) {
                return None;
            }
            let cap = 0.5 * (1.0 + z.norm());
            if step.norm() > cap {
                step *= cap / step.norm();
            }
            let mut next = z + step;
            let mut halvings = 0;
            while !(next.im > 0.0) {
                step *= 0.5;
                next = z + step;
                halvings += 1;
                if halvings > 80 {
                    return None;
                }
            }
            if step.norm() <= 2.0 * f64::EPSILON * next.norm() {
                let r = self.map.phi_residual(next, target).norm();
                return (r <= self.opts.residual_tol * scale).then_some(Solved { z: next, iterations: it });
            }
            z = next;
        }
        let d = self.map.phi_residual(z, target);
        (d.norm() <= self.opts.residual_tol * scale).then_some(Solved { z, iterations: self.opts.max_newton })
    }

    /// `h^{-1}(w)` by Newton from `seed`.
    pub fn invert_h(&self, w: Complex64, seed: Complex64) -> Result<Complex64> {
        let target = if self.map.is_multiplicative() { w.ln() } else { w };
        let solved = self.newton(target, seed).ok_or_else(|| Error::Continuation {
            t: f64::NAN,
            reason: format!("Newton did not invert h at w = {w}"),
        })?;
        let back = self.map.eval_unchecked(solved.z);
        if (back - w).norm() > self.opts.residual_tol * (1.0 + w.norm()) * 10.0 {
            return Err(Error::Continuation { t: f64::NAN, reason: "inversion residual too large".into() });
        }
        Ok(solved.z)
    }

    fn max_step(&self, s: f64) -> f64 {
        if self.map.is_multiplicative() {
            0.7 / self.map.rate().norm()
        } else {
            (0.25 * s).max(0.5)
        }
    }

    /// Follows the solution of `phi(z) = target(s)` from `(s0, z0)` through
    /// the checkpoints, reporting each. Returns the failure message if any.
    fn follow<T, R>(&self, target: T, s0: f64, z0: Complex64, first: Option<(f64, Complex64)>, checkpoints: &[f64], mut record: R) -> Option<String>
    where
        T: Fn(f64) -> Complex64,
        R: FnMut(f64, Complex64, usize),
    {
        let mut s = s0;
        let mut z = z0;
        let mut prev: Option<(f64, Complex64)> = None;
        let mut h = checkpoints.first().map(|c| (c - s0).min(0.05)).unwrap_or(0.05);
        if let Some((s1, seed)) = first {
            match self.newton(target(s1), seed) {
                Some(sol) => {
                    prev = Some((s, z));
                    s = s1;
                    z = sol.z;
                    h = s1;
                }
                None => return Some(format!("could not start continuation at tau = {s1:e}")),
            }
        }
        for (ci, &c) in checkpoints.iter().enumerate() {
            while s < c {
                let step = h.min(c - s);
                let s_new = if step >= c - s { c } else { s + step };
                let seed = match prev {
                    Some((sp, zp)) if s > sp => {
                        let guess = z + (z - zp) * ((s_new - s) / (s - sp));
                        if guess.im > 0.0 {
                            guess
                        } else {
                            z
                        }
                    }
                    _ => z,
                };
                match self.newton(target(s_new), seed).or_else(|| self.newton(target(s_new), z)) {
                    Some(sol) => {
                        prev = Some((s, z));
                        s = s_new;
                        z = sol.z;
                        let cap = self.max_step(s);
                        if sol.iterations <= 5 {
                            h = (h * 1.5).min(cap);
                        } else if sol.iterations > 12 {
                            h *= 0.5;
                        }
                        h = h.min(cap).max(self.opts.min_step * (1.0 + s));
                    }
                    None => {
                        h *= 0.25;
                        if h < self.opts.min_step * (1.0 + s) {
                            return Some(format!("continuation stalled at tau = {s:e}"));
                        }
                    }
                }
            }
            record(c, z, ci);
        }
        None
    }

    /// `f(z, t)` for `z` in the upper half-plane and `0 <= t < 1`.
    pub fn eval_f(&self, z: Complex64, t: f64) -> Result<Complex64> {
        if !(z.im > 0.0) {
            return Err(Error::NotInUpperHalfPlane(z));
        }
        if !(0.0..1.0).contains(&t) {
            return Err(Error::InvalidParameter(format!("time {t} must lie in [0, 1)")));
        }
        if t == 0.0 {
            return Ok(z);
        }
        let tau = log_time(t);
        let target = |s: f64| self.map.act_phi(self.map.phi(z * (0.5 * s).exp()), s);
        let mut out = z;
        match self.follow(target, 0.0, z, None, &[tau], |_, w, _| out = w) {
            None => Ok(out),
            Some(reason) => Err(Error::Continuation { t, reason }),
        }
    }

    /// Tip trajectory of slit `n` on the given time grid. The first sample is
    /// `(0, k_n)`.
    pub fn trace_tip(&self, n: usize, grid: &TimeGrid) -> Result<Trajectory> {
        let taus = grid.log_times()?;
        self.trace_log_times(n, &taus)
    }

    fn trace_log_times(&self, n: usize, taus: &[f64]) -> Result<Trajectory> {
        let aux = self.map.aux();
        let slit = *aux.slits().get(n).ok_or_else(|| Error::InvalidParameter(format!("no slit with index {n}")))?;
        let k = slit.k;
        let limit = self.limit();
        let start = Complex64::new(k, 0.0);
        let mut samples = vec![Sample { t: 0.0, tau: 0.0, z: start, dist: (start - limit).norm() }];
        let phi_k = self.map.phi(start);
        let target = |s: f64| self.map.act_phi(phi_k, s);
        let taus: Vec<f64> = taus.iter().copied().filter(|&s| s > 0.0).collect();
        if taus.is_empty() {
            return Ok(Trajectory { slit: n, k, limit, samples, failure: None });
        }
        let s1 = (taus[0] * 1e-3).min(1e-6 / (1.0 + slit.b));
        let seed = Complex64::new(k, 2.0 * (slit.b * s1).sqrt());
        let failure = self.follow(target, 0.0, start, Some((s1, seed)), &taus, |s, z, _| {
            samples.push(Sample { t: time_from_log(s), tau: s, z, dist: (z - limit).norm() })
        });
        Ok(Trajectory { slit: n, k, limit, samples, failure })
    }

    /// Traces slit `n` on `grid` and then keeps going in log-time, past the
    /// point where `t` is representable, until the tail reaches the limit.
    pub fn trace_to_limit(&self, n: usize, grid: &TimeGrid, tail: &TailOptions) -> Result<Trajectory> {
        let mut traj = self.trace_tip(n, grid)?;
        if traj.failure.is_some() {
            return Ok(traj);
        }
        let limit = self.limit();
        let scale = 1.0 + limit.norm();
        let spiral = self.map.case() == CaseKind::ComplexPair;
        let phi_k = self.map.phi(Complex64::new(traj.k, 0.0));
        let mut winding = 0.0;
        for w in traj.samples.windows(2).skip(1) {
            winding += ((w[1].z - limit) / (w[0].z - limit)).arg();
        }
        let floor = tail.dist_floor * scale;
        loop {
            let last = *traj.last();
            let done_dist = last.dist <= tail.target_dist * scale;
            let done_spiral = !spiral || winding.abs() >= tail.winding_cap;
            if (done_dist && done_spiral) || last.dist <= floor || last.tau >= tail.tau_cap {
                break;
            }
            let h = if self.map.is_multiplicative() {
                0.35 / self.map.rate().norm()
            } else {
                0.1 * last.tau.max(1.0)
            };
            let next = (last.tau + h).min(tail.tau_cap);
            let target = |s: f64| self.map.act_phi(phi_k, s);
            let mut got = None;
            let failure = self.follow(target, last.tau, last.z, None, &[next], |s, z, _| got = Some((s, z)));
            if let Some(f) = failure {
                if !done_dist {
                    traj.failure = Some(f);
                }
                break;
            }
            let (s, z) = got.expect("checkpoint recorded");
            winding += ((z - limit) / (last.z - limit)).arg();
            traj.samples.push(Sample { t: time_from_log(s), tau: s, z, dist: (z - limit).norm() });
        }
        Ok(traj)
    }
}

/// One `(z, t)` comparison of the flow against the ODE and the PDE.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FlowCheck {
    pub z: Complex64,
    pub t: f64,
    /// `|g_t(f(z, t)) - z|` with `g_t` integrated forward.
    pub round_trip: f64,
    /// `|f(z, t) - F|` with `F` from the backward equation.
    pub oracle: f64,
    pub pde: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowValidation {
    pub checks: Vec<FlowCheck>,
    pub worst_round_trip: f64,
    pub worst_oracle: f64,
    pub worst_pde: f64,
}

/// `sum 2 b_n / (z - k_n sqrt(1 - t))`.
pub fn loewner_field(aux: &AuxiliaryFunction, z: Complex64, t: f64) -> Complex64 {
    let root = (1.0 - t).sqrt();
    let mut s = CompensatedSum::new();
    for sl in aux.slits() {
        s.add(2.0 * sl.b / (z - sl.k * root));
    }
    s.value()
}

/// `|df/dt + f'(z) sum 2 b_n / (z - k_n sqrt(1 - t))|` by central differences.
pub fn pde_residual(ev: &FlowEvaluator, z: Complex64, t: f64) -> Result<f64> {
    let ht = 1e-4 * t.min(1.0 - t);
    let hz = 1e-4 * z.im.min(1.0);
    let dt = (ev.eval_f(z, t + ht)? - ev.eval_f(z, t - ht)?) / (2.0 * ht);
    let hz_c = Complex64::new(hz, 0.0);
    let dz = (ev.eval_f(z + hz_c, t)? - ev.eval_f(z - hz_c, t)?) / (2.0 * hz);
    Ok((dt + dz * loewner_field(ev.map().aux(), z, t)).norm())
}

/// Default validation grid: five points above the slits at five times.
pub fn default_samples(aux: &AuxiliaryFunction) -> Vec<(Complex64, f64)> {
    let poles = aux.poles();
    let lo = poles.first().copied().unwrap_or(0.0);
    let hi = poles.last().copied().unwrap_or(0.0);
    let spread = (hi - lo).max(2.0);
    let zs = [(-0.4, 0.3), (-0.1, 1.0), (0.15, 0.6), (0.35, 1.5), (0.0, 2.5)]
        .map(|(x, y)| Complex64::new(0.5 * (lo + hi) + x * spread, y * spread));
    let ts = [0.1, 0.3, 0.5, 0.7, 0.9];
    zs.iter().flat_map(|&z| ts.iter().map(move |&t| (z, t))).collect()
}

/// Compares the conjugation formula against the ODE in both directions and
/// checks the PDE, at each sample.
pub fn validate_flow(ev: &FlowEvaluator, samples: &[(Complex64, f64)], ode: &OdeOptions) -> Result<FlowValidation> {
    let aux = ev.map().aux();
    let mut checks = Vec::with_capacity(samples.len());
    for &(z, t) in samples {
        let f = ev.eval_f(z, t)?;
        let round_trip = match ode_oracle(aux, f, t, ode)? {
            OdeOutcome::Reached(w) => (w - z).norm(),
            OdeOutcome::Absorbed { .. } => f64::INFINITY,
        };
        let oracle = (inverse_oracle(aux, z, t, ode)? - f).norm();
        let pde = pde_residual(ev, z, t)?;
        checks.push(FlowCheck { z, t, round_trip, oracle, pde });
    }
    let worst = |g: fn(&FlowCheck) -> f64| checks.iter().map(g).fold(0.0, f64::max);
    Ok(FlowValidation {
        worst_round_trip: worst(|c| c.round_trip),
        worst_oracle: worst(|c| c.oracle),
        worst_pde: worst(|c| c.pde),
        checks,
    })
}

/// `(y, |g_t(iy) - iy|, 4 sum b / y)` for each height.
pub fn hydrodynamic_check(aux: &AuxiliaryFunction, t: f64, ys: &[f64], ode: &OdeOptions) -> Result<Vec<(f64, f64, f64)>> {
    let total: f64 = aux.slits().iter().map(|s| s.b).sum();
    ys.iter()
        .map(|&y| {
            let z = Complex64::new(0.0, y);
            let w = ode_oracle(aux, z, t, ode)?.reached().ok_or_else(|| Error::Continuation {
                t,
                reason: format!("point {z} absorbed"),
            })?;
            Ok((y, (w - z).norm(), 4.0 * total / y))
        })
        .collect()
}
