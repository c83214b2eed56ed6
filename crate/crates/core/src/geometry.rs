//! Asymptotic geometry of tip trajectories and of the image `h(H)`, plus the
//! closed-form harmonic measures used as angle references.

use crate::error::{Error, Result};
use crate::flow::Trajectory;
use crate::koenigs::KoenigsMap;
use crate::roots::CaseKind;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

pub const DELTA: f64 = 0.05;
pub const ORTHOGONAL_TOL: f64 = 0.02;
pub const RADIAL_PSI: f64 = 0.01;
pub const DEFAULT_SCAN_POINTS: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Spiral,
    /// Degenerate spiral (`|psi| < 0.01`): a straight approach to an interior point.
    Radial,
    NonTangential,
    Tangential,
    Orthogonal,
}

impl Verdict {
    /// Verdicts compatible with a root configuration.
    pub fn expected(case: CaseKind) -> &'static [Verdict] {
        match case {
            CaseKind::ComplexPair => &[Verdict::Spiral, Verdict::Radial],
            CaseKind::DistinctReal => &[Verdict::NonTangential, Verdict::Orthogonal],
            CaseKind::DoubleRoot => &[Verdict::Tangential],
            CaseKind::TripleRoot => &[Verdict::Orthogonal],
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ApproachOptions {
    pub tail_samples: usize,
    pub min_samples: usize,
    pub tail_dist: f64,
    pub max_width: f64,
}

impl Default for ApproachOptions {
    fn default() -> Self {
        Self { tail_samples: 32, min_samples: 20, tail_dist: 0.1, max_width: 0.05 }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ApproachReport {
    pub slit: usize,
    pub verdict: Verdict,
    /// Extrapolated `arg(gamma - limit)` at the limit.
    pub angle: f64,
    /// Disagreement between the linear and quadratic extrapolations.
    pub width: f64,
    /// Total increase of `arg(gamma - limit)` along the trace.
    pub winding: f64,
    /// `d arg / d log dist` over the tail; `tan psi` for spirals.
    pub spiral_slope: f64,
    pub tail_samples: usize,
}

/// Least-squares polynomial fit of `ys` against `xs`; returns the coefficients.
fn poly_fit(xs: &[f64], ys: &[f64], degree: usize) -> Vec<f64> {
    let m = degree + 1;
    let scale = xs.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(f64::MIN_POSITIVE);
    let mut a = vec![vec![0.0; m + 1]; m];
    for (&x, &y) in xs.iter().zip(ys) {
        let u = x / scale;
        let pows: Vec<f64> = (0..m).map(|j| u.powi(j as i32)).collect();
        for i in 0..m {
            for j in 0..m {
                a[i][j] += pows[i] * pows[j];
            }
            a[i][m] += pows[i] * y;
        }
    }
    for col in 0..m {
        let piv = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        for row in 0..m {
            if row != col && a[col][col] != 0.0 {
                let f = a[row][col] / a[col][col];
                for k in col..=m {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
    }
    (0..m).map(|i| a[i][m] / a[i][i] / scale.powi(i as i32)).collect()
}

/// Fits the approach of a trajectory to `limit`. The angle is extrapolated
/// to zero distance from the last tail samples with a quadratic in the
/// distance; the linear fit on the same samples sets the width.
pub fn approach_angle(traj: &Trajectory, limit: Complex64, opts: &ApproachOptions) -> Result<ApproachReport> {
    let pts: Vec<(f64, f64)> = traj
        .samples
        .iter()
        .filter(|s| s.tau > 0.0)
        .map(|s| {
            let d = s.z - limit;
            (d.norm(), d.arg())
        })
        .collect();
    let mut unwrapped = Vec::with_capacity(pts.len());
    let mut winding = 0.0;
    for (i, &(r, a)) in pts.iter().enumerate() {
        if i > 0 {
            let mut step = a - pts[i - 1].1;
            step -= 2.0 * PI * (step / (2.0 * PI)).round();
            winding += step;
        }
        unwrapped.push((r, pts.first().map_or(a, |p| p.1) + winding));
    }
    let tail: Vec<(f64, f64)> = unwrapped.iter().copied().filter(|&(r, _)| r <= opts.tail_dist && r > 0.0).collect();
    if tail.len() < opts.min_samples {
        return Err(Error::Precondition(format!(
            "slit {}: {} samples within {} of the limit, need {}",
            traj.slit,
            tail.len(),
            opts.tail_dist,
            opts.min_samples
        )));
    }
    let tail = &tail[tail.len().saturating_sub(opts.tail_samples)..];
    let rs: Vec<f64> = tail.iter().map(|p| p.0).collect();
    let args: Vec<f64> = tail.iter().map(|p| p.1).collect();
    let logs: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
    let spiral_slope = poly_fit(&logs, &args, 1)[1];

    let quad = poly_fit(&rs, &args, 2)[0];
    let lin = poly_fit(&rs, &args, 1)[0];
    let width = (quad - lin).abs();
    let report = |verdict, angle| ApproachReport {
        slit: traj.slit,
        verdict,
        angle,
        width,
        winding,
        spiral_slope,
        tail_samples: tail.len(),
    };

    if limit.im > 0.0 {
        if winding.abs() > 2.0 * PI {
            return Ok(report(Verdict::Spiral, f64::NAN));
        }
        if spiral_slope.atan().abs() < RADIAL_PSI {
            if width > opts.max_width {
                return Err(Error::NonConvergentAngle(format!("slit {}: radial angle width {width:.3e}", traj.slit)));
            }
            return Ok(report(Verdict::Radial, wrap_pi(quad)));
        }
        return Err(Error::NonConvergentAngle(format!(
            "slit {}: winding {winding:.3} below 2 pi with spiral slope {spiral_slope:.3e}",
            traj.slit
        )));
    }
    if width > opts.max_width {
        return Err(Error::NonConvergentAngle(format!("slit {}: angle width {width:.3e}", traj.slit)));
    }
    let angle = quad.clamp(0.0, PI);
    let verdict = if angle < DELTA || angle > PI - DELTA {
        Verdict::Tangential
    } else if (angle - 0.5 * PI).abs() <= ORTHOGONAL_TOL {
        Verdict::Orthogonal
    } else {
        Verdict::NonTangential
    };
    Ok(report(verdict, angle))
}

fn wrap_pi(a: f64) -> f64 {
    a - 2.0 * PI * ((a + PI) / (2.0 * PI)).floor()
}

/// `omega(z, [a, b], H) = arg((z - b)/(z - a)) / pi`.
pub fn harmonic_measure_halfplane(z: Complex64, a: f64, b: f64) -> Result<f64> {
    if !(a < b) {
        return Err(Error::InvalidParameter(format!("interval [{a}, {b}] is empty")));
    }
    if !(z.im > 0.0) {
        return Err(Error::NotInUpperHalfPlane(z));
    }
    Ok(((z - b) / (z - a)).arg() / PI)
}

/// Harmonic measure of the edge `arg = alpha` in the sector `alpha < arg < beta`.
pub fn harmonic_measure_sector(z: Complex64, alpha: f64, beta: f64) -> Result<f64> {
    let a = z.arg();
    if !(alpha < a && a < beta) || z == Complex64::new(0.0, 0.0) {
        return Err(Error::InvalidParameter(format!("{z} lies outside the sector ({alpha}, {beta})")));
    }
    Ok((beta - a) / (beta - alpha))
}

/// `min Im(exp(-i psi)(z - beta)(z - conj beta) h'(z)/h(z))` over the sample.
pub fn spirallike_check(map: &KoenigsMap, sample: &[Complex64]) -> Result<f64> {
    if map.case() != CaseKind::ComplexPair {
        return Err(Error::Precondition("spirallike check needs the complex case".into()));
    }
    let beta = map.limit_point();
    let rate = map.rate();
    let rot = Complex64::from_polar(1.0, -rate.arg());
    let mut worst = f64::INFINITY;
    for &z in sample {
        if !(z.im > 0.0) {
            return Err(Error::NotInUpperHalfPlane(z));
        }
        let q = rot * (z - beta) * (z - beta.conj()) * rate / map.aux().value(z);
        worst = worst.min(q.im);
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct UnivalenceReport {
    pub pairs: usize,
    pub collisions: usize,
    /// Smallest `|h(z) - h(w)| / (|h'(z)| |z - w|)` seen.
    pub min_separation: f64,
}

/// Box of the upper half-plane used for random sampling around the slits.
pub fn sample_box(map: &KoenigsMap) -> (f64, f64, f64, f64) {
    let poles = map.aux().poles();
    let lo = poles.first().copied().unwrap_or(0.0).min(map.limit_point().re);
    let hi = poles.last().copied().unwrap_or(0.0).max(map.limit_point().re);
    let spread = (hi - lo).max(1.0);
    (lo - 0.25 * spread, hi + 0.25 * spread, 0.05 * spread, 1.5 * spread)
}

pub fn random_points(map: &KoenigsMap, n: usize, seed: u64) -> Vec<Complex64> {
    let (x0, x1, y0, y1) = sample_box(map);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| Complex64::new(rng.gen_range(x0..x1), rng.gen_range(y0..y1))).collect()
}

/// Random-pair falsification test for injectivity of `h`.
pub fn univalence_check(map: &KoenigsMap, pairs: usize, seed: u64) -> UnivalenceReport {
    let pts = random_points(map, 2 * pairs, seed);
    let mut collisions = 0;
    let mut min_separation = f64::INFINITY;
    for pair in pts.chunks_exact(2) {
        let (z, w) = (pair[0], pair[1]);
        let (hz, hw) = (map.eval_unchecked(z), map.eval_unchecked(w));
        let scale = map.derivative(z).norm().max(map.derivative(w).norm()) * (z - w).norm();
        let sep = (hz - hw).norm() / scale;
        if !(sep > 1e-9) {
            collisions += 1;
        }
        min_separation = min_separation.min(sep);
    }
    UnivalenceReport { pairs, collisions, min_separation }
}

pub const FLAG_TIP: u32 = 1;
pub const FLAG_NEAR_SINGULAR: u32 = 2;
pub const FLAG_ARTIFACT: u32 = 4;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScanSample {
    pub x: f64,
    pub h: Complex64,
    pub phi: Complex64,
    pub flags: u32,
}

#[derive(Clone, Copy, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SectorReport {
    /// Complex case: sector bounded by `psi`-spirals.
    Spiral { psi: f64, amplitude: f64, amplitude_scan: f64 },
    /// Distinct-real case, in the gauge where `h(H)` lies in the upper half-plane.
    /// `theta1` and `theta2` are the boundary arguments far right and far left;
    /// `tip_amplitude` compares the outermost tips instead.
    Sector { theta1: f64, theta2: f64, amplitude: f64, amplitude_scan: f64, tip_amplitude: f64, rotation: f64 },
    /// Double and triple cases: the slit-free strip `0 < Im h < pi`.
    Strip { lower: f64, upper: f64, width: f64, width_scan: f64, tip_bound: f64, strip_clear: bool },
}

impl SectorReport {
    /// Difference between the predicted and the scanned amplitude.
    pub fn discrepancy(&self) -> f64 {
        match *self {
            SectorReport::Spiral { amplitude, amplitude_scan, .. } | SectorReport::Sector { amplitude, amplitude_scan, .. } => {
                (amplitude - amplitude_scan).abs()
            }
            SectorReport::Strip { width, width_scan, .. } => (width - width_scan).abs(),
        }
    }

    pub fn amplitude(&self) -> f64 {
        match *self {
            SectorReport::Spiral { amplitude, .. } | SectorReport::Sector { amplitude, .. } => amplitude,
            SectorReport::Strip { width, .. } => width,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ImageScan {
    pub samples: Vec<ScanSample>,
    pub report: SectorReport,
}

/// Real grid for boundary scans: `points` nodes stretched by `sinh` around
/// the slits out to `1e8` times their spread, nudged off the special points,
/// plus the tips themselves.
pub fn scan_grid(map: &KoenigsMap, points: usize) -> Vec<f64> {
    let poles = map.aux().poles();
    let mut special = map.special_points();
    special.extend_from_slice(poles);
    special.sort_by(f64::total_cmp);
    let lo = special.first().copied().unwrap_or(-1.0);
    let hi = special.last().copied().unwrap_or(1.0);
    let center = 0.5 * (lo + hi);
    let scale = map.aux().family().gap().min(1.0).max(1e-3) * 0.5;
    let reach = 1e8 * (1.0 + hi - lo);
    let umax = (reach / scale).asinh();
    let n = points.max(2);
    let mut xs: Vec<f64> = (0..n)
        .map(|i| {
            let u = -umax + 2.0 * umax * i as f64 / (n - 1) as f64;
            center + scale * u.sinh()
        })
        .collect();
    for x in xs.iter_mut() {
        for &p in &special {
            let gap = 1e-9 * (1.0 + p.abs());
            if (*x - p).abs() <= gap {
                *x = if *x >= p { p + 2.0 * gap } else { p - 2.0 * gap };
            }
        }
    }
    xs.extend_from_slice(poles);
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// `h` on the real grid and the derived sector or strip report.
pub fn image_boundary_scan(map: &KoenigsMap, xs: &[f64]) -> ImageScan {
    let poles = map.aux().poles();
    let special = map.special_points();
    let intervals = &map.classification().intervals.intervals;
    let artifact = |x: f64| intervals.iter().any(|iv| iv.artifact && x > iv.lo && x < iv.hi);
    let raw = map.boundary_scan(xs);
    let samples: Vec<ScanSample> = raw
        .iter()
        .map(|s| {
            let mut flags = 0;
            if poles.binary_search_by(|p| p.total_cmp(&s.x)).is_ok() {
                flags |= FLAG_TIP;
            }
            if special.iter().any(|&p| (s.x - p).abs() <= 1e-6 * (1.0 + p.abs())) {
                flags |= FLAG_NEAR_SINGULAR;
            }
            if artifact(s.x) {
                flags |= FLAG_ARTIFACT;
            }
            ScanSample { x: s.x, h: s.h, phi: s.phi, flags }
        })
        .collect();
    let report = sector_report_from(map, &samples);
    ImageScan { samples, report }
}

/// Predicted sector or strip, cross-checked against a default boundary scan.
pub fn sector_report(map: &KoenigsMap) -> SectorReport {
    image_boundary_scan(map, &scan_grid(map, DEFAULT_SCAN_POINTS)).report
}

fn sector_report_from(map: &KoenigsMap, samples: &[ScanSample]) -> SectorReport {
    let pf = map.partial_fraction();
    match map.case() {
        CaseKind::ComplexPair => {
            let psi = pf.psi().unwrap_or(0.0);
            let a_sum: f64 = pf.a_coefficients().unwrap_or_default().iter().sum();
            let amplitude = PI * a_sum / psi.cos();
            let invariant = |phi: Complex64| phi.im - psi.tan() * phi.re;
            let first = samples.first().map_or(0.0, |s| invariant(s.phi));
            let last = samples.last().map_or(0.0, |s| invariant(s.phi));
            SectorReport::Spiral { psi, amplitude, amplitude_scan: (first - last).abs() }
        }
        CaseKind::DistinctReal => {
            let rotation = map.half_plane_rotation().unwrap_or(0.0);
            let p1 = match map.case_data() {
                crate::roots::Case::DistinctReal { rho1, .. } => rho1.derivative,
                _ => 0.0,
            };
            let gauged = |s: &ScanSample| wrap_pi(s.phi.im + rotation);
            let theta1 = samples.last().map_or(0.0, gauged);
            let theta2 = samples.first().map_or(0.0, gauged);
            let mut tips = samples.iter().filter(|s| s.flags & FLAG_TIP != 0);
            let first_tip = tips.next().map_or(0.0, gauged);
            let last_tip = tips.last().map_or(first_tip, gauged);
            SectorReport::Sector {
                theta1,
                theta2,
                amplitude: p1 * PI,
                amplitude_scan: theta1 - theta2,
                tip_amplitude: last_tip - first_tip,
                rotation,
            }
        }
        CaseKind::DoubleRoot | CaseKind::TripleRoot => {
            let lower = samples.last().map_or(0.0, |s| s.phi.im);
            let upper = samples.first().map_or(PI, |s| s.phi.im);
            let tol = 1e-9;
            let strip_clear = samples
                .iter()
                .filter(|s| s.flags & FLAG_NEAR_SINGULAR == 0)
                .all(|s| s.phi.im <= lower + tol || s.phi.im >= upper - tol);
            let tip_bound = samples.iter().map(|s| s.phi.im.abs()).fold(0.0, f64::max);
            SectorReport::Strip { lower, upper, width: PI, width_scan: upper - lower, tip_bound, strip_clear }
        }
    }
}

#[cfg(test)]
mod tests;
