//! Small numerical helpers shared by the evaluation modules.

use num_complex::Complex64;

/// Neumaier-compensated accumulator for complex sums.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    re: RealSum,
    im: RealSum,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Neumaier-compensated accumulator for real sums.
#[derive(Clone, Copy, Debug, Default)]
pub struct RealSum {
    sum: f64,
    carry: f64,
}

impl RealSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Principal `log(1 + d)`, accurate when `d` is small.
pub fn log1p(d: Complex64) -> Complex64 {
    if d.norm() < 0.5 {
        let re = 0.5 * (2.0 * d.re + d.norm_sqr()).ln_1p();
        let im = d.im.atan2(1.0 + d.re);
        Complex64::new(re, im)
    } else {
        (Complex64::new(1.0, 0.0) + d).ln()
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut r = a % two_pi;
    if r > std::f64::consts::PI {
        r -= two_pi;
    } else if r <= -std::f64::consts::PI {
        r += two_pi;
    }
    r
}

/// `m!` as a float.
pub fn factorial(m: u32) -> f64 {
    (1..=m).fold(1.0, |acc, k| acc * k as f64)
}

/// Log-time `tau = -ln(1 - t)`.
pub fn log_time(t: f64) -> f64 {
    -(-t).ln_1p()
}

/// Inverse of [`log_time`].
pub fn time_from_log(tau: f64) -> f64 {
    -(-tau).exp_m1()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = RealSum::new();
        s.add(1.0);
        for _ in 0..10 {
            s.add(1e-17);
        }
        s.add(-1.0);
        assert!((s.value() - 1e-16).abs() < 1e-30);
    }

    #[test]
    fn log1p_matches_ln_for_moderate_arguments() {
        let d = Complex64::new(0.3, -0.2);
        let a = log1p(d);
        let b = (Complex64::new(1.0, 0.0) + d).ln();
        assert!((a - b).norm() < 1e-15);
        let tiny = Complex64::new(1e-20, 3e-20);
        assert!((log1p(tiny) - tiny).norm() < 1e-35);
    }

    #[test]
    fn wrap_angle_range() {
        assert!((wrap_angle(3.0 * std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-12);
        assert!((wrap_angle(-0.5) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn log_time_round_trip() {
        for &t in &[0.0, 1e-9, 0.3, 0.999_999] {
            assert!((time_from_log(log_time(t)) - t).abs() < 1e-15);
        }
    }
}
