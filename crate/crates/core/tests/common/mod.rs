#![allow(dead_code)]

use loewner_core::SlitFamily;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TRIPLE_K: f64 = 2.0 * std::f64::consts::SQRT_2;

pub fn canonical() -> Vec<(&'static str, SlitFamily)> {
    vec![
        ("single", SlitFamily::finite(&[(0.0, 1.0)]).unwrap()),
        ("complex-pair", SlitFamily::finite(&[(-1.0, 1.0), (1.0, 1.0)]).unwrap()),
        ("distinct-real", SlitFamily::finite(&[(-3.0, 1.0), (3.0, 1.0)]).unwrap()),
        ("double-root", SlitFamily::finite(&[(4.0, 1.0)]).unwrap()),
        ("triple-root", SlitFamily::finite(&[(-TRIPLE_K, 1.0), (TRIPLE_K, 1.0)]).unwrap()),
    ]
}

pub fn lattice() -> SlitFamily {
    SlitFamily::geometric_lattice(1.0, 0.1, 0.5, 64).unwrap()
}

/// Random admissible finite family: sorted `k` in `[-10, 10]` with gaps of at
/// least 0.5, weights in `[0.05, 3]`.
pub fn random_family(rng: &mut ChaCha8Rng, min: usize, max: usize) -> Vec<(f64, f64)> {
    let m = rng.gen_range(min..=max);
    loop {
        let mut ks: Vec<f64> = (0..m).map(|_| rng.gen_range(-10.0..10.0)).collect();
        ks.sort_by(f64::total_cmp);
        if ks.windows(2).all(|w| w[1] - w[0] >= 0.5) {
            return ks.into_iter().map(|k| (k, rng.gen_range(0.05..3.0))).collect();
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Coefficients (lowest degree first) of `z prod(z - k) + sum 4 b prod_{m != n}(z - k_m)`.
pub fn numerator(pairs: &[(f64, f64)]) -> Vec<f64> {
    fn mul_linear(p: &[f64], root: f64) -> Vec<f64> {
        let mut out = vec![0.0; p.len() + 1];
        for (i, &c) in p.iter().enumerate() {
            out[i + 1] += c;
            out[i] -= root * c;
        }
        out
    }
    let mut full = vec![1.0];
    for &(k, _) in pairs {
        full = mul_linear(&full, k);
    }
    let mut out = mul_linear(&full, 0.0);
    for (n, &(_, b)) in pairs.iter().enumerate() {
        let mut part = vec![1.0];
        for (m, &(k, _)) in pairs.iter().enumerate() {
            if m != n {
                part = mul_linear(&part, k);
            }
        }
        for (i, c) in part.iter().enumerate() {
            out[i] += 4.0 * b * c;
        }
    }
    out
}

/// All zeros of a monic polynomial by Weierstrass iteration, polished.
pub fn durand_kerner(coeffs: &[f64]) -> Vec<Complex64> {
    let deg = coeffs.len() - 1;
    let lead = coeffs[deg];
    let eval = |z: Complex64| coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c / lead);
    let radius = 1.0 + coeffs[..deg].iter().map(|c| (c / lead).abs()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..deg).map(|i| radius * seed.powu(i as u32)).collect();
    for _ in 0..5000 {
        let mut delta = 0.0f64;
        for i in 0..deg {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..deg {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            let step = eval(z[i]) / den;
            z[i] -= step;
            delta = delta.max(step.norm() / (1.0 + z[i].norm()));
        }
        if delta < 1e-15 {
            break;
        }
    }
    z
}

/// Zeros of `P` from the polynomial oracle: `(real zeros sorted, zeros with Im > 0)`.
pub fn polynomial_zeros(pairs: &[(f64, f64)]) -> (Vec<f64>, Vec<Complex64>) {
    let zs = durand_kerner(&numerator(pairs));
    let scale = 1.0 + pairs.iter().map(|p| p.0.abs()).fold(0.0, f64::max);
    let mut real: Vec<f64> = zs.iter().filter(|z| z.im.abs() <= 1e-6 * scale).map(|z| z.re).collect();
    real.sort_by(f64::total_cmp);
    let upper = zs.into_iter().filter(|z| z.im > 1e-6 * scale).collect();
    (real, upper)
}
