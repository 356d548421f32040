#![allow(dead_code)]

use octoport::CircuitParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Prints one verdict line and fails the test on FAIL.
pub fn verdict(name: &str, pass: bool, detail: impl AsRef<str>) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("{tag} {name}: {}", detail.as_ref());
    assert!(pass, "{name}: {}", detail.as_ref());
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Asymptotic Kolmogorov p-value `Q(sqrt(n) D)` with the usual small-sample correction.
pub fn kolmogorov_p(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let t = (sn + 0.12 + 0.11 / sn) * d;
    if t < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..200 {
        let k = k as f64;
        let term = 2.0 * (if k as i64 % 2 == 1 { 1.0 } else { -1.0 }) * (-2.0 * k * k * t * t).exp();
        s += term;
        if term.abs() < 1e-16 {
            break;
        }
    }
    s.clamp(0.0, 1.0)
}

/// One-sample KS statistic and p-value against `N(mean, sd^2)`.
pub fn ks_normal(sample: &[f64], mean: f64, sd: f64) -> (f64, f64) {
    let mut v = sample.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len() as f64;
    let d = v.iter().enumerate().fold(0.0f64, |acc, (i, &x)| {
        let f = normal_cdf((x - mean) / sd);
        acc.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    });
    (d, kolmogorov_p(d, v.len()))
}

/// Valid two-channel circuit with independent uniform parameters.
pub fn random_circuit<R: Rng>(r: &mut R) -> CircuitParams {
    let mut u = |lo: f64, hi: f64| r.random_range(lo..hi);
    CircuitParams {
        eta: [u(0.05, 0.95), u(0.05, 0.95), u(0.05, 0.95), u(0.05, 0.95)],
        eps: [u(0.3, 1.0), u(0.3, 1.0), u(0.3, 1.0), u(0.3, 1.0)],
        xi: [u(0.2, 5.0), u(0.2, 5.0), u(0.2, 5.0), u(0.2, 5.0)],
        psi1: u(-3.0, 3.0),
        psi2: u(-3.0, 3.0),
    }
}
