#![allow(clippy::needless_range_loop)]

mod common;

use common::{ks_normal, rng};
use num_complex::Complex;
use octoport::analytic::{coherent_means, vacuum_budget};
use octoport::circuit::Mode;
use octoport::detector::{c0, s0};
use octoport::laser::{ThetaMode, TimeGrid};
use octoport::mc_sim::{empirical_moments, simulate, simulate_counts, BatchMeta, EmpiricalMoments, Regime};
use octoport::rng::stream;
use octoport::{CircuitParams, DetectorParams, LaserParams, SampleBatch, SimConfig, Signal};
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, Poisson};

fn config(regime: Regime, circuit: CircuitParams, laser: LaserParams, kappa: f64, m: usize, seed: u64) -> SimConfig {
    let detector = DetectorParams::new(kappa, [0.0; 2], Some(&laser)).unwrap();
    SimConfig { regime, signal: Signal::Vacuum, mode: Mode::Double, m, seed, circuit, laser, detector, dt: None, electronic_noise: false }
}

fn z(a: f64, sa: f64, b: f64, sb: f64) -> f64 {
    (a - b) / (sa * sa + sb * sb).sqrt()
}

fn max_z(a: &EmpiricalMoments<f64>, b: &EmpiricalMoments<f64>) -> f64 {
    let mut w = 0.0f64;
    for j in 0..2 {
        w = w.max(z(a.mean[j], a.mean_se[j], b.mean[j], b.mean_se[j]).abs());
    }
    for (i, j) in [(0, 0), (1, 1), (0, 1)] {
        w = w.max(z(a.cov[i][j], a.cov_se[i][j], b.cov[i][j], b.cov_se[i][j]).abs());
    }
    w
}

#[test]
fn constant_intensity_counts_are_poisson() {
    let grid = TimeGrid::<f64>::new(0.0, 0.25, 9).unwrap();
    let rate = [6.0; 9];
    let mean = 12.0;
    let mut hist = vec![0u64; 40];
    let mut r = rng(3);
    let reps = 10_000;
    for _ in 0..reps {
        let n = simulate_counts(&grid, &rate, &mut r).unwrap().len();
        hist[n.min(39)] += 1;
    }
    let law = Poisson::new(mean).unwrap();
    // merge tails so every class expects at least five counts
    let (lo, hi) = (4usize, 21usize);
    let mut chi2 = 0.0;
    let mut classes = 0;
    let mut add = |obs: f64, p: f64| {
        let e = p * reps as f64;
        chi2 += (obs - e).powi(2) / e;
        classes += 1;
    };
    add(hist[..=lo].iter().sum::<u64>() as f64, (0..=lo as u64).map(|k| law.pmf(k)).sum());
    for k in lo + 1..hi {
        add(hist[k] as f64, law.pmf(k as u64));
    }
    add(hist[hi..].iter().sum::<u64>() as f64, 1.0 - (0..hi as u64).map(|k| law.pmf(k)).sum::<f64>());
    let p = 1.0 - ChiSquared::new((classes - 1) as f64).unwrap().cdf(chi2);
    assert!(p >= 0.01, "chi2 {chi2} on {classes} classes, p {p}");
}

#[test]
fn sinusoidal_intensity_passes_time_rescaling() {
    let n = 401;
    let grid = TimeGrid::<f64>::new(0.0, 0.01, n).unwrap();
    let rate: Vec<f64> = (0..n).map(|i| 20.0 * (1.0 + 0.8 * (2.0 * grid.t(i)).sin())).collect();
    // integrated intensity of the piecewise-linear rate
    let mut cum = vec![0.0; n];
    for i in 1..n {
        cum[i] = cum[i - 1] + 0.5 * grid.dt * (rate[i - 1] + rate[i]);
    }
    let big_lambda = |t: f64| {
        let i = ((t / grid.dt).floor() as usize).min(n - 2);
        let s = t - grid.t(i);
        let slope = (rate[i + 1] - rate[i]) / grid.dt;
        cum[i] + rate[i] * s + 0.5 * slope * s * s
    };
    let total = cum[n - 1];
    let mut u = Vec::new();
    let mut r = rng(8);
    while u.len() < 20_000 {
        for t in simulate_counts(&grid, &rate, &mut r).unwrap() {
            u.push(big_lambda(t) / total);
        }
    }
    // rescaled event times are uniform on (0, 1)
    let mut v = u.clone();
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() as f64;
    let d = v.iter().enumerate().fold(0.0f64, |acc, (i, &x)| acc.max(x - i as f64 / m).max((i + 1) as f64 / m - x));
    let p = common::kolmogorov_p(d, v.len());
    assert!(p >= 0.01, "D {d}, p {p}");
}

#[test]
fn balanced_vacuum_is_centred_and_uncorrelated() {
    let laser = LaserParams::new(1e6, 0.0, 10.0, 0.5, 1e3, ThetaMode::Uniform).unwrap();
    for regime in [Regime::FiniteLo, Regime::StrongLo] {
        let m_count = if regime == Regime::FiniteLo { 2000 } else { 20_000 };
        let cfg = config(regime, CircuitParams::balanced(0.85, 1.0), laser, 1e3, m_count, 12);
        let m = empirical_moments(&simulate(&cfg).unwrap()).unwrap();
        for j in 0..2 {
            assert!(m.mean[j].abs() < 3.0 * m.mean_se[j], "{regime:?} mean {j}");
        }
        assert!(m.correlation().abs() * (m_count as f64).sqrt() < 3.0, "{regime:?} r {}", m.correlation());
    }
}

#[test]
fn finite_and_strong_regimes_agree() {
    // 1e4 counts per response time
    let laser = LaserParams::new(1e8, 0.0, 10.0, 0.5, 1e4, ThetaMode::Uniform).unwrap();
    let circuit = CircuitParams::symmetric(0.45, 0.9, 1.0, 0.7);
    let finite = empirical_moments(&simulate(&config(Regime::FiniteLo, circuit, laser, 1e4, 400, 1)).unwrap()).unwrap();
    let strong = empirical_moments(&simulate(&config(Regime::StrongLo, circuit, laser, 1e4, 20_000, 2)).unwrap()).unwrap();
    let w = max_z(&finite, &strong);
    assert!(w < 4.0, "max combined z {w}");
}

#[test]
fn vacuum_moments_do_not_depend_on_eta1() {
    let laser = LaserParams::new(1e6, 0.0, 10.0, 0.5, 1e3, ThetaMode::Uniform).unwrap();
    let mut base = CircuitParams::symmetric(0.46, 0.9, 1.0, 1.2);
    let moments: Vec<_> = [0.3, 0.5, 0.7]
        .into_iter()
        .enumerate()
        .map(|(k, e1)| {
            base.eta[0] = e1;
            empirical_moments(&simulate(&config(Regime::StrongLo, base, laser, 1e3, 20_000, 40 + k as u64)).unwrap()).unwrap()
        })
        .collect();
    for k in 1..3 {
        let w = max_z(&moments[0], &moments[k]);
        assert!(w < 4.0, "eta1 case {k}: max z {w}");
    }
}

#[test]
fn strong_lo_vacuum_matches_budget() {
    let laser = LaserParams::new(1e6, 0.0, 10.0, 0.4, 2e3, ThetaMode::Uniform).unwrap();
    let cfg = config(Regime::StrongLo, CircuitParams::symmetric(0.44, 0.8, 1.3, 0.4), laser, 1e3, 50_000, 5);
    let m = empirical_moments(&simulate(&cfg).unwrap()).unwrap();
    let b = vacuum_budget(&cfg.coefficients().unwrap(), s0(&cfg.detector), c0(&cfg.detector, &laser), [0.0; 2]).unwrap();
    for j in 0..2 {
        assert!(((m.mean[j] - b.means[j]) / m.mean_se[j]).abs() < 3.0);
    }
    for (i, j) in [(0, 0), (1, 1), (0, 1)] {
        assert!(((m.cov[i][j] - b.cov[i][j]) / m.cov_se[i][j]).abs() < 5.0, "cov {i}{j}");
    }
}

#[test]
fn strong_lo_coherent_mean() {
    let laser = LaserParams::noiseless(1e6, ThetaMode::Fixed(0.0));
    let mut cfg = config(Regime::StrongLo, CircuitParams::balanced(0.9, 1.0), laser, 1e3, 20_000, 9);
    cfg.signal = Signal::Coherent { amplitude: Complex::new(300.0, -120.0), omega: 0.0 };
    let batch = simulate(&cfg).unwrap();
    let m = empirical_moments(&batch).unwrap();
    let coeff = cfg.coefficients().unwrap();
    for l in [0usize, 7] {
        let want = coherent_means(&coeff, &cfg.signal, &laser, &cfg.detector, cfg.detector.sample_time(l)).unwrap();
        for j in 0..2 {
            assert!(((m.mean[j] - want[j]) / m.mean_se[j]).abs() < 3.0, "channel {j}: {} vs {}", m.mean[j], want[j]);
        }
    }
    let sd = (coeff.kappa[0][1] * coeff.lambda_abs2 * s0(&cfg.detector)).sqrt();
    let centred: Vec<f64> = batch.column(0).iter().map(|x| x - m.mean[0]).collect();
    assert!(ks_normal(&centred, 0.0, sd).1 >= 0.01);
}

#[test]
fn synthetic_standard_normal_moments() {
    let mut r = stream(5, 0);
    let rows: Vec<[f64; 2]> = (0..20_000).map(|_| [StandardNormal.sample(&mut r), StandardNormal.sample(&mut r)]).collect();
    let cfg = config(Regime::StrongLo, CircuitParams::balanced(1.0, 1.0), LaserParams::noiseless(1.0, ThetaMode::Uniform), 1.0, rows.len(), 0);
    let meta = BatchMeta { regime: Regime::StrongLo, seed: 0, m: rows.len(), channels: 2, electronic_noise: false, config: cfg };
    let m = empirical_moments(&SampleBatch::from_rows(&rows, 2, meta)).unwrap();
    for j in 0..2 {
        assert!(m.mean[j].abs() < 3.0 * m.mean_se[j]);
        assert!((m.cov[j][j] - 1.0).abs() < 4.0 * m.cov_se[j][j]);
        assert!(m.skewness[j].abs() < 0.1 && m.excess_kurtosis[j].abs() < 0.2);
    }
    assert!(m.cov[0][1].abs() < 4.0 * m.cov_se[0][1]);
}
