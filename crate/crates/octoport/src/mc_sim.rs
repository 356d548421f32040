//! Monte Carlo photocurrent samples: photon counting at finite oscillator
//! intensity, or the Gaussian law of the strong-oscillator limit.

use std::io::Write;

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{derive_coefficients, single_homodyne_params, CircuitParams, Coefficients, Mode};
use crate::detector::{r_l_squared, response_weighted_complex, response_weighted_intensity, s0_window, DetectorParams, MIN_WINDOW_STEPS};
use crate::error::{domain, Error, Result};
use crate::laser::{default_dt, sample_trajectory_with, LaserParams, LaserTrajectory, TimeGrid};
use crate::real::Real;
use crate::rng::stream;

/// Largest expected number of photon events per channel and window.
pub const MAX_EXPECTED_EVENTS: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    FiniteLo,
    StrongLo,
}

/// State of the signal port.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Signal<T> {
    #[default]
    Vacuum,
    /// Coherent state with amplitude path `fs(t) = amplitude * e^{-i omega t}`.
    Coherent { amplitude: Complex<T>, omega: T },
}

impl<T: Real> Signal<T> {
    pub fn at(&self, t: T) -> Complex<T> {
        match *self {
            Signal::Vacuum => Complex::new(T::zero(), T::zero()),
            Signal::Coherent { amplitude, omega } => amplitude * Complex::from_polar(T::one(), -omega * t),
        }
    }

    pub fn is_vacuum(&self) -> bool {
        matches!(self, Signal::Vacuum)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig<T> {
    pub regime: Regime,
    pub signal: Signal<T>,
    pub mode: Mode,
    pub m: usize,
    pub seed: u64,
    pub circuit: CircuitParams<T>,
    pub laser: LaserParams<T>,
    pub detector: DetectorParams<T>,
    /// Trajectory grid step; the default resolves every correlation time.
    pub dt: Option<T>,
    pub electronic_noise: bool,
}

impl<T: Real> SimConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(domain("m must be at least 1"));
        }
        self.circuit.validate(self.mode)?;
        self.laser.validate()?;
        self.detector.validate(Some(&self.laser))?;
        if let Some(dt) = self.dt {
            if !(dt > T::zero()) {
                return Err(domain("dt must be positive"));
            }
        }
        if let Signal::Coherent { amplitude, omega } = self.signal {
            if !amplitude.re.is_finite() || !amplitude.im.is_finite() || !omega.is_finite() {
                return Err(domain("signal amplitude and frequency must be finite"));
            }
        }
        Ok(())
    }

    pub fn coefficients(&self) -> Result<Coefficients<T>> {
        match self.mode {
            Mode::Double => derive_coefficients(&self.circuit, self.laser.lambda_abs2),
            Mode::Single => single_homodyne_params(&self.circuit, self.laser.lambda_abs2),
        }
    }

    /// Grid step actually used; a coherent signal also has to resolve its beat
    /// with the carrier.
    pub fn grid_dt(&self) -> T {
        let mut dt = self.dt.unwrap_or_else(|| default_dt(&self.laser, self.detector.kappa_resp));
        if self.dt.is_none() {
            if let Signal::Coherent { omega, .. } = self.signal {
                let beat = (self.laser.omega0 - omega).abs();
                if beat > T::zero() {
                    dt = dt.min(T::one() / (beat * T::c(50.0)));
                }
            }
        }
        dt
    }

    /// Whether `|f|^2` is constant and nothing depends on the oscillator phase,
    /// so no trajectory needs to be drawn.
    fn constant_intensity(&self) -> bool {
        !self.laser.has_intensity_noise() && self.signal.is_vacuum()
    }

    fn window(&self, l: usize) -> Result<(T, TimeGrid<T>)> {
        let t_l = self.detector.sample_time(l);
        let g = TimeGrid::window(t_l, self.detector.tau, self.grid_dt(), MIN_WINDOW_STEPS)?;
        Ok((t_l, g))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchMeta<T> {
    pub regime: Regime,
    pub seed: u64,
    pub m: usize,
    pub channels: usize,
    pub electronic_noise: bool,
    pub config: SimConfig<T>,
}

/// `m` samples of the difference photocurrents, row-major with `channels` columns.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch<T> {
    pub x: Vec<T>,
    pub channels: usize,
    pub meta: BatchMeta<T>,
}

impl<T: Real> SampleBatch<T> {
    pub fn len(&self) -> usize {
        self.x.len() / self.channels
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn row(&self, l: usize) -> &[T] {
        &self.x[l * self.channels..(l + 1) * self.channels]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        self.x.iter().skip(j).step_by(self.channels).copied().collect()
    }

    /// Builds a batch from raw rows, for data produced elsewhere.
    pub fn from_rows(rows: &[[T; 2]], channels: usize, meta: BatchMeta<T>) -> Self {
        let x = rows.iter().flat_map(|r| r[..channels].iter().copied()).collect();
        Self { x, channels, meta }
    }

    /// CSV with columns `l, x1[, x2]`.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut head = vec!["l".to_string()];
        head.extend((1..=self.channels).map(|j| format!("x{j}")));
        w.write_record(&head)?;
        for l in 0..self.len() {
            let mut rec = vec![l.to_string()];
            rec.extend(self.row(l).iter().map(|v| format!("{v:e}")));
            w.write_record(&rec)?;
        }
        w.flush()
    }
}

const SIGN: [f64; 4] = [1.0, 1.0, -1.0, -1.0];

/// Photon rates at the four photodiodes for oscillator value `f` and signal value `fs`.
pub fn poisson_intensities<T: Real>(coeff: &Coefficients<T>, f: Complex<T>, fs: Complex<T>) -> [T; 4] {
    let mut out = [T::zero(); 4];
    let vacuum = fs.re == T::zero() && fs.im == T::zero();
    let abs2 = f.norm_sqr();
    for k in 0..4 {
        let [g1, g2] = coeff.gains[k];
        out[k] = if vacuum {
            g2 * abs2
        } else {
            let rot = Complex::from_polar(T::c(SIGN[k]), coeff.psi[k % 2]) * Complex::<T>::i();
            (fs * g1.sqrt() + rot * f * g2.sqrt()).norm_sqr()
        };
    }
    out
}

/// Calls `on_event` for every event of an inhomogeneous Poisson process whose
/// rate is the linear interpolant of `rate` on `grid`, sampled by thinning.
fn thin_events<T: Real, R: Rng + ?Sized, F: FnMut(T)>(grid: &TimeGrid<T>, rate: &[T], rng: &mut R, mut on_event: F) -> Result<()> {
    if rate.len() != grid.len {
        return Err(Error::LengthMismatch(format!("{} rates on a grid of {}", rate.len(), grid.len)));
    }
    let jmax = rate.iter().copied().fold(T::zero(), T::max);
    if rate.iter().any(|r| !(*r >= T::zero()) || !r.is_finite()) {
        return Err(domain("intensity must be finite and nonnegative"));
    }
    let span = grid.t_end() - grid.t0;
    let expected = (jmax * span).to_f();
    if expected > MAX_EXPECTED_EVENTS {
        return Err(Error::Overflow { expected, limit: MAX_EXPECTED_EVENTS });
    }
    if expected <= 0.0 {
        return Ok(());
    }
    let n: u64 = Poisson::new(expected).map_err(|e| domain(e.to_string()))?.sample(rng) as u64;
    let flat = rate.iter().all(|&r| r == jmax);
    let last = grid.len - 1;
    for _ in 0..n {
        let x = T::unit(rng) * T::from_usize(last).unwrap();
        let t = grid.t0 + x * grid.dt;
        if !flat {
            let i = x.floor().to_usize().unwrap_or(0).min(last - 1);
            let frac = x - T::from_usize(i).unwrap();
            let j = rate[i] + (rate[i + 1] - rate[i]) * frac;
            if T::unit(rng) * jmax >= j {
                continue;
            }
        }
        on_event(t);
    }
    Ok(())
}

/// Event times of an inhomogeneous Poisson process with piecewise-linear rate.
pub fn simulate_counts<T: Real, R: Rng + ?Sized>(grid: &TimeGrid<T>, rate: &[T], rng: &mut R) -> Result<Vec<T>> {
    let mut ev = Vec::new();
    thin_events(grid, rate, rng, |t| ev.push(t))?;
    Ok(ev)
}

fn active_diodes(mode: Mode) -> &'static [usize] {
    match mode {
        Mode::Double => &[0, 1, 2, 3],
        Mode::Single => &[0, 2],
    }
}

fn finite_lo_one<T: Real>(cfg: &SimConfig<T>, coeff: &Coefficients<T>, l: usize) -> Result<[T; 2]> {
    let mut rng = stream(cfg.seed, l as u64);
    let k = cfg.detector.kappa_resp;
    let (t_l, grid) = cfg.window(l)?;
    let mut rates: [Vec<T>; 4] = Default::default();
    if cfg.constant_intensity() {
        let f = Complex::new(cfg.laser.lambda_abs2.sqrt(), T::zero());
        let j = poisson_intensities(coeff, f, Complex::new(T::zero(), T::zero()));
        for d in 0..4 {
            rates[d] = vec![j[d]; grid.len];
        }
    } else {
        let traj = sample_trajectory_with(&cfg.laser, grid, &mut rng);
        for d in 0..4 {
            rates[d] = Vec::with_capacity(grid.len);
        }
        for i in 0..grid.len {
            let j = poisson_intensities(coeff, traj.f[i], cfg.signal.at(grid.t(i)));
            for d in 0..4 {
                rates[d].push(j[d]);
            }
        }
    }
    let mut m = [T::zero(); 4];
    for &d in active_diodes(cfg.mode) {
        let mut acc = T::zero();
        thin_events(&grid, &rates[d], &mut rng, |t| acc += (-k * (t_l - t)).exp())?;
        m[d] = cfg.circuit.xi[d] * k * acc;
    }
    let mut x = [m[0] - m[2], m[1] - m[3]];
    add_electronic_noise(cfg, &mut x, &mut rng);
    Ok(x)
}

fn add_electronic_noise<T: Real, R: Rng + ?Sized>(cfg: &SimConfig<T>, x: &mut [T; 2], rng: &mut R) {
    if cfg.electronic_noise {
        for j in 0..cfg.mode.channels() {
            x[j] += cfg.detector.sigma_el[j] * T::std_normal(rng);
        }
    }
}

/// Window statistics of one oscillator path that enter the strong-oscillator law.
struct WindowStats<T> {
    r2: T,
    weighted: T,
    interference: Complex<T>,
}

fn window_stats<T: Real, R: Rng + ?Sized>(cfg: &SimConfig<T>, l: usize, rng: &mut R) -> Result<WindowStats<T>> {
    let d = &cfg.detector;
    if cfg.constant_intensity() {
        return Ok(WindowStats {
            r2: s0_window(d),
            weighted: -(-d.kappa_resp * d.tau).exp_m1(),
            interference: Complex::new(T::zero(), T::zero()),
        });
    }
    let (t_l, grid) = cfg.window(l)?;
    let traj: LaserTrajectory<T> = sample_trajectory_with(&cfg.laser, grid, rng);
    let l2 = cfg.laser.lambda_abs2;
    let r2 = r_l_squared(&traj, d, l2, t_l)?;
    let weighted = response_weighted_intensity(&traj, d, l2, t_l)?;
    let interference = if cfg.signal.is_vacuum() {
        Complex::new(T::zero(), T::zero())
    } else {
        let inv = T::one() / l2.sqrt();
        let z: Vec<Complex<T>> = (0..grid.len).map(|i| cfg.signal.at(grid.t(i)).conj() * traj.f[i] * inv).collect();
        response_weighted_complex(&traj, d, &z, t_l)?
    };
    Ok(WindowStats { r2, weighted, interference })
}

fn strong_lo_one<T: Real>(cfg: &SimConfig<T>, coeff: &Coefficients<T>, l: usize) -> Result<[T; 2]> {
    let mut rng = stream(cfg.seed, l as u64);
    let w = window_stats(cfg, l, &mut rng)?;
    let lam = cfg.laser.lambda_abs2.sqrt();
    let mut x = [T::zero(); 2];
    for j in 0..cfg.mode.channels() {
        let k3 = coeff.kappa[j][2];
        let rot = Complex::from_polar(T::one(), coeff.psi[j]) * Complex::<T>::i();
        let mean = coeff.g2[j] * k3 * w.weighted + k3 * T::c(2.0) * (rot * w.interference).re;
        let sd = (coeff.kappa[j][1] * w.r2).sqrt();
        x[j] = lam * (mean + sd * T::std_normal(&mut rng));
    }
    add_electronic_noise(cfg, &mut x, &mut rng);
    Ok(x)
}

fn run<T: Real, F>(cfg: &SimConfig<T>, regime: Regime, one: F) -> Result<SampleBatch<T>>
where
    F: Fn(&SimConfig<T>, &Coefficients<T>, usize) -> Result<[T; 2]> + Sync,
{
    if cfg.regime != regime {
        return Err(domain(format!("configuration regime is {:?}", cfg.regime)));
    }
    cfg.validate()?;
    let coeff = cfg.coefficients()?;
    let rows: Vec<[T; 2]> = (0..cfg.m).into_par_iter().map(|l| one(cfg, &coeff, l)).collect::<Result<_>>()?;
    let channels = cfg.mode.channels();
    let meta = BatchMeta { regime, seed: cfg.seed, m: cfg.m, channels, electronic_noise: cfg.electronic_noise, config: cfg.clone() };
    Ok(SampleBatch::from_rows(&rows, channels, meta))
}

/// Photon-counting simulation: a fresh oscillator window per sample, thinned
/// Poisson events at each photodiode, exponential smoothing summed exactly.
pub fn sample_x_finite_lo<T: Real>(cfg: &SimConfig<T>) -> Result<SampleBatch<T>> {
    run(cfg, Regime::FiniteLo, finite_lo_one)
}

/// Strong-oscillator law: conditionally on the oscillator path the channels
/// are independent normals with mean set by the weighted intensity and the
/// signal interference, and variance `kappa_j2 R_l^2`; returned as `X = |lambda| Y`.
pub fn sample_y_strong_lo<T: Real>(cfg: &SimConfig<T>) -> Result<SampleBatch<T>> {
    run(cfg, Regime::StrongLo, strong_lo_one)
}

/// Dispatches on the configured regime.
pub fn simulate<T: Real>(cfg: &SimConfig<T>) -> Result<SampleBatch<T>> {
    match cfg.regime {
        Regime::FiniteLo => sample_x_finite_lo(cfg),
        Regime::StrongLo => sample_y_strong_lo(cfg),
    }
}

/// Sample moments with jackknife standard errors. Single-channel batches
/// leave the second row and column at zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMoments<T> {
    pub m: usize,
    pub channels: usize,
    pub mean: [T; 2],
    pub mean_se: [T; 2],
    pub cov: [[T; 2]; 2],
    pub cov_se: [[T; 2]; 2],
    pub skewness: [T; 2],
    pub excess_kurtosis: [T; 2],
}

impl<T: Real> EmpiricalMoments<T> {
    pub fn correlation(&self) -> T {
        self.cov[0][1] / (self.cov[0][0] * self.cov[1][1]).sqrt()
    }
}

pub fn empirical_moments<T: Real>(b: &SampleBatch<T>) -> Result<EmpiricalMoments<T>> {
    let m = b.len();
    if m < 2 {
        return Err(domain("need at least two samples"));
    }
    let ch = b.channels;
    let n = m as f64;
    let mut mean = [0.0f64; 2];
    for l in 0..m {
        for j in 0..ch {
            mean[j] += b.row(l)[j].to_f();
        }
    }
    mean.iter_mut().for_each(|v| *v /= n);
    let mut s = [[0.0f64; 2]; 2];
    let mut m3 = [0.0f64; 2];
    let mut m4 = [0.0f64; 2];
    for l in 0..m {
        let r = b.row(l);
        let d: Vec<f64> = (0..ch).map(|j| r[j].to_f() - mean[j]).collect();
        for a in 0..ch {
            for c in 0..ch {
                s[a][c] += d[a] * d[c];
            }
            m3[a] += d[a].powi(3);
            m4[a] += d[a].powi(4);
        }
    }
    let cov = s.map(|row| row.map(|v| v / (n - 1.0)));
    // delete-one jackknife of the unbiased covariance, in closed form
    let mut cov_se = [[f64::INFINITY; 2]; 2];
    if m >= 3 {
        let mut e = [[0.0f64; 2]; 2];
        let mut e2 = [[0.0f64; 2]; 2];
        let shrink = n / (n - 1.0);
        for l in 0..m {
            let r = b.row(l);
            let d: Vec<f64> = (0..ch).map(|j| r[j].to_f() - mean[j]).collect();
            for a in 0..ch {
                for c in 0..ch {
                    let loo = (s[a][c] - shrink * d[a] * d[c]) / (n - 2.0);
                    let dev = loo - cov[a][c];
                    e[a][c] += dev;
                    e2[a][c] += dev * dev;
                }
            }
        }
        for a in 0..ch {
            for c in 0..ch {
                cov_se[a][c] = ((n - 1.0) / n * (e2[a][c] - e[a][c] * e[a][c] / n)).max(0.0).sqrt();
            }
        }
    }
    let mut out = EmpiricalMoments {
        m,
        channels: ch,
        mean: [T::zero(); 2],
        mean_se: [T::zero(); 2],
        cov: [[T::zero(); 2]; 2],
        cov_se: [[T::zero(); 2]; 2],
        skewness: [T::zero(); 2],
        excess_kurtosis: [T::zero(); 2],
    };
    for a in 0..ch {
        out.mean[a] = T::c(mean[a]);
        out.mean_se[a] = T::c((cov[a][a] / n).sqrt());
        let m2 = s[a][a] / n;
        if m2 > 0.0 {
            out.skewness[a] = T::c(m3[a] / n / m2.powf(1.5));
            out.excess_kurtosis[a] = T::c(m4[a] / n / (m2 * m2) - 3.0);
        }
        for c in 0..ch {
            out.cov[a][c] = T::c(cov[a][c]);
            out.cov_se[a][c] = T::c(cov_se[a][c]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laser::ThetaMode;
    use crate::{CircuitParams, DetectorParams, LaserParams};

    fn zero() -> Complex<f64> {
        Complex::new(0.0, 0.0)
    }

    #[test]
    fn vacuum_intensity_value() {
        let c = derive_coefficients(&CircuitParams::balanced(1.0, 1.0), 4.0).unwrap();
        let j = poisson_intensities(&c, Complex::new(2.0, 0.0), zero());
        for v in j {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn vacuum_intensities_ignore_phases() {
        let mut p = CircuitParams::balanced(0.9, 1.0);
        p.eta[2] = 0.45;
        let a = derive_coefficients(&p, 1.0).unwrap();
        p.psi1 = 1.1;
        p.psi2 = -0.4;
        let b = derive_coefficients(&p, 1.0).unwrap();
        let f = Complex::new(0.3, -1.7);
        assert_eq!(poisson_intensities(&a, f, zero()), poisson_intensities(&b, f, zero()));
    }

    #[test]
    fn coherent_interference_contrast() {
        let c = derive_coefficients(&CircuitParams::balanced(1.0, 1.0), 1.0).unwrap();
        let f = Complex::new(1.5, 0.0);
        // fs = i f: full constructive interference on diode 1, destructive on diode 3
        let j = poisson_intensities(&c, f, Complex::new(0.0, 1.5));
        assert!((j[0] - 2.25).abs() < 1e-14);
        assert!(j[2].abs() < 1e-14);
        let j = poisson_intensities(&c, f, f);
        assert!((j[0] - 1.125).abs() < 1e-14);
        assert!((j[2] - 1.125).abs() < 1e-14);
    }

    #[test]
    fn zero_intensity_has_no_events() {
        let g = TimeGrid::new(0.0, 0.1, 11).unwrap();
        let mut rng = stream(1, 0);
        assert!(simulate_counts(&g, &[0.0; 11], &mut rng).unwrap().is_empty());
    }

    #[test]
    fn overflow_guard() {
        let g = TimeGrid::new(0.0, 1.0, 3).unwrap();
        let mut rng = stream(1, 0);
        let err = simulate_counts(&g, &[1e8; 3], &mut rng).unwrap_err();
        assert!(matches!(err, Error::Overflow { .. }));
        assert!(simulate_counts(&g, &[1.0, -1.0, 1.0], &mut rng).is_err());
    }

    fn config(regime: Regime, laser: LaserParams, m: usize) -> SimConfig<f64> {
        let mut c = CircuitParams::balanced(0.9, 1.0);
        c.eta[2] = 0.45;
        let d = DetectorParams::new(1e3, [0.0; 2], Some(&laser)).unwrap();
        SimConfig { regime, signal: Signal::Vacuum, mode: Mode::Double, m, seed: 42, circuit: c, laser, detector: d, dt: None, electronic_noise: false }
    }

    #[test]
    fn phase_shift_leaves_vacuum_batch_unchanged() {
        let laser = LaserParams::new(1e5, 0.0, 10.0, 0.5, 1e3, ThetaMode::Uniform).unwrap();
        let mut cfg = config(Regime::FiniteLo, laser, 40);
        let a = simulate(&cfg).unwrap();
        cfg.circuit.psi1 = 0.7;
        cfg.circuit.psi2 = 2.9;
        let b = simulate(&cfg).unwrap();
        assert_eq!(a.x, b.x);
        cfg.regime = Regime::StrongLo;
        let a = simulate(&cfg).unwrap();
        cfg.circuit.psi1 = -1.0;
        let b = simulate(&cfg).unwrap();
        assert_eq!(a.x, b.x);
    }

    #[test]
    fn batches_do_not_depend_on_worker_count() {
        let laser = LaserParams::new(1e5, 0.0, 10.0, 0.5, 1e3, ThetaMode::Uniform).unwrap();
        let cfg = config(Regime::FiniteLo, laser, 16);
        let a = simulate(&cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| simulate(&cfg).unwrap());
        assert_eq!(a.x, b.x);
    }

    #[test]
    fn regime_mismatch_is_rejected() {
        let cfg = config(Regime::FiniteLo, LaserParams::noiseless(1e4, ThetaMode::Uniform), 4);
        assert!(sample_y_strong_lo(&cfg).is_err());
        let mut bad = cfg.clone();
        bad.m = 0;
        assert!(simulate(&bad).is_err());
    }

    fn batch(rows: &[[f64; 2]]) -> SampleBatch<f64> {
        let cfg = config(Regime::StrongLo, LaserParams::noiseless(1.0, ThetaMode::Uniform), rows.len());
        let meta = BatchMeta { regime: Regime::StrongLo, seed: 0, m: rows.len(), channels: 2, electronic_noise: false, config: cfg };
        SampleBatch::from_rows(rows, 2, meta)
    }

    #[test]
    fn constant_batch_has_zero_covariance() {
        let m = empirical_moments(&batch(&[[1.5, -2.0]; 10])).unwrap();
        assert_eq!(m.mean, [1.5, -2.0]);
        assert!(m.cov.iter().flatten().all(|&v| v.abs() < 1e-30));
        assert!(empirical_moments(&batch(&[[1.0, 1.0]])).is_err());
    }

    #[test]
    fn jackknife_matches_explicit_deletion() {
        let rows: Vec<[f64; 2]> = (0..9).map(|i| {
            let t = i as f64;
            [t.sin() * 3.0 + 0.1 * t, (1.7 * t).cos() - 0.2 * t * t]
        }).collect();
        let m = empirical_moments(&batch(&rows)).unwrap();
        let n = rows.len();
        let cov = |r: &[[f64; 2]], a: usize, b: usize| {
            let k = r.len() as f64;
            let ma = r.iter().map(|x| x[a]).sum::<f64>() / k;
            let mb = r.iter().map(|x| x[b]).sum::<f64>() / k;
            r.iter().map(|x| (x[a] - ma) * (x[b] - mb)).sum::<f64>() / (k - 1.0)
        };
        for (a, b) in [(0, 0), (0, 1), (1, 1)] {
            let loo: Vec<f64> = (0..n).map(|i| {
                let r: Vec<[f64; 2]> = rows.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, v)| *v).collect();
                cov(&r, a, b)
            }).collect();
            let mean = loo.iter().sum::<f64>() / n as f64;
            let var = (n as f64 - 1.0) / n as f64 * loo.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
            assert!((m.cov[a][b] - cov(&rows, a, b)).abs() < 1e-12);
            assert!((m.cov_se[a][b] - var.sqrt()).abs() < 1e-10 * var.sqrt().max(1.0));
        }
    }

    #[test]
    fn csv_layout() {
        let b = batch(&[[1.0, 2.0], [3.0, -4.5]]);
        let mut out = Vec::new();
        b.write_csv(&mut out).unwrap();
        let s = String::from_utf8(out).unwrap();
        assert_eq!(s, "l,x1,x2\n0,1e0,2e0\n1,3e0,-4.5e0\n");
    }
}
