//! Local oscillator: phase diffusion plus a stationary Gaussian intensity factor.

use std::io::Write;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::real::Real;
use crate::rng::SimRng;

/// Global phase of a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ThetaMode<T> {
    Fixed(T),
    /// Drawn uniformly on `[0, 2 pi)` once per trajectory.
    #[default]
    Uniform,
}

/// Laser model. `w2` is the squared mean of `u(t)`; its stationary variance is `1 - w2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaserParams<T> {
    pub lambda_abs2: T,
    pub omega0: T,
    pub gamma0: T,
    pub w2: T,
    pub gamma1: T,
    pub theta: ThetaMode<T>,
}

impl<T: Real> LaserParams<T> {
    pub fn new(lambda_abs2: T, omega0: T, gamma0: T, w2: T, gamma1: T, theta: ThetaMode<T>) -> Result<Self> {
        let p = Self { lambda_abs2, omega0, gamma0, w2, gamma1, theta };
        p.validate()?;
        Ok(p)
    }

    /// Builds from the mean `w` and variance `v0` of `u`, which must satisfy `w^2 + v0 = 1`.
    pub fn from_w_v0(lambda_abs2: T, omega0: T, gamma0: T, w: T, v0: T, gamma1: T, theta: ThetaMode<T>) -> Result<Self> {
        if (w * w + v0 - T::one()).abs() > T::c(1e-12).max(T::epsilon() * T::c(8.0)) {
            return Err(domain("w^2 + v0 must equal 1"));
        }
        Self::new(lambda_abs2, omega0, gamma0, w * w, gamma1, theta)
    }

    /// Ideal laser: no intensity noise, no phase diffusion.
    pub fn noiseless(lambda_abs2: T, theta: ThetaMode<T>) -> Self {
        Self { lambda_abs2, omega0: T::zero(), gamma0: T::zero(), w2: T::one(), gamma1: T::one(), theta }
    }

    pub fn validate(&self) -> Result<()> {
        let fin = |x: T| x.is_finite();
        if !(self.lambda_abs2 > T::zero()) || !fin(self.lambda_abs2) {
            return Err(domain("lambda_abs2 must be positive"));
        }
        if !(self.gamma0 >= T::zero()) || !fin(self.gamma0) {
            return Err(domain("gamma0 must be nonnegative"));
        }
        if !(self.gamma1 > T::zero()) || !fin(self.gamma1) {
            return Err(domain("gamma1 must be positive"));
        }
        if !(self.w2 >= T::zero() && self.w2 <= T::one()) {
            return Err(domain("w2 must lie in [0,1]"));
        }
        if !fin(self.omega0) {
            return Err(domain("omega0 must be finite"));
        }
        if let ThetaMode::Fixed(t) = self.theta {
            if !fin(t) {
                return Err(domain("theta must be finite"));
            }
        }
        Ok(())
    }

    pub fn w(&self) -> T {
        self.w2.sqrt()
    }

    pub fn v0(&self) -> T {
        T::one() - self.w2
    }

    /// Covariance of `u`: `v(t) = v0 e^{-gamma1 |t|}`.
    pub fn v(&self, t: T) -> T {
        self.v0() * (-self.gamma1 * t.abs()).exp()
    }

    pub fn has_intensity_noise(&self) -> bool {
        self.w2 < T::one()
    }

    /// Complex `lambda` for a fixed phase.
    pub fn lambda(&self) -> Option<Complex<T>> {
        match self.theta {
            ThetaMode::Fixed(t) => Some(Complex::from_polar(self.lambda_abs2.sqrt(), t)),
            ThetaMode::Uniform => None,
        }
    }
}

/// Default grid step: a fiftieth of the fastest correlation time among the
/// phase diffusion, the intensity correlation and the detector response.
pub fn default_dt<T: Real>(p: &LaserParams<T>, kappa_resp: T) -> T {
    let mut rate = p.gamma1.max(kappa_resp);
    if p.gamma0 > T::zero() {
        rate = rate.max(p.gamma0);
    }
    T::one() / (rate * T::c(50.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid<T> {
    pub t0: T,
    pub dt: T,
    pub len: usize,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(t0: T, dt: T, len: usize) -> Result<Self> {
        if !(dt > T::zero()) || len < 2 || !t0.is_finite() {
            return Err(domain("grid needs dt > 0 and at least two points"));
        }
        Ok(Self { t0, dt, len })
    }

    /// Grid on `[t_end - span, t_end]` with at least `min_steps` steps and step at most `max_dt`.
    pub fn window(t_end: T, span: T, max_dt: T, min_steps: usize) -> Result<Self> {
        let steps = (span / max_dt).ceil().to_usize().unwrap_or(usize::MAX).max(min_steps).max(1);
        Self::new(t_end - span, span / T::from_usize(steps).unwrap(), steps + 1)
    }

    pub fn t(&self, i: usize) -> T {
        self.t0 + self.dt * T::from_usize(i).unwrap()
    }

    pub fn t_end(&self) -> T {
        self.t(self.len - 1)
    }
}

/// Sampled oscillator path on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct LaserTrajectory<T> {
    pub grid: TimeGrid<T>,
    pub f: Vec<Complex<T>>,
    pub abs2: Vec<T>,
    pub theta: T,
}

/// Draws one trajectory on `grid` from its own seeded stream.
pub fn sample_trajectory<T: Real>(p: &LaserParams<T>, grid: TimeGrid<T>, seed: u64) -> LaserTrajectory<T> {
    let mut rng = SimRng::seed_from_u64(seed);
    sample_trajectory_with(p, grid, &mut rng)
}

/// Draws one trajectory: exact Gaussian increments for `W` and the exact AR(1)
/// recursion for `u`, started from its stationary law.
pub fn sample_trajectory_with<T: Real, R: Rng + ?Sized>(p: &LaserParams<T>, grid: TimeGrid<T>, rng: &mut R) -> LaserTrajectory<T> {
    let theta = match p.theta {
        ThetaMode::Fixed(t) => t,
        ThetaMode::Uniform => T::unit(rng) * T::TAU(),
    };
    let amp = p.lambda_abs2.sqrt();
    let w = p.w();
    let v0 = p.v0();
    let rho = (-p.gamma1 * grid.dt).exp();
    let innov = (v0 * (T::one() - rho * rho)).max(T::zero()).sqrt();
    let diff = (T::c(2.0) * p.gamma0).sqrt();
    let sdt = grid.dt.sqrt();
    let noisy_u = v0 > T::zero();
    let diffusing = p.gamma0 > T::zero();

    let mut wiener = if diffusing && grid.t0 > T::zero() { grid.t0.sqrt() * T::std_normal(rng) } else { T::zero() };
    let mut u = if noisy_u { w + v0.sqrt() * T::std_normal(rng) } else { w };
    let mut f = Vec::with_capacity(grid.len);
    let mut abs2 = Vec::with_capacity(grid.len);
    for i in 0..grid.len {
        if i > 0 {
            if diffusing {
                wiener += sdt * T::std_normal(rng);
            }
            if noisy_u {
                u = w + rho * (u - w) + innov * T::std_normal(rng);
            }
        }
        let t = grid.t(i);
        let phase = theta - p.omega0 * t - diff * wiener;
        let a = amp * u;
        f.push(Complex::from_polar(a, phase));
        abs2.push(a * a);
    }
    LaserTrajectory { grid, f, abs2, theta }
}

impl<T: Real> LaserTrajectory<T> {
    /// Writes `t, re_f, im_f, abs2_f` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "re_f", "im_f", "abs2_f"])?;
        for i in 0..self.grid.len {
            let z = self.f[i];
            w.write_record(&[
                format!("{:e}", self.grid.t(i)),
                format!("{:e}", z.re),
                format!("{:e}", z.im),
                format!("{:e}", self.abs2[i]),
            ])?;
        }
        w.flush()
    }
}

/// The four closed-form moments of the oscillator at times `t`, `s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaserMoments<T> {
    /// `E f(t)`
    pub mean: Complex<T>,
    /// `E[conj(f(s)) f(t)]`
    pub corr_conj: Complex<T>,
    /// `E[f(s) f(t)]`
    pub corr: Complex<T>,
    /// `Cov(|f(t)|^2, |f(s)|^2)`
    pub intensity_cov: T,
}

pub fn first_moments<T: Real>(p: &LaserParams<T>, t: T, s: T) -> LaserMoments<T> {
    let l2 = p.lambda_abs2;
    let w2 = p.w2;
    let v = p.v(t - s);
    let i = Complex::<T>::i();
    let zero = Complex::new(T::zero(), T::zero());
    let (mean, corr) = match p.lambda() {
        Some(lam) => {
            let m = lam * p.w() * (-(i * p.omega0 + p.gamma0) * t).exp();
            let c = lam * lam
                * (-(i * p.omega0 + p.gamma0) * (t + s) - p.gamma0 * T::c(2.0) * t.min(s)).exp()
                * (w2 + v);
            (m, c)
        }
        // a uniform global phase averages every phase-sensitive moment to zero
        None => (zero, zero),
    };
    let corr_conj = (i * p.omega0 * (s - t) - p.gamma0 * (t - s).abs()).exp() * (l2 * (w2 + v));
    LaserMoments { mean, corr_conj, corr, intensity_cov: T::c(2.0) * l2 * l2 * v * (T::c(2.0) * w2 + v) }
}

/// Covariance of `n_RIN(t) = u(t)^2 - 1` at a given lag.
pub fn rin_covariance<T: Real>(p: &LaserParams<T>, lag: T) -> T {
    let v = p.v(lag);
    T::c(2.0) * v * v + T::c(4.0) * p.w2 * v
}

/// Spectrum of the field: two Lorentzians centred on the carrier.
pub fn intensity_spectrum<T: Real>(p: &LaserParams<T>, mu: T) -> Result<T> {
    if !(p.gamma0 > T::zero()) {
        return Err(domain("the spectrum has a delta line when gamma0 = 0"));
    }
    let d = mu - p.omega0;
    let g = p.gamma0 + p.gamma1;
    let two = T::c(2.0);
    Ok(two * p.lambda_abs2 * p.w2 * p.gamma0 / (p.gamma0 * p.gamma0 + d * d)
        + two * p.lambda_abs2 * (T::one() - p.w2) * g / (g * g + d * d))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RinSpectrum<T> {
    pub pi_rin: T,
    pub rin_eff: T,
}

/// RIN spectral density at `mu` and the effective coefficient (its value at zero).
pub fn rin_spectrum_and_eff<T: Real>(p: &LaserParams<T>, mu: T) -> RinSpectrum<T> {
    let one = T::one();
    let w2 = p.w2;
    let g = p.gamma1;
    let pi_rin = T::c(8.0) * (one - w2) * g * (w2 / (g * g + mu * mu) + (one - w2) / (T::c(4.0) * g * g + mu * mu));
    let rin_eff = T::c(2.0) / g * (one - w2) * (one + T::c(3.0) * w2);
    RinSpectrum { pi_rin, rin_eff }
}
