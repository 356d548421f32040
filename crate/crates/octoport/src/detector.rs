//! Photodiode response `h(t) = kappa e^{-kappa t}`, smoothing constants and the
//! per-sample normalization `R_l(f)^2`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::laser::{LaserParams, LaserTrajectory};
use crate::quad::{exp_linear_cell, simpson};
use crate::real::Real;

/// Residual fraction of `h` and of the intensity correlation allowed past `tau`.
pub const DECAY_THRESHOLD: f64 = 1e-6;

/// `-ln(8e-7)`, rounded: the default window is 14 response times.
pub const DEFAULT_DECAY_TIMES: f64 = 14.0;

/// Minimum number of grid steps inside one integration window.
pub const MIN_WINDOW_STEPS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams<T> {
    /// Response rate `kappa` (1/s).
    pub kappa_resp: T,
    /// Electronic noise standard deviation per channel (volts).
    pub sigma_el: [T; 2],
    /// Window length past which `h` counts as decayed (s).
    pub tau: T,
    /// Spacing of the sampling instants `t_l = tau + l * dt_sample` (s).
    pub dt_sample: T,
}

impl<T: Real> DetectorParams<T> {
    /// Detector with the default window for `laser`: fourteen times the slower
    /// of the response and intensity-correlation times.
    pub fn new(kappa_resp: T, sigma_el: [T; 2], laser: Option<&LaserParams<T>>) -> Result<Self> {
        let tau = default_tau(kappa_resp, laser);
        let d = Self { kappa_resp, sigma_el, tau, dt_sample: tau };
        d.validate(laser)?;
        Ok(d)
    }

    pub fn validate(&self, laser: Option<&LaserParams<T>>) -> Result<()> {
        if !(self.kappa_resp > T::zero()) || !self.kappa_resp.is_finite() {
            return Err(domain("kappa_resp must be positive"));
        }
        if self.sigma_el.iter().any(|s| !(*s >= T::zero()) || !s.is_finite()) {
            return Err(domain("sigma_el must be nonnegative"));
        }
        if !(self.tau > T::zero()) || !self.tau.is_finite() {
            return Err(domain("tau must be positive"));
        }
        let thr = T::c(DECAY_THRESHOLD);
        if (-self.kappa_resp * self.tau).exp() > thr {
            return Err(domain("tau too short: the response has not decayed"));
        }
        if let Some(l) = laser {
            if l.has_intensity_noise() && (-l.gamma1 * self.tau).exp() > thr {
                return Err(domain("tau too short: intensity correlations have not decayed"));
            }
        }
        if !(self.dt_sample >= self.tau * (T::one() - T::c(1e-12))) {
            return Err(domain("sample spacing must be at least tau"));
        }
        Ok(())
    }

    pub fn h(&self, t: T) -> T {
        if t < T::zero() {
            T::zero()
        } else {
            self.kappa_resp * (-self.kappa_resp * t).exp()
        }
    }

    /// Sampling instant of sample `l` (zero-based).
    pub fn sample_time(&self, l: usize) -> T {
        self.tau + self.dt_sample * T::from_usize(l).unwrap()
    }
}

pub fn default_tau<T: Real>(kappa_resp: T, laser: Option<&LaserParams<T>>) -> T {
    let mut rate = kappa_resp;
    if let Some(l) = laser {
        if l.has_intensity_noise() {
            rate = rate.min(l.gamma1);
        }
    }
    T::c(DEFAULT_DECAY_TIMES) / rate
}

/// `S_0 = integral of h^2 = kappa / 2`.
pub fn s0<T: Real>(d: &DetectorParams<T>) -> T {
    d.kappa_resp * T::c(0.5)
}

/// `S_0` truncated to the window `[0, tau]`.
pub fn s0_window<T: Real>(d: &DetectorParams<T>) -> T {
    d.kappa_resp * T::c(0.5) * -(-T::c(2.0) * d.kappa_resp * d.tau).exp_m1()
}

/// `S_0` for a general response function by adaptive quadrature over `[0, upper]`.
pub fn s0_quadrature<T: Real, H: Fn(T) -> T>(h: H, upper: T, tol: T) -> T {
    simpson(|t| h(t) * h(t), T::zero(), upper, tol)
}

/// RIN smoothing constant for exponential response and exponential intensity correlations.
pub fn c0<T: Real>(d: &DetectorParams<T>, laser: &LaserParams<T>) -> T {
    let k = d.kappa_resp;
    let g = laser.gamma1;
    let w2 = laser.w2;
    let two = T::c(2.0);
    two * k * (T::one() - w2) / (k + two * g) * (T::one() + w2 + two * g * w2 / (k + g))
}

/// `integral_0^tau e^{-rate s} v(t_l - s) ds`, exact for the linear interpolant of `v` on the grid.
fn window_integral<T: Real, V: Fn(usize) -> T>(traj: &LaserTrajectory<T>, t_l: T, tau: T, rate: T, v: V) -> Result<T> {
    let g = &traj.grid;
    let a = t_l - tau;
    let slack = g.dt * T::c(1e-9);
    if a < g.t0 - slack || t_l > g.t_end() + slack {
        return Err(Error::Coverage(format!(
            "window [{}, {}] not inside trajectory [{}, {}]",
            a,
            t_l,
            g.t0,
            g.t_end()
        )));
    }
    let a = a.max(g.t0);
    let b = t_l.min(g.t_end());
    let last = g.len - 1;
    let first_cell = ((a - g.t0) / g.dt).floor().to_usize().unwrap_or(0).min(last - 1);
    let mut acc = T::zero();
    let mut i = first_cell;
    while i < last {
        let ti = g.t(i);
        let tj = g.t(i + 1);
        if ti >= b {
            break;
        }
        let c0 = ti.max(a);
        let c1 = tj.min(b);
        if c1 > c0 {
            let (vi, vj) = (v(i), v(i + 1));
            let at = |c: T| vi + (vj - vi) * (c - ti) / g.dt;
            acc += exp_linear_cell(rate, t_l - c1, c1 - c0, at(c1), at(c0));
        }
        i += 1;
    }
    Ok(acc)
}

/// `R_l(f)^2 = integral_0^tau h(r)^2 |f(t_l - r)|^2 / |lambda|^2 dr`.
pub fn r_l_squared<T: Real>(traj: &LaserTrajectory<T>, d: &DetectorParams<T>, lambda_abs2: T, t_l: T) -> Result<T> {
    let k = d.kappa_resp;
    let inv = T::one() / lambda_abs2;
    Ok(k * k * window_integral(traj, t_l, d.tau, T::c(2.0) * k, |i| traj.abs2[i] * inv)?)
}

/// `integral_0^tau h(r) |f(t_l - r)|^2 / |lambda|^2 dr`; its mean is one.
pub fn response_weighted_intensity<T: Real>(traj: &LaserTrajectory<T>, d: &DetectorParams<T>, lambda_abs2: T, t_l: T) -> Result<T> {
    let k = d.kappa_resp;
    let inv = T::one() / lambda_abs2;
    Ok(k * window_integral(traj, t_l, d.tau, k, |i| traj.abs2[i] * inv)?)
}

/// `integral_0^tau h(r) z(t_l - r) dr` for a complex path `z` given on the trajectory grid.
pub fn response_weighted_complex<T: Real>(traj: &LaserTrajectory<T>, d: &DetectorParams<T>, z: &[Complex<T>], t_l: T) -> Result<Complex<T>> {
    if z.len() != traj.grid.len {
        return Err(Error::LengthMismatch(format!("path of {} points on a grid of {}", z.len(), traj.grid.len)));
    }
    let k = d.kappa_resp;
    let re = window_integral(traj, t_l, d.tau, k, |i| z[i].re)?;
    let im = window_integral(traj, t_l, d.tau, k, |i| z[i].im)?;
    Ok(Complex::new(re, im) * k)
}

/// Estimate of `S_- = 1 / E[R^{-2}]` with its delta-method standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SMinus<T> {
    pub estimate: T,
    pub std_err: T,
    pub s0: T,
    pub mean_r2: T,
    pub mean_r2_se: T,
    /// `E[R^{-1}] sqrt(S_0)`.
    pub inv_r_sqrt_s0: T,
}

/// Builds the estimate from sampled `R_l^2` values and rejects a batch whose
/// estimate exceeds `S_0` by more than three standard errors.
pub fn s_minus_from_r2<T: Real>(r2: &[T], s0: T) -> Result<SMinus<T>> {
    let m = r2.len();
    if m < 2 {
        return Err(domain("need at least two values of R_l^2"));
    }
    if r2.iter().any(|r| !(*r > T::zero())) {
        return Err(domain("R_l^2 must be positive"));
    }
    let n = m as f64;
    let (mut s_inv, mut s_inv2, mut s_r, mut s_r2, mut s_irt) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for r in r2 {
        let r = r.to_f();
        s_inv += 1.0 / r;
        s_inv2 += 1.0 / (r * r);
        s_r += r;
        s_r2 += r * r;
        s_irt += 1.0 / r.sqrt();
    }
    let mean_inv = s_inv / n;
    let var_inv = ((s_inv2 - n * mean_inv * mean_inv) / (n - 1.0)).max(0.0);
    let mean_r = s_r / n;
    let var_r = ((s_r2 - n * mean_r * mean_r) / (n - 1.0)).max(0.0);
    let est = 1.0 / mean_inv;
    let se = (var_inv / n).sqrt() / (mean_inv * mean_inv);
    let s0f = s0.to_f();
    let out = SMinus {
        estimate: T::c(est),
        std_err: T::c(se),
        s0,
        mean_r2: T::c(mean_r),
        mean_r2_se: T::c((var_r / n).sqrt()),
        inv_r_sqrt_s0: T::c(s_irt / n * s0f.sqrt()),
    };
    if est > s0f + 3.0 * se + 1e-12 * s0f {
        return Err(Error::Check(format!("S_- = {est:e} exceeds S_0 = {s0f:e} by more than 3 s.e. ({se:e})")));
    }
    Ok(out)
}

/// `S_-` over a batch of trajectories, each evaluated at its own final grid time.
pub fn s_minus<T: Real>(trajs: &[LaserTrajectory<T>], d: &DetectorParams<T>, lambda_abs2: T) -> Result<SMinus<T>> {
    let r2 = trajs
        .iter()
        .map(|t| r_l_squared(t, d, lambda_abs2, t.grid.t_end()))
        .collect::<Result<Vec<_>>>()?;
    s_minus_from_r2(&r2, s0(d))
}
