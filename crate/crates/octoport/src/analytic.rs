//! Closed-form moments, noise ratios and density bounds of the sampled outputs.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::circuit::{derive_coefficients, CircuitParams, Coefficients, Mode};
use crate::detector::DetectorParams;
use crate::error::{domain, Result};
use crate::laser::{first_moments, LaserParams};
use crate::mc_sim::Signal;
use crate::quad::simpson;
use crate::real::Real;

/// Gaussian model of one vacuum sample: means, covariance and the noise
/// ratios of shot, RIN and electronic contributions. Single-channel budgets
/// leave index 1 at zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseBudget<T> {
    pub channels: usize,
    pub lambda_abs2: T,
    pub s0: T,
    pub c0: T,
    pub kappa2: [T; 2],
    pub delta2: [T; 2],
    pub sigma_el: [T; 2],
    /// `mu_j = Delta_j2 |lambda|^2`
    pub means: [T; 2],
    /// Shot-noise variance `kappa_j2 |lambda|^2 S0`.
    pub shot: [T; 2],
    /// Total variances `Sigma_j^2`.
    pub sigma2: [T; 2],
    pub cov: [[T; 2]; 2],
    pub upsilon: [T; 2],
    pub theta: [T; 2],
    /// `det C / prod(shot)`; for one channel `Sigma_1^2 / shot_1`.
    pub e12: T,
    /// Determinant of `C`; for one channel `Sigma_1^2`.
    pub det_c: T,
}

impl<T: Real> NoiseBudget<T> {
    /// Builds the budget from the second-order coefficients.
    pub fn from_parts(channels: usize, kappa2: [T; 2], delta2: [T; 2], lambda_abs2: T, s0: T, c0: T, sigma_el: [T; 2]) -> Result<Self> {
        if !(s0 > T::zero()) || !s0.is_finite() {
            return Err(domain("S0 must be positive"));
        }
        if !(c0 >= T::zero()) || !c0.is_finite() {
            return Err(domain("C0 must be nonnegative"));
        }
        if !(lambda_abs2 > T::zero()) || !lambda_abs2.is_finite() {
            return Err(domain("lambda_abs2 must be positive"));
        }
        let z = T::zero();
        let mut b = Self {
            channels,
            lambda_abs2,
            s0,
            c0,
            kappa2: [z; 2],
            delta2: [z; 2],
            sigma_el: [z; 2],
            means: [z; 2],
            shot: [z; 2],
            sigma2: [z; 2],
            cov: [[z; 2]; 2],
            upsilon: [z; 2],
            theta: [z; 2],
            e12: T::one(),
            det_c: z,
        };
        let l4 = lambda_abs2 * lambda_abs2;
        for j in 0..channels {
            if !(kappa2[j] > z) || !(sigma_el[j] >= z) || !sigma_el[j].is_finite() {
                return Err(domain("kappa_j2 must be positive and sigma_el nonnegative"));
            }
            b.kappa2[j] = kappa2[j];
            b.delta2[j] = delta2[j];
            b.sigma_el[j] = sigma_el[j];
            b.means[j] = delta2[j] * lambda_abs2;
            b.shot[j] = kappa2[j] * lambda_abs2 * s0;
            b.upsilon[j] = delta2[j] * delta2[j] * lambda_abs2 * c0 / (kappa2[j] * s0);
            b.theta[j] = sigma_el[j] * sigma_el[j] / b.shot[j];
            b.sigma2[j] = b.shot[j] + delta2[j] * delta2[j] * l4 * c0 + sigma_el[j] * sigma_el[j];
            b.cov[j][j] = b.sigma2[j];
        }
        let one = T::one();
        if channels == 2 {
            let c12 = delta2[0] * delta2[1] * l4 * c0;
            b.cov[0][1] = c12;
            b.cov[1][0] = c12;
            let [u1, u2] = b.upsilon;
            let [t1, t2] = b.theta;
            b.e12 = (one + t1) * (one + t2) + (one + t1) * u2 + (one + t2) * u1;
            b.det_c = b.shot[0] * b.shot[1] * b.e12;
        } else {
            b.e12 = one + b.upsilon[0] + b.theta[0];
            b.det_c = b.sigma2[0];
        }
        Ok(b)
    }

    /// Determinant of `C` from its entries, as a cross-check of the factored form.
    pub fn det_direct(&self) -> T {
        self.cov[0][0] * self.cov[1][1] - self.cov[0][1] * self.cov[1][0]
    }

    pub fn sigma(&self, j: usize) -> T {
        self.sigma2[j].sqrt()
    }

    /// Correlation coefficient of the two channels.
    pub fn rho(&self) -> T {
        if self.channels < 2 {
            return T::zero();
        }
        self.cov[0][1] / (self.sigma(0) * self.sigma(1))
    }
}

/// Budget of the vacuum signal for the detector described by `coeff`.
pub fn vacuum_budget<T: Real>(coeff: &Coefficients<T>, s0: T, c0: T, sigma_el: [T; 2]) -> Result<NoiseBudget<T>> {
    let ch = coeff.channels();
    let kappa2 = [coeff.kappa[0][1], coeff.kappa[1][1]];
    let delta2 = [coeff.delta[0][1], coeff.delta[1][1]];
    NoiseBudget::from_parts(ch, kappa2, delta2, coeff.lambda_abs2, s0, c0, sigma_el)
}

/// The symmetric two-channel family: `eps_j = eps`, `xi_j = xi`,
/// `eta1 = eta2 = 1/2`, `eta3 = eta4 = eta`, common electronic noise fixed by `theta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetricCase<T> {
    pub eta: T,
    pub eps: T,
    pub xi: T,
    pub lambda_abs2: T,
    pub s0: T,
    pub c0: T,
    /// `2 sigma_el^2 / (|xi lambda|^2 S0)`
    pub theta: T,
}

impl<T: Real> SymmetricCase<T> {
    /// `S0 = 1e10 /s`, `|lambda|^2 = 1e16 /s`, `C0 = 0.01`, `Theta = 0.12`, `xi = 1`.
    pub fn reference(eta: T, eps: T) -> Self {
        Self { eta, eps, xi: T::one(), lambda_abs2: T::c(1e16), s0: T::c(1e10), c0: T::c(0.01), theta: T::c(0.12) }
    }

    /// `|lambda|^2 C0 / (2 S0)`
    pub fn upsilon_scale(&self) -> T {
        self.lambda_abs2 * self.c0 / (T::c(2.0) * self.s0)
    }

    /// `Upsilon = (1 - 2 eta)^2 |lambda|^2 C0 / (2 S0)`
    pub fn upsilon(&self) -> T {
        let a = T::one() - T::c(2.0) * self.eta;
        a * a * self.upsilon_scale()
    }

    pub fn sigma_el(&self) -> T {
        (self.theta * self.xi * self.xi * self.lambda_abs2 * self.s0 * T::c(0.5)).sqrt()
    }

    pub fn circuit(&self, phi: T) -> CircuitParams<T> {
        CircuitParams::symmetric(self.eta, self.eps, self.xi, phi)
    }

    pub fn coefficients(&self, phi: T) -> Result<Coefficients<T>> {
        derive_coefficients(&self.circuit(phi), self.lambda_abs2)
    }
}

/// Budget of the symmetric family from its reduced closed forms.
pub fn simplified_budget<T: Real>(case: &SymmetricCase<T>) -> Result<NoiseBudget<T>> {
    let h = T::c(0.5);
    let k2 = case.eps * case.xi * case.xi * h;
    let d2 = case.eps * case.xi * (T::one() - T::c(2.0) * case.eta) * h;
    let s = case.sigma_el();
    NoiseBudget::from_parts(2, [k2; 2], [d2; 2], case.lambda_abs2, case.s0, case.c0, [s; 2])
}

/// Mean photocurrents at time `t` for a signal in a coherent state, by
/// adaptive quadrature of the response convolution. Integration starts
/// where the response has decayed by `e^-40`.
pub fn coherent_means<T: Real>(coeff: &Coefficients<T>, signal: &Signal<T>, laser: &LaserParams<T>, detector: &DetectorParams<T>, t: T) -> Result<[T; 2]> {
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(domain("t must be nonnegative"));
    }
    let k = detector.kappa_resp;
    let upper = (k * t).min(T::c(40.0));
    let l2 = laser.lambda_abs2;
    let amp2 = signal.at(T::zero()).norm_sqr();
    let mut out = [T::zero(); 2];
    for j in 0..coeff.channels() {
        let k3 = coeff.kappa[j][2];
        let rot = Complex::from_polar(T::one(), coeff.psi[j]) * Complex::<T>::i();
        let scale = T::c(2.0) * k3 * (l2 * amp2).sqrt() + coeff.delta[j][0].abs() * amp2 + coeff.delta[j][1].abs() * l2;
        if scale == T::zero() {
            continue;
        }
        let g = |r: T| {
            let ef = first_moments(laser, r, r).mean;
            let inter = T::c(2.0) * k3 * (rot * ef * signal.at(r).conj()).re;
            inter + coeff.delta[j][0] * signal.at(r).norm_sqr() + coeff.delta[j][1] * l2
        };
        // substitute u = kappa (t - r), so h(t - r) dr = e^{-u} du
        let unit = |u: T| (-u).exp() * g(t - u / k) / scale;
        out[j] = scale * simpson(unit, T::zero(), upper, T::c(1e-10));
    }
    Ok(out)
}

/// Closed form of [`coherent_means`] for exponential response, where
/// `E f(r) conj(fs(r))` is a single complex exponential in `r`.
pub fn coherent_means_closed<T: Real>(coeff: &Coefficients<T>, signal: &Signal<T>, laser: &LaserParams<T>, detector: &DetectorParams<T>, t: T) -> [T; 2] {
    let k = detector.kappa_resp;
    let l2 = laser.lambda_abs2;
    let (alpha, omega) = match *signal {
        Signal::Vacuum => (Complex::new(T::zero(), T::zero()), T::zero()),
        Signal::Coherent { amplitude, omega } => (amplitude, omega),
    };
    let fill = -(-k * t).exp_m1();
    let i = Complex::<T>::i();
    // E f(r) conj(fs(r)) = c e^{-b r}
    let c = laser.lambda().map(|lam| lam * laser.w() * alpha.conj()).unwrap_or(Complex::new(T::zero(), T::zero()));
    let b = Complex::new(laser.gamma0, laser.omega0 - omega);
    let kc = Complex::new(k, T::zero());
    let conv = if (kc - b).norm() < T::c(1e-12) * k {
        Complex::new(k * t * (-k * t).exp(), T::zero())
    } else {
        kc * ((-b * t).exp() - Complex::new((-k * t).exp(), T::zero())) / (kc - b)
    };
    let mut out = [T::zero(); 2];
    for j in 0..coeff.channels() {
        let rot = Complex::from_polar(T::one(), coeff.psi[j]) * i;
        let inter = T::c(2.0) * coeff.kappa[j][2] * (rot * c * conv).re;
        out[j] = inter + (coeff.delta[j][0] * alpha.norm_sqr() + coeff.delta[j][1] * l2) * fill;
    }
    out
}

/// Peak of the vacuum density of the scaled outputs and the uniform bound on
/// the density for arbitrary signal states.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityBound<T> {
    pub bound: T,
    pub vacuum_peak: T,
    pub holds: bool,
}

/// `1 / (4 pi R^2 kappa_13 kappa_23 |sin phi|)` against `prod_j (2 pi kappa_j2 R^2)^{-1/2}`.
pub fn density_bound_check<T: Real>(coeff: &Coefficients<T>, r_l2: T) -> Result<DensityBound<T>> {
    if coeff.mode != Mode::Double {
        return Err(domain("the density bound needs both channels"));
    }
    if !(r_l2 > T::zero()) {
        return Err(domain("R_l^2 must be positive"));
    }
    let s = coeff.phi.sin().abs();
    if !(s > T::zero()) {
        return Err(domain("sin phi vanishes; the bound is vacuous"));
    }
    let pi = T::PI();
    let bound = T::one() / (T::c(4.0) * pi * r_l2 * coeff.kappa[0][2] * coeff.kappa[1][2] * s);
    let peak = T::one() / (T::c(2.0) * pi * r_l2 * (coeff.kappa[0][1] * coeff.kappa[1][1]).sqrt());
    let holds = peak <= bound * (T::one() + T::c(8.0) * T::epsilon());
    Ok(DensityBound { bound, vacuum_peak: peak, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laser::ThetaMode;
    use crate::{CircuitParams, DetectorParams, LaserParams, SymmetricCase};
    use proptest::prelude::*;

    fn random_circuit() -> CircuitParams {
        CircuitParams { eta: [0.5, 0.5, 0.45, 0.5], eps: [0.9, 0.85, 0.8, 0.85], xi: [1.1, 1.0, 1.0, 1.0], psi1: 0.3, psi2: 1.9 }
    }

    #[test]
    fn balanced_budget_is_diagonal() {
        let c = derive_coefficients(&CircuitParams::balanced(0.8, 1.0), 1e6).unwrap();
        let b = vacuum_budget(&c, 500.0, 0.3, [0.0; 2]).unwrap();
        assert_eq!(b.cov[0][1], 0.0);
        assert_eq!(b.upsilon, [0.0, 0.0]);
        assert_eq!(b.e12, 1.0);
        assert_eq!(b.means, [0.0, 0.0]);
    }

    #[test]
    fn reference_set_noise_ratios() {
        for (eta, eps) in [(0.504, 0.9), (0.46, 0.75), (0.5, 1.0)] {
            let case = SymmetricCase::reference(eta, eps);
            let b = simplified_budget(&case).unwrap();
            let ups = eps * (1.0 - 2.0 * eta) * (1.0 - 2.0 * eta) * 0.5e4;
            for j in 0..2 {
                assert!((b.upsilon[j] - ups).abs() <= 1e-12 * ups.max(1.0));
                assert!((b.theta[j] - 0.12 / eps).abs() < 1e-14);
            }
        }
        let b = simplified_budget(&SymmetricCase::reference(0.504, 0.9)).unwrap();
        assert!((b.upsilon[0] - 0.288).abs() < 1e-12);
        let c = SymmetricCase::reference(0.5, 0.9);
        assert!((c.upsilon_scale() - 0.5e4).abs() < 1e-9);
    }

    #[test]
    fn simplified_matches_expanded_budget() {
        for (eta, eps, phi) in [(0.504, 0.9, 1.2), (0.46, 0.8, 0.5), (0.5, 1.0, std::f64::consts::FRAC_PI_2)] {
            let case = SymmetricCase::reference(eta, eps);
            let s = simplified_budget(&case).unwrap();
            let coeff = case.coefficients(phi).unwrap();
            let v = vacuum_budget(&coeff, case.s0, case.c0, [case.sigma_el(); 2]).unwrap();
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300);
            for j in 0..2 {
                assert!(close(s.sigma2[j], v.sigma2[j]));
                assert!((s.means[j] - v.means[j]).abs() <= 1e-12 * case.lambda_abs2);
                assert!((s.upsilon[j] - v.upsilon[j]).abs() <= 1e-12 * s.upsilon[j].max(1.0));
                assert!(close(s.theta[j], v.theta[j]));
            }
            assert!(close(s.e12, v.e12));
            assert!(close(s.det_c, v.det_c));
        }
    }

    #[test]
    fn factored_determinant_matches_direct() {
        let c = derive_coefficients(&random_circuit(), 1e6).unwrap();
        let b = vacuum_budget(&c, 500.0, 0.4, [300.0, 150.0]).unwrap();
        assert!((b.det_c / b.det_direct() - 1.0).abs() < 1e-12);
        let e = b.e12;
        assert!(e >= 1.0);
        let more_rin = vacuum_budget(&c, 500.0, 0.8, [300.0, 150.0]).unwrap();
        let more_el = vacuum_budget(&c, 500.0, 0.4, [600.0, 150.0]).unwrap();
        assert!(more_rin.e12 >= e && more_el.e12 >= e);
    }

    #[test]
    fn invalid_budget_inputs() {
        let c = derive_coefficients(&random_circuit(), 1e6).unwrap();
        assert!(vacuum_budget(&c, 0.0, 0.4, [0.0; 2]).is_err());
        assert!(vacuum_budget(&c, 1.0, -0.4, [0.0; 2]).is_err());
        assert!(vacuum_budget(&c, 1.0, 0.4, [-1.0, 0.0]).is_err());
    }

    fn detector(k: f64) -> DetectorParams {
        DetectorParams { kappa_resp: k, sigma_el: [0.0; 2], tau: 14.0 / k, dt_sample: 14.0 / k }
    }

    #[test]
    fn coherent_means_vacuum_limit() {
        let c = derive_coefficients(&random_circuit(), 4.0).unwrap();
        let laser = LaserParams::new(4.0, 2.0, 0.3, 0.64, 1.0, ThetaMode::Fixed(0.5)).unwrap();
        let d = detector(3.0);
        for t in [0.1, 0.7, 2.5, 40.0] {
            let m = coherent_means(&c, &Signal::Vacuum, &laser, &d, t).unwrap();
            for j in 0..2 {
                let want = c.delta[j][1] * 4.0 * -(-3.0 * t).exp_m1();
                assert!((m[j] - want).abs() < 1e-9 * want.abs().max(1e-3), "{t} {j} {} {want}", m[j]);
            }
        }
        let bal = derive_coefficients(&CircuitParams::balanced(0.7, 1.3), 4.0).unwrap();
        let m = coherent_means(&bal, &Signal::Vacuum, &laser, &d, 1.0).unwrap();
        assert!(m[0].abs() < 1e-15 && m[1].abs() < 1e-15);
    }

    #[test]
    fn coherent_means_against_direct_quadrature() {
        let c = derive_coefficients(&random_circuit(), 4.0).unwrap();
        let laser = LaserParams::new(4.0, 2.0, 0.3, 0.64, 1.0, ThetaMode::Fixed(0.5)).unwrap();
        let s = Signal::Coherent { amplitude: Complex::new(0.7, -0.2), omega: 1.5 };
        let d = detector(3.0);
        let want = [0.364_741_520_165_894_11, -0.510_378_677_360_928_45];
        let q = coherent_means(&c, &s, &laser, &d, 2.5).unwrap();
        let cf = coherent_means_closed(&c, &s, &laser, &d, 2.5);
        for j in 0..2 {
            assert!((q[j] - want[j]).abs() < 1e-9);
            assert!((cf[j] - want[j]).abs() < 1e-13);
        }
    }

    #[test]
    fn coherent_means_locked_carrier() {
        let c = derive_coefficients(&CircuitParams::balanced(0.9, 1.0), 9.0).unwrap();
        let laser = LaserParams::new(9.0, 4.0, 0.0, 1.0, 1.0, ThetaMode::Fixed(0.2)).unwrap();
        let s = Signal::Coherent { amplitude: Complex::new(0.5, 0.25), omega: 4.0 };
        let d = detector(2.0);
        for t in [0.3, 1.0, 6.0] {
            let q = coherent_means(&c, &s, &laser, &d, t).unwrap();
            let cf = coherent_means_closed(&c, &s, &laser, &d, t);
            for j in 0..2 {
                assert!((q[j] - cf[j]).abs() < 1e-8);
            }
        }
        // with a uniform global phase the interference term averages out
        let uni = LaserParams { theta: ThetaMode::Uniform, ..laser };
        let q = coherent_means(&c, &s, &uni, &d, 1.0).unwrap();
        assert!(q[0].abs() < 1e-12);
    }

    #[test]
    fn density_bound_equality_case() {
        let c = derive_coefficients(&CircuitParams::balanced(1.0, 1.0), 1.0).unwrap();
        let r2 = 0.37;
        let b = density_bound_check(&c, r2).unwrap();
        let want = 1.0 / (std::f64::consts::PI * r2);
        assert!((b.bound / want - 1.0).abs() < 1e-14);
        assert!((b.vacuum_peak / want - 1.0).abs() < 1e-14);
        assert!(b.holds);
        let mut p = CircuitParams::balanced(1.0, 1.0);
        p.psi2 = 0.0;
        let c = derive_coefficients(&p, 1.0).unwrap();
        assert!(density_bound_check(&c, r2).is_err());
    }

    proptest! {
        #[test]
        fn budget_invariants(
            eta in prop::array::uniform4(0.05f64..0.95),
            eps in prop::array::uniform4(0.3f64..1.0),
            xi in prop::array::uniform4(0.5f64..2.0),
            c0 in 0.0f64..2.0,
            el in prop::array::uniform2(0.0f64..1e3),
            l2 in 1e3f64..1e9,
        ) {
            let p = CircuitParams { eta, eps, xi, psi1: 0.0, psi2: 1.0 };
            let c = derive_coefficients(&p, l2).unwrap();
            let b = vacuum_budget(&c, 50.0, c0, el).unwrap();
            prop_assert!(b.e12 >= 1.0);
            prop_assert!(b.det_c >= 0.0);
            // the direct determinant cancels when the channels are nearly collinear
            prop_assert!((b.det_c - b.det_direct()).abs() <= 1e-12 * b.sigma2[0] * b.sigma2[1]);
            for j in 0..2 {
                let want = b.shot[j] * (1.0 + b.upsilon[j] + b.theta[j]);
                prop_assert!((b.sigma2[j] / want - 1.0).abs() < 1e-12);
            }
            let up = vacuum_budget(&c, 50.0, c0 * 1.5 + 0.01, [el[0] * 1.2, el[1]]).unwrap();
            prop_assert!(up.e12 >= b.e12);
        }

        #[test]
        fn vacuum_peak_below_bound(
            eta in prop::array::uniform4(0.05f64..0.95),
            eps in prop::array::uniform4(0.3f64..1.0),
            xi in prop::array::uniform4(0.5f64..2.0),
            phi in 0.1f64..3.0,
            r2 in 0.01f64..100.0,
        ) {
            let p = CircuitParams { eta, eps, xi, psi1: 0.0, psi2: phi };
            let c = derive_coefficients(&p, 1.0).unwrap();
            prop_assert!(density_bound_check(&c, r2).unwrap().holds);
        }
    }
}
