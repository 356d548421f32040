//! Optical circuit parameters and the derived detector coefficients.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::real::Real;

/// Raw parameters of the eight-port circuit. Index `k` holds the quantity with
/// subscript `k + 1`; `xi` is in volt-seconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams<T> {
    pub eta: [T; 4],
    pub eps: [T; 4],
    pub xi: [T; 4],
    pub psi1: T,
    pub psi2: T,
}

/// Two difference channels, or the single homodyne reduction with `eta1 = eta2 = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Double,
    Single,
}

impl Mode {
    pub fn channels(self) -> usize {
        match self {
            Mode::Double => 2,
            Mode::Single => 1,
        }
    }
}

impl<T: Real> CircuitParams<T> {
    /// All transmissivities one half, common efficiency and conversion factor.
    pub fn balanced(eps: T, xi: T) -> Self {
        let h = T::c(0.5);
        Self { eta: [h; 4], eps: [eps; 4], xi: [xi; 4], psi1: T::zero(), psi2: T::FRAC_PI_2() }
    }

    /// The symmetric family `eta1 = eta2 = 1/2`, `eta3 = eta4 = eta`.
    pub fn symmetric(eta: T, eps: T, xi: T, phi: T) -> Self {
        let h = T::c(0.5);
        Self { eta: [h, h, eta, eta], eps: [eps; 4], xi: [xi; 4], psi1: T::zero(), psi2: phi }
    }

    pub fn validate(&self, mode: Mode) -> Result<()> {
        let open = |x: T| x > T::zero() && x < T::one();
        if mode == Mode::Double {
            for j in 0..2 {
                if !open(self.eta[j]) {
                    return Err(domain(format!("eta{} must lie strictly inside (0,1)", j + 1)));
                }
            }
        }
        let outer = if mode == Mode::Double { 2..4 } else { 2..3 };
        for j in outer {
            if !open(self.eta[j]) {
                return Err(domain(format!(
                    "eta{} in {{0,1}} makes kappa_{}3 vanish",
                    j + 1,
                    j - 1
                )));
            }
        }
        for j in 0..4 {
            if !(self.eps[j] > T::zero() && self.eps[j] <= T::one()) {
                return Err(domain(format!("eps{} must lie in (0,1]", j + 1)));
            }
            if !(self.xi[j] > T::zero()) || !self.xi[j].is_finite() {
                return Err(domain(format!("xi{} must be positive", j + 1)));
            }
        }
        if !self.psi1.is_finite() || !self.psi2.is_finite() {
            return Err(domain("phases must be finite"));
        }
        Ok(())
    }

    /// `psi2 - psi1` reduced to `(-pi, pi]`.
    pub fn phi(&self) -> T {
        reduce_angle(self.psi2 - self.psi1)
    }

    /// Gain products `g[k] = [g_{k1}, g_{k2}]` for photodiode `k + 1`: the
    /// fraction of signal and oscillator power reaching it.
    pub fn gains(&self, mode: Mode) -> [[T; 2]; 4] {
        let [mut e1, mut e2, e3, e4] = self.eta;
        if mode == Mode::Single {
            e1 = T::one();
            e2 = T::one();
        }
        let [p1, p2, p3, p4] = self.eps;
        let one = T::one();
        [
            [e1 * e3 * p1, e2 * (one - e3) * p1],
            [(one - e1) * e4 * p2, (one - e2) * (one - e4) * p2],
            [e1 * (one - e3) * p3, e2 * e3 * p3],
            [(one - e1) * (one - e4) * p4, (one - e2) * e4 * p4],
        ]
    }
}

/// Reduces an angle to `(-pi, pi]`.
pub fn reduce_angle<T: Real>(x: T) -> T {
    let two_pi = T::TAU();
    let mut r = x - two_pi * ((x + T::PI()) / two_pi).floor();
    if r <= -T::PI() {
        r += two_pi;
    }
    r
}

/// Every coefficient derived from the circuit, for a given oscillator rate `|lambda|^2`.
///
/// Rows are the difference channels; columns follow the `kappa_{j1}`,
/// `kappa_{j2}`, `kappa_{j3}` convention. In single mode row 2 is zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficients<T> {
    pub mode: Mode,
    pub lambda_abs2: T,
    pub kappa: [[T; 3]; 2],
    pub delta: [[T; 3]; 2],
    pub phi: T,
    pub psi: [T; 2],
    pub g2: [T; 2],
    pub g3: [T; 2],
    pub v2: [T; 2],
    pub v2_tilde: [T; 2],
    pub sig2: [T; 2],
    pub sig2_tilde: [T; 2],
    pub gains: [[T; 2]; 4],
    pub xi: [T; 4],
}

/// `(V~_j^2, sigma~_j^2)` for the pair of photodiodes `j`, `j + 2` behind BS(j+2).
fn tilde_terms<T: Real>(eta: T, eps_a: T, xi_a: T, eps_b: T, xi_b: T) -> (T, T) {
    let one = T::one();
    let a = eps_a * xi_a;
    let b = eps_b * xi_b;
    let s2 = (a + b) * (a + b);
    let num = (one - eta) * a - eta * b;
    let v2 = num * num / (eta * (one - eta) * s2);
    let sig2 = (eps_a * (one - eps_a) * xi_a * xi_a / eta
        + eps_b * (one - eps_b) * xi_b * xi_b / (one - eta))
        / s2;
    (v2, sig2)
}

/// Derives every coefficient of the two-channel detector.
pub fn derive_coefficients<T: Real>(p: &CircuitParams<T>, lambda_abs2: T) -> Result<Coefficients<T>> {
    p.validate(Mode::Double)?;
    if !(lambda_abs2 > T::zero()) || !lambda_abs2.is_finite() {
        return Err(domain("lambda_abs2 must be positive"));
    }
    let one = T::one();
    let [e1, e2, e3, e4] = p.eta;
    let [p1, p2, p3, p4] = p.eps;
    let [x1, x2, x3, x4] = p.xi;
    let r1 = (e1 * e2 * e3 * (one - e3)).sqrt();
    let r2 = ((one - e1) * (one - e2) * e4 * (one - e4)).sqrt();

    let kappa = [
        [
            e1 * (e3 * p1 * x1 * x1 + (one - e3) * p3 * x3 * x3),
            e2 * ((one - e3) * p1 * x1 * x1 + e3 * p3 * x3 * x3),
            r1 * (p1 * x1 + p3 * x3),
        ],
        [
            (one - e1) * (e4 * p2 * x2 * x2 + (one - e4) * p4 * x4 * x4),
            (one - e2) * ((one - e4) * p2 * x2 * x2 + e4 * p4 * x4 * x4),
            r2 * (p2 * x2 + p4 * x4),
        ],
    ];
    let delta = [
        [
            e1 * (e3 * p1 * x1 - (one - e3) * p3 * x3),
            e2 * ((one - e3) * p1 * x1 - e3 * p3 * x3),
            r1 * (p1 * x1 * x1 - p3 * x3 * x3),
        ],
        [
            (one - e1) * (e4 * p2 * x2 - (one - e4) * p4 * x4),
            (one - e2) * ((one - e4) * p2 * x2 - e4 * p4 * x4),
            r2 * (p2 * x2 * x2 - p4 * x4 * x4),
        ],
    ];
    if !(kappa[0][2] > T::zero() && kappa[1][2] > T::zero()) {
        return Err(domain("kappa_j3 vanishes"));
    }
    let (vt1, st1) = tilde_terms(e3, p1, x1, p3, x3);
    let (vt2, st2) = tilde_terms(e4, p2, x2, p4, x4);
    let lam = lambda_abs2.sqrt();
    Ok(Coefficients {
        mode: Mode::Double,
        lambda_abs2,
        kappa,
        delta,
        phi: p.phi(),
        psi: [p.psi1, p.psi2],
        g2: [delta[0][1] * lam / kappa[0][2], delta[1][1] * lam / kappa[1][2]],
        g3: [(one - e1) / e1, e1 / (one - e1)],
        v2: [vt1 / e1, vt2 / (one - e1)],
        v2_tilde: [vt1, vt2],
        sig2: [st1 / e1, st2 / (one - e1)],
        sig2_tilde: [st1, st2],
        gains: p.gains(Mode::Double),
        xi: p.xi,
    })
}

/// Single homodyne reduction: beam splitters 1 and 2 removed, only photodiodes
/// 1 and 3 used. Row 2 of the result is zero. Takes `|lambda|^2` so that
/// `G_12` is concrete, as in the two-channel case.
pub fn single_homodyne_params<T: Real>(p: &CircuitParams<T>, lambda_abs2: T) -> Result<Coefficients<T>> {
    p.validate(Mode::Single)?;
    if !(lambda_abs2 > T::zero()) || !lambda_abs2.is_finite() {
        return Err(domain("lambda_abs2 must be positive"));
    }
    let one = T::one();
    let e3 = p.eta[2];
    let (p1, p3) = (p.eps[0], p.eps[2]);
    let (x1, x3) = (p.xi[0], p.xi[2]);
    let r = (e3 * (one - e3)).sqrt();
    let z = T::zero();
    let kappa = [
        [
            e3 * p1 * x1 * x1 + (one - e3) * p3 * x3 * x3,
            (one - e3) * p1 * x1 * x1 + e3 * p3 * x3 * x3,
            r * (p1 * x1 + p3 * x3),
        ],
        [z; 3],
    ];
    let delta = [
        [
            e3 * p1 * x1 - (one - e3) * p3 * x3,
            (one - e3) * p1 * x1 - e3 * p3 * x3,
            r * (p1 * x1 * x1 - p3 * x3 * x3),
        ],
        [z; 3],
    ];
    let (vt, st) = tilde_terms(e3, p1, x1, p3, x3);
    Ok(Coefficients {
        mode: Mode::Single,
        lambda_abs2,
        kappa,
        delta,
        phi: p.phi(),
        psi: [p.psi1, p.psi2],
        g2: [delta[0][1] * lambda_abs2.sqrt() / kappa[0][2], z],
        g3: [z, z],
        v2: [vt, z],
        v2_tilde: [vt, z],
        sig2: [st, z],
        sig2_tilde: [st, z],
        gains: p.gains(Mode::Single),
        xi: p.xi,
    })
}

impl<T: Real> Coefficients<T> {
    pub fn channels(&self) -> usize {
        self.mode.channels()
    }

    /// Right-hand side of `kappa_j2 = kappa_j3^2 (G_j3 + V_j^2 + sigma_j^2 + 1)`.
    pub fn kappa2_decomposed(&self, j: usize) -> T {
        let k3 = self.kappa[j][2];
        k3 * k3 * (self.g3[j] + self.v2[j] + self.sig2[j] + T::one())
    }

    /// Relative error of the decomposition identity, worst channel.
    pub fn decomposition_error(&self) -> T {
        (0..self.channels())
            .map(|j| ((self.kappa2_decomposed(j) - self.kappa[j][1]) / self.kappa[j][1]).abs())
            .fold(T::zero(), T::max)
    }

    /// Same coefficients at another oscillator rate.
    pub fn with_lambda_abs2(&self, lambda_abs2: T) -> Self {
        let mut c = *self;
        c.lambda_abs2 = lambda_abs2;
        let lam = lambda_abs2.sqrt();
        for j in 0..self.channels() {
            c.g2[j] = c.delta[j][1] * lam / c.kappa[j][2];
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{circuit, CircuitParams};
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        if b == 0.0 {
            a.abs()
        } else {
            ((a - b) / b).abs()
        }
    }

    #[test]
    fn balanced_closed_form() {
        let (eps, xi) = (0.83, 1.7);
        let c = derive_coefficients(&CircuitParams::balanced(eps, xi), 1e6).unwrap();
        for j in 0..2 {
            assert!(rel(c.kappa[j][0], eps * xi * xi / 2.0) < 1e-15);
            assert!(rel(c.kappa[j][1], eps * xi * xi / 2.0) < 1e-15);
            assert!(rel(c.kappa[j][2], eps * xi / 2.0) < 1e-15);
            for i in 0..3 {
                assert_eq!(c.delta[j][i], 0.0);
            }
        }
    }

    #[test]
    fn unit_balanced_identity() {
        let c = derive_coefficients(&CircuitParams::balanced(1.0, 1.0), 3.0).unwrap();
        for j in 0..2 {
            assert_eq!(c.kappa[j][1], 0.5);
            assert_eq!(c.kappa[j][2], 0.5);
            assert_eq!(c.g3[j], 1.0);
            assert_eq!(c.v2[j], 0.0);
            assert_eq!(c.sig2[j], 0.0);
            assert_eq!(c.kappa2_decomposed(j), 0.5);
        }
    }

    #[test]
    fn imbalanced_against_scalar_evaluation() {
        let p = CircuitParams {
            eta: [0.5, 0.5, 0.45, 0.5],
            eps: [0.9, 0.85, 0.8, 0.85],
            xi: [1.1, 1.0, 1.0, 1.0],
            psi1: 0.0,
            psi2: 1.0,
        };
        let c = derive_coefficients(&p, 1.0).unwrap();
        let kappa = [
            [0.465_025_000_000_000_06, 0.479_475_000_000_000_06, 0.445_256_878_105_212_47],
            [0.425, 0.425, 0.425],
        ];
        let delta = [
            [0.002_750_000_000_000_021_2, 0.092_250_000_000_000_009, 0.071_887_842_330_953_331],
            [0.0, 0.0, 0.0],
        ];
        for j in 0..2 {
            for i in 0..3 {
                assert!(rel(c.kappa[j][i], kappa[j][i]) < 1e-14, "kappa{}{}", j + 1, i + 1);
                assert!((c.delta[j][i] - delta[j][i]).abs() < 1e-15, "delta{}{}", j + 1, i + 1);
            }
        }
    }

    #[test]
    fn single_homodyne_reductions() {
        let mut p = CircuitParams::balanced(0.7, 1.3);
        let c = single_homodyne_params(&p, 1.0).unwrap();
        assert!(rel(c.kappa[0][0], 0.7 * 1.69) < 1e-15);
        assert!(rel(c.kappa[0][1], 0.7 * 1.69) < 1e-15);
        assert!(rel(c.kappa[0][2], 0.7 * 1.3) < 1e-15);
        assert_eq!(c.delta[0], [0.0; 3]);

        let unit = single_homodyne_params(&CircuitParams::balanced(1.0, 1.0), 1.0).unwrap();
        let double = derive_coefficients(&CircuitParams::balanced(1.0, 1.0), 1.0).unwrap();
        assert_eq!(unit.kappa[0][1], 1.0);
        assert_eq!(unit.kappa[0][1], 2.0 * double.kappa[0][1]);

        p.eta[2] = 0.48;
        p.eps[0] = 0.95;
        p.eps[2] = 0.9;
        p.xi = [1.0; 4];
        let c = single_homodyne_params(&p, 1.0).unwrap();
        let expect_k = [0.924, 0.926, 0.924_259_703_762_962_92];
        let expect_d = [-0.012_000_000_000_000_066, 0.062, 0.024_979_991_993_593_56];
        for i in 0..3 {
            assert!(rel(c.kappa[0][i], expect_k[i]) < 1e-14);
            assert!((c.delta[0][i] - expect_d[i]).abs() < 1e-15);
        }
        assert_eq!(c.g3[0], 0.0);
        assert!(c.decomposition_error() < 1e-13);
    }

    #[test]
    fn domain_errors() {
        let mut p = CircuitParams::balanced(0.9, 1.0);
        p.eta[0] = 1.0;
        assert!(derive_coefficients(&p, 1.0).is_err());
        let mut p = CircuitParams::balanced(0.9, 1.0);
        p.eta[3] = 0.0;
        assert!(derive_coefficients(&p, 1.0).is_err());
        let mut p = CircuitParams::balanced(0.9, 1.0);
        p.eta[2] = 1.0;
        assert!(single_homodyne_params(&p, 1.0).is_err());
        let p = CircuitParams::balanced(0.0, 1.0);
        assert!(derive_coefficients(&p, 1.0).is_err());
        assert!(derive_coefficients(&CircuitParams::balanced(0.9, 1.0), 0.0).is_err());
    }

    #[test]
    fn phi_reduction() {
        let mut p = CircuitParams::balanced(1.0, 1.0);
        p.psi1 = 0.5;
        p.psi2 = 0.5 + 3.0 * std::f64::consts::PI;
        assert!((p.phi() - std::f64::consts::PI).abs() < 1e-12);
        p.psi2 = 0.5 - 0.25;
        assert!((p.phi() + 0.25).abs() < 1e-15);
        assert_eq!(reduce_angle(-std::f64::consts::PI), std::f64::consts::PI);
    }

    #[test]
    fn rebalancing_removes_delta2() {
        // (1 - eta3) eps1 xi1 = eta3 eps3 xi3
        let mut p = CircuitParams::balanced(0.9, 1.0);
        p.eta[2] = 0.4;
        p.eps[2] = 0.9;
        p.xi[2] = 0.6 * 0.9 * 1.0 / (0.4 * 0.9);
        let c = derive_coefficients(&p, 1.0).unwrap();
        assert!(c.delta[0][1].abs() < 1e-15);
        assert!(c.v2[0] < 1e-28);
    }

    #[test]
    fn f32_instantiation() {
        let c = derive_coefficients(&circuit::CircuitParams::<f32>::balanced(0.9, 1.0), 1e4).unwrap();
        assert!(c.decomposition_error() < 1e-6);
    }

    fn params() -> impl Strategy<Value = CircuitParams> {
        (
            prop::array::uniform4(0.01f64..0.99),
            prop::array::uniform4(0.05f64..=1.0),
            prop::array::uniform4(0.1f64..10.0),
            -10.0f64..10.0,
            -10.0f64..10.0,
        )
            .prop_map(|(eta, eps, xi, psi1, psi2)| CircuitParams { eta, eps, xi, psi1, psi2 })
    }

    proptest! {
        #[test]
        fn decomposition_identity(p in params(), lam in 1.0f64..1e16) {
            let c = derive_coefficients(&p, lam).unwrap();
            prop_assert!(c.decomposition_error() < 1e-12);
            prop_assert!((c.g3[0] * c.g3[1] - 1.0).abs() < 1e-12);
            for j in 0..2 {
                for i in 0..3 {
                    prop_assert!(c.kappa[j][i] >= 0.0);
                }
                prop_assert!(c.v2[j] >= 0.0 && c.sig2[j] >= 0.0);
            }
        }

        #[test]
        fn g2_linear_in_lambda(p in params(), lam in 1.0f64..1e12, s in 0.1f64..100.0) {
            let a = derive_coefficients(&p, lam).unwrap();
            let b = derive_coefficients(&p, lam * s * s).unwrap();
            for j in 0..2 {
                prop_assert!((b.g2[j] - s * a.g2[j]).abs() <= 1e-12 * b.g2[j].abs().max(1e-300));
            }
        }

        #[test]
        fn balanced_rows_equal(eps in 0.05f64..=1.0, xi in 0.1f64..10.0) {
            let c = derive_coefficients(&CircuitParams::balanced(eps, xi), 1.0).unwrap();
            prop_assert_eq!(c.kappa[0], c.kappa[1]);
            prop_assert_eq!(c.delta, [[0.0; 3]; 2]);
        }

        #[test]
        fn phi_in_range(p in params()) {
            let phi = p.phi();
            prop_assert!(phi > -std::f64::consts::PI && phi <= std::f64::consts::PI);
            prop_assert!(((phi - (p.psi2 - p.psi1)).sin()).abs() < 1e-9);
        }
    }
}
