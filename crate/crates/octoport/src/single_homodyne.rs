//! One difference channel: univariate entropy ledger and its table.

use serde::{Deserialize, Serialize};

use crate::analytic::NoiseBudget;
use crate::entropy::{h_ref_and_tables, ResolvedAdc, Table, TableKind, TABLE_N};
use crate::error::{domain, Result};
use crate::normal::{interval, two_sided_tail};
use crate::real::Real;

pub const TABLE_X_SINGLE: [f64; 7] = [3.0, 3.4, 4.0, 4.6, 6.1, 8.9, 9.5];

/// Gaussian model of one vacuum sample of the single channel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleBudget<T> {
    pub mu1: T,
    pub sigma1_2: T,
    pub upsilon1: T,
    pub theta1: T,
    pub kappa12: T,
    pub lambda_abs2: T,
    pub s0: T,
}

impl<T: Real> SingleBudget<T> {
    pub fn from_noise_budget(b: &NoiseBudget<T>) -> Result<Self> {
        if !(b.sigma2[0] > T::zero()) {
            return Err(domain("Sigma_1^2 must be positive"));
        }
        Ok(Self {
            mu1: b.means[0],
            sigma1_2: b.sigma2[0],
            upsilon1: b.upsilon[0],
            theta1: b.theta[0],
            kappa12: b.kappa2[0],
            lambda_abs2: b.lambda_abs2,
            s0: b.s0,
        })
    }

    pub fn sigma1(&self) -> T {
        self.sigma1_2.sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleMinEntropy<T> {
    /// `log2(sqrt(2 pi) Sigma_1 / delta_1)`
    pub approx: T,
    /// `-log2` of the mass of the centred bin, the largest one.
    pub numeric: T,
}

pub fn h_min_single<T: Real>(b: &SingleBudget<T>, adc: &ResolvedAdc<T>) -> SingleMinEntropy<T> {
    let s = b.sigma1();
    let d = adc.delta[0];
    let h = d / (T::c(2.0) * s);
    SingleMinEntropy { approx: ((T::c(2.0) * T::PI()).sqrt() * s / d).log2(), numeric: -interval(-h, h).log2() }
}

/// `n - 1/2 + log2(sqrt(pi) / x)` for half-range `x Sigma_1`.
pub fn h_min_single_table<T: Real>(n: u32, x: T) -> T {
    T::c(n as f64 - 0.5) + (T::PI().sqrt() / x).log2()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleSaturation<T> {
    pub p_sat: T,
    pub p_guess: T,
    pub condition_ok: bool,
}

/// Saturation probability `2 (1 - Phi(x))` against `x / (sqrt(pi) 2^(n - 1/2))`.
pub fn saturation_single<T: Real>(n: u32, x: T) -> SingleSaturation<T> {
    let p_sat = two_sided_tail(x);
    let p_guess = x / (T::PI().sqrt() * T::c(2f64.powf(n as f64 - 0.5)));
    SingleSaturation { p_sat, p_guess, condition_ok: p_sat < p_guess }
}

/// Classical-conditional min-entropy `log2(|lambda| sqrt(2 pi kappa_12) / (delta_1 E[1/R]))`.
pub fn h_cond_single<T: Real>(b: &SingleBudget<T>, adc: &ResolvedAdc<T>, inv_r_sqrt_s0: T) -> T {
    let e_inv_r = inv_r_sqrt_s0 / b.s0.sqrt();
    (b.lambda_abs2.sqrt() * (T::c(2.0) * T::PI() * b.kappa12).sqrt() / (adc.delta[0] * e_inv_r)).log2()
}

/// Loss from distrusting the classical noise:
/// `log2(1 + Upsilon_1 + Theta_1)/2 + log2(E[1/R] sqrt(S0))`.
pub fn loss_classical_single<T: Real>(upsilon1: T, theta1: T, inv_r_sqrt_s0: T) -> T {
    (T::one() + upsilon1 + theta1).log2() * T::c(0.5) + inv_r_sqrt_s0.log2()
}

/// Symmetric form with `Upsilon_1 = 2 eps Upsilon` and `Theta_1 = Theta / (2 eps)`.
pub fn loss_classical_single_symmetric(eps: f64, upsilon: f64, theta: f64, inv_r_sqrt_s0: f64) -> f64 {
    loss_classical_single(2.0 * eps * upsilon, theta / (2.0 * eps), inv_r_sqrt_s0)
}

/// Single-channel min-entropy over [`TABLE_N`] and [`TABLE_X_SINGLE`], blank
/// where saturation dominates.
pub fn table_single() -> Table {
    Table::build(TableKind::SingleEntropy, &TABLE_N, &TABLE_X_SINGLE, |n, x| {
        saturation_single(n, x).condition_ok.then(|| h_min_single_table(n, x))
    })
}

/// Single-channel entropy minus half the two-channel reference entropy at
/// equal `(n, x)`; zero up to rounding.
pub fn half_ref_gap<T: Real>(n: u32, x: T) -> T {
    h_min_single_table(n, x) - h_ref_and_tables(n, x, x).h_ref * T::c(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::vacuum_budget;
    use crate::circuit::single_homodyne_params;
    use crate::entropy::AdcConfig;

    #[test]
    fn table_cells() {
        let t = table_single();
        assert_eq!(t.format_cell(t.get(8, 3.0).unwrap()), "6.74");
        assert_eq!(t.format_cell(t.get(10, 6.1).unwrap()), "7.72");
        assert_eq!(t.get(10, 3.0), None);
        assert!((saturation_single(8, 3.0f64).p_sat - 0.0027).abs() < 5e-5);
    }

    #[test]
    fn centred_bin_mass() {
        let b = SingleBudget { mu1: 0.0, sigma1_2: 1.0, upsilon1: 0.0, theta1: 0.0, kappa12: 1.0, lambda_abs2: 1.0, s0: 1.0 };
        let nb = NoiseBudget::from_parts(1, [1.0; 2], [0.0; 2], 1.0, 1.0, 0.0, [0.0; 2]).unwrap();
        let adc = AdcConfig::multipliers(4, 3.0, 3.0).resolve(&nb).unwrap();
        let h = h_min_single(&b, &adc);
        assert!((2f64.powf(-h.numeric) - 1.487_313_763_117_944e-1).abs() < 1e-14);
        assert!(h.numeric >= h.approx);
    }

    #[test]
    fn half_of_the_two_channel_reference() {
        for n in TABLE_N {
            for x in [3.0f64, 4.0, 9.5] {
                assert!(half_ref_gap(n, x).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn classical_loss() {
        assert!((loss_classical_single_symmetric(0.9, 0.504f64.mul_add(-2.0, 1.0).powi(2) * 0.5e4, 0.12, 1.0) - 0.358_019_877_655_829_07).abs() < 1e-12);
        assert!((loss_classical_single_symmetric(0.8, 0.0064 * 0.5e4, 0.12, 1.0) - 2.854_024_625_851_108_5).abs() < 1e-12);
        assert!((loss_classical_single_symmetric(1.0, 0.0, 0.12, 2.0) - 1.0 - 0.042_032_132_394_237_242).abs() < 1e-12);
    }

    #[test]
    fn conditional_plus_loss_is_total() {
        let c = single_homodyne_params(&crate::CircuitParams::symmetric(0.46, 0.85, 1.0, 0.0), 1e12).unwrap();
        let nb = vacuum_budget(&c, 1e6, 0.08, [0.0; 2]).unwrap();
        let b = SingleBudget::from_noise_budget(&nb).unwrap();
        let adc = AdcConfig::multipliers(12, 4.0, 4.0).resolve(&nb).unwrap();
        let total = h_min_single(&b, &adc).approx;
        let cond = h_cond_single(&b, &adc, 1.0);
        assert!((total - cond - loss_classical_single(b.upsilon1, b.theta1, 1.0)).abs() < 1e-9);
    }
}
