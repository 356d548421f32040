//! Min-entropy ledger of the digitized outputs: guessing and saturation
//! probabilities, the reference, total and conditional min-entropies, their
//! losses, and the tables and curves built from them.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::analytic::NoiseBudget;
use crate::circuit::{Coefficients, Mode};
use crate::error::{domain, Error, Result};
use crate::mc_sim::SampleBatch;
use crate::normal::{interval, outside_box, rectangle, two_sided_tail};
use crate::real::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdcRange<T> {
    /// Half-ranges `R_j = x_j Sigma_j`.
    Multipliers([T; 2]),
    /// Half-ranges in volts.
    Volts([T; 2]),
}

/// An `n`-bit ADC per channel with half-range `R_j`, so `delta_j = 2 R_j / 2^n`.
/// Ranges are centred on the channel means unless `centers` is given.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdcConfig<T> {
    pub n_bits: u32,
    pub range: AdcRange<T>,
    #[serde(default)]
    pub centers: Option<[T; 2]>,
}

impl<T: Real> AdcConfig<T> {
    pub fn multipliers(n_bits: u32, x1: T, x2: T) -> Self {
        Self { n_bits, range: AdcRange::Multipliers([x1, x2]), centers: None }
    }

    pub fn volts(n_bits: u32, r1: T, r2: T) -> Self {
        Self { n_bits, range: AdcRange::Volts([r1, r2]), centers: None }
    }

    pub fn resolve(&self, b: &NoiseBudget<T>) -> Result<ResolvedAdc<T>> {
        if !(2..=64).contains(&self.n_bits) {
            return Err(domain("ADC resolution must be between 2 and 64 bits"));
        }
        let levels = T::c(2f64.powi(self.n_bits as i32));
        let mut out = ResolvedAdc { n_bits: self.n_bits, channels: b.channels, half_range: [T::zero(); 2], delta: [T::zero(); 2], centers: [T::zero(); 2] };
        for j in 0..b.channels {
            let r = match self.range {
                AdcRange::Multipliers(x) => x[j] * b.sigma(j),
                AdcRange::Volts(r) => r[j],
            };
            if !(r > T::zero()) || !r.is_finite() {
                return Err(domain("ADC range must be positive"));
            }
            out.half_range[j] = r;
            out.delta[j] = T::c(2.0) * r / levels;
            out.centers[j] = self.centers.map_or(b.means[j], |c| c[j]);
        }
        Ok(out)
    }
}

/// ADC with every range, step and centre in volts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolvedAdc<T> {
    pub n_bits: u32,
    pub channels: usize,
    pub half_range: [T; 2],
    pub delta: [T; 2],
    pub centers: [T; 2],
}

impl<T: Real> ResolvedAdc<T> {
    pub fn levels(&self) -> i128 {
        1i128 << self.n_bits
    }

    /// Bin index of `x` on channel `j`; `-1` and `2^n` are the saturation cells.
    pub fn code(&self, j: usize, x: T) -> i128 {
        let lower = self.centers[j] - self.half_range[j];
        let v = ((x - lower) / self.delta[j]).floor().to_f();
        if v < 0.0 || v.is_nan() {
            -1
        } else if v >= 2f64.powi(self.n_bits as i32) {
            self.levels()
        } else {
            (v as i128).min(self.levels() - 1)
        }
    }

    /// Output word of the ADC, saturating at the ends of the range.
    pub fn clamped_code(&self, j: usize, x: T) -> u64 {
        self.code(j, x).clamp(0, self.levels() - 1) as u64
    }

    fn delta_product(&self) -> T {
        (0..self.channels).map(|j| self.delta[j]).fold(T::one(), |a, d| a * d)
    }
}

fn check_budget<T: Real>(b: &NoiseBudget<T>) -> Result<()> {
    if (0..b.channels).any(|j| !(b.sigma2[j] > T::zero())) || !(b.det_c > T::zero()) {
        return Err(Error::SingularCovariance);
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuessingProb<T> {
    /// Largest bin mass over bin positions.
    pub numeric: T,
    /// Small-bin form `delta_1 delta_2 sup p`.
    pub approx: T,
    /// Offset of the best bin centre from the mean, in units of `Sigma_j`.
    pub offset: [T; 2],
}

fn golden_max<T: Real, F: Fn(T) -> T>(f: F, mut a: T, mut b: T, iters: usize) -> (T, T) {
    let g = T::c(0.618_033_988_749_894_8);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Maximizes the Gaussian mass of one `delta_1 x delta_2` bin over bin
/// positions within half a bin of the mode: a coarse grid, then golden-section
/// refinement along each axis.
pub fn guessing_prob_numeric<T: Real>(b: &NoiseBudget<T>, adc: &ResolvedAdc<T>) -> Result<GuessingProb<T>> {
    check_budget(b)?;
    let two = T::c(2.0);
    let approx = match b.channels {
        2 => adc.delta_product() / (two * T::PI() * b.det_c.sqrt()),
        _ => adc.delta[0] / ((two * T::PI()).sqrt() * b.sigma(0)),
    };
    let h: Vec<T> = (0..b.channels).map(|j| adc.delta[j] / (two * b.sigma(j))).collect();
    if b.channels == 1 {
        let mass = |o: T| interval(o - h[0], o + h[0]);
        let (o, p) = golden_max(mass, -h[0], h[0], 60);
        let p0 = mass(T::zero());
        let (o, p) = if p0 >= p { (T::zero(), p0) } else { (o, p) };
        return Ok(GuessingProb { numeric: p, approx, offset: [o, T::zero()] });
    }
    let rho = b.rho();
    let mass = |o1: T, o2: T| rectangle(o1 - h[0], o1 + h[0], o2 - h[1], o2 + h[1], rho);
    let grid = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let mut best = (T::zero(), T::zero(), mass(T::zero(), T::zero()));
    for g1 in grid {
        for g2 in grid {
            let (o1, o2) = (h[0] * T::c(g1), h[1] * T::c(g2));
            let p = mass(o1, o2);
            if p > best.2 {
                best = (o1, o2, p);
            }
        }
    }
    for _ in 0..2 {
        let (o1, p1) = golden_max(|o| mass(o, best.1), -h[0], h[0], 40);
        if p1 > best.2 {
            best = (o1, best.1, p1);
        }
        let (o2, p2) = golden_max(|o| mass(best.0, o), -h[1], h[1], 40);
        if p2 > best.2 {
            best = (best.0, o2, p2);
        }
    }
    Ok(GuessingProb { numeric: best.2, approx, offset: [best.0, best.1] })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinEntropy<T> {
    pub numeric: T,
    pub approx: T,
    pub guess: GuessingProb<T>,
}

/// Min-entropy of one digitized sample with every noise source trusted.
pub fn h_min_total<T: Real>(b: &NoiseBudget<T>, adc: &ResolvedAdc<T>) -> Result<MinEntropy<T>> {
    let guess = guessing_prob_numeric(b, adc)?;
    Ok(MinEntropy { numeric: -guess.numeric.log2(), approx: -guess.approx.log2(), guess })
}

/// Reference entropy `log2(2 pi Sigma_1 Sigma_2 / (delta_1 delta_2))`.
pub fn h_ref<T: Real>(b: &NoiseBudget<T>, adc: &ResolvedAdc<T>) -> T {
    let two_pi = T::c(2.0) * T::PI();
    match b.channels {
        2 => (two_pi * b.sigma(0) * b.sigma(1) / adc.delta_product()).log2(),
        _ => (two_pi.sqrt() * b.sigma(0) / adc.delta[0]).log2(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefEntry<T> {
    pub h_ref: T,
    /// Saturation over guessing probability, both without correlations.
    pub ratio: T,
    pub condition_ok: bool,
}

/// `H_ref = 2n - 1 - log2(x1 x2 / pi)` and the saturation/guessing ratio for ranges `x_j Sigma_j`.
pub fn h_ref_and_tables<T: Real>(n: u32, x1: T, x2: T) -> RefEntry<T> {
    let pi = T::PI();
    let h_ref = T::c(2.0 * n as f64 - 1.0) - (x1 * x2 / pi).log2();
    let guess = x1 * x2 / (pi * T::c(2f64.powi(2 * n as i32 - 1)));
    let sat = outside_box(x1, x2, T::zero());
    let ratio = sat / guess;
    RefEntry { h_ref, ratio, condition_ok: ratio < T::one() }
}

/// Entropy lost to the RIN correlation between the channels.
pub fn loss_correlation<T: Real>(b: &NoiseBudget<T>) -> T {
    if b.channels < 2 {
        return T::zero();
    }
    // 1 - rho^2 = E12 / ((1 + T1 + U1)(1 + T2 + U2)), kept free of cancellation near |rho| = 1
    let [u1, u2] = b.upsilon;
    T::c(0.5) * (u1 * u2 / b.e12).ln_1p() / T::LN_2()
}

/// Scaled resolutions `delta_j / (|lambda| sqrt(2 kappa_j2 S0))`.
pub fn scaled_deltas<T: Real>(b: &NoiseBudget<T>, adc: &ResolvedAdc<T>) -> [T; 2] {
    let mut d = [T::zero(); 2];
    for j in 0..b.channels {
        d[j] = adc.delta[j] / (b.lambda_abs2 * T::c(2.0) * b.kappa2[j] * b.s0).sqrt();
    }
    d
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalConditional<T> {
    /// Average min-entropy conditioned on laser and electronic noise.
    pub h_cond: T,
    /// Min-entropy in vacuum-noise units.
    pub h0: T,
    /// `H0 - H_cond = log2(S0 / S_-)`
    pub loss_vs_h0: T,
    /// Total minus conditional: `log2(S0/S_-) + log2(E12)/2`.
    pub loss_vs_total: T,
    /// Reference minus conditional: `log2(S0/S_-) + sum_j log2(1 + Theta_j + Upsilon_j)/2`.
    pub loss_vs_ref: T,
}

/// Classical-conditional min-entropy of the two-channel detector.
pub fn h_cond_classical<T: Real>(b: &NoiseBudget<T>, adc: &ResolvedAdc<T>, s_minus: T) -> Result<ClassicalConditional<T>> {
    check_budget(b)?;
    if b.channels != 2 {
        return Err(domain("two channels required; see the single-homodyne ledger"));
    }
    if !(s_minus > T::zero()) || s_minus > b.s0 * (T::one() + T::c(1e-12)) {
        return Err(domain("S_- must lie in (0, S0]"));
    }
    let two = T::c(2.0);
    let h_cond = (two * T::PI() * b.lambda_abs2 * (b.kappa2[0] * b.kappa2[1]).sqrt() * s_minus / adc.delta_product()).log2();
    let [d1, d2] = scaled_deltas(b, adc);
    let h0 = (T::PI() / (d1 * d2)).log2();
    let ratio = (b.s0 / s_minus).log2();
    let one = T::one();
    let spread = ((one + b.theta[0] + b.upsilon[0]) * (one + b.theta[1] + b.upsilon[1])).log2() * T::c(0.5);
    Ok(ClassicalConditional { h_cond, h0, loss_vs_h0: ratio, loss_vs_total: T::c(0.5) * b.e12.log2() + ratio, loss_vs_ref: ratio + spread })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantumBound<T> {
    /// Per-sample lower bound valid for any signal state.
    pub h_lb: T,
    /// Classical-conditional minus the bound.
    pub loss: T,
    /// The bound is negative and gives no randomness.
    pub negative: bool,
}

/// Lower bound on the min-entropy conditioned on classical noise and on the signal port.
pub fn h_lb_quantum<T: Real>(coeff: &Coefficients<T>, adc: &ResolvedAdc<T>, s_minus: T) -> Result<QuantumBound<T>> {
    if coeff.mode != Mode::Double {
        return Err(domain("two channels required"));
    }
    let s = coeff.phi.sin().abs();
    if !(s > T::zero()) {
        return Err(domain("sin phi vanishes"));
    }
    let k13k23 = coeff.kappa[0][2] * coeff.kappa[1][2];
    let h_lb = (T::c(4.0) * T::PI() * k13k23 * s * coeff.lambda_abs2 * s_minus / adc.delta_product()).log2();
    let loss = ((coeff.kappa[0][1] * coeff.kappa[1][1]).sqrt() / (T::c(2.0) * k13k23 * s)).log2();
    Ok(QuantumBound { h_lb, loss, negative: h_lb < T::zero() })
}

/// Probability that a sample leaves the ADC rectangle.
pub fn saturation_prob<T: Real>(b: &NoiseBudget<T>, adc: &ResolvedAdc<T>) -> Result<T> {
    check_budget(b)?;
    let mut lo = [T::zero(); 2];
    let mut hi = [T::zero(); 2];
    let mut centred = true;
    for j in 0..b.channels {
        let s = b.sigma(j);
        lo[j] = (adc.centers[j] - adc.half_range[j] - b.means[j]) / s;
        hi[j] = (adc.centers[j] + adc.half_range[j] - b.means[j]) / s;
        centred &= adc.centers[j] == b.means[j];
    }
    Ok(match (b.channels, centred) {
        (1, true) => two_sided_tail(hi[0]),
        (1, false) => T::one() - interval(lo[0], hi[0]),
        (_, true) => outside_box(hi[0], hi[1], b.rho()),
        _ => T::one() - rectangle(lo[0], hi[0], lo[1], hi[1], b.rho()),
    })
}

/// Average `S_-` and `E[1/R] sqrt(S0)` of the oscillator; both equal the
/// ideal values when the smoothed intensity does not fluctuate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Conditioning<T> {
    pub s_minus: T,
    pub inv_r_sqrt_s0: T,
}

impl<T: Real> Conditioning<T> {
    pub fn ideal(s0: T) -> Self {
        Self { s_minus: s0, inv_r_sqrt_s0: T::one() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport<T> {
    pub channels: usize,
    pub h_min_total: T,
    pub h_min_total_approx: T,
    pub h_ref: T,
    pub h0: T,
    pub h_cond_classical: T,
    pub h_lb_quantum: Option<T>,
    pub loss_correlation: T,
    pub loss_classical: T,
    pub loss_classical_vs_ref: T,
    pub loss_quantum: Option<T>,
    pub h_lb_negative: bool,
    pub p_guess: T,
    pub p_guess_approx: T,
    pub p_saturation: T,
    pub sat_condition_ok: bool,
    pub delta: [T; 2],
    pub s0: T,
    pub s_minus: T,
}

/// Full ledger for a vacuum signal. Two-channel reports need `coeff` in
/// double mode; single-channel budgets defer to the single-homodyne formulas.
pub fn entropy_report<T: Real>(coeff: &Coefficients<T>, b: &NoiseBudget<T>, adc: &AdcConfig<T>, cond: &Conditioning<T>) -> Result<EntropyReport<T>> {
    let r = adc.resolve(b)?;
    let total = h_min_total(b, &r)?;
    let p_sat = saturation_prob(b, &r)?;
    let href = h_ref(b, &r);
    if b.channels == 1 {
        let s = crate::single_homodyne::SingleBudget::from_noise_budget(b)?;
        let h_cond = crate::single_homodyne::h_cond_single(&s, &r, cond.inv_r_sqrt_s0);
        let d0 = scaled_deltas(b, &r)[0];
        return Ok(EntropyReport {
            channels: 1,
            h_min_total: total.numeric,
            h_min_total_approx: total.approx,
            h_ref: href,
            h0: (T::PI().sqrt() / d0).log2(),
            h_cond_classical: h_cond,
            h_lb_quantum: None,
            loss_correlation: T::zero(),
            loss_classical: total.approx - h_cond,
            loss_classical_vs_ref: href - h_cond,
            loss_quantum: None,
            h_lb_negative: false,
            p_guess: total.guess.numeric,
            p_guess_approx: total.guess.approx,
            p_saturation: p_sat,
            sat_condition_ok: p_sat < total.guess.numeric,
            delta: r.delta,
            s0: b.s0,
            s_minus: cond.s_minus,
        });
    }
    let c = h_cond_classical(b, &r, cond.s_minus)?;
    let q = h_lb_quantum(coeff, &r, cond.s_minus)?;
    Ok(EntropyReport {
        channels: 2,
        h_min_total: total.numeric,
        h_min_total_approx: total.approx,
        h_ref: href,
        h0: c.h0,
        h_cond_classical: c.h_cond,
        h_lb_quantum: Some(q.h_lb),
        loss_correlation: loss_correlation(b),
        loss_classical: c.loss_vs_total,
        loss_classical_vs_ref: c.loss_vs_ref,
        loss_quantum: Some(q.loss),
        h_lb_negative: q.negative,
        p_guess: total.guess.numeric,
        p_guess_approx: total.guess.approx,
        p_saturation: p_sat,
        sat_condition_ok: p_sat < total.guess.numeric,
        delta: r.delta,
        s0: b.s0,
        s_minus: cond.s_minus,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalEntropy {
    pub m: usize,
    pub max_count: u64,
    pub saturated: u64,
    /// `-log2` of the largest bin frequency.
    pub h_plugin: f64,
    /// One-sided Clopper-Pearson upper limit on the largest bin probability.
    pub p_upper: f64,
    pub h_lower: f64,
    pub confidence: f64,
}

/// Bins a batch on the ADC grid, the saturation cells included, and reports
/// the plug-in min-entropy with a conservative lower limit.
pub fn empirical_min_entropy<T: Real>(batch: &SampleBatch<T>, adc: &ResolvedAdc<T>, confidence: f64) -> Result<EmpiricalEntropy> {
    if batch.channels != adc.channels {
        return Err(Error::LengthMismatch(format!("{} channels against a {}-channel ADC", batch.channels, adc.channels)));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(domain("confidence must be in (0, 1)"));
    }
    let m = batch.len();
    if m == 0 {
        return Err(domain("empty batch"));
    }
    let top = adc.levels();
    let mut counts: HashMap<(i128, i128), u64> = HashMap::new();
    let mut saturated = 0u64;
    for l in 0..m {
        let row = batch.row(l);
        let c1 = adc.code(0, row[0]);
        let c2 = if adc.channels == 2 { adc.code(1, row[1]) } else { 0 };
        if c1 < 0 || c1 >= top || c2 < 0 || c2 >= top {
            saturated += 1;
        }
        *counts.entry((c1, c2)).or_default() += 1;
    }
    let k = counts.values().copied().max().unwrap_or(0);
    let n = m as f64;
    let p_upper = if k as usize >= m {
        1.0
    } else {
        Beta::new(k as f64 + 1.0, n - k as f64).map_err(|e| domain(e.to_string()))?.inverse_cdf(confidence)
    };
    Ok(EmpiricalEntropy {
        m,
        max_count: k,
        saturated,
        h_plugin: -(k as f64 / n).log2(),
        p_upper,
        h_lower: -p_upper.log2(),
        confidence,
    })
}

pub const TABLE_N: [u32; 5] = [8, 10, 12, 16, 32];
pub const TABLE_X_DOUBLE: [f64; 7] = [3.8, 4.0, 4.6, 5.1, 6.0, 8.9, 9.5];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableKind {
    /// Reference entropy, blank where saturation dominates.
    RefEntropy,
    /// Saturation over guessing probability.
    SatGuessRatio,
    /// Single-channel min-entropy, blank where saturation dominates.
    SingleEntropy,
}

/// Grid of values indexed by ADC bits (rows) and range multiplier (columns).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub kind: TableKind,
    pub n_values: Vec<u32>,
    pub x_values: Vec<f64>,
    pub cells: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn build<F: Fn(u32, f64) -> Option<f64> + Sync>(kind: TableKind, n_values: &[u32], x_values: &[f64], cell: F) -> Self {
        let cells = n_values.par_iter().map(|&n| x_values.iter().map(|&x| cell(n, x)).collect()).collect();
        Self { kind, n_values: n_values.to_vec(), x_values: x_values.to_vec(), cells }
    }

    pub fn get(&self, n: u32, x: f64) -> Option<f64> {
        let i = self.n_values.iter().position(|&v| v == n)?;
        let j = self.x_values.iter().position(|&v| (v - x).abs() < 1e-9)?;
        self.cells[i][j]
    }

    pub fn format_cell(&self, v: f64) -> String {
        match self.kind {
            TableKind::SatGuessRatio => format!("{v:.1e}"),
            _ => format!("{v:.2}"),
        }
    }

    fn rows(&self) -> Vec<Vec<String>> {
        let mut out = vec![std::iter::once("n".to_string()).chain(self.x_values.iter().map(|x| format!("{x:.1}"))).collect()];
        for (i, n) in self.n_values.iter().enumerate() {
            let mut r = vec![n.to_string()];
            r.extend(self.cells[i].iter().map(|c| c.map(|v| self.format_cell(v)).unwrap_or_default()));
            out.push(r);
        }
        out
    }

    pub fn to_csv(&self) -> String {
        self.rows().iter().map(|r| r.join(",") + "\n").collect()
    }

    /// Right-aligned columns for terminals.
    pub fn to_text(&self) -> String {
        let rows = self.rows();
        let width = rows.iter().flatten().map(|s| s.len()).max().unwrap_or(1);
        rows.iter().map(|r| r.iter().map(|s| format!("{s:>width$}")).collect::<Vec<_>>().join("  ") + "\n").collect()
    }
}

/// Reference entropy table over [`TABLE_N`] and [`TABLE_X_DOUBLE`].
pub fn table_ref_entropy() -> Table {
    Table::build(TableKind::RefEntropy, &TABLE_N, &TABLE_X_DOUBLE, |n, x| {
        let e = h_ref_and_tables(n, x, x);
        e.condition_ok.then_some(e.h_ref)
    })
}

/// Saturation/guessing ratio table over [`TABLE_N`] and [`TABLE_X_DOUBLE`].
pub fn table_sat_ratio() -> Table {
    Table::build(TableKind::SatGuessRatio, &TABLE_N, &TABLE_X_DOUBLE, |n, x| Some(h_ref_and_tables(n, x, x).ratio))
}

/// Symmetric-family loss from the RIN correlation, with `upsilon` the
/// unscaled ratio `(1 - 2 eta)^2 |lambda|^2 C0 / (2 S0)`.
pub fn loss_correlation_symmetric(eps: f64, upsilon: f64, theta: f64) -> f64 {
    if upsilon == 0.0 {
        return 0.0;
    }
    let q = 1.0 + 1.0 / (eps * upsilon) + theta / (eps * eps * upsilon);
    -0.5 * (-1.0 / (q * q)).ln_1p() / std::f64::consts::LN_2
}

/// Symmetric-family loss of the classical-conditional entropy against the reference.
pub fn loss_classical_symmetric(eps: f64, upsilon: f64, theta: f64, s0_over_s_minus: f64) -> f64 {
    s0_over_s_minus.log2() + (1.0 + eps * upsilon + theta / eps).log2()
}

/// Symmetric-family loss of the quantum bound against the classical-conditional entropy.
pub fn loss_quantum_symmetric(eta: f64, eps: f64, sin_phi: f64) -> f64 {
    -(4.0 * eta * (1.0 - eta) * eps * sin_phi.abs()).log2()
}

pub const ETA_SMALL_IMBALANCE: [f64; 4] = [0.5, 0.502, 0.503, 0.504];
pub const ETA_LARGE_IMBALANCE: [f64; 3] = [0.46, 0.47, 0.48];

/// Efficiencies 0.70, 0.71, ..., 1.00.
pub fn eps_grid() -> Vec<f64> {
    (70..=100).map(|k| k as f64 / 100.0).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossCurve {
    Correlation,
    Classical,
    Quantum,
    Single,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub eta: f64,
    pub eps: f64,
    pub loss: f64,
}

/// Loss curves of the symmetric family against efficiency, for the
/// reference parameter set (`|lambda|^2 C0 / (2 S0) = 5e3`, `Theta = 0.12`,
/// `S_- = S0`, `E[1/R] sqrt(S0) = 1`, `|sin phi| = 1`).
pub fn loss_curve(kind: LossCurve, etas: &[f64], eps: &[f64]) -> Vec<CurvePoint> {
    let scale = 0.5e4;
    let theta = 0.12;
    let mut out = Vec::with_capacity(etas.len() * eps.len());
    for &eta in etas {
        let ups = (1.0 - 2.0 * eta).powi(2) * scale;
        for &e in eps {
            let loss = match kind {
                LossCurve::Correlation => loss_correlation_symmetric(e, ups, theta),
                LossCurve::Classical => loss_classical_symmetric(e, ups, theta, 1.0),
                LossCurve::Quantum => loss_quantum_symmetric(eta, e, 1.0),
                LossCurve::Single => crate::single_homodyne::loss_classical_single_symmetric(e, ups, theta, 1.0),
            };
            out.push(CurvePoint { eta, eps: e, loss });
        }
    }
    out
}

/// Curve data behind each loss figure: 2 and 3 correlation, 4 and 5
/// classical conditioning, 6 and 7 single channel; even numbers use the
/// small imbalances, odd numbers the large ones.
pub fn figure_data(figure: u32) -> Result<Vec<CurvePoint>> {
    let (kind, small) = match figure {
        2 => (LossCurve::Correlation, true),
        3 => (LossCurve::Correlation, false),
        4 => (LossCurve::Classical, true),
        5 => (LossCurve::Classical, false),
        6 => (LossCurve::Single, true),
        7 => (LossCurve::Single, false),
        _ => return Err(domain(format!("no loss figure {figure}"))),
    };
    let etas: &[f64] = if small { &ETA_SMALL_IMBALANCE } else { &ETA_LARGE_IMBALANCE };
    Ok(loss_curve(kind, etas, &eps_grid()))
}

/// CSV with columns `eta, eps, loss_percent, loss_bits`, where
/// `loss_percent = 100 (1 - eps)` is the photodiode loss.
pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut s = String::from("eta,eps,loss_percent,loss_bits\n");
    for p in points {
        s.push_str(&format!("{},{:.2},{:.0},{:.12e}\n", p.eta, p.eps, 100.0 * (1.0 - p.eps), p.loss));
    }
    s
}
