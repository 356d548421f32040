//! Toeplitz hashing of ADC output into nearly uniform bits, plus two
//! frequency tests for the result.
//!
//! Bit order is fixed: bit `i` of a [`Bits`] value is bit `i % 8` of byte
//! `i / 8`, and ADC words are packed sample by sample, channel 1 first,
//! least significant bit first.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::ResolvedAdc;
use crate::error::{domain, Error, Result};
use crate::mc_sim::SampleBatch;
use crate::real::Real;

/// Packed bit string.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Bits {
    words: Vec<u64>,
    len: usize,
}

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Self { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut b = Self::zeros(bits.len());
        for (i, &v) in bits.iter().enumerate() {
            b.set(i, v);
        }
        b
    }

    /// The first `len` bits of `bytes`.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Self> {
        if len > bytes.len() * 8 {
            return Err(Error::LengthMismatch(format!("{len} bits requested from {} bytes", bytes.len())));
        }
        let mut b = Self::zeros(len);
        for (k, &byte) in bytes.iter().enumerate() {
            if k * 8 >= len {
                break;
            }
            b.words[k / 8] |= (byte as u64) << (8 * (k % 8));
        }
        b.mask_tail();
        Ok(b)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        (0..self.len.div_ceil(8)).map(|k| (self.words[k / 8] >> (8 * (k % 8))) as u8).collect()
    }

    pub fn to_hex(&self) -> String {
        self.to_bytes().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        let m = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= m;
        } else {
            self.words[i / 64] &= !m;
        }
    }

    /// Appends the `width` low bits of `value`, least significant first.
    pub fn push_word(&mut self, value: u64, width: u32) {
        for b in 0..width {
            let i = self.len;
            if i.is_multiple_of(64) {
                self.words.push(0);
            }
            self.len += 1;
            self.set(i, (value >> b) & 1 == 1);
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn xor(&self, other: &Self) -> Result<Self> {
        if self.len != other.len {
            return Err(Error::LengthMismatch(format!("{} vs {} bits", self.len, other.len)));
        }
        Ok(Self { words: self.words.iter().zip(&other.words).map(|(a, b)| a ^ b).collect(), len: self.len })
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.get(i))
    }

    fn mask_tail(&mut self) {
        let r = self.len % 64;
        if r != 0 {
            let last = self.words.len() - 1;
            self.words[last] &= (1u64 << r) - 1;
        }
    }

    fn reversed(&self) -> Self {
        let mut r = Self::zeros(self.len);
        for i in 0..self.len {
            if self.get(i) {
                r.set(self.len - 1 - i, true);
            }
        }
        r
    }

    /// 64 bits starting at bit `start`, zero beyond the end.
    fn word_at(&self, start: usize) -> u64 {
        let q = start / 64;
        let r = start % 64;
        let lo = self.words.get(q).copied().unwrap_or(0);
        if r == 0 {
            return lo;
        }
        let hi = self.words.get(q + 1).copied().unwrap_or(0);
        (lo >> r) | (hi << (64 - r))
    }
}

/// Leftover-hash output length `floor(m h - 2 log2(1 / eps))`, clamped to
/// `[0, max_bits]`.
pub fn required_output_length(m_samples: usize, h_bits: f64, security_eps: f64, max_bits: usize) -> Result<usize> {
    if !(security_eps > 0.0 && security_eps < 1.0) {
        return Err(domain("security parameter must be in (0, 1)"));
    }
    if !(h_bits.is_finite()) {
        return Err(domain("entropy per sample must be finite"));
    }
    let k = (m_samples as f64 * h_bits - 2.0 * (1.0 / security_eps).log2()).floor();
    Ok(if k <= 0.0 { 0 } else { (k as usize).min(max_bits) })
}

/// ADC words of a batch, packed channel 1 first, least significant bit first.
pub fn pack_adc_codes<T: Real>(batch: &SampleBatch<T>, adc: &ResolvedAdc<T>) -> Result<Bits> {
    if batch.channels != adc.channels {
        return Err(Error::LengthMismatch(format!("{} channels against a {}-channel ADC", batch.channels, adc.channels)));
    }
    let mut bits = Bits::default();
    for l in 0..batch.len() {
        for (j, &x) in batch.row(l).iter().enumerate() {
            bits.push_word(adc.clamped_code(j, x), adc.n_bits);
        }
    }
    Ok(bits)
}

const ROWS_PER_BLOCK: usize = 4096;

/// `out = T raw` over GF(2), with `T_ij = seed[i - j + n - 1]` for an input of `n` bits.
/// The seed must hold `n + out_len - 1` bits.
pub fn toeplitz_extract(raw: &Bits, seed: &Bits, out_len: usize) -> Result<Bits> {
    let n = raw.len();
    if out_len == 0 {
        return Ok(Bits::zeros(0));
    }
    if n == 0 {
        return Err(Error::LengthMismatch("empty input".into()));
    }
    if seed.len() != n + out_len - 1 {
        return Err(Error::LengthMismatch(format!("seed has {} bits, {} required", seed.len(), n + out_len - 1)));
    }
    // out_i = xor_k seed[i + k] & raw[n - 1 - k]
    let rev = raw.reversed();
    let nw = n.div_ceil(64);
    let blocks: Vec<Vec<bool>> = (0..out_len.div_ceil(ROWS_PER_BLOCK))
        .into_par_iter()
        .map(|b| {
            let lo = b * ROWS_PER_BLOCK;
            let hi = (lo + ROWS_PER_BLOCK).min(out_len);
            (lo..hi)
                .map(|i| {
                    let mut acc = 0u64;
                    for w in 0..nw {
                        acc ^= seed.word_at(i + 64 * w) & rev.words[w];
                    }
                    acc.count_ones() & 1 == 1
                })
                .collect()
        })
        .collect();
    let flat: Vec<bool> = blocks.into_iter().flatten().collect();
    Ok(Bits::from_bools(&flat))
}

/// Result of a frequency test; the sequence passes at level `alpha` when `p_value >= alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p_value: f64,
}

impl TestOutcome {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

/// Frequency (monobit) test.
pub fn monobit_test(bits: &Bits) -> Result<TestOutcome> {
    let n = bits.len();
    if n < 100 {
        return Err(domain("monobit test needs at least 100 bits"));
    }
    let s = 2.0 * bits.count_ones() as f64 - n as f64;
    let stat = s.abs() / (n as f64).sqrt();
    Ok(TestOutcome { statistic: stat, p_value: libm::erfc(stat / std::f64::consts::SQRT_2) })
}

/// Runs test; a sequence failing the frequency prerequisite gets p-value zero.
pub fn runs_test(bits: &Bits) -> Result<TestOutcome> {
    let n = bits.len();
    if n < 100 {
        return Err(domain("runs test needs at least 100 bits"));
    }
    let nf = n as f64;
    let pi = bits.count_ones() as f64 / nf;
    if (pi - 0.5).abs() >= 2.0 / nf.sqrt() {
        return Ok(TestOutcome { statistic: f64::INFINITY, p_value: 0.0 });
    }
    let mut runs = 1usize;
    let mut prev = bits.get(0);
    for i in 1..n {
        let b = bits.get(i);
        if b != prev {
            runs += 1;
        }
        prev = b;
    }
    let v = runs as f64;
    let stat = (v - 2.0 * nf * pi * (1.0 - pi)).abs() / (2.0 * (2.0 * nf).sqrt() * pi * (1.0 - pi));
    Ok(TestOutcome { statistic: stat, p_value: libm::erfc(stat) })
}
