//! Flat key-value configuration file.

use std::path::Path;

use num_complex::Complex;
use octoport::analytic::vacuum_budget;
use octoport::circuit::{derive_coefficients, single_homodyne_params, Mode};
use octoport::detector::{c0, default_tau, s0};
use octoport::entropy::AdcRange;
use octoport::laser::ThetaMode;
use octoport::mc_sim::Regime;
use octoport::{AdcConfig, CircuitParams, Coefficients, DetectorParams, LaserParams, NoiseBudget, SimConfig, Signal};
use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum ThetaKey {
    Name(String),
    Value(f64),
}

/// Every key is optional; absent keys take the documented defaults.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub eta1: Option<f64>,
    pub eta2: Option<f64>,
    pub eta3: Option<f64>,
    pub eta4: Option<f64>,
    pub eps1: Option<f64>,
    pub eps2: Option<f64>,
    pub eps3: Option<f64>,
    pub eps4: Option<f64>,
    pub xi1: Option<f64>,
    pub xi2: Option<f64>,
    pub xi3: Option<f64>,
    pub xi4: Option<f64>,
    pub psi1: Option<f64>,
    pub psi2: Option<f64>,

    pub lambda_abs2: Option<f64>,
    pub omega0: Option<f64>,
    pub gamma0: Option<f64>,
    pub w2: Option<f64>,
    pub gamma1: Option<f64>,
    pub theta: Option<ThetaKey>,

    pub kappa_resp: Option<f64>,
    pub sigma_el1: Option<f64>,
    pub sigma_el2: Option<f64>,
    pub tau: Option<f64>,
    pub dt_sample: Option<f64>,

    pub m: Option<usize>,
    pub seed: Option<u64>,
    pub regime: Option<Regime>,
    pub mode: Option<Mode>,
    pub dt: Option<f64>,
    pub electronic_noise: Option<bool>,
    pub signal: Option<String>,
    pub alpha_re: Option<f64>,
    pub alpha_im: Option<f64>,
    pub omega_s: Option<f64>,

    pub c0: Option<f64>,
    pub adc_bits: Option<u32>,
    pub x1: Option<f64>,
    pub x2: Option<f64>,
    pub range1: Option<f64>,
    pub range2: Option<f64>,
    pub center1: Option<f64>,
    pub center2: Option<f64>,
    pub s_minus: Option<f64>,
    pub inv_r_sqrt_s0: Option<f64>,
    pub conditioning_samples: Option<usize>,

    pub security_eps: Option<f64>,
    pub max_bits: Option<usize>,

    pub mu_max: Option<f64>,
    pub points: Option<usize>,
}

fn cfg_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| cfg_err(e.to_string()))
    }

    pub fn mode(&self) -> Mode {
        self.mode.unwrap_or_default()
    }

    pub fn circuit(&self) -> CircuitParams {
        let g = |v: Option<f64>, d: f64| v.unwrap_or(d);
        CircuitParams {
            eta: [g(self.eta1, 0.5), g(self.eta2, 0.5), g(self.eta3, 0.5), g(self.eta4, 0.5)],
            eps: [g(self.eps1, 1.0), g(self.eps2, 1.0), g(self.eps3, 1.0), g(self.eps4, 1.0)],
            xi: [g(self.xi1, 1.0), g(self.xi2, 1.0), g(self.xi3, 1.0), g(self.xi4, 1.0)],
            psi1: g(self.psi1, 0.0),
            psi2: g(self.psi2, std::f64::consts::FRAC_PI_2),
        }
    }

    pub fn laser(&self) -> Result<LaserParams, CliError> {
        let theta = match &self.theta {
            None => ThetaMode::Uniform,
            Some(ThetaKey::Value(t)) => ThetaMode::Fixed(*t),
            Some(ThetaKey::Name(s)) if s == "uniform" => ThetaMode::Uniform,
            Some(ThetaKey::Name(s)) => return Err(cfg_err(format!("theta must be \"uniform\" or a number, got {s:?}"))),
        };
        Ok(LaserParams::new(
            self.lambda_abs2.unwrap_or(1e6),
            self.omega0.unwrap_or(0.0),
            self.gamma0.unwrap_or(0.0),
            self.w2.unwrap_or(1.0),
            self.gamma1.unwrap_or(1e3),
            theta,
        )?)
    }

    pub fn detector(&self, laser: &LaserParams) -> Result<DetectorParams, CliError> {
        let kappa = self.kappa_resp.unwrap_or(1e3);
        let tau = self.tau.unwrap_or_else(|| default_tau(kappa, Some(laser)));
        let d = DetectorParams {
            kappa_resp: kappa,
            sigma_el: [self.sigma_el1.unwrap_or(0.0), self.sigma_el2.unwrap_or(0.0)],
            tau,
            dt_sample: self.dt_sample.unwrap_or(tau),
        };
        d.validate(Some(laser))?;
        Ok(d)
    }

    pub fn signal(&self) -> Result<Signal, CliError> {
        match self.signal.as_deref().unwrap_or("vacuum") {
            "vacuum" => Ok(Signal::Vacuum),
            "coherent" => Ok(Signal::Coherent {
                amplitude: Complex::new(self.alpha_re.unwrap_or(0.0), self.alpha_im.unwrap_or(0.0)),
                omega: self.omega_s.unwrap_or(0.0),
            }),
            s => Err(cfg_err(format!("signal must be \"vacuum\" or \"coherent\", got {s:?}"))),
        }
    }

    pub fn sim_config(&self) -> Result<SimConfig, CliError> {
        let laser = self.laser()?;
        let cfg = SimConfig {
            regime: self.regime.unwrap_or(Regime::StrongLo),
            signal: self.signal()?,
            mode: self.mode(),
            m: self.m.unwrap_or(1000),
            seed: self.seed.unwrap_or(0),
            circuit: self.circuit(),
            laser,
            detector: self.detector(&laser)?,
            dt: self.dt,
            electronic_noise: self.electronic_noise.unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn coefficients(&self) -> Result<Coefficients, CliError> {
        let l2 = self.laser()?.lambda_abs2;
        Ok(match self.mode() {
            Mode::Double => derive_coefficients(&self.circuit(), l2)?,
            Mode::Single => single_homodyne_params(&self.circuit(), l2)?,
        })
    }

    /// Vacuum budget with `S0` and `C0` from the detector and laser unless `c0` is given.
    pub fn budget(&self) -> Result<NoiseBudget, CliError> {
        let laser = self.laser()?;
        let d = self.detector(&laser)?;
        let c = self.c0.unwrap_or_else(|| c0(&d, &laser));
        Ok(vacuum_budget(&self.coefficients()?, s0(&d), c, d.sigma_el)?)
    }

    pub fn adc(&self) -> Result<AdcConfig, CliError> {
        let n = self.adc_bits.unwrap_or(10);
        let range = match (self.range1, self.range2, self.x1, self.x2) {
            (Some(r1), r2, None, None) => AdcRange::Volts([r1, r2.unwrap_or(r1)]),
            (None, None, x1, x2) => {
                let x1 = x1.unwrap_or(5.0);
                AdcRange::Multipliers([x1, x2.unwrap_or(x1)])
            }
            _ => return Err(cfg_err("give either range1/range2 or x1/x2, not both")),
        };
        let centers = match (self.center1, self.center2) {
            (None, None) => None,
            (c1, c2) => Some([c1.unwrap_or(0.0), c2.unwrap_or(0.0)]),
        };
        Ok(AdcConfig { n_bits: n, range, centers })
    }
}
