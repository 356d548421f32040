use std::fmt::Write as _;
use std::io::Write;

use num_complex::Complex;
use octoport::analytic::{coherent_means, coherent_means_closed, density_bound_check, simplified_budget, vacuum_budget};
use octoport::circuit::derive_coefficients;
use octoport::detector::{r_l_squared, s0, s_minus_from_r2, MIN_WINDOW_STEPS};
use octoport::entropy::{
    curve_csv, entropy_report, figure_data, h_cond_classical, loss_correlation, table_ref_entropy, table_sat_ratio, Conditioning,
    Table, TABLE_N,
};
use octoport::extractor::{monobit_test, pack_adc_codes, required_output_length, runs_test, toeplitz_extract, Bits};
use octoport::laser::{default_dt, intensity_spectrum, rin_spectrum_and_eff, sample_trajectory, ThetaMode, TimeGrid};
use octoport::mc_sim::{empirical_moments, simulate, Regime};
use octoport::rng::derive_seed;
use octoport::single_homodyne::{half_ref_gap, table_single, TABLE_X_SINGLE};
use octoport::{CircuitParams, DetectorParams, LaserParams, NoiseBudget, SimConfig, Signal, SymmetricCase};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::FileConfig;
use crate::{Cli, CliError, Command, Format};

pub fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let cfg = cli.effective_config()?;
    let text = match &cli.command {
        Command::Simulate => simulate_cmd(&cfg, cli.format.unwrap_or(Format::Csv))?,
        Command::Moments => report(&cfg.budget()?, cli.format.unwrap_or(Format::Json))?,
        Command::Entropy => report(&entropy(&cfg)?, cli.format.unwrap_or(Format::Json))?,
        Command::Tables { which } => table_cmd(*which, cli.format.unwrap_or(Format::Csv))?,
        Command::Figures { which } => {
            let points = figure_data(*which)?;
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => curve_csv(&points),
                Format::Json => json(&points)?,
            }
        }
        Command::Spectra => spectra(&cfg, cli.format.unwrap_or(Format::Csv))?,
        Command::Extract => extract(&cfg, cli.format)?,
        Command::Validate => return validate(cli),
    };
    emit(cli, &text)
}

fn emit(cli: &Cli, text: &str) -> Result<(), CliError> {
    match &cli.out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn json<T: Serialize + ?Sized>(v: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// JSON, or `key,value` lines for the scalar fields of a flat record.
fn report<T: Serialize>(v: &T, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => json(v),
        Format::Csv => {
            let value = serde_json::to_value(v).map_err(|e| CliError::Io(e.to_string()))?;
            let mut out = String::from("key,value\n");
            if let serde_json::Value::Object(map) = value {
                for (k, v) in map {
                    flatten(&k, &v, &mut out);
                }
            }
            Ok(out)
        }
    }
}

fn flatten(key: &str, v: &serde_json::Value, out: &mut String) {
    match v {
        serde_json::Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                flatten(&format!("{key}.{}", i + 1), item, out);
            }
        }
        serde_json::Value::Null => {
            let _ = writeln!(out, "{key},");
        }
        other => {
            let _ = writeln!(out, "{key},{other}");
        }
    }
}

#[derive(Serialize)]
struct BatchJson<'a> {
    regime: Regime,
    seed: u64,
    m: usize,
    channels: usize,
    samples: Vec<&'a [f64]>,
}

fn simulate_cmd(cfg: &FileConfig, format: Format) -> Result<String, CliError> {
    let sim = cfg.sim_config()?;
    let batch = simulate(&sim)?;
    match format {
        Format::Csv => {
            let mut buf = Vec::new();
            batch.write_csv(&mut buf)?;
            String::from_utf8(buf).map_err(|e| CliError::Io(e.to_string()))
        }
        Format::Json => json(&BatchJson {
            regime: sim.regime,
            seed: sim.seed,
            m: batch.len(),
            channels: batch.channels,
            samples: (0..batch.len()).map(|l| batch.row(l)).collect(),
        }),
    }
}

/// `S_-` and `E[1/R] sqrt(S0)`: from the config when given, estimated from
/// sampled oscillator windows when the laser has intensity noise, ideal otherwise.
pub fn conditioning(cfg: &FileConfig, b: &NoiseBudget) -> Result<Conditioning<f64>, CliError> {
    if let Some(s) = cfg.s_minus {
        return Ok(Conditioning { s_minus: s, inv_r_sqrt_s0: cfg.inv_r_sqrt_s0.unwrap_or(1.0) });
    }
    let laser = cfg.laser()?;
    if !laser.has_intensity_noise() {
        return Ok(Conditioning { s_minus: b.s0, inv_r_sqrt_s0: cfg.inv_r_sqrt_s0.unwrap_or(1.0) });
    }
    let d = cfg.detector(&laser)?;
    let n = cfg.conditioning_samples.unwrap_or(2000);
    let seed = derive_seed(cfg.seed.unwrap_or(0), u64::MAX - 1);
    let dt = cfg.dt.unwrap_or_else(|| default_dt(&laser, d.kappa_resp));
    let r2 = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let grid = TimeGrid::window(d.tau, d.tau, dt, MIN_WINDOW_STEPS)?;
            r_l_squared(&sample_trajectory(&laser, grid, derive_seed(seed, i)), &d, laser.lambda_abs2, d.tau)
        })
        .collect::<octoport::Result<Vec<_>>>()?;
    let est = s_minus_from_r2(&r2, s0(&d))?;
    Ok(Conditioning {
        s_minus: est.estimate.min(b.s0),
        inv_r_sqrt_s0: cfg.inv_r_sqrt_s0.unwrap_or(est.inv_r_sqrt_s0.max(1.0)),
    })
}

pub fn entropy(cfg: &FileConfig) -> Result<octoport::EntropyReport, CliError> {
    let coeff = cfg.coefficients()?;
    let b = cfg.budget()?;
    let cond = conditioning(cfg, &b)?;
    Ok(entropy_report(&coeff, &b, &cfg.adc()?, &cond)?)
}

fn table_cmd(which: u32, format: Format) -> Result<String, CliError> {
    let t: Table = match which {
        1 => table_ref_entropy(),
        2 => table_sat_ratio(),
        3 => table_single(),
        _ => return Err(CliError::Config(format!("--which must be 1, 2 or 3 for tables, got {which}"))),
    };
    match format {
        Format::Csv => Ok(t.to_csv()),
        Format::Json => json(&t),
    }
}

#[derive(Serialize)]
struct SpectrumRow {
    mu: f64,
    field: Option<f64>,
    pi_rin: f64,
}

#[derive(Serialize)]
struct Spectra {
    rin_eff: f64,
    rows: Vec<SpectrumRow>,
}

fn spectra(cfg: &FileConfig, format: Format) -> Result<String, CliError> {
    let laser = cfg.laser()?;
    let points = cfg.points.unwrap_or(201);
    if points < 2 {
        return Err(CliError::Config("points must be at least 2".into()));
    }
    let mu_max = cfg.mu_max.unwrap_or(10.0 * (laser.gamma0 + laser.gamma1) + laser.omega0.abs());
    if mu_max.is_nan() || mu_max <= 0.0 {
        return Err(CliError::Config("mu_max must be positive".into()));
    }
    let rows: Vec<SpectrumRow> = (0..points)
        .map(|i| {
            let mu = mu_max * i as f64 / (points - 1) as f64;
            SpectrumRow { mu, field: intensity_spectrum(&laser, mu).ok(), pi_rin: rin_spectrum_and_eff(&laser, mu).pi_rin }
        })
        .collect();
    let rin_eff = rin_spectrum_and_eff(&laser, 0.0).rin_eff;
    match format {
        Format::Json => json(&Spectra { rin_eff, rows }),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["mu", "field", "pi_rin"]).map_err(|e| CliError::Io(e.to_string()))?;
            for r in &rows {
                let field = r.field.map(|v| format!("{v:e}")).unwrap_or_default();
                w.write_record([format!("{:e}", r.mu), field, format!("{:e}", r.pi_rin)]).map_err(|e| CliError::Io(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

#[derive(Serialize)]
struct Extraction {
    samples: usize,
    raw_bits: usize,
    out_bits: usize,
    h_cond_classical: f64,
    security_eps: f64,
    monobit_p: Option<f64>,
    runs_p: Option<f64>,
    hex: String,
}

fn extract(cfg: &FileConfig, format: Option<Format>) -> Result<String, CliError> {
    let sim = cfg.sim_config()?;
    let batch = simulate(&sim)?;
    let coeff = cfg.coefficients()?;
    let b = cfg.budget()?;
    let cond = conditioning(cfg, &b)?;
    let adc = cfg.adc()?;
    let rep = entropy_report(&coeff, &b, &adc, &cond)?;
    let raw = pack_adc_codes(&batch, &adc.resolve(&b)?)?;
    let eps = cfg.security_eps.unwrap_or(1e-10);
    let out = required_output_length(batch.len(), rep.h_cond_classical, eps, cfg.max_bits.unwrap_or(usize::MAX))?;
    let bits = if out == 0 {
        Bits::zeros(0)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(sim.seed, u64::MAX));
        let seed: Vec<bool> = (0..raw.len() + out - 1).map(|_| rng.random()).collect();
        toeplitz_extract(&raw, &Bits::from_bools(&seed), out)?
    };
    match format {
        Some(Format::Json) => json(&Extraction {
            samples: batch.len(),
            raw_bits: raw.len(),
            out_bits: out,
            h_cond_classical: rep.h_cond_classical,
            security_eps: eps,
            monobit_p: monobit_test(&bits).ok().map(|t| t.p_value),
            runs_p: runs_test(&bits).ok().map(|t| t.p_value),
            hex: bits.to_hex(),
        }),
        Some(Format::Csv) => Err(CliError::Config("extract writes hex or json".into())),
        None => Ok(format!("{}\n", bits.to_hex())),
    }
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn validate(cli: &Cli) -> Result<(), CliError> {
    let seed = cli.seed.unwrap_or(1);
    let checks = vec![
        check_decomposition(seed)?,
        check_symmetric_budget()?,
        check_loss_curves()?,
        check_single_half()?,
        check_density_bound(seed)?,
        check_toeplitz(seed)?,
        check_coherent_means()?,
        check_strong_lo(seed)?,
    ];
    let mut text = String::new();
    let mut failed = 0;
    for c in &checks {
        failed += usize::from(!c.pass);
        let _ = writeln!(text, "{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    emit(cli, &text)?;
    if failed > 0 {
        return Err(CliError::Validation(failed));
    }
    Ok(())
}

fn random_circuit(r: &mut ChaCha8Rng) -> CircuitParams {
    let mut u = |lo: f64, hi: f64| r.random_range(lo..hi);
    CircuitParams {
        eta: [u(0.05, 0.95), u(0.05, 0.95), u(0.05, 0.95), u(0.05, 0.95)],
        eps: [u(0.3, 1.0), u(0.3, 1.0), u(0.3, 1.0), u(0.3, 1.0)],
        xi: [u(0.2, 5.0), u(0.2, 5.0), u(0.2, 5.0), u(0.2, 5.0)],
        psi1: u(-3.0, 3.0),
        psi2: u(-3.0, 3.0),
    }
}

fn check_decomposition(seed: u64) -> Result<Check, CliError> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let c = derive_coefficients(&random_circuit(&mut r), 10f64.powf(r.random_range(2.0..16.0)))?;
        worst = worst.max(c.decomposition_error());
    }
    Ok(Check { name: "coefficient decomposition", pass: worst < 1e-12, detail: format!("worst relative error {worst:.2e}") })
}

fn check_symmetric_budget() -> Result<Check, CliError> {
    let mut worst = 0.0f64;
    for eta in [0.46, 0.48, 0.5, 0.503] {
        for eps in [0.7, 0.85, 1.0] {
            let case = SymmetricCase::reference(eta, eps);
            let a = simplified_budget(&case)?;
            let s = case.sigma_el();
            let b = vacuum_budget(&case.coefficients(1.0)?, case.s0, case.c0, [s; 2])?;
            for j in 0..2 {
                worst = worst.max((a.sigma2[j] / b.sigma2[j] - 1.0).abs());
            }
            worst = worst.max((a.e12 / b.e12 - 1.0).abs());
        }
    }
    Ok(Check { name: "symmetric budget", pass: worst < 1e-12, detail: format!("worst relative gap {worst:.2e}") })
}

fn check_loss_curves() -> Result<Check, CliError> {
    let phi = std::f64::consts::FRAC_PI_2;
    let mut worst = 0.0f64;
    for fig in 2..=5 {
        for p in figure_data(fig)? {
            let case = SymmetricCase::reference(p.eta, p.eps);
            let b = vacuum_budget(&case.coefficients(phi)?, case.s0, case.c0, [case.sigma_el(); 2])?;
            let got = if fig <= 3 {
                loss_correlation(&b)
            } else {
                let adc = octoport::AdcConfig::multipliers(12, 5.0, 5.0).resolve(&b)?;
                h_cond_classical(&b, &adc, case.s0)?.loss_vs_ref
            };
            worst = worst.max((got - p.loss).abs());
        }
    }
    Ok(Check { name: "loss curves", pass: worst < 1e-10, detail: format!("closed form against pipeline, worst gap {worst:.1e}") })
}

fn check_single_half() -> Result<Check, CliError> {
    let mut worst = 0.0f64;
    for n in TABLE_N {
        for x in TABLE_X_SINGLE {
            worst = worst.max(half_ref_gap(n, x).abs());
        }
    }
    Ok(Check { name: "single channel half entropy", pass: worst < 1e-12, detail: format!("worst gap {worst:.1e}") })
}

fn check_density_bound(seed: u64) -> Result<Check, CliError> {
    let mut r = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut worst = 0.0f64;
    let mut n = 0;
    while n < 1000 {
        let c = derive_coefficients(&random_circuit(&mut r), 1e8)?;
        if c.phi.sin().abs() < 0.1 {
            continue;
        }
        let b = density_bound_check(&c, 10f64.powf(r.random_range(-3.0..6.0)))?;
        worst = worst.max(b.vacuum_peak / b.bound);
        n += 1;
    }
    Ok(Check { name: "density bound", pass: worst <= 1.0 + 1e-14, detail: format!("max peak/bound {worst:.6}") })
}

fn check_toeplitz(seed: u64) -> Result<Check, CliError> {
    let mut r = ChaCha8Rng::seed_from_u64(seed ^ 0x7e91);
    let mut bad = 0;
    for _ in 0..100 {
        let n = r.random_range(1..=64);
        let out = r.random_range(1..=64);
        let raw: Vec<bool> = (0..n).map(|_| r.random()).collect();
        let s: Vec<bool> = (0..n + out - 1).map(|_| r.random()).collect();
        let got = toeplitz_extract(&Bits::from_bools(&raw), &Bits::from_bools(&s), out)?;
        let want: Vec<bool> = (0..out).map(|i| (0..n).fold(false, |acc, j| acc ^ (s[i + n - 1 - j] & raw[j]))).collect();
        bad += usize::from(got.iter().collect::<Vec<_>>() != want);
    }
    Ok(Check { name: "toeplitz extractor", pass: bad == 0, detail: format!("{bad}/100 mismatches against the matrix product") })
}

fn check_coherent_means() -> Result<Check, CliError> {
    let p = CircuitParams { eta: [0.5, 0.5, 0.45, 0.5], eps: [0.9, 0.85, 0.8, 0.85], xi: [1.1, 1.0, 1.0, 1.0], psi1: 0.3, psi2: 1.9 };
    let laser = LaserParams::new(4.0, 2.0, 0.3, 0.64, 1.0, ThetaMode::Fixed(0.5))?;
    let d = DetectorParams::new(3.0, [0.0; 2], Some(&laser))?;
    let c = derive_coefficients(&p, laser.lambda_abs2)?;
    let sig = Signal::Coherent { amplitude: Complex::new(0.7, -0.2), omega: 1.5 };
    let a = coherent_means(&c, &sig, &laser, &d, 2.5)?;
    let b = coherent_means_closed(&c, &sig, &laser, &d, 2.5);
    let gap = (a[0] - b[0]).abs().max((a[1] - b[1]).abs());
    Ok(Check { name: "coherent means", pass: gap < 1e-8, detail: format!("quadrature against closed form, gap {gap:.1e}") })
}

fn check_strong_lo(seed: u64) -> Result<Check, CliError> {
    let laser = LaserParams::new(1e6, 0.0, 10.0, 0.5, 1e3, ThetaMode::Uniform)?;
    let detector = DetectorParams::new(1e3, [0.0; 2], Some(&laser))?;
    let circuit = CircuitParams::symmetric(0.45, 0.9, 1.0, 1.0);
    let cfg = SimConfig { regime: Regime::StrongLo, signal: Signal::Vacuum, mode: Default::default(), m: 20_000, seed, circuit, laser, detector, dt: None, electronic_noise: false };
    let m = empirical_moments(&simulate(&cfg)?)?;
    let b = vacuum_budget(&cfg.coefficients()?, s0(&detector), octoport::detector::c0(&detector, &laser), [0.0; 2])?;
    let mut worst = 0.0f64;
    for j in 0..2 {
        worst = worst.max(((m.mean[j] - b.means[j]) / m.mean_se[j]).abs());
    }
    for (i, j) in [(0, 0), (1, 1), (0, 1)] {
        worst = worst.max(((m.cov[i][j] - b.cov[i][j]) / m.cov_se[i][j]).abs());
    }
    Ok(Check { name: "strong-oscillator moments", pass: worst < 5.0, detail: format!("max |z| {worst:.2} over means and covariances") })
}
