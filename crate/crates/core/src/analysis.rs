//! Reconstruction error functionals, the mean-square error bound `P_bar(m)`,
//! window selection and Monte-Carlo certification of the ultimate
//! path-following error.
//!
//! ```text
//! p(theta) = |c_d(theta) - c^(theta)|^2,       P = int_0^{2 pi} p(theta) dtheta
//! P_bar(m) = 2 pi (m^2 / N^2)(s1^2 + s2^2) + 2 pi sum_{k in Zbar_N \ Zbar_m} |a_k|^2
//! F(m)     = P_bar(m) - P_bar(m - 1),  m >= 2
//! ```

use std::f64::consts::TAU;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::gvf::GvfParams;
use crate::pathdata::{add_noise, NoiseSpec, PathSamples};
use crate::sim::{integrate, SimConfig};
use crate::spectrum::{apply_window, dft, index_bounds, window_len, Spectrum};
use crate::trigpath::TrigPath;
use crate::{Error, Result};

/// Smallest accepted quadrature size.
pub const MIN_QUAD_POINTS: usize = 64;

/// Absolute slack on `e_ms <= delta`, covering round-off when `delta = 0`.
pub const PASS_ABS_TOL: f64 = 1e-9;

/// Uniform-rule size that integrates `|a - b|^2` exactly for these curves.
pub fn exact_quad_points(a: &TrigPath, b: &TrigPath) -> usize {
    let h = a.max_harmonic().max(b.max_harmonic()) as usize;
    (2 * h + 1).max(MIN_QUAD_POINTS)
}

/// `int_0^{2 pi} |truth(theta) - approx(theta)|^2 dtheta` by the uniform rule.
pub fn reconstruction_mse(truth: &TrigPath, approx: &TrigPath, quad_points: usize) -> Result<f64> {
    if quad_points < MIN_QUAD_POINTS {
        return Err(Error::InvalidParameter(format!(
            "quad_points must be >= {MIN_QUAD_POINTS}, got {quad_points}"
        )));
    }
    let h = TAU / quad_points as f64;
    let sum: f64 = (0..quad_points)
        .map(|i| {
            let theta = h * i as f64;
            let (xd, yd) = truth.eval(theta);
            let (xa, ya) = approx.eval(theta);
            (xd - xa).powi(2) + (yd - ya).powi(2)
        })
        .sum();
    Ok(sum * h)
}

fn check_sigmas(sigma1: f64, sigma2: f64) -> Result<f64> {
    NoiseSpec::new(sigma1, sigma2, 0).map(|s| s.variance_sum())
}

fn check_window(m: usize, n: usize) -> Result<()> {
    if m == 0 || m > n {
        Err(Error::WindowOutOfRange { m, n })
    } else {
        Ok(())
    }
}

/// Noise part of the bound, `2 pi (m^2 / N^2)(s1^2 + s2^2)`.
pub fn noise_term(m: usize, n: usize, sigma1: f64, sigma2: f64) -> f64 {
    let ratio = m as f64 / n as f64;
    TAU * ratio * ratio * (sigma1 * sigma1 + sigma2 * sigma2)
}

/// Expected integrated in-window noise energy,
/// `2 pi |Zbar_m| (s1^2 + s2^2) / N`, obtained from Parseval and the
/// per-bin noise variance `(s1^2 + s2^2) / N`. Reported next to
/// [`noise_term`] for comparison.
pub fn noise_energy_expected(m: usize, n: usize, sigma1: f64, sigma2: f64) -> f64 {
    TAU * window_len(m, n) as f64 * (sigma1 * sigma1 + sigma2 * sigma2) / n as f64
}

/// `P_bar(m)` with the tail taken from `spec`.
pub fn p_bar(spec: &Spectrum, m: usize, sigma1: f64, sigma2: f64) -> Result<f64> {
    check_sigmas(sigma1, sigma2)?;
    let tail = crate::spectrum::tail_energy(spec, m)?;
    Ok(noise_term(m, spec.n(), sigma1, sigma2) + TAU * tail)
}

/// `F(m) = P_bar(m) - P_bar(m - 1)`, by direct difference.
pub fn f_backward(spec: &Spectrum, m: usize, sigma1: f64, sigma2: f64) -> Result<f64> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "F(m) needs m >= 2, got {m}"
        )));
    }
    Ok(p_bar(spec, m, sigma1, sigma2)? - p_bar(spec, m - 1, sigma1, sigma2)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub m: usize,
    pub p_bar: f64,
    /// `None` for `m = 1`.
    pub f_backward: Option<f64>,
}

/// `P_bar` and `F` for `m = 1..=m_max`.
///
/// Tails are accumulated from the outermost frequency inwards, one shell
/// `Zbar_m \ Zbar_{m-1}` at a time, so the sweep costs `O(N + m_max)`.
pub fn sweep(spec: &Spectrum, sigma1: f64, sigma2: f64, m_max: usize) -> Result<Vec<SweepRow>> {
    check_sigmas(sigma1, sigma2)?;
    let n = spec.n();
    check_window(m_max, n)?;
    // Energy at |k| = j, j = 0..=N/2 (Nyquist counted once).
    let half = n / 2;
    let mut shell = vec![0.0; half + 1];
    for (k, a) in spec.iter() {
        shell[k.unsigned_abs() as usize] += a.norm_sqr();
    }
    // suffix[j] = energy strictly above |k| = j - 1, i.e. at |k| >= j.
    let mut suffix = vec![0.0; half + 2];
    for j in (0..=half).rev() {
        suffix[j] = suffix[j + 1] + shell[j];
    }
    let mut rows: Vec<SweepRow> = Vec::with_capacity(m_max);
    for m in 1..=m_max {
        let (_, hi) = index_bounds(m);
        let tail = suffix[hi as usize + 1];
        let value = noise_term(m, n, sigma1, sigma2) + TAU * tail;
        let f = rows.last().map(|prev| value - prev.p_bar);
        rows.push(SweepRow {
            m,
            p_bar: value,
            f_backward: f,
        });
    }
    Ok(rows)
}

/// `argmin_{m in 1..=m_max} P_bar(m)`, ties going to the smaller `m`.
pub fn select_window(
    spec: &Spectrum,
    sigma1: f64,
    sigma2: f64,
    m_max: usize,
) -> Result<(usize, f64)> {
    let rows = sweep(spec, sigma1, sigma2, m_max)?;
    let best = rows
        .iter()
        .fold(None::<&SweepRow>, |best, r| match best {
            Some(b) if b.p_bar <= r.p_bar => Some(b),
            _ => Some(r),
        })
        .expect("m_max >= 1");
    Ok((best.m, best.p_bar))
}

/// Integrated in-window noise error
/// `int |sum_{k in Zbar_m} (a_k - a~_k) e^{jk theta}|^2 dtheta`.
pub fn p1_integral(clean: &Spectrum, noisy: &Spectrum, m: usize) -> Result<f64> {
    let a = TrigPath::new(&apply_window(clean, m)?);
    let b = TrigPath::new(&apply_window(noisy, m)?);
    reconstruction_mse(&a, &b, exact_quad_points(&a, &b))
}

/// Integrated truncation error `int |sum_{k outside Zbar_m} a_k e^{jk theta}|^2 dtheta`.
pub fn p2_integral(clean: &Spectrum, m: usize) -> Result<f64> {
    let full = TrigPath::new(clean);
    let cut = TrigPath::new(&apply_window(clean, m)?);
    reconstruction_mse(&full, &cut, exact_quad_points(&full, &cut))
}

/// Seed of Monte-Carlo run `run` under `master` (SplitMix64 of
/// `master + (run + 1) * 0x9E3779B97F4A7C15`).
pub fn run_seed(master: u64, run: usize) -> u64 {
    let mut z = master.wrapping_add((run as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// How the ultimate error is read off a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum EmsReading {
    /// Noise-ensemble mean of `e(theta(t), t)`.
    #[default]
    Ensemble,
    /// `int_0^{2 pi} e dtheta` with `e` independent of `theta`: `2 pi e`.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaSource {
    /// Tail energy from the noise-free spectrum.
    Clean,
    /// Tail energy from noisy coefficients; an estimate only.
    NoisyEstimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertifyOptions {
    pub runs: usize,
    /// Final fraction of the horizon averaged as the ultimate error.
    pub tail_fraction: f64,
    pub reading: EmsReading,
    /// Upper end of the `P_bar`/`F` sweep table, default `N`.
    pub sweep_max: Option<usize>,
    pub delta_source: DeltaSource,
}

impl CertifyOptions {
    pub fn new(runs: usize) -> Self {
        Self {
            runs,
            tail_fraction: 0.1,
            reading: EmsReading::Ensemble,
            sweep_max: None,
            delta_source: DeltaSource::Clean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub run: usize,
    pub seed: u64,
    /// Ultimate error of this run.
    pub e_ms: f64,
    /// Integrated reconstruction error `P` of this realization.
    pub p_integral: f64,
    /// Integrated in-window noise error of this realization.
    pub p1_integral: f64,
}

/// Certification result. Serialized as JSON with the field names below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub n: usize,
    pub m: usize,
    pub sigma1: f64,
    pub sigma2: f64,
    pub master_seed: u64,
    pub runs: usize,
    pub reading: EmsReading,
    pub tail_fraction: f64,
    /// Mean over runs of `P`.
    pub p_integral_p: f64,
    pub p_bar: f64,
    pub f_backward: Option<f64>,
    pub noise_term: f64,
    pub tail_term: f64,
    pub p1_mean: f64,
    pub noise_energy_expected: f64,
    pub e_ms_runs: Vec<f64>,
    pub e_ms_final: f64,
    pub delta: f64,
    pub delta_source: DeltaSource,
    pub pass: bool,
    pub per_run: Vec<RunOutcome>,
    pub sweep: Vec<SweepRow>,
}

impl ErrorReport {
    /// Flat `key = value` block, floats with 17 significant digits.
    pub fn to_text(&self) -> String {
        use crate::fmt::f64_17 as f;
        let mut s = String::new();
        let opt = |v: Option<f64>| v.map(f).unwrap_or_else(|| "none".into());
        let _ = writeln!(s, "n = {}", self.n);
        let _ = writeln!(s, "m = {}", self.m);
        let _ = writeln!(s, "sigma1 = {}", f(self.sigma1));
        let _ = writeln!(s, "sigma2 = {}", f(self.sigma2));
        let _ = writeln!(s, "master_seed = {}", self.master_seed);
        let _ = writeln!(s, "runs = {}", self.runs);
        let _ = writeln!(
            s,
            "reading = {}",
            match self.reading {
                EmsReading::Ensemble => "ensemble",
                EmsReading::Literal => "literal",
            }
        );
        let _ = writeln!(s, "tail_fraction = {}", f(self.tail_fraction));
        let _ = writeln!(s, "P = {}", f(self.p_integral_p));
        let _ = writeln!(s, "P_bar = {}", f(self.p_bar));
        let _ = writeln!(s, "F = {}", opt(self.f_backward));
        let _ = writeln!(s, "noise_term = {}", f(self.noise_term));
        let _ = writeln!(s, "tail_term = {}", f(self.tail_term));
        let _ = writeln!(s, "p1_mean = {}", f(self.p1_mean));
        let _ = writeln!(
            s,
            "noise_energy_expected = {}",
            f(self.noise_energy_expected)
        );
        for (i, e) in self.e_ms_runs.iter().enumerate() {
            let _ = writeln!(s, "e_ms_run.{i} = {}", f(*e));
        }
        let _ = writeln!(s, "e_ms_final = {}", f(self.e_ms_final));
        let _ = writeln!(s, "delta = {}", f(self.delta));
        let _ = writeln!(
            s,
            "delta_source = {}",
            match self.delta_source {
                DeltaSource::Clean => "clean",
                DeltaSource::NoisyEstimate => "noisy_estimate",
            }
        );
        let _ = writeln!(s, "pass = {}", self.pass);
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }

    pub fn sweep_csv(&self) -> String {
        sweep_csv(&self.sweep)
    }
}

/// `m,p_bar,f_backward` table; `f_backward` is empty at `m = 1`.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("m,p_bar,f_backward\n");
    for r in rows {
        let f = r.f_backward.map(crate::fmt::f64_17).unwrap_or_default();
        let _ = writeln!(s, "{},{},{}", r.m, crate::fmt::f64_17(r.p_bar), f);
    }
    s
}

/// Monte-Carlo certification with default options.
pub fn certify(
    clean: &PathSamples,
    noise: &NoiseSpec,
    m: usize,
    params: &GvfParams,
    cfg: &SimConfig,
    runs: usize,
) -> Result<ErrorReport> {
    certify_with(clean, noise, m, params, cfg, &CertifyOptions::new(runs))
}

/// For each run: perturb `clean` with seed [`run_seed`]`(noise.seed, run)`,
/// transform, window at `m`, follow the resulting field from `cfg.eta0` and
/// average `e(theta(t), t)` against the full clean reconstruction over the
/// final `tail_fraction` of the horizon. `e_ms_final` is the mean over runs.
///
/// `delta = P_bar(m)` takes its tail from the clean spectrum, or with
/// [`DeltaSource::NoisyEstimate`] from the single observed realization
/// `add_noise(clean, noise)`, as when no ground truth exists.
pub fn certify_with(
    clean: &PathSamples,
    noise: &NoiseSpec,
    m: usize,
    params: &GvfParams,
    cfg: &SimConfig,
    opts: &CertifyOptions,
) -> Result<ErrorReport> {
    if opts.runs == 0 {
        return Err(Error::InvalidParameter("runs must be >= 1".into()));
    }
    if !(opts.tail_fraction > 0.0 && opts.tail_fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tail_fraction must lie in (0, 1], got {}",
            opts.tail_fraction
        )));
    }
    cfg.validate()?;
    let n = clean.len();
    check_window(m, n)?;
    let clean_spec = dft(clean);
    let truth = TrigPath::new(&clean_spec);
    let bound_spec = match opts.delta_source {
        DeltaSource::Clean => clean_spec.clone(),
        DeltaSource::NoisyEstimate => dft(&add_noise(clean, noise)),
    };
    let delta = p_bar(&bound_spec, m, noise.sigma1, noise.sigma2)?;
    let t_start = (1.0 - opts.tail_fraction) * cfg.duration;

    let per_run: Vec<RunOutcome> = (0..opts.runs)
        .into_par_iter()
        .map(|run| {
            let seed = run_seed(noise.seed, run);
            let wrap = |e: Error| Error::Run {
                run,
                source: Box::new(e),
            };
            let noisy_spec = dft(&add_noise(clean, &noise.with_seed(seed)));
            let approx = TrigPath::new(&apply_window(&noisy_spec, m).map_err(wrap)?);
            let traj = integrate(&approx, params, cfg, Some(&truth)).map_err(wrap)?;
            let tail: Vec<f64> = traj
                .rows()
                .iter()
                .filter(|r| r.t >= t_start)
                .map(|r| r.e_inst)
                .collect();
            let mut e_ms = tail.iter().sum::<f64>() / tail.len() as f64;
            if opts.reading == EmsReading::Literal {
                e_ms *= TAU;
            }
            let p_integral =
                reconstruction_mse(&truth, &approx, exact_quad_points(&truth, &approx))
                    .map_err(wrap)?;
            let p1 = p1_integral(&clean_spec, &noisy_spec, m).map_err(wrap)?;
            Ok(RunOutcome {
                run,
                seed,
                e_ms,
                p_integral,
                p1_integral: p1,
            })
        })
        .collect::<Result<_>>()?;

    let mean =
        |f: fn(&RunOutcome) -> f64| per_run.iter().map(f).sum::<f64>() / per_run.len() as f64;
    let e_ms_final = mean(|r| r.e_ms);
    let sweep_max = opts.sweep_max.unwrap_or(n).clamp(1, n);
    Ok(ErrorReport {
        n,
        m,
        sigma1: noise.sigma1,
        sigma2: noise.sigma2,
        master_seed: noise.seed,
        runs: opts.runs,
        reading: opts.reading,
        tail_fraction: opts.tail_fraction,
        p_integral_p: mean(|r| r.p_integral),
        p_bar: delta,
        f_backward: if m >= 2 {
            Some(f_backward(&bound_spec, m, noise.sigma1, noise.sigma2)?)
        } else {
            None
        },
        noise_term: noise_term(m, n, noise.sigma1, noise.sigma2),
        tail_term: TAU * crate::spectrum::tail_energy(&bound_spec, m)?,
        p1_mean: mean(|r| r.p1_integral),
        noise_energy_expected: noise_energy_expected(m, n, noise.sigma1, noise.sigma2),
        e_ms_runs: per_run.iter().map(|r| r.e_ms).collect(),
        e_ms_final,
        delta,
        delta_source: opts.delta_source,
        pass: e_ms_final <= delta + PASS_ABS_TOL,
        per_run,
        sweep: sweep(&bound_spec, noise.sigma1, noise.sigma2, sweep_max)?,
    })
}
