use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use epigvf::analysis::{self, CertifyOptions, DeltaSource, EmsReading};
use epigvf::fmt::f64_17;
use epigvf::gvf::{FieldState, GvfParams};
use epigvf::pathdata::{
    add_noise, load_path, synth_path, Format, NoiseSpec, PathSamples, SynthKind,
};
use epigvf::sim::{self, SimConfig};
use epigvf::spectrum::{apply_window, dft, Spectrum};
use epigvf::TrigPath;

use crate::config::{RunConfig, Window};

/// `phi1^2 + phi2^2` level used for the reported convergence time.
pub const CONVERGENCE_TOL: f64 = 1e-4;

/// Parses `KIND:N[:p1,p2,...]`.
pub fn parse_synth(spec: &str) -> Result<PathSamples> {
    let mut parts = spec.splitn(3, ':');
    let kind: SynthKind = parts.next().unwrap_or_default().parse()?;
    let n: usize = parts
        .next()
        .with_context(|| format!("synthetic spec `{spec}` is missing the sample count"))?
        .parse()
        .with_context(|| format!("bad sample count in `{spec}`"))?;
    let params = match parts.next() {
        Some(p) if !p.is_empty() => p
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .with_context(|| format!("bad parameters in `{spec}`"))?,
        _ => Vec::new(),
    };
    Ok(synth_path(kind, n, &params)?)
}

struct Data {
    clean: PathSamples,
    observed: PathSamples,
}

impl Data {
    /// Spectrum that supplies bound tails.
    fn bound_spectrum(&self, cfg: &RunConfig) -> Spectrum {
        dft(if cfg.delta_noisy {
            &self.observed
        } else {
            &self.clean
        })
    }

    fn load(cfg: &RunConfig) -> Result<Self> {
        let clean = match (&cfg.input, &cfg.synth) {
            (Some(path), _) => {
                let file =
                    File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
                load_path(BufReader::new(file), Format::Csv)
                    .with_context(|| format!("reading {}", path.display()))?
            }
            (None, Some(spec)) => parse_synth(spec)?,
            (None, None) => bail!("no path data"),
        };
        let noise = noise(cfg)?;
        let observed = if noise.variance_sum() > 0.0 {
            add_noise(&clean, &noise)
        } else {
            clean.clone()
        };
        Ok(Self { clean, observed })
    }
}

fn noise(cfg: &RunConfig) -> Result<NoiseSpec> {
    Ok(NoiseSpec::new(cfg.sigma1, cfg.sigma2, cfg.seed)?)
}

fn params(cfg: &RunConfig) -> Result<GvfParams> {
    Ok(GvfParams::new(cfg.k1, cfg.k2)?)
}

fn sim_config(cfg: &RunConfig) -> Result<SimConfig> {
    Ok(SimConfig::new(
        FieldState::new(cfg.x0, cfg.y0, cfg.theta0),
        cfg.duration,
        cfg.dt,
        cfg.method,
    )?)
}

fn m_max(cfg: &RunConfig, n: usize) -> Result<usize> {
    match cfg.m_max {
        Some(0) => bail!("m_max must be >= 1"),
        Some(m) if m > n => bail!("m_max = {m} exceeds N = {n}"),
        Some(m) => Ok(m),
        None => Ok(n),
    }
}

/// Resolves a window; `auto` minimises the bound computed from `bound`
/// over `1..=m_max`.
fn resolve_window(cfg: &RunConfig, w: Window, bound: &Spectrum) -> Result<usize> {
    let n = bound.n();
    match w {
        Window::Full => Ok(n),
        Window::Fixed(m) if m > n => bail!("window m = {m} out of range for N = {n}"),
        Window::Fixed(m) => Ok(m),
        Window::Auto => {
            let (m, _) = analysis::select_window(bound, cfg.sigma1, cfg.sigma2, m_max(cfg, n)?)?;
            Ok(m)
        }
    }
}

fn prepare_out_dir(cfg: &RunConfig) -> Result<()> {
    fs::create_dir_all(&cfg.out_dir)
        .with_context(|| format!("cannot create output directory {}", cfg.out_dir.display()))?;
    write_text(&cfg.out_dir.join("config.toml"), &cfg.to_toml()?)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn write_with(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<File>) -> epigvf::Result<()>,
) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    f(&mut w).with_context(|| format!("writing {}", path.display()))?;
    w.flush()
        .with_context(|| format!("writing {}", path.display()))
}

pub fn transform(cfg: &RunConfig) -> Result<()> {
    let data = Data::load(cfg)?;
    let spec = dft(&data.observed);
    prepare_out_dir(cfg)?;
    write_with(&cfg.out_dir.join("spectrum.csv"), |w| spec.write_csv(w))?;
    println!("N = {}", spec.n());
    println!("energy = {}", f64_17(spec.energy()));
    Ok(())
}

pub fn reconstruct(cfg: &RunConfig) -> Result<()> {
    let data = Data::load(cfg)?;
    let bound_spec = data.bound_spectrum(cfg);
    let spec = dft(&data.observed);
    let n = spec.n();
    let samples = cfg.theta_samples.unwrap_or(n);
    if samples == 0 {
        bail!("theta_samples must be >= 1");
    }
    let list = if cfg.m_list.is_empty() {
        vec![cfg.window]
    } else {
        cfg.m_list.clone()
    };
    let resolved = list
        .iter()
        .map(|&w| Ok((w, resolve_window(cfg, w, &bound_spec)?)))
        .collect::<Result<Vec<_>>>()?;
    prepare_out_dir(cfg)?;
    for (w, m) in resolved {
        let name = match w {
            Window::Full => "reconstruction_full.csv".to_string(),
            _ => format!("reconstruction_m{m}.csv"),
        };
        let path = TrigPath::new(&apply_window(&spec, m)?);
        write_with(&cfg.out_dir.join(&name), |out| path.write_csv(out, samples))?;
        println!("{name}: m = {m}, {} terms", path.terms().len());
    }
    Ok(())
}

pub fn simulate(cfg: &RunConfig) -> Result<()> {
    let data = Data::load(cfg)?;
    let clean_spec = dft(&data.clean);
    let m = resolve_window(cfg, cfg.window, &data.bound_spectrum(cfg))?;
    let approx = TrigPath::new(&apply_window(&dft(&data.observed), m)?);
    let truth = TrigPath::new(&clean_spec);
    let traj = sim::integrate(&approx, &params(cfg)?, &sim_config(cfg)?, Some(&truth))?;

    prepare_out_dir(cfg)?;
    write_with(&cfg.out_dir.join("trajectory.csv"), |w| {
        traj.write_csv(w, cfg.stride)
    })?;
    let last = traj.last();
    let t_conv = sim::convergence_time(&traj, CONVERGENCE_TOL);
    let summary = format!(
        "m = {m}\nsteps = {}\nconvergence_tol = {}\nconvergence_time = {}\nfinal_V1 = {}\nfinal_e_inst = {}\n",
        traj.rows().len() - 1,
        f64_17(CONVERGENCE_TOL),
        t_conv.map(f64_17).unwrap_or_else(|| "none".into()),
        f64_17(last.v1),
        f64_17(last.e_inst),
    );
    write_text(&cfg.out_dir.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(())
}

pub fn certify(cfg: &RunConfig) -> Result<()> {
    let data = Data::load(cfg)?;
    let bound_spec = data.bound_spectrum(cfg);
    let m = resolve_window(cfg, cfg.window, &bound_spec)?;
    let opts = CertifyOptions {
        reading: if cfg.e_ms_literal {
            EmsReading::Literal
        } else {
            EmsReading::Ensemble
        },
        sweep_max: Some(m_max(cfg, bound_spec.n())?),
        delta_source: if cfg.delta_noisy {
            DeltaSource::NoisyEstimate
        } else {
            DeltaSource::Clean
        },
        ..CertifyOptions::new(cfg.runs)
    };
    let report = analysis::certify_with(
        &data.clean,
        &noise(cfg)?,
        m,
        &params(cfg)?,
        &sim_config(cfg)?,
        &opts,
    )?;

    prepare_out_dir(cfg)?;
    write_text(&cfg.out_dir.join("report.txt"), &report.to_text())?;
    write_text(&cfg.out_dir.join("report.json"), &report.to_json())?;
    write_text(&cfg.out_dir.join("sweep.csv"), &report.sweep_csv())?;
    println!("m = {m}");
    println!("e_ms_final = {}", f64_17(report.e_ms_final));
    println!("delta = {}", f64_17(report.delta));
    println!("pass = {}", report.pass);
    Ok(())
}

pub fn sweep(cfg: &RunConfig) -> Result<()> {
    let data = Data::load(cfg)?;
    let spec = data.bound_spectrum(cfg);
    let rows = analysis::sweep(&spec, cfg.sigma1, cfg.sigma2, m_max(cfg, spec.n())?)?;
    prepare_out_dir(cfg)?;
    write_text(&cfg.out_dir.join("sweep.csv"), &analysis::sweep_csv(&rows))?;
    let best = rows
        .iter()
        .fold(&rows[0], |b, r| if r.p_bar < b.p_bar { r } else { b });
    println!("m_star = {}", best.m);
    println!("p_bar = {}", f64_17(best.p_bar));
    Ok(())
}
