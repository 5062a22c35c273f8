//! Run configuration: defaults, then command-line flags, then an optional
//! TOML file whose keys win on conflict.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::Args;
use epigvf::sim::Method;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Window parameter: a fixed `m`, the full sample count, or chosen by
/// minimising the certified bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Fixed(usize),
    Full,
    Auto,
}

impl FromStr for Window {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full" => Ok(Self::Full),
            "auto" => Ok(Self::Auto),
            other => {
                let m: usize = other.parse().with_context(|| {
                    format!("window `{s}` is not `full`, `auto` or a positive integer")
                })?;
                if m == 0 {
                    bail!("window m must be >= 1");
                }
                Ok(Self::Fixed(m))
            }
        }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Fixed(m) => write!(f, "{m}"),
            Self::Full => f.write_str("full"),
            Self::Auto => f.write_str("auto"),
        }
    }
}

impl Serialize for Window {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Self::Fixed(m) => s.serialize_u64(*m as u64),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Window {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Str(String),
        }
        let text = match Raw::deserialize(d)? {
            Raw::Int(m) => m.to_string(),
            Raw::Str(s) => s,
        };
        text.parse()
            .map_err(|e: anyhow::Error| serde::de::Error::custom(format!("{e:#}")))
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Path samples as `x,y` CSV.
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// Synthetic path `KIND:N[:p1,p2,...]`, KIND one of circle, ellipse, lissajous.
    #[arg(long, value_name = "SPEC", conflicts_with = "input")]
    pub synth: Option<String>,
    /// TOML run configuration; its keys override flags.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub sigma1: Option<f64>,
    #[arg(long)]
    pub sigma2: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Window parameter m (or `full`).
    #[arg(long, value_name = "M")]
    pub window_m: Option<Window>,
    /// Choose m by minimising the certified bound.
    #[arg(long, conflicts_with = "window_m")]
    pub window_auto: bool,
    #[arg(long)]
    pub k1: Option<f64>,
    #[arg(long)]
    pub k2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta0: Option<f64>,
    /// Simulated horizon in seconds.
    #[arg(long)]
    pub duration: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// `rk4` or `euler`.
    #[arg(long)]
    pub method: Option<Method>,
    /// Monte-Carlo runs for `certify`.
    #[arg(long)]
    pub runs: Option<usize>,
    /// Largest m for `sweep`, `certify` tables and `--window-auto`.
    #[arg(long)]
    pub m_max: Option<usize>,
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    /// Take bound tails from the observed noisy spectrum instead of the
    /// clean one; the bound is then reported as an estimate.
    #[arg(long)]
    pub delta_noisy: bool,
}

/// Every key is optional so a file may set any subset.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layer {
    pub input: Option<PathBuf>,
    pub synth: Option<String>,
    pub sigma1: Option<f64>,
    pub sigma2: Option<f64>,
    pub seed: Option<u64>,
    pub window: Option<Window>,
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    pub x0: Option<f64>,
    pub y0: Option<f64>,
    pub theta0: Option<f64>,
    pub duration: Option<f64>,
    pub dt: Option<f64>,
    pub method: Option<Method>,
    pub runs: Option<usize>,
    pub m_max: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub m_list: Option<Vec<Window>>,
    pub theta_samples: Option<usize>,
    pub stride: Option<usize>,
    pub e_ms_literal: Option<bool>,
    pub delta_noisy: Option<bool>,
}

impl Layer {
    /// Keys set in `top` replace those in `self`. A data source in `top`
    /// replaces both source keys below it.
    fn overlay(mut self, top: Layer) -> Layer {
        if top.input.is_some() || top.synth.is_some() {
            self.input = top.input;
            self.synth = top.synth;
        }
        macro_rules! take {
            ($($f:ident),*) => { $( if top.$f.is_some() { self.$f = top.$f; } )* };
        }
        take!(
            sigma1,
            sigma2,
            seed,
            window,
            k1,
            k2,
            x0,
            y0,
            theta0,
            duration,
            dt,
            method,
            runs,
            m_max,
            out_dir,
            m_list,
            theta_samples,
            stride,
            e_ms_literal,
            delta_noisy
        );
        self
    }
}

impl From<&CommonArgs> for Layer {
    fn from(a: &CommonArgs) -> Self {
        Layer {
            input: a.input.clone(),
            synth: a.synth.clone(),
            sigma1: a.sigma1,
            sigma2: a.sigma2,
            seed: a.seed,
            window: if a.window_auto {
                Some(Window::Auto)
            } else {
                a.window_m
            },
            k1: a.k1,
            k2: a.k2,
            x0: a.x0,
            y0: a.y0,
            theta0: a.theta0,
            duration: a.duration,
            dt: a.dt,
            method: a.method,
            runs: a.runs,
            m_max: a.m_max,
            out_dir: a.out_dir.clone(),
            delta_noisy: a.delta_noisy.then_some(true),
            ..Layer::default()
        }
    }
}

/// Fully resolved configuration, echoed to `config.toml` in the output
/// directory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synth: Option<String>,
    pub sigma1: f64,
    pub sigma2: f64,
    pub seed: u64,
    pub window: Window,
    pub k1: f64,
    pub k2: f64,
    pub x0: f64,
    pub y0: f64,
    pub theta0: f64,
    pub duration: f64,
    pub dt: f64,
    pub method: Method,
    pub runs: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_max: Option<usize>,
    pub out_dir: PathBuf,
    pub m_list: Vec<Window>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_samples: Option<usize>,
    pub stride: usize,
    pub e_ms_literal: bool,
    pub delta_noisy: bool,
}

impl RunConfig {
    /// Merges defaults, `flags` (plus subcommand-specific `extra`) and the
    /// file named by `flags.config`.
    pub fn resolve(flags: &CommonArgs, extra: Layer) -> anyhow::Result<Self> {
        let mut layer = Layer::from(flags).overlay(extra);
        if let Some(path) = &flags.config {
            layer = layer.overlay(read_layer(path)?);
        }
        let sim = epigvf::SimConfig::default();
        let cfg = RunConfig {
            input: layer.input,
            synth: layer.synth,
            sigma1: layer.sigma1.unwrap_or(0.0),
            sigma2: layer.sigma2.unwrap_or(0.0),
            seed: layer.seed.unwrap_or(0),
            window: layer.window.unwrap_or(Window::Full),
            k1: layer.k1.unwrap_or(1.0),
            k2: layer.k2.unwrap_or(1.0),
            x0: layer.x0.unwrap_or(sim.eta0.x),
            y0: layer.y0.unwrap_or(sim.eta0.y),
            theta0: layer.theta0.unwrap_or(sim.eta0.theta),
            duration: layer.duration.unwrap_or(sim.duration),
            dt: layer.dt.unwrap_or(sim.dt),
            method: layer.method.unwrap_or(sim.method),
            runs: layer.runs.unwrap_or(20),
            m_max: layer.m_max,
            out_dir: layer.out_dir.unwrap_or_else(|| PathBuf::from("out")),
            m_list: layer.m_list.unwrap_or_default(),
            theta_samples: layer.theta_samples,
            stride: layer.stride.unwrap_or(1),
            e_ms_literal: layer.e_ms_literal.unwrap_or(false),
            delta_noisy: layer.delta_noisy.unwrap_or(false),
        };
        match (&cfg.input, &cfg.synth) {
            (None, None) => bail!("no path data: pass --input FILE or --synth KIND:N"),
            (Some(_), Some(_)) => bail!("--input and --synth are mutually exclusive"),
            _ => {}
        }
        if cfg.runs == 0 {
            bail!("runs must be >= 1");
        }
        if cfg.stride == 0 {
            bail!("stride must be >= 1");
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> anyhow::Result<String> {
        toml::to_string(self).context("serialising resolved configuration")
    }
}

fn read_layer(path: &Path) -> anyhow::Result<Layer> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("invalid config file {}", path.display()))
}
