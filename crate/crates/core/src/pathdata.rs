//! Planar sample datasets: CSV ingestion, synthetic generators and seeded
//! Gaussian perturbation.
//!
//! Samples are treated as one period of a closed curve: sample `N` wraps to
//! sample `0`, and sample `n` sits at latent parameter `theta = 2 pi n / N`.

use std::f64::consts::TAU;
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Ordered planar samples `(x[n], y[n])`, `n = 0..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSamples {
    points: Vec<(f64, f64)>,
}

impl PathSamples {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::TooFewPoints(points.len()));
        }
        if let Some(i) = points
            .iter()
            .position(|&(x, y)| !x.is_finite() || !y.is_finite())
        {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { points })
    }

    /// Builds samples from `c[n] = x[n] + j y[n]`.
    pub fn from_complex(values: &[Complex64]) -> Result<Self> {
        Self::new(values.iter().map(|c| (c.re, c.im)).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        self.points
            .iter()
            .map(|&(x, y)| Complex64::new(x, y))
            .collect()
    }

    /// Writes `x,y` records with a header line.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,y")?;
        for &(x, y) in &self.points {
            writeln!(w, "{}", crate::fmt::record(&[x, y]))?;
        }
        Ok(())
    }
}

/// Supported ingestion formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
}

/// Parses an ordered point list.
///
/// CSV: one `x,y` record per line, LF or CRLF endings, blank lines ignored.
/// The first non-blank line is a header if its first field is not a number.
pub fn load_path<R: Read>(mut source: R, format: Format) -> Result<PathSamples> {
    match format {
        Format::Csv => {
            let mut text = String::new();
            source
                .read_to_string(&mut text)
                .map_err(|e| Error::Io(e.to_string()))?;
            parse_csv(&text)
        }
    }
}

fn parse_csv(text: &str) -> Result<PathSamples> {
    let mut points = Vec::new();
    let mut seen_first = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if !seen_first {
            seen_first = true;
            if fields[0].parse::<f64>().is_err() {
                continue;
            }
        }
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: line_no,
                reason: format!("expected 2 fields `x,y`, found {}", fields.len()),
            });
        }
        let mut xy = [0.0; 2];
        for (slot, field) in xy.iter_mut().zip(&fields) {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line: line_no,
                reason: format!("`{field}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    reason: format!("non-finite value `{field}`"),
                });
            }
            *slot = v;
        }
        points.push((xy[0], xy[1]));
    }
    PathSamples::new(points)
}

/// Synthetic closed curves used as stand-in datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthKind {
    /// `params = [radius]`, default `[1]`.
    Circle,
    /// `params = [rx, ry]`, default `[2, 1]`.
    Ellipse,
    /// `x = ax cos(a t)`, `y = ay sin(b t)`; `params = [a, b, ax, ay]` with
    /// integer frequencies, default `[3, 2, 1, 1]`.
    Lissajous,
}

impl FromStr for SynthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "circle" => Ok(Self::Circle),
            "ellipse" => Ok(Self::Ellipse),
            "lissajous" => Ok(Self::Lissajous),
            other => Err(Error::InvalidParameter(format!(
                "unknown synthetic path kind `{other}`"
            ))),
        }
    }
}

impl fmt::Display for SynthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Circle => "circle",
            Self::Ellipse => "ellipse",
            Self::Lissajous => "lissajous",
        })
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be > 0, got {v}"
        )))
    }
}

fn positive_integer(name: &str, v: f64) -> Result<f64> {
    positive(name, v)?;
    if v.fract() != 0.0 {
        return Err(Error::InvalidParameter(format!(
            "{name} must be an integer for a closed curve, got {v}"
        )));
    }
    Ok(v)
}

/// Samples `n` points of a closed curve at parameters `2 pi i / n`.
pub fn synth_path(kind: SynthKind, n: usize, params: &[f64]) -> Result<PathSamples> {
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    let param = |i: usize, default: f64| params.get(i).copied().unwrap_or(default);
    let arity = match kind {
        SynthKind::Circle => 1,
        SynthKind::Ellipse => 2,
        SynthKind::Lissajous => 4,
    };
    if params.len() > arity {
        return Err(Error::InvalidParameter(format!(
            "{kind} takes at most {arity} parameters, got {}",
            params.len()
        )));
    }
    let curve: Box<dyn Fn(f64) -> (f64, f64)> = match kind {
        SynthKind::Circle => {
            let r = positive("radius", param(0, 1.0))?;
            Box::new(move |t: f64| (r * t.cos(), r * t.sin()))
        }
        SynthKind::Ellipse => {
            let rx = positive("rx", param(0, 2.0))?;
            let ry = positive("ry", param(1, 1.0))?;
            Box::new(move |t: f64| (rx * t.cos(), ry * t.sin()))
        }
        SynthKind::Lissajous => {
            let a = positive_integer("a", param(0, 3.0))?;
            let b = positive_integer("b", param(1, 2.0))?;
            let ax = positive("ax", param(2, 1.0))?;
            let ay = positive("ay", param(3, 1.0))?;
            Box::new(move |t: f64| (ax * (a * t).cos(), ay * (b * t).sin()))
        }
    };
    let points = (0..n).map(|i| curve(TAU * i as f64 / n as f64)).collect();
    PathSamples::new(points)
}

/// Additive Gaussian measurement noise on each coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma1: f64,
    pub sigma2: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(sigma1: f64, sigma2: f64, seed: u64) -> Result<Self> {
        for (name, s) in [("sigma1", sigma1), ("sigma2", sigma2)] {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and >= 0, got {s}"
                )));
            }
        }
        Ok(Self {
            sigma1,
            sigma2,
            seed,
        })
    }

    pub fn none() -> Self {
        Self {
            sigma1: 0.0,
            sigma2: 0.0,
            seed: 0,
        }
    }

    /// Same standard deviations, different seed.
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn variance_sum(&self) -> f64 {
        self.sigma1 * self.sigma1 + self.sigma2 * self.sigma2
    }
}

/// Draws `count` standard-normal deviates from stream `stream` of the seed.
///
/// Generator: ChaCha20 (`rand_chacha` 0.9.0) keyed by `seed_from_u64(seed)`,
/// with `x` noise on stream 0 and `y` noise on stream 1. Deviates come from
/// the ziggurat sampler of `rand_distr` 0.5.1 (`StandardNormal`).
pub fn standard_normals(seed: u64, stream: u64, count: usize) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..count).map(|_| rng.sample(StandardNormal)).collect()
}

/// `x~[n] = x[n] + sigma1 z1[n]`, `y~[n] = y[n] + sigma2 z2[n]` with
/// independent standard-normal streams `z1`, `z2` (see [`standard_normals`]).
pub fn add_noise(clean: &PathSamples, spec: &NoiseSpec) -> PathSamples {
    let n = clean.len();
    let mut points = clean.points.clone();
    if spec.sigma1 != 0.0 {
        for (p, z) in points.iter_mut().zip(standard_normals(spec.seed, 0, n)) {
            p.0 += spec.sigma1 * z;
        }
    }
    if spec.sigma2 != 0.0 {
        for (p, z) in points.iter_mut().zip(standard_normals(spec.seed, 1, n)) {
            p.1 += spec.sigma2 * z;
        }
    }
    PathSamples { points }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv(s: &str) -> Result<PathSamples> {
        load_path(s.as_bytes(), Format::Csv)
    }

    #[test]
    fn parses_plain_records() {
        let p = csv("0,0\n1,0\n1,1\n").unwrap();
        assert_eq!(p.points(), &[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)]);
    }

    #[test]
    fn header_and_crlf() {
        let p = csv("x,y\r\n0.5,-1\r\n2e-3,4\r\n\r\n").unwrap();
        assert_eq!(p.points(), &[(0.5, -1.0), (0.002, 4.0)]);
    }

    #[test]
    fn malformed_record_reports_line() {
        assert_eq!(
            csv("0,0\n1,abc\n").unwrap_err(),
            Error::Parse {
                line: 2,
                reason: "`abc` is not a number".into()
            }
        );
        assert!(matches!(
            csv("x,y\n0,0\n1,2,3\n"),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn header_only_on_first_line() {
        assert!(matches!(
            csv("0,0\nx,y\n1,1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn too_few_and_non_finite() {
        assert_eq!(csv("1,2\n").unwrap_err(), Error::TooFewPoints(1));
        assert_eq!(csv("x,y\n").unwrap_err(), Error::TooFewPoints(0));
        assert!(matches!(
            csv("0,0\ninf,1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert_eq!(
            PathSamples::new(vec![(0.0, 0.0), (f64::NAN, 1.0)]).unwrap_err(),
            Error::NonFinite(1)
        );
    }

    #[test]
    fn loads_758_records() {
        let text: String = (0..758).map(|i| format!("{i},{}\n", -(i as f64))).collect();
        assert_eq!(csv(&text).unwrap().len(), 758);
    }

    #[test]
    fn circle_quarter_turns() {
        let p = synth_path(SynthKind::Circle, 4, &[1.0]).unwrap();
        let expect = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
        for (&(x, y), &(ex, ey)) in p.points().iter().zip(&expect) {
            assert!((x - ex).abs() < 1e-15 && (y - ey).abs() < 1e-15);
        }
    }

    #[test]
    fn circle_radius_holds() {
        let p = synth_path(SynthKind::Circle, 758, &[1.0]).unwrap();
        assert_eq!(p.len(), 758);
        for &(x, y) in p.points() {
            assert!(((x * x + y * y).sqrt() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lissajous_starts_at_curve_origin() {
        let p = synth_path(SynthKind::Lissajous, 100, &[3.0, 2.0]).unwrap();
        assert_eq!(p.len(), 100);
        assert_eq!(p.points()[0], (1.0, 0.0));
        assert!(p
            .points()
            .iter()
            .all(|&(x, y)| x.is_finite() && y.is_finite()));
    }

    #[test]
    fn synth_rejects_bad_params() {
        assert!(synth_path(SynthKind::Circle, 10, &[0.0]).is_err());
        assert!(synth_path(SynthKind::Circle, 10, &[1.0, 2.0]).is_err());
        assert!(synth_path(SynthKind::Lissajous, 10, &[2.5, 1.0]).is_err());
        assert!(synth_path(SynthKind::Ellipse, 1, &[]).is_err());
        assert!("spiral".parse::<SynthKind>().is_err());
    }

    #[test]
    fn zero_noise_is_identity() {
        let p = synth_path(SynthKind::Ellipse, 33, &[]).unwrap();
        assert_eq!(add_noise(&p, &NoiseSpec::new(0.0, 0.0, 99).unwrap()), p);
    }

    #[test]
    fn noise_deterministic_per_seed() {
        let p = synth_path(SynthKind::Circle, 64, &[]).unwrap();
        let spec = NoiseSpec::new(0.1, 0.15, 7).unwrap();
        assert_eq!(add_noise(&p, &spec), add_noise(&p, &spec));
        assert_ne!(add_noise(&p, &spec), add_noise(&p, &spec.with_seed(8)));
    }

    #[test]
    fn noise_spec_rejects_negative_sigma() {
        assert!(NoiseSpec::new(-0.1, 0.0, 0).is_err());
        assert!(NoiseSpec::new(0.0, f64::NAN, 0).is_err());
    }

    #[test]
    fn unit_noise_sample_variance() {
        // Chi-square with 9999 dof: [0.9, 1.1] holds with probability > 1 - 1e-6.
        let zero = PathSamples::new(vec![(0.0, 0.0); 10_000]).unwrap();
        let noisy = add_noise(&zero, &NoiseSpec::new(1.0, 1.0, 2024).unwrap());
        for coord in [0, 1] {
            let v: Vec<f64> = noisy
                .points()
                .iter()
                .map(|p| if coord == 0 { p.0 } else { p.1 })
                .collect();
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
            assert!((0.9..=1.1).contains(&var), "variance {var}");
        }
    }

    #[test]
    fn noise_streams_are_distinct() {
        let a = standard_normals(5, 0, 16);
        let b = standard_normals(5, 1, 16);
        assert_ne!(a, b);
    }
}
