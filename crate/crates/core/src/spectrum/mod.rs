//! Discrete Fourier analysis of a sampled closed curve.
//!
//! The forward transform carries the `1/N` factor:
//!
//! ```text
//! a_k = (1/N) sum_n c[n] exp(-j k 2 pi n / N),   c[n] = sum_k a_k exp(j k 2 pi n / N)
//! ```
//!
//! Bins are addressed by signed frequency `k` in the symmetric set
//! `Zbar_N` (`-N/2..=N/2` for even `N`, `-(N-1)/2..=(N-1)/2` for odd `N`)
//! through `a_{-k} = a_{N-k}`. For even `N` the Nyquist bin is stored once,
//! at `+N/2`; `-N/2` is accepted as an alias of it.

mod fft;

use num_complex::Complex64;

pub use fft::{prime_factors, FftPlan, CHIRP_MIN_RADIX};

use crate::pathdata::PathSamples;
use crate::{Error, Result};

/// Inclusive bounds of the symmetric index set `Zbar_m`.
///
/// `Zbar_1 = {0}`, `Zbar_2 = Zbar_3 = {-1, 0, 1}`, `Zbar_100 = {-50..=50}`.
pub fn index_bounds(m: usize) -> (i64, i64) {
    // m/2 (even m) and (m-1)/2 (odd m) coincide under integer division.
    let half = (m / 2) as i64;
    (-half, half)
}

/// Number of distinct bins an `N`-point spectrum keeps under window `m`.
pub fn window_len(m: usize, n: usize) -> usize {
    if m >= n {
        n
    } else {
        let (lo, hi) = index_bounds(m);
        (hi - lo + 1) as usize
    }
}

/// Signed storage indices of an `N`-point spectrum, ascending.
pub fn storage_range(n: usize) -> std::ops::RangeInclusive<i64> {
    let (lo, hi) = index_bounds(n);
    if n.is_multiple_of(2) {
        lo + 1..=hi
    } else {
        lo..=hi
    }
}

fn check_window(m: usize, n: usize) -> Result<()> {
    if m == 0 || m > n {
        Err(Error::WindowOutOfRange { m, n })
    } else {
        Ok(())
    }
}

/// Anything that carries Fourier coefficients of an `N`-point dataset.
pub trait Coefficients {
    fn n_samples(&self) -> usize;
    /// Window parameter, `None` for the full spectrum.
    fn window_m(&self) -> Option<usize>;
    /// `(k, a_k)` pairs in ascending `k`.
    fn terms(&self) -> Vec<(i64, Complex64)>;
}

/// Full spectrum of an `N`-point dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    // Unshifted bins a_0..a_{N-1}.
    bins: Vec<Complex64>,
}

impl Spectrum {
    /// Wraps raw DFT bins `a_0..a_{N-1}` (already divided by `N`).
    pub fn from_bins(bins: Vec<Complex64>) -> Result<Self> {
        if bins.len() < 2 {
            return Err(Error::TooFewPoints(bins.len()));
        }
        if let Some(i) = bins
            .iter()
            .position(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { bins })
    }

    /// Builds an `n`-point spectrum from signed-index coefficients; unspecified
    /// bins are zero.
    pub fn from_indexed<I>(n: usize, coeffs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, Complex64)>,
    {
        let mut bins = vec![Complex64::new(0.0, 0.0); n];
        let (lo, hi) = index_bounds(n);
        for (k, a) in coeffs {
            if k < lo || k > hi {
                return Err(Error::InvalidParameter(format!(
                    "index {k} outside [{lo}, {hi}] for N = {n}"
                )));
            }
            bins[k.rem_euclid(n as i64) as usize] = a;
        }
        Self::from_bins(bins)
    }

    pub fn n(&self) -> usize {
        self.bins.len()
    }

    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    /// `a_k` for `k` in `Zbar_N`; `-N/2` aliases `+N/2` for even `N`.
    pub fn coeff(&self, k: i64) -> Option<Complex64> {
        let (lo, hi) = index_bounds(self.n());
        (lo..=hi)
            .contains(&k)
            .then(|| self.bins[k.rem_euclid(self.n() as i64) as usize])
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let n = self.n() as i64;
        storage_range(self.n()).map(move |k| (k, self.bins[k.rem_euclid(n) as usize]))
    }

    /// `sum_k |a_k|^2`.
    pub fn energy(&self) -> f64 {
        self.bins.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Writes `k,re,im,magnitude` sorted by ascending `k`, with a header.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "k,re,im,magnitude")?;
        for (k, a) in self.iter() {
            writeln!(w, "{k},{}", crate::fmt::record(&[a.re, a.im, a.norm()]))?;
        }
        Ok(())
    }
}

impl Coefficients for Spectrum {
    fn n_samples(&self) -> usize {
        self.n()
    }

    fn window_m(&self) -> Option<usize> {
        None
    }

    fn terms(&self) -> Vec<(i64, Complex64)> {
        self.iter().collect()
    }
}

/// Coefficients surviving a rectangular window `w[k] = 1` on `Zbar_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedSpectrum {
    n: usize,
    m: usize,
    coeffs: Vec<(i64, Complex64)>,
}

impl WindowedSpectrum {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn coeffs(&self) -> &[(i64, Complex64)] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: i64) -> Option<Complex64> {
        self.coeffs
            .binary_search_by_key(&k, |&(i, _)| i)
            .ok()
            .map(|i| self.coeffs[i].1)
    }
}

impl Coefficients for WindowedSpectrum {
    fn n_samples(&self) -> usize {
        self.n
    }

    fn window_m(&self) -> Option<usize> {
        Some(self.m)
    }

    fn terms(&self) -> Vec<(i64, Complex64)> {
        self.coeffs.clone()
    }
}

/// Forward DFT with the `1/N` factor, re-indexed to signed frequencies.
pub fn dft(samples: &PathSamples) -> Spectrum {
    let n = samples.len();
    let mut buf = samples.to_complex();
    FftPlan::new(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    for v in &mut buf {
        *v *= scale;
    }
    Spectrum { bins: buf }
}

/// Synthesis `c[n] = sum_k a_k exp(j k 2 pi n / N)`.
pub fn idft(spec: &Spectrum) -> Result<PathSamples> {
    // Inverse through the forward plan: conj(F(conj(a))).
    let mut buf: Vec<Complex64> = spec.bins.iter().map(|a| a.conj()).collect();
    FftPlan::new(spec.n()).process(&mut buf);
    let out: Vec<Complex64> = buf.iter().map(|v| v.conj()).collect();
    PathSamples::from_complex(&out)
}

/// Keeps exactly the coefficients with `k` in `Zbar_m`.
///
/// `m` must satisfy `1 <= m <= N`; `m = N` keeps everything.
pub fn apply_window<S: Coefficients + ?Sized>(spec: &S, m: usize) -> Result<WindowedSpectrum> {
    let n = spec.n_samples();
    check_window(m, n)?;
    let (lo, hi) = index_bounds(m);
    let coeffs = spec
        .terms()
        .into_iter()
        .filter(|&(k, _)| lo <= k && k <= hi)
        .collect();
    Ok(WindowedSpectrum { n, m, coeffs })
}

/// Out-of-window energy `sum_{k in Zbar_N \ Zbar_m} |a_k|^2`.
pub fn tail_energy(spec: &Spectrum, m: usize) -> Result<f64> {
    check_window(m, spec.n())?;
    let (lo, hi) = index_bounds(m);
    Ok(spec
        .iter()
        .filter(|&(k, _)| k < lo || k > hi)
        .map(|(_, a)| a.norm_sqr())
        .sum())
}
