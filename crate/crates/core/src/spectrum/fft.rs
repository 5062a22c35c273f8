//! Unnormalized forward DFT, `X[k] = sum_j x[j] exp(-2 pi i j k / n)`, for
//! any length.
//!
//! The length is split into its prime factors and processed by recursive
//! decimation in time. Small prime radices use a direct butterfly; prime
//! radices above [`CHIRP_MIN_RADIX`] are evaluated with Bluestein's chirp-z
//! convolution on a power-of-two transform.
//!
//! A plan is immutable after construction and can be shared across threads.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Prime radices at or above this length go through Bluestein.
pub const CHIRP_MIN_RADIX: usize = 32;

#[derive(Debug, Clone)]
pub struct FftPlan {
    n: usize,
    levels: Vec<Level>,
}

#[derive(Debug, Clone)]
struct Level {
    radix: usize,
    // Sub-problem length handled at this level.
    len: usize,
    // exp(-2 pi i j / len) for j in 0..len.
    twiddles: Vec<Complex64>,
    kernel: Kernel,
}

#[derive(Debug, Clone)]
enum Kernel {
    Direct { roots: Vec<Complex64> },
    Chirp(Box<Bluestein>),
}

#[derive(Debug, Clone)]
struct Bluestein {
    len: usize,
    chirp: Vec<Complex64>,
    kernel_hat: Vec<Complex64>,
    inner: FftPlan,
}

fn unit_root(num: usize, den: usize) -> Complex64 {
    Complex64::from_polar(1.0, -2.0 * PI * num as f64 / den as f64)
}

/// Prime factors in ascending order, with multiplicity.
pub fn prime_factors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        while n.is_multiple_of(p) {
            out.push(p);
            n /= p;
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

impl Kernel {
    fn new(radix: usize) -> Self {
        if radix >= CHIRP_MIN_RADIX {
            Kernel::Chirp(Box::new(Bluestein::new(radix)))
        } else {
            Kernel::Direct {
                roots: (0..radix).map(|j| unit_root(j, radix)).collect(),
            }
        }
    }

    fn apply(&self, input: &[Complex64], output: &mut [Complex64]) {
        match self {
            Kernel::Direct { roots } => {
                let p = roots.len();
                for (q, out) in output.iter_mut().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (r, &x) in input.iter().enumerate() {
                        acc += x * roots[(r * q) % p];
                    }
                    *out = acc;
                }
            }
            Kernel::Chirp(b) => b.apply(input, output),
        }
    }
}

impl Bluestein {
    fn new(len: usize) -> Self {
        let m = (2 * len - 1).next_power_of_two();
        // exp(-i pi j^2 / len), with j^2 reduced mod 2 len to keep the angle small.
        let chirp: Vec<Complex64> = (0..len)
            .map(|j| {
                let e = (j as u128 * j as u128 % (2 * len) as u128) as f64;
                Complex64::from_polar(1.0, -PI * e / len as f64)
            })
            .collect();
        let mut kernel = vec![Complex64::new(0.0, 0.0); m];
        kernel[0] = chirp[0].conj();
        for j in 1..len {
            kernel[j] = chirp[j].conj();
            kernel[m - j] = chirp[j].conj();
        }
        let inner = FftPlan::new(m);
        inner.process(&mut kernel);
        Self {
            len,
            chirp,
            kernel_hat: kernel,
            inner,
        }
    }

    fn apply(&self, input: &[Complex64], output: &mut [Complex64]) {
        let m = self.kernel_hat.len();
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for ((b, &x), &w) in buf.iter_mut().zip(input).zip(&self.chirp) {
            *b = x * w;
        }
        self.inner.process(&mut buf);
        // Inverse transform of the product through conjugation.
        for (b, &k) in buf.iter_mut().zip(&self.kernel_hat) {
            *b = (*b * k).conj();
        }
        self.inner.process(&mut buf);
        let scale = 1.0 / m as f64;
        for (k, out) in output.iter_mut().enumerate().take(self.len) {
            *out = buf[k].conj() * scale * self.chirp[k];
        }
    }
}

impl FftPlan {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "FFT length must be positive");
        let mut levels = Vec::new();
        let mut len = n;
        for radix in prime_factors(n) {
            levels.push(Level {
                radix,
                len,
                twiddles: (0..len).map(|j| unit_root(j, len)).collect(),
                kernel: Kernel::new(radix),
            });
            len /= radix;
        }
        Self { n, levels }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place forward transform.
    pub fn process(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.n, "buffer length does not match plan");
        if self.n == 1 {
            return;
        }
        let input = data.to_vec();
        self.recurse(0, &input, 1, data);
    }

    fn recurse(&self, level: usize, input: &[Complex64], stride: usize, out: &mut [Complex64]) {
        let Some(lv) = self.levels.get(level) else {
            out[0] = input[0];
            return;
        };
        let p = lv.radix;
        let m = lv.len / p;
        for r in 0..p {
            self.recurse(
                level + 1,
                &input[r * stride..],
                stride * p,
                &mut out[r * m..(r + 1) * m],
            );
        }
        let mut gathered = vec![Complex64::new(0.0, 0.0); p];
        let mut butterfly = vec![Complex64::new(0.0, 0.0); p];
        for k in 0..m {
            for (r, g) in gathered.iter_mut().enumerate() {
                *g = lv.twiddles[r * k] * out[r * m + k];
            }
            lv.kernel.apply(&gathered, &mut butterfly);
            for (q, &v) in butterfly.iter().enumerate() {
                out[k + q * m] = v;
            }
        }
    }
}
