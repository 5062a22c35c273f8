//! Trigonometric curves built from Fourier coefficients.
//!
//! A coefficient `a_k = |a_k| exp(j arg a_k)` contributes the epicycle
//! `|a_k| (cos(k theta + arg a_k), sin(k theta + arg a_k))`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::spectrum::Coefficients;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub k: i64,
    pub amplitude: f64,
    /// Principal argument in `(-pi, pi]`; zero for a zero coefficient.
    pub phase: f64,
}

impl Term {
    pub fn from_coefficient(k: i64, a: Complex64) -> Self {
        let mut phase = if a == Complex64::new(0.0, 0.0) {
            0.0
        } else {
            a.arg()
        };
        if phase <= -PI {
            phase = PI;
        }
        Self {
            k,
            amplitude: a.norm(),
            phase,
        }
    }

    pub fn coefficient(&self) -> Complex64 {
        Complex64::from_polar(self.amplitude, self.phase)
    }
}

/// Position and `theta`-derivative of a curve at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub x: f64,
    pub y: f64,
    pub dx: f64,
    pub dy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrigPath {
    terms: Vec<Term>,
    source_n: usize,
    source_m: Option<usize>,
}

impl TrigPath {
    /// Builds the curve from a full or windowed spectrum, dropping
    /// zero-amplitude terms.
    pub fn new<S: Coefficients + ?Sized>(spec: &S) -> Self {
        let terms = spec
            .terms()
            .into_iter()
            .map(|(k, a)| Term::from_coefficient(k, a))
            .filter(|t| t.amplitude > 0.0)
            .collect();
        Self {
            terms,
            source_n: spec.n_samples(),
            source_m: spec.window_m(),
        }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn source_n(&self) -> usize {
        self.source_n
    }

    /// Window parameter of the source, `None` for the full spectrum.
    pub fn source_m(&self) -> Option<usize> {
        self.source_m
    }

    /// Largest `|k|` among the terms.
    pub fn max_harmonic(&self) -> u64 {
        self.terms
            .iter()
            .map(|t| t.k.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, theta: f64) -> (f64, f64) {
        let p = self.point(theta);
        (p.x, p.y)
    }

    pub fn eval_deriv(&self, theta: f64) -> (f64, f64) {
        let p = self.point(theta);
        (p.dx, p.dy)
    }

    /// Position and derivative in one pass over the terms.
    pub fn point(&self, theta: f64) -> CurvePoint {
        let theta = theta.rem_euclid(TAU);
        let mut out = CurvePoint {
            x: 0.0,
            y: 0.0,
            dx: 0.0,
            dy: 0.0,
        };
        for t in &self.terms {
            let kf = t.k as f64;
            let (s, c) = (kf * theta + t.phase).sin_cos();
            out.x += t.amplitude * c;
            out.y += t.amplitude * s;
            out.dx -= kf * t.amplitude * s;
            out.dy += kf * t.amplitude * c;
        }
        out
    }

    /// Writes `theta,x,y` at `samples` uniform parameters in `[0, 2 pi)`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W, samples: usize) -> crate::Result<()> {
        writeln!(w, "theta,x,y")?;
        for i in 0..samples {
            let theta = TAU * i as f64 / samples as f64;
            let (x, y) = self.eval(theta);
            writeln!(w, "{}", crate::fmt::record(&[theta, x, y]))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pathdata::{synth_path, SynthKind};
    use crate::spectrum::{apply_window, dft, Spectrum};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn epicycle() -> TrigPath {
        TrigPath::new(&Spectrum::from_indexed(8, [(1, Complex64::new(1.0, 0.0))]).unwrap())
    }

    #[test]
    fn unit_epicycle() {
        let p = epicycle();
        assert_eq!(p.terms().len(), 1);
        let (x, y) = p.eval(FRAC_PI_2);
        assert_abs_diff_eq!(x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(y, 1.0, epsilon = 1e-15);
        assert_eq!(p.eval_deriv(0.0), (0.0, 1.0));
        for theta in [0.3, 1.7, 4.0] {
            let (x, y) = p.eval(theta);
            assert_abs_diff_eq!(x, theta.cos(), epsilon = 1e-15);
            assert_abs_diff_eq!(y, theta.sin(), epsilon = 1e-15);
        }
    }

    #[test]
    fn dc_term() {
        let p = TrigPath::new(&Spectrum::from_indexed(4, [(0, Complex64::new(2.0, 0.0))]).unwrap());
        assert_eq!(p.terms()[0].phase, 0.0);
        for theta in [0.0, 1.0, 5.0] {
            assert_eq!(p.eval(theta), (2.0, 0.0));
            assert_eq!(p.eval_deriv(theta), (0.0, 0.0));
        }
    }

    #[test]
    fn zero_coefficient_phase() {
        let t = Term::from_coefficient(3, Complex64::new(0.0, 0.0));
        assert_eq!((t.amplitude, t.phase), (0.0, 0.0));
        let t = Term::from_coefficient(1, Complex64::new(-1.0, -0.0));
        assert_eq!(t.phase, PI);
    }

    #[test]
    fn interpolates_samples() {
        let samples = synth_path(SynthKind::Lissajous, 16, &[3.0, 5.0, 1.5, 0.5]).unwrap();
        let p = TrigPath::new(&dft(&samples));
        for (n, &(x, y)) in samples.points().iter().enumerate() {
            let (ex, ey) = p.eval(TAU * n as f64 / 16.0);
            assert!((ex - x).abs() < 1e-12 && (ey - y).abs() < 1e-12);
        }
    }

    #[test]
    fn periodic() {
        let samples = synth_path(SynthKind::Lissajous, 64, &[5.0, 3.0]).unwrap();
        let p = TrigPath::new(&apply_window(&dft(&samples), 20).unwrap());
        assert_eq!(p.source_m(), Some(20));
        for theta in [0.0, 0.1, 2.5, 6.0] {
            let (a, b) = (p.eval(theta), p.eval(theta + TAU));
            assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_export() {
        let mut out = Vec::new();
        epicycle().write_csv(&mut out, 4).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert_eq!(text.lines().next(), Some("theta,x,y"));
    }
}
