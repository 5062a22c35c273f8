//! Fixed-step integration of the closed loop `eta' = chi(eta)`.

use serde::{Deserialize, Serialize};

use crate::gvf::{chi, FieldState, GvfParams};
use crate::trigpath::TrigPath;
use crate::{Error, Result};

/// Upper limit on the number of steps in one run.
pub const MAX_STEPS: f64 = 1e8;

/// `V1` never grows along the exact flow; growth beyond this factor of
/// `1 + V1(0)` is reported as numerical divergence.
pub const DIVERGENCE_FACTOR: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Rk4,
    Euler,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rk4" => Ok(Self::Rk4),
            "euler" => Ok(Self::Euler),
            other => Err(Error::InvalidParameter(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub eta0: FieldState,
    /// Seconds.
    pub duration: f64,
    /// Seconds.
    pub dt: f64,
    pub method: Method,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            eta0: FieldState::new(-1.0, 2.0, 0.0),
            duration: 20.0,
            dt: 1e-3,
            method: Method::Rk4,
        }
    }
}

impl SimConfig {
    pub fn new(eta0: FieldState, duration: f64, dt: f64, method: Method) -> Result<Self> {
        let cfg = Self {
            eta0,
            duration,
            dt,
            method,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !self.eta0.is_finite() {
            return bad("initial state must be finite".into());
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return bad(format!("duration must be > 0, got {}", self.duration));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be > 0, got {}", self.dt));
        }
        if self.dt > self.duration {
            return bad(format!(
                "dt = {} exceeds duration = {}",
                self.dt, self.duration
            ));
        }
        if self.duration / self.dt > MAX_STEPS {
            return bad(format!("duration/dt exceeds {MAX_STEPS:e} steps"));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub state: FieldState,
    pub phi1: f64,
    pub phi2: f64,
    pub v1: f64,
    /// `(x - x_d(theta))^2 + (y - y_d(theta))^2` against the reference curve.
    pub e_inst: f64,
}

impl TrajectoryRow {
    pub fn phi_sq(&self) -> f64 {
        self.phi1 * self.phi1 + self.phi2 * self.phi2
    }
}

/// States on the uniform grid `t = i dt`, `i = 0..=steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    rows: Vec<TrajectoryRow>,
    dt: f64,
}

impl Trajectory {
    pub fn rows(&self) -> &[TrajectoryRow] {
        &self.rows
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn last(&self) -> &TrajectoryRow {
        self.rows.last().expect("trajectory has at least two rows")
    }

    /// Writes `t,x,y,theta,phi1,phi2,V1,e_inst`, keeping every `stride`-th row.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W, stride: usize) -> Result<()> {
        let stride = stride.max(1);
        writeln!(w, "t,x,y,theta,phi1,phi2,V1,e_inst")?;
        for r in self.rows.iter().step_by(stride) {
            writeln!(
                w,
                "{}",
                crate::fmt::record(&[
                    r.t,
                    r.state.x,
                    r.state.y,
                    r.state.theta,
                    r.phi1,
                    r.phi2,
                    r.v1,
                    r.e_inst,
                ])
            )?;
        }
        Ok(())
    }
}

fn axpy(a: &[f64; 3], h: f64, b: &[f64; 3]) -> [f64; 3] {
    [a[0] + h * b[0], a[1] + h * b[1], a[2] + h * b[2]]
}

fn step<F: Fn(&[f64; 3]) -> [f64; 3]>(method: Method, f: &F, y: &[f64; 3], h: f64) -> [f64; 3] {
    match method {
        Method::Euler => axpy(y, h, &f(y)),
        Method::Rk4 => {
            let k1 = f(y);
            let k2 = f(&axpy(y, 0.5 * h, &k1));
            let k3 = f(&axpy(y, 0.5 * h, &k2));
            let k4 = f(&axpy(y, h, &k3));
            std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        }
    }
}

/// Integrates the field of `path` from `cfg.eta0`.
///
/// `e_inst` is measured against `truth` when given, otherwise against `path`
/// itself (then it equals `phi1^2 + phi2^2`).
pub fn integrate(
    path: &TrigPath,
    params: &GvfParams,
    cfg: &SimConfig,
    truth: Option<&TrigPath>,
) -> Result<Trajectory> {
    cfg.validate()?;
    let steps = cfg.steps();
    let field = |y: &[f64; 3]| chi(path, &FieldState::from_array(*y), params).chi;
    let record = |t: f64, state: FieldState| {
        let s = chi(path, &state, params);
        let e_inst = match truth {
            Some(tp) => {
                let (xd, yd) = tp.eval(state.theta);
                (state.x - xd).powi(2) + (state.y - yd).powi(2)
            }
            None => s.phi1 * s.phi1 + s.phi2 * s.phi2,
        };
        TrajectoryRow {
            t,
            state,
            phi1: s.phi1,
            phi2: s.phi2,
            v1: s.lyapunov_v1,
            e_inst,
        }
    };

    let mut rows = Vec::with_capacity(steps + 1);
    let mut y = cfg.eta0.to_array();
    rows.push(record(0.0, cfg.eta0));
    let limit = DIVERGENCE_FACTOR * (1.0 + rows[0].v1);
    for i in 1..=steps {
        let t = i as f64 * cfg.dt;
        y = step(cfg.method, &field, &y, cfg.dt);
        let state = FieldState::from_array(y);
        if !state.is_finite() {
            return Err(Error::Integration {
                step: i,
                t,
                reason: "non-finite state".into(),
            });
        }
        let row = record(t, state);
        if !(row.v1.is_finite() && row.e_inst.is_finite()) {
            return Err(Error::Integration {
                step: i,
                t,
                reason: "non-finite level-set value".into(),
            });
        }
        if row.v1 > limit {
            return Err(Error::Integration {
                step: i,
                t,
                reason: format!("V1 = {:e} diverged past {:e}", row.v1, limit),
            });
        }
        rows.push(row);
    }
    Ok(Trajectory { rows, dt: cfg.dt })
}

/// First time after which `phi1^2 + phi2^2 <= tol` holds through the end.
pub fn convergence_time(traj: &Trajectory, tol: f64) -> Option<f64> {
    let rows = traj.rows();
    match rows
        .iter()
        .rposition(|r| r.phi_sq().is_nan() || r.phi_sq() > tol)
    {
        None => rows.first().map(|r| r.t),
        Some(i) => rows.get(i + 1).map(|r| r.t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::Spectrum;
    use num_complex::Complex64;

    fn epicycle() -> TrigPath {
        TrigPath::new(&Spectrum::from_indexed(8, [(1, Complex64::new(1.0, 0.0))]).unwrap())
    }

    fn cfg(x: f64, y: f64, duration: f64, dt: f64) -> SimConfig {
        SimConfig::new(FieldState::new(x, y, 0.0), duration, dt, Method::Rk4).unwrap()
    }

    #[test]
    fn on_path_flow() {
        let traj = integrate(
            &epicycle(),
            &GvfParams::default(),
            &cfg(1.0, 0.0, 10.0, 1e-3),
            None,
        )
        .unwrap();
        assert_eq!(traj.rows().len(), 10_001);
        assert!(traj.rows().iter().all(|r| r.v1 <= 1e-10));
        let theta = traj.last().state.theta;
        assert!((theta - 10.0).abs() < 0.1, "theta(T) = {theta}");
        assert_eq!(convergence_time(&traj, 1e-6), Some(0.0));
    }

    #[test]
    fn off_path_converges() {
        let traj = integrate(
            &epicycle(),
            &GvfParams::default(),
            &cfg(2.0, 0.0, 10.0, 1e-3),
            None,
        )
        .unwrap();
        for w in traj.rows().windows(2) {
            assert!(w[1].v1 <= w[0].v1 + 1e-9 * (1.0 + w[0].v1));
        }
        assert!(traj.last().v1 < 1e-6);
        assert_eq!(convergence_time(&traj, 0.0), None);
    }

    #[test]
    fn convergence_faster_with_larger_gain() {
        let c = cfg(2.0, 0.0, 10.0, 1e-3);
        let slow = integrate(&epicycle(), &GvfParams::new(1.0, 1.0).unwrap(), &c, None).unwrap();
        let fast = integrate(&epicycle(), &GvfParams::new(2.0, 1.0).unwrap(), &c, None).unwrap();
        let ts = convergence_time(&slow, 1e-4).unwrap();
        let tf = convergence_time(&fast, 1e-4).unwrap();
        assert!(tf < ts, "k1=2: {tf}, k1=1: {ts}");
    }

    #[test]
    fn config_guard_rails() {
        let e = FieldState::new(0.0, 0.0, 0.0);
        assert!(SimConfig::new(e, 1.0, 2.0, Method::Rk4).is_err());
        assert!(SimConfig::new(e, 0.0, 0.1, Method::Rk4).is_err());
        assert!(SimConfig::new(e, 1.0, -0.1, Method::Rk4).is_err());
        assert!(SimConfig::new(e, 1e9, 1e-3, Method::Rk4).is_err());
        assert!(
            SimConfig::new(FieldState::new(f64::NAN, 0.0, 0.0), 1.0, 0.1, Method::Euler).is_err()
        );
        assert_eq!("Euler".parse::<Method>().unwrap(), Method::Euler);
    }

    #[test]
    fn huge_step_reports_divergence() {
        let err = integrate(
            &epicycle(),
            &GvfParams::default(),
            &cfg(-1.0, 2.0, 20.0, 10.0),
            None,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Integration { .. }), "{err}");
    }

    #[test]
    fn e_inst_against_truth() {
        let shifted = TrigPath::new(
            &Spectrum::from_indexed(
                8,
                [(0, Complex64::new(0.5, 0.0)), (1, Complex64::new(1.0, 0.0))],
            )
            .unwrap(),
        );
        let traj = integrate(
            &epicycle(),
            &GvfParams::default(),
            &cfg(1.0, 0.0, 1.0, 1e-2),
            Some(&shifted),
        )
        .unwrap();
        for r in traj.rows() {
            assert!((r.e_inst - 0.25).abs() < 1e-6);
        }
    }

    #[test]
    fn csv_stride() {
        let traj = integrate(
            &epicycle(),
            &GvfParams::default(),
            &cfg(1.0, 0.0, 1.0, 0.1),
            None,
        )
        .unwrap();
        let mut out = Vec::new();
        traj.write_csv(&mut out, 5).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().next(), Some("t,x,y,theta,phi1,phi2,V1,e_inst"));
        assert_eq!(text.lines().count(), 1 + 3);
    }
}
