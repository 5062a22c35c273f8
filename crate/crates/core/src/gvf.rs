//! Guiding vector field on the lifted state `eta = (x, y, theta)`.
//!
//! With level-set functions `phi1 = x - x^(theta)` and `phi2 = y - y^(theta)`
//! the field is
//!
//! ```text
//! chi = grad phi1 x grad phi2 - k1 phi1 grad phi1 - k2 phi2 grad phi2
//!     = [-d phi1, -d phi2, 1] - k1 phi1 [1, 0, d phi1] - k2 phi2 [0, 1, d phi2]
//! ```
//!
//! where `d phi_i` is the partial derivative in `theta`. If the planar rows
//! vanish then `phi1 = -d phi1 / k1` and `phi2 = -d phi2 / k2`, so the third
//! row equals `1 + d phi1^2 + d phi2^2 >= 1`: the field has no zeros.
//!
//! `V1 = k1 phi1^2 + k2 phi2^2` decreases along the flow:
//! `dV1/dt = -2 |k1 phi1 grad phi1 + k2 phi2 grad phi2|^2`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::trigpath::TrigPath;
use crate::{Error, Result};

/// Planar rows below this magnitude count as vanished.
pub const PLANAR_ZERO_TOL: f64 = 1e-9;
/// Allowed shortfall of the third component below 1 at such states.
pub const THETA_FLOOR_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub x: f64,
    pub y: f64,
    /// Unwrapped path parameter.
    pub theta: f64,
}

impl FieldState {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.theta]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

/// Convergence gains, in 1/m^2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GvfParams {
    k1: f64,
    k2: f64,
}

impl GvfParams {
    pub fn new(k1: f64, k2: f64) -> Result<Self> {
        for (name, k) in [("k1", k1), ("k2", k2)] {
            if !(k.is_finite() && k > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be > 0, got {k}"
                )));
            }
        }
        Ok(Self { k1, k2 })
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }

    pub fn k2(&self) -> f64 {
        self.k2
    }
}

impl Default for GvfParams {
    fn default() -> Self {
        Self { k1: 1.0, k2: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub chi: [f64; 3],
    pub phi1: f64,
    pub phi2: f64,
    /// `d phi1 / d theta`, `d phi2 / d theta`.
    pub dphi: [f64; 2],
    pub lyapunov_v1: f64,
}

impl FieldSample {
    pub fn norm(&self) -> f64 {
        self.chi.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// `(x - x^(theta), y - y^(theta))`.
pub fn phi(path: &TrigPath, state: &FieldState) -> (f64, f64) {
    let (x, y) = path.eval(state.theta);
    (state.x - x, state.y - y)
}

pub fn chi(path: &TrigPath, state: &FieldState, params: &GvfParams) -> FieldSample {
    let p = path.point(state.theta);
    let (k1, k2) = (params.k1, params.k2);
    let phi1 = state.x - p.x;
    let phi2 = state.y - p.y;
    let d1 = -p.dx;
    let d2 = -p.dy;
    let chi = [
        -d1 - k1 * phi1,
        -d2 - k2 * phi2,
        1.0 - k1 * phi1 * d1 - k2 * phi2 * d2,
    ];
    FieldSample {
        chi,
        phi1,
        phi2,
        dphi: [d1, d2],
        lyapunov_v1: k1 * phi1 * phi1 + k2 * phi2 * phi2,
    }
}

/// `grad V1 . chi` at `state`.
pub fn lyapunov_rate(path: &TrigPath, state: &FieldState, params: &GvfParams) -> f64 {
    let s = chi(path, state, params);
    let (k1, k2) = (params.k1, params.k2);
    let grad = [
        2.0 * k1 * s.phi1,
        2.0 * k2 * s.phi2,
        2.0 * k1 * s.phi1 * s.dphi[0] + 2.0 * k2 * s.phi2 * s.dphi[1],
    ];
    grad.iter().zip(&s.chi).map(|(g, c)| g * c).sum()
}

/// The state above `theta` at which the planar rows of `chi` vanish.
pub fn critical_state(path: &TrigPath, theta: f64, params: &GvfParams) -> FieldState {
    let p = path.point(theta);
    FieldState::new(p.x + p.dx / params.k1, p.y + p.dy / params.k2, theta)
}

/// Axis-aligned sampling region of the lifted state space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateBox {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub theta: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub state: FieldState,
    pub chi: [f64; 3],
    pub reason: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonsingularReport {
    pub random_states: usize,
    pub critical_states: usize,
    pub min_norm: f64,
    /// Smallest third component seen at states with vanished planar rows.
    pub min_theta_at_critical: f64,
    pub violations: Vec<Violation>,
}

impl NonsingularReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples `chi` uniformly in `bounds` and at the constructed critical state
/// above every sampled `theta`.
///
/// A state is a violation if `|chi| = 0` (or non-finite), or if both planar
/// rows are below [`PLANAR_ZERO_TOL`] while the third row is below
/// `1 - THETA_FLOOR_TOL`.
pub fn verify_nonsingular(
    path: &TrigPath,
    params: &GvfParams,
    bounds: &StateBox,
    samples: usize,
    seed: u64,
) -> Result<NonsingularReport> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut uniform = |(lo, hi): (f64, f64)| lo + (hi - lo) * rng.random::<f64>();
    let mut report = NonsingularReport {
        random_states: samples,
        critical_states: 0,
        min_norm: f64::INFINITY,
        min_theta_at_critical: f64::INFINITY,
        violations: Vec::new(),
    };
    let check = |state: FieldState, report: &mut NonsingularReport| {
        let s = chi(path, &state, params);
        let norm = s.norm();
        report.min_norm = report.min_norm.min(norm);
        if !norm.is_finite() || norm <= 0.0 {
            report.violations.push(Violation {
                state,
                chi: s.chi,
                reason: "zero or non-finite field vector",
            });
            return;
        }
        if s.chi[0].abs() < PLANAR_ZERO_TOL && s.chi[1].abs() < PLANAR_ZERO_TOL {
            report.critical_states += 1;
            report.min_theta_at_critical = report.min_theta_at_critical.min(s.chi[2]);
            if s.chi[2] < 1.0 - THETA_FLOOR_TOL {
                report.violations.push(Violation {
                    state,
                    chi: s.chi,
                    reason: "planar rows vanish but third row is below 1",
                });
            }
        }
    };
    for _ in 0..samples {
        let state = FieldState::new(uniform(bounds.x), uniform(bounds.y), uniform(bounds.theta));
        check(state, &mut report);
        check(critical_state(path, state.theta, params), &mut report);
    }
    Ok(report)
}

/// Regular lattice for field-grid export.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub x: (f64, f64, usize),
    pub y: (f64, f64, usize),
    pub thetas: Vec<f64>,
}

fn lattice((lo, hi, n): (f64, f64, usize)) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Writes `x,y,theta,chix,chiy,chitheta,phi1,phi2` over the lattice.
pub fn write_field_grid<W: std::io::Write>(
    path: &TrigPath,
    params: &GvfParams,
    grid: &GridSpec,
    mut w: W,
) -> Result<()> {
    let xs = lattice(grid.x);
    let ys = lattice(grid.y);
    let states: Vec<FieldState> = grid
        .thetas
        .iter()
        .flat_map(|&t| {
            let xs = &xs;
            ys.iter()
                .flat_map(move |&y| xs.iter().map(move |&x| FieldState::new(x, y, t)))
        })
        .collect();
    let rows: Vec<String> = states
        .par_iter()
        .map(|s| {
            let f = chi(path, s, params);
            crate::fmt::record(&[
                s.x, s.y, s.theta, f.chi[0], f.chi[1], f.chi[2], f.phi1, f.phi2,
            ])
        })
        .collect();
    writeln!(w, "x,y,theta,chix,chiy,chitheta,phi1,phi2")?;
    for r in rows {
        writeln!(w, "{r}")?;
    }
    Ok(())
}
