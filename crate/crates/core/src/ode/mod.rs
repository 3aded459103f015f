//! Geodesic integration on the surface and on the frame bundle.
//!
//! State vectors use frame components of the velocity. Positions are kept
//! unwrapped during integration; periodic coordinates are wrapped only when
//! results are written out.

mod events;
mod lifting;
mod solver;
mod systems;

use thiserror::Error;

use crate::expr::{eval_jet3, Var};
use crate::geom::{GeomError, Metric, SurfaceChart};
use crate::quad;

pub use events::detect_sigma_crossings;
pub use lifting::{lift_solution, lift_solution_with_tol};
pub use systems::{integrate_lifted, integrate_projected};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Classical fixed-step Runge–Kutta with step `h_init`.
    Rk4,
    /// Fehlberg 4(5) with local extrapolation and PI step control.
    Rkf45,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Absolute and relative tolerances of the embedded error estimate.
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Fixed step for [`Method::Rk4`]; first trial step (clamped to
    /// `[h_min, h_max]`) for [`Method::Rkf45`].
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub t_span: (f64, f64),
    pub max_steps: usize,
    /// Locate singular-set crossings after integration.
    pub detect_events: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::Rkf45,
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            h_init: 1e-2,
            h_min: 1e-12,
            h_max: 0.5,
            t_span: (0.0, 10.0),
            max_steps: 2_000_000,
            detect_events: true,
        }
    }
}

impl IntegratorConfig {
    pub fn with_t_span(mut self, t0: f64, t1: f64) -> Self {
        self.t_span = (t0, t1);
        self
    }

    pub fn validate(&self) -> Result<(), OdeError> {
        let bad = |m: &str| Err(OdeError::InvalidConfig(m.to_string()));
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.h_min > 0.0 && self.h_min <= self.h_max && self.h_init > 0.0) {
            return bad("step sizes must satisfy 0 < h_min <= h_max and h_init > 0");
        }
        let (t0, t1) = self.t_span;
        if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
            return bad("t_span must be a finite increasing interval");
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IntegratorStats {
    pub steps: usize,
    pub rejections: usize,
    pub rhs_evals: usize,
    /// Smallest accepted step, ignoring a final step shortened to hit the
    /// end of the span.
    pub min_step: f64,
    pub max_step: f64,
}

impl IntegratorStats {
    fn record_step(&mut self, h: f64, clipped: bool) {
        self.steps += 1;
        if !clipped || self.steps == 1 {
            self.min_step = if self.min_step == 0.0 {
                h
            } else {
                self.min_step.min(h)
            };
        }
        self.max_step = self.max_step.max(h);
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("trajectory left the chart domain at t = {t} ({u1}, {u2})")]
    LeftDomain { t: f64, u1: f64, u2: f64 },
    #[error("exceeded {steps} steps at t = {t}")]
    MaxStepsExceeded { t: f64, steps: usize },
    #[error("approached the singular set at t = {t}; trajectory truncated")]
    SingularApproach { t: f64, partial: Box<Trajectory> },
    #[error("interpolation error: {0}")]
    InterpolationError(String),
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Point and frame velocity on the surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectedState {
    pub u1: f64,
    pub u2: f64,
    pub q1: f64,
    pub q2: f64,
}

impl ProjectedState {
    /// Velocity of length `speed` at angle `angle` from `e₁`.
    pub fn from_angle(u1: f64, u2: f64, angle: f64, speed: f64) -> Self {
        ProjectedState {
            u1,
            u2,
            q1: speed * angle.cos(),
            q2: speed * angle.sin(),
        }
    }
}

/// Point and velocity (components along `𝓔₁, 𝓔₂, 𝓔₃`) on the frame bundle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftedState {
    pub u1: f64,
    pub u2: f64,
    pub phi: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrajectoryKind {
    /// Solution of the projected equation with constant `c`.
    Projected { c: f64 },
    /// Geodesic of the lifted metric.
    Lifted,
    /// Lift of a projected solution with constant `c`.
    LiftedSolution { c: f64 },
}

impl TrajectoryKind {
    pub fn has_fiber(&self) -> bool {
        !matches!(self, TrajectoryKind::Projected { .. })
    }

    /// The constant `C` of the projected equation, when fixed by construction.
    pub fn c(&self) -> Option<f64> {
        match *self {
            TrajectoryKind::Projected { c } | TrajectoryKind::LiftedSolution { c } => Some(c),
            TrajectoryKind::Lifted => None,
        }
    }
}

/// One accepted point with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    /// `(u1, u2, φ, Q1, Q2, Q3)`; `φ` and `Q3` are zero on projected
    /// trajectories.
    pub y: [f64; 6],
    pub dy: [f64; 6],
    pub k: f64,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c3sq: f64,
}

impl Sample {
    pub fn u(&self) -> [f64; 2] {
        [self.y[0], self.y[1]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingKind {
    /// `K` changes sign.
    Crossing,
    /// `K` reaches zero without changing sign.
    Grazing,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingEvent {
    pub t: f64,
    pub u1: f64,
    pub u2: f64,
    pub k: f64,
    /// Size of the vertical velocity component `|Q³K|` in units of `∂φ`.
    pub vertical_speed: f64,
    pub kind: CrossingKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub kind: TrajectoryKind,
    pub chart: String,
    pub samples: Vec<Sample>,
    pub crossings: Vec<CrossingEvent>,
    pub stats: IntegratorStats,
}

impl Trajectory {
    pub fn t_range(&self) -> Option<(f64, f64)> {
        Some((self.samples.first()?.t, self.samples.last()?.t))
    }

    fn segment(&self, t: f64) -> Option<usize> {
        let s = &self.samples;
        if s.len() < 2 || t < s[0].t || t > s[s.len() - 1].t {
            return None;
        }
        let i = s.partition_point(|x| x.t <= t);
        Some(i.clamp(1, s.len() - 1) - 1)
    }

    /// Dense output: cubic Hermite interpolation between samples.
    pub fn state_at(&self, t: f64) -> Option<[f64; 6]> {
        if self.samples.len() == 1 && self.samples[0].t == t {
            return Some(self.samples[0].y);
        }
        let i = self.segment(t)?;
        let (a, b) = (&self.samples[i], &self.samples[i + 1]);
        Some(quad::hermite(a.t, &a.y, &a.dy, b.t, &b.y, &b.dy, t))
    }

    /// Derivative of [`Trajectory::state_at`].
    pub fn rate_at(&self, t: f64) -> Option<[f64; 6]> {
        let i = self.segment(t)?;
        let (a, b) = (&self.samples[i], &self.samples[i + 1]);
        Some(quad::hermite_derivative(
            a.t, &a.y, &a.dy, b.t, &b.y, &b.dy, t,
        ))
    }

    /// `max |x(t) − x(t₀)| / max(|x(t₀)|, 1)` over samples where `x` is defined.
    pub fn relative_drift(&self, x: impl Fn(&Sample) -> Option<f64>) -> Option<f64> {
        let mut it = self.samples.iter().filter_map(&x);
        let x0 = it.next()?;
        let scale = x0.abs().max(1.0);
        Some(it.map(|v| (v - x0).abs()).fold(0.0, f64::max) / scale)
    }
}

/// `(A, A′)` at `u2` on a revolution chart.
pub(crate) fn profile_terms(chart: &SurfaceChart, u1: f64, u2: f64) -> Option<(f64, f64)> {
    match &chart.metric {
        Metric::Revolution { profile } => {
            let j = eval_jet3(profile, (u1, u2), Var::V).ok()?;
            Some((j.value, j.d1))
        }
        _ => None,
    }
}

/// First integrals at a state on a trajectory of the given kind.
pub(crate) fn diagnostics(
    chart: &SurfaceChart,
    kind: TrajectoryKind,
    y: &[f64; 6],
    k: f64,
) -> (Option<f64>, Option<f64>, f64) {
    let (q1, q2, q3) = (y[3], y[4], y[5]);
    let revolution = profile_terms(chart, y[0], y[1]);
    match kind {
        TrajectoryKind::Projected { c } => {
            let c2 = revolution.map(|(a, a1)| a * q1 - c * a1);
            (None, c2, q1 * q1 + q2 * q2 + c * c * k * k)
        }
        TrajectoryKind::Lifted | TrajectoryKind::LiftedSolution { .. } => {
            let c1 = (k != 0.0 && !chart.is_singular(k)).then(|| q3 / k);
            let c2 = match (kind.c(), c1, revolution) {
                (Some(c), _, Some((a, a1))) => Some(a * q1 - c * a1),
                (None, Some(c1), Some((a, a1))) => Some(a * q1 - c1 * a1),
                _ => None,
            };
            (c1, c2, q1 * q1 + q2 * q2 + q3 * q3)
        }
    }
}
