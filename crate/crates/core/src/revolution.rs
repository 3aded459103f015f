//! Surfaces of revolution `g = A(v)² du² + dv²`: first integrals, the
//! curvature band that confines solutions, trajectory graphs `u(v)` by
//! quadrature, and the Lagrangian of the projected equation.

use thiserror::Error;

use crate::expr::{eval_jet3, Expr, ExprError, Var};
use crate::geom::{Coordinate, GeomError, Metric, SurfaceChart};
use crate::jet::Jet3;
use crate::ode::{ProjectedState, Trajectory, TrajectoryKind};
use crate::quad::{adaptive_simpson, gauss_legendre5, hermite};
use crate::roots::bisect;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RevolutionError {
    #[error("chart mismatch: {0}")]
    ChartMismatch(String),
    #[error("trajectory turns back at u2 = {u2}")]
    TurningPoint { u2: f64, partial: Box<GraphCurve> },
    #[error("trajectory is not transversal to the parallel u2 = {u2}")]
    NonTransversal { u2: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Profile `A(v)` of a surface of revolution.
#[derive(Debug, Clone, PartialEq)]
pub struct RevolutionProfile {
    /// Name of the chart the profile came from.
    pub name: String,
    pub a: Expr,
    pub u2: Coordinate,
    pub u1_period: Option<f64>,
}

/// `A, A′, A″, A‴` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileJet {
    pub a: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl ProfileJet {
    pub fn k(&self) -> f64 {
        -self.a2 / self.a
    }

    /// `dK/dv`.
    pub fn dk(&self) -> f64 {
        (-self.a3 * self.a + self.a2 * self.a1) / (self.a * self.a)
    }
}

impl RevolutionProfile {
    pub fn from_chart(chart: &SurfaceChart) -> Result<Self, RevolutionError> {
        match &chart.metric {
            Metric::Revolution { profile } => Ok(RevolutionProfile {
                name: chart.name.clone(),
                a: profile.clone(),
                u2: chart.u2,
                u1_period: chart.u1.period(),
            }),
            _ => Err(RevolutionError::ChartMismatch(format!(
                "`{}` is not a surface of revolution",
                chart.name
            ))),
        }
    }

    pub fn jet(&self, v: f64) -> Result<ProfileJet, RevolutionError> {
        let Jet3 { value, d1, d2, d3 } = eval_jet3(&self.a, (0.0, v), Var::V)?;
        if !(value > 0.0) {
            return Err(GeomError::DegenerateMetric { u1: 0.0, u2: v }.into());
        }
        Ok(ProfileJet {
            a: value,
            a1: d1,
            a2: d2,
            a3: d3,
        })
    }

    pub fn curvature(&self, v: f64) -> Result<f64, RevolutionError> {
        Ok(self.jet(v)?.k())
    }
}

/// Conserved quantities sampled along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstIntegrals {
    /// `Q³/K`, lifted trajectories only.
    pub c1: Option<Vec<f64>>,
    /// `A Q¹ − C A′`.
    pub c2: Vec<f64>,
    /// `Q1² + Q2² + C²K²` (or `Q1² + Q2² + Q3²` when lifted).
    pub c3sq: Vec<f64>,
    pub drift_c1: Option<f64>,
    pub drift_c2: f64,
    pub drift_c3sq: f64,
}

/// `max |x − x₀| / max(|x₀|, 1)`.
pub fn relative_drift(xs: &[f64]) -> f64 {
    let Some(&x0) = xs.first() else { return 0.0 };
    xs.iter().map(|x| (x - x0).abs()).fold(0.0, f64::max) / x0.abs().max(1.0)
}

/// Evaluates the first integrals at every sample of `traj`.
///
/// For lifted geodesics the constant `C` is `Q³/K` and the argument `c` is
/// ignored.
pub fn first_integrals(
    traj: &Trajectory,
    profile: &RevolutionProfile,
    c: f64,
) -> Result<FirstIntegrals, RevolutionError> {
    if traj.chart != profile.name {
        return Err(RevolutionError::ChartMismatch(format!(
            "trajectory on `{}`, profile of `{}`",
            traj.chart, profile.name
        )));
    }
    let lifted = traj.kind.has_fiber();
    let mut c1 = Vec::new();
    let mut c2 = Vec::new();
    let mut c3sq = Vec::new();
    for s in &traj.samples {
        let j = profile.jet(s.y[1])?;
        let k = j.k();
        let (q1, q2, q3) = (s.y[3], s.y[4], s.y[5]);
        if lifted {
            let cc = match traj.kind {
                TrajectoryKind::LiftedSolution { c } => c,
                _ => q3 / k,
            };
            if k != 0.0 {
                c1.push(q3 / k);
            }
            c2.push(j.a * q1 - cc * j.a1);
            c3sq.push(q1 * q1 + q2 * q2 + q3 * q3);
        } else {
            c2.push(j.a * q1 - c * j.a1);
            c3sq.push(q1 * q1 + q2 * q2 + c * c * k * k);
        }
    }
    Ok(FirstIntegrals {
        drift_c1: lifted.then(|| relative_drift(&c1)),
        c1: lifted.then_some(c1),
        drift_c2: relative_drift(&c2),
        drift_c3sq: relative_drift(&c3sq),
        c2,
        c3sq,
    })
}

/// Curvature band `|K| ≤ K_max` that contains every solution through the
/// initial data.
#[derive(Debug, Clone, PartialEq)]
pub struct ForbiddenRegion {
    pub k_max: f64,
    pub c3sq: f64,
    /// Closed `u2` intervals, in increasing order, where `|K| ≤ K_max`.
    pub bands: Vec<(f64, f64)>,
}

impl ForbiddenRegion {
    pub fn contains(&self, u2: f64, slack: f64) -> bool {
        self.bands
            .iter()
            .any(|&(a, b)| u2 >= a - slack && u2 <= b + slack)
    }
}

/// `K_max = √(Q1₀² + Q2₀² + C²K₀²) / |C|` and the `u2` bands where
/// `|K| ≤ K_max`.
pub fn forbidden_region(
    profile: &RevolutionProfile,
    init: ProjectedState,
    c: f64,
) -> Result<ForbiddenRegion, RevolutionError> {
    if c == 0.0 || !c.is_finite() {
        return Err(RevolutionError::InvalidInput("C must be nonzero".into()));
    }
    let k0 = profile.curvature(init.u2)?;
    let c3sq = init.q1 * init.q1 + init.q2 * init.q2 + c * c * k0 * k0;
    let k_max = c3sq.sqrt() / c.abs();

    const SAMPLES: usize = 4000;
    let (lo, hi) = profile.u2.sample_range();
    let inset = if profile.u2.periodic {
        0.0
    } else {
        1e-9 * (hi - lo)
    };
    let (lo, hi) = (lo + inset, hi - inset);
    let g = |v: f64| profile.curvature(v).map(|k| k.abs() - k_max);
    let grid: Vec<f64> = (0..=SAMPLES)
        .map(|i| lo + (hi - lo) * i as f64 / SAMPLES as f64)
        .collect();
    let vals: Vec<f64> = grid.iter().map(|&v| g(v)).collect::<Result<_, _>>()?;
    let mut bands = Vec::new();
    let mut start = (vals[0] <= 0.0).then_some(lo);
    for i in 0..SAMPLES {
        let (inside_a, inside_b) = (vals[i] <= 0.0, vals[i + 1] <= 0.0);
        if inside_a != inside_b {
            let r = bisect(g, grid[i], grid[i + 1], 1e-13)?;
            if inside_a {
                bands.push((start.take().unwrap_or(lo), r));
            } else {
                start = Some(r);
            }
        }
    }
    if let Some(s) = start {
        bands.push((s, hi));
    }
    Ok(ForbiddenRegion { k_max, c3sq, bands })
}

/// Sampled graph `u1(u2)` of a trajectory.
///
/// When the graph ends at a turning point `u2*`, `u1` behaves like
/// `√|u2* − u2|` there, so nodes and interpolation use the variable
/// `w = √|u2* − u2|` instead of `u2`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphCurve {
    pub u2: Vec<f64>,
    pub u1: Vec<f64>,
    /// `du1/du2` at each node (infinite at a turning point).
    pub slope: Vec<f64>,
    /// `u2` of the turning point that ends the graph, if any.
    pub turning: Option<f64>,
    /// Derivative of `u1` with respect to the interpolation variable
    /// (`u2`, or `w` when the graph ends at a turning point).
    pub rate: Vec<f64>,
}

impl GraphCurve {
    fn param(&self, u2: f64) -> f64 {
        match self.turning {
            Some(v) => (v - u2).abs().sqrt(),
            None => u2,
        }
    }

    /// Cubic Hermite interpolation between nodes.
    pub fn u1_at(&self, u2: f64) -> Option<f64> {
        let n = self.u2.len();
        if n < 2 {
            return None;
        }
        let increasing = self.u2[n - 1] > self.u2[0];
        let key = |x: f64| if increasing { x } else { -x };
        let i = self.u2.partition_point(|&x| key(x) <= key(u2));
        if i == 0 || (i == n && key(u2) > key(self.u2[n - 1])) {
            return None;
        }
        let i = i.min(n - 1) - 1;
        let y = hermite(
            self.param(self.u2[i]),
            &[self.u1[i]],
            &[self.rate[i]],
            self.param(self.u2[i + 1]),
            &[self.u1[i + 1]],
            &[self.rate[i + 1]],
            self.param(u2),
        );
        Some(y[0])
    }
}

/// Number of nodes of a [`GraphCurve`].
const GRAPH_NODES: usize = 1024;

/// Graph `u1(u2)` of the solution with first integrals `c2`, `c3sq`, from
/// `u1(u2_init) = u1_init` toward the end of `u2_span` selected by
/// `q2_sign` (the sign of `Q2`, i.e. the direction of travel in `u2`).
///
/// `du1/du2 = s (C2 + C A′) / (A √(A²(C3² − C²K²) − (C2 + C A′)²))`.
#[allow(clippy::too_many_arguments)]
pub fn graph_quadrature(
    profile: &RevolutionProfile,
    c: f64,
    c2: f64,
    c3sq: f64,
    u2_span: (f64, f64),
    u2_init: f64,
    u1_init: f64,
    q2_sign: f64,
) -> Result<GraphCurve, RevolutionError> {
    let (lo, hi) = (u2_span.0.min(u2_span.1), u2_span.0.max(u2_span.1));
    if !(u2_init >= lo && u2_init <= hi) || q2_sign == 0.0 {
        return Err(RevolutionError::InvalidInput(
            "u2_init must lie in the span and q2_sign must be nonzero".into(),
        ));
    }
    let s = q2_sign.signum();
    let end = if s > 0.0 { hi } else { lo };
    // Radicand, its derivative, numerator and A.
    let radicand = |v: f64| -> Result<(f64, f64, f64, f64), RevolutionError> {
        let j = profile.jet(v)?;
        let num = c2 + c * j.a1;
        let k = j.k();
        let e = c3sq - c * c * k * k;
        let r = j.a * j.a * e - num * num;
        let dr = 2.0 * j.a * j.a1 * e - 2.0 * j.a * j.a * c * c * k * j.dk() - 2.0 * num * c * j.a2;
        Ok((r, dr, num, j.a))
    };
    if radicand(u2_init)?.0 <= 0.0 {
        return Err(RevolutionError::NonTransversal { u2: u2_init });
    }
    let slope = |v: f64| -> Result<f64, RevolutionError> {
        let (r, _, num, a) = radicand(v)?;
        Ok(s * num / (a * r.max(0.0).sqrt()))
    };

    // First zero of the radicand between u2_init and the end of the span.
    const SCAN: usize = 8192;
    let mut turning = None;
    let mut prev = u2_init;
    for i in 1..=SCAN {
        let v = u2_init + (end - u2_init) * i as f64 / SCAN as f64;
        if radicand(v)?.0 <= 0.0 {
            let r = bisect(|x| radicand(x).map(|t| t.0), prev, v, 1e-14)?;
            turning = Some(r);
            break;
        }
        prev = v;
    }

    let mut curve = GraphCurve {
        u2: Vec::new(),
        u1: Vec::new(),
        slope: Vec::new(),
        turning,
        rate: Vec::new(),
    };
    let mut u1 = u1_init;
    match turning {
        None => {
            let mut v_prev = u2_init;
            for i in 0..=GRAPH_NODES {
                let v = u2_init + (end - u2_init) * i as f64 / GRAPH_NODES as f64;
                if i > 0 {
                    u1 += adaptive_simpson(|x| slope(x).map(|d| [d]), v_prev, v, 1e-13)?[0];
                }
                let d = slope(v)?;
                curve.u2.push(v);
                curve.u1.push(u1);
                curve.slope.push(d);
                curve.rate.push(d);
                v_prev = v;
            }
            Ok(curve)
        }
        Some(vt) => {
            // u2 = vt − dir w², and du1/dw = −2 w (C2 + C A′) / (A √radicand),
            // which tends to −2 (C2 + C A′) / (A √|radicand′|) at w = 0.
            let dir = (vt - u2_init).signum();
            let v_of = |w: f64| vt - dir * w * w;
            let rate = |w: f64| -> Result<f64, RevolutionError> {
                let v = v_of(w);
                let (r, dr, num, a) = radicand(v)?;
                if w == 0.0 || r <= 0.0 {
                    return Ok(-2.0 * num / (a * dr.abs().sqrt()));
                }
                Ok(-2.0 * w * num / (a * r.sqrt()))
            };
            let w0 = (vt - u2_init).abs().sqrt();
            let mut w_prev = w0;
            for i in 0..=GRAPH_NODES {
                let w = w0 * (1.0 - i as f64 / GRAPH_NODES as f64);
                if i > 0 {
                    // The integrand is smooth in w, and noisy near w = 0
                    // from cancellation in the radicand; a fixed rule
                    // avoids chasing that noise.
                    u1 += gauss_legendre5(&rate, w_prev, w)?;
                }
                let v = if i == GRAPH_NODES { vt } else { v_of(w) };
                curve.u2.push(v);
                curve.u1.push(u1);
                let dw = rate(w)?;
                // du1/du2 = (du1/dw) / (−2 dir w).
                let d = if i < GRAPH_NODES {
                    slope(v)?
                } else if dw == 0.0 {
                    0.0
                } else {
                    -dir * dw.signum() * f64::INFINITY
                };
                curve.slope.push(d);
                curve.rate.push(dw);
                w_prev = w;
            }
            Err(RevolutionError::TurningPoint {
                u2: vt,
                partial: Box::new(curve),
            })
        }
    }
}

/// Lagrangian `L = ½(A²ẋ₁² + ẋ₂²) − C A′ ẋ₁ − ½ C² K²` of the projected
/// equation, with the primitive `θ = A′ du¹` of `K dA`.
pub fn lagrangian(j: &ProfileJet, c: f64, v: [f64; 2]) -> f64 {
    let k = j.k();
    0.5 * (j.a * j.a * v[0] * v[0] + v[1] * v[1]) - c * j.a1 * v[0] - 0.5 * c * c * k * k
}

/// Action and discrete Euler–Lagrange residual of a curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagrangianReport {
    pub action: f64,
    /// Largest residual over interior samples.
    pub max_residual: f64,
    /// Sample spacing used for the differences.
    pub spacing: f64,
}

/// Action of `traj` and the discrete Euler–Lagrange residual
/// `d/dt ∂L/∂ẋ − ∂L/∂x`, both from central differences of the positions.
///
/// With `spacing = None` the samples must be equally spaced in time; with
/// `Some(h)` positions are resampled from the dense output every `h`.
pub fn lagrangian_action(
    profile: &RevolutionProfile,
    traj: &Trajectory,
    c: f64,
    spacing: Option<f64>,
) -> Result<LagrangianReport, RevolutionError> {
    if traj.chart != profile.name {
        return Err(RevolutionError::ChartMismatch(format!(
            "trajectory on `{}`, profile of `{}`",
            traj.chart, profile.name
        )));
    }
    let (t0, t1) = traj
        .t_range()
        .ok_or_else(|| RevolutionError::InvalidInput("empty trajectory".into()))?;
    let (h, xs): (f64, Vec<[f64; 2]>) = match spacing {
        Some(h) => {
            if !(h > 0.0) {
                return Err(RevolutionError::InvalidInput(
                    "spacing must be positive".into(),
                ));
            }
            let n = ((t1 - t0) / h).floor() as usize;
            let xs = (0..=n)
                .map(|i| traj.state_at(t0 + i as f64 * h).map(|y| [y[0], y[1]]))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| RevolutionError::InvalidInput("resampling failed".into()))?;
            (h, xs)
        }
        None => {
            let s = &traj.samples;
            if s.len() < 2 {
                return Err(RevolutionError::InvalidInput(
                    "need at least two samples".into(),
                ));
            }
            let h = s[1].t - s[0].t;
            if s.windows(2)
                .any(|w| ((w[1].t - w[0].t) - h).abs() > 1e-9 * h)
            {
                return Err(RevolutionError::InvalidInput(
                    "samples are not equally spaced; pass a spacing".into(),
                ));
            }
            (h, s.iter().map(|x| x.u()).collect())
        }
    };
    if xs.len() < 5 {
        return Err(RevolutionError::InvalidInput(
            "need at least five samples".into(),
        ));
    }
    let n = xs.len();
    let jets: Vec<ProfileJet> = xs
        .iter()
        .map(|x| profile.jet(x[1]))
        .collect::<Result<_, _>>()?;
    let vel: Vec<[f64; 2]> = (1..n - 1)
        .map(|i| {
            [
                (xs[i + 1][0] - xs[i - 1][0]) / (2.0 * h),
                (xs[i + 1][1] - xs[i - 1][1]) / (2.0 * h),
            ]
        })
        .collect();
    // vel[i - 1] is the velocity at sample i.
    let momentum = |i: usize| {
        let (j, v) = (&jets[i], vel[i - 1]);
        [j.a * j.a * v[0] - c * j.a1, v[1]]
    };
    let mut max_residual: f64 = 0.0;
    for i in 2..n - 2 {
        let (pp, pm) = (momentum(i + 1), momentum(i - 1));
        let j = &jets[i];
        let v = vel[i - 1];
        let dl_dx2 = j.a * j.a1 * v[0] * v[0] - c * j.a2 * v[0] - c * c * j.k() * j.dk();
        let r1 = (pp[0] - pm[0]) / (2.0 * h);
        let r2 = (pp[1] - pm[1]) / (2.0 * h) - dl_dx2;
        max_residual = max_residual.max(r1.abs()).max(r2.abs());
    }
    // Action by the trapezoidal rule on the interior velocities.
    let lag: Vec<f64> = (1..n - 1)
        .map(|i| lagrangian(&jets[i], c, vel[i - 1]))
        .collect();
    let action = h * (lag.iter().sum::<f64>() - 0.5 * (lag[0] + lag[lag.len() - 1]));
    Ok(LagrangianReport {
        action,
        max_residual,
        spacing: h,
    })
}
