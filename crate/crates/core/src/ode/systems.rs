use crate::geom::{FramePointData, GeomError, SurfaceChart};

use super::solver::{solve, Flow};
use super::{
    detect_sigma_crossings, diagnostics, IntegratorConfig, IntegratorStats, LiftedState, OdeError,
    ProjectedState, Sample, Trajectory, TrajectoryKind,
};

/// Right-hand side of the projected equation
/// `∇_γ̇ γ̇ = C K J(γ̇) − C² K grad K` in frame components.
pub(crate) fn projected_rhs(f: &FramePointData, c: f64, q1: f64, q2: f64) -> [f64; 4] {
    let (c1, c2, k) = (f.c112, f.c212, f.k);
    let [k1, k2] = f.grad_k;
    let du = f.to_coords([q1, q2]);
    [
        du[0],
        du[1],
        -c1 * q1 * q2 - c2 * q2 * q2 - c * k * q2 - c * c * k * k1,
        c1 * q1 * q1 + c2 * q1 * q2 + c * k * q1 - c * c * k * k2,
    ]
}

/// Right-hand side of the geodesic system of the lifted metric, state
/// `(u1, u2, φ, Q1, Q2, Q3)`.
pub(crate) fn lifted_rhs(f: &FramePointData, q: [f64; 3]) -> [f64; 6] {
    let (c1, c2, k) = (f.c112, f.c212, f.k);
    let a = f.grad_k[0] / k;
    let b = f.grad_k[1] / k;
    let [q1, q2, q3] = q;
    let du = f.to_coords([q1, q2]);
    [
        du[0],
        du[1],
        q1 * c1 + q2 * c2 + q3 * k,
        -c1 * q1 * q2 - c2 * q2 * q2 - q2 * q3 - a * q3 * q3,
        c1 * q1 * q1 + c2 * q1 * q2 + q1 * q3 - b * q3 * q3,
        (a * q1 + b * q2) * q3,
    ]
}

fn left_domain(chart: &SurfaceChart, t: f64, u1: f64, u2: f64) -> Result<(), OdeError> {
    if chart.contains(u1, u2) {
        Ok(())
    } else {
        Err(OdeError::LeftDomain { t, u1, u2 })
    }
}

/// Frame at a stage point; a failure outside the chart means the solution
/// is leaving it.
fn stage_frame(chart: &SurfaceChart, t: f64, u1: f64, u2: f64) -> Result<FramePointData, OdeError> {
    chart.frame_unchecked(u1, u2).map_err(|e| {
        if chart.contains(u1, u2) {
            e.into()
        } else {
            OdeError::LeftDomain { t, u1, u2 }
        }
    })
}

fn make_sample(
    chart: &SurfaceChart,
    kind: TrajectoryKind,
    t: f64,
    y: [f64; 6],
    dy: [f64; 6],
    k: f64,
) -> Sample {
    let (c1, c2, c3sq) = diagnostics(chart, kind, &y, k);
    Sample {
        t,
        y,
        dy,
        k,
        c1,
        c2,
        c3sq,
    }
}

/// Integrates the projected equation with constant `c`.
pub fn integrate_projected(
    chart: &SurfaceChart,
    init: ProjectedState,
    c: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, OdeError> {
    chart.orthonormal_frame(init.u1, init.u2)?;
    let kind = TrajectoryKind::Projected { c };
    let mut samples = Vec::new();
    let y0 = [init.u1, init.u2, init.q1, init.q2];
    let (a1, a2) = (chart.u1.periodic, chart.u2.periodic);
    let stats = solve(
        cfg,
        y0,
        [a1, a2, false, false],
        |t, y| {
            let f = stage_frame(chart, t, y[0], y[1])?;
            Ok(projected_rhs(&f, c, y[2], y[3]))
        },
        |t, y, dy, _| {
            left_domain(chart, t, y[0], y[1])?;
            let k = chart.curvature(y[0], y[1])?;
            let full = [y[0], y[1], 0.0, y[2], y[3], 0.0];
            let dfull = [dy[0], dy[1], 0.0, dy[2], dy[3], 0.0];
            samples.push(make_sample(chart, kind, t, full, dfull, k));
            Ok(Flow::Continue)
        },
    )?;
    let mut traj = Trajectory {
        kind,
        chart: chart.name.clone(),
        samples,
        crossings: Vec::new(),
        stats,
    };
    if cfg.detect_events {
        traj.crossings = detect_sigma_crossings(&traj, chart)?;
    }
    Ok(traj)
}

/// Integrates a geodesic of the lifted metric. Stops with
/// [`OdeError::SingularApproach`] before the curvature reaches zero.
pub fn integrate_lifted(
    chart: &SurfaceChart,
    init: LiftedState,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, OdeError> {
    let f0 = chart.orthonormal_frame(init.u1, init.u2)?;
    if chart.is_singular(f0.k) {
        return Err(GeomError::SingularPoint {
            u1: init.u1,
            u2: init.u2,
            k: f0.k,
        }
        .into());
    }
    let sign0 = f0.k.signum();
    let kind = TrajectoryKind::Lifted;
    let mut samples: Vec<Sample> = Vec::new();
    let mut hit: Option<f64> = None;
    let y0 = [init.u1, init.u2, init.phi, init.q1, init.q2, init.q3];
    let result = solve(
        cfg,
        y0,
        [
            chart.u1.periodic,
            chart.u2.periodic,
            true,
            false,
            false,
            false,
        ],
        |t, y| {
            let f = stage_frame(chart, t, y[0], y[1])?;
            if chart.is_singular(f.k) || f.k.signum() != sign0 {
                return Err(OdeError::SingularApproach {
                    t,
                    partial: Box::new(Trajectory {
                        kind,
                        chart: String::new(),
                        samples: Vec::new(),
                        crossings: Vec::new(),
                        stats: IntegratorStats::default(),
                    }),
                });
            }
            Ok(lifted_rhs(&f, [y[3], y[4], y[5]]))
        },
        |t, y, dy, _| {
            left_domain(chart, t, y[0], y[1])?;
            let k = chart.curvature(y[0], y[1])?;
            if chart.is_singular(k) || k.signum() != sign0 {
                hit = Some(t);
                return Ok(Flow::Stop);
            }
            samples.push(make_sample(chart, kind, t, *y, *dy, k));
            Ok(Flow::Continue)
        },
    );
    let mut traj = Trajectory {
        kind,
        chart: chart.name.clone(),
        samples,
        crossings: Vec::new(),
        stats: IntegratorStats::default(),
    };
    match result {
        Ok(stats) => {
            traj.stats = stats;
            match hit {
                Some(t) => Err(OdeError::SingularApproach {
                    t,
                    partial: Box::new(traj),
                }),
                None => Ok(traj),
            }
        }
        Err(OdeError::SingularApproach { t, .. }) => Err(OdeError::SingularApproach {
            t,
            partial: Box::new(traj),
        }),
        Err(e) => Err(e),
    }
}
