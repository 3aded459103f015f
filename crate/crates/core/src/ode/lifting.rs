use crate::geom::SurfaceChart;
use crate::quad::{adaptive_simpson, hermite, hermite_derivative};

use super::systems::projected_rhs;
use super::{detect_sigma_crossings, diagnostics, OdeError, Sample, Trajectory, TrajectoryKind};

/// Default bound on the estimated interpolation error of the dense output.
pub const DEFAULT_INTERPOLATION_TOL: f64 = 1e-7;

/// Lifts a projected solution to the frame bundle through the fiber point
/// `phi0`: the horizontal lift of `gamma` rotated by `α(t) = C ∫ K²(γ(s)) ds`.
pub fn lift_solution(
    chart: &SurfaceChart,
    gamma: &Trajectory,
    phi0: f64,
    c: f64,
) -> Result<Trajectory, OdeError> {
    lift_solution_with_tol(chart, gamma, phi0, c, DEFAULT_INTERPOLATION_TOL)
}

/// [`lift_solution`] with an explicit interpolation tolerance.
pub fn lift_solution_with_tol(
    chart: &SurfaceChart,
    gamma: &Trajectory,
    phi0: f64,
    c: f64,
    tol: f64,
) -> Result<Trajectory, OdeError> {
    let TrajectoryKind::Projected { c: c_gamma } = gamma.kind else {
        return Err(OdeError::InvalidConfig(
            "lift_solution needs a projected trajectory".into(),
        ));
    };
    if (c_gamma - c).abs() > 1e-15 * (1.0 + c.abs()) {
        return Err(OdeError::InvalidConfig(format!(
            "trajectory was integrated with C = {c_gamma}, not {c}"
        )));
    }
    let s = &gamma.samples;
    if s.len() < 2 {
        return Err(OdeError::InterpolationError(
            "need at least two samples".into(),
        ));
    }
    if s.iter().all(|x| chart.is_singular(x.k)) {
        return Err(OdeError::InterpolationError(
            "trajectory lies entirely in the singular set".into(),
        ));
    }
    let (t_first, t_last) = (s[0].t, s[s.len() - 1].t);
    let span = t_last - t_first;

    // Rates of (horizontal fiber angle, α) at an interpolated base state.
    let rates = |y: &[f64; 6]| -> Result<[f64; 2], OdeError> {
        let f = chart.frame_unchecked(y[0], y[1])?;
        Ok([y[3] * f.c112 + y[4] * f.c212, c * f.k * f.k])
    };

    let kind = TrajectoryKind::LiftedSolution { c };
    let mut out = Vec::with_capacity(s.len());
    let mut acc = [0.0, 0.0];
    for i in 0..s.len() {
        if i > 0 {
            let (a, b) = (&s[i - 1], &s[i]);
            let h = b.t - a.t;
            // Dense-output check at the quarter point, where the cubic
            // Hermite derivative error is largest relative to the position
            // error (ratio h/3).
            let tq = a.t + 0.25 * h;
            let yq = hermite(a.t, &a.y, &a.dy, b.t, &b.y, &b.dy, tq);
            let dq = hermite_derivative(a.t, &a.y, &a.dy, b.t, &b.y, &b.dy, tq);
            let f = chart.frame_unchecked(yq[0], yq[1])?;
            let r = projected_rhs(&f, c, yq[3], yq[4]);
            let mismatch = [r[0] - dq[0], r[1] - dq[1], r[2] - dq[3], r[3] - dq[4]]
                .iter()
                .fold(0.0f64, |m, x| m.max(x.abs()));
            let estimate = mismatch * h / 3.0;
            if estimate > tol {
                return Err(OdeError::InterpolationError(format!(
                    "samples at t = {} are too sparse (estimated error {estimate:.3e} > {tol:.3e})",
                    a.t
                )));
            }
            let part = adaptive_simpson(
                |t| rates(&hermite(a.t, &a.y, &a.dy, b.t, &b.y, &b.dy, t)),
                a.t,
                b.t,
                tol * h / span,
            )?;
            acc[0] += part[0];
            acc[1] += part[1];
        }
        let x = &s[i];
        let f = chart.frame_unchecked(x.y[0], x.y[1])?;
        let (q1, q2) = (x.y[3], x.y[4]);
        let q3 = c * f.k;
        let y = [x.y[0], x.y[1], phi0 + acc[0] + acc[1], q1, q2, q3];
        let dy = [
            x.dy[0],
            x.dy[1],
            q1 * f.c112 + q2 * f.c212 + q3 * f.k,
            x.dy[3],
            x.dy[4],
            c * (f.grad_k[0] * q1 + f.grad_k[1] * q2),
        ];
        let (c1, c2, c3sq) = diagnostics(chart, kind, &y, f.k);
        out.push(Sample {
            t: x.t,
            y,
            dy,
            k: f.k,
            c1,
            c2,
            c3sq,
        });
    }
    let mut traj = Trajectory {
        kind,
        chart: gamma.chart.clone(),
        samples: out,
        crossings: Vec::new(),
        stats: gamma.stats,
    };
    traj.crossings = detect_sigma_crossings(&traj, chart)?;
    Ok(traj)
}
