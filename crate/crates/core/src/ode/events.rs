use crate::geom::SurfaceChart;
use crate::roots::{bisect, golden_min};

use super::{CrossingEvent, CrossingKind, OdeError, Trajectory};

/// Time resolution of located crossings.
pub const CROSSING_TIME_TOL: f64 = 1e-11;

fn curvature_at(chart: &SurfaceChart, traj: &Trajectory, t: f64) -> Result<f64, OdeError> {
    let y = traj
        .state_at(t)
        .ok_or_else(|| OdeError::InterpolationError(format!("t = {t} outside trajectory")))?;
    Ok(chart.curvature(y[0], y[1])?)
}

fn event(
    chart: &SurfaceChart,
    traj: &Trajectory,
    t: f64,
    kind: CrossingKind,
) -> Result<CrossingEvent, OdeError> {
    let y = traj
        .state_at(t)
        .ok_or_else(|| OdeError::InterpolationError(format!("t = {t} outside trajectory")))?;
    let k = chart.curvature(y[0], y[1])?;
    let vertical_speed = match traj.kind.c() {
        Some(c) if !traj.kind.has_fiber() => (c * k * k).abs(),
        _ => (y[5] * k).abs(),
    };
    Ok(CrossingEvent {
        t,
        u1: y[0],
        u2: y[1],
        k,
        vertical_speed,
        kind,
    })
}

/// Locates sign changes of `K` along a trajectory (to within
/// [`CROSSING_TIME_TOL`] in time) and tangential touches of the zero set.
pub fn detect_sigma_crossings(
    traj: &Trajectory,
    chart: &SurfaceChart,
) -> Result<Vec<CrossingEvent>, OdeError> {
    let s = &traj.samples;
    let graze_tol = 1e-9 * chart.k_scale();
    let mut out = Vec::new();
    for i in 0..s.len() {
        let k = s[i].k;
        let prev = i.checked_sub(1).map(|j| s[j].k);
        let next = s.get(i + 1).map(|x| x.k);
        if k == 0.0 {
            let kind = match (prev, next) {
                (Some(p), Some(n)) if p * n < 0.0 => CrossingKind::Crossing,
                _ => CrossingKind::Grazing,
            };
            out.push(event(chart, traj, s[i].t, kind)?);
            continue;
        }
        if let Some(n) = next {
            if k * n < 0.0 {
                let t = bisect(
                    |t| curvature_at(chart, traj, t),
                    s[i].t,
                    s[i + 1].t,
                    CROSSING_TIME_TOL,
                )?;
                out.push(event(chart, traj, t, CrossingKind::Crossing)?);
                continue;
            }
        }
        if let (Some(p), Some(n)) = (prev, next) {
            let local_min = k.abs() <= p.abs() && k.abs() <= n.abs() && p * k > 0.0 && n * k > 0.0;
            if local_min {
                let (t, m) = golden_min(
                    |t| curvature_at(chart, traj, t).map(f64::abs),
                    s[i - 1].t,
                    s[i + 1].t,
                    CROSSING_TIME_TOL,
                )?;
                if m < graze_tol {
                    out.push(event(chart, traj, t, CrossingKind::Grazing)?);
                }
            }
        }
    }
    Ok(out)
}
