//! Explicit Runge–Kutta drivers.

use super::{IntegratorConfig, IntegratorStats, Method, OdeError};

pub(crate) enum Flow {
    Continue,
    Stop,
}

// Fehlberg 4(5) tableau.
const C: [f64; 6] = [0.0, 0.25, 0.375, 12.0 / 13.0, 1.0, 0.5];
const A: [[f64; 5]; 6] = [
    [0.0; 5],
    [0.25, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 32.0, 9.0 / 32.0, 0.0, 0.0, 0.0],
    [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0, 0.0, 0.0],
    [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0, 0.0],
    [
        -8.0 / 27.0,
        2.0,
        -3544.0 / 2565.0,
        1859.0 / 4104.0,
        -11.0 / 40.0,
    ],
];
const B4: [f64; 6] = [
    25.0 / 216.0,
    0.0,
    1408.0 / 2565.0,
    2197.0 / 4104.0,
    -0.2,
    0.0,
];
const B5: [f64; 6] = [
    16.0 / 135.0,
    0.0,
    6656.0 / 12825.0,
    28561.0 / 56430.0,
    -9.0 / 50.0,
    2.0 / 55.0,
];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;
const PI_ALPHA: f64 = 0.7 / 5.0;
const PI_BETA: f64 = 0.4 / 5.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[([f64; N], f64)]) -> [f64; N] {
    let mut out = *y;
    for (k, w) in terms {
        if *w != 0.0 {
            for i in 0..N {
                out[i] += h * w * k[i];
            }
        }
    }
    out
}

fn combine<const N: usize>(y: &[f64; N], h: f64, k: &[[f64; N]], w: &[f64]) -> [f64; N] {
    let mut out = *y;
    for (ks, &ws) in k.iter().zip(w) {
        if ws != 0.0 {
            for i in 0..N {
                out[i] += h * ws * ks[i];
            }
        }
    }
    out
}

/// Integrates `y' = rhs(t, y)` over `cfg.t_span`.
///
/// `accept(t, y, dy, h)` is called for the initial point (with `h = 0`) and
/// after every accepted step, where `dy = rhs(t, y)`. Components flagged in
/// `angles` get an absolute error tolerance only, so that shifting them
/// leaves the step sequence unchanged.
pub(crate) fn solve<const N: usize>(
    cfg: &IntegratorConfig,
    y0: [f64; N],
    angles: [bool; N],
    mut rhs: impl FnMut(f64, &[f64; N]) -> Result<[f64; N], OdeError>,
    mut accept: impl FnMut(f64, &[f64; N], &[f64; N], f64) -> Result<Flow, OdeError>,
) -> Result<IntegratorStats, OdeError> {
    cfg.validate()?;
    let (t0, t_end) = cfg.t_span;
    let mut stats = IntegratorStats::default();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y)?;
    stats.rhs_evals += 1;
    if let Flow::Stop = accept(t, &y, &k1, 0.0)? {
        return Ok(stats);
    }
    let h_start = match cfg.method {
        Method::Rk4 => cfg.h_init,
        Method::Rkf45 => cfg.h_init.clamp(cfg.h_min, cfg.h_max),
    };
    let mut h = h_start.min(t_end - t0);
    let mut err_prev: f64 = 1.0;
    let mut rejected_last = false;

    while t < t_end {
        if stats.steps >= cfg.max_steps {
            return Err(OdeError::MaxStepsExceeded {
                t,
                steps: stats.steps,
            });
        }
        let remaining = t_end - t;
        // Absorb rounding in the accumulated time instead of taking a
        // vanishing final step.
        let last = h >= remaining * (1.0 - 1e-10);
        let h_step = if last { remaining } else { h };

        match cfg.method {
            Method::Rk4 => {
                let k2 = rhs(t + 0.5 * h_step, &axpy(&y, h_step, &[(k1, 0.5)]))?;
                let k3 = rhs(t + 0.5 * h_step, &axpy(&y, h_step, &[(k2, 0.5)]))?;
                let k4 = rhs(t + h_step, &axpy(&y, h_step, &[(k3, 1.0)]))?;
                y = axpy(
                    &y,
                    h_step,
                    &[
                        (k1, 1.0 / 6.0),
                        (k2, 1.0 / 3.0),
                        (k3, 1.0 / 3.0),
                        (k4, 1.0 / 6.0),
                    ],
                );
                t = if last {
                    t_end
                } else {
                    t0 + (stats.steps + 1) as f64 * h
                };
                k1 = rhs(t, &y)?;
                stats.rhs_evals += 4;
                stats.record_step(h_step, last);
                if let Flow::Stop = accept(t, &y, &k1, h_step)? {
                    return Ok(stats);
                }
            }
            Method::Rkf45 => {
                let mut k = [[0.0; N]; 6];
                k[0] = k1;
                for s in 1..6 {
                    let ys = combine(&y, h_step, &k[..s], &A[s][..s]);
                    k[s] = rhs(t + C[s] * h_step, &ys)?;
                }
                stats.rhs_evals += 5;
                let y5 = combine(&y, h_step, &k, &B5);
                let mut err: f64 = 0.0;
                for i in 0..N {
                    let mut e = 0.0;
                    for j in 0..6 {
                        e += (B5[j] - B4[j]) * k[j][i];
                    }
                    let mag = if angles[i] {
                        0.0
                    } else {
                        y[i].abs().max(y5[i].abs())
                    };
                    let scale = cfg.abs_tol + cfg.rel_tol * mag;
                    err = err.max((h_step * e).abs() / scale);
                }
                if !err.is_finite() {
                    err = f64::INFINITY;
                }
                if err <= 1.0 {
                    t = if last { t_end } else { t + h_step };
                    y = y5;
                    k1 = rhs(t, &y)?;
                    stats.rhs_evals += 1;
                    stats.record_step(h_step, last);
                    if let Flow::Stop = accept(t, &y, &k1, h_step)? {
                        return Ok(stats);
                    }
                    let e = err.max(1e-10);
                    let mut fac = SAFETY * e.powf(-PI_ALPHA) * err_prev.powf(PI_BETA);
                    fac = fac.clamp(FAC_MIN, FAC_MAX);
                    if rejected_last {
                        fac = fac.min(1.0);
                    }
                    // Keep the controller's own step when the last step was
                    // shortened only to land on t_end.
                    h = (h.max(h_step) * fac).min(cfg.h_max);
                    err_prev = e;
                    rejected_last = false;
                } else {
                    stats.rejections += 1;
                    let fac = if err.is_finite() {
                        (SAFETY * err.powf(-0.2)).max(FAC_MIN)
                    } else {
                        FAC_MIN
                    };
                    h = h_step * fac;
                    rejected_last = true;
                    if h < cfg.h_min {
                        return Err(OdeError::StepUnderflow { t, h });
                    }
                }
            }
        }
    }
    Ok(stats)
}
