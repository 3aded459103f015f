//! Numerical reference computations that do not use the closed-form lift
//! tables: Lie brackets by finite differences, connection coefficients by
//! the Koszul formula, curvature by differentiating the connection.

use crate::geom::{
    christoffel_from_structure, riemann_from_connection, GeomError, Riemann, SurfaceChart, Table,
};
use crate::lift::{self, frame_components, to_lifted_frame, LiftCurvature};
use crate::numdiff;

/// Largest first step tried by the extrapolated differences.
const FD_STEP: f64 = 0.02;

fn partial<const N: usize>(
    f: &impl Fn([f64; N]) -> Result<[f64; N], GeomError>,
    p: [f64; N],
    axis: usize,
    h0: f64,
) -> Result<[f64; N], GeomError> {
    numdiff::ridders_shrinking(
        |s| {
            let mut q = p;
            q[axis] += s;
            f(q)
        },
        0.0,
        h0,
    )
}

/// First steps along `(u1, u2, φ)` at a chart point, kept well inside the
/// domain.
pub fn axis_steps(chart: &SurfaceChart, u1: f64, u2: f64) -> [f64; 3] {
    let room = |d| FD_STEP.min(0.25 * chart.room([u1, u2], d));
    [room([1.0, 0.0]), room([0.0, 1.0]), FD_STEP]
}

/// `[X, Y]` at `p` from extrapolated central differences of both fields,
/// starting from step `h0[b]` along axis `b`.
pub fn fd_bracket<const N: usize>(
    x: impl Fn([f64; N]) -> Result<[f64; N], GeomError>,
    y: impl Fn([f64; N]) -> Result<[f64; N], GeomError>,
    p: [f64; N],
    h0: [f64; N],
) -> Result<[f64; N], GeomError> {
    let xp = x(p)?;
    let yp = y(p)?;
    let mut out = [0.0; N];
    for b in 0..N {
        // Skip directions neither field moves along.
        if xp[b] == 0.0 && yp[b] == 0.0 {
            continue;
        }
        let dy = partial(&y, p, b, h0[b])?;
        let dx = partial(&x, p, b, h0[b])?;
        for a in 0..N {
            out[a] += xp[b] * dy[a] - yp[b] * dx[a];
        }
    }
    Ok(out)
}

/// `(c¹₁₂, c²₁₂)` from a finite-difference bracket of the frame fields.
pub fn base_structure_fd(chart: &SurfaceChart, u1: f64, u2: f64) -> Result<(f64, f64), GeomError> {
    let f = chart.orthonormal_frame(u1, u2)?;
    let w = fd_bracket(
        |p| Ok(chart.frame_unchecked(p[0], p[1])?.e1),
        |p| Ok(chart.frame_unchecked(p[0], p[1])?.e2),
        [u1, u2],
        {
            let h = axis_steps(chart, u1, u2);
            [h[0], h[1]]
        },
    )?;
    let g = chart.metric_at(u1, u2)?;
    let dot = |a: [f64; 2], b: [f64; 2]| {
        g[0] * a[0] * b[0] + g[1] * (a[0] * b[1] + a[1] * b[0]) + g[2] * a[1] * b[1]
    };
    Ok((dot(f.e1, w), dot(f.e2, w)))
}

/// `ĉᵏᵢⱼ` from finite-difference brackets of the lifted frame fields.
pub fn lifted_structure_fd(chart: &SurfaceChart, u1: f64, u2: f64) -> Result<Table<3>, GeomError> {
    let f = chart.frame_unchecked(u1, u2)?;
    if chart.is_singular(f.k) {
        return Err(GeomError::SingularPoint { u1, u2, k: f.k });
    }
    let field =
        |i: usize| move |p: [f64; 3]| Ok(frame_components(&chart.frame_unchecked(p[0], p[1])?)[i]);
    let h = axis_steps(chart, u1, u2);
    let mut c = [[[0.0; 3]; 3]; 3];
    for i in 0..3 {
        for j in (i + 1)..3 {
            let w = fd_bracket(field(i), field(j), [u1, u2, 0.0], h)?;
            let comps = to_lifted_frame(&f, w);
            for k in 0..3 {
                c[k][i][j] = comps[k];
                c[k][j][i] = -comps[k];
            }
        }
    }
    Ok(c)
}

/// `Γ̂` by the Koszul formula applied to [`lifted_structure_fd`].
pub fn lifted_connection_koszul(
    chart: &SurfaceChart,
    u1: f64,
    u2: f64,
) -> Result<Table<3>, GeomError> {
    Ok(christoffel_from_structure(&lifted_structure_fd(
        chart, u1, u2,
    )?))
}

/// Full `R̂ᵢⱼₖₗ` from the Koszul connection and its derivatives along the
/// lifted frame (Ridders extrapolation).
pub fn lifted_curvature_fd(
    chart: &SurfaceChart,
    u1: f64,
    u2: f64,
) -> Result<Riemann<3>, GeomError> {
    let f = chart.orthonormal_frame(u1, u2)?;
    let c = lifted_structure_fd(chart, u1, u2)?;
    let gamma = christoffel_from_structure(&c);
    let flat = |t: &Table<3>| {
        let mut v = [0.0; 27];
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    v[9 * k + 3 * i + j] = t[k][i][j];
                }
            }
        }
        v
    };
    let frame = frame_components(&f);
    let mut dgamma = [[[[0.0; 3]; 3]; 3]; 3];
    // Nothing depends on φ, so only the base part of each 𝓔ᵢ moves the point;
    // 𝓔₃ is purely vertical and differentiates everything to zero.
    for (i, e) in frame.iter().enumerate().take(2) {
        let h0 = FD_STEP.min(chart.curvature_step(&f, [e[0], e[1]]));
        let d = numdiff::ridders_shrinking(
            |s| {
                Ok::<_, GeomError>(flat(&lifted_connection_koszul(
                    chart,
                    u1 + s * e[0],
                    u2 + s * e[1],
                )?))
            },
            0.0,
            h0,
        )?;
        for k in 0..3 {
            for a in 0..3 {
                for b in 0..3 {
                    dgamma[i][k][a][b] = d[9 * k + 3 * a + b];
                }
            }
        }
    }
    Ok(riemann_from_connection(&gamma, &c, &dgamma))
}

/// Largest absolute differences between the closed-form tables and the
/// numerical references at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableDeltas {
    pub c_hat: f64,
    pub gamma_hat: f64,
    pub gamma_hat_from_exact_c: f64,
    pub r_hat: f64,
}

impl TableDeltas {
    pub fn max(&self) -> f64 {
        self.c_hat
            .max(self.gamma_hat)
            .max(self.gamma_hat_from_exact_c)
            .max(self.r_hat)
    }
}

fn table_diff(a: &Table<3>, b: &Table<3>) -> f64 {
    let mut m: f64 = 0.0;
    for k in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                m = m.max((a[k][i][j] - b[k][i][j]).abs());
            }
        }
    }
    m
}

pub fn table_deltas(chart: &SurfaceChart, u1: f64, u2: f64) -> Result<TableDeltas, GeomError> {
    let c = lift::lift_structure_functions(chart, u1, u2)?;
    let g = lift::lift_connection(chart, u1, u2)?;
    let r = lift::lift_curvature(chart, u1, u2)?;
    let c_fd = lifted_structure_fd(chart, u1, u2)?;
    let g_fd = christoffel_from_structure(&c_fd);
    let r_fd = LiftCurvature::from_tensor(&lifted_curvature_fd(chart, u1, u2)?);
    let r_delta = r
        .as_array()
        .iter()
        .zip(r_fd.as_array())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(TableDeltas {
        c_hat: table_diff(&c, &c_fd),
        gamma_hat: table_diff(&g, &g_fd),
        gamma_hat_from_exact_c: table_diff(&g, &christoffel_from_structure(&c)),
        r_hat: r_delta,
    })
}
