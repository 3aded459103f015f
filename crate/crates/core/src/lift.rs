//! The Wagner lift `ĝ` on the orthonormal frame bundle over one chart.
//!
//! Points of the bundle are written `(u1, u2, φ)`; the fiber angle `φ`
//! measures the rotation of a frame against the reference frame `(e₁, e₂)`.
//! The lifted orthonormal frame is
//!
//! ```text
//! 𝓔₁ = e₁ + c¹₁₂ ∂φ,   𝓔₂ = e₂ + c²₁₂ ∂φ,   𝓔₃ = K ∂φ
//! ```
//!
//! and none of its components depend on `φ`.

use std::f64::consts::TAU;

use crate::geom::{FramePointData, GeomError, Riemann, SurfaceChart, Table};
use crate::numdiff;
use crate::oracle;
use crate::roots;

/// A fiber angle in `[0, 2π)` plus the number of full turns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberAngle {
    pub angle: f64,
    pub winding: i64,
}

impl FiberAngle {
    pub fn from_unwrapped(phi: f64) -> Self {
        let winding = (phi / TAU).floor();
        FiberAngle {
            angle: phi - winding * TAU,
            winding: winding as i64,
        }
    }

    pub fn unwrapped(&self) -> f64 {
        self.angle + self.winding as f64 * TAU
    }
}

/// The six independent components `R̂ᵢⱼₖₗ`, with
/// `R̂ᵢⱼₖₗ = ĝ(R(𝓔ᵢ,𝓔ⱼ)𝓔ₖ, 𝓔ₗ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftCurvature {
    pub r1212: f64,
    pub r1213: f64,
    pub r1223: f64,
    pub r1313: f64,
    pub r1323: f64,
    pub r2323: f64,
}

impl LiftCurvature {
    pub fn as_array(&self) -> [f64; 6] {
        [
            self.r1212, self.r1213, self.r1223, self.r1313, self.r1323, self.r2323,
        ]
    }

    pub const LABELS: [&'static str; 6] = ["1212", "1213", "1223", "1313", "1323", "2323"];

    /// Index pairs `((i, j), (k, l))` of the independent components, zero-based.
    pub const PAIRS: [((usize, usize), (usize, usize)); 6] = [
        ((0, 1), (0, 1)),
        ((0, 1), (0, 2)),
        ((0, 1), (1, 2)),
        ((0, 2), (0, 2)),
        ((0, 2), (1, 2)),
        ((1, 2), (1, 2)),
    ];

    /// Reads the independent components out of a full tensor.
    pub fn from_tensor(r: &Riemann<3>) -> Self {
        let v = Self::PAIRS.map(|((i, j), (k, l))| r[i][j][k][l]);
        LiftCurvature {
            r1212: v[0],
            r1213: v[1],
            r1223: v[2],
            r1313: v[3],
            r1323: v[4],
            r2323: v[5],
        }
    }

    /// Full tensor assembled with the pair symmetries
    /// `Rᵢⱼₖₗ = −Rⱼᵢₖₗ = −Rᵢⱼₗₖ = Rₖₗᵢⱼ`.
    pub fn tensor(&self) -> Riemann<3> {
        let mut r = [[[[0.0; 3]; 3]; 3]; 3];
        let vals = self.as_array();
        for (n, &((i, j), (k, l))) in Self::PAIRS.iter().enumerate() {
            let x = vals[n];
            for (a, b, s1) in [(i, j, 1.0), (j, i, -1.0)] {
                for (c, d, s2) in [(k, l, 1.0), (l, k, -1.0)] {
                    r[a][b][c][d] = s1 * s2 * x;
                    r[c][d][a][b] = s1 * s2 * x;
                }
            }
        }
        r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiftPointData {
    pub base: FramePointData,
    pub phi: FiberAngle,
    /// `frame[i]` holds the `(∂₁, ∂₂, ∂φ)` components of `𝓔ᵢ₊₁`.
    pub frame: [[f64; 3]; 3],
    /// True when `|K|` is below the chart's singular threshold.
    pub singular: bool,
    pub c_hat: Option<Table<3>>,
    pub gamma_hat: Option<Table<3>>,
    pub r_hat: Option<LiftCurvature>,
}

/// Lifted frame components at a base frame.
pub fn frame_components(f: &FramePointData) -> [[f64; 3]; 3] {
    [
        [f.e1[0], f.e1[1], f.c112],
        [f.e2[0], f.e2[1], f.c212],
        [0.0, 0.0, f.k],
    ]
}

fn singular_error(chart: &SurfaceChart, f: &FramePointData) -> Result<(), GeomError> {
    if chart.is_singular(f.k) {
        Err(GeomError::SingularPoint {
            u1: f.point[0],
            u2: f.point[1],
            k: f.k,
        })
    } else {
        Ok(())
    }
}

/// `(e₁K/K, e₂K/K)`.
pub fn log_gradient(f: &FramePointData) -> [f64; 2] {
    [f.grad_k[0] / f.k, f.grad_k[1] / f.k]
}

/// `d[i][j] = eᵢ(xⱼ)` for `x = (e₁K/K, e₂K/K)`. Exact from the jets where
/// they reach second derivatives of K, otherwise Ridders-extrapolated
/// differences of the jet-exact first derivatives.
pub fn log_gradient_derivatives(
    chart: &SurfaceChart,
    f: &FramePointData,
) -> Result<[[f64; 2]; 2], GeomError> {
    let [u1, u2] = f.point;
    if let Some(h) = chart.frame_hessian_k(u1, u2)? {
        let x = log_gradient(f);
        return Ok([0, 1].map(|i| [0, 1].map(|j| (h[i][j] - x[j] * f.grad_k[i]) / f.k)));
    }
    let mut d = [[0.0; 2]; 2];
    for (i, dir) in [f.e1, f.e2].into_iter().enumerate() {
        d[i] = numdiff::ridders_shrinking(
            |s| {
                let g = chart.frame_unchecked(u1 + s * dir[0], u2 + s * dir[1])?;
                Ok::<_, GeomError>(log_gradient(&g))
            },
            0.0,
            chart.curvature_step(f, dir),
        )?;
    }
    Ok(d)
}

/// Lifted structure functions `ĉᵏᵢⱼ` from base data.
pub fn structure_table(f: &FramePointData) -> Table<3> {
    let [a, b] = log_gradient(f);
    let mut c = [[[0.0; 3]; 3]; 3];
    let mut set = |k: usize, i: usize, j: usize, v: f64| {
        c[k][i][j] = v;
        c[k][j][i] = -v;
    };
    set(0, 0, 1, f.c112);
    set(1, 0, 1, f.c212);
    set(2, 0, 1, 1.0);
    set(2, 0, 2, a);
    set(2, 1, 2, b);
    c
}

/// Lifted connection coefficients `Γ̂ᵏᵢⱼ` from base data.
pub fn connection_table(f: &FramePointData) -> Table<3> {
    let [a, b] = log_gradient(f);
    let mut g = [[[0.0; 3]; 3]; 3];
    // Independent entries; the rest follow from Γ̂ᵇₐ꜀ = −Γ̂꜀ₐᵇ.
    let mut set = |k: usize, i: usize, j: usize, v: f64| {
        g[k][i][j] = v;
        g[j][i][k] = -v;
    };
    set(0, 0, 1, f.c112);
    set(0, 1, 1, f.c212);
    set(0, 2, 1, 0.5);
    set(0, 1, 2, 0.5);
    set(1, 0, 2, -0.5);
    set(0, 2, 2, a);
    set(1, 2, 2, b);
    set(0, 0, 2, 0.0);
    set(1, 1, 2, 0.0);
    g
}

/// Lifted curvature from base data and the frame derivatives of
/// `(e₁K/K, e₂K/K)`.
pub fn curvature_table(f: &FramePointData, d: &[[f64; 2]; 2]) -> LiftCurvature {
    let [a, b] = log_gradient(f);
    let (c1, c2, k) = (f.c112, f.c212, f.k);
    LiftCurvature {
        r1212: 0.75 - k,
        r1213: a,
        r1223: b,
        r1313: -0.25 - d[0][0] - c1 * b + a * a,
        r1323: -d[0][1] + c1 * a + a * b,
        r2323: -0.25 - d[1][1] + c2 * a + b * b,
    }
}

/// Lifted frame and, away from the singular set, its tables.
pub fn lift_frame(
    chart: &SurfaceChart,
    u1: f64,
    u2: f64,
    phi: f64,
) -> Result<LiftPointData, GeomError> {
    let base = chart.orthonormal_frame(u1, u2)?;
    let singular = chart.is_singular(base.k);
    let (c_hat, gamma_hat, r_hat) = if singular {
        (None, None, None)
    } else {
        let d = log_gradient_derivatives(chart, &base)?;
        (
            Some(structure_table(&base)),
            Some(connection_table(&base)),
            Some(curvature_table(&base, &d)),
        )
    };
    Ok(LiftPointData {
        frame: frame_components(&base),
        base,
        phi: FiberAngle::from_unwrapped(phi),
        singular,
        c_hat,
        gamma_hat,
        r_hat,
    })
}

pub fn lift_structure_functions(
    chart: &SurfaceChart,
    u1: f64,
    u2: f64,
) -> Result<Table<3>, GeomError> {
    let f = chart.orthonormal_frame(u1, u2)?;
    singular_error(chart, &f)?;
    Ok(structure_table(&f))
}

pub fn lift_connection(chart: &SurfaceChart, u1: f64, u2: f64) -> Result<Table<3>, GeomError> {
    let f = chart.orthonormal_frame(u1, u2)?;
    singular_error(chart, &f)?;
    Ok(connection_table(&f))
}

pub fn lift_curvature(chart: &SurfaceChart, u1: f64, u2: f64) -> Result<LiftCurvature, GeomError> {
    let f = chart.orthonormal_frame(u1, u2)?;
    singular_error(chart, &f)?;
    let d = log_gradient_derivatives(chart, &f)?;
    Ok(curvature_table(&f, &d))
}

/// Vertical part of `[𝓔₁, 𝓔₂]` in units of `∂φ`; equals `K`.
pub fn nonholonomity(chart: &SurfaceChart, u1: f64, u2: f64) -> Result<f64, GeomError> {
    Ok(chart.orthonormal_frame(u1, u2)?.k)
}

/// [`nonholonomity`] computed from a finite-difference bracket of the
/// horizontal lifts.
pub fn nonholonomity_numeric(chart: &SurfaceChart, u1: f64, u2: f64) -> Result<f64, GeomError> {
    let f = chart.orthonormal_frame(u1, u2)?;
    let w = oracle::fd_bracket(
        |p| Ok(frame_components(&chart.frame_unchecked(p[0], p[1])?)[0]),
        |p| Ok(frame_components(&chart.frame_unchecked(p[0], p[1])?)[1]),
        [u1, u2, 0.0],
        oracle::axis_steps(chart, u1, u2),
    )?;
    // Split the base part of the bracket along e₁, e₂ and remove the ∂φ
    // component of its horizontal lift.
    let x = solve2([f.e1, f.e2], [w[0], w[1]]);
    Ok(w[2] - (x[0] * f.c112 + x[1] * f.c212))
}

/// Solves `x₁a + x₂b = w` for columns `a, b`.
fn solve2(cols: [[f64; 2]; 2], w: [f64; 2]) -> [f64; 2] {
    let [a, b] = cols;
    let det = a[0] * b[1] - a[1] * b[0];
    [
        (w[0] * b[1] - w[1] * b[0]) / det,
        (a[0] * w[1] - a[1] * w[0]) / det,
    ]
}

/// Frame components of a coordinate vector `w` (the ĝ-dual pairing with
/// each `𝓔ᵢ`). Requires `K ≠ 0`.
pub fn to_lifted_frame(f: &FramePointData, w: [f64; 3]) -> [f64; 3] {
    let x = solve2([f.e1, f.e2], [w[0], w[1]]);
    let q3 = (w[2] - x[0] * f.c112 - x[1] * f.c212) / f.k;
    [x[0], x[1], q3]
}

/// Matrix of `ĝ` in the basis `(E^h₁, E^h₂, ∂φ)`: `diag(1, 1, 1/K²)`.
pub fn metric_matrix(k: f64) -> Option<[[f64; 3]; 3]> {
    (k != 0.0).then(|| [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0 / (k * k)]])
}

/// Matrix of `ĝ*` in the dual basis: `diag(1, 1, K²)`. Defined everywhere.
pub fn dual_metric_matrix(k: f64) -> [[f64; 3]; 3] {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, k * k]]
}

/// `ĝ*` in coordinates `(u1, u2, φ)`: `Σᵢ 𝓔ᵢ ⊗ 𝓔ᵢ`. Continuous across the
/// singular set, where it drops to rank 2.
pub fn dual_metric_coords(f: &FramePointData) -> [[f64; 3]; 3] {
    let e = frame_components(f);
    let mut m = [[0.0; 3]; 3];
    for row in e.iter() {
        for a in 0..3 {
            for b in 0..3 {
                m[a][b] += row[a] * row[b];
            }
        }
    }
    m
}

/// Candidate infinitesimal isometry on the bundle.
pub enum VectorField<'a> {
    /// `∂φ`.
    Vertical,
    /// `∂₁`, the rotation of a surface of revolution.
    Rotational,
    /// Arbitrary field given in `(u1, u2, φ)` coordinates.
    Custom(&'a dyn Fn([f64; 3]) -> [f64; 3]),
}

impl VectorField<'_> {
    fn at(&self, p: [f64; 3]) -> [f64; 3] {
        match self {
            VectorField::Vertical => [0.0, 0.0, 1.0],
            VectorField::Rotational => [1.0, 0.0, 0.0],
            VectorField::Custom(f) => f(p),
        }
    }
}

/// Largest entry of `X ĝ(Y,Z) − ĝ([X,Y],Z) − ĝ(Y,[X,Z])` over lifted frame
/// pairs `Y, Z`. Zero exactly when `X` is Killing at the point.
pub fn lie_derivative_residual(
    chart: &SurfaceChart,
    field: &VectorField<'_>,
    u1: f64,
    u2: f64,
    phi: f64,
) -> Result<f64, GeomError> {
    let f = chart.orthonormal_frame(u1, u2)?;
    singular_error(chart, &f)?;
    let p = [u1, u2, phi];
    let mut brackets = [[0.0; 3]; 3];
    for (j, slot) in brackets.iter_mut().enumerate() {
        let w = oracle::fd_bracket(
            |q| Ok(field.at(q)),
            |q| Ok(frame_components(&chart.frame_unchecked(q[0], q[1])?)[j]),
            p,
            oracle::axis_steps(chart, u1, u2),
        )?;
        *slot = to_lifted_frame(&f, w);
    }
    // ĝ(𝓔ⱼ, 𝓔ₖ) = δⱼₖ is constant, so only the bracket terms remain.
    let mut worst: f64 = 0.0;
    for j in 0..3 {
        for k in 0..3 {
            worst = worst.max((brackets[j][k] + brackets[k][j]).abs());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParallelKind {
    /// `K` changes sign across the parallel.
    Crossing,
    /// `K` touches zero without changing sign.
    Touching,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularParallel {
    pub u2: f64,
    pub kind: ParallelKind,
}

/// Zero parallels of `K` on a revolution chart.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularSetInfo {
    pub parallels: Vec<SingularParallel>,
    /// Width of the bracket each root was isolated to.
    pub tolerance: f64,
}

/// Locates the parallels where `K(u2) = 0`.
pub fn singular_parallels(chart: &SurfaceChart) -> Result<SingularSetInfo, GeomError> {
    if !chart.is_revolution() {
        return Err(GeomError::InvalidChart(
            "singular parallels are defined for revolution charts".into(),
        ));
    }
    const SAMPLES: usize = 4000;
    let tolerance = 1e-12;
    let u1 = chart.u1.sample_range().0.max(0.0);
    let k = |v: f64| chart.curvature(u1, chart.u2.wrap(v));
    let (lo, hi) = chart.u2.sample_range();
    let periodic = chart.u2.periodic;
    // Open intervals are sampled strictly inside; periodic ones include
    // their start and wrap around.
    let grid: Vec<f64> = (0..=SAMPLES)
        .map(|i| {
            let s = i as f64 / SAMPLES as f64;
            if periodic {
                lo + s * (hi - lo)
            } else {
                lo + (hi - lo) * (1e-9 + s * (1.0 - 2e-9))
            }
        })
        .collect();
    let vals: Vec<f64> = grid.iter().map(|&v| k(v)).collect::<Result<_, _>>()?;
    let zero_tol = 1e-9 * chart.k_scale();
    let mut out: Vec<SingularParallel> = Vec::new();
    let n = grid.len();
    let mut i = 0;
    while i + 1 < n {
        let (a, b) = (grid[i], grid[i + 1]);
        let (fa, fb) = (vals[i], vals[i + 1]);
        if fa == 0.0 {
            let prev = if i > 0 { Some(vals[i - 1]) } else { None };
            let kind = match prev {
                Some(p) if p.signum() != fb.signum() && fb != 0.0 => ParallelKind::Crossing,
                _ => ParallelKind::Touching,
            };
            out.push(SingularParallel { u2: a, kind });
        } else if fa * fb < 0.0 {
            let r = roots::bisect(k, a, b, tolerance)?;
            out.push(SingularParallel {
                u2: r,
                kind: ParallelKind::Crossing,
            });
        } else if i > 0 && fb != 0.0 {
            // Local minimum of |K| without a sign change: refine and test.
            let (fp, fa_abs, fb_abs) = (vals[i - 1].abs(), fa.abs(), fb.abs());
            if fa_abs <= fp && fa_abs <= fb_abs && vals[i - 1] * fa > 0.0 {
                let (x, m) = roots::golden_min(|v| k(v).map(f64::abs), grid[i - 1], b, tolerance)?;
                if m < zero_tol {
                    out.push(SingularParallel {
                        u2: x,
                        kind: ParallelKind::Touching,
                    });
                }
            }
        }
        i += 1;
    }
    for p in out.iter_mut() {
        p.u2 = chart.u2.wrap(p.u2);
    }
    out.sort_by(|a, b| a.u2.total_cmp(&b.u2));
    out.dedup_by(|a, b| (a.u2 - b.u2).abs() < 1e-9);
    Ok(SingularSetInfo {
        parallels: out,
        tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Builtin;

    #[test]
    fn fiber_angle_round_trip() {
        let a = FiberAngle::from_unwrapped(-7.0);
        assert!(a.angle >= 0.0 && a.angle < TAU);
        assert_eq!(a.winding, -2);
        assert!((a.unwrapped() + 7.0).abs() < 1e-15);
    }

    #[test]
    fn sphere_tables() {
        let chart = Builtin::Sphere { k0: 1.0 }.chart().unwrap();
        let l = lift_frame(&chart, 0.3, 1.1, 0.0).unwrap();
        assert_eq!(l.frame[2], [0.0, 0.0, 1.0]);
        let c = l.c_hat.unwrap();
        assert_eq!(c[2][0][1], 1.0);
        assert!(c[2][0][2].abs() < 1e-12 && c[2][1][2].abs() < 1e-12);
        let r = l.r_hat.unwrap();
        assert!((r.r1212 + 0.25).abs() < 1e-12);
        assert!((r.r1313 + 0.25).abs() < 1e-9);
        assert!((r.r2323 + 0.25).abs() < 1e-9);
    }

    #[test]
    fn torus_sigma_is_flagged() {
        let chart = Builtin::Torus { big_r: 2.0, r: 1.0 }.chart().unwrap();
        let l = lift_frame(&chart, 0.0, std::f64::consts::FRAC_PI_2, 0.0).unwrap();
        assert!(l.singular);
        assert!(l.frame[2][2].abs() < 1e-15);
        assert!(matches!(
            lift_connection(&chart, 0.0, std::f64::consts::FRAC_PI_2),
            Err(GeomError::SingularPoint { .. })
        ));
    }

    #[test]
    fn torus_parallels() {
        let chart = Builtin::Torus { big_r: 2.0, r: 1.0 }.chart().unwrap();
        let s = singular_parallels(&chart).unwrap();
        assert_eq!(s.parallels.len(), 2);
        for (p, expect) in s.parallels.iter().zip([0.5, 1.5]) {
            assert_eq!(p.kind, ParallelKind::Crossing);
            assert!((p.u2 - expect * std::f64::consts::PI).abs() < 1e-10);
        }
    }

    #[test]
    fn tensor_round_trip() {
        let r = LiftCurvature {
            r1212: 1.0,
            r1213: 2.0,
            r1223: 3.0,
            r1313: 4.0,
            r1323: 5.0,
            r2323: 6.0,
        };
        let t = r.tensor();
        assert_eq!(LiftCurvature::from_tensor(&t), r);
        assert_eq!(t[1][0][0][1], -1.0);
        assert_eq!(t[0][2][0][1], 2.0);
    }
}
