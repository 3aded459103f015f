//! Metrics on a coordinate chart and their orthonormal-frame geometry.
//!
//! Index conventions: frame tables are stored as `t[k][i][j]` for the symbol
//! with upper index `k` and lower indices `i j`, so `c[k][i][j]` is `cᵏᵢⱼ`
//! with `[eᵢ, eⱼ] = cᵏᵢⱼ eₖ` and `gamma[k][i][j]` is `Γᵏᵢⱼ` with
//! `∇_{eᵢ} eⱼ = Γᵏᵢⱼ eₖ`. Indices are zero-based in code.

use std::sync::OnceLock;

use thiserror::Error;

use crate::expr::{eval_jet3, Expr, ExprError, Var};
use crate::jet::{BiJet, Scalar};

/// A connection or structure-function table `t[k][i][j]`.
pub type Table<const N: usize> = [[[f64; N]; N]; N];

/// Fully covariant curvature components `r[i][j][k][l]`.
pub type Riemann<const N: usize> = [[[[f64; N]; N]; N]; N];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("metric is degenerate at ({u1}, {u2})")]
    DegenerateMetric { u1: f64, u2: f64 },
    #[error("point ({u1}, {u2}) is outside the chart domain")]
    OutOfDomain { u1: f64, u2: f64 },
    #[error("curvature vanishes at ({u1}, {u2}) (K = {k:e})")]
    SingularPoint { u1: f64, u2: f64, k: f64 },
    #[error("invalid chart: {0}")]
    InvalidChart(String),
}

/// One chart coordinate: an open interval, or a periodic circle `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coordinate {
    pub lo: f64,
    pub hi: f64,
    pub periodic: bool,
}

impl Coordinate {
    pub fn interval(lo: f64, hi: f64) -> Self {
        Coordinate {
            lo,
            hi,
            periodic: false,
        }
    }

    pub fn unbounded() -> Self {
        Coordinate::interval(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn periodic(lo: f64, period: f64) -> Self {
        Coordinate {
            lo,
            hi: lo + period,
            periodic: true,
        }
    }

    pub fn period(&self) -> Option<f64> {
        self.periodic.then(|| self.hi - self.lo)
    }

    pub fn contains(&self, x: f64) -> bool {
        x.is_finite() && (self.periodic || (x > self.lo && x < self.hi))
    }

    /// Canonical representative in `[lo, hi)` for periodic coordinates.
    pub fn wrap(&self, x: f64) -> f64 {
        match self.period() {
            Some(p) => self.lo + (x - self.lo).rem_euclid(p),
            None => x,
        }
    }

    /// Number of whole periods between `x` and its wrapped value.
    pub fn winding(&self, x: f64) -> i64 {
        match self.period() {
            Some(p) => ((x - self.lo) / p).floor() as i64,
            None => 0,
        }
    }

    /// Finite interval used for sampling; infinite ends are clipped to ±10.
    pub fn sample_range(&self) -> (f64, f64) {
        (self.lo.max(-10.0), self.hi.min(10.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Metric {
    /// `g = A(v)² du² + dv²`.
    Revolution { profile: Expr },
    /// `g = g11 du² + 2 g12 du dv + g22 dv²`.
    Coefficients { g11: Expr, g12: Expr, g22: Expr },
    /// Metric induced by `(u, v) ↦ (x, y, z)`.
    Embedding { x: Expr, y: Expr, z: Expr },
}

#[derive(Debug, Clone)]
pub struct SurfaceChart {
    pub name: String,
    pub metric: Metric,
    pub u1: Coordinate,
    pub u2: Coordinate,
    /// Map into ℝ³ used only for drawing.
    pub display: Option<[Expr; 3]>,
    k_scale: OnceLock<f64>,
}

/// Orthonormal-frame data at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramePointData {
    pub point: [f64; 2],
    pub e1: [f64; 2],
    pub e2: [f64; 2],
    pub c112: f64,
    pub c212: f64,
    pub k: f64,
    /// `(e₁K, e₂K)`.
    pub grad_k: [f64; 2],
    pub christoffel: Table<2>,
}

impl FramePointData {
    pub fn structure(&self) -> Table<2> {
        structure_table(self.c112, self.c212)
    }

    /// Coordinate vector of `x¹e₁ + x²e₂`.
    pub fn to_coords(&self, x: [f64; 2]) -> [f64; 2] {
        [
            x[0] * self.e1[0] + x[1] * self.e2[0],
            x[0] * self.e1[1] + x[1] * self.e2[1],
        ]
    }
}

/// Frame components of `J(X)` for `X = x¹e₁ + x²e₂`.
pub fn complex_structure(x: [f64; 2]) -> [f64; 2] {
    [-x[1], x[0]]
}

/// The full `cᵏᵢⱼ` table of a 2D frame from its two independent entries.
pub fn structure_table(c112: f64, c212: f64) -> Table<2> {
    let mut c = [[[0.0; 2]; 2]; 2];
    c[0][0][1] = c112;
    c[0][1][0] = -c112;
    c[1][0][1] = c212;
    c[1][1][0] = -c212;
    c
}

/// Levi-Civita coefficients of an orthonormal frame:
/// `Γᵏᵢⱼ = ½(cᵏᵢⱼ + cʲₖᵢ + cⁱₖⱼ)`.
pub fn christoffel_from_structure<const N: usize>(c: &Table<N>) -> Table<N> {
    let mut g = [[[0.0; N]; N]; N];
    for k in 0..N {
        for i in 0..N {
            for j in 0..N {
                g[k][i][j] = 0.5 * (c[k][i][j] + c[j][k][i] + c[i][k][j]);
            }
        }
    }
    g
}

/// Curvature of a frame connection, `R_{ijkl} = g(R(eᵢ,eⱼ)eₖ, eₗ)` for an
/// orthonormal frame.
///
/// `dgamma[i]` holds the derivative of the connection table along `eᵢ`.
pub fn riemann_from_connection<const N: usize>(
    gamma: &Table<N>,
    c: &Table<N>,
    dgamma: &[Table<N>; N],
) -> Riemann<N> {
    let mut r = [[[[0.0; N]; N]; N]; N];
    for i in 0..N {
        for j in 0..N {
            for k in 0..N {
                for l in 0..N {
                    let mut v = dgamma[i][l][j][k] - dgamma[j][l][i][k];
                    for s in 0..N {
                        v += gamma[l][i][s] * gamma[s][j][k]
                            - gamma[l][j][s] * gamma[s][i][k]
                            - c[s][i][j] * gamma[l][s][k];
                    }
                    r[i][j][k][l] = v;
                }
            }
        }
    }
    r
}

/// Frame fields and structure functions as bivariate jets.
struct JetFrame {
    e1: [BiJet; 2],
    e2: [BiJet; 2],
    c1: BiJet,
    c2: BiJet,
    k: BiJet,
}

fn along(e: &[BiJet; 2], f: BiJet) -> BiJet {
    e[0] * f.partial(0) + e[1] * f.partial(1)
}

fn jet_frame(g11: BiJet, g12: BiJet, g22: BiJet) -> Option<JetFrame> {
    let det = g11 * g22 - g12 * g12;
    if !(g11.value() > 0.0 && det.value() > 0.0) {
        return None;
    }
    // Gram–Schmidt with e₁ ∝ ∂₁ and positive orientation.
    let inv = (g11 * det).sqrt().recip();
    let e1 = [g11.sqrt().recip(), BiJet::constant(0.0)];
    let e2 = [-g12 * inv, g11 * inv];
    let w = [
        along(&e1, e2[0]) - along(&e2, e1[0]),
        along(&e1, e2[1]) - along(&e2, e1[1]),
    ];
    let dot = |a: &[BiJet; 2], b: &[BiJet; 2]| {
        g11 * a[0] * b[0] + g12 * (a[0] * b[1] + a[1] * b[0]) + g22 * a[1] * b[1]
    };
    let c1 = dot(&e1, &w);
    let c2 = dot(&e2, &w);
    let k = along(&e1, c2) - along(&e2, c1) - c1 * c1 - c2 * c2;
    Some(JetFrame { e1, e2, c1, c2, k })
}

impl SurfaceChart {
    /// Builds a chart and checks positive-definiteness on a sample grid.
    pub fn new(
        name: impl Into<String>,
        metric: Metric,
        u1: Coordinate,
        u2: Coordinate,
    ) -> Result<Self, GeomError> {
        for c in [&u1, &u2] {
            if !(c.lo < c.hi) || c.lo.is_nan() || c.hi.is_nan() {
                return Err(GeomError::InvalidChart(format!(
                    "empty coordinate range [{}, {}]",
                    c.lo, c.hi
                )));
            }
            if c.periodic && !(c.hi - c.lo).is_finite() {
                return Err(GeomError::InvalidChart("period must be finite".into()));
            }
        }
        if let Metric::Revolution { profile } = &metric {
            if profile.variables().contains(&Var::U) {
                return Err(GeomError::InvalidChart(
                    "a revolution profile may depend on v only".into(),
                ));
            }
        }
        let chart = SurfaceChart {
            name: name.into(),
            metric,
            u1,
            u2,
            display: None,
            k_scale: OnceLock::new(),
        };
        for (a, b) in chart.sample_grid(12) {
            chart.metric_at(a, b)?;
        }
        Ok(chart)
    }

    pub fn with_display(mut self, map: [Expr; 3]) -> Self {
        self.display = Some(map);
        self
    }

    pub fn is_revolution(&self) -> bool {
        matches!(self.metric, Metric::Revolution { .. })
    }

    pub fn contains(&self, u1: f64, u2: f64) -> bool {
        self.u1.contains(u1) && self.u2.contains(u2)
    }

    /// Interior points of an `n × n` grid over the (clipped) domain.
    pub fn sample_grid(&self, n: usize) -> Vec<(f64, f64)> {
        let (a0, a1) = self.u1.sample_range();
        let (b0, b1) = self.u2.sample_range();
        let mut pts = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let s = (i as f64 + 0.5) / n as f64;
                let t = (j as f64 + 0.5) / n as f64;
                pts.push((a0 + s * (a1 - a0), b0 + t * (b1 - b0)));
            }
        }
        pts
    }

    /// `(g11, g12, g22)` at a point.
    pub fn metric_at(&self, u1: f64, u2: f64) -> Result<[f64; 3], GeomError> {
        let g = match &self.metric {
            Metric::Revolution { profile } => {
                let a = profile.eval_f64(u1, u2)?;
                [a * a, 0.0, 1.0]
            }
            Metric::Coefficients { g11, g12, g22 } => [
                g11.eval_f64(u1, u2)?,
                g12.eval_f64(u1, u2)?,
                g22.eval_f64(u1, u2)?,
            ],
            Metric::Embedding { .. } => {
                let [g11, g12, g22] = self.metric_jets(u1, u2)?;
                [g11.value(), g12.value(), g22.value()]
            }
        };
        if !(g[0] > 0.0 && g[0] * g[2] - g[1] * g[1] > 0.0) {
            return Err(GeomError::DegenerateMetric { u1, u2 });
        }
        Ok(g)
    }

    fn metric_jets(&self, u1: f64, u2: f64) -> Result<[BiJet; 3], GeomError> {
        Ok(match &self.metric {
            Metric::Revolution { profile } => {
                let a = profile.eval_bijet(u1, u2)?;
                [a * a, BiJet::constant(0.0), BiJet::constant(1.0)]
            }
            Metric::Coefficients { g11, g12, g22 } => [
                g11.eval_bijet(u1, u2)?,
                g12.eval_bijet(u1, u2)?,
                g22.eval_bijet(u1, u2)?,
            ],
            Metric::Embedding { x, y, z } => {
                let f = [
                    x.eval_bijet(u1, u2)?,
                    y.eval_bijet(u1, u2)?,
                    z.eval_bijet(u1, u2)?,
                ];
                let du = f.map(|c| c.partial(0));
                let dv = f.map(|c| c.partial(1));
                let dot = |a: &[BiJet; 3], b: &[BiJet; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
                [dot(&du, &du), dot(&du, &dv), dot(&dv, &dv)]
            }
        })
    }

    /// Frame data without the domain check. Used by finite differences that
    /// may step just outside an open domain.
    pub(crate) fn frame_unchecked(&self, u1: f64, u2: f64) -> Result<FramePointData, GeomError> {
        let point = [u1, u2];
        let (e1, e2, c112, c212, k, grad_k) = match &self.metric {
            Metric::Revolution { profile } => {
                let j = eval_jet3(profile, (u1, u2), Var::V)?;
                let (a, a1, a2, a3) = (j.value, j.d1, j.d2, j.d3);
                if !(a > 0.0) {
                    return Err(GeomError::DegenerateMetric { u1, u2 });
                }
                let k = -a2 / a;
                let dk = (-a3 * a + a2 * a1) / (a * a);
                ([1.0 / a, 0.0], [0.0, 1.0], a1 / a, 0.0, k, [0.0, dk])
            }
            Metric::Coefficients { .. } | Metric::Embedding { .. } => {
                // Embedding jets lose one order to the metric, which still
                // leaves K exact to first order.
                let [g11, g12, g22] = self.metric_jets(u1, u2)?;
                let f = jet_frame(g11, g12, g22).ok_or(GeomError::DegenerateMetric { u1, u2 })?;
                let grad = [along(&f.e1, f.k).value(), along(&f.e2, f.k).value()];
                let v = |x: BiJet| x.value();
                (
                    f.e1.map(v),
                    f.e2.map(v),
                    f.c1.value(),
                    f.c2.value(),
                    f.k.value(),
                    grad,
                )
            }
        };
        let christoffel = christoffel_from_structure(&structure_table(c112, c212));
        Ok(FramePointData {
            point,
            e1,
            e2,
            c112,
            c212,
            k,
            grad_k,
            christoffel,
        })
    }

    /// Largest `s` such that `p ± s·dir` stays within the bounds of the
    /// non-periodic coordinates and moves no coordinate by more than one.
    pub fn room(&self, p: [f64; 2], dir: [f64; 2]) -> f64 {
        let mut r = 1.0 / dir[0].abs().max(dir[1].abs());
        for (x, d, c) in [(p[0], dir[0], &self.u1), (p[1], dir[1], &self.u2)] {
            if c.periodic || d == 0.0 {
                continue;
            }
            r = r.min((x - c.lo).min(c.hi - x) / d.abs());
        }
        r.max(0.0)
    }

    /// First difference step along `dir` for quantities that involve `1/K`:
    /// a quarter of the smaller of the boundary room and `|K| / |∇K|`.
    pub fn curvature_step(&self, f: &FramePointData, dir: [f64; 2]) -> f64 {
        let g = f.grad_k[0].abs().max(f.grad_k[1].abs());
        let k_len = if g > 0.0 {
            f.k.abs() / g
        } else {
            f64::INFINITY
        };
        0.25 * self.room(f.point, dir).min(k_len)
    }

    /// `h[i][j] = eᵢ(eⱼK)` from the jets, when they carry K to second order.
    /// Embedding charts lose one order to the metric and return `None`.
    pub fn frame_hessian_k(&self, u1: f64, u2: f64) -> Result<Option<[[f64; 2]; 2]>, GeomError> {
        if let Metric::Embedding { .. } = self.metric {
            return Ok(None);
        }
        let [g11, g12, g22] = self.metric_jets(u1, u2)?;
        let f = jet_frame(g11, g12, g22).ok_or(GeomError::DegenerateMetric { u1, u2 })?;
        let dk = [along(&f.e1, f.k), along(&f.e2, f.k)];
        let e = [f.e1, f.e2];
        Ok(Some(
            [0, 1].map(|i| [0, 1].map(|j| along(&e[i], dk[j]).value())),
        ))
    }

    fn curvature_unchecked(&self, u1: f64, u2: f64) -> Result<f64, GeomError> {
        match &self.metric {
            Metric::Revolution { profile } => {
                let j = eval_jet3(profile, (u1, u2), Var::V)?;
                if !(j.value > 0.0) {
                    return Err(GeomError::DegenerateMetric { u1, u2 });
                }
                Ok(-j.d2 / j.value)
            }
            _ => {
                let [g11, g12, g22] = self.metric_jets(u1, u2)?;
                let f = jet_frame(g11, g12, g22).ok_or(GeomError::DegenerateMetric { u1, u2 })?;
                Ok(f.k.value())
            }
        }
    }

    fn check_domain(&self, u1: f64, u2: f64) -> Result<(), GeomError> {
        if self.contains(u1, u2) {
            Ok(())
        } else {
            Err(GeomError::OutOfDomain { u1, u2 })
        }
    }

    /// Positively oriented orthonormal frame with structure functions,
    /// connection coefficients, curvature and its frame gradient.
    pub fn orthonormal_frame(&self, u1: f64, u2: f64) -> Result<FramePointData, GeomError> {
        self.check_domain(u1, u2)?;
        self.frame_unchecked(u1, u2)
    }

    /// `(c¹₁₂, c²₁₂)`.
    pub fn structure_functions(&self, u1: f64, u2: f64) -> Result<(f64, f64), GeomError> {
        let f = self.orthonormal_frame(u1, u2)?;
        Ok((f.c112, f.c212))
    }

    pub fn curvature(&self, u1: f64, u2: f64) -> Result<f64, GeomError> {
        self.check_domain(u1, u2)?;
        self.curvature_unchecked(u1, u2)
    }

    /// `(e₁K, e₂K)`.
    pub fn grad_curvature(&self, u1: f64, u2: f64) -> Result<[f64; 2], GeomError> {
        Ok(self.orthonormal_frame(u1, u2)?.grad_k)
    }

    /// `max(1, sup |K|)` over a sample grid; computed once per chart.
    pub fn k_scale(&self) -> f64 {
        *self.k_scale.get_or_init(|| {
            self.sample_grid(48)
                .into_iter()
                .filter_map(|(a, b)| self.curvature_unchecked(a, b).ok())
                .map(f64::abs)
                .fold(1.0, f64::max)
        })
    }

    /// Threshold below which `|K|` counts as zero.
    pub fn singular_threshold(&self) -> f64 {
        1e-12 * self.k_scale()
    }

    pub fn is_singular(&self, k: f64) -> bool {
        k.abs() < self.singular_threshold()
    }

    /// Point in ℝ³ for drawing, if the chart has a display map.
    pub fn display_point(&self, u1: f64, u2: f64) -> Option<[f64; 3]> {
        let map = self.display.as_ref()?;
        let x = map[0].eval_f64(u1, u2).ok()?;
        let y = map[1].eval_f64(u1, u2).ok()?;
        let z = map[2].eval_f64(u1, u2).ok()?;
        Some([x, y, z])
    }
}
