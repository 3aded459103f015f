//! Built-in surfaces with known curvature.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use thiserror::Error;

use crate::expr::{parse, Expr};
use crate::geom::{Coordinate, GeomError, Metric, SurfaceChart};

/// Pole exclusion for the ellipsoid chart.
pub const ELLIPSOID_POLE_GAP: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("unknown surface `{0}`")]
    UnknownSurface(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Builtin {
    /// Round sphere of constant curvature `k0`.
    Sphere { k0: f64 },
    /// Flat cylinder `A = 1`.
    Flat,
    /// Torus with centre-line radius `big_r` and tube radius `r`.
    Torus { big_r: f64, r: f64 },
    /// Triaxial ellipsoid with semi-axes `a, b, c`.
    Ellipsoid { a: f64, b: f64, c: f64 },
}

fn expr(src: &str) -> Expr {
    parse(src).unwrap_or_else(|e| panic!("built-in expression `{src}`: {e}"))
}

impl Builtin {
    /// Looks up a surface by name with positional parameters. Missing
    /// parameters fall back to the documented defaults
    /// (sphere 1; torus 2, 1; ellipsoid 1, 1.5, 2).
    pub fn from_name(name: &str, params: &[f64]) -> Result<Builtin, CatalogError> {
        let p = |i: usize, default: f64| params.get(i).copied().unwrap_or(default);
        let (surface, arity) = match name {
            "sphere" => (Builtin::Sphere { k0: p(0, 1.0) }, 1),
            "flat" => (Builtin::Flat, 0),
            "torus" => (
                Builtin::Torus {
                    big_r: p(0, 2.0),
                    r: p(1, 1.0),
                },
                2,
            ),
            "ellipsoid" => (
                Builtin::Ellipsoid {
                    a: p(0, 1.0),
                    b: p(1, 1.5),
                    c: p(2, 2.0),
                },
                3,
            ),
            _ => return Err(CatalogError::UnknownSurface(name.to_string())),
        };
        if params.len() > arity {
            return Err(CatalogError::InvalidParams(format!(
                "`{name}` takes at most {arity} parameters, got {}",
                params.len()
            )));
        }
        surface.validate()?;
        Ok(surface)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Builtin::Sphere { .. } => "sphere",
            Builtin::Flat => "flat",
            Builtin::Torus { .. } => "torus",
            Builtin::Ellipsoid { .. } => "ellipsoid",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            Builtin::Sphere { k0 } => vec![k0],
            Builtin::Flat => vec![],
            Builtin::Torus { big_r, r } => vec![big_r, r],
            Builtin::Ellipsoid { a, b, c } => vec![a, b, c],
        }
    }

    fn validate(&self) -> Result<(), CatalogError> {
        let positive = |xs: &[f64]| xs.iter().all(|x| x.is_finite() && *x > 0.0);
        let ok = match *self {
            Builtin::Sphere { k0 } => positive(&[k0]),
            Builtin::Flat => true,
            Builtin::Torus { big_r, r } => positive(&[big_r, r]) && big_r > r,
            Builtin::Ellipsoid { a, b, c } => positive(&[a, b, c]),
        };
        if ok {
            Ok(())
        } else {
            let hint = match self {
                Builtin::Torus { .. } => "torus needs R > r > 0",
                _ => "radii and axes must be positive and finite",
            };
            Err(CatalogError::InvalidParams(format!(
                "{}: {hint}",
                self.label()
            )))
        }
    }

    /// Human-readable name with parameters, e.g. `torus(2, 1)`.
    pub fn label(&self) -> String {
        let ps: Vec<String> = self.params().iter().map(|p| p.to_string()).collect();
        format!("{}({})", self.name(), ps.join(", "))
    }

    pub fn chart(&self) -> Result<SurfaceChart, CatalogError> {
        self.validate()?;
        let chart = match *self {
            Builtin::Sphere { k0 } => {
                let s = k0.sqrt();
                let a = format!("sin({s} * v) / {s}");
                SurfaceChart::new(
                    self.label(),
                    Metric::Revolution { profile: expr(&a) },
                    Coordinate::periodic(0.0, TAU),
                    Coordinate::interval(0.0, PI / s),
                )?
                .with_display([
                    expr(&format!("{a} * cos(u)")),
                    expr(&format!("{a} * sin(u)")),
                    expr(&format!("-cos({s} * v) / {s}")),
                ])
            }
            Builtin::Flat => SurfaceChart::new(
                self.label(),
                Metric::Revolution { profile: expr("1") },
                Coordinate::unbounded(),
                Coordinate::unbounded(),
            )?
            .with_display([expr("u"), expr("v"), expr("0")]),
            Builtin::Torus { big_r, r } => {
                let a = format!("{big_r} + {r} * cos(v / {r})");
                SurfaceChart::new(
                    self.label(),
                    Metric::Revolution { profile: expr(&a) },
                    Coordinate::periodic(0.0, TAU),
                    Coordinate::periodic(0.0, TAU * r),
                )?
                .with_display([
                    expr(&format!("({a}) * cos(u)")),
                    expr(&format!("({a}) * sin(u)")),
                    expr(&format!("{r} * sin(v / {r})")),
                ])
            }
            Builtin::Ellipsoid { a, b, c } => {
                let map = [
                    expr(&format!("{a} * cos(u) * cos(v)")),
                    expr(&format!("{b} * sin(u) * cos(v)")),
                    expr(&format!("{c} * sin(v)")),
                ];
                let [x, y, z] = map.clone();
                let lim = FRAC_PI_2 - ELLIPSOID_POLE_GAP;
                SurfaceChart::new(
                    self.label(),
                    Metric::Embedding { x, y, z },
                    Coordinate::periodic(0.0, TAU),
                    Coordinate::interval(-lim, lim),
                )?
                .with_display(map)
            }
        };
        Ok(chart)
    }

    /// Curvature from the classical closed forms.
    pub fn analytic_curvature(&self, u1: f64, u2: f64) -> f64 {
        match *self {
            Builtin::Sphere { k0 } => k0,
            Builtin::Flat => 0.0,
            Builtin::Torus { big_r, r } => {
                let c = (u2 / r).cos();
                c / (r * (big_r + r * c))
            }
            Builtin::Ellipsoid { a, b, c } => {
                let x = a * u1.cos() * u2.cos();
                let y = b * u1.sin() * u2.cos();
                let z = c * u2.sin();
                let s = x * x / a.powi(4) + y * y / b.powi(4) + z * z / c.powi(4);
                1.0 / (a * a * b * b * c * c * s * s)
            }
        }
    }

    /// Parallels `u2 = const` on which the curvature vanishes.
    pub fn analytic_sigma(&self) -> Vec<f64> {
        match *self {
            Builtin::Torus { r, .. } => vec![FRAC_PI_2 * r, 3.0 * FRAC_PI_2 * r],
            _ => vec![],
        }
    }
}

/// Revolution chart for a user-supplied profile `A(v)`.
pub fn custom_profile(
    name: impl Into<String>,
    profile: Expr,
    u2: Coordinate,
    u1_period: Option<f64>,
) -> Result<SurfaceChart, CatalogError> {
    let u1 = match u1_period {
        Some(p) if p > 0.0 && p.is_finite() => Coordinate::periodic(0.0, p),
        Some(p) => return Err(CatalogError::InvalidParams(format!("u1 period {p}"))),
        None => Coordinate::unbounded(),
    };
    Ok(SurfaceChart::new(
        name,
        Metric::Revolution { profile },
        u1,
        u2,
    )?)
}

/// Point of minimal curvature: best point of an `n × n` grid refined by a
/// shrinking compass search.
pub fn min_curvature_point(chart: &SurfaceChart, n: usize) -> Result<(f64, f64, f64), GeomError> {
    let mut best = (f64::NAN, f64::NAN, f64::INFINITY);
    for (a, b) in chart.sample_grid(n) {
        let k = chart.curvature(a, b)?;
        if k < best.2 {
            best = (a, b, k);
        }
    }
    let (a0, a1) = chart.u1.sample_range();
    let (b0, b1) = chart.u2.sample_range();
    let mut step = [(a1 - a0) / n as f64, (b1 - b0) / n as f64];
    while step[0].max(step[1]) > 1e-11 {
        let mut moved = false;
        for (da, db) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
            let (a, b) = (best.0 + da * step[0], best.1 + db * step[1]);
            if !chart.contains(a, b) {
                continue;
            }
            let k = chart.curvature(a, b)?;
            if k < best.2 {
                best = (a, b, k);
                moved = true;
            }
        }
        if !moved {
            step = [step[0] * 0.5, step[1] * 0.5];
        }
    }
    Ok((chart.u1.wrap(best.0), chart.u2.wrap(best.1), best.2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_params_are_validated() {
        assert!(matches!(
            Builtin::from_name("torus", &[1.0, 2.0]),
            Err(CatalogError::InvalidParams(_))
        ));
        assert!(matches!(
            Builtin::from_name("sphere", &[-1.0]),
            Err(CatalogError::InvalidParams(_))
        ));
        assert!(matches!(
            Builtin::from_name("klein", &[]),
            Err(CatalogError::UnknownSurface(_))
        ));
    }

    #[test]
    fn torus_curvature_on_outer_equator() {
        let t = Builtin::Torus { big_r: 2.0, r: 1.0 };
        let chart = t.chart().unwrap();
        assert!((chart.curvature(0.0, 0.0).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        assert!(chart.curvature(0.0, FRAC_PI_2).unwrap().abs() < 1e-15);
    }

    #[test]
    fn ellipsoid_minimum() {
        let e = Builtin::Ellipsoid {
            a: 1.0,
            b: 1.5,
            c: 2.0,
        };
        let chart = e.chart().unwrap();
        let (u, v, k) = min_curvature_point(&chart, 60).unwrap();
        assert!((k - 1.0 / 9.0).abs() < 1e-9, "K = {k}");
        assert!(v.abs() < 1e-4);
        assert!(u.abs() < 1e-4 || (u - PI).abs() < 1e-4 || (u - TAU).abs() < 1e-4);
    }
}
