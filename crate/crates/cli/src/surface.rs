//! Surface definition files.

use std::path::Path;

use serde::{Deserialize, Serialize};
use wagner_core::catalog::{custom_profile, Builtin};
use wagner_core::expr::{parse, Expr};
use wagner_core::geom::{Coordinate, Metric, SurfaceChart};

use crate::error::CliError;

/// A surface, as stored in a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SurfaceDefinition {
    Builtin {
        name: String,
        #[serde(default)]
        params: Vec<f64>,
    },
    Revolution {
        #[serde(rename = "A")]
        a: String,
        #[serde(default)]
        name: Option<String>,
        #[serde(default)]
        u1_period: Option<f64>,
        #[serde(default)]
        u2_domain: Option<[f64; 2]>,
        #[serde(default)]
        u2_period: Option<f64>,
    },
    Metric {
        g11: String,
        g12: String,
        g22: String,
        #[serde(default)]
        name: Option<String>,
        #[serde(default)]
        u1_period: Option<f64>,
        #[serde(default)]
        u1_domain: Option<[f64; 2]>,
        #[serde(default)]
        u2_domain: Option<[f64; 2]>,
    },
    Embedding {
        x: String,
        y: String,
        z: String,
        #[serde(default)]
        name: Option<String>,
        #[serde(default)]
        u1_period: Option<f64>,
        #[serde(default)]
        u1_domain: Option<[f64; 2]>,
        #[serde(default)]
        u2_domain: Option<[f64; 2]>,
    },
}

fn expr(field: &str, src: &str) -> Result<Expr, CliError> {
    parse(src).map_err(|e| CliError::config(format!("field `{field}`: {e}")))
}

fn coordinate(
    period: Option<f64>,
    domain: Option<[f64; 2]>,
    field: &str,
) -> Result<Coordinate, CliError> {
    match (period, domain) {
        (Some(_), Some(_)) => Err(CliError::config(format!(
            "{field}: give a period or a domain, not both"
        ))),
        (Some(p), None) if p > 0.0 && p.is_finite() => Ok(Coordinate::periodic(0.0, p)),
        (Some(p), None) => Err(CliError::config(format!(
            "{field}: period {p} must be positive"
        ))),
        (None, Some([lo, hi])) if lo < hi => Ok(Coordinate::interval(lo, hi)),
        (None, Some([lo, hi])) => Err(CliError::config(format!(
            "{field}: empty domain [{lo}, {hi}]"
        ))),
        (None, None) => Ok(Coordinate::unbounded()),
    }
}

impl SurfaceDefinition {
    /// Reads a definition from a JSON file, or a built-in given as `name`
    /// or `name(p1, p2, ...)`.
    pub fn resolve(arg: &str) -> Result<Self, CliError> {
        let path = Path::new(arg);
        if path.extension().is_some_and(|e| e == "json") || path.is_file() {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::config(format!("surface file {arg}: {e}")))?;
            return serde_json::from_str(&text)
                .map_err(|e| CliError::config(format!("surface file {arg}: {e}")));
        }
        Self::from_shorthand(arg)
    }

    pub fn from_shorthand(s: &str) -> Result<Self, CliError> {
        let s = s.trim();
        let (name, params) = match s.split_once('(') {
            Some((n, rest)) => {
                let inner = rest
                    .strip_suffix(')')
                    .ok_or_else(|| CliError::config(format!("surface `{s}`: missing `)`")))?;
                let params = inner
                    .split(',')
                    .filter(|p| !p.trim().is_empty())
                    .map(|p| p.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| CliError::config(format!("surface `{s}`: {e}")))?;
                (n.trim(), params)
            }
            None => (s, Vec::new()),
        };
        Ok(SurfaceDefinition::Builtin {
            name: name.to_string(),
            params,
        })
    }

    pub fn chart(&self) -> Result<SurfaceChart, CliError> {
        match self {
            SurfaceDefinition::Builtin { name, params } => {
                Ok(Builtin::from_name(name, params)?.chart()?)
            }
            SurfaceDefinition::Revolution {
                a,
                name,
                u1_period,
                u2_domain,
                u2_period,
            } => {
                let u2 = coordinate(*u2_period, *u2_domain, "u2")?;
                let name = name
                    .clone()
                    .unwrap_or_else(|| format!("revolution(A = {a})"));
                let period = Some(u1_period.unwrap_or(std::f64::consts::TAU));
                Ok(custom_profile(name, expr("A", a)?, u2, period)?)
            }
            SurfaceDefinition::Metric {
                g11,
                g12,
                g22,
                name,
                u1_period,
                u1_domain,
                u2_domain,
            } => {
                let metric = Metric::Coefficients {
                    g11: expr("g11", g11)?,
                    g12: expr("g12", g12)?,
                    g22: expr("g22", g22)?,
                };
                let name = name.clone().unwrap_or_else(|| "metric".to_string());
                Ok(SurfaceChart::new(
                    name,
                    metric,
                    coordinate(*u1_period, *u1_domain, "u1")?,
                    coordinate(None, *u2_domain, "u2")?,
                )?)
            }
            SurfaceDefinition::Embedding {
                x,
                y,
                z,
                name,
                u1_period,
                u1_domain,
                u2_domain,
            } => {
                let map = [expr("x", x)?, expr("y", y)?, expr("z", z)?];
                let [ex, ey, ez] = map.clone();
                let name = name.clone().unwrap_or_else(|| "embedding".to_string());
                Ok(SurfaceChart::new(
                    name,
                    Metric::Embedding {
                        x: ex,
                        y: ey,
                        z: ez,
                    },
                    coordinate(*u1_period, *u1_domain, "u1")?,
                    coordinate(None, *u2_domain, "u2")?,
                )?
                .with_display(map))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shorthand_builtins() {
        assert_eq!(
            SurfaceDefinition::from_shorthand("torus(2, 1)").unwrap(),
            SurfaceDefinition::Builtin {
                name: "torus".into(),
                params: vec![2.0, 1.0]
            }
        );
        assert_eq!(
            SurfaceDefinition::from_shorthand("sphere")
                .unwrap()
                .chart()
                .unwrap()
                .name,
            "sphere(1)"
        );
        assert!(SurfaceDefinition::from_shorthand("torus(2").is_err());
    }

    #[test]
    fn json_revolution() {
        let d: SurfaceDefinition = serde_json::from_str(
            r#"{"kind": "revolution", "A": "2 + cos(v)", "u2_period": 6.283185307179586}"#,
        )
        .unwrap();
        let c = d.chart().unwrap();
        assert!(c.is_revolution() && c.u2.periodic && c.u1.periodic);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let r: Result<SurfaceDefinition, _> =
            serde_json::from_str(r#"{"kind": "builtin", "name": "sphere", "radius": 2}"#);
        assert!(r.is_err());
    }

    #[test]
    fn parse_errors_carry_offsets() {
        let d = SurfaceDefinition::Revolution {
            a: "2 + * v".into(),
            name: None,
            u1_period: None,
            u2_domain: None,
            u2_period: None,
        };
        let e = d.chart().unwrap_err();
        assert!(
            matches!(e, CliError::Config(ref m) if m.contains("byte 4")),
            "{e}"
        );
    }
}
