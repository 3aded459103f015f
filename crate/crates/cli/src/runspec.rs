//! Run specifications: JSON files and command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wagner_core::ode::{IntegratorConfig, Method};

use crate::error::CliError;
use crate::surface::SurfaceDefinition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Project,
    Lift,
    LiftSolution,
    Invariants,
    Region,
    Quadrature,
    Tables,
}

/// Surface given inline or as a file path / built-in shorthand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SurfaceRef {
    Inline(SurfaceDefinition),
    Named(String),
}

impl SurfaceRef {
    pub fn definition(&self, base: &Path) -> Result<SurfaceDefinition, CliError> {
        match self {
            SurfaceRef::Inline(d) => Ok(d.clone()),
            SurfaceRef::Named(s) => {
                let p = base.join(s);
                if p.is_file() {
                    SurfaceDefinition::resolve(&p.to_string_lossy())
                } else {
                    SurfaceDefinition::resolve(s)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn values(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(x) => vec![*x],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// Where a run starts.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSpec {
    pub u1: Option<f64>,
    pub u2: Option<f64>,
    /// Direction against `e₁`.
    pub angle: Option<f64>,
    pub speed: Option<f64>,
    /// Frame components, as an alternative to `angle` and `speed`.
    pub q1: Option<f64>,
    pub q2: Option<f64>,
    pub phi: Option<f64>,
    pub q3: Option<f64>,
    /// `"min-k"` starts at the point of minimal curvature.
    pub at: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitRef {
    Text(String),
    Fields(InitSpec),
}

impl InitSpec {
    /// Parses `key=value` pairs separated by commas.
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let mut out = InitSpec::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| {
                CliError::config(format!("init: expected key=value, got `{part}`"))
            })?;
            let (k, v) = (k.trim(), v.trim());
            if k == "at" {
                out.at = Some(v.to_string());
                continue;
            }
            let x: f64 = v
                .parse()
                .map_err(|_| CliError::config(format!("init: `{k}` is not a number: `{v}`")))?;
            let slot = match k {
                "u1" => &mut out.u1,
                "u2" => &mut out.u2,
                "angle" => &mut out.angle,
                "speed" => &mut out.speed,
                "q1" | "Q1" => &mut out.q1,
                "q2" | "Q2" => &mut out.q2,
                "phi" => &mut out.phi,
                "q3" | "Q3" => &mut out.q3,
                _ => return Err(CliError::config(format!("init: unknown key `{k}`"))),
            };
            *slot = Some(x);
        }
        Ok(out)
    }

    /// Fields of `other` that are set replace those of `self`.
    pub fn overlay(&mut self, other: &InitSpec) {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f.clone(); } )* };
        }
        take!(u1, u2, angle, speed, q1, q2, phi, q3, at);
    }

    /// `(Q1, Q2)` from either the angle form or explicit components.
    pub fn velocity(&self) -> Result<(f64, f64), CliError> {
        match (self.angle, self.q1, self.q2) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => Err(CliError::config(
                "init: give angle/speed or q1/q2, not both",
            )),
            (Some(a), None, None) => {
                let s = self.speed.unwrap_or(1.0);
                Ok((s * a.cos(), s * a.sin()))
            }
            (None, q1, q2) => {
                if self.speed.is_some() {
                    return Err(CliError::config("init: speed needs an angle"));
                }
                Ok((q1.unwrap_or(0.0), q2.unwrap_or(0.0)))
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    pub method: Option<String>,
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub h_init: Option<f64>,
    pub h_min: Option<f64>,
    pub h_max: Option<f64>,
    pub max_steps: Option<usize>,
    pub detect_events: Option<bool>,
}

impl IntegratorSpec {
    pub fn overlay(&mut self, other: &IntegratorSpec) {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f.clone(); } )* };
        }
        take!(
            method,
            abs_tol,
            rel_tol,
            h_init,
            h_min,
            h_max,
            max_steps,
            detect_events
        );
    }
}

/// Everything a run needs. Every field is optional so that a file and the
/// flags can be layered.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub mode: Option<Mode>,
    pub surface: Option<SurfaceRef>,
    #[serde(rename = "C")]
    pub c: Option<OneOrMany>,
    pub init: Option<InitRef>,
    pub t_span: Option<[f64; 2]>,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    pub u2_span: Option<[f64; 2]>,
    /// Integrate the lifted geodesic instead of the projected equation
    /// (invariants mode).
    pub lifted: Option<bool>,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub report: Option<PathBuf>,
    /// Number of directions, equally spaced from the initial one, to
    /// integrate from the initial point (integrate mode).
    pub fan: Option<usize>,
}

impl RunSpec {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("run file {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("run file {}: {e}", path.display())))
    }

    /// `other` wins wherever it sets a value.
    pub fn overlay(mut self, other: RunSpec) -> Result<Self, CliError> {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        let init = match (self.init.take(), other.init.clone()) {
            (Some(a), Some(b)) => {
                let mut a = a.resolve()?;
                a.overlay(&b.resolve()?);
                Some(InitRef::Fields(a))
            }
            (a, b) => b.or(a),
        };
        self.integrator.overlay(&other.integrator);
        take!(mode, surface, c, t_span, u2_span, lifted, out, svg, report, fan);
        self.init = init;
        Ok(self)
    }

    pub fn init(&self) -> Result<InitSpec, CliError> {
        match &self.init {
            Some(i) => i.resolve(),
            None => Err(CliError::config("missing initial state (--init)")),
        }
    }

    pub fn c_values(&self) -> Vec<f64> {
        self.c.as_ref().map(OneOrMany::values).unwrap_or_default()
    }

    /// The single constant `C` of modes that take one.
    pub fn single_c(&self) -> Result<f64, CliError> {
        match self.c_values().as_slice() {
            [c] => Ok(*c),
            [] => Err(CliError::config("missing --C")),
            _ => Err(CliError::config("this mode takes a single --C")),
        }
    }

    /// Integrator settings, with `h_max` defaulting to `default_h_max`.
    pub fn integrator_config(
        &self,
        default_t_span: [f64; 2],
        default_h_max: Option<f64>,
    ) -> Result<IntegratorConfig, CliError> {
        let [t0, t1] = self.t_span.unwrap_or(default_t_span);
        let mut cfg = IntegratorConfig::default().with_t_span(t0, t1);
        let s = &self.integrator;
        if let Some(m) = &s.method {
            cfg.method = match m.to_ascii_lowercase().as_str() {
                "rk4" => Method::Rk4,
                "rkf45" => Method::Rkf45,
                _ => {
                    return Err(CliError::config(format!(
                        "unknown method `{m}` (rk4 or rkf45)"
                    )))
                }
            };
        }
        if let Some(h) = default_h_max {
            cfg.h_max = h;
        }
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(x) = s.$f { cfg.$f = x; } )* };
        }
        set!(
            abs_tol,
            rel_tol,
            h_init,
            h_min,
            h_max,
            max_steps,
            detect_events
        );
        cfg.validate()?;
        Ok(cfg)
    }
}

impl InitRef {
    pub fn resolve(&self) -> Result<InitSpec, CliError> {
        match self {
            InitRef::Text(s) => InitSpec::parse(s),
            InitRef::Fields(f) => Ok(f.clone()),
        }
    }
}

/// Parses `a:b`.
pub fn parse_span(s: &str) -> Result<[f64; 2], String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected `start:end`, got `{s}`"))?;
    let a: f64 = a.trim().parse().map_err(|_| format!("bad number `{a}`"))?;
    let b: f64 = b.trim().parse().map_err(|_| format!("bad number `{b}`"))?;
    Ok([a, b])
}
