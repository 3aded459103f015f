//! One run of each mode.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use wagner_core::catalog::min_curvature_point;
use wagner_core::geom::SurfaceChart;
use wagner_core::lift::{self, singular_parallels, ParallelKind};
use wagner_core::ode::{
    integrate_lifted, integrate_projected, lift_solution, CrossingKind, LiftedState, OdeError,
    ProjectedState, Trajectory,
};
use wagner_core::oracle;
use wagner_core::revolution::{
    first_integrals, forbidden_region, graph_quadrature, RevolutionError, RevolutionProfile,
};

use crate::contour::Grid;
use crate::error::CliError;
use crate::output::{emit, json as to_json, suffixed, table_csv, trajectory_csv};
use crate::runspec::{InitSpec, Mode, RunSpec};
use crate::svg::{self, Curve, Figure, Overlay};

/// Time span used when none is given.
const DEFAULT_T_SPAN: [f64; 2] = [0.0, 50.0];
/// Step cap of the lift-solution mode, where the dense output of the
/// projected solution is integrated.
const LIFT_SOLUTION_H_MAX: f64 = 0.02;
/// Grid resolution of curvature contours.
const CONTOUR_GRID: usize = 240;

/// Paths in a run are relative to `base` (the run file's directory, or the
/// working directory for flags).
pub struct Run<'a> {
    pub spec: &'a RunSpec,
    pub base: &'a Path,
}

impl Run<'_> {
    fn path(&self, p: &Option<PathBuf>) -> Option<PathBuf> {
        p.as_ref().map(|p| self.base.join(p))
    }

    pub fn execute(&self) -> Result<(), CliError> {
        let mode = self
            .spec
            .mode
            .ok_or_else(|| CliError::config("missing mode"))?;
        let surface = self
            .spec
            .surface
            .as_ref()
            .ok_or_else(|| CliError::config("missing --surface"))?;
        let chart = surface.definition(self.base)?.chart()?;
        log::info!("{mode:?} on {}", chart.name);
        match mode {
            Mode::Project => self.project(&chart),
            Mode::Lift => self.lift(&chart),
            Mode::LiftSolution => self.lift_solution(&chart),
            Mode::Invariants => self.invariants(&chart),
            Mode::Region => self.region(&chart),
            Mode::Quadrature => self.quadrature(&chart),
            Mode::Tables => self.tables(&chart),
        }
    }

    fn start(&self, chart: &SurfaceChart) -> Result<(InitSpec, f64, f64), CliError> {
        let init = self.spec.init()?;
        let (u1, u2) = match init.at.as_deref() {
            Some("min-k") => {
                let (u1, u2, k) = min_curvature_point(chart, 60)?;
                log::info!("minimal curvature {k} at ({u1}, {u2})");
                (u1, u2)
            }
            Some(other) => {
                return Err(CliError::config(format!(
                    "init: unknown point `{other}` (expected min-k)"
                )))
            }
            None => (
                init.u1.unwrap_or(0.0),
                init.u2
                    .ok_or_else(|| CliError::config("init: missing u2"))?,
            ),
        };
        if !chart.contains(u1, u2) {
            return Err(CliError::config(format!(
                "initial point ({u1}, {u2}) is outside the chart"
            )));
        }
        Ok((init, u1, u2))
    }

    fn projected_start(&self, chart: &SurfaceChart) -> Result<ProjectedState, CliError> {
        let (init, u1, u2) = self.start(chart)?;
        let (q1, q2) = init.velocity()?;
        Ok(ProjectedState { u1, u2, q1, q2 })
    }

    fn write_svg(
        &self,
        chart: &SurfaceChart,
        title: String,
        curves: Vec<Curve>,
        mut overlay: Overlay,
    ) -> Result<(), CliError> {
        let Some(path) = self.path(&self.spec.svg) else {
            return Ok(());
        };
        if overlay.parallels.is_empty() && chart.is_revolution() {
            overlay.parallels = sigma(chart)?;
        }
        let fig = Figure {
            chart,
            title,
            curves,
            overlay,
        };
        emit(Some(&path), &svg::render(&fig))
    }

    fn project(&self, chart: &SurfaceChart) -> Result<(), CliError> {
        let init = self.projected_start(chart)?;
        let mut cs = self.spec.c_values();
        if cs.is_empty() {
            cs.push(0.0);
        }
        let fan = self.spec.fan.unwrap_or(1);
        if fan == 0 {
            return Err(CliError::config("fan needs at least one direction"));
        }
        let out = self.path(&self.spec.out);
        if cs.len() * fan > 1 && out.is_none() {
            return Err(CliError::config(
                "several runs (--C values or --fan) need --out",
            ));
        }
        let speed = init.q1.hypot(init.q2);
        let angle0 = init.q2.atan2(init.q1);
        let cfg = self.spec.integrator_config(DEFAULT_T_SPAN, None)?;
        let mut curves = Vec::new();
        let mut runs = Vec::new();
        for &c in &cs {
            for k in 0..fan {
                let angle = angle0 + TAU * k as f64 / fan as f64;
                let start = if fan == 1 {
                    init
                } else {
                    ProjectedState::from_angle(init.u1, init.u2, angle, speed)
                };
                let traj = integrate_projected(chart, start, c, &cfg)?;
                log::info!(
                    "C = {c}: {} samples, {} crossings",
                    traj.samples.len(),
                    traj.crossings.len()
                );
                let tag = match (cs.len() > 1, fan > 1) {
                    (_, true) => Some(format!("C{c}_d{k}")),
                    (true, false) => Some(format!("C{c}")),
                    (false, false) => None,
                };
                let path = out.as_ref().map(|p| match &tag {
                    Some(tag) => suffixed(p, tag),
                    None => p.clone(),
                });
                emit(path.as_deref(), &trajectory_csv(&traj))?;
                let mut summary = run_summary(&traj, Some(c), path.as_deref());
                summary["angle"] = json!(angle);
                runs.push(summary);
                let label = if fan > 1 {
                    format!("C = {c}, angle {angle:.2}")
                } else {
                    format!("C = {c}")
                };
                curves.push(Curve {
                    label,
                    points: traj.samples.iter().map(|s| s.u()).collect(),
                });
            }
        }
        self.write_svg(
            chart,
            format!("{}: projected solutions", chart.name),
            curves,
            Overlay::default(),
        )?;
        self.write_report(json!({ "surface": chart.name, "mode": "project", "runs": runs }))
    }

    fn write_report(&self, value: Value) -> Result<(), CliError> {
        match self.path(&self.spec.report) {
            Some(p) => emit(Some(&p), &to_json(&value)),
            None => Ok(()),
        }
    }

    fn lifted_start(&self, chart: &SurfaceChart) -> Result<LiftedState, CliError> {
        let (init, u1, u2) = self.start(chart)?;
        let (q1, q2) = init.velocity()?;
        let q3 = match (init.q3, self.spec.c_values().as_slice()) {
            (Some(q3), []) => q3,
            (Some(_), _) => {
                return Err(CliError::config(
                    "give either q3 in --init or --C, not both",
                ))
            }
            (None, _) => self.spec.single_c()? * chart.curvature(u1, u2)?,
        };
        Ok(LiftedState {
            u1,
            u2,
            phi: init.phi.unwrap_or(0.0),
            q1,
            q2,
            q3,
        })
    }

    fn finish_lifted(
        &self,
        chart: &SurfaceChart,
        traj: &Trajectory,
        title: String,
    ) -> Result<(), CliError> {
        let out = self.path(&self.spec.out);
        emit(out.as_deref(), &trajectory_csv(traj))?;
        let curve = Curve {
            label: title.clone(),
            points: traj.samples.iter().map(|s| s.u()).collect(),
        };
        self.write_svg(
            chart,
            format!("{}: {title}", chart.name),
            vec![curve],
            Overlay::default(),
        )?;
        self.write_report(json!({ "surface": chart.name, "runs": [run_summary(traj, traj.kind.c(), out.as_deref())] }))
    }

    fn lift(&self, chart: &SurfaceChart) -> Result<(), CliError> {
        let init = self.lifted_start(chart)?;
        let cfg = self.spec.integrator_config(DEFAULT_T_SPAN, None)?;
        match integrate_lifted(chart, init, &cfg) {
            Ok(traj) => self.finish_lifted(chart, &traj, "lifted geodesic".into()),
            Err(OdeError::SingularApproach { t, partial }) => {
                // Keep what was computed, then report the failure.
                self.finish_lifted(chart, &partial, "lifted geodesic (truncated)".into())?;
                Err(OdeError::SingularApproach { t, partial }.into())
            }
            Err(e) => Err(e.into()),
        }
    }

    fn lift_solution(&self, chart: &SurfaceChart) -> Result<(), CliError> {
        let (init, u1, u2) = self.start(chart)?;
        let (q1, q2) = init.velocity()?;
        let c = self.spec.single_c()?;
        let cfg = self
            .spec
            .integrator_config(DEFAULT_T_SPAN, Some(LIFT_SOLUTION_H_MAX))?;
        let gamma = integrate_projected(chart, ProjectedState { u1, u2, q1, q2 }, c, &cfg)?;
        let traj = lift_solution(chart, &gamma, init.phi.unwrap_or(0.0), c)?;
        self.finish_lifted(chart, &traj, format!("lifted solution, C = {c}"))
    }

    fn invariants(&self, chart: &SurfaceChart) -> Result<(), CliError> {
        let cfg = self.spec.integrator_config([0.0, 100.0], None)?;
        let lifted = self.spec.lifted.unwrap_or(false);
        let (traj, c) = if lifted {
            (
                integrate_lifted(chart, self.lifted_start(chart)?, &cfg)?,
                None,
            )
        } else {
            let c = self.spec.single_c()?;
            (
                integrate_projected(chart, self.projected_start(chart)?, c, &cfg)?,
                Some(c),
            )
        };
        let stat = |xs: &[f64], drift: f64| json!({ "initial": xs.first(), "final": xs.last(), "drift": drift });
        let mut report = json!({
            "surface": chart.name,
            "lifted": lifted,
            "C": c,
            "samples": traj.samples.len(),
            "t_end": traj.samples.last().map(|s| s.t),
        });
        if chart.is_revolution() {
            let profile = RevolutionProfile::from_chart(chart)?;
            let fi = first_integrals(&traj, &profile, c.unwrap_or(f64::NAN))?;
            report["C2"] = stat(&fi.c2, fi.drift_c2);
            report["C3sq"] = stat(&fi.c3sq, fi.drift_c3sq);
            if let (Some(c1), Some(d)) = (&fi.c1, fi.drift_c1) {
                report["C1"] = stat(c1, d);
            }
        } else {
            // Only the energy-type integral exists without a rotation symmetry.
            let c3: Vec<f64> = traj.samples.iter().map(|s| s.c3sq).collect();
            report["C3sq"] = stat(&c3, traj.relative_drift(|s| Some(s.c3sq)).unwrap_or(0.0));
            if lifted {
                let c1: Vec<f64> = traj.samples.iter().filter_map(|s| s.c1).collect();
                report["C1"] = stat(&c1, traj.relative_drift(|s| s.c1).unwrap_or(0.0));
            }
        }
        emit(self.path(&self.spec.out).as_deref(), &to_json(&report))
    }

    fn region(&self, chart: &SurfaceChart) -> Result<(), CliError> {
        let c = self.spec.single_c()?;
        if c == 0.0 || !c.is_finite() {
            return Err(CliError::config("region needs a nonzero C"));
        }
        let init = self.projected_start(chart)?;
        let k0 = chart.curvature(init.u1, init.u2)?;
        let c3sq = init.q1 * init.q1 + init.q2 * init.q2 + c * c * k0 * k0;
        let k_max = c3sq.sqrt() / c.abs();
        let cfg = self.spec.integrator_config(DEFAULT_T_SPAN, None)?;
        let traj = integrate_projected(chart, init, c, &cfg)?;
        let points: Vec<[f64; 2]> = traj.samples.iter().map(|s| s.u()).collect();
        let max_abs_k = traj.samples.iter().map(|s| s.k.abs()).fold(0.0, f64::max);
        let within_bound = max_abs_k <= k_max + 1e-7;

        let mut report = json!({
            "surface": chart.name,
            "C": c,
            "K_max": k_max,
            "C3sq": c3sq,
            "start": { "u1": init.u1, "u2": init.u2, "K": k0 },
        });
        let mut overlay = Overlay::default();
        let contained;
        if chart.is_revolution() {
            let profile = RevolutionProfile::from_chart(chart)?;
            let region = forbidden_region(&profile, init, c)?;
            let in_bands = traj
                .samples
                .iter()
                .all(|s| region.contains(chart.u2.wrap(s.y[1]), 1e-7));
            contained = within_bound && in_bands;
            report["bands"] = region
                .bands
                .iter()
                .map(|&(lo, hi)| json!({ "u2_lo": lo, "u2_hi": hi }))
                .collect();
            let sig = sigma(chart)?;
            report["sigma"] = json!(sig);
            overlay.bands = region.bands.clone();
            overlay.parallels = sig;
        } else {
            let grid = Grid::sample(chart, CONTOUR_GRID, |u, v| {
                chart.curvature(u, v).map(|k| k.abs() - k_max)
            })?;
            let contour = grid.zero_contour();
            let one_piece = grid.same_component(&points);
            contained = within_bound && one_piece;
            report["contour"] = json!(contour);
            report["same_component"] = json!(one_piece);
            overlay.contour = contour;
        }
        report["trajectory"] = json!({
            "samples": traj.samples.len(),
            "t_end": traj.samples.last().map(|s| s.t),
            "max_abs_K": max_abs_k,
            "within_bound": within_bound,
            "contained": contained,
        });
        self.write_svg(
            chart,
            format!("{}: |K| ≤ {k_max:.4} for C = {c}", chart.name),
            vec![Curve {
                label: format!("C = {c}"),
                points,
            }],
            overlay,
        )?;
        emit(self.path(&self.spec.out).as_deref(), &to_json(&report))
    }

    fn quadrature(&self, chart: &SurfaceChart) -> Result<(), CliError> {
        let profile = RevolutionProfile::from_chart(chart)?;
        let c = self.spec.single_c()?;
        let init = self.projected_start(chart)?;
        let j = profile.jet(init.u2)?;
        let c2 = j.a * init.q1 - c * j.a1;
        let c3sq = init.q1 * init.q1 + init.q2 * init.q2 + c * c * j.k() * j.k();
        let span = match self.spec.u2_span {
            Some([a, b]) => (a, b),
            None => match chart.u2.period() {
                Some(p) => (init.u2 - p, init.u2 + p),
                None => {
                    let (lo, hi) = chart.u2.sample_range();
                    let inset = 1e-6 * (hi - lo);
                    (lo + inset, hi - inset)
                }
            },
        };
        let (curve, turning) = match graph_quadrature(
            &profile,
            c,
            c2,
            c3sq,
            span,
            init.u2,
            init.u1,
            init.q2.signum(),
        ) {
            Ok(g) => (g, None),
            Err(RevolutionError::TurningPoint { u2, partial }) => (*partial, Some(u2)),
            Err(e) => return Err(e.into()),
        };
        let rows = (0..curve.u2.len()).map(|i| vec![curve.u2[i], curve.u1[i], curve.slope[i]]);
        emit(
            self.path(&self.spec.out).as_deref(),
            &table_csv("u2,u1,slope", rows),
        )?;

        // The ODE solution up to its first turning point, for comparison.
        let mut cfg = self
            .spec
            .integrator_config(DEFAULT_T_SPAN, Some(LIFT_SOLUTION_H_MAX))?;
        cfg.detect_events = false;
        let traj = integrate_projected(chart, init, c, &cfg)?;
        let s = init.q2.signum();
        let mut gap: f64 = 0.0;
        let mut compared = 0;
        for x in traj.samples.iter().take_while(|x| x.y[4] * s > 0.0) {
            if let Some(u1) = curve.u1_at(x.y[1]) {
                gap = gap.max((u1 - x.y[0]).abs());
                compared += 1;
            }
        }
        let graph: Vec<[f64; 2]> = curve
            .u2
            .iter()
            .zip(&curve.u1)
            .map(|(&v, &u)| [u, v])
            .collect();
        self.write_svg(
            chart,
            format!("{}: graph u1(u2), C = {c}", chart.name),
            vec![
                Curve {
                    label: "quadrature".into(),
                    points: graph,
                },
                Curve {
                    label: "ODE".into(),
                    points: traj.samples.iter().map(|x| x.u()).collect(),
                },
            ],
            Overlay::default(),
        )?;
        self.write_report(json!({
            "surface": chart.name,
            "C": c,
            "C2": c2,
            "C3sq": c3sq,
            "u2_span": [span.0, span.1],
            "turning_point": turning,
            "nodes": curve.u2.len(),
            "ode_samples_compared": compared,
            "ode_max_gap": gap,
        }))
    }

    fn tables(&self, chart: &SurfaceChart) -> Result<(), CliError> {
        let (_, u1, u2) = self.start(chart)?;
        let c_hat = lift::lift_structure_functions(chart, u1, u2)?;
        let gamma_hat = lift::lift_connection(chart, u1, u2)?;
        let r_hat = lift::lift_curvature(chart, u1, u2)?;
        let deltas = oracle::table_deltas(chart, u1, u2)?;
        let r: serde_json::Map<String, Value> = lift::LiftCurvature::LABELS
            .iter()
            .zip(r_hat.as_array())
            .map(|(l, x)| (l.to_string(), json!(x)))
            .collect();
        let report = json!({
            "surface": chart.name,
            "u1": u1,
            "u2": u2,
            "K": chart.curvature(u1, u2)?,
            "c_hat": c_hat,
            "gamma_hat": gamma_hat,
            "r_hat": r,
            "oracle_deltas": {
                "c_hat": deltas.c_hat,
                "gamma_hat": deltas.gamma_hat,
                "gamma_hat_from_exact_c": deltas.gamma_hat_from_exact_c,
                "r_hat": deltas.r_hat,
            },
        });
        emit(self.path(&self.spec.out).as_deref(), &to_json(&report))
    }
}

/// Zero parallels of `K` on a revolution chart.
fn sigma(chart: &SurfaceChart) -> Result<Vec<f64>, CliError> {
    Ok(singular_parallels(chart)?
        .parallels
        .iter()
        .filter(|p| matches!(p.kind, ParallelKind::Crossing | ParallelKind::Touching))
        .map(|p| p.u2)
        .collect())
}

#[derive(Serialize)]
struct Crossing {
    t: f64,
    u1: f64,
    u2: f64,
    vertical_speed: f64,
    grazing: bool,
}

fn run_summary(traj: &Trajectory, c: Option<f64>, path: Option<&Path>) -> Value {
    let st = &traj.stats;
    let crossings: Vec<Crossing> = traj
        .crossings
        .iter()
        .map(|e| Crossing {
            t: e.t,
            u1: e.u1,
            u2: e.u2,
            vertical_speed: e.vertical_speed,
            grazing: e.kind == CrossingKind::Grazing,
        })
        .collect();
    json!({
        "C": c,
        "csv": path.map(|p| p.display().to_string()),
        "samples": traj.samples.len(),
        "t_end": traj.samples.last().map(|s| s.t),
        "stats": {
            "steps": st.steps,
            "rejections": st.rejections,
            "rhs_evals": st.rhs_evals,
            "min_step": st.min_step,
            "max_step": st.max_step,
        },
        "crossings": crossings,
        "drift": {
            "C1": traj.relative_drift(|s| s.c1),
            "C2": traj.relative_drift(|s| s.c2),
            "C3sq": traj.relative_drift(|s| Some(s.c3sq)),
        },
    })
}
