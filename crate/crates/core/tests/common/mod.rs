//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wagner_core::catalog::Builtin;
use wagner_core::expr::{eval_jet3, BinOp, Constant, Expr, Func, Var};
use wagner_core::geom::SurfaceChart;
use wagner_core::ode::{
    integrate_lifted, integrate_projected, lift_solution, IntegratorConfig, IntegratorStats,
    LiftedState, ProjectedState, Sample, Trajectory, TrajectoryKind,
};
use wagner_core::revolution::{
    first_integrals, graph_quadrature, RevolutionError, RevolutionProfile,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn torus() -> SurfaceChart {
    Builtin::Torus { big_r: 2.0, r: 1.0 }.chart().unwrap()
}

pub fn sphere(k0: f64) -> SurfaceChart {
    Builtin::Sphere { k0 }.chart().unwrap()
}

/// `k`-th derivative of `f` at `x` from central differences, extrapolated
/// in `h²` (Neville tableau, step shrinking by 1.4 from `h0`).
/// Returns the estimate and its error estimate.
pub fn richardson(k: usize, f: impl Fn(f64) -> f64, x: f64, h0: f64) -> (f64, f64) {
    let stencil = |h: f64| match k {
        1 => (f(x + h) - f(x - h)) / (2.0 * h),
        2 => (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h),
        3 => {
            (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h)) / (2.0 * h * h * h)
        }
        _ => panic!("order {k} not supported"),
    };
    const CON: f64 = 1.4;
    const N: usize = 12;
    let mut a = [[0.0; N]; N];
    let mut h = h0;
    a[0][0] = stencil(h);
    let mut best = a[0][0];
    let mut err = f64::INFINITY;
    for i in 1..N {
        h /= CON;
        a[0][i] = stencil(h);
        let mut fac = CON * CON;
        for j in 1..=i {
            a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
            fac *= CON * CON;
            let e = (a[j][i] - a[j - 1][i])
                .abs()
                .max((a[j][i] - a[j - 1][i - 1]).abs());
            if e <= err {
                err = e;
                best = a[j][i];
            }
        }
        if (a[i][i] - a[i - 1][i - 1]).abs() >= 2.0 * err {
            break;
        }
    }
    (best, err)
}

/// Mixed partial `∂²f/∂u∂v` by extrapolated central differences.
pub fn mixed_partial(f: impl Fn(f64, f64) -> f64, u: f64, v: f64) -> f64 {
    richardson(1, |uu| richardson(1, |vv| f(uu, vv), v, 0.05).0, u, 0.05).0
}

/// Gaussian curvature from the Brioschi formula, with all metric
/// derivatives taken by finite differences of `(E, F, G)`.
pub fn brioschi(g: impl Fn(f64, f64) -> [f64; 3], u: f64, v: f64) -> f64 {
    let h0 = 0.05;
    let d = |k: usize, axis: usize, ord: usize| -> f64 {
        if axis == 0 {
            richardson(ord, |x| g(x, v)[k], u, h0).0
        } else {
            richardson(ord, |y| g(u, y)[k], v, h0).0
        }
    };
    let [e, f, gg] = g(u, v);
    let (eu, ev) = (d(0, 0, 1), d(0, 1, 1));
    let (fu, fv) = (d(1, 0, 1), d(1, 1, 1));
    let (gu, gv) = (d(2, 0, 1), d(2, 1, 1));
    let evv = d(0, 1, 2);
    let guu = d(2, 0, 2);
    let fuv = mixed_partial(|a, b| g(a, b)[1], u, v);
    let m1 = [
        [-0.5 * evv + fuv - 0.5 * guu, 0.5 * eu, fu - 0.5 * ev],
        [fv - 0.5 * gu, e, f],
        [0.5 * gv, f, gg],
    ];
    let m2 = [
        [0.0, 0.5 * ev, 0.5 * gu],
        [0.5 * ev, e, f],
        [0.5 * gu, f, gg],
    ];
    let det3 = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let w = e * gg - f * f;
    (det3(m1) - det3(m2)) / (w * w)
}

/// Geodesics of `A(v)² du² + dv²` in coordinate form
/// `u'' = −2 (A′/A) u′v′`, `v'' = A A′ u′²`, classical RK4 with step `h`.
/// Returns `(t, u, v, u', v')` at every step.
pub fn coordinate_geodesic(
    a: impl Fn(f64) -> (f64, f64),
    y0: [f64; 4],
    t_end: f64,
    h: f64,
) -> Vec<(f64, [f64; 4])> {
    let rhs = |y: [f64; 4]| {
        let (av, a1) = a(y[1]);
        [
            y[2],
            y[3],
            -2.0 * a1 / av * y[2] * y[3],
            av * a1 * y[2] * y[2],
        ]
    };
    let add = |y: [f64; 4], k: [f64; 4], s: f64| {
        [
            y[0] + s * k[0],
            y[1] + s * k[1],
            y[2] + s * k[2],
            y[3] + s * k[3],
        ]
    };
    let n = (t_end / h).round() as usize;
    let mut out = vec![(0.0, y0)];
    let mut y = y0;
    for i in 0..n {
        let k1 = rhs(y);
        let k2 = rhs(add(y, k1, 0.5 * h));
        let k3 = rhs(add(y, k2, 0.5 * h));
        let k4 = rhs(add(y, k3, h));
        for j in 0..4 {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        out.push(((i + 1) as f64 * h, y));
    }
    out
}

/// Random unit-speed initial data on the torus.
pub fn random_torus_init(r: &mut impl Rng) -> ProjectedState {
    ProjectedState::from_angle(
        r.random_range(0.0..std::f64::consts::TAU),
        r.random_range(0.0..std::f64::consts::TAU),
        r.random_range(0.0..std::f64::consts::TAU),
        1.0,
    )
}

/// Projected solution over `[0, t_end]` with the default tolerances and
/// step cap `h_max`.
pub fn projected(
    chart: &SurfaceChart,
    init: ProjectedState,
    c: f64,
    t_end: f64,
    h_max: f64,
) -> Trajectory {
    let mut cfg = IntegratorConfig::default().with_t_span(0.0, t_end);
    cfg.h_max = h_max;
    integrate_projected(chart, init, c, &cfg).unwrap()
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Random point in the inner 90% of each bounded coordinate with
/// `|K| >= 0.01 K_scale`, the sampling used for the table checks.
pub fn regular_point(chart: &SurfaceChart, r: &mut impl Rng) -> (f64, f64) {
    let range = |c: &wagner_core::geom::Coordinate| {
        let (a, b) = c.sample_range();
        if c.periodic {
            (a, b)
        } else {
            let m = 0.05 * (b - a);
            (a + m, b - m)
        }
    };
    let (a0, a1) = range(&chart.u1);
    let (b0, b1) = range(&chart.u2);
    loop {
        let (u, v) = (r.random_range(a0..a1), r.random_range(b0..b1));
        if chart.curvature(u, v).unwrap().abs() >= 0.01 * chart.k_scale() {
            return (u, v);
        }
    }
}

fn capped(t_end: f64, h_max: f64) -> IntegratorConfig {
    let mut c = IntegratorConfig::default().with_t_span(0.0, t_end);
    c.h_max = h_max;
    c
}

pub fn lifted_init(chart: &SurfaceChart, p: ProjectedState, phi: f64, c: f64) -> LiftedState {
    let k = chart.curvature(p.u1, p.u2).unwrap();
    LiftedState {
        u1: p.u1,
        u2: p.u2,
        phi,
        q1: p.q1,
        q2: p.q2,
        q3: c * k,
    }
}

pub fn min_abs_k(t: &Trajectory) -> f64 {
    t.samples
        .iter()
        .map(|s| s.k.abs())
        .fold(f64::INFINITY, f64::min)
}

/// Random unit-speed data whose projected solution over `[0, t_end]` stays
/// where `keep` holds.
pub fn sample_init(
    chart: &SurfaceChart,
    r: &mut impl Rng,
    c: f64,
    t_end: f64,
    keep: impl Fn(&Trajectory) -> bool,
) -> (ProjectedState, Trajectory) {
    let (a0, a1) = chart.u1.sample_range();
    let (b0, b1) = chart.u2.sample_range();
    loop {
        let p = ProjectedState::from_angle(
            r.random_range(a0..a1),
            r.random_range(b0..b1),
            r.random_range(0.0..TAU),
            1.0,
        );
        let Ok(gamma) = integrate_projected(chart, p, c, &capped(t_end, 0.02)) else {
            continue;
        };
        if keep(&gamma) {
            return (p, gamma);
        }
    }
}

/// Sup-norm distance in `(u1, u2, φ, Q1, Q2, Q3)` between a lifted geodesic
/// and the lift of the projected solution, at the lifted samples.
pub fn lift_mismatch(
    chart: &SurfaceChart,
    p: ProjectedState,
    gamma: &Trajectory,
    c: f64,
    t_end: f64,
) -> f64 {
    let phi0 = 0.3;
    let lifted =
        integrate_lifted(chart, lifted_init(chart, p, phi0, c), &capped(t_end, 0.02)).unwrap();
    let lifted_sol = lift_solution(chart, gamma, phi0, c).unwrap();
    let mut worst: f64 = 0.0;
    for s in &lifted.samples {
        let y = lifted_sol.state_at(s.t).unwrap();
        for i in 0..6 {
            worst = worst.max((y[i] - s.y[i]).abs());
        }
    }
    worst
}

/// Unit-speed motion along the parallel `u2 = v`. Not a solution for the
/// torus parallels away from the equators.
pub fn parallel(p: &RevolutionProfile, v: f64, h: f64, n: usize) -> Trajectory {
    let a = p.jet(v).unwrap().a;
    let samples = (0..=n)
        .map(|i| {
            let t = i as f64 * h;
            Sample {
                t,
                y: [t / a, v, 0.0, 1.0, 0.0, 0.0],
                dy: [1.0 / a, 0.0, 0.0, 0.0, 0.0, 0.0],
                k: p.curvature(v).unwrap(),
                c1: None,
                c2: None,
                c3sq: 1.0,
            }
        })
        .collect();
    Trajectory {
        kind: TrajectoryKind::Projected { c: 1.0 },
        chart: p.name.clone(),
        samples,
        crossings: Vec::new(),
        stats: IntegratorStats::default(),
    }
}

/// Compares the jet of `e` in `wrt` with extrapolated finite differences.
/// Returns `None` when the oracle cannot resolve the derivatives (domain
/// boundary or kink within the stencil).
pub fn jet_vs_fd(e: &Expr, u: f64, v: f64, wrt: Var) -> Option<f64> {
    let jet = eval_jet3(e, (u, v), wrt).ok()?;
    let f = |x: f64| {
        let r = match wrt {
            Var::U => e.eval_f64(x, v),
            Var::V => e.eval_f64(u, x),
        };
        r.unwrap_or(f64::NAN)
    };
    let x = match wrt {
        Var::U => u,
        Var::V => v,
    };
    let mut worst: f64 = 0.0;
    for (k, ad) in [(1, jet.d1), (2, jet.d2), (3, jet.d3)] {
        let (fd, err) = richardson(k, f, x, 0.02);
        let scale = fd.abs().max(1.0);
        if !fd.is_finite() || !(err < 1e-8 * scale) || scale > 1e6 {
            return None;
        }
        worst = worst.max((ad - fd).abs() / scale);
    }
    Some(worst)
}
/// Great circle through `(0, π/2)` leaving at angle `θ` from `e₁`.
pub fn great_circle(theta: f64, t: f64) -> (f64, f64) {
    let x = [t.cos(), t.sin() * theta.cos(), -t.sin() * theta.sin()];
    (x[1].atan2(x[0]), x[2].acos())
}

/// Largest `u1` gap between the quadrature graph and the projected solution
/// on the torus, up to the first turning point in `u2`.
pub fn quadrature_gap(init: ProjectedState, c: f64) -> f64 {
    let t = torus();
    let p = RevolutionProfile::from_chart(&t).unwrap();
    let tr = projected(&t, init, c, 30.0, 0.02);
    let fi = first_integrals(&tr, &p, c).unwrap();
    let s = init.q2.signum();
    let span = (init.u2 - 3.0, init.u2 + 3.0);
    let curve = match graph_quadrature(&p, c, fi.c2[0], fi.c3sq[0], span, init.u2, init.u1, s) {
        Ok(g) => g,
        Err(RevolutionError::TurningPoint { partial, .. }) => *partial,
        Err(e) => panic!("{e}"),
    };
    let mut worst: f64 = 0.0;
    for x in tr.samples.iter().take_while(|x| x.y[4] * s > 0.0) {
        if let Some(u1) = curve.u1_at(x.y[1]) {
            worst = worst.max((u1 - x.y[0]).abs());
        }
    }
    worst
}

/// Random expression tree of depth at most `depth` over `u`, `v`, small
/// literals and the built-in functions.
pub fn random_expr(r: &mut impl Rng, depth: u32) -> Expr {
    if depth == 0 || r.random_bool(0.25) {
        return match r.random_range(0..6) {
            0 => Expr::num((r.random_range(0.0..2.0f64) * 100.0).round() / 100.0),
            1 => Expr::Const(Constant::Pi),
            2 => Expr::Const(Constant::E),
            3 => Expr::var(Var::U),
            _ => Expr::var(Var::V),
        };
    }
    let op = r.random_range(0..8);
    let n = r.random_range(1..4);
    let f = Func::ALL[r.random_range(0..Func::ALL.len())];
    let mut sub = || random_expr(r, depth - 1);
    match op {
        0 => Expr::neg(sub()),
        1 => Expr::binary(BinOp::Add, sub(), sub()),
        2 => Expr::binary(BinOp::Sub, sub(), sub()),
        3 => Expr::binary(BinOp::Mul, sub(), sub()),
        4 => Expr::binary(BinOp::Div, sub(), sub()),
        5 => Expr::binary(BinOp::Pow, sub(), Expr::num(n as f64)),
        6 => Expr::binary(BinOp::Pow, sub(), sub()),
        _ => Expr::call(f, sub()),
    }
}
