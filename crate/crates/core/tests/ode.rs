mod common;

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use common::{
    great_circle, lift_mismatch, lifted_init, loglog_slope, min_abs_k, projected, rng, sample_init,
    sphere, torus,
};
use proptest::prelude::*;
use rand::Rng;
use wagner_core::catalog::custom_profile;
use wagner_core::expr::parse;
use wagner_core::geom::Coordinate;
use wagner_core::ode::{
    integrate_lifted, integrate_projected, lift_solution, CrossingKind, IntegratorConfig,
    LiftedState, Method, OdeError, ProjectedState,
};

fn cfg(t_end: f64, h_max: f64) -> IntegratorConfig {
    let mut c = IntegratorConfig::default().with_t_span(0.0, t_end);
    c.h_max = h_max;
    c
}

#[test]
fn lifted_geodesics_project_to_solutions_on_the_sphere() {
    let s = sphere(1.0);
    let mut r = rng(21);
    for c in [0.5, 1.0, 3.0] {
        for _ in 0..20 {
            let (p, gamma) = sample_init(&s, &mut r, c, 20.0, |g| {
                g.samples.iter().all(|x| x.y[1] > 0.3 && x.y[1] < PI - 0.3)
            });
            let d = lift_mismatch(&s, p, &gamma, c, 20.0);
            assert!(d < 1e-6, "sphere C = {c} from {p:?}: {d:e}");
        }
    }
}

#[test]
fn lifted_geodesics_project_to_solutions_on_the_torus() {
    let t = torus();
    let mut r = rng(22);
    for c in [0.5, 1.0, 3.0] {
        for _ in 0..20 {
            let (p, gamma) = sample_init(&t, &mut r, c, 20.0, |g| min_abs_k(g) > 0.02);
            let d = lift_mismatch(&t, p, &gamma, c, 20.0);
            assert!(d < 1e-6, "torus C = {c} from {p:?}: {d:e}");
        }
    }
}

#[test]
fn lifted_first_integrals_are_conserved() {
    let t = torus();
    let mut r = rng(23);
    let mut done = 0;
    while done < 6 {
        let c = [0.5, 1.0, 3.0][done % 3];
        let p = ProjectedState::from_angle(
            r.random_range(0.0..TAU),
            r.random_range(-1.0..1.0),
            r.random_range(0.0..TAU),
            1.0,
        );
        let init = lifted_init(&t, p, 0.0, c);
        let tr = match integrate_lifted(
            &t,
            init,
            &IntegratorConfig::default().with_t_span(0.0, 100.0),
        ) {
            Ok(tr) => tr,
            Err(OdeError::SingularApproach { .. }) => continue,
            Err(e) => panic!("{e}"),
        };
        let c1 = tr.relative_drift(|s| s.c1).unwrap();
        let c2 = tr.relative_drift(|s| s.c2).unwrap();
        let c3 = tr.relative_drift(|s| Some(s.c3sq)).unwrap();
        assert!(c1 < 1e-7, "C1 drift {c1:e}");
        assert!(c2 < 1e-7, "C2 drift {c2:e}");
        assert!(c3 < 1e-9, "C3² drift {c3:e}");
        assert!((tr.samples[0].c1.unwrap() - c).abs() < 1e-14);
        done += 1;
    }
}

#[test]
fn projected_first_integrals_are_conserved() {
    let t = torus();
    let mut r = rng(24);
    for c in [0.0, 1.0, 3.0] {
        for _ in 0..3 {
            let p = common::random_torus_init(&mut r);
            let tr = integrate_projected(
                &t,
                p,
                c,
                &IntegratorConfig::default().with_t_span(0.0, 100.0),
            )
            .unwrap();
            let c2 = tr.relative_drift(|s| s.c2).unwrap();
            let c3 = tr.relative_drift(|s| Some(s.c3sq)).unwrap();
            assert!(c2 < 1e-7 && c3 < 1e-7, "C = {c}: {c2:e} {c3:e}");
        }
    }
}

#[test]
fn zero_fiber_velocity_stays_horizontal() {
    let s = sphere(1.0);
    let p = ProjectedState::from_angle(0.0, 1.0, 0.4, 1.0);
    let init = LiftedState {
        u1: p.u1,
        u2: p.u2,
        phi: 0.0,
        q1: p.q1,
        q2: p.q2,
        q3: 0.0,
    };
    let lifted = integrate_lifted(&s, init, &cfg(3.0, 0.02)).unwrap();
    let base = projected(&s, p, 0.0, 3.0, 0.02);
    for x in &lifted.samples {
        assert!(x.y[5].abs() < 1e-9);
        let y = base.state_at(x.t).unwrap();
        assert!((y[0] - x.y[0]).abs() < 1e-8 && (y[1] - x.y[1]).abs() < 1e-8);
    }
}

#[test]
fn rk4_is_fourth_order_on_a_great_circle() {
    let s = sphere(1.0);
    let theta = 0.7;
    let t_end = 2.0;
    let (u_ex, v_ex) = great_circle(theta, t_end);
    let mut hs = Vec::new();
    let mut errs = Vec::new();
    for k in 4..=9 {
        let h = 2f64.powi(-k);
        let mut c = IntegratorConfig::default().with_t_span(0.0, t_end);
        c.method = Method::Rk4;
        c.h_init = h;
        let tr = integrate_projected(
            &s,
            ProjectedState::from_angle(0.0, FRAC_PI_2, theta, 1.0),
            0.0,
            &c,
        )
        .unwrap();
        let end = tr.samples.last().unwrap();
        assert_eq!(end.t, t_end);
        hs.push(h);
        errs.push((end.y[0] - u_ex).abs().max((end.y[1] - v_ex).abs()));
    }
    let order = loglog_slope(&hs, &errs);
    assert!((order - 4.0).abs() < 0.2, "order {order}, errors {errs:?}");
}

#[test]
fn adaptive_great_circle_matches_closed_form() {
    let s = sphere(1.0);
    let tr = integrate_projected(
        &s,
        ProjectedState::from_angle(0.0, FRAC_PI_2, 0.7, 1.0),
        0.0,
        &cfg(3.0, 0.5),
    )
    .unwrap();
    for x in &tr.samples {
        let (u, v) = great_circle(0.7, x.t);
        assert!(
            (x.y[0] - u).abs() < 1e-8 && (x.y[1] - v).abs() < 1e-8,
            "t = {}",
            x.t
        );
    }
}

#[test]
fn torus_outer_equator_is_a_geodesic() {
    let t = torus();
    let tr = integrate_projected(
        &t,
        ProjectedState::from_angle(0.0, 0.0, 0.0, 1.0),
        0.0,
        &cfg(30.0, 0.5),
    )
    .unwrap();
    assert!(tr.samples.iter().all(|s| s.y[1].abs() < 1e-8));
    let end = tr.samples.last().unwrap();
    assert!((end.y[0] - 30.0 / 3.0).abs() < 1e-8);
    // With C ≠ 0 the field term curves it away.
    let tr = integrate_projected(
        &t,
        ProjectedState::from_angle(0.0, 0.0, 0.0, 1.0),
        1.0,
        &cfg(30.0, 0.5),
    )
    .unwrap();
    assert!(tr.samples.iter().any(|s| s.y[1].abs() > 0.1));
}

#[test]
fn vertical_geodesic_spins_the_fiber() {
    let t = torus();
    let k = t.curvature(1.0, 0.0).unwrap();
    let init = LiftedState {
        u1: 1.0,
        u2: 0.0,
        phi: 0.0,
        q1: 0.0,
        q2: 0.0,
        q3: 1.0,
    };
    let tr = integrate_lifted(&t, init, &cfg(10.0, 0.5)).unwrap();
    for s in &tr.samples {
        assert_eq!((s.y[0], s.y[1]), (1.0, 0.0));
        assert!((s.y[2] - k * s.t).abs() < 1e-9);
    }
}

#[test]
fn projected_solutions_cross_the_zero_parallels_smoothly() {
    let t = torus();
    let mut r = rng(25);
    let mut n = 0;
    while n < 10 {
        let p = common::random_torus_init(&mut r);
        let tr = integrate_projected(
            &t,
            p,
            1.0,
            &IntegratorConfig::default().with_t_span(0.0, 30.0),
        )
        .unwrap();
        let crossings: Vec<_> = tr
            .crossings
            .iter()
            .filter(|e| e.kind == CrossingKind::Crossing)
            .collect();
        if crossings.is_empty() {
            continue;
        }
        for e in &crossings {
            assert!(
                e.vertical_speed < 1e-8,
                "CK² = {:e} at t = {}",
                e.vertical_speed,
                e.t
            );
            assert!(e.k.abs() < 1e-8);
        }
        assert!(tr.stats.min_step > 1e-6, "min step {:e}", tr.stats.min_step);
        n += 1;
    }
}

#[test]
fn lifted_geodesic_stops_before_the_zero_parallel() {
    let t = torus();
    let init = LiftedState {
        u1: 0.0,
        u2: 1.0,
        phi: 0.0,
        q1: 0.0,
        q2: 1.0,
        q3: 0.1,
    };
    match integrate_lifted(&t, init, &cfg(10.0, 0.5)) {
        Err(OdeError::SingularApproach { t: hit, partial }) => {
            let last = partial.samples.last().unwrap();
            assert!(last.k > 0.0 && last.t <= hit);
            assert!(last.y[1] < FRAC_PI_2);
        }
        other => panic!("expected a singular approach, got {other:?}"),
    }
}

#[test]
fn touching_parallel_is_reported_as_grazing() {
    let chart = custom_profile(
        "graze",
        parse("2 + v^4").unwrap(),
        Coordinate::interval(-1.0, 1.0),
        Some(TAU),
    )
    .unwrap();
    let p = ProjectedState::from_angle(0.0, -0.5, 1.0, 1.0);
    let tr = integrate_projected(&chart, p, 0.0, &cfg(1.5, 0.05)).unwrap();
    assert!(tr.samples.last().unwrap().y[1] > 0.2);
    let grazes: Vec<_> = tr
        .crossings
        .iter()
        .filter(|e| e.kind == CrossingKind::Grazing)
        .collect();
    assert_eq!(grazes.len(), 1, "{:?}", tr.crossings);
    assert!(grazes[0].u2.abs() < 1e-4);
    assert!(tr.crossings.iter().all(|e| e.kind == CrossingKind::Grazing));
}

#[test]
fn invalid_configurations_are_rejected() {
    let s = sphere(1.0);
    let p = ProjectedState::from_angle(0.0, 1.0, 0.0, 1.0);
    let mut c = cfg(1.0, 0.5);
    c.abs_tol = 0.0;
    assert!(matches!(
        integrate_projected(&s, p, 0.0, &c),
        Err(OdeError::InvalidConfig(_))
    ));
    let mut c = cfg(1.0, 0.5);
    c.t_span = (1.0, 0.0);
    assert!(matches!(
        integrate_projected(&s, p, 0.0, &c),
        Err(OdeError::InvalidConfig(_))
    ));
    let gamma = projected(&s, p, 1.0, 1.0, 0.5);
    assert!(matches!(
        lift_solution(&s, &gamma, 0.0, 2.0),
        Err(OdeError::InvalidConfig(_))
    ));
}

#[test]
fn leaving_the_chart_is_an_error() {
    let s = sphere(1.0);
    let p = ProjectedState::from_angle(0.0, 1.0, -FRAC_PI_2, 1.0);
    assert!(matches!(
        integrate_projected(&s, p, 0.0, &cfg(3.0, 0.5)),
        Err(OdeError::LeftDomain { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn speed_integral_is_conserved(
        u in 0.0f64..TAU,
        v in 0.0f64..TAU,
        angle in 0.0f64..TAU,
        c in -3.0f64..3.0,
    ) {
        let t = torus();
        let tr = integrate_projected(&t, ProjectedState::from_angle(u, v, angle, 1.0), c, &cfg(10.0, 0.5)).unwrap();
        let drift = tr.relative_drift(|s| Some(s.c3sq)).unwrap();
        prop_assert!(drift < 1e-8, "drift {:e}", drift);
    }
}
