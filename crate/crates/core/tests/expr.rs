mod common;

use common::jet_vs_fd;
use proptest::prelude::*;
use wagner_core::expr::{eval_jet3, parse, BinOp, Constant, Expr, Func, Var};
use wagner_core::jet::Jet3;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        // Literals are non-negative, as the parser produces them; signs come
        // from `Neg`.
        (0.0f64..2.0).prop_map(|x| Expr::num((x * 100.0).round() / 100.0)),
        Just(Expr::Const(Constant::Pi)),
        Just(Expr::Const(Constant::E)),
        Just(Expr::var(Var::U)),
        Just(Expr::var(Var::V)),
        Just(Expr::var(Var::V)),
    ]
}

fn expression() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Expr::neg),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::binary(BinOp::Add, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::binary(BinOp::Sub, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::binary(BinOp::Mul, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::binary(BinOp::Div, a, b)),
            (inner.clone(), 1u32..4).prop_map(|(a, n)| Expr::binary(
                BinOp::Pow,
                a,
                Expr::num(n as f64)
            )),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::binary(BinOp::Pow, a, b)),
            (inner, 0..Func::ALL.len()).prop_map(|(a, i)| Expr::call(Func::ALL[i], a)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, max_global_rejects: 100_000, ..ProptestConfig::default() })]

    #[test]
    fn derivatives_match_finite_differences(
        e in expression(),
        points in prop::collection::vec((-1.5f64..1.5, -1.5f64..1.5), 20),
    ) {
        let mut checked = 0;
        for &(u, v) in &points {
            for wrt in [Var::U, Var::V] {
                if let Some(err) = jet_vs_fd(&e, u, v, wrt) {
                    prop_assert!(err < 1e-6, "{e} at ({u}, {v}) wrt {wrt:?}: relative error {err:e}");
                    checked += 1;
                }
            }
        }
        prop_assume!(checked > 0);
    }

    #[test]
    fn printing_round_trips(e in expression()) {
        let printed = e.to_string();
        let reparsed = parse(&printed).unwrap();
        prop_assert_eq!(&reparsed, &e, "printed as {}", printed);
        prop_assert_eq!(parse(&reparsed.to_string()).unwrap(), reparsed);
    }

    #[test]
    fn jet_product_obeys_leibniz(
        a in prop::array::uniform4(-3.0f64..3.0),
        b in prop::array::uniform4(-3.0f64..3.0),
    ) {
        let (x, y) = (Jet3::new(a[0], a[1], a[2], a[3]), Jet3::new(b[0], b[1], b[2], b[3]));
        let p = x * y;
        let tol = 1e-12;
        prop_assert!((p.value - a[0] * b[0]).abs() < tol);
        prop_assert!((p.d1 - (a[1] * b[0] + a[0] * b[1])).abs() < tol);
        prop_assert!((p.d2 - (a[2] * b[0] + 2.0 * a[1] * b[1] + a[0] * b[2])).abs() < tol);
        prop_assert!((p.d3 - (a[3] * b[0] + 3.0 * a[2] * b[1] + 3.0 * a[1] * b[2] + a[0] * b[3])).abs() < tol);
    }

    #[test]
    fn bijet_pure_partials_match_jets(e in expression(), u in -1.5f64..1.5, v in -1.5f64..1.5) {
        let (Ok(b), Ok(ju), Ok(jv)) = (e.eval_bijet(u, v), eval_jet3(&e, (u, v), Var::U), eval_jet3(&e, (u, v), Var::V)) else {
            return Ok(());
        };
        for (k, (du, dv)) in [(1, (ju.d1, jv.d1)), (2, (ju.d2, jv.d2)), (3, (ju.d3, jv.d3))] {
            let tol = 1e-9 * du.abs().max(dv.abs()).max(1.0);
            prop_assert!((b.derivative(k, 0) - du).abs() <= tol);
            prop_assert!((b.derivative(0, k) - dv).abs() <= tol);
        }
    }
}

#[test]
fn every_builtin_function_matches_finite_differences() {
    for f in Func::ALL {
        let e = Expr::call(
            f,
            Expr::binary(BinOp::Mul, Expr::num(0.7), Expr::var(Var::V)),
        );
        for i in 0..20 {
            let v = 0.1 + 0.07 * i as f64;
            let err = jet_vs_fd(&e, 0.0, v, Var::V)
                .unwrap_or_else(|| panic!("oracle failed for {f:?} at {v}"));
            assert!(err < 1e-6, "{f:?} at {v}: {err:e}");
        }
    }
}

#[test]
fn exp_times_cos_at_one() {
    let e = parse("exp(v)*cos(v)").unwrap();
    let err = jet_vs_fd(&e, 0.0, 1.0, Var::V).unwrap();
    assert!(err < 1e-6);
}

const CORPUS: [&str; 50] = [
    "sin(v)",
    "2 + 1*cos(v)",
    "-v^2",
    "(-v)^2",
    "v^3",
    "2^3^2",
    "(2^3)^2",
    "1 - 2 - 3",
    "1 - (2 - 3)",
    "8 / 4 / 2",
    "8 / (4 / 2)",
    "u*v + v*u",
    "exp(v)*cos(v)",
    "sqrt(1 + u^2 + v^2)",
    "log(2 + sin(u))",
    "tan(v/2)",
    "sinh(v) - cosh(v)",
    "tanh(u*v)",
    "abs(v - 0.5)",
    "2 + cos(v)",
    "1/sqrt(v)",
    "pi*v",
    "e^v",
    "-(-(v))",
    "--v",
    "-v*u",
    "-(v*u)",
    "(1 + v)*(1 - v)",
    "1.5e-3*v",
    "3.25E+2 - v",
    "0.5*(u + v)^2",
    "cos(u)*cos(v)",
    "sin(u)*cos(v)",
    "2*sin(v)",
    "sin(2*v)/2",
    "v^(1/3)",
    "v^-2",
    "-2^2",
    "(u - v)/(u + v)",
    "exp(-v^2/2)",
    "log(cosh(v))",
    "sqrt(abs(u))",
    "1 + 0.25*cos(4*v)",
    "u^2 + v^2 - 1",
    "((((v))))",
    "pi - e",
    "2*pi*u",
    "cos(v)/(2 + cos(v))",
    "v^2^-1",
    "-u^-v",
];

#[test]
fn corpus_round_trips() {
    for s in CORPUS {
        let e = parse(s).unwrap_or_else(|err| panic!("{s}: {err}"));
        let again = parse(&e.to_string()).unwrap();
        assert_eq!(again, e, "{s} printed as {e}");
    }
}

#[test]
fn unary_minus_is_looser_than_power() {
    assert_eq!(parse("-v^2").unwrap().eval_f64(0.0, 3.0).unwrap(), -9.0);
    assert_eq!(parse("-2^2").unwrap().eval_f64(0.0, 0.0).unwrap(), -4.0);
}
