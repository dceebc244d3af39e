use std::collections::BTreeMap;

use proptest::prelude::*;

use super::*;
use crate::model;

fn bindings(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn eval_str(src: &str, pairs: &[(&str, f64)]) -> std::result::Result<f64, DslError> {
    evaluate(&parse_expr(src).unwrap(), &bindings(pairs))
}

#[test]
fn parses_the_basic_growth_laws() {
    let Parsed::System(spec) = parse("dA = k*A^2").unwrap() else {
        panic!("expected system")
    };
    assert_eq!(spec.variables(), ["A"]);
    assert_eq!(
        spec.equations[0].1,
        Expr::binary(
            BinOp::Mul,
            Expr::name("k"),
            Expr::binary(BinOp::Pow, Expr::name("A"), Expr::num(2.0))
        )
    );

    let spec = parse_system("dA = k*ln(A)*A").unwrap();
    assert_eq!(spec.equations[0].1.names().into_iter().collect::<Vec<_>>(), ["A", "k"]);

    let spec = parse_system("dY = k1*Y*A; dA = k2*Y*A").unwrap();
    assert_eq!(spec.variables(), ["Y", "A"]);
}

#[test]
fn bare_expressions_parse_as_expressions() {
    assert!(matches!(parse("A^1.5").unwrap(), Parsed::Expr(_)));
    assert!(matches!(parse("-1/(k*t - 1/I)").unwrap(), Parsed::Expr(_)));
}

#[test]
fn evaluation_examples() {
    assert!((eval_str("k*A^2", &[("k", 0.05), ("A", 3.0)]).unwrap() - 0.45).abs() < 1e-15);
    assert_eq!(eval_str("ln(A)*A", &[("A", 1.0)]).unwrap(), 0.0);
    let v = eval_str("-1/(k*t - 1/I)", &[("k", 0.00462), ("I", 100.0), ("t", 1.0)]).unwrap();
    let oracle = model::hyperbolic_solution(0.00462, 100.0, 1.0).unwrap();
    assert!((v - oracle).abs() / oracle < 1e-13, "{v} vs {oracle}");
}

#[test]
fn evaluation_errors_name_their_source() {
    match eval_str("ln(A)", &[("A", -1.0)]) {
        Err(DslError::LogDomain { arg, value }) => {
            assert_eq!(arg, "A");
            assert_eq!(value, -1.0);
        }
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        eval_str("1/(A - 1)", &[("A", 1.0)]),
        Err(DslError::DivisionByZero { .. })
    ));
    assert_eq!(eval_str("k*A", &[("A", 1.0)]), Err(DslError::Unbound("k".into())));
}

#[test]
fn syntax_errors_carry_position_and_token() {
    match parse("dA = k*A^2;\ndB = A * * 2") {
        Err(DslError::Syntax { line, col, token, .. }) => {
            assert_eq!((line, col), (2, 10));
            assert_eq!(token, "*");
        }
        other => panic!("{other:?}"),
    }
    assert!(matches!(parse("(A + 1"), Err(DslError::Syntax { .. })));
    assert!(matches!(parse("A $ 2"), Err(DslError::Syntax { col: 3, .. })));
    assert!(matches!(parse("ln A"), Err(DslError::Syntax { .. })));
    assert!(matches!(parse("--A"), Err(DslError::Syntax { .. })));
    assert!(matches!(parse("1.2.3"), Err(DslError::Syntax { .. })));
    assert!(matches!(parse("dA = A;"), Err(DslError::Syntax { .. })));
    assert!(matches!(parse("d1 = A"), Err(DslError::Syntax { .. })));
}

#[test]
fn duplicate_equations_are_rejected() {
    assert_eq!(parse("dA = A; dA = 2*A"), Err(DslError::DuplicateEquation("A".into())));
}

#[test]
fn unbound_names_fail_at_bind_time() {
    let spec = parse_system("dA = k*A^2").unwrap();
    assert!(matches!(spec.to_field(), Err(DslError::InEquation { .. })));
    assert!(spec.with_parameter("k", 1.0).to_field().is_ok());
}

#[test]
fn missing_initial_values_are_reported() {
    let spec = parse_system("dY = Y*A; dA = Y*A").unwrap().with_initial("Y", 1.0);
    assert_eq!(spec.initial_state(), Err(DslError::MissingInitial("A".into())));
}

#[test]
fn field_reads_the_pre_step_state() {
    let field = parse_system("dE1 = E1*E2*E3; dE2 = E1*E2*E3; dE3 = E1*E2*E3")
        .unwrap()
        .to_field()
        .unwrap();
    let mut rate = [0.0; 3];
    field.eval(&[1.0, 2.0, 3.0], &mut rate).unwrap();
    assert_eq!(rate, [6.0; 3]);
}

#[test]
fn field_errors_mention_the_equation() {
    let field = parse_system("dA = ln(A - 2)").unwrap().to_field().unwrap();
    let err = field.eval(&[1.0], &mut [0.0]).unwrap_err();
    assert!(err.to_string().contains("dA"), "{err}");
    assert!(err.to_string().contains("A - 2"), "{err}");
}

#[test]
fn pretty_printing_uses_minimal_parentheses() {
    let cases = [
        ("k*A^2", "k * A^2.0"),
        ("-A^2", "-A^2.0"),
        ("(-A)^2", "(-A)^2.0"),
        ("a - (b - c)", "a - (b - c)"),
        ("(a - b) - c", "a - b - c"),
        ("a / (b * c)", "a / (b * c)"),
        ("2^3^2", "2.0^3.0^2.0"),
        ("(2^3)^2", "(2.0^3.0)^2.0"),
        ("A^-1", "A^-1.0"),
        ("exp((c + k*t))", "exp(c + k * t)"),
    ];
    for (src, printed) in cases {
        assert_eq!(parse_expr(src).unwrap().to_string(), printed, "{src}");
    }
}

const CORPUS: &[&str] = &[
    "k*A^2",
    "k*ln(A)*A",
    "k1*Y*A",
    "-1/(k*t - 1/I)",
    "exp(exp(c + k*t))",
    "(I^(1-n) - (n-1)*k*t)^(-1/(n-1))",
    "-A^2",
    "(-A)^2",
    "2^3^2",
    "(2^3)^2",
    "A^-0.5",
    "a - b - c",
    "a - (b - c)",
    "a/b/c",
    "a/(b/c)",
    "a*-b",
    "-a*b",
    "-(a + b)",
    "ln(A)^2*A",
    "A*(1 + ln(A))",
    "1e-3*A + 2.5E2",
    "exp(-x)/(1 + exp(-x))",
    "((((A))))",
    "x^y^-z",
    ".5*A",
];

#[test]
fn pretty_print_round_trips_the_corpus() {
    assert!(CORPUS.len() >= 20);
    for src in CORPUS {
        let tree = parse_expr(src).unwrap();
        let again = parse_expr(&tree.to_string()).unwrap();
        assert_eq!(tree, again, "{src} -> {tree}");
    }
}

#[test]
fn system_round_trips_through_printed_rates() {
    let spec = parse_system("dY = k1*Y*A; dA = k2*Y*A").unwrap();
    let text: Vec<String> = spec.equations.iter().map(|(v, e)| format!("d{v} = {e}")).collect();
    assert_eq!(parse_system(&text.join("; ")).unwrap(), spec);
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0u32..1000).prop_map(|n| Expr::Num(n as f64 / 8.0)),
        prop::sample::select(vec!["A", "k", "x_1"]).prop_map(Expr::name),
    ];
    leaf.prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (inner.clone(), prop::sample::select(vec![Func::Ln, Func::Exp]))
                .prop_map(|(e, f)| Expr::Call(f, Box::new(e))),
            (
                inner.clone(),
                inner,
                prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow])
            )
                .prop_map(|(l, r, op)| Expr::binary(op, l, r)),
        ]
    })
}

proptest! {
    #[test]
    fn printed_trees_parse_back_identically(e in arb_expr()) {
        let printed = e.to_string();
        prop_assert_eq!(parse_expr(&printed).unwrap(), e, "{}", printed);
    }

    #[test]
    fn precedence_matches_explicit_grouping(a in 0.1f64..10.0, k in 0.1f64..10.0, b in 0.1f64..3.0) {
        let env = bindings(&[("A", a), ("k", k), ("b", b)]);
        let ev = |s: &str| evaluate(&parse_expr(s).unwrap(), &env).unwrap();
        prop_assert_eq!(ev("k*A^2"), ev("k*(A^2)"));
        prop_assert_eq!(ev("-A^2"), ev("-(A^2)"));
        prop_assert_eq!(ev("A^b^2"), ev("A^(b^2)"));
        prop_assert_eq!(ev("k - A - b"), ev("(k - A) - b"));
        prop_assert_eq!(ev("k / A * b"), ev("(k / A) * b"));
        prop_assert_eq!(ev("-A*k"), ev("(-A)*k"));
    }
}
