use std::sync::Arc;

use proptest::prelude::*;

use opquad::exprc::{compile, parse, Expr, Output, OutputKind, Registry};
use opquad::matfun::ScalarFunction;
use opquad::matrix::FloatMatrix;
use opquad::opmatrix::Orthonormalizer;
use opquad::symfunc::{basis_family, SymFunc, UnitBox};

fn registry(size: usize) -> Registry {
    let o = Orthonormalizer::new(
        basis_family("sum_product_powers", size, 2).unwrap(),
        "sum_product_powers",
        Arc::new(UnitBox::new(2)),
        192,
    )
    .unwrap();
    Registry::new(Arc::new(o))
        .with(1, SymFunc::parse("x*y", 2).unwrap())
        .unwrap()
        .with(2, SymFunc::parse("x+y", 2).unwrap())
        .unwrap()
        .with(3, SymFunc::parse("x^2 + 1/2", 2).unwrap())
        .unwrap()
}

fn matrix(src: &str, reg: &Registry, symmetrize: bool) -> FloatMatrix {
    match compile(&parse(src).unwrap(), reg, symmetrize)
        .unwrap()
        .with_output(OutputKind::Matrix)
        .evaluate()
        .unwrap()
    {
        Output::Matrix(m) => m,
        Output::Scalar(_) => unreachable!(),
    }
}

fn arb_function() -> impl Strategy<Value = ScalarFunction> {
    prop_oneof![
        Just(ScalarFunction::Exp),
        Just(ScalarFunction::Log1p),
        Just(ScalarFunction::Sqrt),
        Just(ScalarFunction::Abs),
        Just(ScalarFunction::Identity),
        (1u32..40).prop_map(|k| ScalarFunction::Power(k as f64 / 4.0)),
    ]
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (1u8..10).prop_map(Expr::Inner),
        (0u32..1000).prop_map(|k| Expr::Const(k as f64 / 8.0)),
    ];
    leaf.prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::mul(a, b)),
            inner.clone().prop_map(Expr::neg),
            (arb_function(), inner).prop_map(|(f, a)| Expr::apply(f, a)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printed_trees_reparse_to_themselves(e in arb_expr()) {
        let text = e.to_string();
        prop_assert_eq!(parse(&text).unwrap(), e, "{}", text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sums_map_to_matrix_sums(a in 1u8..4, b in 1u8..4) {
        let reg = registry(4);
        let whole = matrix(&format!("g{a} + g{b}"), &reg, false);
        let parts = matrix(&format!("g{a}"), &reg, false).add(&matrix(&format!("g{b}"), &reg, false)).unwrap();
        prop_assert_eq!(whole, parts);
    }

    #[test]
    fn symmetrized_products_ignore_reversal(factors in prop::collection::vec((0usize..3, 1u8..4), 2..5)) {
        let reg = registry(4);
        let names = ["exp", "identity", "log1p"];
        let terms: Vec<String> = factors.iter().map(|(f, g)| format!("{}(g{g})", names[*f])).collect();
        let mut reversed = terms.clone();
        reversed.reverse();
        let fwd = matrix(&terms.join(" * "), &reg, true);
        let bwd = matrix(&reversed.join(" * "), &reg, true);
        prop_assert!(fwd.is_symmetric());
        prop_assert_eq!(fwd, bwd);
    }
}

#[test]
fn working_precision_mode_agrees_with_double() {
    let reg = registry(5);
    let plan = compile(&parse("exp(g1) * log1p(g2)").unwrap(), &reg, false).unwrap();
    let lo = plan.evaluate().unwrap();
    let hi = plan.with_mode(opquad::matfun::EvalMode::Working).evaluate().unwrap();
    let d = opquad::scalars::bf_to_f64(lo.as_scalar().unwrap()) - opquad::scalars::bf_to_f64(hi.as_scalar().unwrap());
    assert!(d.abs() < 1e-15);
}
