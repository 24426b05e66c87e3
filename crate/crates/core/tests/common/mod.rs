//! Random transformation ASTs for round-trip tests.
#![allow(dead_code)]

use mtfix::metamodel::Primitive;
use mtfix::mtl::{
    Binding, Expr, ExprKind, Helper, InPattern, Literal, ModelDecl, OutPattern, QualifiedName, Rule, Transformation,
    TypeExpr, TypeTestKind, COLLECTION_OPS, ITERATOR_OPS, PREDEFINED_OPS,
};
use mtfix::source::Span;
use proptest::prelude::*;
use proptest::sample::select;

const VARS: [&str; 5] = ["a", "b", "x", "elem", "src2"];
const FEATURES: [&str; 6] = ["name", "owner", "items", "kind", "value", "parts"];
// helper names never double as feature names: the printer writes both as `recv.x`
const HELPERS: [&str; 3] = ["allParts", "isRoot", "label"];
const CLASSES: [&str; 4] = ["Node", "Edge", "Graph", "Port"];
const METAMODELS: [&str; 2] = ["Src", "Tgt"];

fn ident(pool: &'static [&'static str]) -> impl Strategy<Value = String> {
    select(pool).prop_map(str::to_string)
}

fn qualified() -> impl Strategy<Value = QualifiedName> {
    (select(&METAMODELS[..]), select(&CLASSES[..])).prop_map(|(m, c)| QualifiedName::new(m, c))
}

fn type_expr() -> impl Strategy<Value = TypeExpr> {
    let leaf = prop_oneof![
        select(&Primitive::ALL[..]).prop_map(TypeExpr::Primitive),
        qualified().prop_map(TypeExpr::Class),
    ];
    (leaf, any::<bool>()).prop_map(|(t, many)| if many { TypeExpr::Sequence(Box::new(t)) } else { t })
}

fn literal() -> impl Strategy<Value = Literal> {
    prop_oneof![
        "[a-zA-Z0-9 ]{0,8}".prop_map(Literal::String),
        (0i64..100_000).prop_map(Literal::Integer),
        any::<bool>().prop_map(Literal::Boolean),
    ]
}

fn boxed(e: Expr) -> Box<Expr> {
    Box::new(e)
}

// literals are never receivers
fn receiver(e: Expr) -> Box<Expr> {
    match e.kind {
        ExprKind::Literal(_) => boxed(Expr::var("a")),
        _ => boxed(e),
    }
}

/// Expressions over `helpers`, which must be declared in the transformation.
pub fn arb_expr(helpers: Vec<String>) -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        2 => ident(&VARS).prop_map(|v| Expr::new(ExprKind::Var(v))),
        1 => literal().prop_map(|l| Expr::new(ExprKind::Literal(l))),
    ];
    leaf.prop_recursive(4, 24, 3, move |inner| {
        let helper = if helpers.is_empty() {
            Just(None).boxed()
        } else {
            select(helpers.clone()).prop_map(Some).boxed()
        };
        prop_oneof![
            (inner.clone(), ident(&FEATURES)).prop_map(|(r, f)| Expr::new(ExprKind::Nav {
                recv: receiver(r),
                feature: f,
            })),
            (inner.clone(), helper).prop_map(|(r, h)| match h {
                Some(helper) => Expr::new(ExprKind::HelperCall { recv: receiver(r), helper }),
                None => Expr::new(ExprKind::Nav {
                    recv: receiver(r),
                    feature: "name".into(),
                }),
            }),
            (inner.clone(), select(&PREDEFINED_OPS[..])).prop_map(|(r, op)| Expr::new(ExprKind::OpCall {
                recv: receiver(r),
                op: op.into(),
                args: vec![],
            })),
            (inner.clone(), select(&COLLECTION_OPS[..]), prop::collection::vec(inner.clone(), 0..2)).prop_map(
                |(r, op, args)| Expr::new(ExprKind::CollectionOp {
                    recv: receiver(r),
                    op: op.into(),
                    args,
                })
            ),
            (inner.clone(), select(&ITERATOR_OPS[..]), ident(&VARS), inner.clone()).prop_map(|(r, op, v, b)| {
                Expr::new(ExprKind::Iterate {
                    recv: receiver(r),
                    op: op.into(),
                    var: v,
                    body: boxed(b),
                })
            }),
            (inner.clone(), any::<bool>(), qualified()).prop_map(|(r, kind, ty)| Expr::new(ExprKind::TypeTest {
                recv: receiver(r),
                test: if kind { TypeTestKind::IsKindOf } else { TypeTestKind::AsType },
                ty,
            })),
            prop::collection::vec(inner, 0..3).prop_map(|v| Expr::new(ExprKind::Sequence(v))),
        ]
    })
}

fn binding(helpers: Vec<String>) -> impl Strategy<Value = Binding> {
    (ident(&FEATURES), arb_expr(helpers)).prop_map(|(feature, value)| Binding {
        feature,
        value,
        span: Span::default(),
    })
}

fn rule(name: String, helpers: Vec<String>) -> impl Strategy<Value = Rule> {
    let outputs = prop::collection::vec((qualified(), prop::collection::vec(binding(helpers.clone()), 0..4)), 1..3);
    (
        ident(&VARS),
        qualified(),
        prop::option::of(arb_expr(helpers)),
        outputs,
    )
        .prop_map(move |(var, class, guard, outs)| Rule {
            name: name.clone(),
            input: InPattern {
                var,
                class,
                guard,
                span: Span::default(),
            },
            outputs: outs
                .into_iter()
                .enumerate()
                .map(|(i, (class, bindings))| OutPattern {
                    var: format!("out{i}"),
                    class,
                    bindings,
                    span: Span::default(),
                })
                .collect(),
            span: Span::default(),
        })
}

/// Well-formed transformations: every helper call names a declared helper,
/// identifiers avoid keywords, and helper names never collide with features.
pub fn arb_transformation() -> impl Strategy<Value = Transformation> {
    (0..=HELPERS.len(), 1usize..4).prop_flat_map(|(nh, nr)| {
        let names: Vec<String> = HELPERS[..nh].iter().map(|s| s.to_string()).collect();
        let helpers = names
            .iter()
            .map(|n| {
                let n = n.clone();
                (qualified(), type_expr(), arb_expr(names.clone())).prop_map(move |(context, ty, body)| Helper {
                    context,
                    name: n.clone(),
                    ty,
                    body,
                    span: Span::default(),
                })
            })
            .collect::<Vec<_>>();
        let rules = (0..nr).map(|i| rule(format!("rule{i}"), names.clone())).collect::<Vec<_>>();
        (helpers, rules).prop_map(|(helpers, rules)| Transformation {
            name: "generated".into(),
            target: ModelDecl {
                alias: "OUT".into(),
                metamodel: "Tgt".into(),
            },
            source: ModelDecl {
                alias: "IN".into(),
                metamodel: "Src".into(),
            },
            helpers,
            rules,
        })
    })
}
