use std::collections::HashSet;

use mtfix::analyzer::{infer_type, BaseType, Env, InferredType, Origin};
use mtfix::metamodel::{load_metamodel, Metamodel, Primitive};
use mtfix::mtl::{parse_transformation, Expr, ExprKind, Literal, QualifiedName, TypeTestKind};
use proptest::prelude::*;

const SMALL: &str = "metamodel M {
  class A { attr name : String; attr n : Integer; ref bs : B many; ref c : C; }
  class B { attr flag : Boolean; ref a : A; }
  class C extends B { attr label : String; }
}";
const OUT: &str = "metamodel T { class Out { attr title : String; } }";
const MODULE: &str = "module m;\ncreate OUT : T from IN : M;\n\
    helper context M!A def : tag\n    : String =\n    self.name;\n";

use InferredType as Ty;

fn s() -> Ty {
    Ty::primitive(Primitive::String)
}
fn i() -> Ty {
    Ty::primitive(Primitive::Integer)
}
fn b() -> Ty {
    Ty::primitive(Primitive::Boolean)
}
fn src(c: &str) -> Ty {
    Ty::class(c, Origin::Source)
}

// feature table with inheritance spelled out
fn feature(class: &str, f: &str) -> Option<Ty> {
    let t = match (class, f) {
        ("A", "name") => s(),
        ("A", "n") => i(),
        ("A", "bs") => src("B").into_collection(),
        ("A", "c") => src("C"),
        ("B" | "C", "flag") => b(),
        ("B" | "C", "a") => src("A"),
        ("C", "label") => s(),
        // the one helper, defined on A
        ("A", "tag") => s(),
        _ => return None,
    };
    Some(t)
}

fn class_of(t: &Ty) -> Option<&str> {
    match &t.base {
        BaseType::Class(c) => Some(c),
        _ => None,
    }
}

fn oracle(e: &Expr, env: &Env) -> Ty {
    let unknown = Ty::unknown;
    match &e.kind {
        ExprKind::Var(v) => env.get(v).cloned().unwrap_or_else(unknown),
        ExprKind::Literal(Literal::String(_)) => s(),
        ExprKind::Literal(Literal::Integer(_)) => i(),
        ExprKind::Literal(Literal::Boolean(_)) => b(),
        ExprKind::Nav { recv, feature: f } | ExprKind::HelperCall { recv, helper: f } => {
            let r = oracle(recv, env);
            if r.collection || r.origin != Origin::Source {
                return unknown();
            }
            class_of(&r).and_then(|c| feature(c, f)).unwrap_or_else(unknown)
        }
        ExprKind::OpCall { recv, op, .. } => {
            let r = oracle(recv, env);
            match (op.as_str(), r.collection, &r.base) {
                (_, _, BaseType::Unknown) | (_, true, _) => unknown(),
                ("toString", _, _) => s(),
                ("size", _, BaseType::Primitive(Primitive::String)) => i(),
                _ => unknown(),
            }
        }
        ExprKind::CollectionOp { recv, op, args } => {
            let r = oracle(recv, env);
            if r.is_unknown() || !r.collection || args.len() != usize::from(op == "includes") {
                return unknown();
            }
            match op.as_str() {
                "flatten" => r,
                "includes" | "isEmpty" => b(),
                "size" => i(),
                "first" => Ty { collection: false, ..r },
                _ => unknown(),
            }
        }
        ExprKind::Iterate { recv, op, var, body } => {
            let r = oracle(recv, env);
            if r.is_unknown() || !r.collection {
                return unknown();
            }
            let mut inner = env.clone();
            inner.insert(var.clone(), Ty { collection: false, ..r.clone() });
            let t = oracle(body, &inner);
            match op.as_str() {
                "collect" if t.is_unknown() => unknown(),
                "collect" => Ty { collection: true, ..t },
                "select" | "reject" => r,
                _ => b(),
            }
        }
        ExprKind::TypeTest { test, ty, .. } => match test {
            TypeTestKind::IsKindOf => b(),
            TypeTestKind::AsType => match (ty.metamodel.as_str(), ty.class.as_str()) {
                ("M", c @ ("A" | "B" | "C")) => src(c),
                ("T", "Out") => Ty::class("Out", Origin::Target),
                _ => unknown(),
            },
        },
        ExprKind::Sequence(items) => {
            let ts: Vec<Ty> = items.iter().map(|x| Ty { collection: false, ..oracle(x, env) }).collect();
            match ts.first() {
                Some(f) if ts.iter().all(|t| t == f) => Ty { collection: true, ..f.clone() },
                _ => Ty { collection: true, ..unknown() },
            }
        }
    }
}

fn wrap(kind: ExprKind) -> Expr {
    Expr::new(kind)
}

fn grow(sub: &[Expr]) -> Vec<Expr> {
    let mut out = Vec::new();
    let bodies = [Expr::var("e"), Expr::nav(Expr::var("e"), "flag"), Expr::nav(Expr::var("e"), "name")];
    for r in sub {
        let rb = || Box::new(r.clone());
        for f in ["name", "n", "bs", "c", "flag", "a", "label"] {
            out.push(Expr::nav(r.clone(), f));
        }
        out.push(wrap(ExprKind::HelperCall { recv: rb(), helper: "tag".into() }));
        for op in ["toString", "size"] {
            out.push(wrap(ExprKind::OpCall { recv: rb(), op: op.into(), args: vec![] }));
        }
        for op in ["flatten", "size", "first", "isEmpty", "includes"] {
            out.push(wrap(ExprKind::CollectionOp { recv: rb(), op: op.into(), args: vec![] }));
        }
        out.push(wrap(ExprKind::CollectionOp {
            recv: rb(),
            op: "includes".into(),
            args: vec![Expr::var("x")],
        }));
        for op in ["collect", "select", "exists"] {
            for body in &bodies {
                out.push(wrap(ExprKind::Iterate {
                    recv: rb(),
                    op: op.into(),
                    var: "e".into(),
                    body: Box::new(body.clone()),
                }));
            }
        }
        for (test, m, c) in [
            (TypeTestKind::IsKindOf, "M", "C"),
            (TypeTestKind::AsType, "M", "C"),
            (TypeTestKind::AsType, "M", "A"),
            (TypeTestKind::AsType, "T", "Out"),
            (TypeTestKind::AsType, "M", "Zed"),
        ] {
            out.push(wrap(ExprKind::TypeTest {
                recv: rb(),
                test,
                ty: QualifiedName::new(m, c),
            }));
        }
    }
    for pair in sub.windows(2).step_by(7) {
        out.push(wrap(ExprKind::Sequence(pair.to_vec())));
    }
    out
}

#[test]
fn inference_matches_table_oracle_up_to_depth_three() {
    let t = parse_transformation(MODULE).unwrap();
    let (mm, out) = (load_metamodel(SMALL).unwrap(), load_metamodel(OUT).unwrap());
    let mut env = Env::new();
    env.insert("x".into(), src("A"));
    env.insert("y".into(), src("B").into_collection());
    env.insert("w".into(), s());

    let mut level: Vec<Expr> = ["x", "y", "w", "nowhere"].into_iter().map(Expr::var).collect();
    level.extend([
        wrap(ExprKind::Literal(Literal::String("s".into()))),
        wrap(ExprKind::Literal(Literal::Integer(1))),
        wrap(ExprKind::Literal(Literal::Boolean(true))),
        wrap(ExprKind::Sequence(vec![])),
    ]);
    let mut all = level.clone();
    for _ in 0..3 {
        level = grow(&level);
        all.extend(level.iter().cloned());
    }
    assert!(all.len() > 100_000, "{}", all.len());
    let mut known = 0;
    for e in &all {
        let got = infer_type(&t, &mm, &out, e, &env);
        assert_eq!(got, oracle(e, &env), "{e}");
        known += usize::from(!got.is_unknown());
    }
    assert!(known * 10 > all.len(), "{known} of {} typed", all.len());
}

fn metamodel_text(parents: &[Vec<usize>], features: &[usize]) -> String {
    let mut text = String::from("metamodel R {\n");
    for (c, ps) in parents.iter().enumerate() {
        text.push_str(&format!("  class C{c}"));
        if !ps.is_empty() {
            let names: Vec<String> = ps.iter().map(|p| format!("C{p}")).collect();
            text.push_str(&format!(" extends {}", names.join(", ")));
        }
        text.push_str(" {\n");
        for k in 0..features[c] {
            if k % 2 == 0 {
                text.push_str(&format!("    attr f{c}_{k} : String;\n"));
            } else {
                text.push_str(&format!("    ref f{c}_{k} : C0 many;\n"));
            }
        }
        text.push_str("  }\n");
    }
    text.push_str("}\n");
    text
}

fn dfs(parents: &[Vec<usize>], features: &[usize], c: usize, out: &mut Vec<String>) {
    out.extend((0..features[c]).map(|k| format!("f{c}_{k}")));
    for &p in &parents[c] {
        dfs(parents, features, p, out);
    }
}

fn ancestors(parents: &[Vec<usize>], c: usize) -> HashSet<usize> {
    let mut seen = HashSet::from([c]);
    let mut stack = vec![c];
    while let Some(x) = stack.pop() {
        for &p in &parents[x] {
            if seen.insert(p) {
                stack.push(p);
            }
        }
    }
    seen
}

fn arb_hierarchy() -> impl Strategy<Value = (Vec<Vec<usize>>, Vec<usize>)> {
    (1usize..9).prop_flat_map(|n| {
        let parents: Vec<_> = (0..n)
            .map(|c| {
                if c == 0 {
                    Just(Vec::new()).boxed()
                } else {
                    proptest::sample::subsequence((0..c).collect::<Vec<_>>(), 0..=c.min(3)).boxed()
                }
            })
            .collect();
        (parents, prop::collection::vec(0usize..4, n))
    })
}

proptest! {
    #[test]
    fn accessible_features_match_dfs_oracle((parents, features) in arb_hierarchy()) {
        let mm: Metamodel = load_metamodel(&metamodel_text(&parents, &features)).unwrap();
        for c in 0..parents.len() {
            let mut want = Vec::new();
            dfs(&parents, &features, c, &mut want);
            let mut seen = HashSet::new();
            want.retain(|n| seen.insert(n.clone()));
            let got: Vec<String> = mm.accessible_features(&format!("C{c}")).unwrap().iter().map(|f| f.name.clone()).collect();
            prop_assert_eq!(got, want);

            let up = ancestors(&parents, c);
            for d in 0..parents.len() {
                prop_assert_eq!(mm.conforms(&format!("C{c}"), &format!("C{d}")), up.contains(&d));
            }
        }
    }
}
