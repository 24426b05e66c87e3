//! Deterministic post-search refinement.
//!
//! Four heuristics run in a fixed order, rule by rule: binding targets,
//! navigation expressions, source pattern types, then type parameters. A
//! change that raises the error count of the transformation is undone. The
//! sequence repeats until a full pass changes nothing.

mod distance;

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::Serialize;

pub use distance::{closest, edit_distance};

use crate::analyzer::{analyze, Analyzer, Env, InferredType, Origin};
use crate::metamodel::{FeatureDef, Metamodel, Primitive};
use crate::mtl::{Expr, ExprKind, QualifiedName, Rule, Transformation, TypeTestKind};
use crate::source::Pos;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Heuristic {
    TargetOfBinding,
    NavigationExpression,
    SourcePatternType,
    TypeParameter,
}

impl Heuristic {
    pub const ALL: [Heuristic; 4] = [
        Heuristic::TargetOfBinding,
        Heuristic::NavigationExpression,
        Heuristic::SourcePatternType,
        Heuristic::TypeParameter,
    ];

    pub fn number(self) -> usize {
        self as usize + 1
    }

    pub fn name(self) -> &'static str {
        match self {
            Heuristic::TargetOfBinding => "target-of-binding",
            Heuristic::NavigationExpression => "navigation-expression",
            Heuristic::SourcePatternType => "source-pattern-type",
            Heuristic::TypeParameter => "type-parameter",
        }
    }

    fn run(self, ast: &Transformation, src: &Metamodel, tgt: &Metamodel, rule: &str) -> Step {
        match self {
            Heuristic::TargetOfBinding => heuristic_target_of_binding(ast, src, tgt, rule),
            Heuristic::NavigationExpression => heuristic_navigation_expression(ast, src, tgt, rule),
            Heuristic::SourcePatternType => heuristic_source_pattern_type(ast, src, tgt, rule),
            Heuristic::TypeParameter => heuristic_type_parameter(ast, src, tgt, rule),
        }
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "H{} {}", self.number(), self.name())
    }
}

/// One modification made to the transformation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Change {
    pub heuristic: Heuristic,
    pub rule: String,
    pub location: Pos,
    pub before: String,
    pub after: String,
    pub condition: String,
}

/// A heuristic that did not apply, could not decide, or was undone.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Note {
    pub heuristic: Heuristic,
    pub rule: String,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RefinementReport {
    pub changes: Vec<Change>,
    pub notes: Vec<Note>,
}

impl fmt::Display for RefinementReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.changes {
            writeln!(
                f,
                "{} {} at {}: `{}` -> `{}` ({})",
                c.heuristic, c.rule, c.location, c.before, c.after, c.condition
            )?;
        }
        for n in &self.notes {
            writeln!(f, "{} {}: {}", n.heuristic, n.rule, n.message)?;
        }
        Ok(())
    }
}

/// Result of one heuristic on one rule.
#[derive(Clone, Debug)]
pub struct Step {
    pub ast: Transformation,
    pub changes: Vec<Change>,
    pub notes: Vec<Note>,
}

impl Step {
    fn new(ast: &Transformation) -> Self {
        Step {
            ast: ast.clone(),
            changes: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn change(&mut self, h: Heuristic, rule: &str, location: Pos, before: String, after: String, condition: String) {
        self.changes.push(Change {
            heuristic: h,
            rule: rule.to_string(),
            location,
            before,
            after,
            condition,
        });
    }

    fn note(&mut self, h: Heuristic, rule: &str, message: String) {
        self.notes.push(Note {
            heuristic: h,
            rule: rule.to_string(),
            message,
        });
    }
}

const MAX_ROUNDS: usize = 8;

pub fn refine(ast: &Transformation, src: &Metamodel, tgt: &Metamodel) -> (Transformation, RefinementReport) {
    let mut cur = ast.clone();
    let mut report = RefinementReport::default();
    let mut errors = analyze(&cur, src, tgt).len();
    for _ in 0..MAX_ROUNDS {
        let mut changed = false;
        for h in Heuristic::ALL {
            let names: Vec<String> = cur.rules.iter().map(|r| r.name.clone()).collect();
            for rule in names {
                let step = h.run(&cur, src, tgt, &rule);
                if step.changes.is_empty() {
                    push_notes(&mut report, step.notes);
                    continue;
                }
                let after = analyze(&step.ast, src, tgt).len();
                if after > errors {
                    let what: Vec<String> = step.changes.iter().map(|c| format!("`{}` -> `{}`", c.before, c.after)).collect();
                    push_notes(
                        &mut report,
                        vec![Note {
                            heuristic: h,
                            rule: rule.clone(),
                            message: format!("reverted {} ({errors} -> {after} errors)", what.join(", ")),
                        }],
                    );
                    continue;
                }
                cur = step.ast;
                errors = after;
                changed = true;
                report.changes.extend(step.changes);
                push_notes(&mut report, step.notes);
            }
        }
        if !changed {
            break;
        }
    }
    (cur, report)
}

fn push_notes(report: &mut RefinementReport, notes: Vec<Note>) {
    for n in notes {
        if !report.notes.contains(&n) {
            report.notes.push(n);
        }
    }
}

fn target_class<'m>(an: &Analyzer<'m>, q: &QualifiedName) -> Option<String> {
    an.resolve_class(q)
        .filter(|t| t.origin == Origin::Target)
        .and_then(|t| t.class_name().map(str::to_string))
}

fn source_class(an: &Analyzer<'_>, q: &QualifiedName) -> Option<String> {
    an.resolve_class(q)
        .filter(|t| t.origin == Origin::Source)
        .and_then(|t| t.class_name().map(str::to_string))
}

fn is_string_attr(f: &FeatureDef) -> bool {
    f.primitive() == Some(Primitive::String)
}

fn dist_to(name: &str, tail: Option<&str>) -> usize {
    tail.map_or(usize::MAX, |t| edit_distance(name, t))
}

/// Duplicate LHS features are spread over compatible unbound features, and a
/// String attribute bound from a plain navigation is renamed when another
/// String attribute is strictly closer to the navigated name.
pub fn heuristic_target_of_binding(ast: &Transformation, src: &Metamodel, tgt: &Metamodel, rule: &str) -> Step {
    const H: Heuristic = Heuristic::TargetOfBinding;
    let mut step = Step::new(ast);
    let Some(r) = ast.rule(rule) else {
        return step;
    };
    let an = Analyzer::new(ast, src, tgt);
    let env = an.rule_env(r);
    for (e, o) in r.outputs.iter().enumerate() {
        let Some(d) = target_class(&an, &o.class) else {
            continue;
        };
        let Ok(features) = tgt.accessible_features(&d) else {
            continue;
        };
        let rhs: Vec<InferredType> = o.bindings.iter().map(|b| an.infer(&b.value, &env)).collect();
        let tails: Vec<Option<&str>> = o.bindings.iter().map(|b| b.value.tail_name()).collect();
        let mut lhs: Vec<String> = o.bindings.iter().map(|b| b.feature.clone()).collect();
        let compatible = |f: &FeatureDef, t: &InferredType| an.binding_error(f, t).is_none();

        let mut seen = BTreeSet::new();
        let dup_names: Vec<String> = lhs.iter().filter(|n| !seen.insert(n.as_str())).cloned().collect();
        let mut done = HashSet::new();
        for name in dup_names {
            if !done.insert(name.clone()) {
                continue;
            }
            let group: Vec<usize> = (0..lhs.len()).filter(|&i| lhs[i] == name).collect();
            let shared = tgt.feature(&d, &name);
            // a value the shared feature cannot take is never the one kept
            let keep = *group
                .iter()
                .min_by_key(|&&i| (!shared.is_some_and(|f| compatible(f, &rhs[i])), dist_to(&name, tails[i]), i))
                .expect("group has at least two members");
            for &i in group.iter().filter(|&&i| i != keep) {
                let bound: HashSet<&str> = lhs.iter().map(String::as_str).collect();
                let pool: Vec<&str> = features
                    .iter()
                    .filter(|f| !bound.contains(f.name.as_str()) && compatible(f, &rhs[i]))
                    .map(|f| f.name.as_str())
                    .collect();
                match closest(tails[i].unwrap_or(""), pool) {
                    Some(new) => {
                        let new = new.to_string();
                        step.change(
                            H,
                            rule,
                            o.bindings[i].span.start,
                            name.clone(),
                            new.clone(),
                            format!("duplicate target `{name}`; `{new}` is the closest compatible unbound feature"),
                        );
                        lhs[i] = new;
                    }
                    None => step.note(H, rule, format!("no compatible unbound feature for duplicate `{name}` in {d}")),
                }
            }
        }

        for i in 0..lhs.len() {
            let Some(f) = tgt.feature(&d, &lhs[i]) else {
                continue;
            };
            let plain = matches!(o.bindings[i].value.kind, ExprKind::Nav { .. } | ExprKind::HelperCall { .. });
            if !is_string_attr(f) || !plain || rhs[i].primitive_type() != Some(Primitive::String) || !compatible(f, &rhs[i]) {
                continue;
            }
            let tail = tails[i].expect("plain navigations have a tail");
            let bound: HashSet<&str> = lhs.iter().map(String::as_str).collect();
            let pool: Vec<&str> = features
                .iter()
                .filter(|g| is_string_attr(g) && !bound.contains(g.name.as_str()) && compatible(g, &rhs[i]))
                .map(|g| g.name.as_str())
                .collect();
            if let Some(best) = closest(tail, pool) {
                if edit_distance(best, tail) < edit_distance(&lhs[i], tail) {
                    let best = best.to_string();
                    step.change(
                        H,
                        rule,
                        o.bindings[i].span.start,
                        lhs[i].clone(),
                        best.clone(),
                        format!("`{best}` is closer than `{}` to `{tail}`", lhs[i]),
                    );
                    lhs[i] = best;
                }
            }
        }

        let out = &mut step.ast.rule_mut(rule).expect("rule exists").outputs[e];
        for (b, name) in out.bindings.iter_mut().zip(lhs) {
            b.feature = name;
        }
    }
    step
}

/// A String attribute bound to a value of another type gets `v.f` instead,
/// with `f` the input class's String attribute closest to the LHS name.
pub fn heuristic_navigation_expression(ast: &Transformation, src: &Metamodel, tgt: &Metamodel, rule: &str) -> Step {
    const H: Heuristic = Heuristic::NavigationExpression;
    let mut step = Step::new(ast);
    let Some(r) = ast.rule(rule) else {
        return step;
    };
    let an = Analyzer::new(ast, src, tgt);
    let env = an.rule_env(r);
    let in_class = source_class(&an, &r.input.class);
    for (e, b, binding) in r.bindings() {
        let Some(d) = target_class(&an, &r.outputs[e].class) else {
            continue;
        };
        let Some(f) = tgt.feature(&d, &binding.feature) else {
            continue;
        };
        let rhs = an.infer(&binding.value, &env);
        if !is_string_attr(f) || rhs.is_unknown() || an.binding_error(f, &rhs).is_none() {
            continue;
        }
        let Some(c) = &in_class else {
            step.note(H, rule, format!("input class unknown, cannot rewrite `{}`", binding.feature));
            continue;
        };
        let pool: Vec<&str> = src
            .accessible_features(c)
            .unwrap_or_default()
            .into_iter()
            .filter(|g| is_string_attr(g) && (f.many || !g.many))
            .map(|g| g.name.as_str())
            .collect();
        let Some(best) = closest(&binding.feature, pool) else {
            step.note(H, rule, format!("{c} has no String attribute for `{}`", binding.feature));
            continue;
        };
        let mut value = Expr::nav(Expr::var(&r.input.var), best);
        value.respan(binding.value.span);
        step.change(
            H,
            rule,
            binding.value.span.start,
            binding.value.to_string(),
            value.to_string(),
            format!("`{}` expects String, found {rhs}", binding.feature),
        );
        step.ast.rule_mut(rule).expect("rule exists").outputs[e].bindings[b].value = value;
    }
    step
}

/// Every binding whose LHS reference has exactly `class` as its type, as
/// `(rule, inferred RHS type)`.
fn referring_to<'a>(an: &Analyzer<'a>, class: &str) -> Vec<(&'a Rule, InferredType)> {
    let mut out = Vec::new();
    for r in &an.ast.rules {
        let env = an.rule_env(r);
        for (e, _, b) in r.bindings() {
            let Some(d) = target_class(an, &r.outputs[e].class) else {
                continue;
            };
            if let Some(f) = an.tgt.feature(&d, &b.feature) {
                if f.is_reference() && f.type_name == class {
                    out.push((r, an.infer(&b.value, &env)));
                }
            }
        }
    }
    out
}

fn source_element_class(t: &InferredType) -> Option<String> {
    (t.origin == Origin::Source).then(|| t.class_name().map(str::to_string)).flatten()
}

/// Aligns a rule's pattern types with the bindings that need it: when the
/// rule is the only one creating class C, the bindings whose reference type
/// is C agree on a source class K, and the from class is unrelated to K, the
/// from class becomes K. The mirrored check fixes an output class from the
/// bindings whose RHS is exactly the from class.
pub fn heuristic_source_pattern_type(ast: &Transformation, src: &Metamodel, tgt: &Metamodel, rule: &str) -> Step {
    const H: Heuristic = Heuristic::SourcePatternType;
    let mut step = Step::new(ast);
    let Some(r) = ast.rule(rule) else {
        return step;
    };
    let an = Analyzer::new(ast, src, tgt);
    let from = source_class(&an, &r.input.class);

    for o in &r.outputs {
        let Some(c) = target_class(&an, &o.class) else {
            continue;
        };
        let creators = ast
            .rules
            .iter()
            .filter(|x| x.outputs.iter().any(|y| target_class(&an, &y.class).as_deref() == Some(c.as_str())))
            .count();
        if creators != 1 {
            step.note(H, rule, format!("{c} is created by {creators} rules"));
            continue;
        }
        let refs = referring_to(&an, &c);
        let ks: BTreeSet<String> = refs.iter().filter_map(|(_, t)| source_element_class(t)).collect();
        if ks.len() != 1 {
            let msg = if ks.is_empty() {
                format!("no binding refers to {c} with a source value")
            } else {
                format!("bindings referring to {c} disagree: {}", ks.into_iter().collect::<Vec<_>>().join(", "))
            };
            step.note(H, rule, msg);
            continue;
        }
        let k = ks.into_iter().next().expect("one class");
        let related = from.as_deref().is_some_and(|f| src.conforms(&k, f) || src.conforms(f, &k));
        if related {
            continue;
        }
        let new = QualifiedName {
            metamodel: ast.source.metamodel.clone(),
            class: k.clone(),
            span: r.input.class.span,
        };
        step.change(
            H,
            rule,
            r.input.class.span.start,
            r.input.class.to_string(),
            new.to_string(),
            format!("bindings referring to {c} supply {k}"),
        );
        step.ast.rule_mut(rule).expect("rule exists").input.class = new;
        return step;
    }

    let Some(f) = from else {
        return step;
    };
    let owners = ast
        .rules
        .iter()
        .filter(|x| source_class(&an, &x.input.class).as_deref() == Some(f.as_str()))
        .count();
    if owners != 1 || r.outputs.is_empty() {
        return step;
    }
    let mut ds = BTreeSet::new();
    for x in &ast.rules {
        let env = an.rule_env(x);
        for (e, _, b) in x.bindings() {
            let Some(d) = target_class(&an, &x.outputs[e].class) else {
                continue;
            };
            let Some(feat) = tgt.feature(&d, &b.feature) else {
                continue;
            };
            if feat.is_reference() && source_element_class(&an.infer(&b.value, &env)).as_deref() == Some(f.as_str()) {
                ds.insert(feat.type_name.clone());
            }
        }
    }
    if ds.len() != 1 {
        return step;
    }
    let d = ds.into_iter().next().expect("one class");
    let covered = r
        .outputs
        .iter()
        .any(|o| target_class(&an, &o.class).is_some_and(|c| tgt.conforms(&c, &d)));
    if covered || tgt.class(&d).is_none_or(|c| c.is_abstract) {
        return step;
    }
    let o = &r.outputs[0];
    let new = QualifiedName {
        metamodel: ast.target.metamodel.clone(),
        class: d.clone(),
        span: o.class.span,
    };
    step.change(
        H,
        rule,
        o.class.span.start,
        o.class.to_string(),
        new.to_string(),
        format!("bindings carrying {f} expect {d}"),
    );
    step.ast.rule_mut(rule).expect("rule exists").outputs[0].class = new;
    step
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Root {
    Guard,
    Binding(usize, usize),
}

struct TypeTestSite {
    root: Root,
    path: Vec<usize>,
    receiver: InferredType,
    ty: QualifiedName,
    test: TypeTestKind,
    navigated: Option<String>,
}

fn collect_type_tests(an: &Analyzer<'_>, root: &Root, top: &Expr, env: &Env, out: &mut Vec<TypeTestSite>) {
    fn go(
        an: &Analyzer<'_>,
        root: &Root,
        top: &Expr,
        e: &Expr,
        env: &Env,
        path: &mut Vec<usize>,
        out: &mut Vec<TypeTestSite>,
    ) {
        match &e.kind {
            ExprKind::Iterate { recv, var, body, .. } => {
                path.push(0);
                go(an, root, top, recv, env, path, out);
                path.pop();
                let r = an.infer(recv, env);
                let mut inner = env.clone();
                inner.insert(var.clone(), if r.collection { r.element() } else { InferredType::unknown() });
                path.push(1);
                go(an, root, top, body, &inner, path, out);
                path.pop();
                return;
            }
            ExprKind::TypeTest { recv, test, ty } => {
                let navigated = path.split_last().and_then(|(&last, parent)| match &top.at_path(parent)?.kind {
                    ExprKind::Nav { feature, .. } if last == 0 => Some(feature.clone()),
                    _ => None,
                });
                out.push(TypeTestSite {
                    root: root.clone(),
                    path: path.clone(),
                    receiver: an.infer(recv, env),
                    ty: ty.clone(),
                    test: *test,
                    navigated,
                });
            }
            _ => {}
        }
        for (i, c) in e.children().into_iter().enumerate() {
            path.push(i);
            go(an, root, top, c, env, path, out);
            path.pop();
        }
    }
    go(an, root, top, top, env, &mut Vec::new(), out);
}

fn type_tests(an: &Analyzer<'_>, r: &Rule) -> Vec<TypeTestSite> {
    let mut out = Vec::new();
    if let Some(g) = &r.input.guard {
        let mut env = Env::new();
        env.insert(r.input.var.clone(), an.input_type(r));
        collect_type_tests(an, &Root::Guard, g, &env, &mut out);
    }
    let env = an.rule_env(r);
    for (e, b, binding) in r.bindings() {
        collect_type_tests(an, &Root::Binding(e, b), &binding.value, &env, &mut out);
    }
    out
}

/// A type test whose parameter is not a subtype of the receiver's class gets
/// the closest-named strict subclass; after `oclAsType` only subclasses
/// exposing the navigated feature qualify.
pub fn heuristic_type_parameter(ast: &Transformation, src: &Metamodel, tgt: &Metamodel, rule: &str) -> Step {
    const H: Heuristic = Heuristic::TypeParameter;
    let mut step = Step::new(ast);
    if ast.rule(rule).is_none() {
        return step;
    }
    let mut tried = HashSet::new();
    loop {
        let snapshot = step.ast.clone();
        let an = Analyzer::new(&snapshot, src, tgt);
        let r = snapshot.rule(rule).expect("rule exists");
        let next = type_tests(&an, r).into_iter().find(|s| {
            if tried.contains(&(s.root.clone(), s.path.clone())) {
                return false;
            }
            let Some(rc) = s.receiver.class_name() else {
                return false;
            };
            let ok = an.resolve_class(&s.ty).is_some_and(|t| {
                t.origin == s.receiver.origin
                    && an.metamodel(t.origin).is_some_and(|mm| mm.conforms(t.class_name().unwrap_or_default(), rc))
            });
            !ok
        });
        let Some(site) = next else {
            break;
        };
        tried.insert((site.root.clone(), site.path.clone()));
        let rc = site.receiver.class_name().expect("filtered on known class").to_string();
        let (mm, alias) = match site.receiver.origin {
            Origin::Source => (src, &snapshot.source.metamodel),
            Origin::Target => (tgt, &snapshot.target.metamodel),
            Origin::None => continue,
        };
        let exposes = |c: &str| site.navigated.as_deref().is_none_or(|f| mm.feature(c, f).is_some());
        let mut pool: Vec<&str> = mm.strict_subclasses(&rc).into_iter().filter(|c| exposes(c)).collect();
        if pool.is_empty() && exposes(&rc) {
            pool.push(&rc);
        }
        let Some(best) = closest(&site.ty.class, pool) else {
            step.note(
                H,
                rule,
                format!("no subclass of {rc} exposes `{}`", site.navigated.as_deref().unwrap_or_default()),
            );
            continue;
        };
        let new = QualifiedName {
            metamodel: alias.clone(),
            class: best.to_string(),
            span: site.ty.span,
        };
        let why = match site.navigated.as_deref() {
            Some(f) if site.test == TypeTestKind::AsType => format!("subclass of {rc} exposing `{f}`"),
            _ => format!("subclass of {rc} closest to `{}`", site.ty.class),
        };
        step.change(H, rule, site.ty.span.start, site.ty.to_string(), new.to_string(), why);
        let r = step.ast.rule_mut(rule).expect("rule exists");
        let top = match site.root {
            Root::Guard => r.input.guard.as_mut().expect("guard exists"),
            Root::Binding(e, b) => &mut r.outputs[e].bindings[b].value,
        };
        if let Some(ExprKind::TypeTest { ty, .. }) = top.at_path_mut(&site.path).map(|x| &mut x.kind) {
            *ty = new;
        }
    }
    step
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::metamodel::load_metamodel;
    use crate::mtl::{parse_transformation, pretty_print};

    fn uml_problem(text: &str) -> Transformation {
        parse_transformation(text).unwrap()
    }

    #[test]
    fn patched_excerpt_refines_to_original() {
        let (out, report) = refine(&fixtures::patched_excerpt(), &fixtures::uml(), &fixtures::intalio());
        assert_eq!(out, fixtures::original_excerpt());
        assert_eq!(pretty_print(&out), pretty_print(&fixtures::original_excerpt()));
        let hs: Vec<Heuristic> = report.changes.iter().map(|c| c.heuristic).collect();
        assert_eq!(hs, vec![Heuristic::TargetOfBinding, Heuristic::SourcePatternType]);
        assert_eq!(report.changes[0].location.line, 10);
        assert_eq!(report.changes[1].location.line, 15);
        assert!(analyze(&out, &fixtures::uml(), &fixtures::intalio()).is_empty());
    }

    #[test]
    fn fixtures_are_fixed_points() {
        for p in fixtures::problem_names().map(|n| fixtures::problem(n).unwrap()) {
            let (out, report) = refine(&p.transformation, &p.source_mm, &p.target_mm);
            assert_eq!(out, p.transformation, "{}: {report}", p.name);
            assert!(report.changes.is_empty());
        }
        let (once, _) = refine(&fixtures::excerpt(), &fixtures::uml(), &fixtures::intalio());
        let (twice, r2) = refine(&once, &fixtures::uml(), &fixtures::intalio());
        assert_eq!(once, twice);
        assert!(r2.changes.is_empty());
    }

    const DUPLICATE: &str = "module m;\ncreate OUT : Intalio from IN : UML;\n\
        rule r {\n  from a : UML!Activity\n  to d : Intalio!BpmnDiagram (\n\
        name <- a.name,\n      name <- a.documentation\n    )}\n";

    fn with_documentation() -> Metamodel {
        let text = fixtures::UML_AD_MM.replace("attr name : String;", "attr name : String;\n    attr documentation : String;");
        load_metamodel(&text).unwrap()
    }

    #[test]
    fn duplicate_targets_are_spread() {
        let src = with_documentation();
        let ast = uml_problem(DUPLICATE);
        let step = heuristic_target_of_binding(&ast, &src, &fixtures::intalio(), "r");
        let lhs: Vec<&str> = step.ast.rules[0].outputs[0].bindings.iter().map(|b| b.feature.as_str()).collect();
        assert_eq!(lhs, vec!["name", "documentation"]);
        assert_eq!(step.changes.len(), 1);
    }

    #[test]
    fn duplicate_that_fits_the_feature_keeps_it() {
        let p = fixtures::problem("class2table").unwrap();
        let text = pretty_print(&p.transformation).replace("name <- a.name", "nullable <- a.name");
        let ast = uml_problem(&text);
        let step = heuristic_target_of_binding(&ast, &p.source_mm, &p.target_mm, "attribute2column");
        let lhs: Vec<&str> = step.ast.rule("attribute2column").unwrap().outputs[0]
            .bindings
            .iter()
            .map(|b| b.feature.as_str())
            .collect();
        assert_eq!(lhs, vec!["name", "nullable", "type"]);
    }

    #[test]
    fn string_attribute_gets_navigation() {
        let text = "module m;\ncreate OUT : Intalio from IN : UML;\n\
            rule r {\n  from a : UML!Activity\n  to d : Intalio!BpmnDiagram (\n      name <- a.partition\n    )}\n";
        let step = heuristic_navigation_expression(&uml_problem(text), &fixtures::uml(), &fixtures::intalio(), "r");
        assert_eq!(step.ast.rules[0].outputs[0].bindings[0].value.to_string(), "a.name");
    }

    #[test]
    fn shared_to_class_blocks_from_change() {
        let text = "module m;\ncreate OUT : Intalio from IN : UML;\n\
            rule r {\n  from a : UML!Activity\n  to d : Intalio!BpmnDiagram (\n      pools <- a.partition\n    )}\n\
            rule p1 {\n  from x : UML!Comment\n  to p : Intalio!Pool\n  }\n\
            rule p2 {\n  from y : UML!Comment\n  to q : Intalio!Pool\n  }\n";
        let ast = uml_problem(text);
        let step = heuristic_source_pattern_type(&ast, &fixtures::uml(), &fixtures::intalio(), "p1");
        assert!(step.changes.is_empty());
        assert!(step.notes.iter().any(|n| n.message.contains("2 rules")));

        let single = text.replace("rule p2 {\n  from y : UML!Comment\n  to q : Intalio!Pool\n  }\n", "");
        let step = heuristic_source_pattern_type(&uml_problem(&single), &fixtures::uml(), &fixtures::intalio(), "p1");
        assert_eq!(step.ast.rules[1].input.class.class, "ActivityPartition");
    }

    #[test]
    fn type_parameter_becomes_subclass() {
        let text = "module m;\ncreate OUT : Intalio from IN : UML;\n\
            rule r {\n  from a : UML!Activity\n  to d : Intalio!BpmnDiagram (\n\
            name <- a.node->select(e | e.oclIsKindOf(UML!Activity))->size().toString()\n    )}\n";
        let (uml, intalio) = (fixtures::uml(), fixtures::intalio());
        let step = heuristic_type_parameter(&uml_problem(text), &uml, &intalio, "r");
        assert_eq!(step.changes.len(), 1);
        let new = &step.changes[0].after;
        let class = new.strip_prefix("UML!").unwrap();
        assert!(uml.strict_subclasses("ActivityNode").contains(&class), "{new}");
        // closest by name among the subclasses of ActivityNode
        let best = uml
            .strict_subclasses("ActivityNode")
            .into_iter()
            .min_by_key(|c| (edit_distance(c, "Activity"), c.to_string()))
            .unwrap();
        assert_eq!(class, best);
    }

    #[test]
    fn as_type_requires_navigated_feature() {
        let text = "module m;\ncreate OUT : Intalio from IN : UML;\n\
            rule r {\n  from a : UML!Activity\n  to d : Intalio!BpmnDiagram (\n\
            documentation <- a.node->collect(e | e.oclAsType(UML!Activity).Language)->first()\n    )}\n";
        let uml = fixtures::uml();
        let step = heuristic_type_parameter(&uml_problem(text), &uml, &fixtures::intalio(), "r");
        assert_eq!(step.changes.len(), 1);
        let class = step.changes[0].after.strip_prefix("UML!").unwrap().to_string();
        assert!(uml.feature(&class, "Language").is_some());
        assert!(uml.conforms(&class, "ActivityNode"));
    }

    #[test]
    fn regressions_are_reverted() {
        let ast = fixtures::patched_excerpt();
        let (out, report) = refine(&ast, &fixtures::uml(), &fixtures::intalio());
        let before = analyze(&ast, &fixtures::uml(), &fixtures::intalio()).len();
        assert!(analyze(&out, &fixtures::uml(), &fixtures::intalio()).len() <= before);
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("target_of_binding"));
    }
}
