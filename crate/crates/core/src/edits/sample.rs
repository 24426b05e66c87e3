//! Random, type-aware generation of edit operations aimed at flagged rules.

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use super::{EditKind, EditOperation, Locator};
use crate::analyzer::{Analyzer, InferredType, Origin, Site, TypeError};
use crate::metamodel::{Metamodel, Primitive};
use crate::mtl::{Expr, ExprKind, Rule, Transformation, TypeExpr, COLLECTION_OPS, ITERATOR_OPS, PREDEFINED_OPS};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SampleError {
    #[error("transformation has no rules to edit")]
    NoRules,
    #[error("no rule `{0}`")]
    UnknownRule(String),
}

/// Probability of restricting a choice to the flagged error's fragment.
const FOCUS: f64 = 0.75;

/// Samples one operation: the kind uniformly, the rule from a random error
/// (any rule when no error names one), the site and value type-aware.
///
/// A kind with no site in the chosen rule still yields an operation; its
/// locator does not resolve, so applying it is a skipped no-op.
pub fn sample_edit<R: Rng + ?Sized>(
    rng: &mut R,
    ast: &Transformation,
    errors: &[TypeError],
    src: &Metamodel,
    tgt: &Metamodel,
) -> Result<EditOperation, SampleError> {
    if ast.rules.is_empty() {
        return Err(SampleError::NoRules);
    }
    let kind = *EditKind::ALL.choose(rng).expect("ten kinds");
    let flagged: Vec<&TypeError> = errors.iter().filter(|e| e.site.rule().is_some()).collect();
    let (rule, focus) = match flagged.choose(rng) {
        Some(e) => (e.site.rule().expect("filtered").to_string(), Some(&e.site)),
        None => (ast.rules.choose(rng).expect("nonempty").name.clone(), None),
    };
    Ok(Sampler {
        an: Analyzer::new(ast, src, tgt),
        rule: ast.rule(&rule).expect("error rules exist in the analyzed AST"),
        focus,
    }
    .sample(rng, kind))
}

/// Samples an operation of a fixed kind on a fixed rule.
pub fn sample_edit_of_kind<R: Rng + ?Sized>(
    rng: &mut R,
    ast: &Transformation,
    errors: &[TypeError],
    src: &Metamodel,
    tgt: &Metamodel,
    kind: EditKind,
    rule: &str,
) -> Result<EditOperation, SampleError> {
    let r = ast.rule(rule).ok_or_else(|| SampleError::UnknownRule(rule.to_string()))?;
    let focus: Vec<&Site> = errors
        .iter()
        .map(|e| &e.site)
        .filter(|s| s.rule() == Some(rule))
        .collect();
    let focus = focus.choose(rng).copied();
    Ok(Sampler {
        an: Analyzer::new(ast, src, tgt),
        rule: r,
        focus,
    }
    .sample(rng, kind))
}

struct Sampler<'a> {
    an: Analyzer<'a>,
    rule: &'a Rule,
    focus: Option<&'a Site>,
}

/// A binding-value node: (element, binding, path).
type ExprSite = (usize, usize, Vec<usize>);

impl<'a> Sampler<'a> {
    fn op(&self, kind: EditKind, locator: Locator, old: String, new: String) -> EditOperation {
        EditOperation {
            kind,
            rule: self.rule.name.clone(),
            locator,
            old,
            new,
        }
    }

    fn dud(&self, kind: EditKind) -> EditOperation {
        let locator = match kind {
            EditKind::CreationOfBinding => Locator::NewBinding { element: usize::MAX },
            EditKind::TypeOfSourcePatternElement => Locator::InPattern,
            EditKind::TypeOfTargetPatternElement => Locator::OutPattern { element: usize::MAX },
            EditKind::TypeOfVariableOrCollection => Locator::HelperType { helper: usize::MAX },
            EditKind::TargetOfBinding => Locator::Binding {
                element: usize::MAX,
                binding: 0,
            },
            _ => Locator::Expr {
                element: usize::MAX,
                binding: 0,
                path: vec![],
            },
        };
        self.op(kind, locator, String::new(), String::new())
    }

    fn focus_element(&self) -> Option<usize> {
        match self.focus? {
            Site::OutPattern { element, .. } | Site::Binding { element, .. } => Some(*element),
            _ => None,
        }
    }

    fn focus_binding(&self) -> Option<(usize, usize)> {
        match self.focus? {
            Site::Binding { element, binding, .. } => Some((*element, *binding)),
            _ => None,
        }
    }

    /// Picks from `all`, preferring items `in_focus` with probability [`FOCUS`].
    fn pick<'v, T, R: Rng + ?Sized>(&self, rng: &mut R, all: &'v [T], in_focus: impl Fn(&T) -> bool) -> Option<&'v T> {
        let focused: Vec<&T> = all.iter().filter(|x| in_focus(x)).collect();
        if !focused.is_empty() && rng.gen_bool(FOCUS) {
            focused.choose(rng).copied()
        } else {
            all.choose(rng)
        }
    }

    /// Picks a name from `preferred` with probability [`FOCUS`], else from `all`.
    fn pick_name<R: Rng + ?Sized>(&self, rng: &mut R, preferred: &[String], all: &[String]) -> Option<String> {
        if !preferred.is_empty() && (all.is_empty() || rng.gen_bool(FOCUS)) {
            preferred.choose(rng).cloned()
        } else {
            all.choose(rng).cloned()
        }
    }

    fn expr_sites(&self, pred: impl Fn(&[usize], &Expr) -> bool) -> Vec<ExprSite> {
        let mut out = Vec::new();
        for (ei, bi, b) in self.rule.bindings() {
            for (path, e) in b.value.walk() {
                if pred(&path, e) {
                    out.push((ei, bi, path));
                }
            }
        }
        out
    }

    fn out_class(&self, element: usize) -> Option<&'a str> {
        let q = &self.rule.outputs.get(element)?.class;
        (q.metamodel == self.an.ast.target.metamodel && self.an.tgt.has_class(&q.class)).then_some(q.class.as_str())
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R, kind: EditKind) -> EditOperation {
        let op = match kind {
            EditKind::CreationOfBinding => self.creation(rng),
            EditKind::TypeOfSourcePatternElement => self.source_type(rng),
            EditKind::TypeOfTargetPatternElement => self.target_type(rng),
            EditKind::TypeOfVariableOrCollection => self.helper_type(rng),
            EditKind::TypeParameter => self.type_parameter(rng),
            EditKind::NavigationExpression => self.navigation(rng),
            EditKind::TargetOfBinding => self.binding_target(rng),
            EditKind::PredefinedOperationCall => self.rename_op(rng, kind, &PREDEFINED_OPS),
            EditKind::CollectionOperationCall => self.rename_op(rng, kind, &COLLECTION_OPS),
            EditKind::IteratorCall => self.rename_op(rng, kind, &ITERATOR_OPS),
        };
        op.unwrap_or_else(|| self.dud(kind))
    }

    fn other_classes(mm: &Metamodel, old: &str) -> Vec<String> {
        mm.class_names().filter(|c| *c != old).map(str::to_string).collect()
    }

    /// Candidates with the highest positive `cover` score; empty when none scores.
    fn best_covering(candidates: &[String], cover: impl Fn(&str) -> usize) -> Vec<String> {
        let top = candidates.iter().map(|c| cover(c)).max().unwrap_or(0);
        if top == 0 {
            return Vec::new();
        }
        candidates.iter().filter(|c| cover(c) == top).cloned().collect()
    }

    fn source_type<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<EditOperation> {
        let old = &self.rule.input.class.class;
        let var = &self.rule.input.var;
        let src = self.an.src;
        let mut used: Vec<&str> = Vec::new();
        let mut contexts: Vec<&str> = Vec::new();
        for (_, _, b) in self.rule.bindings() {
            for (_, e) in b.value.walk() {
                match &e.kind {
                    ExprKind::Nav { recv, feature } if matches!(&recv.kind, ExprKind::Var(v) if v == var) => {
                        if !used.contains(&feature.as_str()) {
                            used.push(feature);
                        }
                    }
                    ExprKind::HelperCall { recv, helper } if matches!(&recv.kind, ExprKind::Var(v) if v == var) => {
                        for h in self.an.ast.helpers.iter().filter(|h| &h.name == helper) {
                            if h.context.metamodel == self.an.ast.source.metamodel && !contexts.contains(&h.context.class.as_str()) {
                                contexts.push(&h.context.class);
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
        let all = Self::other_classes(src, old);
        let best = Self::best_covering(&all, |c| {
            used.iter().filter(|f| src.feature(c, f).is_some()).count()
                + contexts.iter().filter(|k| src.conforms(c, k)).count()
        });
        let new = self.pick_name(rng, &best, &all)?;
        Some(self.op(EditKind::TypeOfSourcePatternElement, Locator::InPattern, old.clone(), new))
    }

    fn target_type<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<EditOperation> {
        let elements: Vec<usize> = (0..self.rule.outputs.len()).collect();
        let fe = self.focus_element();
        let &element = self.pick(rng, &elements, |e| Some(*e) == fe)?;
        let old = &self.rule.outputs[element].class.class;
        let used: Vec<&str> = self.rule.outputs[element].bindings.iter().map(|b| b.feature.as_str()).collect();
        let all = Self::other_classes(self.an.tgt, old);
        let tgt = self.an.tgt;
        let best = Self::best_covering(&all, |c| used.iter().filter(|f| tgt.feature(c, f).is_some()).count());
        let new = self.pick_name(rng, &best, &all)?;
        Some(self.op(
            EditKind::TypeOfTargetPatternElement,
            Locator::OutPattern { element },
            old.clone(),
            new,
        ))
    }

    fn helper_type<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<EditOperation> {
        let mut called: Vec<usize> = Vec::new();
        for (_, _, b) in self.rule.bindings() {
            for (_, e) in b.value.walk() {
                if let ExprKind::HelperCall { helper, .. } = &e.kind {
                    for (i, h) in self.an.ast.helpers.iter().enumerate() {
                        if &h.name == helper && !called.contains(&i) {
                            called.push(i);
                        }
                    }
                }
            }
        }
        let &helper = called.choose(rng)?;
        let old_ty = &self.an.ast.helpers[helper].ty;
        let mut ty = old_ty.clone();
        if rng.gen_bool(0.25) {
            ty = match ty {
                TypeExpr::Sequence(inner) => *inner,
                other => TypeExpr::Sequence(Box::new(other)),
            };
        } else {
            let el = ty.element_mut();
            match el {
                TypeExpr::Class(q) => {
                    let mm = if q.metamodel == self.an.ast.target.metamodel {
                        self.an.tgt
                    } else {
                        self.an.src
                    };
                    q.class = Self::other_classes(mm, &q.class).choose(rng)?.clone();
                }
                TypeExpr::Primitive(p) => {
                    let others: Vec<Primitive> = Primitive::ALL.into_iter().filter(|x| x != p).collect();
                    *p = *others.choose(rng)?;
                }
                TypeExpr::Sequence(_) => unreachable!("element() strips sequences"),
            }
        }
        Some(self.op(
            EditKind::TypeOfVariableOrCollection,
            Locator::HelperType { helper },
            old_ty.to_string(),
            ty.to_string(),
        ))
    }

    fn pick_expr<R: Rng + ?Sized>(&self, rng: &mut R, sites: &[ExprSite]) -> Option<ExprSite> {
        let fb = self.focus_binding();
        self.pick(rng, sites, |(e, b, _)| Some((*e, *b)) == fb).cloned()
    }

    fn expr_at(&self, (e, b, path): &ExprSite) -> &'a Expr {
        self.rule.outputs[*e].bindings[*b].value.at_path(path).expect("site from walk")
    }

    fn type_parameter<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<EditOperation> {
        let sites = self.expr_sites(|_, e| matches!(e.kind, ExprKind::TypeTest { .. }));
        let site = self.pick_expr(rng, &sites)?;
        let (element, binding, path) = site;
        let value = &self.rule.outputs[element].bindings[binding].value;
        let ExprKind::TypeTest { recv, ty, .. } = &value.at_path(&path)?.kind else {
            unreachable!()
        };
        let env = self.an.scope_at(value, &self.an.rule_env(self.rule), &path);
        let receiver = self.an.infer(recv, &env);
        let ast = self.an.ast;
        let mut all = Vec::new();
        for (name, mm) in [(&ast.source.metamodel, self.an.src), (&ast.target.metamodel, self.an.tgt)] {
            for c in mm.class_names() {
                let q = format!("{name}!{c}");
                if q != ty.to_string() && !all.contains(&q) {
                    all.push(q);
                }
            }
        }
        // conforming classes of the receiver's metamodel
        let mut fitting = Vec::new();
        if let (Some(class), Some(mm)) = (receiver.class_name(), self.an.metamodel(receiver.origin)) {
            let name = if receiver.origin == Origin::Target {
                &ast.target.metamodel
            } else {
                &ast.source.metamodel
            };
            for c in mm.class_names().filter(|c| mm.conforms(c, class)) {
                let q = format!("{name}!{c}");
                if q != ty.to_string() {
                    fitting.push(q);
                }
            }
        }
        let new = self.pick_name(rng, &fitting, &all)?;
        Some(self.op(
            EditKind::TypeParameter,
            Locator::Expr { element, binding, path },
            ty.to_string(),
            new,
        ))
    }

    fn rename_op<R: Rng + ?Sized>(&self, rng: &mut R, kind: EditKind, pool: &[&str]) -> Option<EditOperation> {
        let sites = self.expr_sites(|_, e| {
            matches!(
                (&e.kind, kind),
                (ExprKind::OpCall { .. }, EditKind::PredefinedOperationCall)
                    | (ExprKind::CollectionOp { .. }, EditKind::CollectionOperationCall)
                    | (ExprKind::Iterate { .. }, EditKind::IteratorCall)
            )
        });
        let site = self.pick_expr(rng, &sites)?;
        let old = match &self.expr_at(&site).kind {
            ExprKind::OpCall { op, .. } | ExprKind::CollectionOp { op, .. } | ExprKind::Iterate { op, .. } => op,
            _ => unreachable!(),
        };
        let others: Vec<&str> = pool.iter().copied().filter(|o| o != old).collect();
        let new = others.choose(rng)?.to_string();
        let (element, binding, path) = site;
        Some(self.op(kind, Locator::Expr { element, binding, path }, old.clone(), new))
    }

    fn rhs_type(&self, element: usize, binding: usize) -> InferredType {
        let env = self.an.rule_env(self.rule);
        self.an.infer(&self.rule.outputs[element].bindings[binding].value, &env)
    }

    /// Accessible features of `class`, split into those a value of `rhs` binds
    /// to without error and all others.
    fn binding_candidates(&self, class: &str, rhs: &InferredType, exclude: &str) -> (Vec<String>, Vec<String>) {
        let mut good = Vec::new();
        let mut all = Vec::new();
        for f in self.an.tgt.accessible_features(class).unwrap_or_default() {
            if f.name == exclude {
                continue;
            }
            if !rhs.is_unknown() && self.an.binding_error(f, rhs).is_none() {
                good.push(f.name.clone());
            }
            all.push(f.name.clone());
        }
        (good, all)
    }

    fn binding_target<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<EditOperation> {
        let sites: Vec<(usize, usize)> = self.rule.bindings().map(|(e, b, _)| (e, b)).collect();
        let fb = self.focus_binding();
        let &(element, binding) = self.pick(rng, &sites, |s| Some(*s) == fb)?;
        let class = self.out_class(element)?;
        let old = &self.rule.outputs[element].bindings[binding].feature;
        let (good, all) = self.binding_candidates(class, &self.rhs_type(element, binding), old);
        let new = self.pick_name(rng, &good, &all)?;
        Some(self.op(
            EditKind::TargetOfBinding,
            Locator::Binding { element, binding },
            old.clone(),
            new,
        ))
    }

    /// Features `recv.f` of a value of type `recv_ty`, split into those whose
    /// navigation binds to `lhs` without error and all others.
    fn navigation_candidates(
        &self,
        recv: &Expr,
        recv_ty: &InferredType,
        lhs: Option<&crate::metamodel::FeatureDef>,
        exclude: &str,
        env: &crate::analyzer::Env,
    ) -> (Vec<String>, Vec<String>) {
        let (Some(class), false) = (recv_ty.class_name(), recv_ty.collection) else {
            return (vec![], vec![]);
        };
        let Some(mm) = self.an.metamodel(recv_ty.origin) else {
            return (vec![], vec![]);
        };
        let mut good = Vec::new();
        let mut all = Vec::new();
        for f in mm.accessible_features(class).unwrap_or_default() {
            if f.name == exclude {
                continue;
            }
            if let Some(lhs) = lhs {
                let t = self.an.infer(&Expr::nav(recv.clone(), &f.name), env);
                if self.an.binding_error(lhs, &t).is_none() {
                    good.push(f.name.clone());
                }
            }
            all.push(f.name.clone());
        }
        (good, all)
    }

    fn lhs_feature(&self, element: usize, binding: usize) -> Option<&'a crate::metamodel::FeatureDef> {
        let class = self.out_class(element)?;
        self.an
            .tgt
            .feature(class, &self.rule.outputs[element].bindings[binding].feature)
    }

    fn navigation<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<EditOperation> {
        let sites = self.expr_sites(|path, e| path.is_empty() || matches!(e.kind, ExprKind::Nav { .. }));
        let site = self.pick_expr(rng, &sites)?;
        let (element, binding, ref path) = site;
        let node = self.expr_at(&site);
        let root = path.is_empty();
        let lhs = if root { self.lhs_feature(element, binding) } else { None };
        let value = &self.rule.outputs[element].bindings[binding].value;
        let env = self.an.scope_at(value, &self.an.rule_env(self.rule), path);
        let in_var = Expr::var(&self.rule.input.var);
        let (recv, exclude) = match &node.kind {
            ExprKind::Nav { recv, feature } if !self.an.infer(recv, &env).is_unknown() => ((**recv).clone(), feature.as_str()),
            _ => (in_var, ""),
        };
        let recv_ty = self.an.infer(&recv, &env);
        let (good, all) = self.navigation_candidates(&recv, &recv_ty, lhs, exclude, &env);
        let f = self.pick_name(rng, &good, &all)?;
        let new = Expr::nav(recv, &f).to_string();
        let old = node.to_string();
        if new == old {
            return None;
        }
        Some(self.op(
            EditKind::NavigationExpression,
            Locator::Expr {
                element,
                binding,
                path: path.clone(),
            },
            old,
            new,
        ))
    }

    fn creation<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<EditOperation> {
        let elements: Vec<usize> = (0..self.rule.outputs.len()).collect();
        let fe = self.focus_element();
        let &element = self.pick(rng, &elements, |e| Some(*e) == fe)?;
        let class = self.out_class(element)?;
        let bound: Vec<&str> = self.rule.outputs[element]
            .bindings
            .iter()
            .map(|b| b.feature.as_str())
            .collect();
        let unbound: Vec<_> = self
            .an
            .tgt
            .accessible_features(class)
            .unwrap_or_default()
            .into_iter()
            .filter(|f| !bound.contains(&f.name.as_str()))
            .collect();
        let mandatory: Vec<_> = unbound.iter().filter(|f| f.mandatory).copied().collect();
        let feature = if mandatory.is_empty() {
            *unbound.choose(rng)?
        } else {
            *mandatory.choose(rng)?
        };
        let in_var = Expr::var(&self.rule.input.var);
        let in_ty = self.an.input_type(self.rule);
        let (good, _) = self.navigation_candidates(&in_var, &in_ty, Some(feature), "", &self.an.rule_env(self.rule));
        let rhs = match good.choose(rng) {
            Some(g) => Expr::nav(in_var, g).to_string(),
            None => match feature.primitive() {
                Some(Primitive::String) => "''".to_string(),
                Some(Primitive::Integer) => "0".to_string(),
                Some(Primitive::Boolean) => "false".to_string(),
                None => self.rule.input.var.clone(),
            },
        };
        Some(self.op(
            EditKind::CreationOfBinding,
            Locator::NewBinding { element },
            String::new(),
            format!("{} <- {rhs}", feature.name),
        ))
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::analyzer::{analyze, ErrorCategory};
    use crate::edits::apply_edit;
    use crate::fixtures;

    #[test]
    fn type_ops_on_invalid_type_target_flagged_rule() {
        let (uml, bpmn) = (fixtures::uml(), fixtures::intalio());
        let ast = fixtures::excerpt();
        let errs: Vec<_> = analyze(&ast, &uml, &bpmn)
            .into_iter()
            .filter(|e| e.category == ErrorCategory::InvalidType)
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let op = sample_edit(&mut rng, &ast, &errs, &uml, &bpmn).unwrap();
            assert_eq!(op.rule, "activitypartition2pool");
            if op.kind == EditKind::TypeOfSourcePatternElement {
                assert_eq!(op.old, "Comment");
                assert!(uml.has_class(&op.new), "{op}");
            }
        }
    }

    #[test]
    fn source_type_prefers_classes_exposing_used_features() {
        let (uml, bpmn) = (fixtures::uml(), fixtures::intalio());
        let ast = fixtures::excerpt();
        let errs = analyze(&ast, &uml, &bpmn);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 2000;
        let hits = (0..n)
            .map(|_| {
                sample_edit_of_kind(&mut rng, &ast, &errs, &uml, &bpmn, EditKind::TypeOfSourcePatternElement, "activitypartition2pool")
                    .unwrap()
            })
            .filter(|op| op.new == "ActivityPartition")
            .count();
        // uniform choice would give about n / (classes - 1)
        let uniform = n / (uml.class_names().count() - 1);
        assert!(hits > 3 * uniform, "{hits} vs {uniform}");
    }

    #[test]
    fn type_parameter_can_leave_the_wrong_metamodel() {
        let (uml, bpmn) = (fixtures::uml(), fixtures::intalio());
        let text = fixtures::UML2BPMN_ORIGINAL.replace("UML!ObjectNode", "Intalio!Activity");
        let ast = crate::mtl::parse_transformation(&text).unwrap();
        let errs = analyze(&ast, &uml, &bpmn);
        assert!(errs.iter().any(|e| e.category == ErrorCategory::InvalidTypeParameter));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut fitting = 0;
        let mut restored = false;
        for _ in 0..400 {
            let op = sample_edit_of_kind(&mut rng, &ast, &errs, &uml, &bpmn, EditKind::TypeParameter, "activitypartition2pool")
                .unwrap();
            let class = op.new.strip_prefix("UML!");
            if class.is_some_and(|c| uml.conforms(c, "ActivityNode")) {
                fitting += 1;
            }
            restored |= op.new == "UML!ObjectNode";
        }
        assert!(restored);
        assert!(fitting > 200, "{fitting}");
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let (uml, bpmn) = (fixtures::uml(), fixtures::intalio());
        let ast = fixtures::excerpt();
        let errs = analyze(&ast, &uml, &bpmn);
        let draw = || {
            let mut rng = ChaCha8Rng::seed_from_u64(42);
            sample_edit(&mut rng, &ast, &errs, &uml, &bpmn).unwrap()
        };
        assert_eq!(draw(), draw());
    }

    #[test]
    fn every_kind_is_sampled() {
        let (uml, bpmn) = (fixtures::uml(), fixtures::intalio());
        let ast = fixtures::excerpt();
        let errs = analyze(&ast, &uml, &bpmn);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut seen = HashSet::new();
        let mut counts = [0usize; 10];
        for _ in 0..10_000 {
            let op = sample_edit(&mut rng, &ast, &errs, &uml, &bpmn).unwrap();
            seen.insert(op.kind);
            counts[EditKind::ALL.iter().position(|k| *k == op.kind).unwrap()] += 1;
        }
        assert_eq!(seen.len(), 10);
        // chi-square against uniform, 9 dof: 27.88 is the 0.001 critical value
        let chi: f64 = counts.iter().map(|&c| (c as f64 - 1000.0).powi(2) / 1000.0).sum();
        assert!(chi < 27.88, "{counts:?}");
    }

    #[test]
    fn sampled_ops_apply_when_they_have_a_site() {
        let (uml, bpmn) = (fixtures::uml(), fixtures::intalio());
        let ast = fixtures::excerpt();
        let errs = analyze(&ast, &uml, &bpmn);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let op = sample_edit(&mut rng, &ast, &errs, &uml, &bpmn).unwrap();
            let (_, outcome) = apply_edit(&ast, &op);
            let has_site = !op.old.is_empty() || op.kind == EditKind::CreationOfBinding && !op.new.is_empty();
            assert_eq!(outcome.is_applied(), has_site, "{op} {outcome:?}");
        }
    }

    #[test]
    fn no_rules_is_an_error() {
        let (uml, bpmn) = (fixtures::uml(), fixtures::intalio());
        let ast = crate::mtl::parse_transformation("module m; create OUT : Intalio from IN : UML;").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(sample_edit(&mut rng, &ast, &[], &uml, &bpmn), Err(SampleError::NoRules));
    }
}
