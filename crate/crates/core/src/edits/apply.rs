use serde::Serialize;

use super::{EditKind, EditOperation, Locator, Patch};
use crate::mtl::{
    parse_binding, parse_expr, parse_identifier, parse_qualified, parse_type_expr, Binding, Expr, ExprKind,
    Transformation,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum Outcome {
    Applied,
    Skipped(String),
}

impl Outcome {
    pub fn is_applied(&self) -> bool {
        matches!(self, Outcome::Applied)
    }
}

/// Text currently at the operation's locator, in the form its `old` value
/// takes for `kind`. `None` when the locator does not resolve or does not fit
/// the kind.
pub fn fragment(ast: &Transformation, kind: EditKind, rule: &str, locator: &Locator) -> Option<String> {
    let r = ast.rule(rule)?;
    let expr_at = |element: usize, binding: usize, path: &[usize]| -> Option<&Expr> {
        r.outputs.get(element)?.bindings.get(binding)?.value.at_path(path)
    };
    match (kind, locator) {
        (EditKind::TypeOfSourcePatternElement, Locator::InPattern) => Some(r.input.class.class.clone()),
        (EditKind::TypeOfTargetPatternElement, Locator::OutPattern { element }) => {
            Some(r.outputs.get(*element)?.class.class.clone())
        }
        (EditKind::TargetOfBinding, Locator::Binding { element, binding }) => {
            Some(r.outputs.get(*element)?.bindings.get(*binding)?.feature.clone())
        }
        (EditKind::CreationOfBinding, Locator::NewBinding { element }) => {
            r.outputs.get(*element).map(|_| String::new())
        }
        (EditKind::TypeOfVariableOrCollection, Locator::HelperType { helper }) => {
            Some(ast.helpers.get(*helper)?.ty.to_string())
        }
        (kind, Locator::Expr { element, binding, path }) => {
            let e = expr_at(*element, *binding, path)?;
            match (kind, &e.kind) {
                (EditKind::NavigationExpression, _) => Some(e.to_string()),
                (EditKind::TypeParameter, ExprKind::TypeTest { ty, .. }) => Some(ty.to_string()),
                (EditKind::PredefinedOperationCall, ExprKind::OpCall { op, .. })
                | (EditKind::CollectionOperationCall, ExprKind::CollectionOp { op, .. })
                | (EditKind::IteratorCall, ExprKind::Iterate { op, .. }) => Some(op.clone()),
                _ => None,
            }
        }
        _ => None,
    }
}

/// Applies `op`, returning the new AST; a skipped op returns `ast` unchanged.
pub fn apply_edit(ast: &Transformation, op: &EditOperation) -> (Transformation, Outcome) {
    let mut out = ast.clone();
    let outcome = apply_edit_in_place(&mut out, op);
    (out, outcome)
}

/// Left fold of [`apply_edit`]; the log has one entry per operation.
pub fn apply_patch(ast: &Transformation, patch: &Patch) -> (Transformation, Vec<Outcome>) {
    let mut out = ast.clone();
    let log = patch.ops.iter().map(|op| apply_edit_in_place(&mut out, op)).collect();
    (out, log)
}

pub fn apply_edit_in_place(ast: &mut Transformation, op: &EditOperation) -> Outcome {
    match try_apply(ast, op) {
        Ok(()) => {
            ast.normalize_helper_calls();
            Outcome::Applied
        }
        Err(reason) => Outcome::Skipped(reason),
    }
}

fn try_apply(ast: &mut Transformation, op: &EditOperation) -> Result<(), String> {
    if ast.rule(&op.rule).is_none() {
        return Err(format!("no rule `{}`", op.rule));
    }
    let found = fragment(ast, op.kind, &op.rule, &op.locator)
        .ok_or_else(|| format!("locator {} does not resolve for {}", op.locator, op.kind))?;
    if found != op.old {
        return Err(format!("expected `{}`, found `{found}`", op.old));
    }
    if op.new == op.old {
        return Err("new value equals old value".into());
    }
    let bad = |e: crate::mtl::ParseError| format!("invalid new value `{}`: {}", op.new, e.message);
    let helper_count = ast.helpers.len();
    let rule = ast.rule_mut(&op.rule).expect("checked above");
    match &op.locator {
        Locator::InPattern => {
            rule.input.class.class = parse_identifier(&op.new).map_err(bad)?;
        }
        Locator::OutPattern { element } => {
            rule.outputs[*element].class.class = parse_identifier(&op.new).map_err(bad)?;
        }
        Locator::Binding { element, binding } => {
            let name = parse_identifier(&op.new).map_err(bad)?;
            let out = &mut rule.outputs[*element];
            out.bindings[*binding].feature = name;
        }
        Locator::NewBinding { element } => {
            let mut b: Binding = parse_binding(&op.new).map_err(bad)?;
            let out = &mut rule.outputs[*element];
            if out.bindings.iter().any(|x| x.feature == b.feature) {
                return Err(format!("feature `{}` is already bound", b.feature));
            }
            let span = out.bindings.last().map(|x| x.span).unwrap_or(out.class.span);
            b.span = span;
            b.value.respan(span);
            out.bindings.push(b);
        }
        Locator::Expr { element, binding, path } => {
            let node = rule.outputs[*element].bindings[*binding]
                .value
                .at_path_mut(path)
                .expect("fragment resolved");
            match (&mut node.kind, op.kind) {
                (_, EditKind::NavigationExpression) => {
                    let mut e = parse_expr(&op.new).map_err(bad)?;
                    e.respan(node.span);
                    *node = e;
                }
                (ExprKind::TypeTest { ty, .. }, _) => {
                    let mut q = parse_qualified(&op.new).map_err(bad)?;
                    q.span = ty.span;
                    *ty = q;
                }
                (ExprKind::OpCall { op: name, .. }, _)
                | (ExprKind::CollectionOp { op: name, .. }, _)
                | (ExprKind::Iterate { op: name, .. }, _) => {
                    *name = parse_identifier(&op.new).map_err(bad)?;
                }
                _ => unreachable!("fragment checked the node kind"),
            }
        }
        Locator::HelperType { helper } => {
            debug_assert!(*helper < helper_count);
            let ty = parse_type_expr(&op.new).map_err(bad)?;
            ast.helpers[*helper].ty = ty;
        }
    }
    Ok(())
}
