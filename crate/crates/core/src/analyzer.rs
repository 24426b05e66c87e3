//! Static type analysis of transformations against their metamodels.
//!
//! [`analyze`] infers a type for every expression, resolves every binding and
//! reports errors in a closed set of seven categories. Expressions over an
//! unresolvable type infer [`BaseType::Unknown`], and nothing above them is
//! reported, so one mistake yields one error.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::metamodel::{FeatureDef, FeatureKind, Metamodel, Primitive};
use crate::mtl::{
    Binding, Expr, ExprKind, Literal, QualifiedName, Rule, Transformation, TypeExpr, TypeTestKind, COLLECTION_OPS,
    ITERATOR_OPS, PREDEFINED_OPS,
};
use crate::source::Pos;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ErrorCategory {
    InvalidType,
    FeatureNotFound,
    IncompatibleBindingType,
    PossibleUnresolvedBinding,
    CompulsoryFeatureNotInitialized,
    InvalidOperationCall,
    InvalidTypeParameter,
}

impl ErrorCategory {
    pub const ALL: [ErrorCategory; 7] = [
        ErrorCategory::InvalidType,
        ErrorCategory::FeatureNotFound,
        ErrorCategory::IncompatibleBindingType,
        ErrorCategory::PossibleUnresolvedBinding,
        ErrorCategory::CompulsoryFeatureNotInitialized,
        ErrorCategory::InvalidOperationCall,
        ErrorCategory::InvalidTypeParameter,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ErrorCategory::InvalidType => "InvalidType",
            ErrorCategory::FeatureNotFound => "FeatureNotFound",
            ErrorCategory::IncompatibleBindingType => "IncompatibleBindingType",
            ErrorCategory::PossibleUnresolvedBinding => "PossibleUnresolvedBinding",
            ErrorCategory::CompulsoryFeatureNotInitialized => "CompulsoryFeatureNotInitialized",
            ErrorCategory::InvalidOperationCall => "InvalidOperationCall",
            ErrorCategory::InvalidTypeParameter => "InvalidTypeParameter",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        ErrorCategory::ALL.into_iter().find(|c| c.name() == s)
    }
}

impl fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which metamodel a class type belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Origin {
    Source,
    Target,
    None,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum BaseType {
    Class(String),
    Primitive(Primitive),
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct InferredType {
    pub base: BaseType,
    pub collection: bool,
    pub origin: Origin,
}

impl InferredType {
    pub fn unknown() -> Self {
        InferredType {
            base: BaseType::Unknown,
            collection: false,
            origin: Origin::None,
        }
    }

    pub fn primitive(p: Primitive) -> Self {
        InferredType {
            base: BaseType::Primitive(p),
            collection: false,
            origin: Origin::None,
        }
    }

    pub fn class(name: &str, origin: Origin) -> Self {
        InferredType {
            base: BaseType::Class(name.to_string()),
            collection: false,
            origin,
        }
    }

    pub fn into_collection(mut self) -> Self {
        self.collection = true;
        self
    }

    pub fn element(&self) -> Self {
        InferredType {
            collection: false,
            ..self.clone()
        }
    }

    pub fn is_unknown(&self) -> bool {
        self.base == BaseType::Unknown
    }

    pub fn class_name(&self) -> Option<&str> {
        match &self.base {
            BaseType::Class(c) => Some(c),
            _ => None,
        }
    }

    pub fn primitive_type(&self) -> Option<Primitive> {
        match self.base {
            BaseType::Primitive(p) => Some(p),
            _ => None,
        }
    }

    /// A scalar of the given primitive.
    pub fn is_scalar(&self, p: Primitive) -> bool {
        !self.collection && self.base == BaseType::Primitive(p)
    }
}

impl fmt::Display for InferredType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = match &self.base {
            BaseType::Class(c) => c.as_str(),
            BaseType::Primitive(p) => p.name(),
            BaseType::Unknown => "?",
        };
        if self.collection {
            write!(f, "Sequence({base})")
        } else {
            f.write_str(base)
        }
    }
}

/// Structural position of an error, stable under edits that move text.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "site", rename_all = "snake_case")]
pub enum Site {
    InPattern { rule: String },
    Guard { rule: String },
    OutPattern { rule: String, element: usize },
    Binding { rule: String, element: usize, binding: usize },
    Helper { helper: usize },
}

impl Site {
    pub fn rule(&self) -> Option<&str> {
        match self {
            Site::InPattern { rule }
            | Site::Guard { rule }
            | Site::OutPattern { rule, .. }
            | Site::Binding { rule, .. } => Some(rule),
            Site::Helper { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TypeError {
    pub category: ErrorCategory,
    pub location: Pos,
    pub rule: Option<String>,
    pub symbol: String,
    pub message: String,
    pub site: Site,
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.location, self.category, self.message)?;
        if let Some(r) = &self.rule {
            write!(f, " (rule {r})")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Resolution {
    /// Primitive, unknown or target-side values need no resolving rule.
    NotNeeded,
    Resolved(String),
    Unresolved { expected_from: String, expected_to: String },
}

pub type Env = HashMap<String, InferredType>;

type Report<'r> = dyn FnMut(ErrorCategory, Pos, String, String) + 'r;

/// Type checker bound to one transformation and its two metamodels.
pub struct Analyzer<'a> {
    pub ast: &'a Transformation,
    pub src: &'a Metamodel,
    pub tgt: &'a Metamodel,
}

impl<'a> Analyzer<'a> {
    pub fn new(ast: &'a Transformation, src: &'a Metamodel, tgt: &'a Metamodel) -> Self {
        Analyzer { ast, src, tgt }
    }

    pub fn metamodel(&self, origin: Origin) -> Option<&'a Metamodel> {
        match origin {
            Origin::Source => Some(self.src),
            Origin::Target => Some(self.tgt),
            Origin::None => None,
        }
    }

    /// The class a qualified name denotes in either metamodel, if any.
    pub fn resolve_class(&self, q: &QualifiedName) -> Option<InferredType> {
        if q.metamodel == self.ast.source.metamodel && self.src.has_class(&q.class) {
            Some(InferredType::class(&q.class, Origin::Source))
        } else if q.metamodel == self.ast.target.metamodel && self.tgt.has_class(&q.class) {
            Some(InferredType::class(&q.class, Origin::Target))
        } else {
            None
        }
    }

    fn resolve_on(&self, q: &QualifiedName, origin: Origin) -> Option<InferredType> {
        self.resolve_class(q).filter(|t| t.origin == origin)
    }

    pub fn resolve_type_expr(&self, t: &TypeExpr) -> Option<InferredType> {
        match t {
            TypeExpr::Primitive(p) => Some(InferredType::primitive(*p)),
            TypeExpr::Class(q) => self.resolve_class(q),
            TypeExpr::Sequence(inner) => self.resolve_type_expr(inner).map(InferredType::into_collection),
        }
    }

    /// Type of the rule's input variable, unknown when its class does not resolve.
    pub fn input_type(&self, rule: &Rule) -> InferredType {
        self.resolve_on(&rule.input.class, Origin::Source)
            .unwrap_or_else(InferredType::unknown)
    }

    /// Variables visible in a rule's bindings.
    pub fn rule_env(&self, rule: &Rule) -> Env {
        let mut env = Env::new();
        for o in &rule.outputs {
            let t = self.resolve_on(&o.class, Origin::Target).unwrap_or_else(InferredType::unknown);
            env.insert(o.var.clone(), t);
        }
        env.insert(rule.input.var.clone(), self.input_type(rule));
        env
    }

    /// Variables visible at `path` below `top`, which sees `env`.
    pub fn scope_at(&self, top: &Expr, env: &Env, path: &[usize]) -> Env {
        let mut env = env.clone();
        let mut e = top;
        for &i in path {
            if let ExprKind::Iterate { recv, var, .. } = &e.kind {
                if i == 1 {
                    let r = self.infer(recv, &env);
                    env.insert(var.clone(), if r.collection { r.element() } else { InferredType::unknown() });
                }
            }
            match e.children().get(i) {
                Some(c) => e = c,
                None => break,
            }
        }
        env
    }

    pub fn infer(&self, e: &Expr, env: &Env) -> InferredType {
        self.infer_with(e, env, &mut |_, _, _, _| {})
    }

    fn feature_type(&self, class: &str, origin: Origin, feature: &str) -> Option<InferredType> {
        let f = self.metamodel(origin)?.feature(class, feature)?;
        let t = match f.kind {
            FeatureKind::Attribute => InferredType::primitive(f.primitive()?),
            FeatureKind::Reference => InferredType::class(&f.type_name, origin),
        };
        Some(if f.many { t.into_collection() } else { t })
    }

    fn helper_type(&self, class: &str, origin: Origin, name: &str) -> Option<InferredType> {
        let mm = self.metamodel(origin)?;
        let h = self.ast.helpers.iter().find(|h| {
            h.name == name
                && self
                    .resolve_on(&h.context, origin)
                    .and_then(|t| t.class_name().map(|c| mm.conforms(class, c)))
                    .unwrap_or(false)
        })?;
        Some(self.resolve_type_expr(&h.ty).unwrap_or_else(InferredType::unknown))
    }

    fn infer_with(&self, e: &Expr, env: &Env, report: &mut Report<'_>) -> InferredType {
        let unknown = InferredType::unknown;
        let at = e.span.start;
        match &e.kind {
            ExprKind::Var(v) => match env.get(v) {
                Some(t) => t.clone(),
                None => {
                    report(ErrorCategory::FeatureNotFound, at, v.clone(), format!("unknown variable `{v}`"));
                    unknown()
                }
            },
            ExprKind::Literal(Literal::String(_)) => InferredType::primitive(Primitive::String),
            ExprKind::Literal(Literal::Integer(_)) => InferredType::primitive(Primitive::Integer),
            ExprKind::Literal(Literal::Boolean(_)) => InferredType::primitive(Primitive::Boolean),
            ExprKind::Nav { recv, feature: name } | ExprKind::HelperCall { recv, helper: name } => {
                let r = self.infer_with(recv, env, report);
                if r.is_unknown() {
                    return unknown();
                }
                if r.collection {
                    report(
                        ErrorCategory::InvalidOperationCall,
                        at,
                        name.clone(),
                        format!("cannot navigate `.{name}` on collection type {r}"),
                    );
                    return unknown();
                }
                let found = match &r.base {
                    BaseType::Class(c) => {
                        if matches!(e.kind, ExprKind::HelperCall { .. }) {
                            self.helper_type(c, r.origin, name)
                                .or_else(|| self.feature_type(c, r.origin, name))
                        } else {
                            self.feature_type(c, r.origin, name)
                                .or_else(|| self.helper_type(c, r.origin, name))
                        }
                    }
                    _ => None,
                };
                found.unwrap_or_else(|| {
                    report(
                        ErrorCategory::FeatureNotFound,
                        at,
                        name.clone(),
                        format!("type {r} has no feature `{name}`"),
                    );
                    unknown()
                })
            }
            ExprKind::OpCall { recv, op, args } => {
                let r = self.infer_with(recv, env, report);
                for a in args {
                    self.infer_with(a, env, report);
                }
                let mut bad = |msg: String| {
                    report(ErrorCategory::InvalidOperationCall, at, op.clone(), msg);
                    unknown()
                };
                if !PREDEFINED_OPS.contains(&op.as_str()) {
                    return bad(format!("unknown operation `{op}`"));
                }
                if r.is_unknown() {
                    return unknown();
                }
                if r.collection {
                    return bad(format!("operation `.{op}()` applied to collection type {r}"));
                }
                if !args.is_empty() {
                    return bad(format!("operation `{op}` takes no arguments"));
                }
                match op.as_str() {
                    "toString" => InferredType::primitive(Primitive::String),
                    _ if r.is_scalar(Primitive::String) => InferredType::primitive(Primitive::Integer),
                    _ => bad(format!("operation `{op}` is not defined on {r}")),
                }
            }
            ExprKind::CollectionOp { recv, op, args } => {
                let r = self.infer_with(recv, env, report);
                for a in args {
                    self.infer_with(a, env, report);
                }
                let mut bad = |msg: String| {
                    report(ErrorCategory::InvalidOperationCall, at, op.clone(), msg);
                    unknown()
                };
                if !COLLECTION_OPS.contains(&op.as_str()) {
                    return bad(format!("unknown collection operation `{op}`"));
                }
                if r.is_unknown() {
                    return unknown();
                }
                if !r.collection {
                    return bad(format!("collection operation `->{op}()` applied to {r}"));
                }
                let arity = if op == "includes" { 1 } else { 0 };
                if args.len() != arity {
                    return bad(format!("`{op}` expects {arity} argument(s), found {}", args.len()));
                }
                match op.as_str() {
                    "flatten" => r,
                    "includes" | "isEmpty" => InferredType::primitive(Primitive::Boolean),
                    "size" => InferredType::primitive(Primitive::Integer),
                    _ => r.element(),
                }
            }
            ExprKind::Iterate { recv, op, var, body } => {
                let r = self.infer_with(recv, env, report);
                let known_op = ITERATOR_OPS.contains(&op.as_str());
                if !known_op {
                    report(ErrorCategory::InvalidOperationCall, at, op.clone(), format!("unknown iterator `{op}`"));
                } else if !r.is_unknown() && !r.collection {
                    report(
                        ErrorCategory::InvalidOperationCall,
                        at,
                        op.clone(),
                        format!("iterator `->{op}` applied to {r}"),
                    );
                }
                let elem = if r.collection { r.element() } else { unknown() };
                let mut inner = env.clone();
                inner.insert(var.clone(), elem);
                let b = self.infer_with(body, &inner, report);
                if !known_op || r.is_unknown() || !r.collection {
                    return unknown();
                }
                match op.as_str() {
                    "collect" if b.is_unknown() => unknown(),
                    "collect" => b.into_collection(),
                    _ => {
                        if !b.is_unknown() && !b.is_scalar(Primitive::Boolean) {
                            report(
                                ErrorCategory::InvalidOperationCall,
                                at,
                                op.clone(),
                                format!("`{op}` body must be Boolean, found {b}"),
                            );
                        }
                        if op == "select" || op == "reject" {
                            r
                        } else {
                            InferredType::primitive(Primitive::Boolean)
                        }
                    }
                }
            }
            ExprKind::TypeTest { recv, test, ty } => {
                let r = self.infer_with(recv, env, report);
                let t = self.resolve_class(ty);
                let result = match test {
                    TypeTestKind::IsKindOf => InferredType::primitive(Primitive::Boolean),
                    TypeTestKind::AsType => t.clone().unwrap_or_else(unknown),
                };
                let symbol = ty.to_string();
                let Some(t) = t else {
                    report(ErrorCategory::InvalidType, ty.span.start, symbol.clone(), format!("unknown type `{symbol}`"));
                    return result;
                };
                if r.is_unknown() {
                    return result;
                }
                if r.collection {
                    report(
                        ErrorCategory::InvalidOperationCall,
                        at,
                        test.keyword().to_string(),
                        format!("`{}` applied to collection type {r}", test.keyword()),
                    );
                    return result;
                }
                let ok = match (r.class_name(), t.class_name()) {
                    (Some(rc), Some(tc)) if r.origin == t.origin => {
                        self.metamodel(r.origin).is_some_and(|mm| mm.conforms(tc, rc))
                    }
                    _ => false,
                };
                if !ok {
                    report(
                        ErrorCategory::InvalidTypeParameter,
                        ty.span.start,
                        symbol.clone(),
                        format!("`{symbol}` is not a subtype of the receiver type {r}"),
                    );
                }
                result
            }
            ExprKind::Sequence(elems) => {
                let ts: Vec<InferredType> = elems.iter().map(|x| self.infer_with(x, env, report)).collect();
                let Some(first) = ts.first() else {
                    return unknown().into_collection();
                };
                let first = first.element();
                if ts.iter().all(|t| t.element() == first) {
                    first.into_collection()
                } else {
                    unknown().into_collection()
                }
            }
        }
    }

    /// Whether some rule turns values of the RHS type into the feature's class.
    pub fn resolve(&self, feature: &FeatureDef, rhs: &InferredType) -> Resolution {
        if feature.kind != FeatureKind::Reference {
            return Resolution::NotNeeded;
        }
        let Some(k) = rhs.class_name() else {
            return Resolution::NotNeeded;
        };
        let d = feature.type_name.as_str();
        match rhs.origin {
            Origin::Source => {
                for r in &self.ast.rules {
                    let Some(f) = self.resolve_on(&r.input.class, Origin::Source) else {
                        continue;
                    };
                    let f = f.class_name().unwrap_or_default();
                    if !(self.src.conforms(k, f) || self.src.conforms(f, k)) {
                        continue;
                    }
                    let maps = r.outputs.iter().any(|o| {
                        self.resolve_on(&o.class, Origin::Target)
                            .is_some_and(|t| self.tgt.conforms(t.class_name().unwrap_or_default(), d))
                    });
                    if maps {
                        return Resolution::Resolved(r.name.clone());
                    }
                }
            }
            Origin::Target if self.tgt.conforms(k, d) => return Resolution::NotNeeded,
            _ => {}
        }
        Resolution::Unresolved {
            expected_from: k.to_string(),
            expected_to: d.to_string(),
        }
    }

    /// The error a binding of `rhs` to `feature` raises, if any.
    pub fn binding_error(&self, feature: &FeatureDef, rhs: &InferredType) -> Option<(ErrorCategory, String)> {
        if rhs.is_unknown() {
            return None;
        }
        match feature.kind {
            FeatureKind::Attribute => {
                let want = feature.primitive();
                let ok = rhs.primitive_type() == want && want.is_some() && (feature.many || !rhs.collection);
                (!ok).then(|| {
                    let many = if feature.many { " many" } else { "" };
                    (
                        ErrorCategory::IncompatibleBindingType,
                        format!("feature `{}` expects {}{many}, found {rhs}", feature.name, feature.type_name),
                    )
                })
            }
            FeatureKind::Reference => {
                if rhs.primitive_type().is_some() {
                    return Some((
                        ErrorCategory::IncompatibleBindingType,
                        format!("reference `{}` expects {}, found {rhs}", feature.name, feature.type_name),
                    ));
                }
                match self.resolve(feature, rhs) {
                    Resolution::Unresolved {
                        expected_from,
                        expected_to,
                    } => Some((
                        ErrorCategory::PossibleUnresolvedBinding,
                        format!("no rule maps {expected_from} to {expected_to} for `{}`", feature.name),
                    )),
                    _ => None,
                }
            }
        }
    }

    /// Resolution verdict for one binding of a rule.
    pub fn resolve_binding(&self, rule: &Rule, element: usize, binding: &Binding) -> Resolution {
        let Some(o) = rule.outputs.get(element) else {
            return Resolution::NotNeeded;
        };
        let Some(d) = self.resolve_on(&o.class, Origin::Target) else {
            return Resolution::NotNeeded;
        };
        let Some(f) = self.tgt.feature(d.class_name().unwrap_or_default(), &binding.feature) else {
            return Resolution::NotNeeded;
        };
        let rhs = self.infer(&binding.value, &self.rule_env(rule));
        self.resolve(f, &rhs)
    }

    pub fn analyze(&self) -> Vec<TypeError> {
        let mut errors = Vec::new();
        for (i, h) in self.ast.helpers.iter().enumerate() {
            self.check_helper(i, h, &mut errors);
        }
        for r in &self.ast.rules {
            self.check_rule(r, &mut errors);
        }
        errors.sort_by(|a, b| {
            (a.location, a.category, &a.symbol, &a.site, &a.message).cmp(&(
                b.location,
                b.category,
                &b.symbol,
                &b.site,
                &b.message,
            ))
        });
        errors
    }

    fn check_helper(&self, index: usize, h: &crate::mtl::Helper, out: &mut Vec<TypeError>) {
        let site = Site::Helper { helper: index };
        let mut push = |category, location, symbol: String, message| {
            out.push(TypeError {
                category,
                location,
                rule: None,
                symbol,
                message,
                site: site.clone(),
            })
        };
        let ctx = self.resolve_class(&h.context);
        if ctx.is_none() {
            let s = h.context.to_string();
            push(ErrorCategory::InvalidType, h.context.span.start, s.clone(), format!("unknown context type `{s}`"));
        }
        let declared = self.resolve_type_expr(&h.ty);
        if declared.is_none() {
            let s = h.ty.to_string();
            push(ErrorCategory::InvalidType, h.span.start, s.clone(), format!("unknown helper type `{s}`"));
        }
        let mut env = Env::new();
        env.insert("self".into(), ctx.unwrap_or_else(InferredType::unknown));
        let body = self.infer_with(&h.body, &env, &mut |c, p, s, m| push(c, p, s, m));
        if let Some(d) = declared {
            if !body.is_unknown() && !self.assignable(&body, &d) {
                push(
                    ErrorCategory::InvalidType,
                    h.body.span.start,
                    h.name.clone(),
                    format!("helper `{}` declared {d}, body has type {body}", h.name),
                );
            }
        }
    }

    fn assignable(&self, value: &InferredType, to: &InferredType) -> bool {
        if value.collection != to.collection {
            return false;
        }
        match (&value.base, &to.base) {
            (BaseType::Class(a), BaseType::Class(b)) => {
                value.origin == to.origin && self.metamodel(value.origin).is_some_and(|mm| mm.conforms(a, b))
            }
            (a, b) => a == b,
        }
    }

    fn check_rule(&self, rule: &Rule, out: &mut Vec<TypeError>) {
        let name = &rule.name;
        let mut push = |category, location, symbol: String, message, site: Site| {
            out.push(TypeError {
                category,
                location,
                rule: Some(name.clone()),
                symbol,
                message,
                site,
            })
        };
        let q = &rule.input.class;
        if self.resolve_on(q, Origin::Source).is_none() {
            push(
                ErrorCategory::InvalidType,
                q.span.start,
                q.class.clone(),
                format!("`{q}` is not a class of source metamodel {}", self.ast.source.metamodel),
                Site::InPattern { rule: name.clone() },
            );
        }
        let env = self.rule_env(rule);
        if let Some(g) = &rule.input.guard {
            let mut genv = Env::new();
            genv.insert(rule.input.var.clone(), self.input_type(rule));
            let site = Site::Guard { rule: name.clone() };
            let t = self.infer_with(g, &genv, &mut |c, p, s, m| push(c, p, s, m, site.clone()));
            if !t.is_unknown() && !t.is_scalar(Primitive::Boolean) {
                push(
                    ErrorCategory::InvalidOperationCall,
                    g.span.start,
                    rule.input.var.clone(),
                    format!("guard must be Boolean, found {t}"),
                    site,
                );
            }
        }
        for (ei, o) in rule.outputs.iter().enumerate() {
            let class = self.resolve_on(&o.class, Origin::Target);
            let q = &o.class;
            if class.is_none() {
                push(
                    ErrorCategory::InvalidType,
                    q.span.start,
                    q.class.clone(),
                    format!("`{q}` is not a class of target metamodel {}", self.ast.target.metamodel),
                    Site::OutPattern {
                        rule: name.clone(),
                        element: ei,
                    },
                );
            }
            let class = class.as_ref().and_then(|c| c.class_name());
            for (bi, b) in o.bindings.iter().enumerate() {
                let site = Site::Binding {
                    rule: name.clone(),
                    element: ei,
                    binding: bi,
                };
                let rhs = self.infer_with(&b.value, &env, &mut |c, p, s, m| push(c, p, s, m, site.clone()));
                let Some(class) = class else { continue };
                let Some(f) = self.tgt.feature(class, &b.feature) else {
                    push(
                        ErrorCategory::FeatureNotFound,
                        b.span.start,
                        b.feature.clone(),
                        format!("class {class} has no feature `{}`", b.feature),
                        site,
                    );
                    continue;
                };
                if let Some((cat, msg)) = self.binding_error(f, &rhs) {
                    push(cat, b.span.start, b.feature.clone(), msg, site);
                }
            }
            if let Some(class) = class {
                for f in self.tgt.accessible_features(class).unwrap_or_default() {
                    if f.mandatory && !o.bindings.iter().any(|b| b.feature == f.name) {
                        push(
                            ErrorCategory::CompulsoryFeatureNotInitialized,
                            q.span.start,
                            format!("{class}.{}", f.name),
                            format!("mandatory feature `{}` of {class} is not initialized", f.name),
                            Site::OutPattern {
                                rule: name.clone(),
                                element: ei,
                            },
                        );
                    }
                }
            }
        }
    }
}

/// All type errors of `ast`, ordered by location.
pub fn analyze(ast: &Transformation, src: &Metamodel, tgt: &Metamodel) -> Vec<TypeError> {
    Analyzer::new(ast, src, tgt).analyze()
}

/// Type of `expr` under `env`; never fails, unresolvable parts infer Unknown.
pub fn infer_type(ast: &Transformation, src: &Metamodel, tgt: &Metamodel, expr: &Expr, env: &Env) -> InferredType {
    Analyzer::new(ast, src, tgt).infer(expr, env)
}

pub fn resolve_binding(
    ast: &Transformation,
    src: &Metamodel,
    tgt: &Metamodel,
    rule: &Rule,
    element: usize,
    binding: &Binding,
) -> Resolution {
    Analyzer::new(ast, src, tgt).resolve_binding(rule, element, binding)
}
