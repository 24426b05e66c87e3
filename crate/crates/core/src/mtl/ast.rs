use std::collections::HashSet;
use std::fmt;

use crate::metamodel::Primitive;
use crate::source::Span;

/// Iterator operations (`recv->op(v | body)`).
pub const ITERATOR_OPS: [&str; 5] = ["collect", "select", "reject", "exists", "forAll"];
/// Collection operations (`recv->op(args)`).
pub const COLLECTION_OPS: [&str; 5] = ["flatten", "includes", "size", "first", "isEmpty"];
/// Predefined operations on scalars (`recv.op()`).
pub const PREDEFINED_OPS: [&str; 2] = ["toString", "size"];

pub(crate) const KEYWORDS: [&str; 11] = [
    "module", "create", "from", "to", "rule", "helper", "context", "def", "Sequence", "true", "false",
];

/// Binds a model alias (`IN`, `OUT`) to a metamodel name.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModelDecl {
    pub alias: String,
    pub metamodel: String,
}

/// `Metamodel!Class`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QualifiedName {
    pub metamodel: String,
    pub class: String,
    pub span: Span,
}

impl QualifiedName {
    pub fn new(metamodel: impl Into<String>, class: impl Into<String>) -> Self {
        QualifiedName {
            metamodel: metamodel.into(),
            class: class.into(),
            span: Span::default(),
        }
    }
}

impl fmt::Display for QualifiedName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}!{}", self.metamodel, self.class)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TypeExpr {
    Primitive(Primitive),
    Class(QualifiedName),
    Sequence(Box<TypeExpr>),
}

impl TypeExpr {
    /// The innermost non-collection type.
    pub fn element(&self) -> &TypeExpr {
        match self {
            TypeExpr::Sequence(inner) => inner.element(),
            other => other,
        }
    }

    pub fn element_mut(&mut self) -> &mut TypeExpr {
        match self {
            TypeExpr::Sequence(inner) => inner.element_mut(),
            other => other,
        }
    }
}

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeExpr::Primitive(p) => write!(f, "{p}"),
            TypeExpr::Class(q) => write!(f, "{q}"),
            TypeExpr::Sequence(inner) => write!(f, "Sequence({inner})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Transformation {
    pub name: String,
    pub target: ModelDecl,
    pub source: ModelDecl,
    pub helpers: Vec<Helper>,
    pub rules: Vec<Rule>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Helper {
    pub context: QualifiedName,
    pub name: String,
    pub ty: TypeExpr,
    pub body: Expr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub name: String,
    pub input: InPattern,
    pub outputs: Vec<OutPattern>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InPattern {
    pub var: String,
    pub class: QualifiedName,
    pub guard: Option<Expr>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OutPattern {
    pub var: String,
    pub class: QualifiedName,
    pub bindings: Vec<Binding>,
    pub span: Span,
}

/// `feature <- value`
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Binding {
    pub feature: String,
    pub value: Expr,
    pub span: Span,
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <- {}", self.feature, self.value)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TypeTestKind {
    IsKindOf,
    AsType,
}

impl TypeTestKind {
    pub fn keyword(self) -> &'static str {
        match self {
            TypeTestKind::IsKindOf => "oclIsKindOf",
            TypeTestKind::AsType => "oclAsType",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "oclIsKindOf" => Some(TypeTestKind::IsKindOf),
            "oclAsType" => Some(TypeTestKind::AsType),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Literal {
    String(String),
    Integer(i64),
    Boolean(bool),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExprKind {
    Var(String),
    Nav {
        recv: Box<Expr>,
        feature: String,
    },
    HelperCall {
        recv: Box<Expr>,
        helper: String,
    },
    /// Predefined scalar operation: `recv.op(args)`.
    OpCall {
        recv: Box<Expr>,
        op: String,
        args: Vec<Expr>,
    },
    CollectionOp {
        recv: Box<Expr>,
        op: String,
        args: Vec<Expr>,
    },
    Iterate {
        recv: Box<Expr>,
        op: String,
        var: String,
        body: Box<Expr>,
    },
    TypeTest {
        recv: Box<Expr>,
        test: TypeTestKind,
        ty: QualifiedName,
    },
    Literal(Literal),
    Sequence(Vec<Expr>),
}

impl Expr {
    pub fn new(kind: ExprKind) -> Self {
        Expr {
            kind,
            span: Span::default(),
        }
    }

    pub fn var(name: &str) -> Self {
        Expr::new(ExprKind::Var(name.to_string()))
    }

    pub fn nav(recv: Expr, feature: &str) -> Self {
        Expr::new(ExprKind::Nav {
            recv: Box::new(recv),
            feature: feature.to_string(),
        })
    }

    /// Direct children in path order: receiver first, then arguments or body.
    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::Var(_) | ExprKind::Literal(_) => vec![],
            ExprKind::Nav { recv, .. } | ExprKind::HelperCall { recv, .. } | ExprKind::TypeTest { recv, .. } => {
                vec![recv]
            }
            ExprKind::OpCall { recv, args, .. } | ExprKind::CollectionOp { recv, args, .. } => {
                std::iter::once(&**recv).chain(args.iter()).collect()
            }
            ExprKind::Iterate { recv, body, .. } => vec![recv, body],
            ExprKind::Sequence(elems) => elems.iter().collect(),
        }
    }

    pub fn children_mut(&mut self) -> Vec<&mut Expr> {
        match &mut self.kind {
            ExprKind::Var(_) | ExprKind::Literal(_) => vec![],
            ExprKind::Nav { recv, .. } | ExprKind::HelperCall { recv, .. } | ExprKind::TypeTest { recv, .. } => {
                vec![recv]
            }
            ExprKind::OpCall { recv, args, .. } | ExprKind::CollectionOp { recv, args, .. } => {
                std::iter::once(&mut **recv).chain(args.iter_mut()).collect()
            }
            ExprKind::Iterate { recv, body, .. } => vec![recv, body],
            ExprKind::Sequence(elems) => elems.iter_mut().collect(),
        }
    }

    pub fn at_path(&self, path: &[usize]) -> Option<&Expr> {
        match path.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.children().get(i).and_then(|c| c.at_path(rest)),
        }
    }

    pub fn at_path_mut(&mut self, path: &[usize]) -> Option<&mut Expr> {
        match path.split_first() {
            None => Some(self),
            Some((&i, rest)) => {
                let mut kids = self.children_mut();
                if i < kids.len() {
                    kids.swap_remove(i).at_path_mut(rest)
                } else {
                    None
                }
            }
        }
    }

    /// Pre-order walk yielding every node with its path from `self`.
    pub fn walk(&self) -> Vec<(Vec<usize>, &Expr)> {
        let mut out = Vec::new();
        fn go<'a>(e: &'a Expr, path: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, &'a Expr)>) {
            out.push((path.clone(), e));
            for (i, c) in e.children().into_iter().enumerate() {
                path.push(i);
                go(c, path, out);
                path.pop();
            }
        }
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn for_each_mut(&mut self, f: &mut dyn FnMut(&mut Expr)) {
        f(self);
        for c in self.children_mut() {
            c.for_each_mut(f);
        }
    }

    /// Last feature or helper identifier the expression navigates, looking
    /// through calls and iterators to their receivers.
    pub fn tail_name(&self) -> Option<&str> {
        match &self.kind {
            ExprKind::Nav { feature, .. } => Some(feature),
            ExprKind::HelperCall { helper, .. } => Some(helper),
            ExprKind::OpCall { recv, .. }
            | ExprKind::CollectionOp { recv, .. }
            | ExprKind::Iterate { recv, .. }
            | ExprKind::TypeTest { recv, .. } => recv.tail_name(),
            ExprKind::Var(_) | ExprKind::Literal(_) | ExprKind::Sequence(_) => None,
        }
    }

    /// Replaces every span in the tree.
    pub fn respan(&mut self, span: Span) {
        self.for_each_mut(&mut |e| {
            e.span = span;
            if let ExprKind::TypeTest { ty, .. } = &mut e.kind {
                ty.span = span;
            }
        });
    }
}

impl Rule {
    /// Every binding of the rule as `(element index, binding index, binding)`.
    pub fn bindings(&self) -> impl Iterator<Item = (usize, usize, &Binding)> {
        self.outputs
            .iter()
            .enumerate()
            .flat_map(|(e, o)| o.bindings.iter().enumerate().map(move |(b, bd)| (e, b, bd)))
    }
}

impl Transformation {
    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.name == name)
    }

    pub fn rule_mut(&mut self, name: &str) -> Option<&mut Rule> {
        self.rules.iter_mut().find(|r| r.name == name)
    }

    pub fn helper_names(&self) -> HashSet<String> {
        self.helpers.iter().map(|h| h.name.clone()).collect()
    }

    /// Re-classifies `x.name` navigations: a name that matches a declared
    /// helper becomes a [`ExprKind::HelperCall`], anything else a plain
    /// [`ExprKind::Nav`]. The parser and every AST edit keep this normal form.
    pub fn normalize_helper_calls(&mut self) {
        let names = self.helper_names();
        let fix = &mut |e: &mut Expr| {
            let kind = std::mem::replace(&mut e.kind, ExprKind::Literal(Literal::Boolean(false)));
            e.kind = match kind {
                ExprKind::Nav { recv, feature } if names.contains(&feature) => ExprKind::HelperCall { recv, helper: feature },
                ExprKind::HelperCall { recv, helper } if !names.contains(&helper) => ExprKind::Nav { recv, feature: helper },
                other => other,
            };
        };
        for h in &mut self.helpers {
            h.body.for_each_mut(fix);
        }
        for r in &mut self.rules {
            if let Some(g) = &mut r.input.guard {
                g.for_each_mut(fix);
            }
            for o in &mut r.outputs {
                for b in &mut o.bindings {
                    b.value.for_each_mut(fix);
                }
            }
        }
    }
}
