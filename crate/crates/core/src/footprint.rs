//! Metamodel footprints: which classes and features a transformation uses.
//!
//! Elements are names as written in the transformation, so misspelled or
//! missing classes still count. A feature is recorded as `Class.feature` when
//! the receiver's class is syntactically evident (a pattern variable, `self`,
//! or an `oclAsType` result) and as `*.feature` otherwise.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::mtl::{Expr, ExprKind, QualifiedName, Transformation, TypeExpr, TypeTestKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Source,
    Target,
}

impl FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "source" => Ok(Side::Source),
            "target" => Ok(Side::Target),
            other => Err(format!("unknown side `{other}` (expected source or target)")),
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Source => "source",
            Side::Target => "target",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Footprint {
    pub elements: BTreeSet<String>,
}

impl Footprint {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, e: &str) -> bool {
        self.elements.contains(e)
    }

    /// Size of the symmetric difference.
    pub fn distance(&self, other: &Footprint) -> usize {
        self.elements.symmetric_difference(&other.elements).count()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("metamodel headers differ: {left} vs {right}")]
pub struct HeaderMismatch {
    pub left: String,
    pub right: String,
}

/// Both sides' footprints of one transformation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Footprints {
    pub source: Footprint,
    pub target: Footprint,
}

impl Footprints {
    pub fn of(ast: &Transformation) -> Self {
        let mut c = Collector {
            ast,
            fp: Footprints::default(),
        };
        c.run();
        c.fp
    }

    pub fn side(&self, side: Side) -> &Footprint {
        match side {
            Side::Source => &self.source,
            Side::Target => &self.target,
        }
    }

    pub fn delta(&self, other: &Footprints) -> usize {
        self.source.distance(&other.source) + self.target.distance(&other.target)
    }
}

pub fn extract_footprint(ast: &Transformation, side: Side) -> Footprint {
    let fp = Footprints::of(ast);
    match side {
        Side::Source => fp.source,
        Side::Target => fp.target,
    }
}

/// `|SFP(a) Δ SFP(b)| + |TFP(a) Δ TFP(b)|`.
pub fn footprint_delta(original: &Transformation, candidate: &Transformation) -> Result<usize, HeaderMismatch> {
    let header = |t: &Transformation| format!("{} -> {}", t.source.metamodel, t.target.metamodel);
    if original.source.metamodel != candidate.source.metamodel || original.target.metamodel != candidate.target.metamodel
    {
        return Err(HeaderMismatch {
            left: header(original),
            right: header(candidate),
        });
    }
    Ok(Footprints::of(original).delta(&Footprints::of(candidate)))
}

struct Collector<'a> {
    ast: &'a Transformation,
    fp: Footprints,
}

type Scope = HashMap<String, Option<QualifiedName>>;

impl Collector<'_> {
    fn side_of(&self, q: &QualifiedName) -> Option<Side> {
        if q.metamodel == self.ast.source.metamodel {
            Some(Side::Source)
        } else if q.metamodel == self.ast.target.metamodel {
            Some(Side::Target)
        } else {
            None
        }
    }

    fn add(&mut self, side: Side, element: String) {
        match side {
            Side::Source => self.fp.source.elements.insert(element),
            Side::Target => self.fp.target.elements.insert(element),
        };
    }

    fn class(&mut self, q: &QualifiedName) {
        if let Some(side) = self.side_of(q) {
            self.add(side, q.class.clone());
        }
    }

    fn feature(&mut self, host: Option<&QualifiedName>, feature: &str) {
        match host.and_then(|q| self.side_of(q).map(|s| (q, s))) {
            Some((q, side)) => self.add(side, format!("{}.{feature}", q.class)),
            None => self.add(Side::Source, format!("*.{feature}")),
        }
    }

    fn run(&mut self) {
        let ast = self.ast;
        for h in &ast.helpers {
            self.class(&h.context);
            if let TypeExpr::Class(q) = h.ty.element() {
                self.class(q);
            }
            let mut scope = Scope::new();
            scope.insert("self".into(), Some(h.context.clone()));
            self.expr(&h.body, &scope);
        }
        for r in &ast.rules {
            self.class(&r.input.class);
            let mut scope = Scope::new();
            for o in &r.outputs {
                self.class(&o.class);
                scope.insert(o.var.clone(), Some(o.class.clone()));
            }
            scope.insert(r.input.var.clone(), Some(r.input.class.clone()));
            if let Some(g) = &r.input.guard {
                self.expr(g, &scope);
            }
            for o in &r.outputs {
                for b in &o.bindings {
                    self.feature(Some(&o.class), &b.feature);
                    self.expr(&b.value, &scope);
                }
            }
        }
    }

    /// Records `e`'s elements (helper calls contribute none); returns its class when syntactically evident.
    fn expr(&mut self, e: &Expr, scope: &Scope) -> Option<QualifiedName> {
        match &e.kind {
            ExprKind::Var(v) => scope.get(v).cloned().flatten(),
            ExprKind::Nav { recv, feature } => {
                let host = self.expr(recv, scope);
                self.feature(host.as_ref(), feature);
                None
            }
            ExprKind::TypeTest { recv, test, ty } => {
                self.expr(recv, scope);
                self.class(ty);
                (*test == TypeTestKind::AsType).then(|| ty.clone())
            }
            ExprKind::Iterate { recv, var, body, .. } => {
                self.expr(recv, scope);
                let mut inner = scope.clone();
                inner.insert(var.clone(), None);
                self.expr(body, &inner);
                None
            }
            _ => {
                for c in e.children() {
                    self.expr(c, scope);
                }
                None
            }
        }
    }
}
