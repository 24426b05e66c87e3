//! Metamodels: the type system transformations are checked against.
//!
//! A metamodel is a set of classes with attributes (primitive-typed),
//! references (class-typed) and multiple inheritance. The textual format is:
//!
//! ```text
//! metamodel UML {
//!   class ActivityNode abstract extends NamedElement {
//!     ref incoming : ActivityEdge many;
//!     attr name : String mandatory;
//!   }
//! }
//! ```

use std::collections::{HashMap, HashSet};
use std::fmt;

use indexmap::IndexMap;
use serde::Serialize;
use thiserror::Error;

use crate::source::{tokenize, Cursor, Pos, Tok};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Primitive {
    String,
    Integer,
    Boolean,
}

impl Primitive {
    pub const ALL: [Primitive; 3] = [Primitive::String, Primitive::Integer, Primitive::Boolean];

    pub fn from_name(name: &str) -> Option<Primitive> {
        match name {
            "String" => Some(Primitive::String),
            "Integer" => Some(Primitive::Integer),
            "Boolean" => Some(Primitive::Boolean),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Primitive::String => "String",
            Primitive::Integer => "Integer",
            Primitive::Boolean => "Boolean",
        }
    }
}

impl fmt::Display for Primitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum FeatureKind {
    Attribute,
    Reference,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FeatureDef {
    pub name: String,
    pub kind: FeatureKind,
    /// Primitive name for attributes, class name for references.
    pub type_name: String,
    pub many: bool,
    pub mandatory: bool,
}

impl FeatureDef {
    pub fn primitive(&self) -> Option<Primitive> {
        match self.kind {
            FeatureKind::Attribute => Primitive::from_name(&self.type_name),
            FeatureKind::Reference => None,
        }
    }

    pub fn is_reference(&self) -> bool {
        self.kind == FeatureKind::Reference
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassDef {
    pub name: String,
    pub is_abstract: bool,
    pub supertypes: Vec<String>,
    pub features: Vec<FeatureDef>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Metamodel {
    pub name: String,
    classes: IndexMap<String, ClassDef>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetamodelError {
    #[error("{pos}: {message}")]
    Parse { pos: Pos, message: String },
    #[error("duplicate class `{0}`")]
    DuplicateClass(String),
    #[error("class `{class}` extends unknown class `{supertype}`")]
    UnknownSupertype { class: String, supertype: String },
    #[error("inheritance cycle through {}", .0.join(", "))]
    InheritanceCycle(Vec<String>),
    #[error("feature `{class}.{feature}` has unknown type `{type_name}`")]
    DanglingType {
        class: String,
        feature: String,
        type_name: String,
    },
    #[error("attribute `{class}.{feature}` must have a primitive type, found `{type_name}`")]
    AttributeNotPrimitive {
        class: String,
        feature: String,
        type_name: String,
    },
    #[error("reference `{class}.{feature}` must have a class type, found `{type_name}`")]
    ReferenceNotClass {
        class: String,
        feature: String,
        type_name: String,
    },
    #[error("class `{class}` sees conflicting definitions of feature `{feature}`")]
    FeatureConflict { class: String, feature: String },
    #[error("unknown class `{0}`")]
    UnknownClass(String),
}

impl Metamodel {
    /// Builds and validates a metamodel from class definitions.
    pub fn new(name: impl Into<String>, classes: Vec<ClassDef>) -> Result<Self, MetamodelError> {
        let mut map = IndexMap::new();
        for class in classes {
            if map.contains_key(&class.name) {
                return Err(MetamodelError::DuplicateClass(class.name));
            }
            map.insert(class.name.clone(), class);
        }
        let mm = Metamodel {
            name: name.into(),
            classes: map,
        };
        mm.validate()?;
        Ok(mm)
    }

    fn validate(&self) -> Result<(), MetamodelError> {
        for class in self.classes.values() {
            for sup in &class.supertypes {
                if !self.classes.contains_key(sup) {
                    return Err(MetamodelError::UnknownSupertype {
                        class: class.name.clone(),
                        supertype: sup.clone(),
                    });
                }
            }
        }
        self.check_acyclic()?;
        for class in self.classes.values() {
            for f in &class.features {
                let is_prim = Primitive::from_name(&f.type_name).is_some();
                let is_class = self.classes.contains_key(&f.type_name);
                if !is_prim && !is_class {
                    return Err(MetamodelError::DanglingType {
                        class: class.name.clone(),
                        feature: f.name.clone(),
                        type_name: f.type_name.clone(),
                    });
                }
                match f.kind {
                    FeatureKind::Attribute if !is_prim => {
                        return Err(MetamodelError::AttributeNotPrimitive {
                            class: class.name.clone(),
                            feature: f.name.clone(),
                            type_name: f.type_name.clone(),
                        })
                    }
                    FeatureKind::Reference if !is_class => {
                        return Err(MetamodelError::ReferenceNotClass {
                            class: class.name.clone(),
                            feature: f.name.clone(),
                            type_name: f.type_name.clone(),
                        })
                    }
                    _ => {}
                }
            }
        }
        for name in self.classes.keys() {
            let mut seen: HashMap<&str, &FeatureDef> = HashMap::new();
            for f in self.collect_features(name) {
                if let Some(prev) = seen.insert(&f.name, f) {
                    if prev.kind != f.kind || prev.type_name != f.type_name || prev.many != f.many {
                        return Err(MetamodelError::FeatureConflict {
                            class: name.clone(),
                            feature: f.name.clone(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    fn check_acyclic(&self) -> Result<(), MetamodelError> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Fresh,
            Active,
            Done,
        }
        fn visit<'a>(
            mm: &'a Metamodel,
            name: &'a str,
            marks: &mut HashMap<&'a str, Mark>,
            stack: &mut Vec<&'a str>,
        ) -> Result<(), MetamodelError> {
            match marks.get(name).copied().unwrap_or(Mark::Fresh) {
                Mark::Done => return Ok(()),
                Mark::Active => {
                    let from = stack.iter().position(|n| *n == name).unwrap_or(0);
                    let mut cycle: Vec<String> = stack[from..].iter().map(|s| s.to_string()).collect();
                    cycle.sort();
                    return Err(MetamodelError::InheritanceCycle(cycle));
                }
                Mark::Fresh => {}
            }
            marks.insert(name, Mark::Active);
            stack.push(name);
            for sup in &mm.classes[name].supertypes {
                visit(mm, sup, marks, stack)?;
            }
            stack.pop();
            marks.insert(name, Mark::Done);
            Ok(())
        }
        let mut marks = HashMap::new();
        for name in self.classes.keys() {
            visit(self, name, &mut marks, &mut Vec::new())?;
        }
        Ok(())
    }

    // own features, then supertypes depth-first in declaration order; may repeat names
    fn collect_features<'a>(&'a self, class: &str) -> Vec<&'a FeatureDef> {
        let mut out = Vec::new();
        let mut visited = HashSet::new();
        self.collect_into(class, &mut visited, &mut out);
        out
    }

    fn collect_into<'a>(&'a self, class: &str, visited: &mut HashSet<String>, out: &mut Vec<&'a FeatureDef>) {
        if !visited.insert(class.to_string()) {
            return;
        }
        let Some(def) = self.classes.get(class) else {
            return;
        };
        out.extend(def.features.iter());
        for sup in &def.supertypes {
            self.collect_into(sup, visited, out);
        }
    }

    pub fn class(&self, name: &str) -> Option<&ClassDef> {
        self.classes.get(name)
    }

    pub fn has_class(&self, name: &str) -> bool {
        self.classes.contains_key(name)
    }

    /// Classes in declaration order.
    pub fn classes(&self) -> impl Iterator<Item = &ClassDef> {
        self.classes.values()
    }

    pub fn class_names(&self) -> impl Iterator<Item = &str> {
        self.classes.keys().map(String::as_str)
    }

    /// True iff `sub` equals `sup` or reaches it through `extends` edges.
    pub fn is_subtype(&self, sub: &str, sup: &str) -> Result<bool, MetamodelError> {
        for n in [sub, sup] {
            if !self.has_class(n) {
                return Err(MetamodelError::UnknownClass(n.to_string()));
            }
        }
        Ok(self.conforms(sub, sup))
    }

    /// Like [`Metamodel::is_subtype`] but false for unknown names.
    pub fn conforms(&self, sub: &str, sup: &str) -> bool {
        if sub == sup {
            return self.has_class(sub);
        }
        let mut stack = vec![sub];
        let mut seen = HashSet::new();
        while let Some(n) = stack.pop() {
            if !seen.insert(n) {
                continue;
            }
            let Some(def) = self.classes.get(n) else {
                continue;
            };
            for s in &def.supertypes {
                if s == sup {
                    return true;
                }
                stack.push(s);
            }
        }
        false
    }

    /// Own plus inherited features, each name once. Own features come first,
    /// then supertypes depth-first in declaration order.
    pub fn accessible_features(&self, class: &str) -> Result<Vec<&FeatureDef>, MetamodelError> {
        if !self.has_class(class) {
            return Err(MetamodelError::UnknownClass(class.to_string()));
        }
        let mut seen = HashSet::new();
        Ok(self
            .collect_features(class)
            .into_iter()
            .filter(|f| seen.insert(f.name.as_str()))
            .collect())
    }

    pub fn feature(&self, class: &str, name: &str) -> Option<&FeatureDef> {
        self.collect_features(class).into_iter().find(|f| f.name == name)
    }

    /// Every class conforming to `class`, excluding `class` itself, in declaration order.
    pub fn strict_subclasses(&self, class: &str) -> Vec<&str> {
        self.classes
            .keys()
            .filter(|c| c.as_str() != class && self.conforms(c, class))
            .map(String::as_str)
            .collect()
    }

    /// Every distinct feature name declared anywhere, in declaration order.
    pub fn all_feature_names(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.classes
            .values()
            .flat_map(|c| c.features.iter())
            .map(|f| f.name.as_str())
            .filter(|n| seen.insert(*n))
            .collect()
    }
}

/// Parses and validates a `.mm` metamodel source.
pub fn load_metamodel(text: &str) -> Result<Metamodel, MetamodelError> {
    let perr = |(pos, message): (Pos, String)| MetamodelError::Parse { pos, message };
    let toks = tokenize(text, "#").map_err(perr)?;
    let mut cur = Cursor::new(toks);
    cur.expect_keyword("metamodel").map_err(perr)?;
    let (name, _) = cur.expect_ident("metamodel name").map_err(perr)?;
    cur.expect_punct("{").map_err(perr)?;
    let mut classes = Vec::new();
    while !cur.is_punct("}") {
        classes.push(parse_class(&mut cur).map_err(perr)?);
    }
    cur.expect_punct("}").map_err(perr)?;
    if !cur.at_eof() {
        return Err(perr(cur.unexpected("end of input")));
    }
    Metamodel::new(name, classes)
}

fn parse_class(cur: &mut Cursor) -> Result<ClassDef, (Pos, String)> {
    cur.expect_keyword("class")?;
    let (name, _) = cur.expect_ident("class name")?;
    let is_abstract = cur.eat_keyword("abstract");
    let mut supertypes = Vec::new();
    if cur.eat_keyword("extends") {
        loop {
            supertypes.push(cur.expect_ident("supertype name")?.0);
            if !cur.eat_punct(",") {
                break;
            }
        }
    }
    cur.expect_punct("{")?;
    let mut features = Vec::new();
    while !cur.is_punct("}") {
        let kind = match cur.peek() {
            Tok::Ident(s) if s == "attr" => FeatureKind::Attribute,
            Tok::Ident(s) if s == "ref" => FeatureKind::Reference,
            _ => return Err(cur.unexpected("`attr`, `ref` or `}`")),
        };
        cur.next();
        let (fname, _) = cur.expect_ident("feature name")?;
        cur.expect_punct(":")?;
        let (type_name, _) = cur.expect_ident("feature type")?;
        let mut many = false;
        let mut mandatory = false;
        loop {
            if cur.eat_keyword("many") {
                many = true;
            } else if cur.eat_keyword("mandatory") {
                mandatory = true;
            } else {
                break;
            }
        }
        cur.expect_punct(";")?;
        if features.iter().any(|f: &FeatureDef| f.name == fname) {
            return Err((cur.prev_span().start, format!("duplicate feature `{fname}` in class `{name}`")));
        }
        features.push(FeatureDef {
            name: fname,
            kind,
            type_name,
            many,
            mandatory,
        });
    }
    cur.expect_punct("}")?;
    Ok(ClassDef {
        name,
        is_abstract,
        supertypes,
        features,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn uml() -> Metamodel {
        load_metamodel(fixtures::UML_AD_MM).unwrap()
    }

    #[test]
    fn loads_uml_fixture() {
        let mm = uml();
        assert_eq!(mm.name, "UML");
        for c in ["Activity", "ActivityPartition", "ActivityNode", "ObjectNode"] {
            assert!(mm.has_class(c), "{c}");
        }
        assert!(!mm.has_class("Comment"));
    }

    #[test]
    fn empty_metamodel() {
        let mm = load_metamodel("metamodel M {}").unwrap();
        assert_eq!(mm.classes().count(), 0);
    }

    #[test]
    fn two_class_cycle_names_both() {
        let err = load_metamodel("metamodel M { class A extends B { } class B extends A { } }").unwrap_err();
        assert_eq!(err, MetamodelError::InheritanceCycle(vec!["A".into(), "B".into()]));
    }

    #[test]
    fn dangling_feature_type() {
        let err = load_metamodel("metamodel M { class A { ref b : Missing; } }").unwrap_err();
        assert!(matches!(err, MetamodelError::DanglingType { ref type_name, .. } if type_name == "Missing"));
    }

    #[test]
    fn attribute_must_be_primitive() {
        let err = load_metamodel("metamodel M { class A { attr b : A; } }").unwrap_err();
        assert!(matches!(err, MetamodelError::AttributeNotPrimitive { .. }));
        let err = load_metamodel("metamodel M { class A { ref b : String; } }").unwrap_err();
        assert!(matches!(err, MetamodelError::ReferenceNotClass { .. }));
    }

    #[test]
    fn parse_error_has_position() {
        let err = load_metamodel("metamodel M {\n  class A { attr x String; }\n}").unwrap_err();
        match err {
            MetamodelError::Parse { pos, .. } => assert_eq!(pos, Pos::new(2, 20)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn subtyping() {
        let mm = uml();
        assert!(mm.is_subtype("ObjectNode", "ActivityNode").unwrap());
        assert!(mm.is_subtype("Activity", "Activity").unwrap());
        assert!(!mm.is_subtype("Activity", "ObjectNode").unwrap());
        assert!(mm.is_subtype("OpaqueAction", "NamedElement").unwrap());
        assert_eq!(
            mm.is_subtype("Comment", "Activity"),
            Err(MetamodelError::UnknownClass("Comment".into()))
        );
    }

    #[test]
    fn activity_sees_name_and_partition() {
        let mm = uml();
        let names: Vec<_> = mm
            .accessible_features("Activity")
            .unwrap()
            .iter()
            .map(|f| f.name.as_str())
            .collect();
        assert!(names.contains(&"name"));
        assert!(names.contains(&"partition"));
        // own features precede inherited ones
        assert_eq!(names.last(), Some(&"name"));
    }

    #[test]
    fn featureless_class() {
        let mm = load_metamodel("metamodel M { class A { } }").unwrap();
        assert!(mm.accessible_features("A").unwrap().is_empty());
    }

    #[test]
    fn diamond_features_appear_once() {
        let src = "metamodel M {
            class Top { attr id : String; }
            class L extends Top { attr l : Integer; }
            class R extends Top { attr r : Integer; }
            class D extends L, R { attr d : Boolean; }
        }";
        let mm = load_metamodel(src).unwrap();
        let names: Vec<_> = mm
            .accessible_features("D")
            .unwrap()
            .iter()
            .map(|f| f.name.clone())
            .collect();
        assert_eq!(names, vec!["d", "l", "id", "r"]);
    }

    #[test]
    fn conflicting_inherited_features_rejected() {
        let src = "metamodel M {
            class L { attr x : Integer; }
            class R { attr x : String; }
            class D extends L, R { }
        }";
        assert_eq!(
            load_metamodel(src).unwrap_err(),
            MetamodelError::FeatureConflict {
                class: "D".into(),
                feature: "x".into()
            }
        );
    }

    #[test]
    fn strict_subclasses_of_activity_node() {
        let mm = uml();
        let subs = mm.strict_subclasses("ActivityNode");
        assert!(subs.contains(&"ObjectNode"));
        assert!(subs.contains(&"OpaqueAction"));
        assert!(!subs.contains(&"ActivityNode"));
        assert!(!subs.contains(&"Activity"));
    }
}
