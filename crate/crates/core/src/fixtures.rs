//! Bundled metamodels and transformations.
//!
//! The three evaluation problems grade metamodel complexity: `class2table`
//! (flat), `pnml2pn` (moderate inheritance) and `uml2bpmn` (inheritance-heavy).
//! The `uml2bpmn_*` excerpt files hold the worked example: the faulty excerpt,
//! the excerpt after the two-operation patch, and the ground-truth original.

use crate::edits::{EditKind, EditOperation, Locator, Patch};
use crate::metamodel::{load_metamodel, Metamodel};
use crate::mtl::{parse_transformation, Transformation};

pub const UML_AD_MM: &str = include_str!("../fixtures/uml_ad.mm");
pub const INTALIO_BPMN_MM: &str = include_str!("../fixtures/intalio_bpmn.mm");
pub const CLASS_DIAGRAM_MM: &str = include_str!("../fixtures/class_diagram.mm");
pub const RELATIONAL_MM: &str = include_str!("../fixtures/relational.mm");
pub const PNML_MM: &str = include_str!("../fixtures/pnml.mm");
pub const PETRINET_MM: &str = include_str!("../fixtures/petrinet.mm");

pub const UML2BPMN_EXCERPT: &str = include_str!("../fixtures/uml2bpmn_excerpt.mtl");
pub const UML2BPMN_PATCHED: &str = include_str!("../fixtures/uml2bpmn_patched.mtl");
pub const UML2BPMN_ORIGINAL: &str = include_str!("../fixtures/uml2bpmn_original.mtl");

pub const UML2BPMN: &str = include_str!("../fixtures/uml2bpmn.mtl");
pub const CLASS2TABLE: &str = include_str!("../fixtures/class2table.mtl");
pub const PNML2PN: &str = include_str!("../fixtures/pnml2pn.mtl");

/// A correct transformation together with its metamodels.
#[derive(Clone, Debug)]
pub struct Problem {
    pub name: &'static str,
    pub transformation: Transformation,
    pub source_mm: Metamodel,
    pub target_mm: Metamodel,
}

const PROBLEMS: &[(&str, &str, &str, &str)] = &[
    ("class2table", CLASS2TABLE, CLASS_DIAGRAM_MM, RELATIONAL_MM),
    ("pnml2pn", PNML2PN, PNML_MM, PETRINET_MM),
    ("uml2bpmn", UML2BPMN, UML_AD_MM, INTALIO_BPMN_MM),
    ("uml2bpmn_excerpt", UML2BPMN_ORIGINAL, UML_AD_MM, INTALIO_BPMN_MM),
];

/// Names accepted by [`problem`].
pub fn problem_names() -> impl Iterator<Item = &'static str> {
    PROBLEMS.iter().map(|p| p.0)
}

/// Loads a bundled problem by name. Bundled sources always parse.
pub fn problem(name: &str) -> Option<Problem> {
    let &(name, mtl, src, tgt) = PROBLEMS.iter().find(|p| p.0 == name)?;
    Some(Problem {
        name,
        transformation: parse_transformation(mtl).expect("bundled transformation parses"),
        source_mm: load_metamodel(src).expect("bundled metamodel loads"),
        target_mm: load_metamodel(tgt).expect("bundled metamodel loads"),
    })
}

pub fn uml() -> Metamodel {
    load_metamodel(UML_AD_MM).expect("bundled metamodel loads")
}

pub fn intalio() -> Metamodel {
    load_metamodel(INTALIO_BPMN_MM).expect("bundled metamodel loads")
}

pub fn excerpt() -> Transformation {
    parse_transformation(UML2BPMN_EXCERPT).expect("bundled transformation parses")
}

pub fn patched_excerpt() -> Transformation {
    parse_transformation(UML2BPMN_PATCHED).expect("bundled transformation parses")
}

pub fn original_excerpt() -> Transformation {
    parse_transformation(UML2BPMN_ORIGINAL).expect("bundled transformation parses")
}

/// The two-operation patch that turns the faulty excerpt into the patched one.
pub fn excerpt_patch() -> Patch {
    Patch::new(vec![
        EditOperation {
            kind: EditKind::TargetOfBinding,
            rule: "activity2diagram".into(),
            locator: Locator::Binding { element: 0, binding: 0 },
            old: "artifacts".into(),
            new: "documentation".into(),
        },
        EditOperation {
            kind: EditKind::TypeOfSourcePatternElement,
            rule: "activitypartition2pool".into(),
            locator: Locator::InPattern,
            old: "Comment".into(),
            new: "Activity".into(),
        },
    ])
}
