//! Edit operations and patches.
//!
//! An [`EditOperation`] names a rule, a structural [`Locator`] inside it, the
//! text currently found there and its replacement. Applying an operation whose
//! locator does not resolve, or whose `old` no longer matches, leaves the AST
//! untouched and records the reason: later operations in a patch may target
//! fragments that earlier ones already changed.

mod apply;
mod sample;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use apply::{apply_edit, apply_edit_in_place, apply_patch, fragment, Outcome};
pub use sample::{sample_edit, sample_edit_of_kind, SampleError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EditKind {
    CreationOfBinding,
    TypeOfSourcePatternElement,
    TypeOfTargetPatternElement,
    TypeOfVariableOrCollection,
    TypeParameter,
    NavigationExpression,
    TargetOfBinding,
    PredefinedOperationCall,
    CollectionOperationCall,
    IteratorCall,
}

impl EditKind {
    pub const ALL: [EditKind; 10] = [
        EditKind::CreationOfBinding,
        EditKind::TypeOfSourcePatternElement,
        EditKind::TypeOfTargetPatternElement,
        EditKind::TypeOfVariableOrCollection,
        EditKind::TypeParameter,
        EditKind::NavigationExpression,
        EditKind::TargetOfBinding,
        EditKind::PredefinedOperationCall,
        EditKind::CollectionOperationCall,
        EditKind::IteratorCall,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EditKind::CreationOfBinding => "CreationOfBinding",
            EditKind::TypeOfSourcePatternElement => "TypeOfSourcePatternElement",
            EditKind::TypeOfTargetPatternElement => "TypeOfTargetPatternElement",
            EditKind::TypeOfVariableOrCollection => "TypeOfVariableOrCollection",
            EditKind::TypeParameter => "TypeParameter",
            EditKind::NavigationExpression => "NavigationExpression",
            EditKind::TargetOfBinding => "TargetOfBinding",
            EditKind::PredefinedOperationCall => "PredefinedOperationCall",
            EditKind::CollectionOperationCall => "CollectionOperationCall",
            EditKind::IteratorCall => "IteratorCall",
        }
    }

    /// Kinds that change a pattern, variable or parameter type.
    pub fn is_type_modification(self) -> bool {
        matches!(
            self,
            EditKind::TypeOfSourcePatternElement
                | EditKind::TypeOfTargetPatternElement
                | EditKind::TypeOfVariableOrCollection
                | EditKind::TypeParameter
        )
    }
}

impl fmt::Display for EditKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where in a rule an operation applies. Expression paths index into a
/// binding's value: receiver first, then arguments or iterator body.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "target", rename_all = "snake_case")]
pub enum Locator {
    InPattern,
    OutPattern { element: usize },
    Binding { element: usize, binding: usize },
    NewBinding { element: usize },
    Expr { element: usize, binding: usize, path: Vec<usize> },
    HelperType { helper: usize },
}

impl fmt::Display for Locator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Locator::InPattern => f.write_str("from"),
            Locator::OutPattern { element } => write!(f, "to#{element}"),
            Locator::Binding { element, binding } => write!(f, "to#{element}.binding#{binding}"),
            Locator::NewBinding { element } => write!(f, "to#{element}.new-binding"),
            Locator::Expr { element, binding, path } => {
                write!(f, "to#{element}.binding#{binding}.rhs")?;
                for i in path {
                    write!(f, "/{i}")?;
                }
                Ok(())
            }
            Locator::HelperType { helper } => write!(f, "helper#{helper}.type"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EditOperation {
    pub kind: EditKind,
    pub rule: String,
    pub locator: Locator,
    pub old: String,
    pub new: String,
}

impl fmt::Display for EditOperation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}({}, {}, `{}` -> `{}`)",
            self.kind, self.rule, self.locator, self.old, self.new
        )
    }
}

/// An ordered sequence of edit operations, applied left to right.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Patch {
    pub ops: Vec<EditOperation>,
}

impl Patch {
    pub fn new(ops: Vec<EditOperation>) -> Self {
        Patch { ops }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("patch serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Patch> {
        serde_json::from_str(text)
    }
}
