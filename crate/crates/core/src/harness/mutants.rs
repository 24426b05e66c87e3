use std::collections::{BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use super::HarnessError;
use crate::analyzer::{analyze, ErrorCategory};
use crate::edits::{apply_edit, apply_edit_in_place, fragment, EditKind, EditOperation, Locator, Outcome};
use crate::metamodel::Metamodel;
use crate::mtl::{Expr, ExprKind, Transformation, COLLECTION_OPS, ITERATOR_OPS, PREDEFINED_OPS};

/// A single edit that injects an error of `category` into a clean transformation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Mutant {
    pub category: ErrorCategory,
    pub edit: EditOperation,
    /// Module name of the transformation the edit applies to.
    pub origin: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct MutantSet {
    pub mutants: Vec<Mutant>,
    /// Requested categories no candidate edit could produce.
    pub skipped: Vec<ErrorCategory>,
}

/// A candidate edit with the error categories it introduces.
#[derive(Clone, Debug)]
pub struct Candidate {
    pub edit: EditOperation,
    pub categories: BTreeSet<ErrorCategory>,
    /// Categories of the errors reported in the edited rule itself.
    pub local: BTreeSet<ErrorCategory>,
    /// Whether some error is reported outside the edited rule.
    pub spills: bool,
}

/// Plausible misspelling used to produce names that exist nowhere.
fn typo(name: &str) -> Option<String> {
    let mut chars: Vec<char> = name.chars().collect();
    (chars.len() > 1).then(|| {
        chars.pop();
        chars.into_iter().collect()
    })
}

fn with_typo(mut pool: Vec<String>, old: &str) -> Vec<String> {
    pool.extend(typo(old));
    pool.sort();
    pool.dedup();
    pool.retain(|v| v != old);
    pool
}

fn feature_names(mms: &[&Metamodel]) -> Vec<String> {
    let mut out: Vec<String> = mms.iter().flat_map(|m| m.all_feature_names()).map(str::to_string).collect();
    out.sort();
    out.dedup();
    out
}

fn op(kind: EditKind, rule: &str, locator: Locator, old: &str, new: String) -> EditOperation {
    EditOperation {
        kind,
        rule: rule.to_string(),
        locator,
        old: old.to_string(),
        new,
    }
}

/// Every single edit over the rules' patterns, binding targets and binding
/// expressions, drawing replacement names from both metamodels plus one
/// misspelling of the current name. Binding creation and helpers are left
/// alone: undoing the former needs a deletion.
pub fn candidate_edits(ast: &Transformation, src: &Metamodel, tgt: &Metamodel) -> Vec<EditOperation> {
    let classes: Vec<String> = src.class_names().chain(tgt.class_names()).map(str::to_string).collect();
    let qualified: Vec<String> = src
        .class_names()
        .map(|c| format!("{}!{c}", ast.source.metamodel))
        .chain(tgt.class_names().map(|c| format!("{}!{c}", ast.target.metamodel)))
        .collect();
    let src_features = feature_names(&[src]);
    let tgt_features = feature_names(&[tgt]);
    let ops_of = |kind: EditKind| -> Vec<String> {
        let set: &[&str] = match kind {
            EditKind::PredefinedOperationCall => &PREDEFINED_OPS,
            EditKind::CollectionOperationCall => &COLLECTION_OPS,
            _ => &ITERATOR_OPS,
        };
        set.iter().map(|s| s.to_string()).collect()
    };

    let mut out = Vec::new();
    for r in &ast.rules {
        let rn = r.name.as_str();
        for v in with_typo(classes.clone(), &r.input.class.class) {
            out.push(op(EditKind::TypeOfSourcePatternElement, rn, Locator::InPattern, &r.input.class.class, v));
        }
        for (e, o) in r.outputs.iter().enumerate() {
            for v in with_typo(classes.clone(), &o.class.class) {
                out.push(op(
                    EditKind::TypeOfTargetPatternElement,
                    rn,
                    Locator::OutPattern { element: e },
                    &o.class.class,
                    v,
                ));
            }
        }
        for (e, b, binding) in r.bindings() {
            for v in with_typo(tgt_features.clone(), &binding.feature) {
                out.push(op(
                    EditKind::TargetOfBinding,
                    rn,
                    Locator::Binding { element: e, binding: b },
                    &binding.feature,
                    v,
                ));
            }
            for (path, node) in binding.value.walk() {
                let at = || Locator::Expr {
                    element: e,
                    binding: b,
                    path: path.clone(),
                };
                match &node.kind {
                    ExprKind::Nav { recv, feature } => {
                        let old = node.to_string();
                        for g in with_typo(src_features.clone(), feature) {
                            let new = Expr::nav((**recv).clone(), &g).to_string();
                            out.push(op(EditKind::NavigationExpression, rn, at(), &old, new));
                        }
                    }
                    ExprKind::TypeTest { ty, .. } => {
                        let old = ty.to_string();
                        for v in with_typo(qualified.clone(), &old) {
                            out.push(op(EditKind::TypeParameter, rn, at(), &old, v));
                        }
                    }
                    ExprKind::OpCall { op: name, .. }
                    | ExprKind::CollectionOp { op: name, .. }
                    | ExprKind::Iterate { op: name, .. } => {
                        let kind = match node.kind {
                            ExprKind::OpCall { .. } => EditKind::PredefinedOperationCall,
                            ExprKind::CollectionOp { .. } => EditKind::CollectionOperationCall,
                            _ => EditKind::IteratorCall,
                        };
                        for v in with_typo(ops_of(kind), name) {
                            out.push(op(kind, rn, at(), name, v));
                        }
                    }
                    _ => {}
                }
            }
        }
    }
    out
}

/// Candidate edits that apply, with the categories of the errors they cause.
pub fn classify_candidates(ast: &Transformation, src: &Metamodel, tgt: &Metamodel) -> Vec<Candidate> {
    candidate_edits(ast, src, tgt)
        .into_iter()
        .filter_map(|edit| {
            let (mutated, outcome) = apply_edit(ast, &edit);
            if !outcome.is_applied() {
                return None;
            }
            let errors = analyze(&mutated, src, tgt);
            let categories: BTreeSet<ErrorCategory> = errors.iter().map(|e| e.category).collect();
            let mine = |e: &&crate::analyzer::TypeError| e.rule.as_deref() == Some(edit.rule.as_str());
            let local: BTreeSet<ErrorCategory> = errors.iter().filter(mine).map(|e| e.category).collect();
            let spills = errors.iter().any(|e| !mine(&e));
            (!categories.is_empty()).then_some(Candidate {
                edit,
                categories,
                local,
                spills,
            })
        })
        .collect()
}

/// Coarse position of an edit: two mutants never share one.
fn site_key(op: &EditOperation) -> (String, usize, usize) {
    let (e, b) = match &op.locator {
        Locator::InPattern => (usize::MAX, usize::MAX),
        Locator::OutPattern { element } | Locator::NewBinding { element } => (*element, usize::MAX),
        Locator::Binding { element, binding } | Locator::Expr { element, binding, .. } => (*element, *binding),
        Locator::HelperType { helper } => (usize::MAX - 1, *helper),
    };
    (op.rule.clone(), e, b)
}

/// One mutant per requested category, at distinct sites. The category must
/// show up in the rule the edit touches, since repairs only edit rules that
/// carry errors. Edits whose errors all fall in the category and stay in that
/// rule are preferred.
pub fn generate_mutants<R: Rng + ?Sized>(
    original: &Transformation,
    src: &Metamodel,
    tgt: &Metamodel,
    categories: &[ErrorCategory],
    rng: &mut R,
) -> Result<MutantSet, HarnessError> {
    let candidates = clean_candidates(original, src, tgt)?;
    Ok(pick_mutants(original, &candidates, categories, rng))
}

pub(crate) fn clean_candidates(
    original: &Transformation,
    src: &Metamodel,
    tgt: &Metamodel,
) -> Result<Vec<Candidate>, HarnessError> {
    let errors = analyze(original, src, tgt);
    if !errors.is_empty() {
        return Err(HarnessError::NotClean {
            name: original.name.clone(),
            errors: errors.len(),
        });
    }
    Ok(classify_candidates(original, src, tgt))
}

pub(crate) fn pick_mutants<R: Rng + ?Sized>(
    original: &Transformation,
    candidates: &[Candidate],
    categories: &[ErrorCategory],
    rng: &mut R,
) -> MutantSet {
    let mut set = MutantSet::default();
    let mut used = HashSet::new();
    for &cat in categories {
        let free: Vec<&Candidate> = candidates
            .iter()
            .filter(|c| c.local.contains(&cat) && !used.contains(&site_key(&c.edit)))
            .collect();
        let pure: Vec<&Candidate> = free
            .iter()
            .copied()
            .filter(|c| c.categories.len() == 1 && !c.spills)
            .collect();
        let pool = if pure.is_empty() { &free } else { &pure };
        match pool.choose(rng) {
            Some(c) => {
                used.insert(site_key(&c.edit));
                set.mutants.push(Mutant {
                    category: cat,
                    edit: c.edit.clone(),
                    origin: original.name.clone(),
                });
            }
            None => set.skipped.push(cat),
        }
    }
    set
}

/// Categories at least one candidate edit can produce, in declaration order.
pub fn feasible_categories(candidates: &[Candidate]) -> Vec<ErrorCategory> {
    ErrorCategory::ALL
        .into_iter()
        .filter(|c| candidates.iter().any(|x| x.local.contains(c)))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Merged {
    pub faulty: Transformation,
    /// Errors in the merged transformation; may differ from the mutant count.
    pub err_in: usize,
    pub log: Vec<Outcome>,
}

/// Applies the mutants' edits in order; an edit that no longer fits is skipped.
pub fn merge_mutants(original: &Transformation, mutants: &[Mutant], src: &Metamodel, tgt: &Metamodel) -> Merged {
    let mut faulty = original.clone();
    let log = mutants.iter().map(|m| apply_edit_in_place(&mut faulty, &m.edit)).collect();
    let err_in = analyze(&faulty, src, tgt).len();
    Merged { faulty, err_in, log }
}

/// The edit that undoes a mutant.
pub fn inverse(edit: &EditOperation) -> EditOperation {
    EditOperation {
        old: edit.new.clone(),
        new: edit.old.clone(),
        ..edit.clone()
    }
}

/// Whether the mutant's edit still fits `ast`.
pub fn applies_to(edit: &EditOperation, ast: &Transformation) -> bool {
    fragment(ast, edit.kind, &edit.rule, &edit.locator).as_deref() == Some(edit.old.as_str())
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::fixtures;

    #[test]
    fn every_mutant_shows_its_category() {
        for name in fixtures::problem_names() {
            let p = fixtures::problem(name).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            let set =
                generate_mutants(&p.transformation, &p.source_mm, &p.target_mm, &ErrorCategory::ALL, &mut rng).unwrap();
            assert!(!set.mutants.is_empty(), "{name}");
            for m in &set.mutants {
                let (mutated, o) = apply_edit(&p.transformation, &m.edit);
                assert!(o.is_applied());
                let cats: Vec<ErrorCategory> =
                    analyze(&mutated, &p.source_mm, &p.target_mm).iter().map(|e| e.category).collect();
                assert!(cats.contains(&m.category), "{name}: {m:?} gave {cats:?}");
                let own = analyze(&mutated, &p.source_mm, &p.target_mm)
                    .into_iter()
                    .any(|e| e.category == m.category && e.rule.as_deref() == Some(m.edit.rule.as_str()));
                assert!(own, "{name}: {m:?} flags another rule");
            }
            let keys: HashSet<_> = set.mutants.iter().map(|m| site_key(&m.edit)).collect();
            assert_eq!(keys.len(), set.mutants.len());
        }
    }

    #[test]
    fn invalid_type_renames_a_pattern_class() {
        let p = fixtures::problem("class2table").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let set =
            generate_mutants(&p.transformation, &p.source_mm, &p.target_mm, &[ErrorCategory::InvalidType], &mut rng)
                .unwrap();
        let m = &set.mutants[0];
        assert!(m.edit.kind.is_type_modification(), "{m:?}");
    }

    #[test]
    fn impossible_category_is_skipped() {
        let text = "module m;\ncreate OUT : Intalio from IN : UML;\nrule r {\n  from a : UML!Activity\n  to d : Intalio!TextAnnotation\n  }\n";
        let ast = crate::mtl::parse_transformation(text).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let set = generate_mutants(
            &ast,
            &fixtures::uml(),
            &fixtures::intalio(),
            &[ErrorCategory::IncompatibleBindingType],
            &mut rng,
        )
        .unwrap();
        assert!(set.mutants.is_empty());
        assert_eq!(set.skipped, vec![ErrorCategory::IncompatibleBindingType]);
    }

    #[test]
    fn faulty_original_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = generate_mutants(&fixtures::excerpt(), &fixtures::uml(), &fixtures::intalio(), &[], &mut rng);
        assert!(matches!(r, Err(HarnessError::NotClean { .. })));
    }

    #[test]
    fn merging() {
        let p = fixtures::problem("uml2bpmn").unwrap();
        let (src, tgt) = (&p.source_mm, &p.target_mm);
        let none = merge_mutants(&p.transformation, &[], src, tgt);
        assert_eq!(none.faulty, p.transformation);
        assert_eq!(none.err_in, 0);

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let set = generate_mutants(&p.transformation, src, tgt, &[ErrorCategory::InvalidType], &mut rng).unwrap();
        let first = set.mutants[0].clone();
        // same fragment, different replacement: the second no longer fits
        let mut second = first.clone();
        second.edit.new = format!("{}Other", first.edit.new);
        let merged = merge_mutants(&p.transformation, &[first.clone(), second], src, tgt);
        assert!(merged.log[0].is_applied());
        assert!(!merged.log[1].is_applied());
        let alone = merge_mutants(&p.transformation, std::slice::from_ref(&first), src, tgt);
        assert_eq!(merged.faulty, alone.faulty);
        assert_eq!(merged.err_in, alone.err_in);

        let (back, o) = apply_edit(&alone.faulty, &inverse(&first.edit));
        assert!(o.is_applied());
        assert_eq!(back, p.transformation);
    }
}
