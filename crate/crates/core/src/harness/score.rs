use std::collections::HashSet;

use serde::Serialize;

use crate::analyzer::{analyze, ErrorCategory, Site};
use crate::metamodel::Metamodel;
use crate::mtl::Transformation;

/// A fragment at an error site where the repair differs from the original.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Residual {
    pub site: Site,
    pub original: Option<String>,
    pub repaired: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Score {
    /// Errors of the faulty transformation gone from the repaired one.
    pub errors_fixed: usize,
    /// Of those, errors whose site fragment now equals the original's.
    pub exact_fixes: usize,
    pub residual: Vec<Residual>,
}

/// Structural content at a site, printed; spans are ignored by comparison.
#[derive(PartialEq)]
enum Fragment<'a> {
    In(&'a crate::mtl::InPattern),
    Guard(Option<&'a crate::mtl::Expr>),
    Out(&'a crate::mtl::OutPattern),
    Binding(&'a crate::mtl::Binding),
    Helper(&'a crate::mtl::Helper),
}

impl Fragment<'_> {
    fn text(&self) -> String {
        match self {
            Fragment::In(p) => format!("{} : {}", p.var, p.class),
            Fragment::Guard(g) => g.map(|e| e.to_string()).unwrap_or_default(),
            Fragment::Out(o) => {
                let b: Vec<String> = o.bindings.iter().map(|b| b.to_string()).collect();
                format!("{} : {} ({})", o.var, o.class, b.join(", "))
            }
            Fragment::Binding(b) => b.to_string(),
            Fragment::Helper(h) => format!("{}::{} : {} = {}", h.context, h.name, h.ty, h.body),
        }
    }
}

fn fragment_at<'a>(ast: &'a Transformation, site: &Site) -> Option<Fragment<'a>> {
    match site {
        Site::InPattern { rule } => Some(Fragment::In(&ast.rule(rule)?.input)),
        Site::Guard { rule } => Some(Fragment::Guard(ast.rule(rule)?.input.guard.as_ref())),
        Site::OutPattern { rule, element } => Some(Fragment::Out(ast.rule(rule)?.outputs.get(*element)?)),
        Site::Binding { rule, element, binding } => Some(Fragment::Binding(
            ast.rule(rule)?.outputs.get(*element)?.bindings.get(*binding)?,
        )),
        Site::Helper { helper } => Some(Fragment::Helper(ast.helpers.get(*helper)?)),
    }
}

/// Compares a repair with the ground truth at every error site of the faulty
/// transformation. An error counts as exactly fixed when it is gone and its
/// site matches the original structurally.
pub fn score_patch(
    original: &Transformation,
    faulty: &Transformation,
    repaired: &Transformation,
    src: &Metamodel,
    tgt: &Metamodel,
) -> Score {
    let before = analyze(faulty, src, tgt);
    let after: HashSet<(ErrorCategory, Site, String)> = analyze(repaired, src, tgt)
        .into_iter()
        .map(|e| (e.category, e.site, e.symbol))
        .collect();
    let mut score = Score {
        errors_fixed: 0,
        exact_fixes: 0,
        residual: Vec::new(),
    };
    let mut reported = HashSet::new();
    for e in &before {
        let want = fragment_at(original, &e.site);
        let got = fragment_at(repaired, &e.site);
        let same = want == got;
        if !after.contains(&(e.category, e.site.clone(), e.symbol.clone())) {
            score.errors_fixed += 1;
            if same {
                score.exact_fixes += 1;
            }
        }
        if !same && reported.insert(e.site.clone()) {
            score.residual.push(Residual {
                site: e.site.clone(),
                original: want.map(|f| f.text()),
                repaired: got.map(|f| f.text()),
            });
        }
    }
    score
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn perfect_and_noop_repairs() {
        let (o, f) = (fixtures::original_excerpt(), fixtures::excerpt());
        let (src, tgt) = (fixtures::uml(), fixtures::intalio());
        let s = score_patch(&o, &f, &o, &src, &tgt);
        assert_eq!(s.exact_fixes, analyze(&f, &src, &tgt).len());
        assert!(s.residual.is_empty());
        let s = score_patch(&o, &f, &f, &src, &tgt);
        assert_eq!((s.errors_fixed, s.exact_fixes), (0, 0));
        assert!(!s.residual.is_empty());
    }

    #[test]
    fn refined_excerpt_fixes_all_three_sites() {
        let (src, tgt) = (fixtures::uml(), fixtures::intalio());
        let (refined, _) = crate::refine::refine(&fixtures::patched_excerpt(), &src, &tgt);
        let s = score_patch(&fixtures::original_excerpt(), &fixtures::excerpt(), &refined, &src, &tgt);
        assert_eq!(s.exact_fixes, 3);
        let s = score_patch(
            &fixtures::original_excerpt(),
            &fixtures::excerpt(),
            &fixtures::patched_excerpt(),
            &src,
            &tgt,
        );
        assert_eq!(s.errors_fixed, 2);
        // the binding is type-correct but not the original one
        assert_eq!(s.exact_fixes, 0);
        assert_eq!(s.residual.len(), 2);
    }
}
