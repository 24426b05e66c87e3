use rand::Rng;

use super::RepairProblem;
use crate::analyzer::analyze;
use crate::edits::{apply_edit_in_place, sample_edit, sample_edit_of_kind, EditKind, EditOperation, Patch};
use crate::mtl::Transformation;

/// Builds a patch of length uniform in `[1, max_len]`, each operation sampled
/// against the transformation as patched so far.
pub fn random_patch<R: Rng + ?Sized>(rng: &mut R, problem: &RepairProblem, max_len: usize) -> Patch {
    let len = rng.gen_range(1..=max_len.max(1));
    let mut ast = problem.faulty.clone();
    let mut errors = problem.errors.clone();
    let mut ops = Vec::with_capacity(len);
    for i in 0..len {
        let op = match sample_edit(rng, &ast, &errors, &problem.src, &problem.tgt) {
            Ok(op) => op,
            Err(_) => break,
        };
        if apply_edit_in_place(&mut ast, &op).is_applied() && i + 1 < len {
            errors = analyze(&ast, &problem.src, &problem.tgt);
        }
        ops.push(op);
    }
    Patch::new(ops)
}

/// Single-point crossover: the first `ca` ops of `a` joined with `b` after
/// its first `cb` ops, and vice versa.
pub fn crossover_at(a: &Patch, b: &Patch, ca: usize, cb: usize) -> (Patch, Patch) {
    let c1 = a.ops[..ca].iter().chain(&b.ops[cb..]).cloned().collect();
    let c2 = b.ops[..cb].iter().chain(&a.ops[ca..]).cloned().collect();
    (Patch::new(c1), Patch::new(c2))
}

/// Crossover with cut points uniform in `[1, |a|]` and `[1, |b|]`. An empty
/// parent passes both parents through unchanged.
pub fn crossover<R: Rng + ?Sized>(rng: &mut R, a: &Patch, b: &Patch) -> (Patch, Patch) {
    if a.is_empty() || b.is_empty() {
        return (a.clone(), b.clone());
    }
    let ca = rng.gen_range(1..=a.len());
    let cb = rng.gen_range(1..=b.len());
    crossover_at(a, b, ca, cb)
}

/// Changes at least one position: each position is picked with probability
/// 1/len, and a picked op is either replaced by a fresh op of another kind or
/// has its parameters resampled within the same kind and rule.
pub fn mutate<R: Rng + ?Sized>(rng: &mut R, patch: &Patch, problem: &RepairProblem) -> Patch {
    if patch.is_empty() {
        return patch.clone();
    }
    let n = patch.len();
    let p = 1.0 / n as f64;
    let mut picked: Vec<usize> = (0..n).filter(|_| rng.gen_bool(p)).collect();
    if picked.is_empty() {
        picked.push(rng.gen_range(0..n));
    }
    let mut ops = patch.ops.clone();
    let mut ast = problem.faulty.clone();
    let mut done = 0;
    for &i in &picked {
        for op in &ops[done..i] {
            apply_edit_in_place(&mut ast, op);
        }
        done = i;
        let errors = analyze(&ast, &problem.src, &problem.tgt);
        ops[i] = if rng.gen_bool(0.5) {
            resample(rng, &ops[i], &ast, &errors, problem).unwrap_or_else(|| replace(rng, &ops[i], &ast, &errors, problem))
        } else {
            replace(rng, &ops[i], &ast, &errors, problem)
        };
    }
    Patch::new(ops)
}

const TRIES: usize = 16;

fn replace<R: Rng + ?Sized>(
    rng: &mut R,
    old: &EditOperation,
    ast: &Transformation,
    errors: &[crate::analyzer::TypeError],
    problem: &RepairProblem,
) -> EditOperation {
    let mut last = None;
    for _ in 0..TRIES {
        match sample_edit(rng, ast, errors, &problem.src, &problem.tgt) {
            Ok(op) if op.kind != old.kind => return op,
            Ok(op) => last = Some(op),
            Err(_) => break,
        }
    }
    // only reached when every draw repeated the kind; force a different one
    let kinds: Vec<EditKind> = EditKind::ALL.into_iter().filter(|k| *k != old.kind).collect();
    let kind = kinds[rng.gen_range(0..kinds.len())];
    let rule = last.as_ref().map_or(old.rule.as_str(), |o| o.rule.as_str());
    sample_edit_of_kind(rng, ast, errors, &problem.src, &problem.tgt, kind, rule)
        .or_else(|_| sample_edit_of_kind(rng, ast, errors, &problem.src, &problem.tgt, kind, &ast.rules[0].name))
        .unwrap_or_else(|_| old.clone())
}

fn resample<R: Rng + ?Sized>(
    rng: &mut R,
    old: &EditOperation,
    ast: &Transformation,
    errors: &[crate::analyzer::TypeError],
    problem: &RepairProblem,
) -> Option<EditOperation> {
    (0..TRIES)
        .filter_map(|_| sample_edit_of_kind(rng, ast, errors, &problem.src, &problem.tgt, old.kind, &old.rule).ok())
        .find(|op| op != old)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::fixtures;

    fn problem() -> RepairProblem {
        RepairProblem::new(fixtures::excerpt(), fixtures::uml(), fixtures::intalio())
    }

    #[test]
    fn crossover_example() {
        let p = fixtures::excerpt_patch();
        let mut x2 = p.ops[1].clone();
        x2.new = "X".into();
        let mut y2 = p.ops[1].clone();
        y2.new = "Y".into();
        let a = Patch::new(vec![p.ops[0].clone(), x2.clone()]);
        let b = Patch::new(vec![p.ops[1].clone(), y2.clone()]);
        let (c1, c2) = crossover_at(&a, &b, 1, 1);
        assert_eq!(c1.ops, vec![p.ops[0].clone(), y2]);
        assert_eq!(c2.ops, vec![p.ops[1].clone(), x2]);
    }

    #[test]
    fn empty_parent_passes_through() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = fixtures::excerpt_patch();
        let (c1, c2) = crossover(&mut rng, &a, &Patch::default());
        assert_eq!(c1, a);
        assert!(c2.is_empty());
    }

    #[test]
    fn random_patches_respect_length_bounds() {
        let p = problem();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let patch = random_patch(&mut rng, &p, 3);
            assert!((1..=3).contains(&patch.len()));
        }
    }

    #[test]
    fn mutation_changes_at_least_one_position() {
        let p = problem();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let parent = random_patch(&mut rng, &p, 4);
            let child = mutate(&mut rng, &parent, &p);
            assert_eq!(child.len(), parent.len());
            let k = parent.ops.iter().zip(&child.ops).filter(|(a, b)| a != b).count();
            assert!(k >= 1, "{parent:?}");
        }
    }

    #[test]
    fn mutation_is_deterministic() {
        let p = problem();
        let parent = fixtures::excerpt_patch();
        let run = || mutate(&mut ChaCha8Rng::seed_from_u64(9), &parent, &p);
        assert_eq!(run(), run());
    }

    #[test]
    fn parameter_resampling_keeps_kind_and_rule() {
        let p = problem();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ops = fixtures::excerpt_patch().ops;
        for op in &ops {
            for _ in 0..50 {
                if let Some(new) = resample(&mut rng, op, &p.faulty, &p.errors, &p) {
                    assert_eq!((new.kind, &new.rule), (op.kind, &op.rule));
                    assert_ne!(&new, op);
                }
            }
        }
    }
}
