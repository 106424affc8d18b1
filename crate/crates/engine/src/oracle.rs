//! Brute-force reference procedures.
//!
//! These are the independent side of every dual-route check: satisfiability
//! and entailment by exhaustive finite-model enumeration, evaluated with the
//! plain Tarskian evaluator. They share no code with the profile solver and
//! are deliberately slow; use them only at small sizes.

use crate::logic::{FiniteModel, PredicateSymbol, Sentence};

/// All models over `preds` with at most `max_size` elements, one
/// representative per region-cardinality vector. Monadic sentences cannot
/// distinguish models with equal vectors, so the enumeration is exhaustive
/// for truth purposes.
pub fn all_models(preds: &[PredicateSymbol], max_size: usize) -> Vec<FiniteModel> {
    let regions = 1usize << preds.len();
    let mut out = Vec::new();
    let mut counts = vec![0usize; regions];
    enumerate(&mut counts, 0, max_size, &mut |c| {
        out.push(build_model(preds, c));
    });
    out
}

fn enumerate(counts: &mut Vec<usize>, idx: usize, budget: usize, f: &mut impl FnMut(&[usize])) {
    if idx == counts.len() {
        f(counts);
        return;
    }
    for c in 0..=budget {
        counts[idx] = c;
        enumerate(counts, idx + 1, budget - c, f);
    }
    counts[idx] = 0;
}

fn build_model(preds: &[PredicateSymbol], counts: &[usize]) -> FiniteModel {
    let mut region_of_element = Vec::new();
    for (region, &c) in counts.iter().enumerate() {
        for _ in 0..c {
            region_of_element.push(region);
        }
    }
    let mut m = FiniteModel::new(region_of_element.len());
    for (i, p) in preds.iter().enumerate() {
        let ext: Vec<usize> = region_of_element
            .iter()
            .enumerate()
            .filter(|(_, r)| *r & (1 << i) != 0)
            .map(|(e, _)| e)
            .collect();
        m = m.with_extension(p.clone(), ext);
    }
    m
}

/// Whether some model with at most `max_size` elements satisfies all of
/// `sentences`.
pub fn sat_by_enumeration(
    sentences: &[Sentence],
    preds: &[PredicateSymbol],
    max_size: usize,
) -> bool {
    all_models(preds, max_size)
        .iter()
        .any(|m| sentences.iter().all(|s| m.eval(s)))
}

/// Whether every model of the premises with at most `max_size` elements
/// satisfies the goal (countermodel search).
pub fn entails_by_enumeration(
    premises: &[Sentence],
    goal: &Sentence,
    preds: &[PredicateSymbol],
    max_size: usize,
) -> bool {
    !all_models(preds, max_size)
        .iter()
        .any(|m| premises.iter().all(|s| m.eval(s)) && !m.eval(goal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_sentence, IndexKind, Signature};

    #[test]
    fn model_counts() {
        let u = PredicateSymbol::nat("U", 0);
        // One predicate, sizes 0..=2: vectors (a, b) with a+b <= 2.
        assert_eq!(all_models(&[u], 2).len(), 6);
    }

    #[test]
    fn enumeration_answers() {
        let sig = Signature::new().declare("U", IndexKind::Nat);
        let u = PredicateSymbol::nat("U", 0);
        let sat = parse_sentence("E>=2 x. U_0(x)", &sig).unwrap();
        assert!(sat_by_enumeration(&[sat.clone()], &[u.clone()], 3));
        let unsat = parse_sentence("E x. U_0(x) & A y. !U_0(y)", &sig).unwrap();
        assert!(!sat_by_enumeration(&[unsat], &[u.clone()], 3));
        let all = parse_sentence("A x. U_0(x)", &sig).unwrap();
        let some = parse_sentence("E x. U_0(x)", &sig).unwrap();
        assert!(!entails_by_enumeration(&[all], &some, &[u], 3));
    }
}
