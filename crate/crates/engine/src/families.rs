//! The concrete theory families the engine ships, and their oracles.
//!
//! [`t_tree`] builds the theory of a well-founded tree: one unary predicate
//! `P_s` per non-root node, predicates `U_i`, the conditional axioms
//! "if `P_{s^i}` is empty then `P_s` is contained in `U_i`", unconditional
//! containment at terminating nodes, emptiness for off-tree symbols, and
//! the core schema keeping the all-`U` region infinite. Running the closure
//! calculus on it with the type `{U_i(x)}` refutes `E x. P_s(x)` exactly at
//! step `rank(s) + 1`, making the tree's ranks the ground truth for the
//! engine ([`expected_entry_step`]).
//!
//! [`rank2_example`] is the classical two-step example: the type is not
//! strongly isolated, yet two rule applications reach inconsistency.

use crate::error::{Error, Result};
use crate::logic::{parse_template, Formula, IndexKind, PredicateSymbol, Sentence};
use crate::schematic::{FamilySpec, Schema, SchemaRange, SchematicTheory, TailPolicy};
use crate::tree::{FiniteTree, NodePath, OrdinalTree};

/// How a tree theory is specified: an explicit finite tree, or a truncation
/// of the canonical rank-`alpha` tree. Truncations are theories of the
/// truncated tree in their own right; their ranks are the truncation's
/// ranks, not `alpha`.
#[derive(Debug, Clone)]
pub enum TreeTheorySpec {
    Finite(FiniteTree),
    Truncated {
        tree: OrdinalTree,
        width: u64,
        depth: usize,
    },
}

impl TreeTheorySpec {
    pub fn tree(&self) -> FiniteTree {
        match self {
            TreeTheorySpec::Finite(t) => t.clone(),
            TreeTheorySpec::Truncated { tree, width, depth } => tree.truncate(*width, *depth),
        }
    }
}

/// The theory of a finite well-founded tree, in the full language: its
/// signature carries `P_s` for every non-root path, with off-tree symbols
/// pinned empty. Families: `P` (path-indexed, absent tail), `U`
/// (natural-indexed, full tail); the core flag is set on `U`.
pub fn t_tree(tree: &FiniteTree) -> Result<SchematicTheory> {
    let conditional = Schema::new(
        parse_template("!(E x. P<s,i>(x)) -> A x. (P<s>(x) -> U_i(x))")?,
        SchemaRange::TreeEdges {
            path: "s".into(),
            child: "i".into(),
        },
    )?;
    let terminating = Schema::new(
        parse_template("A x. (P<s>(x) -> U_i(x))")?,
        SchemaRange::TerminatingTimesNat {
            path: "s".into(),
            nat: "i".into(),
        },
    )?;
    let off_tree = Schema::new(
        parse_template("!(E x. P<s>(x))")?,
        SchemaRange::OutOfTree { path: "s".into() },
    )?;
    SchematicTheory::new(
        Vec::new(),
        vec![conditional, terminating, off_tree],
        vec![
            FamilySpec::new("P", IndexKind::Path, TailPolicy::Absent),
            FamilySpec::new("U", IndexKind::Nat, TailPolicy::Full),
        ],
        Some("U".into()),
        Some(tree.clone()),
    )
}

/// The theory whose type has rank exactly two: `E x. P(x)`, the conditional
/// axioms "if every `Q_i` is empty then `P` is contained in `U_i`", the
/// containments `Q_i` in `U_j`, and the core schema.
pub fn rank2_example() -> Result<SchematicTheory> {
    let exists_p =
        Sentence::existential_closure(Formula::pred(PredicateSymbol::plain("P"), "x"))?;
    let conditional = Schema::new(
        parse_template("(A y. !Q_i(y)) -> A x. (P(x) -> U_i(x))")?,
        SchemaRange::AllNat { meta: "i".into() },
    )?;
    let containment = Schema::new(
        parse_template("A x. (Q_i(x) -> U_j(x))")?,
        SchemaRange::NatPairs {
            first: "i".into(),
            second: "j".into(),
        },
    )?;
    SchematicTheory::new(
        vec![exists_p],
        vec![conditional, containment],
        vec![
            FamilySpec::new("P", IndexKind::None, TailPolicy::Absent),
            FamilySpec::new("Q", IndexKind::Nat, TailPolicy::Core),
            FamilySpec::new("U", IndexKind::Nat, TailPolicy::Full),
        ],
        Some("U".into()),
        None,
    )
}

/// The type `p(x) = {U_i(x)}` over the family `U`.
pub fn type_p() -> crate::closure::TypeSchema {
    crate::closure::TypeSchema::family("U", "x")
}

/// The step at which the closure calculus refutes `E x. P_s(x)` when run
/// on the theory of `tree`: one past the node's rank.
pub fn expected_entry_step(tree: &FiniteTree, s: &NodePath) -> Result<u64> {
    if s.is_empty() {
        return Err(Error::Invalid(
            "the root carries no predicate symbol".into(),
        ));
    }
    match tree.finite_rank(s) {
        -1 => Err(Error::Invalid(format!("{s} is not a node of the tree"))),
        r => Ok(r as u64 + 1),
    }
}

/// The default candidate pool for a tree theory: `P_s` for every non-root
/// node, shallow and low-rank first.
pub fn tree_pool(tree: &FiniteTree) -> Vec<Formula> {
    let mut nodes: Vec<&NodePath> = tree.paths().filter(|p| !p.is_empty()).collect();
    nodes.sort_by_key(|p| (tree.finite_rank(p), (*p).clone()));
    nodes
        .into_iter()
        .map(|p| Formula::pred(PredicateSymbol::path("P", p.clone()), "x"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;

    fn path(s: &str) -> NodePath {
        s.parse().unwrap()
    }

    #[test]
    fn singleton_tree_theory_has_no_p_symbols() {
        let theory = t_tree(&FiniteTree::singleton()).unwrap();
        let support = theory.support(&[]);
        assert!(support.path_indices("P").is_empty());
        assert!(theory.core_family().is_some());
    }

    #[test]
    fn chain_theory_contains_the_conditional_instance() {
        let tree = FiniteTree::from_paths([path("<0,0>")]);
        let theory = t_tree(&tree).unwrap();
        let sig = theory.support(&[]);
        let (sentences, _) = theory.project(&sig).unwrap();
        let texts: Vec<String> = sentences.iter().map(|s| s.to_string()).collect();
        assert!(
            texts.contains(&"!(E x. P<0,0>(x)) -> A x. P<0>(x) -> U_0(x)".to_string()),
            "{texts:?}"
        );
    }

    #[test]
    fn rank2_theory_shape() {
        let theory = rank2_example().unwrap();
        assert_eq!(theory.sentences().len(), 1);
        assert_eq!(theory.sentences()[0].to_string(), "E x. P(x)");
        assert_eq!(theory.schemas().len(), 2);
        assert_eq!(theory.core_family(), Some("U"));
    }

    #[test]
    fn type_p_members() {
        let p = type_p();
        let member = p.member_at(4).unwrap();
        assert_eq!(member.to_string(), "U_4(x)");
        assert_eq!(p.vars(), &["x".to_string()]);
    }

    #[test]
    fn expected_entry_steps() {
        let chain = FiniteTree::from_paths([path("<0,0>")]);
        assert_eq!(expected_entry_step(&chain, &path("<0,0>")).unwrap(), 1);
        assert_eq!(expected_entry_step(&chain, &path("<0>")).unwrap(), 2);
        let star = FiniteTree::from_paths((0..5).map(|i| NodePath::new(vec![i])));
        for i in 0..5 {
            assert_eq!(
                expected_entry_step(&star, &NodePath::new(vec![i])).unwrap(),
                1
            );
        }
        assert!(expected_entry_step(&chain, &NodePath::root()).is_err());
        assert!(expected_entry_step(&chain, &path("<9>")).is_err());
    }

    #[test]
    fn tree_pool_lists_low_ranks_first() {
        let tree = FiniteTree::from_paths([path("<0,0>"), path("<1>")]);
        let theory = t_tree(&tree).unwrap();
        let pool = tree_pool(&tree);
        let texts: Vec<String> = pool
            .iter()
            .map(|f| parse_formula(&crate::logic::format_formula(f), &theory.signature())
                .map(|_| crate::logic::format_formula(f))
                .unwrap())
            .collect();
        assert_eq!(texts, vec!["P<0,0>(x)", "P<1>(x)", "P<0>(x)"]);
    }
}
