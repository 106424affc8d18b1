//! The closure calculus for omitting a type.
//!
//! Fix a theory `T` and a type `p(xs)`. One rule application derives
//! `!E xs. phi(xs)` for every candidate `phi` such that
//! `A xs. (phi(xs) -> p_i(xs))` is entailed for every member `p_i` of the
//! type. Iterating the rule, interleaved with first-order entailment,
//! yields a growing chain of theories; the step at which it closes is the
//! rank of `(T, p)`, and reaching an inconsistent stage means the type
//! cannot be omitted.
//!
//! Full first-order closure at each stage is never materialized: a stage is
//! the base theory plus the derived refutations, with entailment questions
//! answered on demand by the profile decision procedure.
//!
//! The rule quantifies over all formulas; the engine restricts candidates
//! to a finite pool and reports pool-relative results. For the shipped
//! theory families the pool is adequate: the stages of a tree theory are
//! equivalent to the base plus the refutations of the nodes below the
//! current rank, so nothing outside the pool can fire earlier.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::logic::{
    format_formula, Formula, IndexKind, IndexTerm, PredicateSymbol, Sentence, TemplateSymbol, Var,
};
use crate::ordinal::Ordinal;
use crate::schematic::{type_member_goal, Schema, SchemaRange, SchematicTheory, Support};
use crate::tree::{NodePath, OrdinalTree};

/// A type `p(xs)`: an explicit finite list of formulas over a shared
/// variable tuple, or the family form `p_i(x) = f_i(x)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeSchema {
    vars: Vec<Var>,
    body: TypeBody,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum TypeBody {
    Explicit(Vec<Formula>),
    Family { family: String },
}

impl TypeSchema {
    /// The family form: members `f_i(var)` for every natural `i`.
    pub fn family(family: impl Into<String>, var: impl Into<Var>) -> Self {
        TypeSchema {
            vars: vec![var.into()],
            body: TypeBody::Family {
                family: family.into(),
            },
        }
    }

    /// An explicit finite type; all members must share one free-variable
    /// tuple.
    pub fn explicit(members: Vec<Formula>) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(Error::Invalid("an explicit type needs members".into()));
        };
        let vars = first.free_vars();
        if vars.is_empty() {
            return Err(Error::Variable(
                "type members need at least one free variable".into(),
            ));
        }
        for m in &members {
            if m.free_vars() != vars {
                return Err(Error::Variable(format!(
                    "type member `{}` does not share the variable tuple {:?}",
                    format_formula(m),
                    vars
                )));
            }
        }
        Ok(TypeSchema {
            vars,
            body: TypeBody::Explicit(members),
        })
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn family_name(&self) -> Option<&str> {
        match &self.body {
            TypeBody::Family { family } => Some(family),
            TypeBody::Explicit(_) => None,
        }
    }

    /// The `i`th member of a family-form type.
    pub fn member_at(&self, i: u64) -> Result<Formula> {
        match &self.body {
            TypeBody::Family { family } => Ok(Formula::pred(
                PredicateSymbol::nat(family.clone(), i),
                self.vars[0].clone(),
            )),
            TypeBody::Explicit(_) => Err(Error::Invalid(
                "member_at applies to family-form types".into(),
            )),
        }
    }
}

/// A candidate the rule may refute: a concrete formula, or a whole
/// natural-indexed family at once (each member `f_j(x)` is a candidate and
/// the refutations are recorded schematically when all of them fire).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PoolCandidate {
    Concrete(Formula),
    Family { family: String, var: Var },
}

impl PoolCandidate {
    /// The ledger key and display form.
    pub fn key(&self) -> String {
        match self {
            PoolCandidate::Concrete(f) => format_formula(f),
            PoolCandidate::Family { family, var } => format!("{family}_i({var}) [all i]"),
        }
    }

    /// A representative member: the formula itself, or the family at the
    /// smallest unlisted index when nothing is listed.
    fn representative(&self, listed_max: Option<u64>) -> Formula {
        match self {
            PoolCandidate::Concrete(f) => f.clone(),
            PoolCandidate::Family { family, var } => Formula::pred(
                PredicateSymbol::nat(family.clone(), listed_max.map_or(0, |m| m + 1)),
                var.clone(),
            ),
        }
    }
}

/// One step of the run, for reporting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    pub step: u64,
    pub added: Vec<String>,
    pub consistent: bool,
}

/// What a finished run ended as.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// Consistent fixpoint; the step count is the pool-relative rank.
    Fixpoint { rank: u64 },
    /// The stage at `at` is inconsistent (the type cannot be omitted).
    Inconsistent { at: u64 },
}

/// The advancing state of a closure run.
#[derive(Debug, Clone)]
pub struct ClosureState {
    base: SchematicTheory,
    p: TypeSchema,
    pool: Vec<PoolCandidate>,
    derived_sentences: Vec<Sentence>,
    derived_schemas: Vec<Schema>,
    ledger: BTreeMap<String, u64>,
    steps: Vec<StepRecord>,
    step: u64,
    fixpoint_reached: bool,
    inconsistent_at: Option<u64>,
    probes: u64,
}

impl ClosureState {
    pub fn new(
        base: SchematicTheory,
        p: TypeSchema,
        pool: Vec<PoolCandidate>,
        probes: u64,
    ) -> Result<Self> {
        for c in &pool {
            match c {
                PoolCandidate::Concrete(f) => {
                    if f.free_vars() != p.vars() {
                        return Err(Error::Variable(format!(
                            "candidate `{}` does not match the type variables {:?}",
                            format_formula(f),
                            p.vars()
                        )));
                    }
                }
                PoolCandidate::Family { family, .. } => {
                    match base.family(family) {
                        Some(spec) if spec.kind == IndexKind::Nat => {}
                        _ => {
                            return Err(Error::Invalid(format!(
                                "pool family `{family}` is not a natural-indexed family"
                            )))
                        }
                    }
                }
            }
        }
        if let Some(f) = p.family_name() {
            match base.family(f) {
                Some(spec) if spec.kind == IndexKind::Nat => {}
                _ => {
                    return Err(Error::Invalid(format!(
                        "type family `{f}` is not a natural-indexed family"
                    )))
                }
            }
        }
        Ok(ClosureState {
            base,
            p,
            pool,
            derived_sentences: Vec::new(),
            derived_schemas: Vec::new(),
            ledger: BTreeMap::new(),
            steps: Vec::new(),
            step: 0,
            fixpoint_reached: false,
            inconsistent_at: None,
            probes: probes.max(1),
        })
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn ledger(&self) -> &BTreeMap<String, u64> {
        &self.ledger
    }

    pub fn steps(&self) -> &[StepRecord] {
        &self.steps
    }

    pub fn fixpoint_reached(&self) -> bool {
        self.fixpoint_reached
    }

    pub fn inconsistent_at(&self) -> Option<u64> {
        self.inconsistent_at
    }

    pub fn pool(&self) -> &[PoolCandidate] {
        &self.pool
    }

    pub fn derived(&self) -> &[Sentence] {
        &self.derived_sentences
    }

    pub fn outcome(&self) -> Option<Outcome> {
        if let Some(at) = self.inconsistent_at {
            Some(Outcome::Inconsistent { at })
        } else if self.fixpoint_reached {
            Some(Outcome::Fixpoint { rank: self.step })
        } else {
            None
        }
    }

    /// The current stage: base plus everything derived so far.
    pub fn theory(&self) -> SchematicTheory {
        self.base
            .extended(&self.derived_sentences, &self.derived_schemas)
            .expect("derived sentences stay well-formed")
    }

    fn support_with_pool(&self, theory: &SchematicTheory) -> Support {
        let extras: Vec<&Formula> = self
            .pool
            .iter()
            .filter_map(|c| match c {
                PoolCandidate::Concrete(f) => Some(f),
                PoolCandidate::Family { .. } => None,
            })
            .collect();
        theory.support(&extras)
    }

    /// Whether every type member is entailed to contain `phi`, across the
    /// listed indices and `probes` fresh representatives.
    fn candidate_fires(&self, theory: &SchematicTheory, support: &Support, phi: &Formula) -> Result<bool> {
        let mut answers = Vec::new();
        for probe in 0..self.probes {
            let (sig, fresh) = theory.fresh_signature(support, probe);
            let query = theory.projection_query(&sig)?;
            let fires = match &self.p.body {
                TypeBody::Family { family } => {
                    let mut indices = support.nat_indices(family);
                    indices.insert(fresh);
                    let mut all = true;
                    for i in indices {
                        if !query.entails(&type_member_goal(phi, family, i)?)? {
                            all = false;
                            break;
                        }
                    }
                    all
                }
                TypeBody::Explicit(members) => {
                    let mut all = true;
                    for m in members {
                        let goal =
                            Sentence::universal_closure(phi.clone().implies(m.clone()))?;
                        if !query.entails(&goal)? {
                            all = false;
                            break;
                        }
                    }
                    all
                }
            };
            answers.push(fires);
        }
        if answers.windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::Invalid(format!(
                "fresh-index instability while checking `{}`",
                format_formula(phi)
            )));
        }
        Ok(answers[0])
    }

    /// Whether a whole family of candidates fires: every listed member plus
    /// a fresh representative member.
    fn family_fires(
        &self,
        theory: &SchematicTheory,
        support: &Support,
        family: &str,
        var: &Var,
    ) -> Result<bool> {
        let listed = support.nat_indices(family);
        let fresh = support.max_nat_anywhere().map_or(0, |m| m + 1);
        let mut indices = listed;
        indices.insert(fresh);
        for j in indices {
            let member = Formula::pred(PredicateSymbol::nat(family, j), var.clone());
            if !self.candidate_fires(theory, support, &member)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// One application of the rule against the current stage: the
    /// refutations of all pool candidates, not yet in the ledger, whose
    /// type implications are all entailed. All candidates are judged
    /// against the same stage.
    pub fn p_operator(&self) -> Result<Vec<(PoolCandidate, Refutation)>> {
        if self.inconsistent_at.is_some() {
            return Err(Error::AlreadyAtFixpoint);
        }
        let theory = self.theory();
        let support = self.support_with_pool(&theory);
        let mut out = Vec::new();
        for c in &self.pool {
            if self.ledger.contains_key(&c.key()) {
                continue;
            }
            match c {
                PoolCandidate::Concrete(f) => {
                    if self.candidate_fires(&theory, &support, f)? {
                        out.push((c.clone(), Refutation::Sentence(Sentence::negated_existential(f.clone())?)));
                    }
                }
                PoolCandidate::Family { family, var } => {
                    if self.family_fires(&theory, &support, family, var)? {
                        out.push((c.clone(), Refutation::Schema(family_refutation(family, var)?)));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Advances one stage. Returns the refutations added; an empty step
    /// sets the fixpoint flag without advancing the counter.
    pub fn closure_step(&mut self) -> Result<Vec<String>> {
        if self.fixpoint_reached {
            return Err(Error::AlreadyAtFixpoint);
        }
        let adds = self.p_operator()?;
        if adds.is_empty() {
            self.fixpoint_reached = true;
            return Ok(Vec::new());
        }
        self.step += 1;
        let mut added = Vec::new();
        for (candidate, refutation) in adds {
            self.ledger.insert(candidate.key(), self.step);
            added.push(match &refutation {
                Refutation::Sentence(s) => s.to_string(),
                Refutation::Schema(schema) => {
                    format!("{} [all i]", format_formula(schema.template()))
                }
            });
            match refutation {
                Refutation::Sentence(s) => self.derived_sentences.push(s),
                Refutation::Schema(s) => self.derived_schemas.push(s),
            }
        }
        let consistent = self.theory().is_consistent(&[])?;
        if !consistent {
            self.inconsistent_at = Some(self.step);
        } else if self.pool.iter().all(|c| self.ledger.contains_key(&c.key())) {
            self.fixpoint_reached = true;
        }
        self.steps.push(StepRecord {
            step: self.step,
            added,
            consistent,
        });
        Ok(self.steps.last().unwrap().added.clone())
    }

    /// A pool candidate that isolates the type in the current stage: the
    /// stage plus its existence is consistent, and it implies every type
    /// member. Returns the witnessing formula.
    pub fn is_isolated(&self) -> Result<Option<Formula>> {
        let theory = self.theory();
        let support = self.support_with_pool(&theory);
        for c in &self.pool {
            let phi = c.representative(support.max_nat_anywhere());
            let exists = Sentence::existential_closure(phi.clone())?;
            if theory.consistent_with(&[exists])?
                && self.candidate_fires(&theory, &support, &phi)?
            {
                return Ok(Some(phi));
            }
        }
        Ok(None)
    }

    /// As [`ClosureState::is_isolated`], with consistency strengthened to
    /// entailed existence.
    pub fn is_strongly_isolated(&self) -> Result<Option<Formula>> {
        let theory = self.theory();
        let support = self.support_with_pool(&theory);
        for c in &self.pool {
            let phi = c.representative(support.max_nat_anywhere());
            let exists = Sentence::existential_closure(phi.clone())?;
            if theory.entails_sentence(&exists)?
                && self.candidate_fires(&theory, &support, &phi)?
            {
                return Ok(Some(phi));
            }
        }
        Ok(None)
    }
}

/// A derived refutation: one sentence, or a schema refuting a whole family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Refutation {
    Sentence(Sentence),
    Schema(Schema),
}

fn family_refutation(family: &str, var: &Var) -> Result<Schema> {
    let member = Formula::pred(
        TemplateSymbol {
            family: family.to_string(),
            index: IndexTerm::MetaNat("i".into()),
        },
        var.clone(),
    );
    Schema::new(
        Formula::exists(var.clone(), member).not(),
        SchemaRange::AllNat { meta: "i".into() },
    )
}

/// Runs the closure to a fixpoint, an inconsistency, or the step budget.
/// The final consistent fixpoint step is the pool-relative rank.
pub fn iterate(
    base: SchematicTheory,
    p: TypeSchema,
    pool: Vec<PoolCandidate>,
    max_steps: u64,
    probes: u64,
) -> Result<ClosureState> {
    assert!(max_steps >= 1, "at least one step");
    let mut state = ClosureState::new(base, p, pool, probes)?;
    while state.outcome().is_none() {
        if state.step >= max_steps {
            return Ok(state); // budget exhausted; outcome() stays None
        }
        state.closure_step()?;
    }
    Ok(state)
}

/// Both sides of the deduction property: whether `phi -> sigma` holds at
/// the fixpoint of `T`, and whether `sigma` holds at the fixpoint of
/// `T + phi`. The left run's pool is closed under conjunction with the
/// hypothesis, mirroring how a refutation under `T + phi` corresponds to
/// refuting the conjunction under `T`.
pub fn deduction_check(
    base: &SchematicTheory,
    phi: &Sentence,
    sigma: &Sentence,
    p: &TypeSchema,
    pool: &[PoolCandidate],
    max_steps: u64,
) -> Result<(bool, bool)> {
    let mut left_pool = pool.to_vec();
    for c in pool {
        if let PoolCandidate::Concrete(f) = c {
            // Rename the hypothesis's binders so the conjunction can sit
            // under the candidate's own quantifier prefix.
            left_pool.push(PoolCandidate::Concrete(
                f.clone().and(phi.formula().refresh_bound("h")),
            ));
        }
    }
    let left_state = iterate(base.clone(), p.clone(), left_pool, max_steps, 1)?;
    if left_state.outcome().is_none() {
        return Err(Error::BudgetExhausted(max_steps as u32));
    }
    let goal = Sentence::new(phi.formula().clone().implies(sigma.formula().clone()))?;
    let left = left_state.theory().entails_sentence(&goal)?;

    let extended = base.extended(&[phi.clone()], &[])?;
    let right_state = iterate(extended, p.clone(), pool.to_vec(), max_steps, 1)?;
    if right_state.outcome().is_none() {
        return Err(Error::BudgetExhausted(max_steps as u32));
    }
    let right = right_state.theory().entails_sentence(sigma)?;
    Ok((left, right))
}

/// Stage membership for the theory of the canonical rank-`alpha` tree,
/// read off the normal form instead of run by iteration: stage `beta`
/// refutes `E x. P_s(x)` exactly when the rank of `s` is below `beta`
/// (off-tree nodes are refuted outright).
pub fn stage_refutes(tree: &OrdinalTree, s: &NodePath, beta: &Ordinal) -> bool {
    match tree.rank_at(s) {
        None => true,
        Some(rank) => rank < *beta,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{self, expected_entry_step, tree_pool, type_p};
    use crate::logic::parse_formula;
    use crate::tree::FiniteTree;

    fn path(s: &str) -> NodePath {
        s.parse().unwrap()
    }

    fn tree_candidates(tree: &FiniteTree) -> Vec<PoolCandidate> {
        tree_pool(tree).into_iter().map(PoolCandidate::Concrete).collect()
    }

    fn rank2_pool() -> Vec<PoolCandidate> {
        let theory = families::rank2_example().unwrap();
        vec![
            PoolCandidate::Concrete(parse_formula("P(x)", &theory.signature()).unwrap()),
            PoolCandidate::Family {
                family: "Q".into(),
                var: "x".into(),
            },
        ]
    }

    #[test]
    fn rank2_first_step_refutes_the_q_family_only() {
        let theory = families::rank2_example().unwrap();
        let state = ClosureState::new(theory, type_p(), rank2_pool(), 1).unwrap();
        let adds = state.p_operator().unwrap();
        let keys: Vec<String> = adds.iter().map(|(c, _)| c.key()).collect();
        assert_eq!(keys, vec!["Q_i(x) [all i]".to_string()]);
    }

    #[test]
    fn rank2_run_is_inconsistent_at_step_two() {
        let theory = families::rank2_example().unwrap();
        let state = iterate(theory, type_p(), rank2_pool(), 5, 1).unwrap();
        assert_eq!(state.inconsistent_at(), Some(2));
        assert_eq!(state.outcome(), Some(Outcome::Inconsistent { at: 2 }));
        assert_eq!(state.steps()[0].consistent, true);
        assert_eq!(state.steps()[1].consistent, false);
    }

    #[test]
    fn chain_tree_ledger_and_rank() {
        let tree = FiniteTree::from_paths([path("<0,0>")]);
        let theory = families::t_tree(&tree).unwrap();
        let pool = tree_candidates(&tree);
        let state = iterate(theory, type_p(), pool, 10, 1).unwrap();
        assert_eq!(state.outcome(), Some(Outcome::Fixpoint { rank: 2 }));
        assert_eq!(state.ledger()["P<0,0>(x)"], 1);
        assert_eq!(state.ledger()["P<0>(x)"], 2);
        assert_eq!(
            expected_entry_step(&tree, &path("<0>")).unwrap(),
            state.ledger()["P<0>(x)"]
        );
    }

    #[test]
    fn leaf_fires_before_its_parent() {
        let tree = FiniteTree::from_paths([path("<0,0>")]);
        let theory = families::t_tree(&tree).unwrap();
        let state =
            ClosureState::new(theory, type_p(), tree_candidates(&tree), 1).unwrap();
        let adds = state.p_operator().unwrap();
        let keys: Vec<String> = adds.iter().map(|(c, _)| c.key()).collect();
        assert_eq!(keys, vec!["P<0,0>(x)".to_string()]);
    }

    #[test]
    fn empty_theory_fixes_immediately_with_rank_zero() {
        let theory = SchematicTheory::new(
            Vec::new(),
            Vec::new(),
            vec![
                crate::schematic::FamilySpec::new(
                    "P",
                    IndexKind::Path,
                    crate::schematic::TailPolicy::Absent,
                ),
                crate::schematic::FamilySpec::new(
                    "U",
                    IndexKind::Nat,
                    crate::schematic::TailPolicy::Full,
                ),
            ],
            None,
            None,
        )
        .unwrap();
        let pool = vec![PoolCandidate::Concrete(
            parse_formula("P<0>(x)", &theory.signature()).unwrap(),
        )];
        let state = iterate(theory, type_p(), pool, 5, 1).unwrap();
        assert_eq!(state.outcome(), Some(Outcome::Fixpoint { rank: 0 }));
        assert!(state.ledger().is_empty());
    }

    #[test]
    fn stepping_past_the_fixpoint_is_refused() {
        let tree = FiniteTree::singleton();
        let theory = families::t_tree(&tree).unwrap();
        let mut state = ClosureState::new(theory, type_p(), Vec::new(), 1).unwrap();
        assert!(state.closure_step().unwrap().is_empty());
        assert!(state.fixpoint_reached());
        assert!(matches!(
            state.closure_step(),
            Err(Error::AlreadyAtFixpoint)
        ));
    }

    #[test]
    fn isolation_on_the_rank2_run() {
        let theory = families::rank2_example().unwrap();
        let mut state = ClosureState::new(theory, type_p(), rank2_pool(), 1).unwrap();
        // Step 0: isolated by Q_0, but not strongly.
        let witness = state.is_isolated().unwrap().expect("isolated");
        assert_eq!(format_formula(&witness), "Q_0(x)");
        assert!(state.is_strongly_isolated().unwrap().is_none());
        // Stage 1: P isolates strongly (its existence is an axiom).
        state.closure_step().unwrap();
        let witness = state.is_strongly_isolated().unwrap().expect("strong");
        assert_eq!(format_formula(&witness), "P(x)");
    }

    #[test]
    fn isolation_vanishes_at_the_tree_fixpoint() {
        let tree = FiniteTree::from_paths([path("<0>"), path("<1>")]);
        let theory = families::t_tree(&tree).unwrap();
        let mut state =
            ClosureState::new(theory, type_p(), tree_candidates(&tree), 1).unwrap();
        assert!(state.is_isolated().unwrap().is_some());
        state.closure_step().unwrap();
        assert!(state.fixpoint_reached());
        assert!(state.is_isolated().unwrap().is_none());
        assert!(state.inconsistent_at().is_none());
    }

    #[test]
    fn deduction_trivial_cases() {
        let theory = families::rank2_example().unwrap();
        let sig = theory.signature();
        let phi = crate::logic::parse_sentence("E x. P(x)", &sig).unwrap();
        let pool = rank2_pool();
        let (l, r) = deduction_check(&theory, &phi, &phi, &type_p(), &pool, 6).unwrap();
        assert_eq!((l, r), (true, true));
        let bottomish = crate::logic::parse_sentence("E x. !(x = x)", &sig).unwrap();
        let (l, r) =
            deduction_check(&theory, &phi, &bottomish, &type_p(), &pool, 6).unwrap();
        assert_eq!(l, r);
    }

    #[test]
    fn stage_refutation_normal_form() {
        let tree = OrdinalTree::new(Ordinal::omega());
        let beta: Ordinal = "3".parse().unwrap();
        // rank(<2>) = 2 < 3.
        assert!(stage_refutes(&tree, &path("<2>"), &beta));
        // rank(<5>) = 5 >= 3.
        assert!(!stage_refutes(&tree, &path("<5>"), &beta));
        // Off the tree entirely.
        assert!(stage_refutes(&tree, &path("<0,0>"), &beta));
    }
}
