//! Monadic first-order logic with equality and counting quantifiers.
//!
//! The language has unary predicates only, variables, `x = y`, the boolean
//! connectives, `E`/`A` quantifiers and the counting quantifier `E>=n`,
//! which asserts at least `n` pairwise distinct witnesses. Satisfiability
//! and entailment over this fragment are decided by the region-profile
//! procedure in [`profile`]; [`FiniteModel::eval`] is the brute-force
//! evaluator used as its oracle.

mod parse;
mod profile;

pub use parse::{format_formula, parse_formula, parse_sentence, parse_template};
pub use profile::{
    entails, sat_profile, Card, ProfileConstraint, ProfileQuery, RegionProfile, SatOutcome,
};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::tree::NodePath;

/// A variable name.
pub type Var = String;

/// The index attached to a predicate family member.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PredIndex {
    /// A plain symbol such as `P`.
    None,
    /// A member of a naturally indexed family such as `U_3`.
    Nat(u64),
    /// A member of a path indexed family such as `P<1,0>`.
    Path(NodePath),
}

/// A concrete unary predicate symbol.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredicateSymbol {
    pub family: String,
    pub index: PredIndex,
}

impl PredicateSymbol {
    pub fn plain(family: impl Into<String>) -> Self {
        PredicateSymbol {
            family: family.into(),
            index: PredIndex::None,
        }
    }

    pub fn nat(family: impl Into<String>, i: u64) -> Self {
        PredicateSymbol {
            family: family.into(),
            index: PredIndex::Nat(i),
        }
    }

    pub fn path(family: impl Into<String>, s: NodePath) -> Self {
        PredicateSymbol {
            family: family.into(),
            index: PredIndex::Path(s),
        }
    }
}

impl fmt::Display for PredicateSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.index {
            PredIndex::None => write!(f, "{}", self.family),
            PredIndex::Nat(i) => write!(f, "{}_{}", self.family, i),
            PredIndex::Path(p) => write!(f, "{}{}", self.family, p),
        }
    }
}

/// How a family is indexed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexKind {
    None,
    Nat,
    Path,
}

/// An index position inside a schema template: either concrete or a
/// metavariable to be instantiated over the schema's range.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IndexTerm {
    Const(PredIndex),
    /// `U_i` with `i` a natural-number metavariable.
    MetaNat(String),
    /// `P<s>` with `s` a path metavariable.
    MetaPath(String),
    /// `P<s,i>`: the path metavariable `s` extended by the natural
    /// metavariable `i`.
    MetaChild(String, String),
}

/// A predicate occurrence inside a schema template.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TemplateSymbol {
    pub family: String,
    pub index: IndexTerm,
}

impl TemplateSymbol {
    /// Concrete symbols only; metavariables are an error here.
    pub fn resolve(&self) -> Result<PredicateSymbol> {
        match &self.index {
            IndexTerm::Const(ix) => Ok(PredicateSymbol {
                family: self.family.clone(),
                index: ix.clone(),
            }),
            other => Err(Error::Schema(format!(
                "metavariable index `{other:?}` in a concrete formula"
            ))),
        }
    }
}

impl fmt::Display for TemplateSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.index {
            IndexTerm::Const(ix) => PredicateSymbol {
                family: self.family.clone(),
                index: ix.clone(),
            }
            .fmt(f),
            IndexTerm::MetaNat(i) => write!(f, "{}_{}", self.family, i),
            IndexTerm::MetaPath(s) => write!(f, "{}<{}>", self.family, s),
            IndexTerm::MetaChild(s, i) => write!(f, "{}<{},{}>", self.family, s, i),
        }
    }
}

/// A formula whose predicate indices may contain metavariables.
pub type Template = Formula<TemplateSymbol>;

/// The declared predicate families a formula may use.
#[derive(Debug, Clone, Default)]
pub struct Signature {
    families: BTreeMap<String, IndexKind>,
}

impl Signature {
    pub fn new() -> Self {
        Signature::default()
    }

    pub fn declare(mut self, family: impl Into<String>, kind: IndexKind) -> Self {
        self.families.insert(family.into(), kind);
        self
    }

    pub fn kind_of(&self, family: &str) -> Option<IndexKind> {
        self.families.get(family).copied()
    }

    /// Checks that a symbol belongs to a declared family with the right
    /// index kind.
    pub fn check(&self, sym: &PredicateSymbol) -> Result<()> {
        let kind = self
            .kind_of(&sym.family)
            .ok_or_else(|| Error::UnknownPredicate(sym.to_string()))?;
        let ok = matches!(
            (kind, &sym.index),
            (IndexKind::None, PredIndex::None)
                | (IndexKind::Nat, PredIndex::Nat(_))
                | (IndexKind::Path, PredIndex::Path(_))
        );
        if ok {
            Ok(())
        } else {
            Err(Error::Sort(format!(
                "predicate `{sym}` does not match the index kind of family `{}`",
                sym.family
            )))
        }
    }
}

/// A formula of the monadic language, generic in the symbol type so the
/// same AST doubles as a schema template (see [`crate::schematic`]).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula<S = PredicateSymbol> {
    Pred(S, Var),
    Eq(Var, Var),
    Not(Box<Formula<S>>),
    And(Box<Formula<S>>, Box<Formula<S>>),
    Or(Box<Formula<S>>, Box<Formula<S>>),
    Implies(Box<Formula<S>>, Box<Formula<S>>),
    Exists(Var, Box<Formula<S>>),
    Forall(Var, Box<Formula<S>>),
    /// `E>=n x. body` with `n >= 1`.
    CountExists(u32, Var, Box<Formula<S>>),
}

impl<S> Formula<S> {
    pub fn pred(sym: S, var: impl Into<Var>) -> Self {
        Formula::Pred(sym, var.into())
    }

    pub fn eq(a: impl Into<Var>, b: impl Into<Var>) -> Self {
        Formula::Eq(a.into(), b.into())
    }

    pub fn not(self) -> Self {
        Formula::Not(Box::new(self))
    }

    pub fn and(self, rhs: Self) -> Self {
        Formula::And(Box::new(self), Box::new(rhs))
    }

    pub fn or(self, rhs: Self) -> Self {
        Formula::Or(Box::new(self), Box::new(rhs))
    }

    pub fn implies(self, rhs: Self) -> Self {
        Formula::Implies(Box::new(self), Box::new(rhs))
    }

    pub fn exists(var: impl Into<Var>, body: Self) -> Self {
        Formula::Exists(var.into(), Box::new(body))
    }

    pub fn forall(var: impl Into<Var>, body: Self) -> Self {
        Formula::Forall(var.into(), Box::new(body))
    }

    /// Panics on a zero threshold; the parser rejects `E>=0` before this.
    pub fn count_exists(n: u32, var: impl Into<Var>, body: Self) -> Self {
        assert!(n >= 1, "counting threshold must be at least 1");
        Formula::CountExists(n, var.into(), Box::new(body))
    }

    /// Rewrites every symbol, preserving the shape.
    pub fn map_symbols<T>(&self, f: &mut impl FnMut(&S) -> Result<T>) -> Result<Formula<T>> {
        Ok(match self {
            Formula::Pred(s, v) => Formula::Pred(f(s)?, v.clone()),
            Formula::Eq(a, b) => Formula::Eq(a.clone(), b.clone()),
            Formula::Not(a) => Formula::Not(Box::new(a.map_symbols(f)?)),
            Formula::And(a, b) => {
                Formula::And(Box::new(a.map_symbols(f)?), Box::new(b.map_symbols(f)?))
            }
            Formula::Or(a, b) => {
                Formula::Or(Box::new(a.map_symbols(f)?), Box::new(b.map_symbols(f)?))
            }
            Formula::Implies(a, b) => {
                Formula::Implies(Box::new(a.map_symbols(f)?), Box::new(b.map_symbols(f)?))
            }
            Formula::Exists(v, a) => Formula::Exists(v.clone(), Box::new(a.map_symbols(f)?)),
            Formula::Forall(v, a) => Formula::Forall(v.clone(), Box::new(a.map_symbols(f)?)),
            Formula::CountExists(n, v, a) => {
                Formula::CountExists(*n, v.clone(), Box::new(a.map_symbols(f)?))
            }
        })
    }

    /// All symbols, in syntactic order (may repeat).
    pub fn symbols(&self) -> Vec<&S> {
        let mut out = Vec::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols<'a>(&'a self, out: &mut Vec<&'a S>) {
        match self {
            Formula::Pred(s, _) => out.push(s),
            Formula::Eq(_, _) => {}
            Formula::Not(a) => a.collect_symbols(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
            Formula::Exists(_, a) | Formula::Forall(_, a) | Formula::CountExists(_, _, a) => {
                a.collect_symbols(out)
            }
        }
    }

    /// Free variables in order of first occurrence.
    pub fn free_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Var>, out: &mut Vec<Var>) {
        let visit = |v: &Var, bound: &Vec<Var>, out: &mut Vec<Var>| {
            if !bound.contains(v) && !out.contains(v) {
                out.push(v.clone());
            }
        };
        match self {
            Formula::Pred(_, v) => visit(v, bound, out),
            Formula::Eq(a, b) => {
                visit(a, bound, out);
                visit(b, bound, out);
            }
            Formula::Not(a) => a.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(v, a) | Formula::Forall(v, a) | Formula::CountExists(_, v, a) => {
                bound.push(v.clone());
                a.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// The formula with every bound variable renamed `prefix0, prefix1, ...`
    /// so it can be placed under binders of the original names.
    pub fn refresh_bound(&self, prefix: &str) -> Formula<S>
    where
        S: Clone,
    {
        fn go<S: Clone>(
            f: &Formula<S>,
            prefix: &str,
            next: &mut u32,
            map: &mut Vec<(Var, Var)>,
        ) -> Formula<S> {
            let resolve = |v: &Var, map: &Vec<(Var, Var)>| {
                map.iter()
                    .rev()
                    .find(|(old, _)| old == v)
                    .map(|(_, new)| new.clone())
                    .unwrap_or_else(|| v.clone())
            };
            match f {
                Formula::Pred(s, v) => Formula::Pred(s.clone(), resolve(v, map)),
                Formula::Eq(a, b) => Formula::Eq(resolve(a, map), resolve(b, map)),
                Formula::Not(a) => go(a, prefix, next, map).not(),
                Formula::And(a, b) => go(a, prefix, next, map).and(go(b, prefix, next, map)),
                Formula::Or(a, b) => go(a, prefix, next, map).or(go(b, prefix, next, map)),
                Formula::Implies(a, b) => {
                    go(a, prefix, next, map).implies(go(b, prefix, next, map))
                }
                Formula::Exists(v, a) | Formula::Forall(v, a) | Formula::CountExists(_, v, a) => {
                    let fresh = format!("{prefix}{next}");
                    *next += 1;
                    map.push((v.clone(), fresh.clone()));
                    let body = go(a, prefix, next, map);
                    map.pop();
                    match f {
                        Formula::Exists(..) => Formula::exists(fresh, body),
                        Formula::Forall(..) => Formula::forall(fresh, body),
                        Formula::CountExists(n, ..) => Formula::count_exists(*n, fresh, body),
                        _ => unreachable!(),
                    }
                }
            }
        }
        go(self, prefix, &mut 0, &mut Vec::new())
    }

    /// Rejects a variable bound twice along one quantifier path and zero
    /// counting thresholds.
    fn check_bindings(&self, scope: &mut Vec<Var>) -> Result<()> {
        match self {
            Formula::Pred(..) | Formula::Eq(..) => Ok(()),
            Formula::Not(a) => a.check_bindings(scope),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.check_bindings(scope)?;
                b.check_bindings(scope)
            }
            Formula::Exists(v, a) | Formula::Forall(v, a) | Formula::CountExists(_, v, a) => {
                if let Formula::CountExists(0, ..) = self {
                    return Err(Error::Invalid("counting threshold must be >= 1".into()));
                }
                if scope.contains(v) {
                    return Err(Error::Variable(format!("`{v}` is bound twice")));
                }
                scope.push(v.clone());
                a.check_bindings(scope)?;
                scope.pop();
                Ok(())
            }
        }
    }
}

impl Formula<PredicateSymbol> {
    /// The distinct predicate symbols of the formula.
    pub fn predicates(&self) -> BTreeSet<PredicateSymbol> {
        self.symbols().into_iter().cloned().collect()
    }
}

impl fmt::Display for Formula<PredicateSymbol> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&parse::format_formula(self))
    }
}

/// A closed formula.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sentence(Formula);

impl Sentence {
    pub fn new(f: Formula) -> Result<Self> {
        let free = f.free_vars();
        if let Some(v) = free.first() {
            return Err(Error::Variable(format!(
                "`{v}` is free in what must be a sentence"
            )));
        }
        f.check_bindings(&mut Vec::new())?;
        Ok(Sentence(f))
    }

    /// Closes a formula by existentially quantifying its free variables,
    /// in order of first occurrence.
    pub fn existential_closure(f: Formula) -> Result<Self> {
        let mut out = f.clone();
        for v in f.free_vars().into_iter().rev() {
            out = Formula::exists(v, out);
        }
        Sentence::new(out)
    }

    /// Closes a formula universally.
    pub fn universal_closure(f: Formula) -> Result<Self> {
        let mut out = f.clone();
        for v in f.free_vars().into_iter().rev() {
            out = Formula::forall(v, out);
        }
        Sentence::new(out)
    }

    /// `!E xs. f` for the free variables of `f` — the refutation shape the
    /// closure calculus derives.
    pub fn negated_existential(f: Formula) -> Result<Self> {
        let closed = Sentence::existential_closure(f)?;
        Ok(Sentence(closed.0.not()))
    }

    pub fn formula(&self) -> &Formula {
        &self.0
    }

    pub fn into_formula(self) -> Formula {
        self.0
    }

    pub fn negated(&self) -> Sentence {
        match &self.0 {
            Formula::Not(inner) => Sentence((**inner).clone()),
            other => Sentence(other.clone().not()),
        }
    }

    pub fn predicates(&self) -> BTreeSet<PredicateSymbol> {
        self.0.predicates()
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// The total counting budget of a formula: each `E`/`A` node contributes 1
/// and each `E>=n` contributes `n`. This is the truncation bound under
/// which profile semantics and model semantics agree.
pub fn quantifier_weight(f: &Formula) -> u64 {
    match f {
        Formula::Pred(..) | Formula::Eq(..) => 0,
        Formula::Not(a) => quantifier_weight(a),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            quantifier_weight(a) + quantifier_weight(b)
        }
        Formula::Exists(_, a) | Formula::Forall(_, a) => 1 + quantifier_weight(a),
        Formula::CountExists(n, _, a) => u64::from(*n) + quantifier_weight(a),
    }
}

/// An explicit finite structure: a domain `{0, .., domain_size-1}` and an
/// extension for each predicate. Extensions absent from the map are empty.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FiniteModel {
    domain_size: usize,
    extensions: BTreeMap<PredicateSymbol, BTreeSet<usize>>,
}

impl FiniteModel {
    pub fn new(domain_size: usize) -> Self {
        FiniteModel {
            domain_size,
            extensions: BTreeMap::new(),
        }
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    pub fn with_extension(
        mut self,
        sym: PredicateSymbol,
        elements: impl IntoIterator<Item = usize>,
    ) -> Self {
        let set: BTreeSet<usize> = elements.into_iter().collect();
        assert!(
            set.iter().all(|&e| e < self.domain_size),
            "extension outside the domain"
        );
        self.extensions.insert(sym, set);
        self
    }

    pub fn extension(&self, sym: &PredicateSymbol) -> Option<&BTreeSet<usize>> {
        self.extensions.get(sym)
    }

    pub fn holds(&self, sym: &PredicateSymbol, element: usize) -> bool {
        self.extensions.get(sym).is_some_and(|s| s.contains(&element))
    }

    /// Brute-force Tarskian truth. Quantifiers loop over the whole domain
    /// and `E>=n` counts distinct witnesses, which agrees with its
    /// expansion into fresh variables and disequalities.
    pub fn eval(&self, s: &Sentence) -> bool {
        self.eval_with(&mut Vec::new(), s.formula())
    }

    fn eval_with(&self, env: &mut Vec<(Var, usize)>, f: &Formula) -> bool {
        match f {
            Formula::Pred(sym, v) => self.holds(sym, lookup(env, v)),
            Formula::Eq(a, b) => lookup(env, a) == lookup(env, b),
            Formula::Not(a) => !self.eval_with(env, a),
            Formula::And(a, b) => self.eval_with(env, a) && self.eval_with(env, b),
            Formula::Or(a, b) => self.eval_with(env, a) || self.eval_with(env, b),
            Formula::Implies(a, b) => !self.eval_with(env, a) || self.eval_with(env, b),
            Formula::Exists(v, a) => (0..self.domain_size).any(|d| {
                env.push((v.clone(), d));
                let r = self.eval_with(env, a);
                env.pop();
                r
            }),
            Formula::Forall(v, a) => (0..self.domain_size).all(|d| {
                env.push((v.clone(), d));
                let r = self.eval_with(env, a);
                env.pop();
                r
            }),
            Formula::CountExists(n, v, a) => {
                let mut count = 0u32;
                for d in 0..self.domain_size {
                    env.push((v.clone(), d));
                    if self.eval_with(env, a) {
                        count += 1;
                    }
                    env.pop();
                    if count >= *n {
                        return true;
                    }
                }
                false
            }
        }
    }
}

fn lookup(env: &[(Var, usize)], v: &Var) -> usize {
    env.iter()
        .rev()
        .find(|(name, _)| name == v)
        .map(|(_, d)| *d)
        .unwrap_or_else(|| panic!("unbound variable `{v}` during evaluation"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(i: u64) -> PredicateSymbol {
        PredicateSymbol::nat("U", i)
    }

    fn sentence(text: &str) -> Sentence {
        let sig = Signature::new()
            .declare("U", IndexKind::Nat)
            .declare("P", IndexKind::Path);
        let f = parse_formula(text, &sig).unwrap();
        Sentence::new(f).unwrap()
    }

    #[test]
    fn eval_counting_examples() {
        let m = FiniteModel::new(2).with_extension(u(0), [0, 1]);
        assert!(m.eval(&sentence("E>=2 x. U_0(x)")));

        let m = FiniteModel::new(1);
        assert!(!m.eval(&sentence("E x. U_0(x)")));

        let m = FiniteModel::new(3).with_extension(u(0), [0, 1]);
        assert!(!m.eval(&sentence("E>=3 x. U_0(x)")));
    }

    #[test]
    fn counting_agrees_with_its_expansion() {
        // E>=2 x. U_0(x) versus E x. E y. x != y & U_0(x) & U_0(y).
        let expanded = sentence("E x. E y. !(x = y) & U_0(x) & U_0(y)");
        let counted = sentence("E>=2 x. U_0(x)");
        for size in 0..4 {
            for bits in 0..(1u32 << size) {
                let m = FiniteModel::new(size).with_extension(
                    u(0),
                    (0..size).filter(|i| bits & (1 << i) != 0),
                );
                assert_eq!(m.eval(&counted), m.eval(&expanded), "size {size} bits {bits:b}");
            }
        }
    }

    #[test]
    fn weight_examples() {
        assert_eq!(quantifier_weight(sentence("E x. U_0(x)").formula()), 1);
        assert_eq!(
            quantifier_weight(sentence("E>=3 x. U_0(x) & A y. U_0(y)").formula()),
            4
        );
        let open = Formula::pred(u(0), "x").and(Formula::eq("x", "y"));
        assert_eq!(quantifier_weight(&open), 0);
    }

    #[test]
    fn sentences_must_be_closed_and_well_bound() {
        assert!(Sentence::new(Formula::pred(u(0), "x")).is_err());
        let rebound = Formula::exists("x", Formula::exists("x", Formula::pred(u(0), "x")));
        assert!(Sentence::new(rebound).is_err());
        assert!(Sentence::new(Formula::exists("x", Formula::eq("x", "x"))).is_ok());
    }

    #[test]
    fn empty_domain_semantics() {
        let m = FiniteModel::new(0);
        assert!(!m.eval(&sentence("E x. x = x")));
        assert!(m.eval(&sentence("A x. U_0(x)")));
    }
}
