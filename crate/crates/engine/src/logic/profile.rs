//! The region-profile decision procedure for monadic logic with counting.
//!
//! A model of a monadic signature is determined, up to the truth of any
//! sentence, by how many elements lie in each *region* (each boolean
//! combination of the predicates). A [`RegionProfile`] records one
//! cardinality per region, truncated at a stated bound `K` with `oo` for
//! infinite regions. Truth of a sentence of quantifier weight `w <= K`
//! depends only on the profile truncated at `w`, so satisfiability over
//! profiles coincides with satisfiability over structures.
//!
//! The procedure has three layers:
//!
//! 1. every sentence is normalized into a boolean combination of counting
//!    atoms `|cell_1 u ... u cell_m| >= n` by eliminating quantifiers
//!    innermost first (equalities with outer variables are handled by a
//!    finite case split over the diagram of the pinned variables);
//! 2. a small DPLL search assigns truth values to the counting atoms,
//!    propagating through the sentence structure;
//! 3. a placement check decides whether a polarity assignment is realizable
//!    by actual cardinalities, building a witness profile when it is.
//!
//! Constraints of the form "this region is infinite" enter layer 3 directly;
//! they encode axiom schemas whose instances are cofinal in strength and
//! cannot be captured by finitely many sentences.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::logic::{
    quantifier_weight, FiniteModel, Formula, PredicateSymbol, Sentence, Var,
};

/// Widest quantifier cell base the normalizer will expand.
const MAX_CELL_PREDS: usize = 12;
/// Most pinned outer variables one quantifier may interact with.
const MAX_PINNED: usize = 4;
/// Most distinct context leaves one elimination may case-split over.
const MAX_CONTEXT: usize = 12;
/// Widest active signature for the capped placement search.
const MAX_CAPPED_ACTIVE: usize = 14;

/// A conjunction of predicate literals; absent predicates are unconstrained.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub(crate) struct Cube {
    literals: BTreeMap<PredicateSymbol, bool>,
}

impl Cube {
    fn top() -> Self {
        Cube::default()
    }

    fn set(&mut self, p: PredicateSymbol, value: bool) {
        self.literals.insert(p, value);
    }

    fn get(&self, p: &PredicateSymbol) -> Option<bool> {
        self.literals.get(p).copied()
    }

    fn preds(&self) -> impl Iterator<Item = &PredicateSymbol> {
        self.literals.keys()
    }

    /// Whether every literal of `self` is present in `other`, so `other`
    /// implies `self`.
    fn subsumed_by_me(&self, other: &Cube) -> bool {
        self.literals
            .iter()
            .all(|(p, v)| other.get(p) == Some(*v))
    }

}

/// `|cells_1 u ... u cells_m| >= n` for pairwise disjoint cells.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct CountAtom {
    cells: Vec<Cube>,
    n: u64,
}

/// Intermediate shape during quantifier elimination: a boolean tree whose
/// leaves are open atoms on still-free variables plus closed counting atoms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Open {
    Const(bool),
    Pred(PredicateSymbol, Var),
    Eq(Var, Var),
    Count(CountAtom),
    Not(Box<Open>),
    And(Box<Open>, Box<Open>),
    Or(Box<Open>, Box<Open>),
}

impl Open {
    fn not(self) -> Open {
        match self {
            Open::Const(b) => Open::Const(!b),
            Open::Not(a) => *a,
            a => Open::Not(Box::new(a)),
        }
    }

    fn and(self, rhs: Open) -> Open {
        match (self, rhs) {
            (Open::Const(false), _) | (_, Open::Const(false)) => Open::Const(false),
            (Open::Const(true), b) => b,
            (a, Open::Const(true)) => a,
            (a, b) => Open::And(Box::new(a), Box::new(b)),
        }
    }

    fn or(self, rhs: Open) -> Open {
        match (self, rhs) {
            (Open::Const(true), _) | (_, Open::Const(true)) => Open::Const(true),
            (Open::Const(false), b) => b,
            (a, Open::Const(false)) => a,
            (a, b) => Open::Or(Box::new(a), Box::new(b)),
        }
    }

    fn eq_leaf(a: &Var, b: &Var) -> Open {
        if a == b {
            Open::Const(true)
        } else if a < b {
            Open::Eq(a.clone(), b.clone())
        } else {
            Open::Eq(b.clone(), a.clone())
        }
    }
}

/// A leaf that does not mention the variable being eliminated.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum CtxLeaf {
    Pred(PredicateSymbol, Var),
    Eq(Var, Var),
    Count(CountAtom),
}

impl CtxLeaf {
    fn to_open(&self) -> Open {
        match self {
            CtxLeaf::Pred(p, v) => Open::Pred(p.clone(), v.clone()),
            CtxLeaf::Eq(a, b) => Open::Eq(a.clone(), b.clone()),
            CtxLeaf::Count(c) => Open::Count(c.clone()),
        }
    }
}

fn from_formula(f: &Formula) -> Result<Open> {
    Ok(match f {
        Formula::Pred(p, v) => Open::Pred(p.clone(), v.clone()),
        Formula::Eq(a, b) => Open::eq_leaf(a, b),
        Formula::Not(a) => from_formula(a)?.not(),
        Formula::And(a, b) => from_formula(a)?.and(from_formula(b)?),
        Formula::Or(a, b) => from_formula(a)?.or(from_formula(b)?),
        Formula::Implies(a, b) => from_formula(a)?.not().or(from_formula(b)?),
        Formula::Exists(v, a) => eliminate(1, v, from_formula(a)?)?,
        Formula::CountExists(n, v, a) => eliminate(u64::from(*n), v, from_formula(a)?)?,
        Formula::Forall(v, a) => eliminate(1, v, from_formula(a)?.not())?.not(),
    })
}

/// Eliminates `E>=n x. body`, where `body` is quantifier-free in `x`.
///
/// The number of witnesses for `x` splits into fresh elements, counted per
/// cell over the predicates applied to `x`, and elements pinned to outer
/// variables through equalities. The outer variables' diagram (their
/// equality pattern and cells) and the remaining context leaves are finitely
/// case-split; each case contributes one counting atom.
fn eliminate(n: u64, x: &Var, body: Open) -> Result<Open> {
    let mut x_preds: BTreeSet<PredicateSymbol> = BTreeSet::new();
    let mut pinned: BTreeSet<Var> = BTreeSet::new();
    collect_x_leaves(&body, x, &mut x_preds, &mut pinned);
    let x_preds: Vec<PredicateSymbol> = x_preds.into_iter().collect();
    let pinned: Vec<Var> = pinned.into_iter().collect();
    if x_preds.len() > MAX_CELL_PREDS {
        return Err(Error::TooWide(format!(
            "{} predicates on one quantified variable",
            x_preds.len()
        )));
    }
    if pinned.len() > MAX_PINNED {
        return Err(Error::TooWide(format!(
            "{} equality-linked outer variables",
            pinned.len()
        )));
    }

    let mut context: BTreeSet<CtxLeaf> = BTreeSet::new();
    collect_context(&body, x, &x_preds, &pinned, &mut context);
    let context: Vec<CtxLeaf> = context.into_iter().collect();
    if context.len() > MAX_CONTEXT {
        return Err(Error::TooWide(format!(
            "{} context leaves under one quantifier",
            context.len()
        )));
    }

    let cell_count = 1u64 << x_preds.len();
    let mut result = Open::Const(false);
    for partition in partitions(&pinned) {
        let class_count = partition.len();
        let mut cells = vec![0u64; class_count];
        loop {
            for ctx_bits in 0..(1u64 << context.len()) {
                let case = Case {
                    x,
                    x_preds: &x_preds,
                    classes: &partition,
                    class_cells: &cells,
                    context: &context,
                    ctx_bits,
                };
                result = result.or(case.outcome(n, &body, cell_count));
            }
            // Advance the per-class cell assignment like a counter.
            let mut k = 0;
            loop {
                if k == class_count {
                    break;
                }
                cells[k] += 1;
                if cells[k] < cell_count {
                    break;
                }
                cells[k] = 0;
                k += 1;
            }
            if class_count == 0 || k == class_count {
                break;
            }
        }
        if class_count == 0 {
            break; // single empty partition; the cell loop ran once
        }
    }
    Ok(result)
}

fn collect_x_leaves(
    o: &Open,
    x: &Var,
    x_preds: &mut BTreeSet<PredicateSymbol>,
    pinned: &mut BTreeSet<Var>,
) {
    match o {
        Open::Pred(p, v) if v == x => {
            x_preds.insert(p.clone());
        }
        Open::Eq(a, b) => {
            if a == x && b != x {
                pinned.insert(b.clone());
            } else if b == x && a != x {
                pinned.insert(a.clone());
            }
        }
        Open::Not(a) => collect_x_leaves(a, x, x_preds, pinned),
        Open::And(a, b) | Open::Or(a, b) => {
            collect_x_leaves(a, x, x_preds, pinned);
            collect_x_leaves(b, x, x_preds, pinned);
        }
        _ => {}
    }
}

/// Leaves whose truth is not fixed by the pinned diagram: predicates on
/// other variables outside the cell base, equalities reaching outside the
/// pinned set, and closed counting atoms.
fn collect_context(
    o: &Open,
    x: &Var,
    x_preds: &[PredicateSymbol],
    pinned: &[Var],
    out: &mut BTreeSet<CtxLeaf>,
) {
    match o {
        Open::Pred(p, v) => {
            if v != x && !(pinned.contains(v) && x_preds.contains(p)) {
                out.insert(CtxLeaf::Pred(p.clone(), v.clone()));
            }
        }
        Open::Eq(a, b) => {
            if a != x && b != x && !(pinned.contains(a) && pinned.contains(b)) {
                out.insert(CtxLeaf::Eq(a.clone(), b.clone()));
            }
        }
        Open::Count(c) => {
            out.insert(CtxLeaf::Count(c.clone()));
        }
        Open::Not(a) => collect_context(a, x, x_preds, pinned, out),
        Open::And(a, b) | Open::Or(a, b) => {
            collect_context(a, x, x_preds, pinned, out);
            collect_context(b, x, x_preds, pinned, out);
        }
        Open::Const(_) => {}
    }
}

/// All set partitions of `vars`.
fn partitions(vars: &[Var]) -> Vec<Vec<Vec<Var>>> {
    let mut out = vec![Vec::new()];
    for v in vars {
        let mut next = Vec::new();
        for p in out {
            for k in 0..=p.len() {
                let mut q = p.clone();
                if k == p.len() {
                    q.push(vec![v.clone()]);
                } else {
                    q[k].push(v.clone());
                }
                next.push(q);
            }
        }
        out = next;
    }
    out
}

/// One fully decided diagram of the outer variables and context leaves.
struct Case<'a> {
    x: &'a Var,
    x_preds: &'a [PredicateSymbol],
    classes: &'a [Vec<Var>],
    class_cells: &'a [u64],
    context: &'a [CtxLeaf],
    ctx_bits: u64,
}

enum XMode {
    Fresh(u64),
    PinnedTo(usize),
}

impl<'a> Case<'a> {
    fn ctx_value(&self, leaf: &CtxLeaf) -> bool {
        let idx = self
            .context
            .iter()
            .position(|l| l == leaf)
            .expect("leaf collected");
        self.ctx_bits & (1 << idx) != 0
    }

    fn class_of(&self, v: &Var) -> Option<usize> {
        self.classes.iter().position(|c| c.contains(v))
    }

    fn cell_bit(&self, cell: u64, p: &PredicateSymbol) -> bool {
        let idx = self.x_preds.iter().position(|q| q == p).expect("x pred");
        cell & (1 << idx) != 0
    }

    fn eval(&self, o: &Open, mode: &XMode) -> bool {
        match o {
            Open::Const(b) => *b,
            Open::Pred(p, v) => {
                if v == self.x {
                    match mode {
                        XMode::Fresh(cell) => self.cell_bit(*cell, p),
                        XMode::PinnedTo(k) => self.cell_bit(self.class_cells[*k], p),
                    }
                } else if let (Some(k), true) =
                    (self.class_of(v), self.x_preds.contains(p))
                {
                    self.cell_bit(self.class_cells[k], p)
                } else {
                    self.ctx_value(&CtxLeaf::Pred(p.clone(), v.clone()))
                }
            }
            Open::Eq(a, b) => {
                let (a, b) = (a, b);
                if a == self.x || b == self.x {
                    let other = if a == self.x { b } else { a };
                    match mode {
                        XMode::Fresh(_) => false,
                        XMode::PinnedTo(k) => self.classes[*k].contains(other),
                    }
                } else {
                    match (self.class_of(a), self.class_of(b)) {
                        (Some(i), Some(j)) => i == j,
                        _ => self.ctx_value(&CtxLeaf::Eq(a.clone(), b.clone())),
                    }
                }
            }
            Open::Count(c) => self.ctx_value(&CtxLeaf::Count(c.clone())),
            Open::Not(a) => !self.eval(a, mode),
            Open::And(a, b) => self.eval(a, mode) && self.eval(b, mode),
            Open::Or(a, b) => self.eval(a, mode) || self.eval(b, mode),
        }
    }

    /// `case condition /\ counting requirement` for this diagram.
    fn outcome(&self, n: u64, body: &Open, cell_count: u64) -> Open {
        let sat_cells: Vec<u64> = (0..cell_count)
            .filter(|&c| self.eval(body, &XMode::Fresh(c)))
            .collect();
        let sat_classes = (0..self.classes.len())
            .filter(|&k| self.eval(body, &XMode::PinnedTo(k)))
            .count() as i64;
        let pinned_in_sat = self
            .class_cells
            .iter()
            .filter(|c| sat_cells.contains(c))
            .count() as i64;
        // fresh-satisfying elements = sum over sat cells minus the pinned
        // values occupying them; pinned witnesses are counted separately.
        let required = n as i64 - sat_classes + pinned_in_sat;
        let count_cond = if required <= 0 {
            Open::Const(true)
        } else if sat_cells.is_empty() {
            Open::Const(false)
        } else {
            Open::Count(CountAtom {
                cells: sat_cells.iter().map(|&c| self.cell_cube(c)).collect(),
                n: required as u64,
            })
        };
        if matches!(count_cond, Open::Const(false)) {
            return Open::Const(false);
        }
        self.condition().and(count_cond)
    }

    fn cell_cube(&self, cell: u64) -> Cube {
        let mut cube = Cube::top();
        for (i, p) in self.x_preds.iter().enumerate() {
            cube.set(p.clone(), cell & (1 << i) != 0);
        }
        cube
    }

    /// The conjunction of literals pinning down this diagram.
    fn condition(&self) -> Open {
        let mut cond = Open::Const(true);
        for (i, ci) in self.classes.iter().enumerate() {
            for (j, cj) in self.classes.iter().enumerate() {
                if i < j {
                    let leaf = Open::eq_leaf(&ci[0], &cj[0]);
                    cond = cond.and(leaf.not());
                }
            }
            for pair in ci.windows(2) {
                cond = cond.and(Open::eq_leaf(&pair[0], &pair[1]));
            }
            for (k, p) in self.x_preds.iter().enumerate() {
                let leaf = Open::Pred(p.clone(), ci[0].clone());
                let lit = if self.class_cells[i] & (1 << k) != 0 {
                    leaf
                } else {
                    leaf.not()
                };
                cond = cond.and(lit);
            }
        }
        for (idx, leaf) in self.context.iter().enumerate() {
            let lit = if self.ctx_bits & (1 << idx) != 0 {
                leaf.to_open()
            } else {
                leaf.to_open().not()
            };
            cond = cond.and(lit);
        }
        cond
    }
}

/// A boolean combination of interned counting atoms.
#[derive(Debug, Clone)]
enum BoolExpr {
    Const(bool),
    Atom(usize),
    Not(Box<BoolExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
}

impl BoolExpr {
    fn eval3(&self, assign: &[Option<bool>]) -> Option<bool> {
        match self {
            BoolExpr::Const(b) => Some(*b),
            BoolExpr::Atom(i) => assign[*i],
            BoolExpr::Not(a) => a.eval3(assign).map(|b| !b),
            BoolExpr::And(a, b) => match (a.eval3(assign), b.eval3(assign)) {
                (Some(false), _) | (_, Some(false)) => Some(false),
                (Some(true), Some(true)) => Some(true),
                _ => None,
            },
            BoolExpr::Or(a, b) => match (a.eval3(assign), b.eval3(assign)) {
                (Some(true), _) | (_, Some(true)) => Some(true),
                (Some(false), Some(false)) => Some(false),
                _ => None,
            },
        }
    }

    fn atoms(&self, out: &mut BTreeSet<usize>) {
        match self {
            BoolExpr::Const(_) => {}
            BoolExpr::Atom(i) => {
                out.insert(*i);
            }
            BoolExpr::Not(a) => a.atoms(out),
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) => {
                a.atoms(out);
                b.atoms(out);
            }
        }
    }
}

#[derive(Debug, Clone, Default)]
struct AtomTable {
    atoms: Vec<CountAtom>,
    index: BTreeMap<CountAtom, usize>,
}

impl AtomTable {
    fn intern(&mut self, atom: CountAtom) -> usize {
        if let Some(&i) = self.index.get(&atom) {
            return i;
        }
        let i = self.atoms.len();
        self.index.insert(atom.clone(), i);
        self.atoms.push(atom);
        i
    }
}

fn to_bool_expr(o: &Open, table: &mut AtomTable) -> BoolExpr {
    match o {
        Open::Const(b) => BoolExpr::Const(*b),
        Open::Count(c) => BoolExpr::Atom(table.intern(c.clone())),
        Open::Not(a) => BoolExpr::Not(Box::new(to_bool_expr(a, table))),
        Open::And(a, b) => BoolExpr::And(
            Box::new(to_bool_expr(a, table)),
            Box::new(to_bool_expr(b, table)),
        ),
        Open::Or(a, b) => BoolExpr::Or(
            Box::new(to_bool_expr(a, table)),
            Box::new(to_bool_expr(b, table)),
        ),
        Open::Pred(p, v) => unreachable!("open predicate {p}({v}) survived normalization"),
        Open::Eq(a, b) => unreachable!("open equality {a} = {b} survived normalization"),
    }
}

/// A cardinality in a profile: exact up to the profile's bound, or infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Card {
    Finite(u64),
    Infinite,
}

/// An extra requirement imposed on profiles alongside the sentences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProfileConstraint {
    /// The elements inside all of `inside` and outside all of `outside`
    /// form an infinite set.
    InfiniteRegion {
        inside: Vec<PredicateSymbol>,
        outside: Vec<PredicateSymbol>,
    },
}

impl ProfileConstraint {
    pub fn infinite_inside(inside: impl IntoIterator<Item = PredicateSymbol>) -> Self {
        ProfileConstraint::InfiniteRegion {
            inside: inside.into_iter().collect(),
            outside: Vec::new(),
        }
    }

    fn cube(&self) -> Cube {
        let ProfileConstraint::InfiniteRegion { inside, outside } = self;
        let mut cube = Cube::top();
        for p in inside {
            cube.set(p.clone(), true);
        }
        for p in outside {
            cube.set(p.clone(), false);
        }
        cube
    }
}

/// The region cardinality map over a finite signature. Regions are subsets
/// of the signature; every region has exactly one cardinality, stored
/// sparsely with zero as the default.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionProfile {
    signature: Vec<PredicateSymbol>,
    counts: BTreeMap<u64, Card>,
    bound: u64,
}

impl RegionProfile {
    pub fn signature(&self) -> &[PredicateSymbol] {
        &self.signature
    }

    /// The truncation bound `K` this profile was built against.
    pub fn bound(&self) -> u64 {
        self.bound
    }

    /// The cardinality of the region of elements lying in exactly the
    /// predicates of `positive`. Predicates outside the signature are
    /// treated as everywhere false, so a region naming one is empty.
    pub fn cardinality(&self, positive: &BTreeSet<PredicateSymbol>) -> Card {
        let mut mask = 0u64;
        for p in positive {
            match self.signature.iter().position(|q| q == p) {
                Some(i) => mask |= 1 << i,
                None => return Card::Finite(0),
            }
        }
        self.counts.get(&mask).copied().unwrap_or(Card::Finite(0))
    }

    /// The nonzero regions, as (positive predicate set, cardinality) pairs.
    pub fn nonzero_regions(&self) -> Vec<(BTreeSet<PredicateSymbol>, Card)> {
        self.counts
            .iter()
            .map(|(mask, card)| {
                let set = self
                    .signature
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, p)| p.clone())
                    .collect();
                (set, *card)
            })
            .collect()
    }

    /// A finite model realizing the profile, with infinite regions replaced
    /// by `bound + 1` elements. Evaluation agrees with profile truth for
    /// sentences of quantifier weight at most `weight_bound`.
    pub fn materialize(&self, weight_bound: u64) -> FiniteModel {
        assert!(
            weight_bound <= self.bound,
            "weight bound {weight_bound} exceeds the profile bound {}",
            self.bound
        );
        let mut elements: Vec<u64> = Vec::new(); // region mask per element
        for (mask, card) in &self.counts {
            let copies = match card {
                Card::Finite(c) => *c,
                Card::Infinite => self.bound + 1,
            };
            for _ in 0..copies {
                elements.push(*mask);
            }
        }
        let mut model = FiniteModel::new(elements.len());
        for (i, p) in self.signature.iter().enumerate() {
            let ext: Vec<usize> = elements
                .iter()
                .enumerate()
                .filter(|(_, m)| *m & (1 << i) != 0)
                .map(|(e, _)| e)
                .collect();
            model = model.with_extension(p.clone(), ext);
        }
        model
    }

    /// Truth of a sentence over the profile, by quantifier relaxation onto
    /// regions (through the same normalization the solver uses).
    pub fn satisfies(&self, s: &Sentence) -> Result<bool> {
        let mut table = AtomTable::default();
        let expr = to_bool_expr(&from_formula(s.formula())?, &mut table);
        let assign: Vec<Option<bool>> = table
            .atoms
            .iter()
            .map(|a| Some(self.atom_truth(a)))
            .collect();
        Ok(expr.eval3(&assign).expect("fully assigned"))
    }

    fn atom_truth(&self, atom: &CountAtom) -> bool {
        let mut total = 0u64;
        for (mask, card) in &self.counts {
            if atom.cells.iter().any(|c| self.mask_in_cube(*mask, c)) {
                match card {
                    Card::Infinite => return true,
                    Card::Finite(c) => total += c,
                }
            }
        }
        total >= atom.n
    }

    fn mask_in_cube(&self, mask: u64, cube: &Cube) -> bool {
        cube.literals.iter().all(|(p, v)| {
            match self.signature.iter().position(|q| q == p) {
                Some(i) => (mask & (1 << i) != 0) == *v,
                None => !v, // unlisted predicates are empty
            }
        })
    }
}

/// The outcome of a profile satisfiability query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatOutcome {
    Sat(RegionProfile),
    Unsat,
}

impl SatOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatOutcome::Sat(_))
    }
}

/// A normalized satisfiability query, reusable across goals. Building one
/// normalizes every sentence once; [`ProfileQuery::entails`] then only has
/// to normalize the goal.
#[derive(Debug, Clone)]
pub struct ProfileQuery {
    signature: Vec<PredicateSymbol>,
    table: AtomTable,
    exprs: Vec<BoolExpr>,
    infinite: Vec<Cube>,
    weight: u64,
}

impl ProfileQuery {
    pub fn new(
        sentences: &[Sentence],
        extra_signature: &[PredicateSymbol],
        constraints: &[ProfileConstraint],
    ) -> Result<Self> {
        let mut q = ProfileQuery {
            signature: Vec::new(),
            table: AtomTable::default(),
            exprs: Vec::new(),
            infinite: constraints.iter().map(|c| c.cube()).collect(),
            weight: 0,
        };
        let mut sig: BTreeSet<PredicateSymbol> = extra_signature.iter().cloned().collect();
        for cube in &q.infinite {
            sig.extend(cube.preds().cloned());
        }
        for s in sentences {
            sig.extend(s.predicates());
        }
        q.signature = sig.into_iter().collect();
        for s in sentences {
            q.push(s)?;
        }
        Ok(q)
    }

    fn push(&mut self, s: &Sentence) -> Result<()> {
        let open = from_formula(s.formula())?;
        let expr = to_bool_expr(&open, &mut self.table);
        self.exprs.push(expr);
        self.weight += quantifier_weight(s.formula());
        for p in s.predicates() {
            if !self.signature.contains(&p) {
                self.signature.push(p);
                self.signature.sort();
            }
        }
        Ok(())
    }

    /// The query extended by further sentences.
    pub fn assuming(&self, extra: &[Sentence]) -> Result<ProfileQuery> {
        let mut q = self.clone();
        for s in extra {
            q.push(s)?;
        }
        Ok(q)
    }

    /// The truncation bound for this query.
    pub fn bound(&self) -> u64 {
        self.weight.max(1)
    }

    /// Decides satisfiability, producing a witness profile on success.
    pub fn solve(&self) -> Result<SatOutcome> {
        let mut search = Search {
            atoms: &self.table.atoms,
            exprs: &self.exprs,
            infinite: &self.infinite,
            assign: vec![None; self.table.atoms.len()],
        };
        match search.run()? {
            None => Ok(SatOutcome::Unsat),
            Some(regions) => {
                let bound = self
                    .bound()
                    .max(regions.iter().map(|(_, c)| match c {
                        Card::Finite(n) => *n,
                        Card::Infinite => 0,
                    })
                    .max()
                    .unwrap_or(0));
                let mut counts: BTreeMap<u64, Card> = BTreeMap::new();
                for (cube, card) in regions {
                    let mut mask = 0u64;
                    for (i, p) in self.signature.iter().enumerate() {
                        if cube.get(p) == Some(true) {
                            mask |= 1 << i;
                        }
                    }
                    let entry = counts.entry(mask).or_insert(Card::Finite(0));
                    *entry = match (*entry, card) {
                        (Card::Infinite, _) | (_, Card::Infinite) => Card::Infinite,
                        (Card::Finite(a), Card::Finite(b)) => Card::Finite(a + b),
                    };
                }
                let profile = RegionProfile {
                    signature: self.signature.clone(),
                    counts,
                    bound,
                };
                #[cfg(debug_assertions)]
                for expr in &self.exprs {
                    let assign: Vec<Option<bool>> = self
                        .table
                        .atoms
                        .iter()
                        .map(|a| Some(profile.atom_truth(a)))
                        .collect();
                    debug_assert_eq!(expr.eval3(&assign), Some(true), "witness check");
                }
                Ok(SatOutcome::Sat(profile))
            }
        }
    }

    /// Entailment by refutation: no profile satisfies the query plus the
    /// negated goal.
    pub fn entails(&self, goal: &Sentence) -> Result<bool> {
        Ok(!self.assuming(&[goal.negated()])?.solve()?.is_sat())
    }
}

/// Satisfiability of a sentence set over region profiles. The signature of
/// the resulting profile covers the sentences, the constraints, and `sig`.
pub fn sat_profile(
    sentences: &[Sentence],
    sig: &[PredicateSymbol],
    constraints: &[ProfileConstraint],
) -> Result<SatOutcome> {
    ProfileQuery::new(sentences, sig, constraints)?.solve()
}

/// `premises (+ constraints) |= goal`, decided by refutation.
pub fn entails(
    premises: &[Sentence],
    constraints: &[ProfileConstraint],
    goal: &Sentence,
) -> Result<bool> {
    ProfileQuery::new(premises, &[], constraints)?.entails(goal)
}

struct Search<'a> {
    atoms: &'a [CountAtom],
    exprs: &'a [BoolExpr],
    infinite: &'a [Cube],
    assign: Vec<Option<bool>>,
}

impl<'a> Search<'a> {
    fn run(&mut self) -> Result<Option<Vec<(Cube, Card)>>> {
        let mut trail = Vec::new();
        if !self.propagate(&mut trail) {
            self.undo(&trail);
            return Ok(None);
        }
        let undecided: Vec<usize> = (0..self.exprs.len())
            .filter(|&i| self.exprs[i].eval3(&self.assign).is_none())
            .collect();
        if undecided.is_empty() {
            if let Some(solution) = self.feasible()? {
                return Ok(Some(solution));
            }
            self.undo(&trail);
            return Ok(None);
        }
        let mut open_atoms = BTreeSet::new();
        self.exprs[undecided[0]].atoms(&mut open_atoms);
        let pick = open_atoms
            .into_iter()
            .find(|&a| self.assign[a].is_none())
            .expect("undecided expression has an unassigned atom");
        for value in [true, false] {
            self.assign[pick] = Some(value);
            let mut inner = vec![pick];
            match self.run_inner(&mut inner)? {
                Some(solution) => return Ok(Some(solution)),
                None => self.undo(&inner),
            }
        }
        self.undo(&trail);
        Ok(None)
    }

    fn run_inner(&mut self, trail: &mut Vec<usize>) -> Result<Option<Vec<(Cube, Card)>>> {
        // Same as `run`, but records its assignments on the caller's trail.
        if !self.propagate(trail) {
            return Ok(None);
        }
        let undecided: Vec<usize> = (0..self.exprs.len())
            .filter(|&i| self.exprs[i].eval3(&self.assign).is_none())
            .collect();
        if undecided.is_empty() {
            return self.feasible();
        }
        let mut open_atoms = BTreeSet::new();
        self.exprs[undecided[0]].atoms(&mut open_atoms);
        let pick = open_atoms
            .into_iter()
            .find(|&a| self.assign[a].is_none())
            .expect("undecided expression has an unassigned atom");
        for value in [true, false] {
            self.assign[pick] = Some(value);
            let mut inner = vec![pick];
            match self.run_inner(&mut inner)? {
                Some(solution) => return Ok(Some(solution)),
                None => self.undo(&inner),
            }
        }
        Ok(None)
    }

    fn undo(&mut self, trail: &[usize]) {
        for &a in trail {
            self.assign[a] = None;
        }
    }

    /// Unit propagation through the sentence structure plus a subsumption
    /// rule: an atom all of whose cells lie inside refuted cells must be
    /// false. Returns false on conflict.
    fn propagate(&mut self, trail: &mut Vec<usize>) -> bool {
        loop {
            let mut changed = false;
            for expr in self.exprs {
                match expr.eval3(&self.assign) {
                    Some(false) => return false,
                    Some(true) => continue,
                    None => {}
                }
                let mut atoms = BTreeSet::new();
                expr.atoms(&mut atoms);
                for a in atoms {
                    if self.assign[a].is_some() {
                        continue;
                    }
                    let mut forced = None;
                    self.assign[a] = Some(true);
                    if expr.eval3(&self.assign) == Some(false) {
                        forced = Some(false);
                    }
                    self.assign[a] = Some(false);
                    if expr.eval3(&self.assign) == Some(false) {
                        if forced.is_some() {
                            self.assign[a] = None;
                            return false;
                        }
                        forced = Some(true);
                    }
                    self.assign[a] = None;
                    if let Some(v) = forced {
                        self.assign[a] = Some(v);
                        trail.push(a);
                        changed = true;
                    }
                }
            }
            let forbidden = self.forbidden();
            for (i, atom) in self.atoms.iter().enumerate() {
                if self.assign[i].is_none() && atom_dead(atom, &forbidden) {
                    self.assign[i] = Some(false);
                    trail.push(i);
                    changed = true;
                }
            }
            if !changed {
                return true;
            }
        }
    }

    /// Cells that must be empty under the current assignment.
    fn forbidden(&self) -> Vec<Cube> {
        let mut out = Vec::new();
        for (i, atom) in self.atoms.iter().enumerate() {
            if self.assign[i] == Some(false) && atom.n == 1 {
                out.extend(atom.cells.iter().cloned());
            }
        }
        out
    }

    /// Decides whether the assigned polarities are realizable by actual
    /// cardinalities, and builds a witness region multiset when they are.
    fn feasible(&self) -> Result<Option<Vec<(Cube, Card)>>> {
        let forbidden = self.forbidden();
        let mut caps: Vec<(&[Cube], u64)> = Vec::new();
        let mut lowers: Vec<(&[Cube], u64)> = Vec::new();
        for (i, atom) in self.atoms.iter().enumerate() {
            match self.assign[i] {
                Some(true) => lowers.push((&atom.cells, atom.n)),
                Some(false) if atom.n >= 2 => caps.push((&atom.cells, atom.n - 1)),
                _ => {}
            }
        }

        let mut active: BTreeSet<PredicateSymbol> = BTreeSet::new();
        for cube in self
            .infinite
            .iter()
            .chain(forbidden.iter())
            .chain(caps.iter().flat_map(|(cells, _)| cells.iter()))
            .chain(lowers.iter().flat_map(|(cells, _)| cells.iter()))
        {
            active.extend(cube.preds().cloned());
        }
        let active: Vec<PredicateSymbol> = active.into_iter().collect();

        let mut avoid_for_infinite: Vec<Cube> = forbidden.clone();
        for (cells, _) in &caps {
            avoid_for_infinite.extend(cells.iter().cloned());
        }
        let mut placed: Vec<(Cube, Card)> = Vec::new();
        for cube in self.infinite {
            match find_region(cube, &avoid_for_infinite, &active) {
                Some(region) => placed.push((region, Card::Infinite)),
                None => return Ok(None),
            }
        }

        if caps.is_empty() {
            for (cells, n) in &lowers {
                let have: u64 = placed
                    .iter()
                    .map(|(r, card)| match card {
                        Card::Infinite if in_some_cell(r, cells) => u64::MAX,
                        Card::Finite(c) if in_some_cell(r, cells) => *c,
                        _ => 0,
                    })
                    .fold(0u64, u64::saturating_add);
                if have >= *n {
                    continue;
                }
                let found = cells
                    .iter()
                    .find_map(|cell| find_region(cell, &forbidden, &active));
                match found {
                    Some(region) => placed.push((region, Card::Finite(n - have))),
                    None => return Ok(None),
                }
            }
            return Ok(Some(placed));
        }

        // Capped search: counts interact, so place one element at a time
        // over representative regions.
        if active.len() > MAX_CAPPED_ACTIVE {
            return Err(Error::TooWide(format!(
                "{} active predicates under cardinality caps",
                active.len()
            )));
        }
        let candidates = enumerate_regions(&active, &forbidden);
        let mut counts: Vec<u64> = vec![0; candidates.len()];
        // Pre-commit the infinite placements against the caps (they avoid
        // all capped cells already, so contribute nothing to cap counts).
        if place_demands(&lowers, &caps, &candidates, &mut counts, &placed, 0) {
            for (i, c) in counts.iter().enumerate() {
                if *c > 0 {
                    placed.push((candidates[i].clone(), Card::Finite(*c)));
                }
            }
            Ok(Some(placed))
        } else {
            Ok(None)
        }
    }
}

fn atom_dead(atom: &CountAtom, forbidden: &[Cube]) -> bool {
    !forbidden.is_empty()
        && atom
            .cells
            .iter()
            .all(|cell| forbidden.iter().any(|f| f.subsumed_by_me(cell)))
}

fn in_some_cell(region: &Cube, cells: &[Cube]) -> bool {
    cells.iter().any(|c| c.subsumed_by_me(region))
}

/// A full assignment over `preds` extending `require` and avoiding every
/// cube in `avoid`, found by depth-first search.
fn find_region(require: &Cube, avoid: &[Cube], preds: &[PredicateSymbol]) -> Option<Cube> {
    fn dfs(partial: &mut Cube, idx: usize, preds: &[PredicateSymbol], avoid: &[Cube]) -> bool {
        if avoid.iter().any(|c| c.subsumed_by_me(partial)) {
            return false;
        }
        let Some(p) = preds.get(idx) else {
            return true;
        };
        if partial.get(p).is_some() {
            return dfs(partial, idx + 1, preds, avoid);
        }
        for value in [false, true] {
            partial.set(p.clone(), value);
            if dfs(partial, idx + 1, preds, avoid) {
                return true;
            }
        }
        partial.literals.remove(p);
        false
    }
    let mut partial = require.clone();
    dfs(&mut partial, 0, preds, avoid).then_some(partial)
}

/// All full regions over `preds` outside every forbidden cube.
fn enumerate_regions(preds: &[PredicateSymbol], forbidden: &[Cube]) -> Vec<Cube> {
    let mut out = Vec::new();
    let total = 1u64 << preds.len();
    for mask in 0..total {
        let mut cube = Cube::top();
        for (i, p) in preds.iter().enumerate() {
            cube.set(p.clone(), mask & (1 << i) != 0);
        }
        if !forbidden.iter().any(|f| f.subsumed_by_me(&cube)) {
            out.push(cube);
        }
    }
    out
}

/// Exhaustive one-element-at-a-time placement under caps.
fn place_demands(
    lowers: &[(&[Cube], u64)],
    caps: &[(&[Cube], u64)],
    candidates: &[Cube],
    counts: &mut Vec<u64>,
    infinite: &[(Cube, Card)],
    idx: usize,
) -> bool {
    let Some((cells, n)) = lowers.get(idx) else {
        return true;
    };
    let infinite_hit = infinite.iter().any(|(r, _)| in_some_cell(r, cells));
    let have: u64 = if infinite_hit {
        u64::MAX
    } else {
        candidates
            .iter()
            .zip(counts.iter())
            .filter(|(r, _)| in_some_cell(r, cells))
            .map(|(_, c)| *c)
            .sum()
    };
    if have >= *n {
        return place_demands(lowers, caps, candidates, counts, infinite, idx + 1);
    }
    for (i, region) in candidates.iter().enumerate() {
        if !in_some_cell(region, cells) {
            continue;
        }
        // Adding one element here must not break any cap.
        counts[i] += 1;
        let ok = caps.iter().all(|(cap_cells, max)| {
            let total: u64 = candidates
                .iter()
                .zip(counts.iter())
                .filter(|(r, _)| in_some_cell(r, cap_cells))
                .map(|(_, c)| *c)
                .sum();
            total <= *max
        });
        if ok && place_demands(lowers, caps, candidates, counts, infinite, idx) {
            return true;
        }
        counts[i] -= 1;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_sentence, IndexKind, Signature};

    fn sig() -> Signature {
        Signature::new()
            .declare("U", IndexKind::Nat)
            .declare("P", IndexKind::Path)
    }

    fn s(text: &str) -> Sentence {
        parse_sentence(text, &sig()).unwrap()
    }

    fn sym(text: &str) -> PredicateSymbol {
        match text {
            "U_0" => PredicateSymbol::nat("U", 0),
            "U_1" => PredicateSymbol::nat("U", 1),
            _ => panic!(),
        }
    }

    #[test]
    fn forced_exact_count() {
        let out = sat_profile(
            &[s("E>=3 x. U_0(x)"), s("!E>=4 x. U_0(x)")],
            &[],
            &[],
        )
        .unwrap();
        let SatOutcome::Sat(p) = out else { panic!("expected sat") };
        let mut region = BTreeSet::new();
        region.insert(sym("U_0"));
        assert_eq!(p.cardinality(&region), Card::Finite(3));
    }

    #[test]
    fn plain_contradiction_is_unsat() {
        let out = sat_profile(&[s("E x. U_0(x)"), s("A x. !U_0(x)")], &[], &[]).unwrap();
        assert_eq!(out, SatOutcome::Unsat);
    }

    #[test]
    fn entails_examples() {
        // {A x.(P<0>(x) -> U_0(x)), E x. P<0>(x)} |= E x. U_0(x)
        let t = [s("A x. (P<0>(x) -> U_0(x))"), s("E x. P<0>(x)")];
        assert!(entails(&t, &[], &s("E x. U_0(x)")).unwrap());
        // The empty theory does not force a witness.
        assert!(!entails(&[], &[], &s("E x. U_0(x)")).unwrap());
    }

    #[test]
    fn infinite_constraint_interacts_with_emptiness() {
        let core = ProfileConstraint::infinite_inside([sym("U_0")]);
        let out = sat_profile(&[s("!E x. U_0(x)")], &[], &[core.clone()]).unwrap();
        assert_eq!(out, SatOutcome::Unsat);
        let out = sat_profile(&[s("!E x. P<0>(x)")], &[], &[core]).unwrap();
        assert!(out.is_sat());
    }

    #[test]
    fn equality_and_counting_through_nesting() {
        // "at least two elements" phrased with nested quantifiers.
        let pair = s("E x. E y. !(x = y)");
        let out = sat_profile(&[pair.clone(), s("!E>=2 x. x = x")], &[], &[]).unwrap();
        assert_eq!(out, SatOutcome::Unsat);
        let out = sat_profile(&[pair], &[], &[]).unwrap();
        let SatOutcome::Sat(p) = out else { panic!() };
        let m = p.materialize(p.bound());
        assert!(m.domain_size() >= 2);
    }

    #[test]
    fn materialized_profiles_agree_with_profile_truth() {
        let sentences = [
            s("E>=2 x. U_0(x) & !U_1(x)"),
            s("A x. (P<0>(x) -> U_1(x))"),
            s("E x. P<0>(x)"),
        ];
        let SatOutcome::Sat(p) = sat_profile(&sentences, &[], &[]).unwrap() else {
            panic!()
        };
        let m = p.materialize(p.bound());
        for q in &sentences {
            assert_eq!(m.eval(q), p.satisfies(q).unwrap());
            assert!(m.eval(q));
        }
    }

    #[test]
    fn infinite_region_materializes_to_bound_plus_one() {
        let core = ProfileConstraint::infinite_inside([sym("U_0")]);
        let SatOutcome::Sat(p) = sat_profile(&[s("E x. U_0(x)")], &[], &[core]).unwrap()
        else {
            panic!()
        };
        let m = p.materialize(p.bound());
        let infinite_regions: Vec<_> = p
            .nonzero_regions()
            .into_iter()
            .filter(|(_, c)| *c == Card::Infinite)
            .collect();
        assert_eq!(infinite_regions.len(), 1);
        assert!(m.domain_size() as u64 >= p.bound() + 1);
    }
}
