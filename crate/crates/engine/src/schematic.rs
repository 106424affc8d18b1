//! Theories with infinitely many axioms, presented finitely.
//!
//! A [`SchematicTheory`] holds concrete sentences plus [`Schema`]s: closed
//! templates with index metavariables and a range over which the
//! metavariables run. Entailment over the infinite signature reduces to
//! profile queries over a finite *projection*: the schema instances whose
//! indices fall inside a finite index signature, together with profile
//! constraints standing in for schema groups whose instances are cofinal
//! in strength (the `core` flag).
//!
//! The reduction is faithful for the shipped families because unmentioned
//! family members have canonical interpretations (tail policies): an
//! unmentioned `Full`-family member is the whole domain, a `Core`-family
//! member is the region the core constraint keeps infinite, and an
//! `Absent`-family member is empty. A model of the projection extends to a
//! model of the whole theory by reading the tails canonically, and every
//! model of the theory restricts to one of the projection.
//!
//! Quantification over *all* members of a natural-indexed family (the
//! "for every index" premise of the closure calculus) is decided by
//! checking the listed indices plus one fresh representative index, with
//! the signature extended by the schema instances at the representative;
//! stability under the choice of representative is checked by the test
//! suites and can be probed directly.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logic::{
    format_formula, parse_formula, parse_template, Formula, IndexKind, IndexTerm, PredIndex,
    PredicateSymbol, ProfileConstraint, ProfileQuery, SatOutcome, Sentence, Signature, Template,
    TemplateSymbol,
};
use crate::tree::{FiniteTree, NodePath};

/// The canonical interpretation of family members outside a finite
/// signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailPolicy {
    /// Unmentioned members hold of the whole domain.
    Full,
    /// Unmentioned members are the always-infinite core region.
    Core,
    /// Unmentioned members are empty.
    Absent,
}

/// One predicate family: its name, how it is indexed, and its tail policy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilySpec {
    pub name: String,
    pub kind: IndexKind,
    pub tail: TailPolicy,
}

impl FamilySpec {
    pub fn new(name: impl Into<String>, kind: IndexKind, tail: TailPolicy) -> Self {
        FamilySpec {
            name: name.into(),
            kind,
            tail,
        }
    }
}

/// The range of a schema's metavariables. Tree-dependent ranges refer to
/// the theory's tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SchemaRange {
    /// `meta` runs over all naturals.
    AllNat { meta: String },
    /// Two independent natural metavariables.
    NatPairs { first: String, second: String },
    /// `(path, child)` runs over tree edges `s -> s^i` with `s` not the
    /// root. The template must be an implication whose antecedent carries
    /// the child symbol; off-tree children resolve it to its consequent.
    TreeEdges { path: String, child: String },
    /// `path` runs over terminating nodes, `nat` over all naturals.
    TerminatingTimesNat { path: String, nat: String },
    /// `path` runs over paths outside the tree.
    OutOfTree { path: String },
}

impl SchemaRange {
    fn provides(&self) -> Vec<(&str, IndexKind)> {
        match self {
            SchemaRange::AllNat { meta } => vec![(meta, IndexKind::Nat)],
            SchemaRange::NatPairs { first, second } => {
                vec![(first, IndexKind::Nat), (second, IndexKind::Nat)]
            }
            SchemaRange::TreeEdges { path, child } => {
                vec![(path, IndexKind::Path), (child, IndexKind::Nat)]
            }
            SchemaRange::TerminatingTimesNat { path, nat } => {
                vec![(path, IndexKind::Path), (nat, IndexKind::Nat)]
            }
            SchemaRange::OutOfTree { path } => vec![(path, IndexKind::Path)],
        }
    }

    fn needs_tree(&self) -> bool {
        matches!(
            self,
            SchemaRange::TreeEdges { .. }
                | SchemaRange::TerminatingTimesNat { .. }
                | SchemaRange::OutOfTree { .. }
        )
    }
}

/// An axiom schema: a closed template instantiated over a range of indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    template: Template,
    range: SchemaRange,
}

impl Schema {
    pub fn new(template: Template, range: SchemaRange) -> Result<Self> {
        let provided: BTreeMap<&str, IndexKind> = range.provides().into_iter().collect();
        for sym in template.symbols() {
            let used: Vec<(&str, IndexKind)> = match &sym.index {
                IndexTerm::Const(_) => Vec::new(),
                IndexTerm::MetaNat(m) => vec![(m.as_str(), IndexKind::Nat)],
                IndexTerm::MetaPath(m) => vec![(m.as_str(), IndexKind::Path)],
                IndexTerm::MetaChild(s, i) => {
                    vec![(s.as_str(), IndexKind::Path), (i.as_str(), IndexKind::Nat)]
                }
            };
            for (m, kind) in used {
                match provided.get(m) {
                    Some(k) if *k == kind => {}
                    Some(_) => {
                        return Err(Error::Schema(format!(
                            "metavariable `{m}` used at the wrong index kind"
                        )))
                    }
                    None => {
                        return Err(Error::Schema(format!(
                            "metavariable `{m}` is not bound by the schema range"
                        )))
                    }
                }
            }
        }
        if !template.free_vars().is_empty() {
            return Err(Error::Schema("schema template must be closed".into()));
        }
        if let SchemaRange::TreeEdges { path, child } = &range {
            let ok = matches!(&template, Formula::Implies(lhs, _)
                if lhs.symbols().iter().all(|s| {
                    matches!(&s.index, IndexTerm::MetaChild(p, c) if p == path && c == child)
                }) && !lhs.symbols().is_empty());
            if !ok {
                return Err(Error::Schema(
                    "a tree-edge schema is an implication whose antecedent \
                     mentions exactly the child symbol"
                        .into(),
                ));
            }
        }
        Ok(Schema { template, range })
    }

    pub fn template(&self) -> &Template {
        &self.template
    }

    pub fn range(&self) -> &SchemaRange {
        &self.range
    }

    /// The families in which a natural metavariable occurs; instance values
    /// for it range over the union of those families' signature sets.
    fn nat_meta_families(&self, meta: &str) -> BTreeSet<String> {
        self.template
            .symbols()
            .into_iter()
            .filter(|s| match &s.index {
                IndexTerm::MetaNat(m) => m == meta,
                IndexTerm::MetaChild(_, i) => i == meta,
                _ => false,
            })
            .map(|s| s.family.clone())
            .collect()
    }

    fn path_meta_family(&self, meta: &str) -> Option<String> {
        self.template
            .symbols()
            .into_iter()
            .find(|s| match &s.index {
                IndexTerm::MetaPath(m) => m == meta,
                IndexTerm::MetaChild(p, _) => p == meta,
                _ => false,
            })
            .map(|s| s.family.clone())
    }

    fn instantiate(&self, bind: &Bindings) -> Result<Sentence> {
        let f = self.template.map_symbols(&mut |sym: &TemplateSymbol| {
            let index = match &sym.index {
                IndexTerm::Const(ix) => ix.clone(),
                IndexTerm::MetaNat(m) => PredIndex::Nat(bind.nat(m)?),
                IndexTerm::MetaPath(m) => PredIndex::Path(bind.path(m)?.clone()),
                IndexTerm::MetaChild(s, i) => {
                    PredIndex::Path(bind.path(s)?.child(bind.nat(i)?))
                }
            };
            Ok(PredicateSymbol {
                family: sym.family.clone(),
                index,
            })
        })?;
        Sentence::new(f)
    }

    /// For tree-edge schemas at an off-tree child: the child predicate is
    /// empty, so the antecedent holds and the instance is its consequent.
    fn instantiate_consequent(&self, bind: &Bindings) -> Result<Sentence> {
        let Formula::Implies(_, rhs) = &self.template else {
            return Err(Error::Schema("not an implication schema".into()));
        };
        let schema = Schema {
            template: (**rhs).clone(),
            range: self.range.clone(),
        };
        schema.instantiate(bind)
    }
}

#[derive(Default)]
struct Bindings {
    nats: BTreeMap<String, u64>,
    paths: BTreeMap<String, NodePath>,
}

impl Bindings {
    fn nat(&self, m: &str) -> Result<u64> {
        self.nats
            .get(m)
            .copied()
            .ok_or_else(|| Error::Schema(format!("unbound natural metavariable `{m}`")))
    }

    fn path(&self, m: &str) -> Result<&NodePath> {
        self.paths
            .get(m)
            .ok_or_else(|| Error::Schema(format!("unbound path metavariable `{m}`")))
    }
}

/// Finite index sets per family: the working signature of a projection.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Support {
    nat: BTreeMap<String, BTreeSet<u64>>,
    path: BTreeMap<String, BTreeSet<NodePath>>,
}

impl Support {
    pub fn nat_indices(&self, family: &str) -> BTreeSet<u64> {
        self.nat.get(family).cloned().unwrap_or_default()
    }

    pub fn path_indices(&self, family: &str) -> BTreeSet<NodePath> {
        self.path.get(family).cloned().unwrap_or_default()
    }

    pub fn add_nat(&mut self, family: &str, i: u64) {
        self.nat.entry(family.to_string()).or_default().insert(i);
    }

    pub fn add_path(&mut self, family: &str, s: NodePath) {
        self.path.entry(family.to_string()).or_default().insert(s);
    }

    pub fn add_symbol(&mut self, sym: &PredicateSymbol) {
        match &sym.index {
            PredIndex::None => {}
            PredIndex::Nat(i) => self.add_nat(&sym.family, *i),
            PredIndex::Path(p) => self.add_path(&sym.family, p.clone()),
        }
    }

    /// Every natural index of any family, plus path entries: the pool fresh
    /// representatives must clear all of these.
    pub fn max_nat_anywhere(&self) -> Option<u64> {
        let from_nats = self.nat.values().flatten().copied().max();
        let from_paths = self
            .path
            .values()
            .flatten()
            .flat_map(|p| p.entries().iter().copied())
            .max();
        from_nats.max(from_paths)
    }

    fn is_subset_of(&self, other: &Support) -> Option<String> {
        for (fam, set) in &self.nat {
            for i in set {
                if !other.nat.get(fam).is_some_and(|s| s.contains(i)) {
                    return Some(format!("{fam}_{i}"));
                }
            }
        }
        for (fam, set) in &self.path {
            for p in set {
                if !other.path.get(fam).is_some_and(|s| s.contains(p)) {
                    return Some(format!("{fam}{p}"));
                }
            }
        }
        None
    }
}

/// A finitely presented theory: concrete sentences, schemas, family
/// declarations, the core flag, and the tree its ranges refer to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchematicTheory {
    sentences: Vec<Sentence>,
    schemas: Vec<Schema>,
    families: Vec<FamilySpec>,
    core_family: Option<String>,
    tree: Option<FiniteTree>,
}

impl SchematicTheory {
    pub fn new(
        sentences: Vec<Sentence>,
        schemas: Vec<Schema>,
        families: Vec<FamilySpec>,
        core_family: Option<String>,
        tree: Option<FiniteTree>,
    ) -> Result<Self> {
        let theory = SchematicTheory {
            sentences,
            schemas,
            families,
            core_family,
            tree,
        };
        theory.validate()?;
        Ok(theory)
    }

    fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for f in &self.families {
            if !seen.insert(&f.name) {
                return Err(Error::Invalid(format!(
                    "family `{}` is declared twice",
                    f.name
                )));
            }
        }
        let sig = self.signature();
        for s in &self.sentences {
            for p in s.predicates() {
                sig.check(&p)?;
                if p.index == PredIndex::Path(NodePath::root()) {
                    return Err(Error::Invalid(format!(
                        "`{p}` indexes a path family at the root; the root symbol does not exist"
                    )));
                }
            }
        }
        for schema in &self.schemas {
            if schema.range.needs_tree() && self.tree.is_none() {
                return Err(Error::Invalid(
                    "a tree-dependent schema range requires a tree".into(),
                ));
            }
            for sym in schema.template.symbols() {
                if self.family(&sym.family).is_none() {
                    return Err(Error::UnknownPredicate(sym.family.clone()));
                }
            }
        }
        if let Some(core) = &self.core_family {
            match self.family(core) {
                Some(f) if f.kind == IndexKind::Nat => {}
                _ => {
                    return Err(Error::Invalid(format!(
                        "core family `{core}` must be a declared natural-indexed family"
                    )))
                }
            }
        }
        Ok(())
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn schemas(&self) -> &[Schema] {
        &self.schemas
    }

    pub fn families(&self) -> &[FamilySpec] {
        &self.families
    }

    pub fn core_family(&self) -> Option<&str> {
        self.core_family.as_deref()
    }

    pub fn tree(&self) -> Option<&FiniteTree> {
        self.tree.as_ref()
    }

    pub fn family(&self, name: &str) -> Option<&FamilySpec> {
        self.families.iter().find(|f| f.name == name)
    }

    /// The parsing signature induced by the family declarations.
    pub fn signature(&self) -> Signature {
        let mut sig = Signature::new();
        for f in &self.families {
            sig = sig.declare(f.name.clone(), f.kind);
        }
        sig
    }

    /// The theory extended by derived sentences and schemas; used by the
    /// closure calculus to represent a stage without materializing it.
    pub fn extended(&self, sentences: &[Sentence], schemas: &[Schema]) -> Result<SchematicTheory> {
        let mut out = self.clone();
        out.sentences.extend(sentences.iter().cloned());
        out.schemas.extend(schemas.iter().cloned());
        out.validate()?;
        Ok(out)
    }

    /// All indices appearing in concrete sentences, in instances of the
    /// finite schema dimensions, in the tree, and in `extras`.
    pub fn support(&self, extras: &[&Formula]) -> Support {
        let mut out = Support::default();
        for s in &self.sentences {
            for p in s.predicates() {
                out.add_symbol(&p);
            }
        }
        for f in extras {
            for p in f.predicates() {
                out.add_symbol(&p);
            }
        }
        if let Some(tree) = &self.tree {
            for schema in &self.schemas {
                match &schema.range {
                    SchemaRange::TreeEdges { path, child } => {
                        if let Some(fam) = schema.path_meta_family(path) {
                            for s in tree.paths().filter(|s| !s.is_empty()) {
                                out.add_path(&fam, s.clone());
                                for i in tree.child_indices(s) {
                                    out.add_path(&fam, s.child(i));
                                    for f in schema.nat_meta_families(child) {
                                        out.add_nat(&f, i);
                                    }
                                }
                            }
                        }
                    }
                    SchemaRange::TerminatingTimesNat { path, .. } => {
                        if let Some(fam) = schema.path_meta_family(path) {
                            for s in tree.paths().filter(|s| !s.is_empty()) {
                                if tree.is_terminating(s) {
                                    out.add_path(&fam, s.clone());
                                }
                            }
                        }
                    }
                    _ => {}
                }
            }
            // Child indices occurring anywhere in the tree feed the
            // natural families through the edge schemas.
            for s in tree.paths() {
                for &i in s.entries() {
                    for f in &self.families {
                        if f.kind == IndexKind::Nat {
                            out.add_nat(&f.name, i);
                        }
                    }
                }
            }
        }
        out
    }

    /// The schema instances whose indices fall inside `sig`, plus the
    /// profile constraints standing in for the core schema. Fails when
    /// `sig` does not cover the support.
    pub fn project(&self, sig: &Support) -> Result<(Vec<Sentence>, Vec<ProfileConstraint>)> {
        if let Some(missing) = self.support(&[]).is_subset_of(sig) {
            return Err(Error::SignatureTooSmall(missing));
        }
        let mut sentences: BTreeSet<Sentence> = self.sentences.iter().cloned().collect();
        for schema in &self.schemas {
            self.project_schema(schema, sig, &mut sentences)?;
        }
        let mut constraints = Vec::new();
        if let Some(core) = &self.core_family {
            let inside: Vec<PredicateSymbol> = sig
                .nat_indices(core)
                .into_iter()
                .map(|i| PredicateSymbol::nat(core.clone(), i))
                .collect();
            constraints.push(ProfileConstraint::infinite_inside(inside));
        }
        Ok((sentences.into_iter().collect(), constraints))
    }

    fn project_schema(
        &self,
        schema: &Schema,
        sig: &Support,
        out: &mut BTreeSet<Sentence>,
    ) -> Result<()> {
        let nat_values = |meta: &str| -> Vec<u64> {
            let mut vals = BTreeSet::new();
            for fam in schema.nat_meta_families(meta) {
                vals.extend(sig.nat_indices(&fam));
            }
            vals.into_iter().collect()
        };
        match &schema.range {
            SchemaRange::AllNat { meta } => {
                for v in nat_values(meta) {
                    let mut b = Bindings::default();
                    b.nats.insert(meta.clone(), v);
                    out.insert(schema.instantiate(&b)?);
                }
            }
            SchemaRange::NatPairs { first, second } => {
                for v in nat_values(first) {
                    for w in nat_values(second) {
                        let mut b = Bindings::default();
                        b.nats.insert(first.clone(), v);
                        b.nats.insert(second.clone(), w);
                        out.insert(schema.instantiate(&b)?);
                    }
                }
            }
            SchemaRange::TreeEdges { path, child } => {
                let tree = self.tree.as_ref().expect("validated");
                let fam = schema
                    .path_meta_family(path)
                    .ok_or_else(|| Error::Schema(format!("unused path metavariable `{path}`")))?;
                for s in sig.path_indices(&fam) {
                    if s.is_empty() || !tree.contains(&s) {
                        continue; // off-tree parents are settled by their own emptiness axiom
                    }
                    for i in nat_values(child) {
                        let mut b = Bindings::default();
                        b.paths.insert(path.clone(), s.clone());
                        b.nats.insert(child.clone(), i);
                        if tree.contains(&s.child(i)) {
                            out.insert(schema.instantiate(&b)?);
                        } else {
                            out.insert(schema.instantiate_consequent(&b)?);
                        }
                    }
                }
            }
            SchemaRange::TerminatingTimesNat { path, nat } => {
                let tree = self.tree.as_ref().expect("validated");
                let fam = schema
                    .path_meta_family(path)
                    .ok_or_else(|| Error::Schema(format!("unused path metavariable `{path}`")))?;
                for s in sig.path_indices(&fam) {
                    if !tree.is_terminating(&s) || s.is_empty() {
                        continue;
                    }
                    for i in nat_values(nat) {
                        let mut b = Bindings::default();
                        b.paths.insert(path.clone(), s.clone());
                        b.nats.insert(nat.clone(), i);
                        out.insert(schema.instantiate(&b)?);
                    }
                }
            }
            SchemaRange::OutOfTree { path } => {
                let tree = self.tree.as_ref().expect("validated");
                let fam = schema
                    .path_meta_family(path)
                    .ok_or_else(|| Error::Schema(format!("unused path metavariable `{path}`")))?;
                for s in sig.path_indices(&fam) {
                    if !tree.contains(&s) {
                        let mut b = Bindings::default();
                        b.paths.insert(path.clone(), s.clone());
                        out.insert(schema.instantiate(&b)?);
                    }
                }
            }
        }
        Ok(())
    }

    /// A reusable satisfiability query for the projection at `sig`.
    pub fn projection_query(&self, sig: &Support) -> Result<ProfileQuery> {
        let (sentences, constraints) = self.project(sig)?;
        ProfileQuery::new(&sentences, &[], &constraints)
    }

    /// The support extended by fresh representative indices (one block per
    /// natural family) clearing every listed natural index and tree entry.
    pub fn fresh_signature(&self, base: &Support, offset: u64) -> (Support, u64) {
        let fresh = base.max_nat_anywhere().map_or(0, |m| m + 1) + offset;
        let mut sig = base.clone();
        for f in &self.families {
            if f.kind == IndexKind::Nat {
                sig.add_nat(&f.name, fresh);
            }
        }
        (sig, fresh)
    }

    /// Whether the theory entails `A xs. (phi -> f_i(x))` for *every* index
    /// `i` of the natural-indexed family `f`: all listed indices are
    /// checked, plus `probes` distinct fresh representatives (all of which
    /// must agree; disagreement is reported as an error).
    pub fn forall_index_entails(
        &self,
        phi: &Formula,
        type_family: &str,
        probes: u64,
    ) -> Result<bool> {
        let support = self.support(&[phi]);
        let mut answers = Vec::new();
        for probe in 0..probes.max(1) {
            let (sig, fresh) = self.fresh_signature(&support, probe);
            let query = self.projection_query(&sig)?;
            let mut indices = support.nat_indices(type_family);
            indices.insert(fresh);
            let mut all = true;
            for i in indices {
                if !query.entails(&type_member_goal(phi, type_family, i)?)? {
                    all = false;
                    break;
                }
            }
            answers.push(all);
        }
        if answers.windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::Invalid(format!(
                "fresh-index instability for `{}` over `{type_family}`",
                format_formula(phi)
            )));
        }
        Ok(answers[0])
    }

    /// Satisfiability of the projected theory at its own support plus one
    /// fresh block, so the verdict exercises the schemas at a representative
    /// unlisted index too.
    pub fn is_consistent(&self, extras: &[&Formula]) -> Result<bool> {
        let (sig, _) = self.fresh_signature(&self.support(extras), 0);
        Ok(self.projection_query(&sig)?.solve()?.is_sat())
    }

    /// Entailment of a single sentence over the projection at the union of
    /// the theory's support, the goal's symbols, and one fresh block.
    pub fn entails_sentence(&self, goal: &Sentence) -> Result<bool> {
        let support = self.support(&[goal.formula()]);
        let (sig, _) = self.fresh_signature(&support, 0);
        self.projection_query(&sig)?.entails(goal)
    }

    /// Satisfiability of the theory together with `extra` sentences.
    pub fn consistent_with(&self, extra: &[Sentence]) -> Result<bool> {
        let refs: Vec<&Formula> = extra.iter().map(|s| s.formula()).collect();
        let (sig, _) = self.fresh_signature(&self.support(&refs), 0);
        let query = self.projection_query(&sig)?;
        Ok(query.assuming(extra)?.solve()?.is_sat())
    }
}

/// `A xs. (phi -> f_i(x))` closed over the free variables of `phi`.
/// The family member applies to the first free variable.
pub fn type_member_goal(phi: &Formula, family: &str, index: u64) -> Result<Sentence> {
    let vars = phi.free_vars();
    let Some(first) = vars.first() else {
        return Err(Error::Variable(
            "a type candidate needs at least one free variable".into(),
        ));
    };
    let member = Formula::pred(PredicateSymbol::nat(family, index), first.clone());
    Sentence::universal_closure(phi.clone().implies(member))
}

impl fmt::Display for SchematicTheory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "sentences:")?;
        for s in &self.sentences {
            writeln!(f, "  {s}")?;
        }
        writeln!(f, "schemas:")?;
        for schema in &self.schemas {
            writeln!(f, "  {} @ {:?}", format_formula(&schema.template), schema.range)?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Theory files

#[derive(Serialize, Deserialize)]
struct TheoryRepr {
    sentences: Vec<String>,
    schemas: Vec<SchemaRepr>,
    families: Vec<FamilyRepr>,
    core: Option<String>,
    tree: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct SchemaRepr {
    template: String,
    #[serde(flatten)]
    range: RangeRepr,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "range", rename_all = "snake_case")]
enum RangeRepr {
    AllNat { meta: String },
    NatPairs { first: String, second: String },
    TreeEdges { path: String, child: String },
    Terminating { path: String, nat: String },
    OutOfTree { path: String },
}

impl SchematicTheory {
    /// The JSON document form shared with the command-line driver.
    pub fn to_json(&self) -> serde_json::Value {
        let repr = TheoryRepr {
            sentences: self.sentences.iter().map(|s| s.to_string()).collect(),
            schemas: self
                .schemas
                .iter()
                .map(|s| SchemaRepr {
                    template: format_formula(&s.template),
                    range: match s.range.clone() {
                        SchemaRange::AllNat { meta } => RangeRepr::AllNat { meta },
                        SchemaRange::NatPairs { first, second } => {
                            RangeRepr::NatPairs { first, second }
                        }
                        SchemaRange::TreeEdges { path, child } => {
                            RangeRepr::TreeEdges { path, child }
                        }
                        SchemaRange::TerminatingTimesNat { path, nat } => {
                            RangeRepr::Terminating { path, nat }
                        }
                        SchemaRange::OutOfTree { path } => RangeRepr::OutOfTree { path },
                    },
                })
                .collect(),
            families: self
                .families
                .iter()
                .map(|f| FamilyRepr {
                    name: f.name.clone(),
                    index: match f.kind {
                        IndexKind::None => "none",
                        IndexKind::Nat => "nat",
                        IndexKind::Path => "path",
                    }
                    .to_string(),
                    tail: f.tail,
                })
                .collect(),
            core: self.core_family.clone(),
            tree: self
                .tree
                .as_ref()
                .map(|t| t.paths().map(|p| p.to_string()).collect()),
        };
        serde_json::to_value(repr).expect("theory serialization")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let repr: TheoryRepr = serde_json::from_value(value.clone())
            .map_err(|e| Error::Invalid(format!("bad theory document: {e}")))?;
        let families: Vec<FamilySpec> = repr
            .families
            .iter()
            .map(|f| {
                let kind = match f.index.as_str() {
                    "none" => IndexKind::None,
                    "nat" => IndexKind::Nat,
                    "path" => IndexKind::Path,
                    other => {
                        return Err(Error::Invalid(format!("unknown index kind `{other}`")))
                    }
                };
                Ok(FamilySpec::new(f.name.clone(), kind, f.tail))
            })
            .collect::<Result<_>>()?;
        let sig = {
            let mut s = Signature::new();
            for f in &families {
                s = s.declare(f.name.clone(), f.kind);
            }
            s
        };
        let sentences: Vec<Sentence> = repr
            .sentences
            .iter()
            .map(|t| Sentence::new(parse_formula(t, &sig)?))
            .collect::<Result<_>>()?;
        let schemas: Vec<Schema> = repr
            .schemas
            .iter()
            .map(|s| {
                let template = parse_template(&s.template)?;
                let range = match &s.range {
                    RangeRepr::AllNat { meta } => SchemaRange::AllNat { meta: meta.clone() },
                    RangeRepr::NatPairs { first, second } => SchemaRange::NatPairs {
                        first: first.clone(),
                        second: second.clone(),
                    },
                    RangeRepr::TreeEdges { path, child } => SchemaRange::TreeEdges {
                        path: path.clone(),
                        child: child.clone(),
                    },
                    RangeRepr::Terminating { path, nat } => SchemaRange::TerminatingTimesNat {
                        path: path.clone(),
                        nat: nat.clone(),
                    },
                    RangeRepr::OutOfTree { path } => SchemaRange::OutOfTree { path: path.clone() },
                };
                Schema::new(template, range)
            })
            .collect::<Result<_>>()?;
        let tree = repr
            .tree
            .map(|paths| {
                let parsed: Result<Vec<NodePath>> = paths.iter().map(|p| p.parse()).collect();
                FiniteTree::new(parsed?)
            })
            .transpose()?;
        SchematicTheory::new(sentences, schemas, families, repr.core, tree)
    }
}

#[derive(Serialize, Deserialize)]
struct FamilyRepr {
    name: String,
    index: String,
    tail: TailPolicy,
}

/// Convenience: decide satisfiability of a plain sentence set under the
/// theory's constraints. Exposed for diagnostics.
pub fn satisfiable(theory: &SchematicTheory, extra: &[Sentence]) -> Result<SatOutcome> {
    let refs: Vec<&Formula> = extra.iter().map(|s| s.formula()).collect();
    let (sig, _) = theory.fresh_signature(&theory.support(&refs), 0);
    theory.projection_query(&sig)?.assuming(extra)?.solve()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;

    #[test]
    fn support_examples() {
        let tree = FiniteTree::from_paths([NodePath::new(vec![0])]);
        let theory = families::t_tree(&tree).unwrap();
        let support = theory.support(&[]);
        assert_eq!(support.nat_indices("U"), BTreeSet::from([0]));
        assert_eq!(
            support.path_indices("P"),
            BTreeSet::from([NodePath::new(vec![0])])
        );

        let empty = SchematicTheory::new(Vec::new(), Vec::new(), Vec::new(), None, None).unwrap();
        assert_eq!(empty.support(&[]), Support::default());

        let sig = theory.signature();
        let extra = parse_formula("A x. (P<0>(x) -> U_7(x))", &sig).unwrap();
        let support = theory.support(&[&extra]);
        assert!(support.nat_indices("U").contains(&7));
    }

    #[test]
    fn projection_of_a_single_leaf_tree() {
        let tree = FiniteTree::from_paths([NodePath::new(vec![0])]);
        let theory = families::t_tree(&tree).unwrap();
        let mut sig = theory.support(&[]);
        sig.add_nat("U", 1);
        let (sentences, constraints) = theory.project(&sig).unwrap();
        let texts: Vec<String> = sentences.iter().map(|s| s.to_string()).collect();
        assert!(texts.contains(&"A x. P<0>(x) -> U_0(x)".to_string()));
        assert!(texts.contains(&"A x. P<0>(x) -> U_1(x)".to_string()));
        assert_eq!(sentences.len(), 2, "{texts:?}");
        assert_eq!(constraints.len(), 1);
    }

    #[test]
    fn projection_emits_conditional_edges_and_off_tree_resolutions() {
        // Chain <> - <0> - <0,0>: the depth-2 edge is conditional, the
        // missing sibling <0,1> resolves to its consequent.
        let tree = FiniteTree::from_paths([NodePath::new(vec![0, 0])]);
        let theory = families::t_tree(&tree).unwrap();
        let mut sig = theory.support(&[]);
        sig.add_nat("U", 1);
        let (sentences, _) = theory.project(&sig).unwrap();
        let texts: Vec<String> = sentences.iter().map(|s| s.to_string()).collect();
        assert!(texts.contains(&"!(E x. P<0,0>(x)) -> A x. P<0>(x) -> U_0(x)".to_string()),
            "{texts:?}");
        assert!(texts.contains(&"A x. P<0>(x) -> U_1(x)".to_string()));
    }

    #[test]
    fn projection_includes_out_of_tree_emptiness() {
        let tree = FiniteTree::from_paths([NodePath::new(vec![0])]);
        let theory = families::t_tree(&tree).unwrap();
        let mut sig = theory.support(&[]);
        sig.add_path("P", NodePath::new(vec![3]));
        let (sentences, _) = theory.project(&sig).unwrap();
        let texts: Vec<String> = sentences.iter().map(|s| s.to_string()).collect();
        assert!(texts.contains(&"!(E x. P<3>(x))".to_string()), "{texts:?}");
        // Ex falso: the empty symbol implies anything.
        let goal = type_member_goal(
            &parse_formula("P<3>(x)", &theory.signature()).unwrap(),
            "U",
            0,
        )
        .unwrap();
        let query = theory.projection_query(&sig).unwrap();
        assert!(query.entails(&goal).unwrap());
    }

    #[test]
    fn rank2_projection_counts() {
        let theory = families::rank2_example().unwrap();
        let mut sig = Support::default();
        sig.add_nat("Q", 0);
        sig.add_nat("U", 0);
        sig.add_nat("U", 1);
        let (sentences, constraints) = theory.project(&sig).unwrap();
        assert_eq!(sentences.len(), 5, "{sentences:?}");
        assert_eq!(constraints.len(), 1);
    }

    #[test]
    fn signature_too_small_is_reported() {
        let tree = FiniteTree::from_paths([NodePath::new(vec![0])]);
        let theory = families::t_tree(&tree).unwrap();
        let err = theory.project(&Support::default());
        assert!(matches!(err, Err(Error::SignatureTooSmall(_))));
    }

    #[test]
    fn forall_index_entails_examples() {
        let tree = FiniteTree::from_paths([NodePath::new(vec![0])]);
        let theory = families::t_tree(&tree).unwrap();
        let sig = theory.signature();
        // The terminating-node schema covers every index.
        let leaf = parse_formula("P<0>(x)", &sig).unwrap();
        assert!(theory.forall_index_entails(&leaf, "U", 3).unwrap());
        // Nothing forces an arbitrary element into a fresh U.
        let anything = parse_formula("x = x", &sig).unwrap();
        assert!(!theory.forall_index_entails(&anything, "U", 3).unwrap());
        // Axiomatic in the rank-2 theory.
        let rank2 = families::rank2_example().unwrap();
        let q0 = parse_formula("Q_0(x)", &rank2.signature()).unwrap();
        assert!(rank2.forall_index_entails(&q0, "U", 3).unwrap());
    }

    #[test]
    fn theory_files_round_trip() {
        let tree = FiniteTree::from_paths([NodePath::new(vec![0, 0]), NodePath::new(vec![1])]);
        let theory = families::t_tree(&tree).unwrap();
        let json = theory.to_json();
        let back = SchematicTheory::from_json(&json).unwrap();
        assert_eq!(theory, back);
        let rank2 = families::rank2_example().unwrap();
        assert_eq!(
            SchematicTheory::from_json(&rank2.to_json()).unwrap(),
            rank2
        );
    }
}
