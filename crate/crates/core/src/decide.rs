//! Exact implication for order dependencies by two-row pattern enumeration.
//!
//! Satisfaction of every supported statement is a property of row pairs and
//! is preserved under taking sub-tables. A constraint set therefore fails to
//! imply a goal iff some two-row table satisfies the set and falsifies the
//! goal, and a two-row table is determined (for our purposes) by whether each
//! attribute goes down, stays, or goes up between the rows. That gives `3ⁿ`
//! [`PairPattern`]s over `n` attributes, searched depth-first in attribute
//! name order with premises pruned as soon as their attributes are assigned.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instances::TableInstance;
use crate::model::{AttrSet, Attribute, ConstraintSet, Dependency, MarkedList};

/// Default cap on the number of attributes `decide` will enumerate over.
pub const DEFAULT_MAX_ATTRS: usize = 16;

/// Environment variable overriding [`DEFAULT_MAX_ATTRS`].
pub const MAX_ATTRS_ENV: &str = "ODENGINE_MAX_ATTRS";

const PARALLEL_THRESHOLD: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecideConfig {
    pub max_attrs: usize,
}

impl Default for DecideConfig {
    fn default() -> Self {
        DecideConfig { max_attrs: DEFAULT_MAX_ATTRS }
    }
}

impl DecideConfig {
    /// Default configuration, honouring `ODENGINE_MAX_ATTRS` when it parses.
    pub fn from_env() -> Self {
        let max_attrs = std::env::var(MAX_ATTRS_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_MAX_ATTRS);
        DecideConfig { max_attrs }
    }
}

/// Relation of the first row to the second on one attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rel {
    Lt,
    Eq,
    Gt,
}

impl Rel {
    pub const ALL: [Rel; 3] = [Rel::Lt, Rel::Eq, Rel::Gt];

    fn flip(self) -> Rel {
        match self {
            Rel::Lt => Rel::Gt,
            Rel::Eq => Rel::Eq,
            Rel::Gt => Rel::Lt,
        }
    }

    /// Cell values `(first, second)` used when materializing.
    pub fn cells(self) -> (i64, i64) {
        match self {
            Rel::Lt => (0, 1),
            Rel::Eq => (0, 0),
            Rel::Gt => (1, 0),
        }
    }
}

/// An abstract pair of rows: one [`Rel`] per attribute, attributes in name
/// order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PairPattern {
    attrs: Vec<Attribute>,
    rels: Vec<Rel>,
}

impl PairPattern {
    pub fn new(attrs: &AttrSet, rel_of: impl Fn(&Attribute) -> Rel) -> Self {
        let attrs: Vec<Attribute> = attrs.iter().cloned().collect();
        let rels = attrs.iter().map(rel_of).collect();
        PairPattern { attrs, rels }
    }

    pub fn attrs(&self) -> &[Attribute] {
        &self.attrs
    }

    pub fn rels(&self) -> &[Rel] {
        &self.rels
    }

    pub fn rel(&self, attr: &Attribute) -> Option<Rel> {
        self.attrs.binary_search(attr).ok().map(|i| self.rels[i])
    }

    /// The two-row table with values in `{0, 1}`.
    pub fn materialize(&self) -> TableInstance {
        materialize(&self.attrs, &self.rels)
    }
}

fn materialize(attrs: &[Attribute], rels: &[Rel]) -> TableInstance {
    let names: Vec<&str> = attrs.iter().map(Attribute::name).collect();
    let first = rels.iter().map(|r| r.cells().0).collect();
    let second = rels.iter().map(|r| r.cells().1).collect();
    TableInstance::from_ints(&names, &[first, second]).expect("pattern attributes are distinct")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Implied,
    /// A two-row table satisfying the constraints and falsifying the goal.
    NotImplied(TableInstance),
}

impl Verdict {
    pub fn is_implied(&self) -> bool {
        matches!(self, Verdict::Implied)
    }
}

/// A dependency over attribute positions.
#[derive(Debug, Clone)]
enum Compiled {
    Od(Vec<usize>, Vec<usize>),
    Equiv(Vec<usize>, Vec<usize>),
    Compat(Vec<usize>, Vec<usize>),
    Fd(Vec<usize>, Vec<usize>),
}

impl Compiled {
    fn new(d: &Dependency, attrs: &[Attribute]) -> Result<Self> {
        let pos = |a: &Attribute| {
            attrs
                .binary_search(a)
                .map_err(|_| Error::UnknownAttribute(a.clone()))
        };
        let list = |l: &MarkedList| -> Result<Vec<usize>> { l.canonicalize().iter().map(pos).collect() };
        let set = |s: &AttrSet| -> Result<Vec<usize>> { s.iter().map(pos).collect() };
        Ok(match d {
            Dependency::OrderDep { lhs, rhs } => Compiled::Od(list(lhs)?, list(rhs)?),
            Dependency::OrderEquiv { lhs, rhs } => Compiled::Equiv(list(lhs)?, list(rhs)?),
            Dependency::OrderCompat { lhs, rhs } => Compiled::Compat(list(lhs)?, list(rhs)?),
            Dependency::FuncDep { lhs, rhs } => Compiled::Fd(set(lhs)?, set(rhs)?),
            Dependency::Constant(a) => Compiled::Od(Vec::new(), vec![pos(a)?]),
        })
    }

    /// Highest position mentioned, i.e. when the statement becomes decidable
    /// during a left-to-right assignment.
    fn last_position(&self) -> Option<usize> {
        let (a, b) = match self {
            Compiled::Od(a, b) | Compiled::Equiv(a, b) | Compiled::Compat(a, b) | Compiled::Fd(a, b) => (a, b),
        };
        a.iter().chain(b.iter()).copied().max()
    }

    fn eval(&self, rels: &[Rel]) -> bool {
        match self {
            Compiled::Od(x, y) => od_holds(first_strict(x, rels), first_strict(y, rels)),
            Compiled::Equiv(x, y) => first_strict(x, rels) == first_strict(y, rels),
            Compiled::Compat(x, y) => !opposite(first_strict(x, rels), first_strict(y, rels)),
            Compiled::Fd(x, y) => !all_eq(x, rels) || all_eq(y, rels),
        }
    }
}

fn first_strict(list: &[usize], rels: &[Rel]) -> Rel {
    list.iter()
        .map(|&i| rels[i])
        .find(|r| *r != Rel::Eq)
        .unwrap_or(Rel::Eq)
}

fn all_eq(list: &[usize], rels: &[Rel]) -> bool {
    list.iter().all(|&i| rels[i] == Rel::Eq)
}

/// `X ↦ Y` on both orders of the pair, given the list comparisons.
fn od_holds(cx: Rel, cy: Rel) -> bool {
    match cx {
        Rel::Eq => cy == Rel::Eq,
        Rel::Lt => cy != Rel::Gt,
        Rel::Gt => cy != Rel::Lt,
    }
}

fn opposite(a: Rel, b: Rel) -> bool {
    a != Rel::Eq && b == a.flip()
}

/// Evaluates a dependency on an abstract row pair.
pub fn eval_on_pattern(d: &Dependency, p: &PairPattern) -> Result<bool> {
    Ok(Compiled::new(d, &p.attrs)?.eval(&p.rels))
}

struct Search {
    attrs: Vec<Attribute>,
    /// premises grouped by the position at which they become decidable
    premises_at: Vec<Vec<Compiled>>,
    goal: Compiled,
    goal_at: usize,
}

impl Search {
    fn new(attrs: Vec<Attribute>, premises: &[Dependency], goal: &Dependency) -> Result<Self> {
        let n = attrs.len();
        // slot 0 holds statements with no attributes; slot k+1 those whose
        // last position is k
        let mut premises_at = vec![Vec::new(); n + 1];
        for d in premises {
            let c = Compiled::new(d, &attrs)?;
            let slot = c.last_position().map_or(0, |p| p + 1);
            premises_at[slot].push(c);
        }
        let goal = Compiled::new(goal, &attrs)?;
        let goal_at = goal.last_position().map_or(0, |p| p + 1);
        Ok(Search { attrs, premises_at, goal, goal_at })
    }

    fn slot_ok(&self, slot: usize, rels: &[Rel]) -> bool {
        self.premises_at[slot].iter().all(|c| c.eval(rels))
    }

    /// Lexicographically first counterexample extending `rels`, whose first
    /// `rels.len()` positions are already checked.
    fn dfs(&self, rels: &mut Vec<Rel>) -> bool {
        let k = rels.len();
        if k == self.attrs.len() {
            return true;
        }
        for r in Rel::ALL {
            rels.push(r);
            let slot = k + 1;
            let ok = self.slot_ok(slot, rels) && !(slot == self.goal_at && self.goal.eval(rels));
            if ok && self.dfs(rels) {
                return true;
            }
            rels.pop();
        }
        false
    }

    fn run(&self) -> Option<Vec<Rel>> {
        let mut rels = Vec::with_capacity(self.attrs.len());
        if !self.slot_ok(0, &rels) || (self.goal_at == 0 && self.goal.eval(&rels)) {
            return None;
        }
        if self.attrs.len() < PARALLEL_THRESHOLD {
            return self.dfs(&mut rels).then_some(rels);
        }
        // Nine independent subtrees; find_map_first keeps the lexicographic
        // winner whatever the worker count.
        let prefixes: Vec<[Rel; 2]> = Rel::ALL
            .iter()
            .flat_map(|&a| Rel::ALL.iter().map(move |&b| [a, b]))
            .collect();
        prefixes.par_iter().find_map_first(|prefix| {
            let mut rels = Vec::with_capacity(self.attrs.len());
            for (k, r) in prefix.iter().enumerate() {
                rels.push(*r);
                let slot = k + 1;
                if !self.slot_ok(slot, &rels) || (slot == self.goal_at && self.goal.eval(&rels)) {
                    return None;
                }
            }
            self.dfs(&mut rels).then_some(rels)
        })
    }
}

fn working_universe(m: &ConstraintSet, goal: &Dependency) -> AttrSet {
    m.universe().union(&goal.attributes())
}

/// Decides `m ⊨ goal` with the default configuration (including the
/// environment override).
pub fn decide(m: &ConstraintSet, goal: &Dependency) -> Result<Verdict> {
    decide_with(m, goal, &DecideConfig::from_env())
}

/// Decides `m ⊨ goal`. Attributes of the goal outside `m`'s universe are
/// treated as unconstrained.
pub fn decide_with(m: &ConstraintSet, goal: &Dependency, config: &DecideConfig) -> Result<Verdict> {
    let universe = working_universe(m, goal);
    if universe.len() > config.max_attrs {
        return Err(Error::UniverseTooLarge { size: universe.len(), cap: config.max_attrs });
    }
    let attrs: Vec<Attribute> = universe.iter().cloned().collect();
    let search = Search::new(attrs, m.deps(), goal)?;
    Ok(match search.run() {
        None => Verdict::Implied,
        Some(rels) => Verdict::NotImplied(materialize(&search.attrs, &rels)),
    })
}

pub fn implies(m: &ConstraintSet, goal: &Dependency) -> Result<bool> {
    Ok(decide(m, goal)?.is_implied())
}

/// All patterns over a fixed universe that satisfy a constraint set. Answers
/// many implication queries against the same set without re-enumerating.
#[derive(Debug, Clone)]
pub struct ModelSet {
    attrs: Vec<Attribute>,
    models: Vec<Vec<Rel>>,
}

impl ModelSet {
    /// Cap for materializing every model (3¹⁰ = 59049 patterns).
    pub const MAX_ATTRS: usize = 10;

    pub fn new(m: &ConstraintSet) -> Result<Self> {
        let attrs: Vec<Attribute> = m.universe().iter().cloned().collect();
        if attrs.len() > Self::MAX_ATTRS {
            return Err(Error::UniverseTooLarge { size: attrs.len(), cap: Self::MAX_ATTRS });
        }
        let compiled = m
            .deps()
            .iter()
            .map(|d| Compiled::new(d, &attrs))
            .collect::<Result<Vec<_>>>()?;
        let mut models = Vec::new();
        let mut rels = Vec::with_capacity(attrs.len());
        collect_models(&compiled, attrs.len(), &mut rels, &mut models);
        Ok(ModelSet { attrs, models })
    }

    pub fn attrs(&self) -> &[Attribute] {
        &self.attrs
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn patterns(&self) -> impl Iterator<Item = PairPattern> + '_ {
        self.models.iter().map(|rels| PairPattern { attrs: self.attrs.clone(), rels: rels.clone() })
    }

    /// First model (in enumeration order) falsifying the goal.
    pub fn counterexample(&self, goal: &Dependency) -> Result<Option<PairPattern>> {
        let c = Compiled::new(goal, &self.attrs)?;
        Ok(self
            .models
            .iter()
            .find(|rels| !c.eval(rels))
            .map(|rels| PairPattern { attrs: self.attrs.clone(), rels: rels.clone() }))
    }

    pub fn implies(&self, goal: &Dependency) -> Result<bool> {
        let c = Compiled::new(goal, &self.attrs)?;
        Ok(self.models.iter().all(|rels| c.eval(rels)))
    }

    pub fn verdict(&self, goal: &Dependency) -> Result<Verdict> {
        Ok(match self.counterexample(goal)? {
            None => Verdict::Implied,
            Some(p) => Verdict::NotImplied(p.materialize()),
        })
    }
}

fn collect_models(deps: &[Compiled], n: usize, rels: &mut Vec<Rel>, out: &mut Vec<Vec<Rel>>) {
    if rels.len() == n {
        if deps.iter().all(|d| d.eval(rels)) {
            out.push(rels.clone());
        }
        return;
    }
    let k = rels.len();
    for r in Rel::ALL {
        rels.push(r);
        // prune on statements fully assigned at this depth
        let ok = deps
            .iter()
            .filter(|d| d.last_position() == Some(k))
            .all(|d| d.eval(rels));
        if ok {
            collect_models(deps, n, rels, out);
        }
        rels.pop();
    }
}

/// Canonical duplicate-free lists over `attrs` of length at most `max_len`,
/// shortest first, then in attribute order.
pub fn canonical_lists(attrs: &AttrSet, max_len: usize) -> Vec<MarkedList> {
    let pool: Vec<Attribute> = attrs.iter().cloned().collect();
    let mut out = vec![MarkedList::empty()];
    let mut frontier = vec![MarkedList::empty()];
    for _ in 0..max_len.min(pool.len()) {
        let mut next = Vec::new();
        for list in &frontier {
            for a in &pool {
                if !list.contains(a) {
                    let mut l = list.clone();
                    l.push(a.clone());
                    next.push(l);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Every implied order dependency between canonical lists of length at most
/// `max_len` over the universe of `m`.
pub fn closure(m: &ConstraintSet, max_len: usize) -> Result<BTreeSet<Dependency>> {
    let models = ModelSet::new(m)?;
    let lists = canonical_lists(m.universe(), max_len);
    let mut out = BTreeSet::new();
    for x in &lists {
        for y in &lists {
            let d = Dependency::od(x.clone(), y.clone());
            if models.implies(&d)? {
                out.insert(d);
            }
        }
    }
    Ok(out)
}

/// Do two constraint sets over the same universe imply each other?
pub fn equivalent_sets(m1: &ConstraintSet, m2: &ConstraintSet) -> Result<bool> {
    if m1.universe() != m2.universe() {
        return Err(Error::Schema(format!(
            "universes differ: {} vs {}",
            m1.universe(),
            m2.universe()
        )));
    }
    for d in m1.deps() {
        if !implies(m2, d)? {
            return Ok(false);
        }
    }
    for d in m2.deps() {
        if !implies(m1, d)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Is `[] ↦ [a]` implied?
pub fn is_constant(m: &ConstraintSet, a: &Attribute) -> Result<bool> {
    implies(m, &Dependency::od(MarkedList::empty(), MarkedList::single(a.clone())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::holds;

    fn l(names: &[&str]) -> MarkedList {
        MarkedList::of(names)
    }

    fn od(x: &[&str], y: &[&str]) -> Dependency {
        Dependency::od(l(x), l(y))
    }

    #[test]
    fn pattern_evaluation_shapes() {
        let attrs = AttrSet::of(&["A", "B"]);
        let pat = |a, b| {
            PairPattern::new(&attrs, |x: &Attribute| if x.name() == "A" { a } else { b })
        };
        assert!(!eval_on_pattern(&od(&["A"], &["B"]), &pat(Rel::Lt, Rel::Gt)).unwrap());
        assert!(!eval_on_pattern(&od(&["A"], &["B"]), &pat(Rel::Eq, Rel::Lt)).unwrap());
        for a in Rel::ALL {
            for b in Rel::ALL {
                assert!(eval_on_pattern(&od(&["A", "B"], &["A"]), &pat(a, b)).unwrap());
            }
        }
    }

    #[test]
    fn pattern_evaluation_matches_materialized_table() {
        let attrs = AttrSet::of(&["A", "B", "C"]);
        let deps = [
            od(&["A"], &["B", "C"]),
            Dependency::equiv(l(&["A", "B"]), l(&["C"])),
            Dependency::compat(l(&["A"]), l(&["C", "B"])),
            Dependency::fd(AttrSet::of(&["A"]), AttrSet::of(&["B"])),
            Dependency::constant(Attribute::new("C")),
        ];
        for a in Rel::ALL {
            for b in Rel::ALL {
                for c in Rel::ALL {
                    let rels = [a, b, c];
                    let p = PairPattern::new(&attrs, |x: &Attribute| match x.name() {
                        "A" => rels[0],
                        "B" => rels[1],
                        _ => rels[2],
                    });
                    let t = p.materialize();
                    for d in &deps {
                        assert_eq!(eval_on_pattern(d, &p).unwrap(), holds(&t, d).unwrap(), "{d} on {rels:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn transitivity_is_implied() {
        let m = ConstraintSet::new([od(&["A"], &["B"]), od(&["B"], &["C"])]);
        assert_eq!(decide(&m, &od(&["A"], &["C"])).unwrap(), Verdict::Implied);
    }

    #[test]
    fn converse_is_not_implied_with_expected_counterexample() {
        let m = ConstraintSet::new([od(&["A"], &["B"])]);
        let Verdict::NotImplied(t) = decide(&m, &od(&["B"], &["A"])).unwrap() else {
            panic!("expected a counterexample");
        };
        assert_eq!(t, TableInstance::from_ints(&["A", "B"], &[vec![0, 0], vec![1, 0]]).unwrap());
    }

    #[test]
    fn reflexive_and_left_eliminate_claims() {
        assert!(implies(&ConstraintSet::default(), &od(&["A", "B"], &["A"])).unwrap());
        let m = ConstraintSet::new([od(&["month"], &["quarter"])]);
        let goal = Dependency::equiv(l(&["year", "quarter", "month"]), l(&["year", "month"]));
        assert!(implies(&m, &goal).unwrap());
    }

    #[test]
    fn closure_small_cases() {
        let m = ConstraintSet::default().with_attributes([Attribute::new("A")]);
        let c = closure(&m, 1).unwrap();
        let expected: BTreeSet<_> = [od(&["A"], &["A"]), od(&["A"], &[]), od(&[], &[])].into_iter().collect();
        assert_eq!(c, expected);

        let m = ConstraintSet::new([od(&["A"], &["B"])]);
        let c = closure(&m, 2).unwrap();
        assert!(c.contains(&od(&["A"], &["A", "B"])) && c.contains(&od(&["A", "B"], &["A"])));

        let m = ConstraintSet::new([Dependency::constant(Attribute::new("A"))]);
        assert!(closure(&m, 1).unwrap().contains(&od(&[], &["A"])));
    }

    #[test]
    fn set_equivalence() {
        let a = ConstraintSet::new([od(&["A"], &["B"])]);
        let b = ConstraintSet::new([od(&["A"], &["A", "B"]), Dependency::equiv(l(&["A", "B"]), l(&["B", "A"]))]);
        assert!(equivalent_sets(&a, &b).unwrap());

        let empty = ConstraintSet::default().with_attributes([Attribute::new("A"), Attribute::new("B")]);
        assert!(equivalent_sets(&empty, &ConstraintSet::new([od(&["A", "B"], &["A"])])).unwrap());

        let c = ConstraintSet::new([od(&["B"], &["A"])]);
        assert!(!equivalent_sets(&a, &c).unwrap());

        let other = ConstraintSet::new([od(&["A"], &["C"])]);
        assert!(matches!(equivalent_sets(&a, &other), Err(Error::Schema(_))));
    }

    #[test]
    fn constants() {
        let a = Attribute::new("A");
        let b = Attribute::new("B");
        assert!(is_constant(&ConstraintSet::new([Dependency::constant(a.clone())]), &a).unwrap());
        assert!(!is_constant(&ConstraintSet::default().with_attributes([a.clone()]), &a).unwrap());
        let m = ConstraintSet::new([od(&[], &["A"]), od(&["A"], &["B"])]);
        assert!(is_constant(&m, &b).unwrap());
    }

    #[test]
    fn universe_cap_is_enforced() {
        let names: Vec<String> = (0..5).map(|i| format!("A{i}")).collect();
        let m = ConstraintSet::default().with_attributes(names.iter().map(Attribute::new));
        let goal = od(&["A0"], &["A1"]);
        let err = decide_with(&m, &goal, &DecideConfig { max_attrs: 4 }).unwrap_err();
        assert_eq!(err, Error::UniverseTooLarge { size: 5, cap: 4 });
    }

    #[test]
    fn parallel_and_sequential_agree() {
        // 11 attributes takes the parallel path; the sequential model set agrees
        let names: Vec<String> = (0..11).map(|i| format!("A{i:02}")).collect();
        let n: Vec<&str> = names.iter().map(String::as_str).collect();
        let m = ConstraintSet::new([od(&[n[0]], &[n[1]]), od(&[n[1], n[2]], &[n[3]])])
            .with_attributes(names.iter().map(Attribute::new));
        assert!(implies(&m, &od(&[n[0], n[2]], &[n[1]])).unwrap());
        assert!(implies(&m, &od(&[n[1], n[2], n[0]], &[n[3]])).unwrap());
        assert!(!implies(&m, &od(&[n[0], n[2]], &[n[1], n[3]])).unwrap());
        let goal = od(&[n[3]], &[n[0]]);
        let Verdict::NotImplied(t) = decide(&m, &goal).unwrap() else { panic!() };
        assert!(!holds(&t, &goal).unwrap());
        for d in m.deps() {
            assert!(holds(&t, d).unwrap());
        }
    }

    #[test]
    fn model_set_agrees_with_search() {
        let m = ConstraintSet::new([od(&["A"], &["B"]), Dependency::compat(l(&["B"]), l(&["C"]))]);
        let models = ModelSet::new(&m).unwrap();
        for x in canonical_lists(m.universe(), 2) {
            for y in canonical_lists(m.universe(), 2) {
                let d = od_list(&x, &y);
                assert_eq!(models.verdict(&d).unwrap(), decide(&m, &d).unwrap(), "{d}");
            }
        }
    }

    fn od_list(x: &MarkedList, y: &MarkedList) -> Dependency {
        Dependency::od(x.clone(), y.clone())
    }
}
