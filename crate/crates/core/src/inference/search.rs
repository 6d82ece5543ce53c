//! Bounded forward-chaining proof search.
//!
//! Knowledge is kept as facts (order dependencies between canonical lists no
//! longer than the budget allows). Seeds are the constraint set and every
//! reflexivity instance; each round applies transitivity, prefix by one
//! attribute, suffix, and chain through a single attribute to everything
//! known so far. Derivations are recorded so a proof can be read back once
//! every fact of the goal is known. The search is sound but incomplete: a
//! miss within the budget says nothing about implication.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::facts::{facts, Fact};
use super::rules::{Binding, RuleId};
use super::{verify_proof, Proof, ProofStep};
use crate::decide::canonical_lists;
use crate::error::{Error, Result};
use crate::model::{Attribute, ConstraintSet, Dependency, MarkedList};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Rounds of rule application after seeding.
    pub max_depth: usize,
    /// Longest canonical list considered; also capped by the universe size.
    pub max_list_len: usize,
    /// Stop once this many facts are known.
    pub max_facts: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_depth: 8, max_list_len: 4, max_facts: 200_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchStats {
    pub rounds: usize,
    pub facts: usize,
    /// No rule produced anything new: the goal is out of reach at this list
    /// length.
    pub saturated: bool,
    /// The fact limit was hit.
    pub fact_limit_hit: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(Proof),
    NotFound(SearchStats),
}

impl SearchOutcome {
    pub fn proof(&self) -> Option<&Proof> {
        match self {
            SearchOutcome::Found(p) => Some(p),
            SearchOutcome::NotFound(_) => None,
        }
    }
}

#[derive(Debug, Clone)]
enum Just {
    Premise,
    Reflexivity,
    Transitivity(MarkedList),
    Prefix(Attribute, Fact),
    Suffix(Fact),
    Chain { x: MarkedList, z: MarkedList, via: Attribute },
}

fn cc(a: &MarkedList, b: &MarkedList) -> MarkedList {
    a.concat(b).canonicalize()
}

fn compat_facts(p: &MarkedList, q: &MarkedList) -> [Fact; 2] {
    let (pq, qp) = (cc(p, q), cc(q, p));
    [(pq.clone(), qp.clone()), (qp, pq)]
}

struct Store {
    known: BTreeMap<Fact, Just>,
    by_lhs: BTreeMap<MarkedList, BTreeSet<MarkedList>>,
    max_len: usize,
}

impl Store {
    fn has(&self, f: &Fact) -> bool {
        self.known.contains_key(f)
    }

    fn compatible(&self, p: &MarkedList, q: &MarkedList) -> bool {
        compat_facts(p, q).iter().all(|f| self.has(f))
    }

    fn add(&mut self, f: Fact, j: Just) -> bool {
        if f.0.len() > self.max_len || f.1.len() > self.max_len || self.known.contains_key(&f) {
            return false;
        }
        self.by_lhs.entry(f.0.clone()).or_default().insert(f.1.clone());
        self.known.insert(f, j);
        true
    }
}

/// Searches for a proof of `goal` from `m` within the budget.
pub fn search_proof(m: &ConstraintSet, goal: &Dependency, budget: Budget) -> Result<SearchOutcome> {
    m.check_covers(goal)?;
    let universe = m.universe();
    let max_len = budget.max_list_len.min(universe.len());
    let mut store = Store { known: BTreeMap::new(), by_lhs: BTreeMap::new(), max_len };
    let goal_facts = facts(goal);

    for d in m.deps() {
        for f in facts(d) {
            store.add(f, Just::Premise);
        }
    }
    let lists = canonical_lists(universe, max_len);
    for l in &lists {
        for k in 0..=l.len() {
            store.add((l.clone(), l.slice(0..k)), Just::Reflexivity);
        }
    }
    let attrs: Vec<Attribute> = universe.iter().cloned().collect();
    let mut stats = SearchStats::default();
    let done = |s: &Store| goal_facts.iter().all(|f| s.has(f));

    while !done(&store) {
        if stats.rounds >= budget.max_depth {
            break;
        }
        if store.known.len() >= budget.max_facts {
            stats.fact_limit_hit = true;
            break;
        }
        stats.rounds += 1;
        let mut fresh: Vec<(Fact, Just)> = Vec::new();
        for (a, b) in store.known.keys() {
            let src = (a.clone(), b.clone());
            let ba = cc(b, a);
            fresh.push(((a.clone(), ba.clone()), Just::Suffix(src.clone())));
            fresh.push(((ba, a.clone()), Just::Suffix(src.clone())));
            for z in &attrs {
                let z = MarkedList::single(z.clone());
                fresh.push(((cc(&z, a), cc(&z, b)), Just::Prefix(z.items()[0].clone(), src.clone())));
            }
            if let Some(next) = store.by_lhs.get(b) {
                for c in next {
                    fresh.push(((a.clone(), c.clone()), Just::Transitivity(b.clone())));
                }
            }
        }
        for x in &lists {
            for z in &lists {
                if x == z || store.compatible(x, z) {
                    continue;
                }
                let via = attrs.iter().find(|c| {
                    let c = MarkedList::single((*c).clone());
                    store.compatible(x, &c)
                        && store.compatible(&c, z)
                        && store.compatible(&cc(&c, x), &cc(&c, z))
                });
                if let Some(c) = via {
                    for f in compat_facts(x, z) {
                        fresh.push((f, Just::Chain { x: x.clone(), z: z.clone(), via: c.clone() }));
                    }
                }
            }
        }
        let mut grew = false;
        for (f, j) in fresh {
            grew |= store.add(f, j);
        }
        if !grew {
            stats.saturated = true;
            break;
        }
    }
    stats.facts = store.known.len();
    if !done(&store) {
        return Ok(SearchOutcome::NotFound(stats));
    }

    let mut builder = Reader { store: &store, m, steps: Vec::new(), memo: HashMap::new(), chain_memo: HashMap::new() };
    let mut at: Vec<usize> = Vec::new();
    for f in &goal_facts {
        let i = builder.fact(f)?;
        if !at.contains(&i) {
            at.push(i);
        }
    }
    let mut steps = builder.steps;
    let single_matches = at.len() == 1 && steps[at[0]].statement == *goal;
    if !single_matches {
        steps.push(ProofStep::new(goal.clone(), RuleId::Combine, at, Binding::new()));
    }
    let proof = Proof::new(steps, goal.clone())?;
    verify_proof(m, &proof).map_err(|e| Error::Internal(format!("search produced an invalid proof: {e}")))?;
    Ok(SearchOutcome::Found(proof))
}

/// Reads a recorded derivation back as proof steps.
struct Reader<'a> {
    store: &'a Store,
    m: &'a ConstraintSet,
    steps: Vec<ProofStep>,
    memo: HashMap<Fact, usize>,
    chain_memo: HashMap<(MarkedList, MarkedList), usize>,
}

impl Reader<'_> {
    fn push(&mut self, step: ProofStep) -> usize {
        self.steps.push(step);
        self.steps.len() - 1
    }

    /// Index of a step whose statement asserts `f`.
    fn fact(&mut self, f: &Fact) -> Result<usize> {
        if let Some(&i) = self.memo.get(f) {
            return Ok(i);
        }
        let just = self
            .store
            .known
            .get(f)
            .ok_or_else(|| Error::Internal(format!("fact {} ↦ {} was not derived", f.0, f.1)))?
            .clone();
        let (a, b) = f.clone();
        let stmt = Dependency::od(a.clone(), b.clone());
        let idx = match just {
            Just::Premise => {
                debug_assert!(self.m.iter().any(|d| super::facts::covers(d, &stmt)));
                self.push(ProofStep::premise(stmt))
            }
            Just::Reflexivity => {
                let binding = Binding::new().with("X", b.clone()).with("Y", a.slice(b.len()..a.len()));
                self.push(ProofStep::new(stmt, RuleId::Reflexivity, vec![], binding))
            }
            Just::Transitivity(mid) => {
                let p1 = self.fact(&(a.clone(), mid.clone()))?;
                let p2 = self.fact(&(mid.clone(), b.clone()))?;
                let binding = Binding::new().with("X", a).with("Y", mid).with("Z", b);
                self.push(ProofStep::new(stmt, RuleId::Transitivity, vec![p1, p2], binding))
            }
            Just::Prefix(z, (x, y)) => {
                let p = self.fact(&(x.clone(), y.clone()))?;
                let binding = Binding::new().with("X", x).with("Y", y).with("Z", MarkedList::single(z));
                self.push(ProofStep::new(stmt, RuleId::Prefix, vec![p], binding))
            }
            Just::Suffix((x, y)) => {
                let p = self.fact(&(x.clone(), y.clone()))?;
                let binding = Binding::new().with("X", x).with("Y", y);
                self.push(ProofStep::new(stmt, RuleId::Suffix, vec![p], binding))
            }
            Just::Chain { x, z, via } => self.chain(x, z, via)?,
        };
        self.memo.insert(f.clone(), idx);
        Ok(idx)
    }

    fn compat(&mut self, p: &MarkedList, q: &MarkedList) -> Result<usize> {
        let [f1, f2] = compat_facts(p, q);
        let i1 = self.fact(&f1)?;
        let i2 = self.fact(&f2)?;
        let stmt = Dependency::compat(p.clone(), q.clone());
        if i1 == i2 && super::facts::covers(&self.steps[i1].statement, &stmt) {
            return Ok(i1);
        }
        Ok(self.push(ProofStep::new(stmt, RuleId::Combine, vec![i1, i2], Binding::new())))
    }

    fn chain(&mut self, x: MarkedList, z: MarkedList, via: Attribute) -> Result<usize> {
        if let Some(&i) = self.chain_memo.get(&(x.clone(), z.clone())) {
            return Ok(i);
        }
        let c = MarkedList::single(via);
        let s1 = self.compat(&x, &c)?;
        let s2 = self.compat(&c, &z)?;
        let s3 = self.compat(&cc(&c, &x), &cc(&c, &z))?;
        let binding = Binding::new().with("X", x.clone()).with("Y1", c).with("Z", z.clone());
        let stmt = Dependency::compat(x.clone(), z.clone());
        let mut prem = vec![s1, s2, s3];
        prem.dedup();
        let i = self.push(ProofStep::new(stmt, RuleId::Chain, prem, binding));
        self.chain_memo.insert((x, z), i);
        Ok(i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decide::implies;
    use crate::inference::check_proof;

    fn od(x: &[&str], y: &[&str]) -> Dependency {
        Dependency::od(MarkedList::of(x), MarkedList::of(y))
    }

    #[test]
    fn finds_transitivity() {
        let m = ConstraintSet::new([od(&["A"], &["B"]), od(&["B"], &["C"])]);
        let goal = od(&["A"], &["C"]);
        let SearchOutcome::Found(p) = search_proof(&m, &goal, Budget::default()).unwrap() else {
            panic!("not found");
        };
        assert!(check_proof(&m, &p));
        assert!(p.steps().iter().any(|s| s.rule == RuleId::Transitivity));
    }

    #[test]
    fn finds_reflexivity_from_nothing() {
        let m = ConstraintSet::default().with_attributes([Attribute::new("A"), Attribute::new("B")]);
        let goal = od(&["A", "B"], &["A"]);
        let p = search_proof(&m, &goal, Budget::default()).unwrap();
        assert_eq!(p.proof().unwrap().len(), 1);
    }

    #[test]
    fn misses_the_converse() {
        let m = ConstraintSet::new([od(&["A"], &["B"])]);
        let goal = od(&["B"], &["A"]);
        let SearchOutcome::NotFound(stats) = search_proof(&m, &goal, Budget::default()).unwrap() else {
            panic!("found a proof of a false claim");
        };
        assert!(stats.saturated);
        assert!(!implies(&m, &goal).unwrap());
    }

    #[test]
    fn uses_chain_for_compatibility() {
        // A ∼ B and B ∼ C plus BA ∼ BC give A ∼ C
        let l = MarkedList::of;
        let m = ConstraintSet::new([
            Dependency::compat(l(&["A"]), l(&["B"])),
            Dependency::compat(l(&["B"]), l(&["C"])),
            Dependency::compat(l(&["B", "A"]), l(&["B", "C"])),
        ]);
        let goal = Dependency::compat(l(&["A"]), l(&["C"]));
        let p = search_proof(&m, &goal, Budget::default()).unwrap();
        let p = p.proof().expect("found");
        assert!(check_proof(&m, p));
    }

    #[test]
    fn goal_outside_universe_is_rejected() {
        let m = ConstraintSet::new([od(&["A"], &["B"])]);
        assert!(search_proof(&m, &od(&["A"], &["Q"]), Budget::default()).is_err());
    }
}
